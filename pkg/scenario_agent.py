# scenario_agent.py

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from classifier_agent import (
    ClassifierAgent,
    Label,
    NPT_TOL,
    PPT_TOL,
    boosted_spin_state,
    ppt_min_eigenvalue,
    realignment_sum,
    rlgmt,
)
from config import ScenarioConfig
from qudit_states import ACCEPTED_INTERPRETATION, PPT_BOUNDARY_X, Interpretation, simplex_state
from relativity import (
    BoostParams,
    boost_two_particle,
    boosted_spin_closed_form,
    build_rho0,
    spin_marginal,
    symmetric_momentum_vector,
)
from separability_agent import (
    DEFAULT_FIXTURE,
    FIXTURE_PRODUCT_TOL,
    SeparabilityAgent,
    SolverBudget,
    boosted_target,
    export_certificate,
)
from tensor_core import purity
from witness_agent import WitnessAgent

logger = logging.getLogger(__name__)

STATUS_OK = 0
STATUS_REPRODUCTION = 2

ACTIVATION_RLGMT = 0.183
ACTIVATION_RLGMT_TOL = 0.01
ACTIVATION_BOOSTED_NPT = -1e-4

FIXTURE_PROBABILITY_SUM = 0.9999998

SIMPLEX_COLUMNS = [f"c{k}{l}" for k in range(3) for l in range(3)] + [
    "purity",
    "realign_sum_minus_1",
    "min_pt_eig",
    "label",
    "boosted_purity",
    "boosted_realign_sum_minus_1",
]


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = pd.DataFrame([[_cell(v) for v in row] for row in rows], columns=list(header))
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Interpretation):
        return value.value
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_json(path: str, payload: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, default=_jsonable)
        f.write("\n")
    return path


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    """Ordered map, optionally over a thread pool."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _outcome(name: str, artifacts: List[str], checks: Dict[str, bool], summary: dict) -> dict:
    status = STATUS_OK if all(checks.values()) else STATUS_REPRODUCTION
    for check, passed in checks.items():
        if not passed:
            logger.warning(f"[Scenario] {name}: check {check} failed")
    return {"scenario": name, "artifacts": artifacts, "checks": checks, "status": status, "summary": summary}


def _boost(cfg: ScenarioConfig, rapidity: float) -> BoostParams:
    return BoostParams(cfg.direction, rapidity)


def _sign_changes(values: Sequence[float]) -> List[int]:
    signs = [np.sign(v) for v in values]
    return [i for i in range(len(signs) - 1) if signs[i] != signs[i + 1] and signs[i] != 0 and signs[i + 1] != 0]


def _crossing(xs: Sequence[float], ys: Sequence[float], i: int) -> float:
    x0, x1, y0, y1 = xs[i], xs[i + 1], ys[i], ys[i + 1]
    return float(x0 - y0 * (x1 - x0) / (y1 - y0))


def cmd_realignment_curve(cfg: ScenarioConfig, memory=None) -> dict:
    xs = list(cfg.x_grid)
    rapidities = list(cfg.rapidities)
    jobs = [(x, xi) for xi in rapidities for x in xs]
    values = _map(lambda job: rlgmt(boosted_spin_state(job[0], _boost(cfg, job[1]), cfg.energy)), jobs, cfg.workers)
    path = write_csv(
        os.path.join(cfg.out_dir, "realignment_curve.csv"),
        ["x", "xi", "rlgmt"],
        [(x, xi, v) for (x, xi), v in zip(jobs, values)],
    )

    curves = {xi: values[i * len(xs):(i + 1) * len(xs)] for i, xi in enumerate(rapidities)}
    checks: Dict[str, bool] = {}
    crossings = {}
    for xi in sorted(curves):
        curve = curves[xi]
        if xi == 0:
            checks["unboosted_positive"] = all(v > 0 for x, v in zip(xs, curve) if x > 0.01)
            continue
        changes = _sign_changes(curve)
        checks[f"single_sign_change_xi_{xi!r}"] = len(changes) == 1
        if len(changes) == 1:
            crossings[xi] = _crossing(xs, curve, changes[0])

    ordered = sorted(curves)
    checks["non_increasing_in_xi"] = all(
        all(b <= a + 1e-12 for a, b in zip(curves[lo], curves[hi])) for lo, hi in zip(ordered, ordered[1:])
    )
    x0 = [crossings[xi] for xi in sorted(crossings)]
    checks["crossing_increasing_in_xi"] = all(a < b for a, b in zip(x0, x0[1:]))

    summary = {"rows": len(jobs), "crossings": {repr(k): v for k, v in crossings.items()}}
    if memory is not None:
        memory.log("Realignment", {**summary, "rapidities": rapidities, "points": len(xs)})
    return _outcome("realignment-curve", [path], checks, summary)


def _scan_row(c: np.ndarray, b: BoostParams, energy: float, classifier: ClassifierAgent) -> list:
    rho = simplex_state(c)
    result = classifier.classify(rho, certify=False)
    boosted = boosted_spin_closed_form(symmetric_momentum_vector(), rho, b, energy)
    return list(c) + [
        purity(rho),
        realignment_sum(rho) - 1.0,
        result.min_pt_eig,
        result.label.value,
        purity(boosted),
        realignment_sum(boosted) - 1.0,
    ]


def cmd_simplex_scan(cfg: ScenarioConfig, memory=None, samples: int = None) -> dict:
    """Barycenter row followed by seeded Dirichlet samples of the magic simplex."""
    samples = samples or cfg.samples
    rng = np.random.default_rng(cfg.seed)
    points = [np.full(9, 1.0 / 9.0)] + list(rng.dirichlet(np.ones(9), size=samples))
    b = _boost(cfg, cfg.scan_rapidity)
    classifier = ClassifierAgent(witness=WitnessAgent(energy=cfg.energy))

    rows = _map(lambda c: _scan_row(c, b, cfg.energy, classifier), points, cfg.workers)
    path = write_csv(os.path.join(cfg.out_dir, "simplex_scan.csv"), SIMPLEX_COLUMNS, rows)

    purity_col, realign_col, eig_col, label_col, boosted_col = 9, 10, 11, 12, 13
    labels = [r[label_col] for r in rows]
    entangled = [r for r in rows if r[label_col] == Label.PPT_ENTANGLED.value]
    mean_purity = float(np.mean([r[purity_col] for r in rows]))
    mean_boosted = float(np.mean([r[boosted_col] for r in rows]))
    checks = {
        "label_contract": all(r[eig_col] >= -NPT_TOL for r in entangled),
        "barycenter_purity": abs(rows[0][purity_col] - 1.0 / 9.0) < 1e-12,
    }
    if cfg.scan_rapidity != 0:
        checks["boosted_purity_decreases"] = mean_boosted < mean_purity
    summary = {
        "rows": len(rows),
        "mean_purity": mean_purity,
        "mean_boosted_purity": mean_boosted,
        "labels": {label.value: labels.count(label.value) for label in Label},
        "realignment_detected": sum(1 for r in entangled if r[realign_col] > 0),
    }
    if memory is not None:
        memory.log("SimplexScan", summary)
    return _outcome("simplex-scan", [path], checks, summary)


def _activation_entry(cfg: ScenarioConfig, interpretation: Interpretation) -> dict:
    state = build_rho0(cfg.p, cfg.activation_x, cfg.energy, interpretation)
    spin = spin_marginal(state)
    boosted = spin_marginal(boost_two_particle(state, _boost(cfg, cfg.activation_rapidity)))
    return {
        "interpretation": interpretation.value,
        "unboosted": {"min_pt_eig": ppt_min_eigenvalue(spin), "rlgmt": rlgmt(spin)},
        "boosted": {"min_pt_eig": ppt_min_eigenvalue(boosted), "rlgmt": rlgmt(boosted)},
    }


def cmd_activate(cfg: ScenarioConfig, memory=None) -> dict:
    entries = [_activation_entry(cfg, i) for i in Interpretation]
    chosen = next(e for e in entries if e["interpretation"] == cfg.interpretation.value)
    report = {
        "p": cfg.p,
        "x": cfg.activation_x,
        "energy": cfg.energy,
        "boost": _boost(cfg, cfg.activation_rapidity).to_dict(),
        "interpretation": cfg.interpretation.value,
        "accepted_interpretation": ACCEPTED_INTERPRETATION.value,
        "unboosted": chosen["unboosted"],
        "boosted": chosen["boosted"],
        "all_interpretations": entries,
    }
    path = write_json(os.path.join(cfg.out_dir, "activate.json"), report)
    if memory is not None:
        memory.log("Activation", {k: report[k] for k in ("p", "x", "interpretation", "unboosted", "boosted")})

    checks = {
        "unboosted_ppt": chosen["unboosted"]["min_pt_eig"] >= -PPT_TOL,
        "unboosted_rlgmt": abs(chosen["unboosted"]["rlgmt"] - ACTIVATION_RLGMT) <= ACTIVATION_RLGMT_TOL,
    }
    if cfg.activation_rapidity != 0:
        checks["boosted_npt"] = chosen["boosted"]["min_pt_eig"] < ACTIVATION_BOOSTED_NPT
    return _outcome("activate", [path], checks, {"unboosted": chosen["unboosted"], "boosted": chosen["boosted"]})


def _point_name(x: float, xi: float) -> str:
    return f"certificate_x{x:.6g}_xi{xi:.6g}.json"


def cmd_certify(cfg: ScenarioConfig, memory=None) -> dict:
    budget = SolverBudget(k=cfg.k_terms, restarts=cfg.restarts, tol=cfg.tol, seed=cfg.seed, workers=cfg.workers)
    agent = SeparabilityAgent(memory, budget)
    artifacts, checks, results = [], {}, []
    for x, xi in cfg.certify_points:
        target = boosted_target(x, _boost(cfg, xi), cfg.energy)
        outcome = agent.certify(target)
        metadata = {"x": x, "xi": xi, "energy": cfg.energy, "direction": list(cfg.direction), **budget.to_dict()}
        path = os.path.join(cfg.out_dir, _point_name(x, xi))
        if outcome.success:
            export_certificate(outcome, path, metadata)
        else:
            write_json(path, {**outcome.to_dict(), "solver": metadata})
        artifacts.append(path)
        expected = x <= PPT_BOUNDARY_X
        checks[f"x{x:.6g}_xi{xi:.6g}"] = outcome.success == expected
        results.append({"x": x, "xi": xi, "success": outcome.success, "expected": expected,
                        "gap": outcome.gap if outcome.success else outcome.to_dict()["best_gap"]})
    return _outcome("certify", artifacts, checks, {"points": results})


def cmd_verify_appendix(cfg: ScenarioConfig, memory=None) -> dict:
    report = SeparabilityAgent(memory).verify(cfg.fixture or DEFAULT_FIXTURE)
    path = write_json(os.path.join(cfg.out_dir, "verify_appendix.json"), report)
    checks = {
        "hs_gap": report["hs_gap"] <= report["gap_tolerance"],
        "probability_sum": abs(report["probability_sum"] - FIXTURE_PROBABILITY_SUM) <= 1e-7,
        "product_vectors": report["max_product_defect"] <= FIXTURE_PRODUCT_TOL,
    }
    return _outcome("verify-appendix", [path], checks, {"hs_gap": report["hs_gap"], "probability_sum": report["probability_sum"]})


def _near(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


def cmd_witness_report(cfg: ScenarioConfig, memory=None) -> dict:
    agent = WitnessAgent(memory, restarts=cfg.seesaw_restarts, seed=cfg.seed, workers=cfg.workers, energy=cfg.energy)
    b = _boost(cfg, cfg.witness_rapidity)
    report = agent.report(cfg.x_grid, b)
    path = write_json(os.path.join(cfg.out_dir, "witness_report.json"), report)

    total, traced = report["total"], report["spin_traced"]
    checks = {
        "total_fit": _near(total["intercept"], 0.5, 1e-3) and _near(total["slope"], 0.25, 1e-3),
        "total_boost_invariant": _near(report["total_boosted"]["intercept"], total["intercept"], 1e-10)
        and _near(report["total_boosted"]["slope"], total["slope"], 1e-10),
        "spin_traced_fit": _near(traced["intercept"], 2.0, 1e-3) and _near(traced["slope"], 1.0, 1e-3),
        "spin_window": _near(report["spin_window"]["lower"], 2.0 / 3.0, 1e-3) and _near(report["spin_window"]["upper"], 2.0, 1e-3),
        "total_inside_window": not report["total_outside_window"],
        "boosted_window_below_analytic": report["spin_window_boosted"]["upper"] <= report["spin_upper_analytic"] + 1e-9,
    }
    summary = {"convention_id": report["convention_id"], "deviations": {}}
    # quoted boosted values exist only for the reference boost
    if cfg.direction == (0.0, 0.0, 1.0) and cfg.witness_rapidity == 0.8 and cfg.energy == 1.0:
        boosted, window = report["spin_traced_boosted"], report["spin_window_boosted"]
        quoted_lower, quoted_upper = report["spin_window_boosted_quoted"]
        checks["spin_traced_boosted_fit"] = _near(boosted["intercept"], 1.694, 2e-3) and _near(boosted["slope"], 0.641, 2e-3)
        checks["spin_window_boosted_lower"] = _near(window["lower"], quoted_lower, 5e-3)
        if not _near(window["upper"], quoted_upper, 5e-3):
            summary["deviations"]["spin_window_boosted_upper"] = {
                "computed": window["upper"],
                "quoted": quoted_upper,
                "difference": report["spin_window_boosted_upper_deviation"],
            }
            logger.warning(f"[Scenario] witness-report: boosted window upper {window['upper']:.4f} differs from quoted {quoted_upper}")
    return _outcome("witness-report", [path], checks, summary)


SCENARIOS: Dict[str, Callable] = {
    "realignment-curve": cmd_realignment_curve,
    "simplex-scan": cmd_simplex_scan,
    "activate": cmd_activate,
    "certify": cmd_certify,
    "verify-appendix": cmd_verify_appendix,
    "witness-report": cmd_witness_report,
}
