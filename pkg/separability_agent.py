# separability_agent.py

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize, nnls

from qudit_states import D
from relativity import BoostParams, boost_two_particle, build_rho1, spin_marginal
from tensor_core import (
    DensityMatrix,
    DimensionMismatch,
    TensorError,
    hermitian_eigenvalues,
    hs_distance,
    partial_transpose,
    singular_values,
)

logger = logging.getLogger(__name__)

DEFAULT_FIXTURE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "sample_inputs", "separable_ensemble.json")

WEIGHT_TOL = 1e-9
PRODUCT_TOL = 1e-6
# printed seven-digit values
FIXTURE_WEIGHT_TOL = 1e-6
FIXTURE_PRODUCT_TOL = 1e-4
FIXTURE_GAP_TOL = 1e-5

NPT_TOL = 1e-8


class FixtureCorrupt(ValueError):
    pass


@dataclass(frozen=True)
class SolverBudget:
    k: int = 10
    restarts: int = 16
    tol: float = 1e-6
    seed: int = 0
    max_iter: int = 5000
    rounds: int = 4
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "restarts": self.restarts,
            "tol": self.tol,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "rounds": self.rounds,
        }


def product_defect(vec) -> float:
    """Second singular value of the 3x3 reshaping; zero exactly for product vectors."""
    v = np.asarray(vec, dtype=np.complex128).reshape(D, D)
    return float(singular_values(v)[1])


@dataclass(frozen=True)
class SeparableEnsemble:
    """k weighted product vectors in C^3 (x) C^3."""

    weights: np.ndarray
    vectors: np.ndarray
    gap: float = float("nan")
    weight_tol: float = WEIGHT_TOL
    product_tol: float = PRODUCT_TOL

    def __post_init__(self):
        p = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape != (p.size, D * D):
            raise DimensionMismatch(f"Expected {p.size} vectors of length {D * D}, got shape {v.shape}")
        if p.size == 0 or np.any(p <= 0):
            raise ValueError("Weights must be strictly positive")
        if abs(p.sum() - 1.0) > self.weight_tol:
            raise ValueError(f"Weights sum to {p.sum()!r}")
        for i, vec in enumerate(v):
            defect = product_defect(vec)
            if defect > self.product_tol:
                raise ValueError(f"Vector {i} is not a product vector (defect {defect:.3e})")
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "weights", p)
        object.__setattr__(self, "vectors", v)

    success = True

    @property
    def k(self) -> int:
        return self.weights.size

    @classmethod
    def from_factors(cls, weights, a, b, gap: float = float("nan")) -> "SeparableEnsemble":
        a = np.asarray(a, dtype=np.complex128)
        b = np.asarray(b, dtype=np.complex128)
        a = a / np.linalg.norm(a, axis=1, keepdims=True)
        b = b / np.linalg.norm(b, axis=1, keepdims=True)
        vectors = np.einsum("ki,kj->kij", a, b).reshape(len(a), D * D)
        return cls(np.asarray(weights, dtype=np.float64), vectors, gap)

    def to_dict(self) -> dict:
        return {
            "probabilities": [float(p) for p in self.weights],
            "vectors": [{"re": [float(x) for x in v.real], "im": [float(x) for x in v.imag]} for v in self.vectors],
            "achieved_gap": None if np.isnan(self.gap) else float(self.gap),
        }


@dataclass(frozen=True)
class CertificationFailure:
    """No certificate was found; carries the best gap reached and the budget spent."""

    best_gap: float
    k: int
    restarts: int
    reason: str
    history: Tuple[float, ...] = field(default_factory=tuple)

    success = False

    def to_dict(self) -> dict:
        return {
            "success": False,
            "reason": self.reason,
            "best_gap": self.best_gap if np.isfinite(self.best_gap) else None,
            "k": self.k,
            "restarts": self.restarts,
            "history": list(self.history),
        }


CertificationResult = Union[SeparableEnsemble, CertificationFailure]


def _mixture(e: SeparableEnsemble) -> np.ndarray:
    p = e.weights / e.weights.sum()
    v = e.vectors / np.linalg.norm(e.vectors, axis=1, keepdims=True)
    return np.einsum("k,ki,kj->ij", p, v, v.conj())


def ensemble_state(e: SeparableEnsemble) -> DensityMatrix:
    return DensityMatrix(_mixture(e), (D, D))


def fixture_state(e: SeparableEnsemble) -> DensityMatrix:
    """Mixture of a loaded ensemble, validated with the user-input tolerance."""
    try:
        return DensityMatrix.from_user(_mixture(e), (D, D))
    except TensorError as err:
        raise FixtureCorrupt(f"Ensemble does not describe a state: {err}")


class _Objective:
    """||sum_i p_i |a_i b_i><a_i b_i| - rho||_F^2 and its gradient over packed real parameters."""

    def __init__(self, rho: np.ndarray, k: int):
        self.rho = rho
        self.k = k

    def unpack(self, params: np.ndarray):
        k = self.k
        z = params[:k]
        ar, ai, br, bi = params[k:].reshape(4, k, D)
        return z, ar + 1j * ai, br + 1j * bi

    def pack(self, z, a, b) -> np.ndarray:
        return np.concatenate([z, a.real.ravel(), a.imag.ravel(), b.real.ravel(), b.imag.ravel()])

    @staticmethod
    def weights(z: np.ndarray) -> np.ndarray:
        e = np.exp(z - z.max())
        return e / e.sum()

    @staticmethod
    def _unit(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n = np.maximum(np.linalg.norm(a, axis=1), 1e-300)
        return a / n[:, None], n

    def products(self, a, b) -> np.ndarray:
        ua, _ = self._unit(a)
        ub, _ = self._unit(b)
        return np.einsum("ki,kj->kij", ua, ub).reshape(self.k, D * D)

    def value(self, params: np.ndarray) -> float:
        z, a, b = self.unpack(params)
        psi = self.products(a, b)
        sigma = (psi.T * self.weights(z)) @ psi.conj()
        r = sigma - self.rho
        return float(np.vdot(r, r).real)

    def __call__(self, params: np.ndarray) -> Tuple[float, np.ndarray]:
        z, a, b = self.unpack(params)
        p = self.weights(z)
        ua, na = self._unit(a)
        ub, nb = self._unit(b)
        psi = np.einsum("ki,kj->kij", ua, ub).reshape(self.k, D * D)

        sigma = (psi.T * p) @ psi.conj()
        r = sigma - self.rho
        f = float(np.vdot(r, r).real)
        g_op = 2.0 * r

        gp = np.einsum("ki,ij,kj->k", psi.conj(), g_op, psi).real
        grad_z = p * (gp - p @ gp)

        h = (psi @ g_op.T).reshape(self.k, D, D)
        h_a = np.einsum("kij,kj->ki", h, ub.conj())
        h_b = np.einsum("kij,ki->kj", h, ua.conj())
        grad_a = (h_a - ua * np.real(np.sum(ua.conj() * h_a, axis=1))[:, None]) / na[:, None]
        grad_b = (h_b - ub * np.real(np.sum(ub.conj() * h_b, axis=1))[:, None]) / nb[:, None]
        grad_a *= 2.0 * p[:, None]
        grad_b *= 2.0 * p[:, None]

        grad = np.concatenate([grad_z, grad_a.real.ravel(), grad_a.imag.ravel(), grad_b.real.ravel(), grad_b.imag.ravel()])
        return f, grad

    def refit_weights(self, params: np.ndarray) -> np.ndarray:
        """Non-negative least squares for the weights with the product vectors held fixed."""
        z, a, b = self.unpack(params)
        psi = self.products(a, b)
        proj = np.einsum("ki,kj->kij", psi, psi.conj()).reshape(self.k, -1)
        lhs = np.vstack([proj.real.T, proj.imag.T])
        rhs = np.concatenate([self.rho.real.ravel(), self.rho.imag.ravel()])
        p, _ = nnls(lhs, rhs)
        if p.sum() <= 0:
            return params
        return self.pack(np.log(p / p.sum() + 1e-12), a, b)


def _run_restart(rho: np.ndarray, budget: SolverBudget, seed: np.random.SeedSequence) -> Tuple[float, np.ndarray, List[float]]:
    rng = np.random.default_rng(seed)
    objective = _Objective(rho, budget.k)
    k = budget.k
    params = objective.pack(
        0.1 * rng.normal(size=k),
        rng.normal(size=(k, D)) + 1j * rng.normal(size=(k, D)),
        rng.normal(size=(k, D)) + 1j * rng.normal(size=(k, D)),
    )
    best = objective.value(params)
    history = []
    for _ in range(budget.rounds):
        res = minimize(
            objective,
            params,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": budget.max_iter, "maxfun": 4 * budget.max_iter, "ftol": 1e-30, "gtol": 1e-16},
        )
        if res.fun < best:
            params, best = res.x, float(res.fun)
        refit = objective.refit_weights(params)
        refit_value = objective.value(refit)
        if refit_value < best:
            params, best = refit, refit_value
        history.append(float(np.sqrt(best)))
        if np.sqrt(best) <= budget.tol:
            break
    return float(np.sqrt(best)), params, history


def _to_ensemble(rho: DensityMatrix, params: np.ndarray, k: int) -> SeparableEnsemble:
    objective = _Objective(rho.matrix, k)
    z, a, b = objective.unpack(params)
    p = objective.weights(z)
    keep = p > 0
    ensemble = SeparableEnsemble.from_factors(p[keep] / p[keep].sum(), a[keep], b[keep])
    return replace(ensemble, gap=hs_distance(ensemble_state(ensemble), rho))


def certify_separable(
    rho: DensityMatrix,
    k: int = 10,
    restarts: int = 16,
    seed: int = 0,
    tol: float = 1e-6,
    budget: Optional[SolverBudget] = None,
) -> CertificationResult:
    """
    Search for a k-term product ensemble within Hilbert-Schmidt distance tol of rho.

    Restarts run in index order and stop at the first success; the reported
    gap is recomputed from the returned ensemble.
    """
    if budget is None:
        budget = SolverBudget(k=k, restarts=restarts, tol=tol, seed=seed)
    if rho.dims != (D, D):
        raise DimensionMismatch(f"Certification needs a 3x3 state, got dims {rho.dims}")

    lowest = float(hermitian_eigenvalues(partial_transpose(rho))[0])
    if lowest < -NPT_TOL:
        logger.info(f"[Separability] State is NPT (min PT eigenvalue {lowest:.3e}); no certificate possible")
        return CertificationFailure(float("inf"), budget.k, 0, "npt")

    seeds = np.random.SeedSequence(budget.seed).spawn(budget.restarts)
    history: List[float] = []
    best_gap, best_params = float("inf"), None

    def record(result):
        nonlocal best_gap, best_params
        gap, params, trace = result
        if gap < best_gap:
            best_gap, best_params = gap, params
        for g in trace:
            history.append(min(g, history[-1]) if history else g)

    if budget.workers > 1:
        with ThreadPoolExecutor(max_workers=budget.workers) as pool:
            results = list(pool.map(lambda s: _run_restart(rho.matrix, budget, s), seeds))
        for result in results:
            record(result)
            if result[0] <= budget.tol:
                break
    else:
        for i, s in enumerate(seeds):
            record(_run_restart(rho.matrix, budget, s))
            logger.debug(f"[Separability] restart {i}: best gap {best_gap:.3e}")
            if best_gap <= budget.tol:
                break

    if best_gap <= budget.tol:
        ensemble = _to_ensemble(rho, best_params, budget.k)
        logger.info(f"[Separability] Certified with k={ensemble.k}, gap {ensemble.gap:.3e}")
        return ensemble

    logger.info(f"[Separability] No certificate: best gap {best_gap:.3e} after {budget.restarts} restarts")
    return CertificationFailure(best_gap, budget.k, budget.restarts, "budget exhausted", tuple(history))


def load_ensemble(path: str, weight_tol: float = FIXTURE_WEIGHT_TOL, product_tol: float = FIXTURE_PRODUCT_TOL) -> SeparableEnsemble:
    """Read an ensemble stored as {probabilities, vectors: [{re, im}]}."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        weights = np.asarray(data["probabilities"], dtype=np.float64)
        vectors = np.array(
            [np.asarray(v["re"], dtype=np.float64) + 1j * np.asarray(v["im"], dtype=np.float64) for v in data["vectors"]]
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise FixtureCorrupt(f"Cannot read ensemble from {path}: {e}")

    if weights.ndim != 1 or vectors.shape != (weights.size, D * D):
        raise FixtureCorrupt(f"Shape mismatch: {weights.shape} weights, {vectors.shape} vectors")
    gap = data.get("achieved_gap")
    try:
        return SeparableEnsemble(
            weights,
            vectors,
            float("nan") if gap is None else float(gap),
            weight_tol=weight_tol,
            product_tol=product_tol,
        )
    except ValueError as e:
        raise FixtureCorrupt(str(e))


def export_certificate(ensemble: SeparableEnsemble, path: str, metadata: Optional[dict] = None) -> str:
    payload = ensemble.to_dict()
    payload["solver"] = dict(metadata or {})
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return path


def boosted_target(x: float = 1.0 / 15.0, b: Optional[BoostParams] = None, energy: float = 1.0) -> DensityMatrix:
    """Spin marginal of rho1(x) after the boost b (z-axis, rapidity 0.8 by default)."""
    b = b or BoostParams((0.0, 0.0, 1.0), 0.8)
    return spin_marginal(boost_two_particle(build_rho1(x, energy), b))


def verify_appendix_fixture(path: str = DEFAULT_FIXTURE, b: Optional[BoostParams] = None, energy: float = 1.0) -> dict:
    ensemble = load_ensemble(path)
    target = boosted_target(1.0 / 15.0, b, energy)
    norms = np.linalg.norm(ensemble.vectors, axis=1)
    defects = [product_defect(v / n) for v, n in zip(ensemble.vectors, norms)]
    gap = hs_distance(fixture_state(ensemble), target)
    return {
        "path": path,
        "k": ensemble.k,
        "probability_sum": float(ensemble.weights.sum()),
        "norm_deviation": [float(abs(n - 1.0)) for n in norms],
        "product_defect": defects,
        "max_product_defect": max(defects),
        "hs_gap": gap,
        "gap_tolerance": FIXTURE_GAP_TOL,
        "passed": bool(gap <= FIXTURE_GAP_TOL and max(defects) <= FIXTURE_PRODUCT_TOL),
    }


class SeparabilityAgent:
    def __init__(self, memory=None, budget: Optional[SolverBudget] = None):
        self.memory = memory
        self.budget = budget or SolverBudget()
        self.logger = logging.getLogger(__name__)

    def certify(self, rho: DensityMatrix, **overrides) -> CertificationResult:
        budget = replace(self.budget, **overrides) if overrides else self.budget
        self.logger.info(f"[Separability] Certifying with k={budget.k}, restarts={budget.restarts}, tol={budget.tol}")
        result = certify_separable(rho, budget=budget)
        if self.memory is not None:
            summary = {"success": result.success, "budget": budget.to_dict()}
            summary["gap"] = result.gap if result.success else result.best_gap
            self.memory.log("Separability", summary)
        return result

    def verify(self, path: str = DEFAULT_FIXTURE) -> dict:
        report = verify_appendix_fixture(path)
        self.logger.info(f"[Separability] Fixture gap {report['hs_gap']:.3e}")
        if self.memory is not None:
            self.memory.log("Separability", {"fixture": path, "hs_gap": report["hs_gap"], "passed": report["passed"]})
        return report
