# classifier_agent.py

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from relativity import BoostParams, boost_two_particle, build_rho1, spin_marginal
from separability_agent import SolverBudget, certify_separable
from tensor_core import DensityMatrix, MIN_EIGENVALUE_TOL, hermitian_eigenvalues, partial_transpose, realign, singular_values
from witness_agent import WitnessAgent

logger = logging.getLogger(__name__)

PPT_TOL = MIN_EIGENVALUE_TOL
NPT_TOL = 1e-8
REALIGN_TOL = 1e-10


class Label(str, Enum):
    NPT_FREE = "NPT_FREE"
    PPT_ENTANGLED = "PPT_ENTANGLED"
    SEPARABLE = "SEPARABLE"
    PPT_UNDECIDED = "PPT_UNDECIDED"


def ppt_min_eigenvalue(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the partial transpose on the last subsystem."""
    return float(hermitian_eigenvalues(partial_transpose(rho, subsystem=len(rho.dims) - 1))[0])


def realignment_sum(rho: DensityMatrix) -> float:
    return float(singular_values(realign(rho)).sum())


def rlgmt(rho: DensityMatrix) -> float:
    """log2 of the trace norm of the realigned matrix; positive values certify entanglement."""
    return float(np.log2(realignment_sum(rho)))


def is_borderline(min_pt_eig: float) -> bool:
    return -NPT_TOL <= min_pt_eig < -PPT_TOL


def boosted_spin_state(x: float, b: BoostParams, energy: float = 1.0) -> DensityMatrix:
    return spin_marginal(boost_two_particle(build_rho1(x, energy), b))


def realignment_curve(x_grid: Sequence[float], b: BoostParams, energy: float = 1.0) -> List[Tuple[float, float]]:
    return [(float(x), rlgmt(boosted_spin_state(x, b, energy))) for x in x_grid]


@dataclass
class ClassificationResult:
    label: Label
    min_pt_eig: float
    rlgmt: float
    witness: Optional[float] = None
    witness_upper: Optional[float] = None
    borderline: bool = False
    certificate: Optional[dict] = None
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.label is Label.NPT_FREE and not self.min_pt_eig < -NPT_TOL:
            raise ValueError("NPT_FREE needs a negative partial-transpose eigenvalue")
        if self.label is not Label.NPT_FREE and self.min_pt_eig < -NPT_TOL:
            raise ValueError(f"{self.label.value} needs a PPT state, min PT eigenvalue is {self.min_pt_eig:.3e}")
        if self.label is Label.PPT_ENTANGLED and not self.has_evidence:
            raise ValueError("PPT_ENTANGLED needs realignment or witness evidence")
        if self.label is Label.SEPARABLE and not (self.certificate and self.certificate.get("success")):
            raise ValueError("SEPARABLE needs an attached certificate")

    @property
    def has_evidence(self) -> bool:
        witnessed = self.witness is not None and self.witness_upper is not None and self.witness > self.witness_upper + PPT_TOL
        return self.rlgmt > REALIGN_TOL or witnessed

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "min_pt_eig": self.min_pt_eig,
            "rlgmt": self.rlgmt,
            "witness": self.witness,
            "witness_upper": self.witness_upper,
            "borderline": self.borderline,
            "certificate": self.certificate,
            "notes": list(self.notes),
        }


class ClassifierAgent:
    def __init__(self, memory=None, witness: Optional[WitnessAgent] = None, budget: Optional[SolverBudget] = None):
        self.memory = memory
        self.witness = witness or WitnessAgent()
        self.budget = budget or SolverBudget()
        self.logger = logging.getLogger(__name__)

    def classify(self, rho: DensityMatrix, budget: Optional[SolverBudget] = None, certify: bool = True) -> ClassificationResult:
        """
        NPT first, then the one-sided entanglement tests, then the separability
        solver. With certify=False the solver is skipped and undetected PPT
        states stay undecided.
        """
        min_eig = ppt_min_eigenvalue(rho)
        value = rlgmt(rho)
        if min_eig < -NPT_TOL:
            return self._log(ClassificationResult(Label.NPT_FREE, min_eig, value))

        borderline = is_borderline(min_eig)
        notes: List[str] = []
        if borderline:
            notes.append("borderline partial transpose")
            self.logger.warning(f"[Classifier] Borderline PT eigenvalue {min_eig:.3e}; treated as PPT")

        witness = witness_upper = None
        if rho.dims == (3, 3):
            report = self.witness.evaluate(rho)
            witness, witness_upper = report.value, report.upper

        if value > REALIGN_TOL:
            notes.append("realignment")
        if witness is not None and witness > witness_upper + PPT_TOL:
            notes.append("mub witness")

        label, certificate = Label.PPT_UNDECIDED, None
        if "realignment" in notes or "mub witness" in notes:
            label = Label.PPT_ENTANGLED
        elif certify:
            outcome = certify_separable(rho, budget=budget or self.budget)
            if outcome.success:
                label = Label.SEPARABLE
                certificate = {"success": True, "k": outcome.k, "gap": outcome.gap}
            else:
                certificate = outcome.to_dict()
        result = ClassificationResult(label, min_eig, value, witness, witness_upper, borderline, certificate, notes)
        return self._log(result)

    def _log(self, result: ClassificationResult) -> ClassificationResult:
        self.logger.debug(f"[Classifier] {result.label.value}: min PT eig {result.min_pt_eig:.3e}, RLGMT {result.rlgmt:.4f}")
        if self.memory is not None:
            self.memory.log("Classifier", result.to_dict())
        return result
