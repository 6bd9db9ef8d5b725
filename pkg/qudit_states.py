# qudit_states.py

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from tensor_core import ComplexMatrix, DensityMatrix, projector

logger = logging.getLogger(__name__)

D = 3
OMEGA = np.exp(2j * np.pi / D)

# Spin projection -> computational index, shared by every module.
SPIN_INDEX: Dict[int, int] = {-1: 0, 0: 1, 1: 2}

PPT_BOUNDARY_X = 2.0 / 15.0
X_MAX = 1.0 / 3.0

# Coefficient table of the activation spin state.
ACTIVATION_TABLE = np.array(
    [
        [0.0, 2.0 / 9.0, 2.0 / 9.0],
        [0.0, 2.0 / 9.0, 1.0 / 18.0],
        [5.0 / 18.0, 0.0, 0.0],
    ]
)


class QuditError(ValueError):
    pass


class InvalidCoefficients(QuditError):
    pass


class OutOfRange(QuditError):
    pass


class UnknownInterpretation(QuditError):
    pass


class Interpretation(str, Enum):
    """Ways of reading the activation coefficient table."""

    LITERAL_RENORMALIZED = "literal-renormalized"
    SQRT_AMPLITUDES = "sqrt-amplitudes"
    BELL_MIXTURE = "bell-mixture"

    @classmethod
    def parse(cls, value) -> "Interpretation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise UnknownInterpretation(
                f"Unknown interpretation {value!r}; choose one of {[i.value for i in cls]}"
            )


ACCEPTED_INTERPRETATION = Interpretation.BELL_MIXTURE


@dataclass(frozen=True)
class MagicCoefficients:
    """Probabilities c_{k,l} weighting the nine Bell projectors."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.shape == (D * D,):
            c = c.reshape(D, D)
        if c.shape != (D, D):
            raise InvalidCoefficients(f"Expected a 3x3 table, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidCoefficients("Coefficients must be finite")
        if np.any(c < -1e-15):
            raise InvalidCoefficients(f"Negative coefficient {c.min()!r}")
        if abs(c.sum() - 1.0) > 1e-12:
            raise InvalidCoefficients(f"Coefficients sum to {c.sum()!r}, expected 1")
        c = np.clip(c, 0.0, None)
        c.flags.writeable = False
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class MubSet:
    """d+1 mutually unbiased bases; bases[k][i] is the i-th vector of basis k."""

    bases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        bases = tuple(np.asarray(b, dtype=np.complex128) for b in self.bases)
        for k, basis in enumerate(bases):
            gram = basis.conj() @ basis.T
            if np.max(np.abs(gram - np.eye(len(basis)))) > 1e-12:
                raise QuditError(f"Basis {k} is not orthonormal")
        for k in range(len(bases)):
            for l in range(k + 1, len(bases)):
                overlaps = np.abs(bases[k].conj() @ bases[l].T) ** 2
                if np.max(np.abs(overlaps - 1.0 / D)) > 1e-10:
                    raise QuditError(f"Bases {k} and {l} are not unbiased")
        object.__setattr__(self, "bases", bases)


def weyl(k: int, l: int) -> ComplexMatrix:
    """W_{k,l} = sum_j omega^{j k} |j><j+l|, indices mod 3."""
    w = np.zeros((D, D), dtype=np.complex128)
    for j in range(D):
        w[j, (j + l) % D] = OMEGA ** ((j * k) % D)
    return w


def bell_state(k: int, l: int) -> np.ndarray:
    omega00 = np.zeros(D * D, dtype=np.complex128)
    for j in range(D):
        omega00[j * D + j] = 1.0 / np.sqrt(D)
    return np.kron(weyl(k, l), np.eye(D)) @ omega00


def bell_projector(k: int, l: int) -> ComplexMatrix:
    return projector(bell_state(k, l))


_BELL_PROJECTORS = np.array([[bell_projector(k, l) for l in range(D)] for k in range(D)])


def simplex_state(c) -> DensityMatrix:
    """Bell-diagonal state sum_{k,l} c_{k,l} P_{k,l}."""
    if not isinstance(c, MagicCoefficients):
        c = MagicCoefficients(c)
    rho = np.einsum("kl,klij->ij", c.c, _BELL_PROJECTORS)
    return DensityMatrix(rho, (D, D))


def rho_b_coefficients(x: float) -> MagicCoefficients:
    if not -1e-12 <= x <= X_MAX + 1e-12:
        raise OutOfRange(f"x must lie in [0, 1/3], got {x!r}")
    x = min(max(float(x), 0.0), X_MAX)
    rest = X_MAX - x
    return MagicCoefficients(
        [
            [2 * x, 0.0, rest],
            [0.0, x, rest],
            [0.0, 0.0, rest],
        ]
    )


def rho_b(x: float) -> DensityMatrix:
    """One-parameter family: PPT for x <= 2/15, entangled for every x > 0."""
    return simplex_state(rho_b_coefficients(x))


def phi_spin(interpretation=Interpretation.SQRT_AMPLITUDES) -> np.ndarray:
    """
    Activation spin ket sum a_{k,l} |Omega_{k,l}>.

    The table does not square-sum to one, so it is either renormalized as it
    stands or read as probabilities whose square roots are the amplitudes.
    """
    interpretation = Interpretation.parse(interpretation)
    if interpretation is Interpretation.BELL_MIXTURE:
        raise UnknownInterpretation("The bell-mixture reading is a mixed state; use phi_spin_state")

    if interpretation is Interpretation.SQRT_AMPLITUDES:
        amplitudes = np.sqrt(ACTIVATION_TABLE)
    else:
        amplitudes = ACTIVATION_TABLE

    vec = np.zeros(D * D, dtype=np.complex128)
    for k in range(D):
        for l in range(D):
            vec += amplitudes[k, l] * bell_state(k, l)
    return vec / np.linalg.norm(vec)


def phi_spin_state(interpretation=ACCEPTED_INTERPRETATION) -> DensityMatrix:
    interpretation = Interpretation.parse(interpretation)
    if interpretation is Interpretation.BELL_MIXTURE:
        return simplex_state(ACTIVATION_TABLE)
    return DensityMatrix(projector(phi_spin(interpretation)), (D, D))


def mub_bases() -> MubSet:
    """
    Complete set of four qutrit MUBs.

    basis 0: computational |j>
    basis 1: Fourier, v_i[j] = omega^{i j} / sqrt(3)
    basis 2: v_i[j] = omega^{j^2 + i j} / sqrt(3)
    basis 3: v_i[j] = omega^{2 j^2 + i j} / sqrt(3)
    """
    bases = [np.eye(D, dtype=np.complex128)]
    j = np.arange(D)
    for r in range(D):
        basis = np.array([OMEGA ** ((r * j * j + i * j) % D) for i in range(D)]) / np.sqrt(D)
        bases.append(basis)
    return MubSet(tuple(bases))
