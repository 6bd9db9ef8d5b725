# relativity.py

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from qudit_states import SPIN_INDEX, Interpretation, phi_spin_state, rho_b
from tensor_core import ComplexMatrix, DensityMatrix, kron_all, partial_trace, projector

logger = logging.getLogger(__name__)

MASS = 1.0
MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])
ON_SHELL_TOL = 1e-10
ROTATION_TOL = 1e-8

MOMENTUM_DIM = 4  # two particles, two momentum labels each
SPIN_DIM = 3
TWO_PARTICLE_DIMS = (2, 2, SPIN_DIM, SPIN_DIM)

# Spherical components of the vector representation, keyed by spin projection.
SPHERICAL_ROWS = {
    -1: (-1.0, 1j, 0.0),
    0: (0.0, 0.0, np.sqrt(2.0)),
    1: (1.0, 1j, 0.0),
}


def _spin_basis() -> np.ndarray:
    v = np.zeros((SPIN_DIM, 3), dtype=np.complex128)
    for m, row in SPHERICAL_ROWS.items():
        v[SPIN_INDEX[m]] = row
    return v / np.sqrt(2.0)


V = _spin_basis()


class RelativityError(ValueError):
    pass


class NonPositiveEnergy(RelativityError):
    pass


class OffShell(RelativityError):
    pass


class NotRotation(RelativityError):
    pass


class InvalidBoost(RelativityError):
    pass


@dataclass(frozen=True)
class FourVector:
    t: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, arr) -> "FourVector":
        t, x, y, z = (float(v) for v in np.asarray(arr, dtype=np.float64).reshape(4))
        return cls(t, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z], dtype=np.float64)

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def minkowski_square(self) -> float:
        v = self.as_array()
        return float(v @ MINKOWSKI @ v)

    def is_on_shell(self, tol: float = ON_SHELL_TOL) -> bool:
        return self.t > 0 and abs(self.minkowski_square() - MASS ** 2) <= tol * max(1.0, self.t ** 2)


REST_MOMENTUM = FourVector(MASS, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BoostParams:
    """Boost along the unit vector `direction` with rapidity `rapidity`."""

    direction: Tuple[float, float, float]
    rapidity: float

    def __post_init__(self):
        e = np.asarray(self.direction, dtype=np.float64).reshape(-1)
        if e.shape != (3,) or not np.all(np.isfinite(e)):
            raise InvalidBoost(f"Direction must be a finite 3-vector, got {self.direction!r}")
        if abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise InvalidBoost(f"Direction {self.direction!r} is not a unit vector")
        if not np.isfinite(self.rapidity):
            raise InvalidBoost("Rapidity must be finite")
        object.__setattr__(self, "direction", tuple(float(v) for v in e))
        object.__setattr__(self, "rapidity", float(self.rapidity))

    @classmethod
    def along(cls, direction: Sequence[float], rapidity: float) -> "BoostParams":
        e = np.asarray(direction, dtype=np.float64).reshape(-1)
        norm = np.linalg.norm(e)
        if e.shape != (3,) or norm == 0 or not np.isfinite(norm):
            raise InvalidBoost(f"Cannot normalize direction {direction!r}")
        return cls(tuple(e / norm), rapidity)

    def to_dict(self) -> dict:
        return {"direction": list(self.direction), "rapidity": self.rapidity}


def four_momentum(energy: float, axis_sign: int = 1) -> FourVector:
    """On-shell momentum of kinetic energy E travelling along +x or -x."""
    if not energy > 0:
        raise NonPositiveEnergy(f"Kinetic energy must be positive, got {energy!r}")
    if axis_sign not in (1, -1):
        raise RelativityError(f"axis_sign must be +1 or -1, got {axis_sign!r}")
    return FourVector(MASS + energy, axis_sign * np.sqrt(energy * (2 * MASS + energy)), 0.0, 0.0)


def momentum_pair(energy: float) -> Tuple[FourVector, FourVector]:
    return four_momentum(energy, 1), four_momentum(energy, -1)


def boost_matrix(b: BoostParams) -> np.ndarray:
    e = np.asarray(b.direction)
    ch, sh = np.cosh(b.rapidity), np.sinh(b.rapidity)
    lam = np.empty((4, 4), dtype=np.float64)
    lam[0, 0] = ch
    lam[0, 1:] = e * sh
    lam[1:, 0] = e * sh
    lam[1:, 1:] = np.eye(3) + (ch - 1.0) * np.outer(e, e)
    return lam


def _check_on_shell(k: FourVector):
    if not k.is_on_shell():
        raise OffShell(f"{k} is off shell: k.k = {k.minkowski_square()!r}")


def standard_boost(k: FourVector) -> np.ndarray:
    """L_k, carrying the rest momentum (m, 0, 0, 0) to k."""
    _check_on_shell(k)
    k0, kv = k.t, k.spatial
    lk = np.empty((4, 4), dtype=np.float64)
    lk[0, 0] = k0
    lk[0, 1:] = kv
    lk[1:, 0] = kv
    lk[1:, 1:] = MASS * np.eye(3) + np.outer(kv, kv) / (MASS + k0)
    return lk / MASS


def lorentz_inverse(lam: np.ndarray) -> np.ndarray:
    return MINKOWSKI @ lam.T @ MINKOWSKI


def boost_momentum(b: BoostParams, k: FourVector) -> FourVector:
    return FourVector.from_array(boost_matrix(b) @ k.as_array())


def wigner_rotation(b: BoostParams, k: FourVector) -> np.ndarray:
    """R(Lambda, k) = L_{Lambda k}^{-1} Lambda L_k, returned as its spatial block."""
    _check_on_shell(k)
    lam = boost_matrix(b)
    lk = standard_boost(k)
    lp = standard_boost(FourVector.from_array(lam @ k.as_array()))
    r4 = lorentz_inverse(lp) @ lam @ lk

    # round-off grows with the size of the factors
    scale = max(1.0, np.abs(lam).max() * np.abs(lk).max() * np.abs(lp).max())
    time_defect = max(abs(r4[0, 0] - 1.0), np.abs(r4[0, 1:]).max(), np.abs(r4[1:, 0]).max())
    if time_defect > ON_SHELL_TOL * scale:
        raise NotRotation(f"Wigner rotation has a non-trivial time part ({time_defect:.3e})")

    r = r4[1:, 1:]
    _check_rotation(r)
    return r


def _check_rotation(r: np.ndarray):
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise NotRotation(f"Expected a 3x3 matrix, got {r.shape}")
    defect = np.abs(r.T @ r - np.eye(3)).max()
    if defect > ROTATION_TOL or abs(np.linalg.det(r) - 1.0) > ROTATION_TOL:
        raise NotRotation(f"Matrix is not a proper rotation (orthogonality defect {defect:.3e})")


def spin1_rep(r: np.ndarray) -> ComplexMatrix:
    """Spin-1 representation D(R) = V R V^dagger."""
    _check_rotation(r)
    return V @ np.asarray(r, dtype=np.complex128) @ V.conj().T


def spin_rotation(b: BoostParams, k: FourVector) -> ComplexMatrix:
    return spin1_rep(wigner_rotation(b, k))


@dataclass(frozen=True)
class TwoParticleState:
    """
    Two particles on the momentum lattice {k1, k2} with spin 1 each.

    The density matrix is ordered (momentum 1, momentum 2, spin 1, spin 2);
    momentum slot m of either particle carries the label momenta[m].
    """

    momenta: Tuple[FourVector, FourVector]
    density: DensityMatrix

    def __post_init__(self):
        if len(self.momenta) != 2:
            raise RelativityError("Exactly two momentum labels are supported")
        for k in self.momenta:
            _check_on_shell(k)
        if self.density.dims != TWO_PARTICLE_DIMS:
            raise RelativityError(f"Expected dims {TWO_PARTICLE_DIMS}, got {self.density.dims}")
        object.__setattr__(self, "momenta", tuple(self.momenta))


def two_particle_unitary(b: BoostParams, momenta: Sequence[FourVector]) -> ComplexMatrix:
    """
    U(Lambda) (x) U(Lambda) on the 36-dimensional space with momentum slots kept.

    |k_m, k_n; s, l> picks up D(R(Lambda, k_m)) (x) D(R(Lambda, k_n)) on the spins.
    """
    rotations = [spin_rotation(b, k) for k in momenta]
    u = np.zeros((36, 36), dtype=np.complex128)
    for m in range(2):
        for n in range(2):
            slot = np.zeros((2, 2))
            slot[m, m] = 1.0
            slot_n = np.zeros((2, 2))
            slot_n[n, n] = 1.0
            u += kron_all(slot, slot_n, rotations[m], rotations[n])
    return u


def boost_two_particle(s: TwoParticleState, b: BoostParams) -> TwoParticleState:
    u = two_particle_unitary(b, s.momenta)
    boosted = u @ s.density.matrix @ u.conj().T
    momenta = tuple(boost_momentum(b, k) for k in s.momenta)
    return TwoParticleState(momenta, DensityMatrix(boosted, TWO_PARTICLE_DIMS))


def spin_marginal(s: TwoParticleState) -> DensityMatrix:
    return partial_trace(s.density, keep=(2, 3))


def momentum_marginal(s: TwoParticleState) -> DensityMatrix:
    return partial_trace(s.density, keep=(0, 1))


def symmetric_momentum_vector() -> np.ndarray:
    """(|k1,k2> + |k2,k1>)/sqrt(2) in the slot basis |m n> -> index 2m + n."""
    psi = np.zeros(MOMENTUM_DIM, dtype=np.complex128)
    psi[1] = psi[2] = 1.0 / np.sqrt(2.0)
    return psi


def product_momentum_vector(m: int = 0, n: int = 1) -> np.ndarray:
    psi = np.zeros(MOMENTUM_DIM, dtype=np.complex128)
    psi[2 * m + n] = 1.0
    return psi


def build_separable_state(terms: Iterable[Tuple[float, np.ndarray, DensityMatrix]], energy: float) -> TwoParticleState:
    """
    sum_i p_i rho_mom^i (x) rho_spin^i, separable across momenta versus spins.

    Each momentum part is a 4x4 operator in the slot basis or a 4-vector
    (taken as the pure state it spans).
    """
    total = np.zeros((36, 36), dtype=np.complex128)
    weight = 0.0
    for p, mom, spin in terms:
        if p < 0:
            raise RelativityError(f"Negative mixture weight {p!r}")
        mom = np.asarray(mom, dtype=np.complex128)
        if mom.ndim == 1:
            mom = projector(mom / np.linalg.norm(mom))
        total += p * np.kron(mom, spin.matrix)
        weight += p
    if abs(weight - 1.0) > 1e-12:
        raise RelativityError(f"Mixture weights sum to {weight!r}")
    return TwoParticleState(momentum_pair(energy), DensityMatrix(total, TWO_PARTICLE_DIMS))


def pure_momentum_state(a: np.ndarray, rho_spin: DensityMatrix, energy: float) -> TwoParticleState:
    """|psi_mom><psi_mom| (x) rho_spin with psi_mom = sum_ij a_ij |k_i, k_j>."""
    a = np.asarray(a, dtype=np.complex128).reshape(MOMENTUM_DIM)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise RelativityError("Momentum amplitudes vanish")
    return build_separable_state([(1.0, a / norm, rho_spin)], energy)


def boosted_spin_closed_form(a: np.ndarray, rho_spin: DensityMatrix, b: BoostParams, energy: float) -> DensityMatrix:
    """
    Spin part of a boosted pure-momentum product state without building the
    36-dimensional operator: sum_ij |a_ij|^2 (D_i (x) D_j) rho (D_i (x) D_j)^dagger.
    """
    a = np.asarray(a, dtype=np.complex128).reshape(2, 2)
    weights = np.abs(a) ** 2
    rotations = [spin_rotation(b, k) for k in momentum_pair(energy)]
    out = np.zeros((9, 9), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            if weights[i, j] == 0:
                continue
            d = np.kron(rotations[i], rotations[j])
            out += weights[i, j] * d @ rho_spin.matrix @ d.conj().T
    return DensityMatrix.normalized(out, (SPIN_DIM, SPIN_DIM))


def build_rho1(x: float, energy: float = 1.0) -> TwoParticleState:
    return build_separable_state([(1.0, symmetric_momentum_vector(), rho_b(x))], energy)


def build_rho0(p: float, x: float, energy: float = 1.0, interpretation=Interpretation.BELL_MIXTURE) -> TwoParticleState:
    """p rho1(x) + (1 - p) |k1,k2><k1,k2| (x) phi_spin."""
    if not 0.0 <= p <= 1.0:
        raise RelativityError(f"p must lie in [0, 1], got {p!r}")
    terms = [
        (p, symmetric_momentum_vector(), rho_b(x)),
        (1.0 - p, product_momentum_vector(0, 1), phi_spin_state(interpretation)),
    ]
    return build_separable_state([t for t in terms if t[0] > 0], energy)
