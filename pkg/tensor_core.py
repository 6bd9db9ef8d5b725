# tensor_core.py

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

# Constructed states are checked tightly, anything handed in from outside gets
# the looser tolerance.
HERMITIAN_TOL = 1e-12
USER_HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-12
MIN_EIGENVALUE_TOL = 1e-10


class TensorError(ValueError):
    pass


class NotHermitian(TensorError):
    pass


class BadSubsystem(TensorError):
    pass


class DimensionMismatch(TensorError):
    pass


class InvalidDensityMatrix(TensorError):
    pass


def as_matrix(m) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"Expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TensorError("Matrix has non-finite entries")
    return arr


def hermiticity_defect(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


@dataclass(frozen=True)
class DensityMatrix:
    """
    Trace-one positive semidefinite operator together with the dimensions of
    the subsystems it acts on.

    The stored matrix is exactly Hermitian (it is symmetrized after the
    tolerance check) and read-only.
    """

    matrix: ComplexMatrix
    dims: Tuple[int, ...]
    tol: float = HERMITIAN_TOL

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims)
        if m.shape[0] != m.shape[1]:
            raise InvalidDensityMatrix(f"Density matrix must be square, got {m.shape}")
        if not dims or any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
            raise InvalidDensityMatrix(f"dims {dims} do not multiply to {m.shape[0]}")

        defect = hermiticity_defect(m)
        if defect > self.tol:
            raise InvalidDensityMatrix(f"Not Hermitian: max deviation {defect:.3e}")
        m = 0.5 * (m + m.conj().T)

        trace = np.trace(m).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(f"Trace is {trace!r}, expected 1")
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < -MIN_EIGENVALUE_TOL:
            raise InvalidDensityMatrix(f"Negative eigenvalue {lowest:.3e}")

        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_user(cls, matrix, dims: Sequence[int]) -> "DensityMatrix":
        return cls(matrix, tuple(dims), tol=USER_HERMITIAN_TOL)

    @classmethod
    def normalized(cls, matrix, dims: Sequence[int], tol: float = HERMITIAN_TOL) -> "DensityMatrix":
        """Build a state from an unnormalized positive operator."""
        m = as_matrix(matrix)
        trace = np.trace(m).real
        if trace <= 0:
            raise InvalidDensityMatrix(f"Cannot normalize operator with trace {trace!r}")
        return cls(m / trace, tuple(dims), tol=tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> NDArray[np.float64]:
        return hermitian_eigenvalues(self.matrix)


MatrixLike = Union[DensityMatrix, np.ndarray]


def _unpack(rho: MatrixLike, dims: Optional[Sequence[int]]) -> Tuple[ComplexMatrix, Tuple[int, ...]]:
    if isinstance(rho, DensityMatrix):
        return rho.matrix, rho.dims if dims is None else tuple(dims)
    m = as_matrix(rho)
    if dims is None:
        raise BadSubsystem("Subsystem dimensions are required for a bare matrix")
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise BadSubsystem(f"dims {dims} do not match matrix shape {m.shape}")
    return m, dims


def kron(a, b) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors) -> ComplexMatrix:
    out = np.eye(1, dtype=np.complex128)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def hermitian_eigenvalues(h, tol: float = USER_HERMITIAN_TOL) -> NDArray[np.float64]:
    """Eigenvalues of a Hermitian matrix in ascending order."""
    h = as_matrix(h)
    defect = hermiticity_defect(h)
    if defect > tol:
        raise NotHermitian(f"Matrix is not Hermitian (max deviation {defect:.3e})")
    return np.linalg.eigvalsh(0.5 * (h + h.conj().T))


def singular_values(m) -> NDArray[np.float64]:
    """Singular values in descending order."""
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def partial_transpose(rho: MatrixLike, subsystem: int = 1, dims: Optional[Sequence[int]] = None) -> ComplexMatrix:
    """
    Transpose one tensor factor of an operator.

    For the bipartite case [d_A, d_B] and subsystem 1 this is
    [rho^{T_B}]_{ia,jb} = rho_{ib,ja}.
    """
    m, dims = _unpack(rho, dims)
    n = len(dims)
    if not 0 <= subsystem < n:
        raise BadSubsystem(f"Subsystem {subsystem} out of range for dims {dims}")
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[subsystem], axes[subsystem + n] = axes[subsystem + n], axes[subsystem]
    return np.ascontiguousarray(t.transpose(axes)).reshape(m.shape)


def trace_out(m: MatrixLike, dims: Optional[Sequence[int]], keep: Iterable[int]) -> ComplexMatrix:
    """Partial trace without renormalization; works for any operator."""
    m, dims = _unpack(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise BadSubsystem(f"Cannot keep {keep} of dims {dims}")

    t = m.reshape(dims + dims)
    current = n
    for axis in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=axis, axis2=axis + current)
        current -= 1
    kept = int(np.prod([dims[k] for k in keep]))
    return t.reshape(kept, kept)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """
    Reduced state on the kept subsystems, renormalized to unit trace.

    Discrete momentum basis vectors are stored orthonormal, so the covariant
    2k^0 weights only ever show up as an overall factor that renormalization
    removes.
    """
    keep = sorted(set(int(k) for k in keep))
    reduced = trace_out(rho, None, keep)
    return DensityMatrix.normalized(reduced, [rho.dims[k] for k in keep])


def realign(rho: MatrixLike, dims: Optional[Sequence[int]] = None) -> ComplexMatrix:
    """Realigned matrix [rho~]_{ij,ab} = rho_{ia,jb} of a bipartite operator."""
    m, dims = _unpack(rho, dims)
    if len(dims) != 2:
        raise BadSubsystem(f"Realignment needs a bipartite operator, got dims {dims}")
    d_a, d_b = dims
    t = m.reshape(d_a, d_b, d_a, d_b)
    return np.ascontiguousarray(t.transpose(0, 2, 1, 3)).reshape(d_a * d_a, d_b * d_b)


def hs_distance(a: MatrixLike, b: MatrixLike) -> float:
    a = a.matrix if isinstance(a, DensityMatrix) else as_matrix(a)
    b = b.matrix if isinstance(b, DensityMatrix) else as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b, "fro"))


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    # tr(rho^2) for Hermitian rho is the squared Frobenius norm
    return float(np.vdot(m, m).real)


def projector(vec) -> ComplexMatrix:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> ComplexMatrix:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real
