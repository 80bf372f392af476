"""Dense complex Hermitian operator algebra.

Provides construction, tensor products, partial trace / transpose, subsystem
permutation and the spectral primitives (trace norm, PPT test) consumed by the
shielded-state, criteria, recurrence and ccq services. All values are immutable
after construction.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

from app.config import settings
from app.errors import InvalidInput, ResourceLimitExceeded
from app.schemas import MatrixPayload

log = logging.getLogger(__name__)

KET_NORM_TOL = 1e-12


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def check_dim(dim: int, max_dim: int | None = None, what: str = "matrix dimension") -> None:
    limit = settings.MAX_DIM if max_dim is None else max_dim
    if dim > limit:
        raise ResourceLimitExceeded(dim, limit, what)


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Square complex matrix, Hermitian within HERMITIAN_TOL.

    Entries are symmetrized to (A + A†)/2 on construction.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidInput(f"operator must be a non-empty square matrix, got shape {m.shape}")
        deviation = float(np.max(np.abs(m - m.conj().T)))
        if deviation > settings.HERMITIAN_TOL:
            raise InvalidInput(f"operator is not Hermitian (max deviation {deviation:.3e})")
        object.__setattr__(self, "entries", _readonly((m + m.conj().T) / 2))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return _readonly(np.linalg.eigvalsh(self.entries))

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def is_psd(self, tol: float | None = None) -> bool:
        tol = settings.HERMITIAN_TOL if tol is None else tol
        return self.min_eigenvalue >= -tol

    # arithmetic

    def _check_same_dim(self, other: "HermitianOperator") -> None:
        if self.dim != other.dim:
            raise InvalidInput(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same_dim(other)
        return HermitianOperator(self.entries + other.entries)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same_dim(other)
        return HermitianOperator(self.entries - other.entries)

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(-self.entries)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(self.entries / float(scalar))

    # constructors

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim), dtype=complex))

    # serialization

    def to_payload(self) -> MatrixPayload:
        pairs = np.stack([self.entries.real, self.entries.imag], axis=-1)
        return MatrixPayload(dim=self.dim, entries=pairs.tolist())

    @classmethod
    def from_payload(cls, payload: MatrixPayload) -> "HermitianOperator":
        arr = np.asarray(payload.entries, dtype=float)
        return cls(arr[..., 0] + 1j * arr[..., 1])


@dataclass(frozen=True, eq=False)
class KetVector:
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.shape[0] < 1:
            raise InvalidInput(f"ket must be a non-empty vector, got shape {v.shape}")
        if self.normalized:
            norm_sq = float(np.vdot(v, v).real)
            if abs(norm_sq - 1.0) > KET_NORM_TOL:
                raise InvalidInput(f"ket flagged normalized has squared norm {norm_sq:.15f}")
        object.__setattr__(self, "amplitudes", _readonly(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def inner(self, other: "KetVector") -> complex:
        """⟨self|other⟩."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> HermitianOperator:
        return HermitianOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


Operand = Union[HermitianOperator, np.ndarray]


def as_operator(a: Operand) -> HermitianOperator:
    return a if isinstance(a, HermitianOperator) else HermitianOperator(a)


# ── Spectral primitives ───────────────────────────────────────────────────────

def trace_norm(a: Operand) -> float:
    """Sum of absolute eigenvalues."""
    return float(np.sum(np.abs(as_operator(a).eigenvalues)))


def trace_distance(a: Operand, b: Operand) -> float:
    return 0.5 * trace_norm(as_operator(a) - as_operator(b))


def fidelity_from_factors(x: np.ndarray, y: np.ndarray) -> float:
    """Root fidelity ‖√A √B‖₁ of A = X†X and B = Y†Y, computed as ‖X Y†‖₁.

    Working from factors avoids square roots of numerically-zero eigenvalues.
    """
    return float(np.linalg.norm(np.asarray(x) @ np.asarray(y).conj().T, ord="nuc"))


# ── Composition ───────────────────────────────────────────────────────────────

def tensor(a: Operand, b: Operand, max_dim: int | None = None) -> HermitianOperator:
    a, b = as_operator(a), as_operator(b)
    check_dim(a.dim * b.dim, max_dim)
    return HermitianOperator(np.kron(a.entries, b.entries))


def tensor_power(a: Operand, n: int, max_dim: int | None = None) -> HermitianOperator:
    if n < 1:
        raise InvalidInput(f"tensor power must be >= 1, got {n}")
    a = as_operator(a)
    check_dim(a.dim ** n, max_dim)
    return reduce(lambda acc, _: tensor(acc, a, max_dim), range(n - 1), a)


def _check_dims(a: HermitianOperator, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise InvalidInput(f"subsystem dimensions must be positive, got {dims}")
    if math.prod(dims) != a.dim:
        raise InvalidInput(f"dims {dims} (product {math.prod(dims)}) do not match operator dimension {a.dim}")
    return dims


def partial_trace(a: Operand, dims: Sequence[int], keep: Iterable[int]) -> HermitianOperator:
    """Trace out every subsystem not listed in ``keep``; kept factors retain their order."""
    a = as_operator(a)
    dims = _check_dims(a, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise InvalidInput(f"keep indices {keep} out of range for {n} subsystems")

    t = a.entries.reshape(dims + dims)
    current = n
    for axis in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=axis, axis2=axis + current)
        current -= 1
    kept_dim = math.prod(dims[k] for k in keep)
    return HermitianOperator(t.reshape(kept_dim, kept_dim))


def partial_transpose(a: Operand, dims: Sequence[int], transpose: Iterable[int] | None = None) -> HermitianOperator:
    """Transpose the listed subsystems (default: the last one, i.e. B in [dA, dB])."""
    a = as_operator(a)
    dims = _check_dims(a, dims)
    n = len(dims)
    systems = [n - 1] if transpose is None else [int(s) for s in transpose]
    if any(s < 0 or s >= n for s in systems):
        raise InvalidInput(f"transpose indices {systems} out of range for {n} subsystems")

    perm = list(range(2 * n))
    for s in systems:
        perm[s], perm[s + n] = perm[s + n], perm[s]
    t = a.entries.reshape(dims + dims).transpose(perm)
    return HermitianOperator(t.reshape(a.dim, a.dim))


def permute_subsystems(a: Operand, dims: Sequence[int], order: Sequence[int]) -> HermitianOperator:
    """Reorder tensor factors: new factor k is old factor ``order[k]``."""
    a = as_operator(a)
    dims = _check_dims(a, dims)
    n = len(dims)
    order = [int(o) for o in order]
    if sorted(order) != list(range(n)):
        raise InvalidInput(f"order {order} is not a permutation of {n} subsystems")
    t = a.entries.reshape(dims + dims).transpose(order + [n + o for o in order])
    return HermitianOperator(t.reshape(a.dim, a.dim))


def is_ppt(a: Operand, dims: Sequence[int], tol: float | None = None) -> tuple[bool, float]:
    """PPT test across a bipartite cut [dA, dB]; returns (verdict, min eigenvalue)."""
    a = as_operator(a)
    tol = settings.HERMITIAN_TOL if tol is None else tol
    if len(dims) != 2:
        raise InvalidInput(f"is_ppt expects a bipartite cut [dA, dB], got {list(dims)}")
    if abs(a.trace - 1.0) > tol or not a.is_psd(tol):
        raise InvalidInput("is_ppt expects a density operator (PSD, unit trace)")
    min_eig = partial_transpose(a, dims).min_eigenvalue
    return min_eig >= -tol, min_eig


# ── Named operators ───────────────────────────────────────────────────────────

def swap_operator(d: int) -> np.ndarray:
    idx = np.arange(d * d)
    i, j = np.divmod(idx, d)
    f = np.zeros((d * d, d * d), dtype=complex)
    f[idx, j * d + i] = 1.0
    return f


def sym_antisym_projectors(d: int) -> tuple[HermitianOperator, HermitianOperator]:
    """Normalized projectors onto the symmetric and antisymmetric subspaces of C^d ⊗ C^d."""
    if d < 2:
        raise InvalidInput(f"d must be >= 2, got {d}")
    eye = np.eye(d * d, dtype=complex)
    f = swap_operator(d)
    rho_s = HermitianOperator((eye + f) / (d * (d + 1)))
    rho_a = HermitianOperator((eye - f) / (d * (d - 1)))
    return rho_s, rho_a


def computational_ket(index: int, dim: int) -> KetVector:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return KetVector(v)


_SQRT_HALF = 1 / math.sqrt(2)


def bell_basis() -> tuple[KetVector, KetVector, KetVector, KetVector]:
    """φ1 = (|00⟩+|11⟩)/√2, φ2 = (|00⟩−|11⟩)/√2, φ3 = (|01⟩+|10⟩)/√2, φ4 = (|01⟩−|10⟩)/√2."""
    return (
        KetVector(_SQRT_HALF * np.array([1, 0, 0, 1], dtype=complex)),
        KetVector(_SQRT_HALF * np.array([1, 0, 0, -1], dtype=complex)),
        KetVector(_SQRT_HALF * np.array([0, 1, 1, 0], dtype=complex)),
        KetVector(_SQRT_HALF * np.array([0, 1, -1, 0], dtype=complex)),
    )
