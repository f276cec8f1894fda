"""Dense complex linear algebra for small multi-register quantum systems.

All functions operate on plain numpy arrays or on the thin immutable
wrappers :class:`QState` and :class:`DensityMatrix`. One convention holds
package-wide: register order is big-endian, i.e. the first tensor factor
owns the most significant index bits of the composite space.

Everything here is a pure function on immutable values and is safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError, NumericError

# Hard cap on any Hilbert-space dimension handled by this package.
DIM_CAP = 2**20

# Structural invariants hold at 1e-12, derived equalities at 1e-10.
ATOL_STRUCT = 1e-12
ATOL_DERIVED = 1e-10
PSD_FLOOR = -1e-10

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

for _m in (*PAULIS, HADAMARD):
    _m.setflags(write=False)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


def as_cvec(x) -> np.ndarray:
    """Coerce ``x`` to an immutable 1-D complex vector of dimension >= 1."""
    vec = np.asarray(x, dtype=complex)
    if vec.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {vec.shape}")
    if vec.size < 1:
        raise DimensionError("vector must have dimension >= 1")
    if not np.all(np.isfinite(vec.view(float))):
        raise DataError("vector contains non-finite entries")
    return _frozen(vec)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class QState:
    """Normalized pure state on a power-of-two dimensional register."""

    __slots__ = ("vec",)

    def __init__(self, vec):
        vec = as_cvec(vec)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > ATOL_STRUCT:
            raise NumericError(f"state vector norm {norm!r} is not 1 within {ATOL_STRUCT}")
        if not is_power_of_two(vec.size):
            raise DimensionError(f"state dimension {vec.size} is not a power of 2")
        object.__setattr__(self, "vec", vec)

    def __setattr__(self, name, value):
        raise AttributeError("QState is immutable")

    @property
    def dim(self) -> int:
        return self.vec.size

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def overlap(self, other: "QState") -> complex:
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.vec, other.vec))

    def projector(self) -> np.ndarray:
        return np.outer(self.vec, self.vec.conj())

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector(), check_psd=False)

    def __repr__(self):
        return f"QState(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semi-definite matrix.

    Hermiticity and trace are always verified (both cheap). The eigenvalue
    floor check costs a full eigendecomposition, so internal constructors
    that produce PSD matrices by construction pass ``check_psd=False``;
    ``validate_psd`` re-runs it on demand.
    """

    __slots__ = ("entries",)

    def __init__(self, entries, *, check_psd: bool = True):
        mat = np.asarray(entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > ATOL_STRUCT:
            raise NumericError("matrix is not Hermitian within 1e-12")
        tr = np.trace(mat)
        if abs(tr - 1.0) > ATOL_STRUCT:
            raise NumericError(f"trace {tr!r} is not 1 within {ATOL_STRUCT}")
        object.__setattr__(self, "entries", _frozen(mat))
        if check_psd:
            self.validate_psd()

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def validate_psd(self):
        lo = self.min_eigenvalue()
        if lo < PSD_FLOOR:
            raise NumericError(f"minimum eigenvalue {lo} is below {PSD_FLOOR}")

    def validate(self):
        """Re-run every invariant, including the eigenvalue floor."""
        DensityMatrix(self.entries, check_psd=True)

    @classmethod
    def from_state(cls, state: QState) -> "DensityMatrix":
        return state.to_density()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim, check_psd=False)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.entries
    if isinstance(x, QState):
        return x.projector()
    return np.asarray(x, dtype=complex)


def _as_array(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.entries
    if isinstance(x, QState):
        return x.vec
    return np.asarray(x, dtype=complex)


def tensor(*operands) -> np.ndarray:
    """Kronecker product of vectors or matrices, left operand most significant."""
    if not operands:
        raise DimensionError("tensor() needs at least one operand")
    arrays = [_as_array(op) for op in operands]
    out = reduce(np.kron, arrays)
    if out.shape[0] > DIM_CAP:
        raise DimensionError(f"dimension {out.shape[0]} exceeds the 2**20 cap")
    return out


def tensor_power(op, k: int) -> np.ndarray:
    if k < 1:
        raise DimensionError("tensor power requires k >= 1")
    return tensor(*([op] * k))


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]):
    """Reduced state on the ``keep`` subsystems (register order preserved).

    ``dims`` lists every subsystem dimension; their product must equal the
    matrix dimension. Returns a DensityMatrix when given one, else an array.
    """
    mat = _as_matrix(rho)
    dims = tuple(int(d) for d in dims)
    keep = sorted(set(int(i) for i in keep))
    n = len(dims)
    if int(np.prod(dims)) != mat.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not multiply to {mat.shape[0]}")
    if not keep or any(i < 0 or i >= n for i in keep):
        raise DimensionError(f"keep={keep} is not a nonempty subset of 0..{n - 1}")
    reshaped = mat.reshape(dims + dims)
    row = list(range(n))
    col = [i if i not in keep else n + i for i in range(n)]
    out_axes = keep + [n + i for i in keep]
    reduced = np.einsum(reshaped, row + col, out_axes)
    d_keep = int(np.prod([dims[i] for i in keep]))
    reduced = reduced.reshape(d_keep, d_keep)
    if isinstance(rho, (DensityMatrix, QState)):
        return DensityMatrix(reduced, check_psd=False)
    return reduced


def hs_inner(a, b) -> float:
    """Trace inner product Tr(a b) of two equal-dimension density matrices."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    val = complex(np.einsum("ij,ji->", ma, mb))
    if abs(val.imag) > ATOL_STRUCT:
        raise NumericError(f"trace inner product has imaginary residual {val.imag}")
    return float(val.real)


def hermitian_sqrt(mat: np.ndarray, zero_tol: float = 0.0) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues in [-1e-10, 0) are round-off and clamp to 0; anything lower
    is an invariant violation. ``zero_tol`` additionally zeroes eigenvalues
    below that fraction of the largest one: the square root amplifies kernel
    dust of size eps to sqrt(eps), so rank-deficient inputs need it.
    """
    vals, vecs = np.linalg.eigh(mat)
    if vals[0] < PSD_FLOOR:
        raise NumericError(f"matrix is not PSD: min eigenvalue {vals[0]}")
    vals = np.clip(vals, 0.0, None)
    if zero_tol > 0.0:
        vals[vals < zero_tol * max(1.0, float(vals[-1]))] = 0.0
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a, b) -> float:
    """Uhlmann fidelity Tr(sqrt(sqrt(a) b sqrt(a)))**2, in [0, 1]."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    root = hermitian_sqrt(ma, zero_tol=1e-13)
    inner = hermitian_sqrt(root @ mb @ root, zero_tol=1e-13)
    val = float(np.trace(inner).real) ** 2
    if val > 1.0 + ATOL_DERIVED:
        raise NumericError(f"fidelity {val} exceeds 1 beyond tolerance")
    return val


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    @classmethod
    def of(cls, mat) -> "HermitianSpectrum":
        m = _as_matrix(mat)
        if np.abs(m - m.conj().T).max() > ATOL_STRUCT:
            raise NumericError("spectral decomposition requires a Hermitian matrix")
        vals, vecs = np.linalg.eigh(m)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        recon = (vecs * vals) @ vecs.conj().T
        err = np.linalg.norm(recon - m)
        if err > ATOL_DERIVED:
            raise NumericError(f"spectral reconstruction error {err} above 1e-10")
        return cls(_frozen(vals.astype(float)), _frozen(vecs))

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T

    def projector_onto(self, value: float, atol: float = ATOL_DERIVED) -> np.ndarray:
        """Projector onto the eigenspace of eigenvalues equal to ``value``."""
        mask = np.abs(self.eigenvalues - value) <= atol
        vecs = self.eigenvectors[:, mask]
        return vecs @ vecs.conj().T


def basis_state(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def permute_registers(array: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a vector or square matrix.

    ``order[p]`` names the source register that lands at position ``p``.
    """
    dims = tuple(int(d) for d in dims)
    order = tuple(int(i) for i in order)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise DimensionError(f"order {order} is not a permutation of 0..{n - 1}")
    total = int(np.prod(dims))
    arr = np.asarray(array, dtype=complex)
    if arr.ndim == 1:
        if arr.size != total:
            raise DimensionError(f"vector size {arr.size} does not match dims {dims}")
        return arr.reshape(dims).transpose(order).reshape(total)
    if arr.shape != (total, total):
        raise DimensionError(f"matrix shape {arr.shape} does not match dims {dims}")
    axes = list(order) + [n + i for i in order]
    return arr.reshape(dims + dims).transpose(axes).reshape(total, total)


# Dense square matrices above this dimension are refused with a clear error
# (a 4096**2 complex matrix is 256 MB; the vector-level cap DIM_CAP still
# applies to states).
DENSE_MATRIX_CAP = 2**12


def register_permutation_matrix(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary realizing :func:`permute_registers` as an explicit matrix:
    column j is the permuted basis vector e_j."""
    dims = tuple(int(d) for d in dims)
    order = tuple(int(i) for i in order)
    total = int(np.prod(dims))
    if total > DENSE_MATRIX_CAP:
        raise DimensionError(
            f"dense permutation matrix of dimension {total} exceeds {DENSE_MATRIX_CAP}")
    columns = np.eye(total, dtype=complex).reshape(dims + (total,))
    return columns.transpose(order + (len(dims),)).reshape(total, total)


def random_state_vector(dim: int, rng: np.random.Generator) -> QState:
    """Haar-like random pure state from a complex Gaussian draw."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return QState(v / np.linalg.norm(v))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state: a uniform-weight mixture of ``rank`` random pure states."""
    rank = dim if rank is None else max(1, min(rank, dim))
    probs = rng.random(rank)
    probs /= probs.sum()
    mat = np.zeros((dim, dim), dtype=complex)
    for p in probs:
        mat += p * random_state_vector(dim, rng).projector()
    return DensityMatrix(mat, check_psd=False)
