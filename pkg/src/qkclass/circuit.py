"""Swap-test circuit operators, expectation values, and shot sampling.

The swap-test unitary is Hadamard on the ancilla, a controlled swap of every
(test, train) copy pair, and a second Hadamard. ``build_swap_test_unitary``
returns it as an explicit (cached, unitarity-checked) matrix for inspection;
``apply_swap_test_unitary`` applies the same map through axis manipulation,
which is what the classifiers use.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .encoding import ClassifierState
from .errors import DataError, DimensionError, NumericError
from .qmath import (ATOL_DERIVED, ATOL_STRUCT, DENSE_MATRIX_CAP, HADAMARD,
                    SIGMA_Z, DensityMatrix, HermitianSpectrum, QState,
                    register_permutation_matrix)
from .registers import (ANCILLA, LABEL, Register, RegisterLayout, TEST, TRAIN,
                        block_layout)

_DENSE_CAP = 1024


class Observable:
    """Hermitian operator tied to a register layout, with a lazy spectrum."""

    __slots__ = ("matrix", "layout", "_spectrum", "_involutory")

    def __init__(self, matrix, layout: RegisterLayout | None = None, *,
                 involutory: bool | None = None):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"observable must be square, got shape {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > ATOL_STRUCT:
            raise NumericError("observable is not Hermitian within 1e-12")
        if layout is not None and layout.dim != mat.shape[0]:
            raise DimensionError("observable dimension does not match its layout")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "_spectrum", None)
        object.__setattr__(self, "_involutory", involutory)

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> HermitianSpectrum:
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", HermitianSpectrum.of(self.matrix))
        return self._spectrum

    def has_pm_one_spectrum(self) -> bool:
        """True when the observable squares to the identity (eigenvalues +-1)."""
        if self._involutory is None:
            sq = self.matrix @ self.matrix
            ok = np.abs(sq - np.eye(self.dim)).max() <= ATOL_DERIVED
            object.__setattr__(self, "_involutory", bool(ok))
        return self._involutory


@dataclass(frozen=True)
class ShotRecord:
    """Aggregated count of one measurement outcome from a seeded run."""

    outcome: int
    count: int
    seed: int

    def __post_init__(self):
        if self.outcome not in (1, -1):
            raise DataError(f"outcome must be +1 or -1, got {self.outcome}")
        if self.count < 0:
            raise DataError("count must be nonnegative")


def embed_operators(layout: RegisterLayout, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Tensor the given per-register operators with identities elsewhere."""
    if layout.dim > DENSE_MATRIX_CAP:
        raise DimensionError(
            f"dense operator of dimension {layout.dim} exceeds {DENSE_MATRIX_CAP}")
    factors = []
    for i, reg in enumerate(layout.registers):
        if i in ops:
            op = np.asarray(ops[i], dtype=complex)
            if op.shape != (reg.dim, reg.dim):
                raise DimensionError(
                    f"operator for register {i} has shape {op.shape}, register dim {reg.dim}")
            factors.append(op)
        else:
            factors.append(np.eye(reg.dim, dtype=complex))
    return reduce(np.kron, factors)


def _pair_swap_order(layout: RegisterLayout) -> tuple[int, ...]:
    order = list(range(len(layout.registers)))
    for t, d in layout.pair_indices():
        order[t], order[d] = order[d], order[t]
    return tuple(order)


@lru_cache(maxsize=64)
def ancilla_label_parity(layout: RegisterLayout) -> Observable:
    """Product of Pauli Z on the ancilla and on the label qubit."""
    mat = embed_operators(layout, {
        layout.index_of(ANCILLA): SIGMA_Z,
        layout.index_of(LABEL): SIGMA_Z,
    })
    return Observable(mat, layout, involutory=True)


@lru_cache(maxsize=64)
def swap_operator(dim: int) -> Observable:
    """Exchange of two registers of equal dimension ``dim``."""
    if dim < 1:
        raise DimensionError("swap operator needs dimension >= 1")
    layout = RegisterLayout((Register(TEST, dim, 1), Register(TRAIN, dim, 1)))
    mat = register_permutation_matrix((dim, dim), (1, 0))
    return Observable(mat, layout, involutory=True)


@lru_cache(maxsize=64)
def swap_label_observable(layout: RegisterLayout) -> Observable:
    """Simultaneous swap of every (test, train) pair times Z on the label.

    This is the ancilla-free observable whose expectation reproduces the
    swap-test statistics; factors on any other register are identities.
    """
    pairs = layout.pair_indices()
    if not pairs:
        raise DimensionError("layout has no (test, train) pairs to swap")
    swap = register_permutation_matrix(layout.dims, _pair_swap_order(layout))
    zl = embed_operators(layout, {layout.index_of(LABEL): SIGMA_Z})
    return Observable(swap @ zl, layout, involutory=True)


def build_effective_observable(n: int, k: int) -> Observable:
    """Ancilla-free classifier observable for ``k`` copies of ``n``-qubit data,
    block register order [test x k | train x k | label]."""
    if n < 1 or k < 1:
        raise DimensionError("n and k must be positive")
    layout = block_layout(2 ** n, k, ancilla=False)
    if layout.dim > _DENSE_CAP * 4:
        raise DimensionError(f"observable dimension {layout.dim} exceeds the dense cap")
    return swap_label_observable(layout)


@lru_cache(maxsize=32)
def build_swap_test_unitary(layout: RegisterLayout) -> np.ndarray:
    """Dense swap-test unitary for the given layout, verified unitary.

    Only intended for explicit-matrix checks at small dimensions; the
    classifiers apply the same map with :func:`apply_swap_test_unitary`.
    """
    if layout.dim > _DENSE_CAP:
        raise DimensionError(
            f"dense unitary of dimension {layout.dim} exceeds {_DENSE_CAP}; "
            "use apply_swap_test_unitary instead")
    a = layout.index_of(ANCILLA)
    if not layout.pair_indices():
        raise DimensionError("layout has no (test, train) pairs to swap")
    h = embed_operators(layout, {a: HADAMARD})
    swap = register_permutation_matrix(layout.dims, _pair_swap_order(layout))
    p0 = embed_operators(layout, {a: np.diag([1.0, 0.0]).astype(complex)})
    p1 = embed_operators(layout, {a: np.diag([0.0, 1.0]).astype(complex)})
    cswap = p0 + p1 @ swap
    v = h @ cswap @ h
    err = np.abs(v @ v.conj().T - np.eye(layout.dim)).max()
    if err > ATOL_STRUCT:
        raise NumericError(f"swap-test unitary failed the unitarity check: {err}")
    v.setflags(write=False)
    return v


def _apply_left(tensor_arr: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, tensor_arr, axes=([1], [axis])), 0, axis)


def _apply_right_dagger(tensor_arr: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(tensor_arr, op.conj().T, axes=([axis], [0])), -1, axis)


def _controlled_select(plain: np.ndarray, swapped: np.ndarray, axis: int) -> np.ndarray:
    return np.stack(
        [np.take(plain, 0, axis=axis), np.take(swapped, 1, axis=axis)], axis=axis)


def apply_swap_test_unitary(x: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Apply the swap-test unitary to a state vector, or conjugate a density
    matrix by it, without materializing the dense operator."""
    dims = layout.dims
    r = len(dims)
    a = layout.index_of(ANCILLA)
    order = _pair_swap_order(layout)
    if order == tuple(range(r)):
        raise DimensionError("layout has no (test, train) pairs to swap")
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        if arr.size != layout.dim:
            raise DimensionError(f"vector size {arr.size} != layout dim {layout.dim}")
        t = arr.reshape(dims)
        t = _apply_left(t, HADAMARD, a)
        t = _controlled_select(t, t.transpose(order), a)
        t = _apply_left(t, HADAMARD, a)
        return t.reshape(-1)
    if arr.shape != (layout.dim, layout.dim):
        raise DimensionError(f"matrix shape {arr.shape} != layout dim {layout.dim}")
    row_order = list(order) + list(range(r, 2 * r))
    col_order = list(range(r)) + [r + i for i in order]
    t = arr.reshape(dims + dims)
    t = _apply_left(t, HADAMARD, a)
    t = _apply_right_dagger(t, HADAMARD, r + a)
    t = _controlled_select(t, t.transpose(row_order), a)
    t = _controlled_select(t, t.transpose(col_order), r + a)
    t = _apply_left(t, HADAMARD, a)
    t = _apply_right_dagger(t, HADAMARD, r + a)
    return t.reshape(layout.dim, layout.dim)


def run_swap_test(state: ClassifierState) -> ClassifierState:
    """Swap-test circuit applied to an assembled state (vector kept if pure)."""
    if state.vector is not None:
        vec = apply_swap_test_unitary(state.vector, state.layout)
        rho = DensityMatrix(np.outer(vec, vec.conj()), check_psd=False)
        return ClassifierState(rho, state.layout, vector=vec)
    rho = apply_swap_test_unitary(state.rho.entries, state.layout)
    return ClassifierState(DensityMatrix(rho, check_psd=False), state.layout)


def _state_matrix(state) -> np.ndarray:
    if isinstance(state, ClassifierState):
        return state.rho.entries
    if isinstance(state, DensityMatrix):
        return state.entries
    if isinstance(state, QState):
        return state.projector()
    return np.asarray(state, dtype=complex)


def expectation(obs, state) -> float:
    """Tr(obs rho), or <psi|obs|psi> for a state vector; checked real to 1e-10.

    Accepts an Observable or a bare matrix, and a ClassifierState,
    DensityMatrix, QState, matrix, or state vector.
    """
    mat = obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if isinstance(state, QState):
        state = state.vec
    if isinstance(state, np.ndarray) and state.ndim == 1:
        if state.size != mat.shape[0]:
            raise DimensionError(f"dimension mismatch: {mat.shape} vs {state.size}")
        val = complex(np.vdot(state, mat @ state))
    else:
        rho = _state_matrix(state)
        if mat.shape != rho.shape:
            raise DimensionError(f"dimension mismatch: {mat.shape} vs {rho.shape}")
        val = complex(np.einsum("ij,ji->", mat, rho))
    if abs(val.imag) > ATOL_DERIVED:
        raise NumericError(f"expectation has imaginary residual {val.imag}")
    return float(val.real)


def outcome_probabilities(obs: Observable, state) -> dict[int, float]:
    """Probabilities of the +1 / -1 outcomes via the spectral projectors
    (identity +- obs) / 2 of an involutory observable."""
    if not isinstance(obs, Observable) or not obs.has_pm_one_spectrum():
        raise NumericError("outcome probabilities require a +-1 spectrum observable")
    rho = _state_matrix(state)
    if rho.shape != obs.matrix.shape:
        raise DimensionError(f"dimension mismatch: {obs.matrix.shape} vs {rho.shape}")
    eye = np.eye(obs.dim)
    probs = {}
    for lam in (1, -1):
        proj = (eye + lam * obs.matrix) / 2.0
        p = complex(np.einsum("ij,ji->", proj, rho))
        if abs(p.imag) > ATOL_DERIVED:
            raise NumericError(f"outcome probability has imaginary residual {p.imag}")
        probs[lam] = min(max(float(p.real), 0.0), 1.0)
    if abs(probs[1] + probs[-1] - 1.0) > ATOL_DERIVED:
        raise NumericError(f"outcome probabilities sum to {probs[1] + probs[-1]}")
    return probs


def sample_shots(obs: Observable, state, shots: int, seed: int) -> list[ShotRecord]:
    """Independent draws from the outcome distribution, reproducible by seed."""
    if shots < 1:
        raise DataError(f"shots must be >= 1, got {shots}")
    probs = outcome_probabilities(obs, state)
    rng = np.random.default_rng(seed)
    n_plus = int(rng.binomial(shots, probs[1]))
    return [ShotRecord(1, n_plus, seed), ShotRecord(-1, shots - n_plus, seed)]


def empirical_expectation(records: list[ShotRecord]) -> float:
    total = sum(r.count for r in records)
    if total == 0:
        raise DataError("no shots recorded")
    return sum(r.outcome * r.count for r in records) / total
