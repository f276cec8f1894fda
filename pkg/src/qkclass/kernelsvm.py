"""Kernel functions, Gram matrices with PSD certification, and a dual SVM
trainer whose multipliers and bias feed the quantum classifiers.

Both kernels offered for training are positive semi-definite: the squared
overlap of pure states and the trace inner product of density matrices. The
trainer is a self-contained SMO solver (maximal-violating-pair working-set
selection, two-variable analytic updates) adequate up to a few thousand
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qmath
from .encoding import TrainingSet
from .errors import DataError, DimensionError, NumericError
from .qmath import DensityMatrix, QState

SQUARED_OVERLAP = "squared-overlap"
HS_TRACE = "hs-trace"
REAL_OVERLAP = "real-overlap"
KERNEL_KINDS = (SQUARED_OVERLAP, HS_TRACE, REAL_OVERLAP)

SUPPORT_EPS = 1e-8
DEFAULT_C = 1e6
KKT_TOL = 1e-6
MAX_SMO_ITER = 100_000


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    k: int = 1

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}")
        if self.k < 1:
            raise DataError(f"kernel copy exponent must be >= 1, got {self.k}")


def _base_kernel(kind: str, a, b) -> float:
    if kind == HS_TRACE:
        if not isinstance(a, DensityMatrix) or not isinstance(b, DensityMatrix):
            raise DataError("hs-trace kernel requires DensityMatrix inputs")
        return qmath.hs_inner(a, b)
    if not isinstance(a, QState) or not isinstance(b, QState):
        raise DataError(f"{kind} kernel requires QState inputs")
    overlap = a.overlap(b)
    if kind == SQUARED_OVERLAP:
        return abs(overlap) ** 2
    return overlap.real


def kernel_eval(spec: KernelSpec, a, b) -> float:
    """Kernel value, raised to the copy exponent ``spec.k``."""
    value = _base_kernel(spec.kind, a, b)
    if spec.kind in (SQUARED_OVERLAP, HS_TRACE):
        if value > 1.0 + 1e-10 or value < -1e-12:
            raise NumericError(f"{spec.kind} kernel value {value} outside [0, 1]")
        value = min(max(value, 0.0), 1.0)
    return value ** spec.k


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel values over a data set, with its spectrum attached."""

    matrix: np.ndarray
    kernel: KernelSpec
    eigenvalues: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def spectral_norm(self) -> float:
        return float(np.abs(self.eigenvalues).max())


def gram(spec: KernelSpec, states: Sequence) -> GramMatrix:
    """Symmetric Gram matrix G[n, m] = kernel(states[n], states[m])."""
    if not states:
        raise DataError("gram() needs at least one state")
    want = DensityMatrix if spec.kind == HS_TRACE else QState
    if not all(isinstance(s, want) for s in states):
        raise DataError(f"{spec.kind} kernel requires homogeneous {want.__name__} inputs")
    m = len(states)
    g = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            val = kernel_eval(spec, states[i], states[j])
            g[i, j] = g[j, i] = val
    eigs = np.linalg.eigvalsh(g)
    g.setflags(write=False)
    eigs.setflags(write=False)
    return GramMatrix(g, spec, eigs)


def overlap_gram(states: Sequence[QState]) -> np.ndarray:
    """Complex matrix of plain overlaps <x_n|x_m>.

    Not a training kernel; its entrywise product with its own conjugate is
    the squared-overlap Gram matrix.
    """
    m = len(states)
    g = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            g[i, j] = states[i].overlap(states[j])
    return g


@dataclass(frozen=True)
class PsdCertificate:
    certified: bool
    min_eigenvalue: float
    threshold: float


def psd_certify(g) -> PsdCertificate:
    """Numerical PSD check: min eigenvalue >= -1e-8 * max(1, spectral norm)."""
    if isinstance(g, GramMatrix):
        mat, eigs = g.matrix, g.eigenvalues
    else:
        mat = np.asarray(g, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
        eigs = None
    if np.abs(mat - mat.T).max() > 1e-12:
        raise NumericError("PSD certification requires a symmetric matrix")
    if eigs is None:
        eigs = np.linalg.eigvalsh(mat)
    lo = float(eigs[0])
    threshold = -1e-8 * max(1.0, float(np.abs(eigs).max()))
    return PsdCertificate(lo >= threshold, lo, threshold)


@dataclass(frozen=True)
class SvmModel:
    """Dual solution: nonnegative multipliers, bias, and the support set."""

    multipliers: np.ndarray
    bias: float
    support_indices: tuple[int, ...]
    kernel: KernelSpec
    labels: np.ndarray
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def signed_multipliers(self) -> np.ndarray:
        """Multipliers folded with the label signs: alpha_m = a_m * (-1)**y_m."""
        return self.multipliers * (1 - 2 * self.labels)


def _dual_objective(alpha: np.ndarray, q: np.ndarray) -> float:
    return float(alpha.sum() - 0.5 * alpha @ q @ alpha)


def svm_train(g: GramMatrix, labels: Sequence[int], C: float = DEFAULT_C,
              tol: float = KKT_TOL, max_iter: int = MAX_SMO_ITER,
              record_objective: bool = False) -> SvmModel:
    """Maximize the dual sum(a) - 1/2 sum a_i a_j l_i l_j G_ij subject to
    0 <= a <= C and sum(a_i l_i) = 0, by SMO over maximal violating pairs.

    Refuses a Gram matrix that fails PSD certification (the dual could be
    unbounded) and a single-class label vector.
    """
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (g.size,):
        raise DataError(f"{labels.size} labels for a {g.size}-point Gram matrix")
    if not set(np.unique(labels)) <= {0, 1}:
        raise DataError("labels must be 0 or 1")
    if len(np.unique(labels)) < 2:
        raise DataError("SVM training requires both classes")
    cert = psd_certify(g)
    if not cert.certified:
        raise NumericError(
            f"Gram matrix is not PSD (min eigenvalue {cert.min_eigenvalue}); refusing")
    if C <= 0:
        raise DataError(f"box constraint C must be positive, got {C}")

    l = (1 - 2 * labels).astype(float)
    q = np.outer(l, l) * g.matrix
    m = g.size
    alpha = np.zeros(m)
    grad = -np.ones(m)  # gradient of 1/2 aQa - sum(a)
    history = []
    converged = False
    for _ in range(max_iter):
        if record_objective:
            history.append(_dual_objective(alpha, q))
        minus_lg = -l * grad
        up = ((l > 0) & (alpha < C)) | ((l < 0) & (alpha > 0))
        low = ((l < 0) & (alpha < C)) | ((l > 0) & (alpha > 0))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_lg[up])])
        j = int(np.flatnonzero(low)[np.argmin(minus_lg[low])])
        gap = minus_lg[i] - minus_lg[j]
        if gap < tol:
            converged = True
            break
        quad = max(g.matrix[i, i] + g.matrix[j, j] - 2.0 * g.matrix[i, j], 1e-12)
        step = gap / quad
        step = min(step, (C - alpha[i]) if l[i] > 0 else alpha[i])
        step = min(step, alpha[j] if l[j] > 0 else (C - alpha[j]))
        d_i, d_j = l[i] * step, -l[j] * step
        alpha[i] += d_i
        alpha[j] += d_j
        grad += q[:, i] * d_i + q[:, j] * d_j
    if not converged:
        raise NumericError(f"SMO did not reach tolerance {tol} in {max_iter} iterations")
    if record_objective:
        history.append(_dual_objective(alpha, q))

    alpha = np.clip(alpha, 0.0, C)
    support = tuple(int(i) for i in np.flatnonzero(alpha > SUPPORT_EPS))
    b_candidates = (-l * grad)
    free = (alpha > SUPPORT_EPS) & (alpha < C - SUPPORT_EPS)
    if free.any():
        bias = float(b_candidates[free].mean())
    else:
        up = ((l > 0) & (alpha < C)) | ((l < 0) & (alpha > 0))
        low = ((l < 0) & (alpha < C)) | ((l > 0) & (alpha > 0))
        hi = b_candidates[up].max() if up.any() else 0.0
        lo = b_candidates[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)
    alpha.setflags(write=False)
    return SvmModel(alpha, bias, support, g.kernel, labels,
                    tuple(history) if record_objective else ())


def regression(model: SvmModel, train_states: Sequence, test,
               spec: KernelSpec | None = None) -> float:
    """Decision value f(test) = sum_j (-1)**y_j a_j kernel(x_j, test) + bias."""
    spec = model.kernel if spec is None else spec
    if spec != model.kernel:
        raise DataError(f"kernel mismatch: model trained with {model.kernel}, got {spec}")
    if len(train_states) != model.multipliers.size:
        raise DataError(f"{len(train_states)} states for {model.multipliers.size} multipliers")
    value = model.bias
    for a_signed, state in zip(model.signed_multipliers, train_states):
        if a_signed != 0.0:
            value += a_signed * kernel_eval(spec, state, test)
    return float(value)


def centroid_decision(ts: TrainingSet, test, spec: KernelSpec) -> float:
    """Difference of mean kernel similarity to each class centroid.

    Identical to the analytic swap-test expectation when the kernel matches
    the data type and ``spec.k == ts.k``.
    """
    weights = ts.effective_weights()
    value = 0.0
    for entry, w in zip(ts.entries, weights):
        kernel_input = entry.state
        sign = 1.0 if entry.label == 0 else -1.0
        value += sign * w * kernel_eval(spec, kernel_input, test)
    return float(value)
