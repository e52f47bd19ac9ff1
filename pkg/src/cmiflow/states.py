"""Labeled multipartite density matrices.

A LabeledState couples a density matrix with an ordered list of named
subsystems; every operation addresses subsystems by label, never by raw
index. Values are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (
    BadProbabilities,
    DimensionMismatch,
    DuplicateLabel,
    IndexOutOfRange,
    NotDensityMatrix,
    UnknownLabel,
)
from .tolerances import EIG_NEG_TOL, HERM_TOL, TRACE_TOL


@dataclass(frozen=True)
class SubsystemLayout:
    labels: tuple
    dims: tuple

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        dims = tuple(int(d) for d in self.dims)
        if len(labels) != len(set(labels)):
            raise DuplicateLabel(f"duplicate labels in {labels}")
        if len(labels) != len(dims):
            raise DimensionMismatch("labels and dims must have equal length")
        if any(d < 1 for d in dims):
            raise DimensionMismatch(f"dims must be positive, got {dims}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims)) if self.dims else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not in {self.labels}") from None

    def positions(self, labels: Iterable[str]):
        return [self.index(l) for l in labels]

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def dims_of(self, labels: Iterable[str]):
        return [self.dim_of(l) for l in labels]


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool


class LabeledState:
    """Density operator over named subsystems."""

    __slots__ = ("layout", "matrix")

    def __init__(self, layout: SubsystemLayout, matrix, check: bool = True):
        matrix = linalg.as_cmatrix(matrix)
        if matrix.shape != (layout.total_dim, layout.total_dim):
            raise DimensionMismatch(
                f"matrix shape {matrix.shape} does not match layout dimension {layout.total_dim}"
            )
        matrix.setflags(write=False)
        self.layout = layout
        self.matrix = matrix
        if check:
            report = validate(self)
            if not report.passed:
                raise NotDensityMatrix(
                    f"hermiticity defect {report.hermiticity_defect:.2e}, "
                    f"trace defect {report.trace_defect:.2e}, "
                    f"min eigenvalue {report.min_eigenvalue:.2e}"
                )

    @property
    def labels(self):
        return self.layout.labels

    @property
    def dims(self):
        return self.layout.dims

    def __repr__(self):
        parts = ", ".join(f"{l}:{d}" for l, d in zip(self.labels, self.dims))
        return f"LabeledState({parts})"


def validate(s: LabeledState, tol: float | None = None) -> ValidationReport:
    """Diagnostics for the density-matrix invariants.

    With tol=None the per-invariant defaults apply (hermiticity and trace
    within 1e-10, eigenvalues above -1e-8); a given tol replaces all three.
    """
    herm, tr, wmin = linalg.density_defects(s.matrix)
    herm_tol = tol if tol is not None else HERM_TOL
    trace_tol = tol if tol is not None else TRACE_TOL
    neg_tol = -tol if tol is not None else EIG_NEG_TOL
    passed = herm <= herm_tol and tr <= trace_tol and wmin >= neg_tol
    return ValidationReport(herm, tr, wmin, passed)


def from_vector(labels: Sequence[str], dims: Sequence[int], vec, check: bool = True) -> LabeledState:
    """Pure state from an amplitude vector (normalized within 1e-9)."""
    layout = SubsystemLayout(tuple(labels), tuple(dims))
    vec = np.ascontiguousarray(vec, dtype=np.complex128).reshape(-1)
    if vec.size != layout.total_dim:
        raise DimensionMismatch(f"vector length {vec.size} != {layout.total_dim}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-9:
        raise NotDensityMatrix(f"state vector norm {norm} is not 1 within 1e-9")
    vec = vec / norm
    return LabeledState(layout, np.outer(vec, vec.conj()), check=check)


def from_matrix(labels: Sequence[str], dims: Sequence[int], matrix, check: bool = True) -> LabeledState:
    return LabeledState(SubsystemLayout(tuple(labels), tuple(dims)), matrix, check=check)


def tensor(s1: LabeledState, s2: LabeledState) -> LabeledState:
    """Tensor product; label sets must be disjoint."""
    overlap = set(s1.labels) & set(s2.labels)
    if overlap:
        raise DuplicateLabel(f"labels {sorted(overlap)} appear in both factors")
    layout = SubsystemLayout(s1.labels + s2.labels, s1.dims + s2.dims)
    return LabeledState(layout, np.kron(s1.matrix, s2.matrix), check=False)


def reduce(s: LabeledState, keep) -> LabeledState:
    """Marginal on the kept labels, in their original relative order."""
    keep = set([keep] if isinstance(keep, str) else keep)
    for l in keep:
        s.layout.index(l)
    positions = [i for i, l in enumerate(s.labels) if l in keep]
    m = linalg.partial_trace(s.matrix, s.dims, positions)
    layout = SubsystemLayout(
        tuple(s.labels[i] for i in positions), tuple(s.dims[i] for i in positions)
    )
    return LabeledState(layout, m, check=False)


def permuted(s: LabeledState, label_order: Sequence[str]) -> LabeledState:
    """Same state with subsystems reordered to label_order."""
    if sorted(label_order) != sorted(s.labels):
        raise UnknownLabel(f"{label_order} is not a reordering of {s.labels}")
    perm = s.layout.positions(label_order)
    m = linalg.permute_factors(s.matrix, s.dims, perm)
    layout = SubsystemLayout(tuple(label_order), tuple(s.dims[p] for p in perm))
    return LabeledState(layout, m, check=False)


def marginal_matrix(s: LabeledState, labels: Sequence[str]):
    """Raw marginal matrix with factors ordered as requested."""
    return permuted(reduce(s, labels), list(labels)).matrix


def maximally_entangled(d: int, label_a: str = "A", label_s: str = "S") -> LabeledState:
    """|Psi+> = d^{-1/2} sum_i |ii> on two d-dimensional parties."""
    if d < 2:
        raise DimensionMismatch("maximally entangled state needs d >= 2")
    vec = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        vec[i * d + i] = 1.0
    vec /= np.sqrt(d)
    return from_vector([label_a, label_s], [d, d], vec, check=False)


def classical_state(labels, dims, probs, assignments) -> LabeledState:
    """sum_k p_k (x)_parties |a_k><a_k|, diagonal in the computational basis."""
    layout = SubsystemLayout(tuple(labels), tuple(dims))
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or len(probs) != len(assignments):
        raise BadProbabilities("need one probability per assignment")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise BadProbabilities(f"probabilities must be nonnegative and sum to 1, got {probs}")
    total = layout.total_dim
    m = np.zeros((total, total), dtype=np.complex128)
    for p, assign in zip(probs, assignments):
        if len(assign) != len(layout.dims):
            raise IndexOutOfRange(f"assignment {assign} needs {len(layout.dims)} indices")
        flat = 0
        for idx, d in zip(assign, layout.dims):
            if not 0 <= idx < d:
                raise IndexOutOfRange(f"basis index {idx} out of range for dim {d}")
            flat = flat * d + idx
        m[flat, flat] += p
    return LabeledState(layout, m, check=False)


def purify_state(s: LabeledState, purifier_label: str = "C") -> LabeledState:
    """Pure extension on labels + purifier; purifier dimension = rank."""
    if purifier_label in s.labels:
        raise DuplicateLabel(f"purifier label {purifier_label!r} already used")
    vec = linalg.purify(s.matrix)
    rank = vec.size // s.layout.total_dim
    return from_vector(
        list(s.labels) + [purifier_label], list(s.dims) + [rank], vec, check=False
    )


# ---------------------------------------------------------------------------
# JSON state format
# ---------------------------------------------------------------------------

def state_to_json(s: LabeledState) -> dict:
    return {
        "labels": list(s.labels),
        "dims": list(s.dims),
        "matrix": {
            "re": np.real(s.matrix).tolist(),
            "im": np.imag(s.matrix).tolist(),
        },
    }


def state_from_json(obj: dict) -> LabeledState:
    try:
        labels = list(obj["labels"])
        dims = [int(d) for d in obj["dims"]]
    except (KeyError, TypeError) as exc:
        raise NotDensityMatrix(f"state object missing labels/dims: {exc}") from exc
    if "matrix" in obj:
        m = obj["matrix"]
        mat = np.asarray(m["re"], dtype=float) + 1j * np.asarray(m.get("im", 0.0), dtype=float)
        return from_matrix(labels, dims, mat)
    if "vector" in obj:
        v = obj["vector"]
        vec = np.asarray(v["re"], dtype=float) + 1j * np.asarray(v.get("im", 0.0), dtype=float)
        return from_vector(labels, dims, vec)
    raise NotDensityMatrix("state object needs a 'matrix' or 'vector' entry")
