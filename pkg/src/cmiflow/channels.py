"""Kraus channels, POVMs, measurement-to-classical-quantum maps, broadcasting,
Naimark dilation, composite extensions and the associated exact recovery map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import BadPovm, DimensionMismatch, DuplicateLabel
from .states import LabeledState, SubsystemLayout, from_matrix, permuted
from .tolerances import COMPLETENESS_TOL


def _as_ops(ops):
    return [linalg.as_cmatrix(k) for k in ops]


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple
    target: tuple

    def __init__(self, kraus_ops, target):
        ops = tuple(_as_ops(kraus_ops))
        target = (target,) if isinstance(target, str) else tuple(target)
        if not ops:
            raise DimensionMismatch("channel needs at least one Kraus operator")
        d_out, d_in = ops[0].shape
        if any(k.shape != (d_out, d_in) for k in ops):
            raise DimensionMismatch("Kraus operators must share one shape")
        comp = sum(linalg.dagger(k) @ k for k in ops)
        if np.linalg.norm(comp - np.eye(d_in)) > COMPLETENESS_TOL * max(1.0, np.linalg.norm(comp)):
            raise DimensionMismatch("Kraus completeness sum K^dag K != I")
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "target", target)

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True)
class Povm:
    effects: tuple
    target: tuple

    def __init__(self, effects, target):
        effects = tuple(_as_ops(effects))
        target = (target,) if isinstance(target, str) else tuple(target)
        if not effects:
            raise BadPovm("POVM needs at least one effect")
        d = effects[0].shape[0]
        for m in effects:
            if m.shape != (d, d):
                raise BadPovm("effects must be square and share one dimension")
            if linalg.hermiticity_defect(m) > 1e-8:
                raise BadPovm("effect is not Hermitian")
        for m in effects:
            w = linalg.hermitian_eig((m + linalg.dagger(m)) / 2).eigenvalues
            if w[0] < -1e-10 * max(1.0, abs(w[-1])):
                raise BadPovm(f"effect has negative eigenvalue {w[0]:.2e}")
        comp = sum(effects)
        if np.linalg.norm(comp - np.eye(d)) > COMPLETENESS_TOL * max(1.0, np.linalg.norm(comp)):
            raise BadPovm("effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "target", target)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.effects)

    def is_projective(self, tol: float = 1e-10) -> bool:
        for i, m in enumerate(self.effects):
            if np.linalg.norm(m @ m - m) > tol * max(1.0, np.linalg.norm(m)):
                return False
            for other in self.effects[i + 1:]:
                if np.linalg.norm(m @ other) > tol:
                    return False
        return True


def _split_target(s: LabeledState, target: Sequence[str]):
    """Reorder the state so the target labels sit at the end."""
    target = list(target)
    rest = [l for l in s.labels if l not in target]
    sp = permuted(s, rest + target)
    d_rest = int(np.prod([s.layout.dim_of(l) for l in rest])) if rest else 1
    d_t = int(np.prod([s.layout.dim_of(l) for l in target]))
    return sp, rest, d_rest, d_t


def _restore_order(original_labels, rest, new_target_labels, first_target_pos):
    order = list(rest)
    order[first_target_pos:first_target_pos] = list(new_target_labels)
    return order


def apply_channel(s: LabeledState, ch: KrausChannel, out_labels=None, out_dims=None) -> LabeledState:
    """sum_i (I (x) K_i) rho (I (x) K_i)^dag on the target labels.

    When d_out != d_in the replacement labels and dims for the target slot
    must be supplied via out_labels/out_dims.
    """
    for l in ch.target:
        s.layout.index(l)
    sp, rest, d_rest, d_t = _split_target(s, ch.target)
    if ch.d_in != d_t:
        raise DimensionMismatch(f"channel input dim {ch.d_in} != target dim {d_t}")
    if out_labels is None:
        if ch.d_out != ch.d_in:
            raise DimensionMismatch("d_out != d_in requires explicit out_labels/out_dims")
        out_labels = list(ch.target)
        out_dims = [s.layout.dim_of(l) for l in ch.target]
    else:
        out_labels = list(out_labels)
        out_dims = [int(d) for d in (out_dims or [])]
        if int(np.prod(out_dims)) != ch.d_out:
            raise DimensionMismatch(f"out_dims {out_dims} do not multiply to {ch.d_out}")
        for l in out_labels:
            if l in rest:
                raise DuplicateLabel(f"output label {l!r} collides with remaining labels")
    rho = sp.matrix.reshape(d_rest, d_t, d_rest, d_t)
    out = np.zeros((d_rest, ch.d_out, d_rest, ch.d_out), dtype=np.complex128)
    for k in ch.kraus_ops:
        out += np.einsum("pe,aebf,qf->apbq", k, rho, k.conj())
    first_pos = min(s.layout.index(l) for l in ch.target)
    rest_dims = [s.layout.dim_of(l) for l in rest]
    layout = SubsystemLayout(tuple(rest + out_labels), tuple(rest_dims + out_dims))
    result = LabeledState(layout, out.reshape(d_rest * ch.d_out, d_rest * ch.d_out), check=False)
    order = _restore_order(s.labels, rest, out_labels, first_pos)
    return permuted(result, order)


def measure_to_cq(s: LabeledState, povm: Povm, register_label: str = "M") -> LabeledState:
    """sum_i Tr_target(M_i rho) (x) |i><i| on a fresh classical register that
    replaces the measured subsystems."""
    for l in povm.target:
        s.layout.index(l)
    sp, rest, d_rest, d_t = _split_target(s, povm.target)
    if povm.dim != d_t:
        raise DimensionMismatch(f"POVM dim {povm.dim} != target dim {d_t}")
    if register_label in rest:
        raise DuplicateLabel(f"register label {register_label!r} collides")
    k = povm.outcomes
    rho = sp.matrix.reshape(d_rest, d_t, d_rest, d_t)
    out = np.zeros((d_rest, k, d_rest, k), dtype=np.complex128)
    for i, m in enumerate(povm.effects):
        out[:, i, :, i] = np.einsum("aebf,fe->ab", rho, m)
    first_pos = min(s.layout.index(l) for l in povm.target)
    rest_dims = [s.layout.dim_of(l) for l in rest]
    layout = SubsystemLayout(tuple(rest + [register_label]), tuple(rest_dims + [k]))
    result = LabeledState(layout, out.reshape(d_rest * k, d_rest * k), check=False)
    return permuted(result, _restore_order(s.labels, rest, [register_label], first_pos))


def broadcast_channel(d: int, target="E") -> KrausChannel:
    """Classical copier with Kraus operators |ii><i|, i = 0..d-1."""
    if d < 2:
        raise DimensionMismatch("broadcast needs d >= 2")
    ops = []
    for i in range(d):
        e = np.zeros((d * d, d), dtype=np.complex128)
        e[i * d + i, i] = 1.0
        ops.append(e)
    return KrausChannel(ops, target)


def broadcast(s: LabeledState, label: str, copy_label: str) -> LabeledState:
    """Apply the |ii><i| copier to one subsystem, appending the copy."""
    d = s.layout.dim_of(label)
    ch = broadcast_channel(d, label)
    return apply_channel(s, ch, out_labels=[label, copy_label], out_dims=[d, d])


def _complete_isometry(w):
    """Deterministic unitary completion of an isometry (columns first)."""
    n, m = w.shape
    if n == m:
        return w
    u, _, vh = np.linalg.svd(w)
    null = u[:, m:]
    return np.hstack([w, null])


def naimark_extend(povm: Povm, ancilla_label: str = "E'"):
    """Projective dilation of a POVM.

    Returns (pvm, embed): embed attaches a |0><0| ancilla (so the embedded
    state is an extension of the input, Tr_ancilla eta = rho), and pvm is a
    projective measurement on target (x) ancilla with tr(P_i eta) = tr(M_i rho).
    Projective inputs get a dim-1 ancilla and pass through unchanged.
    """
    d = povm.dim
    k = povm.outcomes
    target = povm.target

    if povm.is_projective():
        anc_dim = 1
        pvm_effects = [np.kron(m, np.eye(1)) for m in povm.effects]
    else:
        anc_dim = k
        w = np.zeros((d * anc_dim, d), dtype=np.complex128)
        for i, m in enumerate(povm.effects):
            vals, vecs = linalg.hermitian_eig((m + linalg.dagger(m)) / 2)
            vals = np.clip(vals, 0.0, None)
            root = (vecs * np.sqrt(vals)) @ linalg.dagger(vecs)
            sel = np.zeros(anc_dim, dtype=np.complex128)
            sel[i] = 1.0
            w += np.kron(root, sel[:, None])
        # unitary completion with w's columns in the |e> (x) |0> slots
        filled = _complete_isometry(w)
        u = np.zeros((d * anc_dim, d * anc_dim), dtype=np.complex128)
        slots = [e * anc_dim for e in range(d)]
        u[:, slots] = w
        free = [c for c in range(d * anc_dim) if c not in slots]
        u[:, free] = filled[:, d:]
        pvm_effects = []
        for i in range(k):
            pi = np.zeros((anc_dim, anc_dim), dtype=np.complex128)
            pi[i, i] = 1.0
            pvm_effects.append(linalg.dagger(u) @ np.kron(np.eye(d), pi) @ u)

    pvm = Povm(pvm_effects, tuple(target) + (ancilla_label,))

    def embed(s: LabeledState) -> LabeledState:
        if ancilla_label in s.labels:
            raise DuplicateLabel(f"ancilla label {ancilla_label!r} already used")
        anc = np.zeros((anc_dim, anc_dim), dtype=np.complex128)
        anc[0, 0] = 1.0
        anc_state = from_matrix([ancilla_label], [anc_dim], anc, check=False)
        from .states import tensor
        out = tensor(s, anc_state)
        # place ancilla right after the measured labels
        order = []
        for l in s.labels:
            order.append(l)
            if l == target[-1]:
                order.append(ancilla_label)
        if ancilla_label not in order:
            order.append(ancilla_label)
        return permuted(out, order)

    return pvm, embed


def _copier_isometry(ch: KrausChannel):
    """W = sum_i K_i (x) |i>_{E'} (x) |i>_{E''}, an isometry d_in -> d_out*k*k."""
    k = len(ch.kraus_ops)
    d_out, d_in = ch.d_out, ch.d_in
    w = np.zeros((d_out, k, k, d_in), dtype=np.complex128)
    for i, op in enumerate(ch.kraus_ops):
        w[:, i, i, :] = op
    return w.reshape(d_out * k * k, d_in)


def composite_extend(s: LabeledState, ch: KrausChannel, registers=("E'", "E''")) -> LabeledState:
    """Dilate-and-copy extension of a channel on the target labels.

    Conjugates by W = sum_i K_i (x) |ii>, i.e. the unitary dilation of the
    channel followed by the isometric register copier. The E' marginal
    carries the Kraus-index record: Tr_{target,E''} of the output is the
    classical-quantum state sum_i Tr(K_i rho K_i^dag) (x) |i><i|.
    """
    lbl_p, lbl_pp = registers
    for l in registers:
        if l in s.labels:
            raise DuplicateLabel(f"register label {l!r} already used")
    sp, rest, d_rest, d_t = _split_target(s, ch.target)
    if ch.d_in != d_t:
        raise DimensionMismatch(f"channel input dim {ch.d_in} != target dim {d_t}")
    k = len(ch.kraus_ops)
    w = _copier_isometry(ch)
    big = np.kron(np.eye(d_rest), w)
    out = big @ sp.matrix @ linalg.dagger(big)
    rest_dims = [s.layout.dim_of(l) for l in rest]
    if len(ch.target) == 1:
        t_labels, t_dims = [ch.target[0]], [ch.d_out]
    else:
        if ch.d_out != ch.d_in:
            raise DimensionMismatch("multi-label target requires d_out == d_in")
        t_labels = list(ch.target)
        t_dims = [s.layout.dim_of(l) for l in ch.target]
    layout = SubsystemLayout(
        tuple(rest + t_labels + [lbl_p, lbl_pp]),
        tuple(rest_dims + t_dims + [k, k]),
    )
    result = LabeledState(layout, out, check=False)
    order = [l for l in s.labels if l not in ch.target]
    first_pos = min(s.layout.index(l) for l in ch.target)
    order[first_pos:first_pos] = t_labels
    return permuted(result, order + [lbl_p, lbl_pp])


def recover(eta: LabeledState, ch: KrausChannel, registers=("E'", "E''")) -> LabeledState:
    """Exact inverse of composite_extend on its range: conjugation by the
    adjoint isometry W^dag (no matrix inversion)."""
    lbl_p, lbl_pp = registers
    k = len(ch.kraus_ops)
    ext_target = tuple(ch.target) + (lbl_p, lbl_pp)
    sp, rest, d_rest, d_t = _split_target(eta, ext_target)
    if d_t != ch.d_out * k * k:
        raise DimensionMismatch("state dims do not match the composite extension")
    w = _copier_isometry(ch)
    big = np.kron(np.eye(d_rest), w)
    out = linalg.dagger(big) @ sp.matrix @ big
    rest_dims = [eta.layout.dim_of(l) for l in rest]
    if len(ch.target) == 1:
        t_labels, t_dims = [ch.target[0]], [ch.d_in]
    else:
        t_labels = list(ch.target)
        t_dims = [eta.layout.dim_of(l) for l in ch.target]
    layout = SubsystemLayout(tuple(rest + t_labels), tuple(rest_dims + t_dims))
    result = LabeledState(layout, out, check=False)
    order = [l for l in eta.labels if l not in ext_target]
    first_pos = min(eta.layout.index(l) for l in ch.target)
    order[first_pos:first_pos] = t_labels
    return permuted(result, order)


# ---------------------------------------------------------------------------
# JSON channel/POVM format
# ---------------------------------------------------------------------------

def channel_to_json(obj) -> dict:
    if isinstance(obj, KrausChannel):
        ops, kind = obj.kraus_ops, "kraus"
    elif isinstance(obj, Povm):
        ops, kind = obj.effects, "povm"
    else:
        raise TypeError(f"expected KrausChannel or Povm, got {type(obj)}")
    return {
        "target": list(obj.target),
        "kind": kind,
        "ops": [{"re": np.real(k).tolist(), "im": np.imag(k).tolist()} for k in ops],
    }


def channel_from_json(obj: dict):
    kind = obj.get("kind", "kraus")
    target = tuple(obj["target"])
    ops = [
        np.asarray(o["re"], dtype=float) + 1j * np.asarray(o.get("im", 0.0), dtype=float)
        for o in obj["ops"]
    ]
    if kind == "povm":
        return Povm(ops, target)
    if kind == "kraus":
        return KrausChannel(ops, target)
    raise BadPovm(f"unknown kind {kind!r}")
