"""Entropic functionals on labeled states: von Neumann entropy, relative
entropy, mutual information, conditional mutual information, and the
identities specific to ancilla-system-environment dynamics.

All values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import backend, linalg
from .errors import LabelOverlap, LayoutMismatch, NotDensityMatrix, UnknownLabel
from .states import LabeledState, marginal_matrix, permuted, reduce
from .tolerances import EIG_NEG_TOL, EIG_ZERO_TOL, SUPPORT_TOL


@dataclass(frozen=True)
class EntropyReport:
    value: float         # nats
    clamped_mass: float  # total eigenvalue weight clamped to zero


@dataclass(frozen=True)
class IdentityReport:
    residual: float
    terms: dict


def _labelset(arg) -> tuple:
    if arg is None:
        return ()
    if isinstance(arg, str):
        return (arg,)
    return tuple(arg)


def entropy_matrix(m) -> EntropyReport:
    """Entropy of a raw density matrix; eigenvalues in [-1e-8, 1e-12) clamp
    to zero, anything more negative is rejected."""
    w = backend.eigvalsh_herm(linalg.as_cmatrix(m))
    if w[0] < EIG_NEG_TOL:
        raise NotDensityMatrix(f"min eigenvalue {w[0]:.3e} below {EIG_NEG_TOL}")
    keep = w >= EIG_ZERO_TOL
    clamped = float(np.abs(w[~keep]).sum())
    w = w[keep]
    value = float(-(w * np.log(w)).sum()) if w.size else 0.0
    return EntropyReport(value, clamped)


def vn_entropy(s: LabeledState, labels=None) -> EntropyReport:
    """S(rho) = -tr(rho ln rho) of the state or of a marginal."""
    if labels is None:
        return entropy_matrix(s.matrix)
    return entropy_matrix(reduce(s, _labelset(labels)).matrix)


def relative_entropy(rho: LabeledState, sigma: LabeledState) -> float:
    """S(rho || sigma) = tr rho (ln rho - ln sigma); math.inf when the support
    of rho is not contained in the support of sigma."""
    if set(rho.labels) != set(sigma.labels):
        raise LayoutMismatch(f"label sets differ: {rho.labels} vs {sigma.labels}")
    sigma = permuted(sigma, list(rho.labels))
    if rho.dims != sigma.dims:
        raise LayoutMismatch(f"dims differ: {rho.dims} vs {sigma.dims}")
    w, v = backend.eigh_herm(sigma.matrix)
    diag = np.einsum("ki,kl,li->i", v.conj(), rho.matrix, v).real
    null = w <= SUPPORT_TOL
    if float(diag[null].sum()) > 1e-10:
        return math.inf
    tr_rho_ln_rho = -entropy_matrix(rho.matrix).value
    tr_rho_ln_sigma = float((diag[~null] * np.log(w[~null])).sum())
    return tr_rho_ln_rho - tr_rho_ln_sigma


def mutual_information(s: LabeledState, x, y) -> float:
    """I(x:y) = S(x) + S(y) - S(xy)."""
    x, y = _labelset(x), _labelset(y)
    _check_disjoint(s, x, y)
    if not x or not y:
        raise LabelOverlap("mutual information needs two nonempty label sets")
    sx = entropy_matrix(marginal_matrix(s, x)).value
    sy = entropy_matrix(marginal_matrix(s, y)).value
    sxy = entropy_matrix(marginal_matrix(s, x + y)).value
    return sx + sy - sxy


def cmi(s: LabeledState, x, y, z=()) -> float:
    """I(x:y|z) = S(xz) + S(yz) - S(z) - S(xyz); z may be empty."""
    x, y, z = _labelset(x), _labelset(y), _labelset(z)
    _check_disjoint(s, x, y, z)
    if not x or not y:
        raise LabelOverlap("cmi needs nonempty x and y")
    sxz = entropy_matrix(marginal_matrix(s, x + z)).value
    syz = entropy_matrix(marginal_matrix(s, y + z)).value
    sz = entropy_matrix(marginal_matrix(s, z)).value if z else 0.0
    sxyz = entropy_matrix(marginal_matrix(s, x + y + z)).value
    return sxz + syz - sz - sxyz


def _check_disjoint(s: LabeledState, *groups):
    seen = set()
    for g in groups:
        for l in g:
            s.layout.index(l)
            if l in seen:
                raise LabelOverlap(f"label {l!r} used in more than one group")
            seen.add(l)


def _env_labels(s: LabeledState, a_label, s_label) -> tuple:
    env = tuple(l for l in s.labels if l not in (a_label, s_label))
    if not env:
        raise UnknownLabel("state has no environment labels besides A and S")
    return env


def decomposition_identity(s: LabeledState, a_label="A", s_label="S") -> IdentityReport:
    """|I(A:SE) - I(A:E|S) - I(A:S)|; an algebraic identity, so the residual
    only reflects eigensolver noise."""
    env = _env_labels(s, a_label, s_label)
    i_a_se = mutual_information(s, (a_label,), (s_label,) + env)
    i_cond = cmi(s, (a_label,), env, (s_label,))
    i_as = mutual_information(s, (a_label,), (s_label,))
    return IdentityReport(
        abs(i_a_se - i_cond - i_as),
        {"i_a_se": i_a_se, "i_ae_given_s": i_cond, "i_as": i_as},
    )


def capacity_identity(s: LabeledState, a_label="A", s_label="S") -> IdentityReport:
    """|I(A:E|S) + I(A:S) - 2 S(A)|. Small only for states generated by the
    pure-AS, product-environment, 1_A (x) U_SE setting; reported, not errored."""
    env = _env_labels(s, a_label, s_label)
    i_cond = cmi(s, (a_label,), env, (s_label,))
    i_as = mutual_information(s, (a_label,), (s_label,))
    s_a = entropy_matrix(marginal_matrix(s, (a_label,))).value
    return IdentityReport(
        abs(i_cond + i_as - 2.0 * s_a),
        {"i_ae_given_s": i_cond, "i_as": i_as, "s_a": s_a},
    )
