"""Seeded random generators for states, unitaries, channels and POVMs.

Everything takes an explicit numpy Generator so substreams can be derived
deterministically (np.random.SeedSequence spawning).
"""

from __future__ import annotations

import numpy as np

from .channels import KrausChannel, Povm
from .states import LabeledState, from_matrix, from_vector


def rng_for(seed, *path) -> np.random.Generator:
    """Generator for a fixed substream of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(path)))


def ginibre(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def rand_unitary(rng, d):
    q, r = np.linalg.qr(ginibre(rng, d, d))
    return q * np.exp(-1j * np.angle(np.diag(r)))


def rand_isometry(rng, d_out, d_in):
    if d_out < d_in:
        raise ValueError("isometry needs d_out >= d_in")
    q, r = np.linalg.qr(ginibre(rng, d_out, d_in))
    return q * np.exp(-1j * np.angle(np.diag(r)))


def rand_pure(rng, labels, dims) -> LabeledState:
    d = int(np.prod(dims))
    v = ginibre(rng, d, 1).reshape(-1)
    return from_vector(labels, dims, v / np.linalg.norm(v), check=False)


def rand_state(rng, labels, dims, rank=None) -> LabeledState:
    d = int(np.prod(dims))
    rank = d if rank is None else min(rank, d)
    g = ginibre(rng, d, rank)
    m = g @ g.conj().T
    return from_matrix(labels, dims, m / np.trace(m).real, check=False)


def rand_channel(rng, target, d_in, d_out=None, kraus_count=2) -> KrausChannel:
    """Random CPTP map from a Haar-ish Stinespring isometry."""
    d_out = d_in if d_out is None else d_out
    v = rand_isometry(rng, d_out * kraus_count, d_in)
    ops = [v[i * d_out:(i + 1) * d_out, :] for i in range(kraus_count)]
    return KrausChannel(ops, target)


def rand_povm(rng, target, d, outcomes) -> Povm:
    """Random POVM: M_i = V^dag (I (x) Pi_i) V for a random isometry V."""
    v = rand_isometry(rng, d * outcomes, d)
    effects = []
    for i in range(outcomes):
        block = v[i * d:(i + 1) * d, :]
        effects.append(block.conj().T @ block)
    return Povm(effects, target)


def rand_projective_povm(rng, target, d) -> Povm:
    u = rand_unitary(rng, d)
    effects = [np.outer(u[:, i], u[:, i].conj()) for i in range(d)]
    return Povm(effects, target)
