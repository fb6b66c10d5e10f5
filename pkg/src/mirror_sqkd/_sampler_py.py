"""Numpy round sampler used when the compiled kernel is unavailable.

Uniforms come from a SplitMix64 finalizer keyed on ``(seed, round, depth)``,
so any round can be drawn independently of the others.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SCALE = 1.0 / 9007199254740992.0


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def seed_key(master_seed):
    with np.errstate(over="ignore"):
        return int(_mix(np.uint64(master_seed) + GOLDEN))


def _uniform(key, rounds, depth):
    x = np.uint64(key) + (rounds * np.uint64(16) + np.uint64(depth + 1)) * GOLDEN
    return (_mix(x) >> np.uint64(11)).astype(np.float64) * _SCALE


def sample_rounds(key, start, stop, first_child, n_children, cum, target, n_leaves):
    counts = np.zeros(n_leaves, dtype=np.int64)
    rounds = np.arange(start, stop, dtype=np.uint64)
    node = np.zeros(len(rounds), dtype=np.int64)
    depth = 0
    with np.errstate(over="ignore"):
        while len(rounds):
            u = _uniform(key, rounds, depth)
            nxt = np.empty_like(node)
            for n_id in np.unique(node):
                sel = node == n_id
                first, n = first_child[n_id], n_children[n_id]
                # index of the first child whose cumulative bound exceeds u
                j = np.searchsorted(cum[first:first + n - 1], u[sel], side="right")
                nxt[sel] = target[first + j]
            leaf = nxt < 0
            np.add.at(counts, -nxt[leaf] - 1, 1)
            rounds, node = rounds[~leaf], nxt[~leaf]
            depth += 1
    return counts
