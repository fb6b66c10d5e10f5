# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled round sampler; must stay bit-identical to ``_sampler_py``."""
from libc.stdint cimport uint64_t, int64_t

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t rnd, uint64_t depth) nogil:
    cdef uint64_t x = key + (rnd * 16ULL + depth + 1ULL) * GOLDEN
    return <double>(_mix(x) >> 11) * (1.0 / 9007199254740992.0)


def seed_key(uint64_t master_seed):
    return _mix(master_seed + GOLDEN)


def sample_rounds(uint64_t key, int64_t start, int64_t stop,
                  const int64_t[::1] first_child, const int64_t[::1] n_children,
                  const double[::1] cum, const int64_t[::1] target, int64_t n_leaves):
    cdef cnp.ndarray[int64_t, ndim=1] counts_arr = np.zeros(n_leaves, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef int64_t r, node, first, n, j, nxt
    cdef uint64_t depth
    cdef double u
    with nogil:
        for r in range(start, stop):
            node = 0
            depth = 0
            while True:
                u = _uniform(key, <uint64_t>r, depth)
                first = first_child[node]
                n = n_children[node]
                j = 0
                while j < n - 1 and u >= cum[first + j]:
                    j += 1
                nxt = target[first + j]
                if nxt < 0:
                    counts[-nxt - 1] += 1
                    break
                node = nxt
                depth += 1
    return counts_arr
