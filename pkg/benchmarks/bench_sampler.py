"""Compiled sampler vs numpy fallback on the weaker-attack round tree.

    python3 benchmarks/bench_sampler.py [--rounds 100000 1000000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from mirror_sqkd import _sampler_py
from mirror_sqkd.engine import AttackSpec, ScenarioConfig, _flatten, round_tree
from mirror_sqkd.protocol import ProtocolVariant

try:
    from mirror_sqkd import _sampler as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rounds", type=int, nargs="+", default=[100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    config = ScenarioConfig(ProtocolVariant.simplified(), AttackSpec("weaker", 0.5))
    first, n, cum, target, leaves = _flatten(round_tree(config))
    key = _sampler_py.seed_key(0)
    print(f"{'rounds':>10} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for rounds in args.rounds:
        t_py, a = best_of(lambda: _sampler_py.sample_rounds(key, 0, rounds, first, n, cum, target, len(leaves)),
                          args.repeat)
        if compiled is None:
            print(f"{rounds:>10} {t_py:>10.4f} {'n/a':>10} {'n/a':>8}")
            continue
        t_c, b = best_of(lambda: compiled.sample_rounds(key, 0, rounds, first, n, cum, target, len(leaves)),
                         args.repeat)
        assert np.array_equal(a, b), "backends disagree"
        print(f"{rounds:>10} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
