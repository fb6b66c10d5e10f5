"""Round-sampling backend, compiled when available.

Set ``MIRROR_SQKD_PURE=1`` to force the numpy implementation.
"""
import os

if os.environ.get("MIRROR_SQKD_PURE"):
    from ._sampler_py import sample_rounds, seed_key
    BACKEND = "python"
else:
    try:
        from ._sampler import sample_rounds, seed_key
        BACKEND = "cython"
    except ImportError:
        from ._sampler_py import sample_rounds, seed_key
        BACKEND = "python"

__all__ = ["BACKEND", "sample_rounds", "seed_key"]
