import random

import numpy as np
import pytest

from mmretrieval.kernels import BACKEND, _pure

try:
    from mmretrieval.kernels import _fast
except ImportError:
    _fast = None

needs_fast = pytest.mark.skipif(_fast is None, reason="compiled extension not built")


def test_a_backend_selected():
    assert BACKEND in ("compiled", "pure")


@needs_fast
def test_bm25_accumulate_backends_agree():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(5, 50))
        df = int(rng.integers(1, n + 1))
        ordinals = np.sort(rng.choice(n, size=df, replace=False)).astype(np.int64)
        tfs = rng.integers(1, 6, size=df).astype(np.float64)
        norms = rng.uniform(0.5, 2.0, size=n)
        idf = float(rng.uniform(0.1, 3.0))
        k1 = 1.2
        scores_fast = np.zeros(n)
        scores_pure = np.zeros(n)
        _fast.bm25_accumulate(scores_fast, ordinals, tfs, idf, k1, norms)
        _pure.bm25_accumulate(scores_pure, ordinals, tfs, idf, k1, norms)
        assert np.array_equal(scores_fast, scores_pure)


@needs_fast
def test_ratcliff_backends_agree():
    rng = random.Random(17)
    for _ in range(500):
        a = "".join(rng.choice("abcde ") for _ in range(rng.randrange(0, 25)))
        b = "".join(rng.choice("abcde ") for _ in range(rng.randrange(0, 25)))
        assert _fast.ratcliff_matches(a, b) == _pure.ratcliff_matches(a, b)


@needs_fast
def test_ratcliff_non_ascii():
    assert _fast.ratcliff_matches("café", "café") == _pure.ratcliff_matches("café", "café") == 4
