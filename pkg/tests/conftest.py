import numpy as np
import pytest

from mdclab.params import LatticeParams, derive


@pytest.fixture(scope="session")
def d321():
    """Derived constants at the worked parameter point (3, 2, 1)."""
    return derive(LatticeParams(3.0, 2.0, 1.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def sample_triples(rng, count, low=0.5, high=3.0, gap=0.1):
    """Admissible random parameter triples (pairwise gaps and sums guarded)."""
    out = []
    while len(out) < count:
        p, q, r = rng.uniform(low, high, size=3)
        pairs = ((p, q), (p, r), (q, r))
        if any(abs(a - b) < gap or abs(a + b) < gap for a, b in pairs):
            continue
        out.append((float(p), float(q), float(r)))
    return out
