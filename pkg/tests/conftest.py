import numpy as np
import pytest

from rlwectl.gsw import Gadget
from rlwectl.ring import RingParams
from rlwectl.rlwe import ErrorDist, keygen

BENCH_Q = 72057594037948417


@pytest.fixture(scope="session")
def bench_dist():
    return ErrorDist(3.2, 19.2)


@pytest.fixture(scope="session")
def params64():
    # Benchmark modulus at desk-scale degree; q = 1 (mod 2^12) so every
    # power-of-two N up to 2^11 is NTT-eligible.
    return RingParams(64, BENCH_Q)


@pytest.fixture(scope="session")
def gadget64():
    return Gadget.for_modulus(BENCH_Q, 128)


@pytest.fixture(scope="session")
def sk64(params64, bench_dist):
    return keygen(params64, bench_dist, np.random.default_rng(1234))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240901)


def random_poly(params, rng):
    from rlwectl.ring import Poly, center

    raw = rng.integers(0, params.q, size=params.N, dtype=np.uint64).astype(np.int64)
    return Poly(params, center(raw, params.q))
