import numpy as np
import pytest

from twistrank.arith import sieve_primes
from twistrank.curve import CurveModel, builtin_catalog


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


@pytest.fixture(scope="session")
def cm_curve(catalog):
    return catalog["cm32-like"]


@pytest.fixture(scope="session")
def ncm_curve(catalog):
    return catalog["ncm37"]


@pytest.fixture(scope="session")
def extra_curve():
    # y^2 = x^3 + 2x + 3; model discriminant -16 * 275, bad model primes
    # {2, 5, 11}.  Metadata: conductor is a placeholder covering the bad
    # primes; a_3 = 0 by the exhaustive count over F_3 (points (0,0), (1,0),
    # (2,0) and infinity).
    return CurveModel(A=2, B=3, conductor=550, root_number=1, label="aux275", a2=0, a3=0)


@pytest.fixture(scope="session")
def primes_1e3():
    return sieve_primes(1_000)


@pytest.fixture(scope="session")
def primes_1e4():
    return sieve_primes(10_000)


@pytest.fixture(scope="session")
def primes_1e5():
    return sieve_primes(100_000)


def brute_point_count(A: int, B: int, p: int) -> int:
    """#E(F_p) by counting y-solutions per x, independent of any character
    machinery: histogram the squares, then read off multiplicities."""
    ys = np.arange(p, dtype=np.int64)
    sq_count = np.bincount((ys * ys) % p, minlength=p)
    xs = np.arange(p, dtype=np.int64)
    fx = ((xs * xs % p + A % p) * xs + B % p) % p
    return int(sq_count[fx].sum()) + 1
