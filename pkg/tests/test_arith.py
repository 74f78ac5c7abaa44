import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistrank.arith import (
    ParityDecomposition,
    euler_phi,
    fundamental_discriminant,
    is_prime,
    is_squarefree,
    kronecker,
    mobius,
    parity_decompose,
    sieve_primes,
    squarefree_part,
)

SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        d = 2
        while d * d <= n:
            if n % d == 0:
                break
            d += 1
        else:
            out.append(n)
    return out


def mobius_sieve(limit):
    """Independent linear-sieve oracle for the Mobius function."""
    mu = np.ones(limit + 1, dtype=np.int64)
    primes = sieve_primes(limit).primes if limit >= 2 else []
    for p in primes:
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


class TestSieve:
    def test_small_cases(self):
        assert sieve_primes(10).primes.tolist() == [2, 3, 5, 7]
        assert sieve_primes(2).primes.tolist() == [2]

    def test_limit_below_two_rejected(self):
        with pytest.raises(ValueError):
            sieve_primes(1)

    def test_against_trial_division(self):
        expected = trial_division_primes(2_000)
        assert sieve_primes(2_000).primes.tolist() == expected

    def test_count_1e5_matches_trial_division_count(self):
        # pi(1e5) = 9592, recomputed here from scratch
        expected = len(trial_division_primes(100_000))
        assert expected == 9592
        assert len(sieve_primes(100_000)) == 9592

    def test_count_1e6(self):
        table = sieve_primes(1_000_000)
        assert len(table) == 78498

    def test_segmentation_invariance(self):
        a = sieve_primes(50_000, segment_size=1 << 20).primes
        b = sieve_primes(50_000, segment_size=1024).primes
        c = sieve_primes(50_000, segment_size=37 * 41).primes
        assert np.array_equal(a, b)
        assert np.array_equal(a, c)

    def test_elements_are_prime_and_increasing(self):
        table = sieve_primes(100_000)
        ps = table.primes
        assert ps[0] == 2
        assert np.all(np.diff(ps) > 0)
        sample = list(ps[:50]) + list(ps[-50:]) + list(ps[::997])
        assert all(is_prime(int(p)) for p in sample)

    def test_below_is_strict(self):
        table = sieve_primes(100)
        assert table.below(7).tolist() == [2, 3, 5]
        assert table.below(7.5).tolist() == [2, 3, 5, 7]


class TestKronecker:
    def test_examples(self):
        assert kronecker(5, 11) == 1  # 5 is a QR mod 11
        assert kronecker(-1, 7) == -1
        for a in range(-30, 31):
            assert kronecker(a, 1) == 1

    def test_euler_criterion(self, primes_1e3):
        for p in (int(q) for q in primes_1e3.primes if q % 2 == 1 and q < 500):
            for d in range(-200, 201):
                if d % p == 0:
                    continue
                euler = pow(d % p, (p - 1) // 2, p)
                expected = 1 if euler == 1 else -1
                assert kronecker(d, p) == expected, (d, p)

    def test_zero_and_negative_denominators(self):
        assert kronecker(1, 0) == 1
        assert kronecker(-1, 0) == 1
        assert kronecker(5, 0) == 0
        assert kronecker(3, -1) == 1
        assert kronecker(-3, -1) == -1
        # (a|-n) = (a|-1)(a|n)
        for a in (-7, -2, 3, 10):
            for n in (3, 8, 15):
                assert kronecker(a, -n) == kronecker(a, -1) * kronecker(a, n)

    @given(
        st.integers(min_value=-100, max_value=100),
        st.integers(min_value=-100, max_value=100),
        st.integers(min_value=1, max_value=100),
    )
    @settings(max_examples=300, deadline=None)
    def test_multiplicative_in_numerator(self, a, b, k):
        n = 2 * k + 1  # odd modulus
        assert kronecker(a, n) * kronecker(b, n) == kronecker(a * b, n)

    @given(
        st.integers(min_value=-60, max_value=60),
        st.integers(min_value=-40, max_value=40),
        st.integers(min_value=-40, max_value=40),
    )
    @settings(max_examples=300, deadline=None)
    def test_multiplicative_in_denominator(self, a, m, n):
        assert kronecker(a, m) * kronecker(a, n) == kronecker(a, m * n)


class TestMobiusSquarefree:
    def test_examples(self):
        assert mobius(1) == 1
        assert mobius(12) == 0
        assert mobius(30) == -1
        assert squarefree_part(45) == 5
        assert squarefree_part(1) == 1
        for p in SMALL_PRIMES:
            assert squarefree_part(p) == p

    def test_mobius_against_sieve_oracle(self):
        mu = mobius_sieve(200_000)
        for n in range(1, 5_000):
            assert mobius(n) == mu[n]
        rng = np.random.default_rng(7)
        for n in rng.integers(1, 200_000, size=400):
            assert mobius(int(n)) == mu[int(n)]

    def test_squarefree_part_leaves_square_cofactor(self):
        for n in range(1, 3_000):
            s = squarefree_part(n)
            assert n % s == 0
            q = n // s
            r = math.isqrt(q)
            assert r * r == q
            assert is_squarefree(s)

    def test_rejects_nonpositive(self):
        for fn in (mobius, squarefree_part, euler_phi):
            with pytest.raises(ValueError):
                fn(0)

    def test_euler_phi_small(self):
        brute = lambda n: sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)
        for n in list(range(1, 200)) + [720, 1024, 9973]:
            assert euler_phi(n) == brute(n)


class TestParityDecomposition:
    def test_examples(self):
        assert parity_decompose((3, 3, 5)) == ParityDecomposition(pi=45, pi1=3, pi2=5)
        assert parity_decompose((3, 5, 7)) == ParityDecomposition(pi=105, pi1=1, pi2=105)
        assert parity_decompose((3, 3)) == ParityDecomposition(pi=9, pi1=3, pi2=1)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            parity_decompose(())
        with pytest.raises(ValueError):
            parity_decompose((4, 3))

    @given(st.lists(st.sampled_from(SMALL_PRIMES), min_size=1, max_size=8))
    @settings(max_examples=300, deadline=None)
    def test_invariants(self, tup):
        pd = parity_decompose(tup)
        pi = math.prod(tup)
        assert pd.pi == pi
        assert math.gcd(pd.pi1, pd.pi2) == 1
        assert pd.pi2 == squarefree_part(pi)
        assert is_squarefree(pd.pi1) and is_squarefree(pd.pi2)
        root = math.isqrt(pi)
        assert (pd.pi2 == 1) == (root * root == pi)
        assert pd.pi1 * pd.pi2 == squarefree_part(pi) * pd.pi1  # radical split


class TestFundamentalDiscriminant:
    def test_values(self):
        assert fundamental_discriminant(1) == 1
        assert fundamental_discriminant(5) == 5
        assert fundamental_discriminant(-3) == -3
        assert fundamental_discriminant(3) == 12
        assert fundamental_discriminant(-1) == -4
        assert fundamental_discriminant(8) == 8  # kernel 2, 2 % 4 != 1
        assert fundamental_discriminant(9) == 1
        assert fundamental_discriminant(12) == 12  # kernel 3

    def test_always_a_discriminant(self):
        for d in range(-300, 301):
            if d == 0:
                continue
            fd = fundamental_discriminant(d)
            assert fd % 4 in (0, 1)
