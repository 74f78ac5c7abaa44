import math
from collections import Counter
from math import fsum, gcd

import pytest

from twistrank.arith import parity_decompose
from twistrank.explicit_formula import beta_array
from twistrank.kernel import SmoothWeight
from twistrank.verification_lab import (
    PoissonTruncationError,
    fit_weight_gamma,
    gauss_sum_check,
    jsum_crt_check,
    logderiv_partial,
    poisson_check,
    poisson_required_truncation,
    q_sum,
    q_term,
    rankin_linear_check,
    rankin_square_check,
    run_suite,
    step1_sum,
    wl_decay_check,
)


# ---------------------------------------------------------------------------
# independent recursive enumeration used as the oracle for q_sum / step1_sum


def multiset_tuples(plist, r, U):
    """Nondecreasing r-tuples with product <= U plus their ordered
    multiplicity, recursively (a different loop structure from the nested
    ordered loops in the implementation)."""

    def rec(start, left, prod, acc):
        if left == 0:
            yield tuple(acc)
            return
        for i in range(start, len(plist)):
            p = plist[i]
            if prod * p > U:
                break
            acc.append(p)
            yield from rec(i, left - 1, prod * p, acc)
            acc.pop()

    for tup in rec(0, r, 1, []):
        counts = Counter(tup)
        mult = math.factorial(r)
        for c in counts.values():
            mult //= math.factorial(c)
        yield tup, mult


def oracle_step1(curve, r, U, x, primes):
    bmap = dict()
    ps = primes.below(x)
    for p, b in zip(ps, beta_array(curve, x, primes)):
        bmap[int(p)] = float(b)
    plist = sorted(bmap)
    terms = []
    for tup, mult in multiset_tuples(plist, r, U):
        prod = 1.0
        for p in tup:  # ascending by construction
            prod *= bmap[p]
        terms.extend([prod] * mult)
    return fsum(terms)


def oracle_qsum(curve, r, n, U, x, primes, sign=1):
    bmap = dict()
    ps = primes.below(x)
    for p, b in zip(ps, beta_array(curve, x, primes)):
        bmap[int(p)] = float(b)
    plist = [p for p in sorted(bmap) if n % p != 0]
    terms = []
    for tup, mult in multiset_tuples(plist, r, U):
        if parity_decompose(tup).pi2 == 1:
            continue
        val = q_term(tup, n, x, sign, curve, beta_map=bmap)
        terms.extend([val] * mult)
    return fsum(terms)


class TestRankin:
    def test_linear_near_one_at_1e4(self, cm_curve, ncm_curve, primes_1e4):
        for curve in (cm_curve, ncm_curve):
            res = rankin_linear_check(curve, 1e4, primes_1e4)
            assert res.passed
            assert 0.9 <= res.ratio_or_error <= 1.1

    def test_linear_substitution_identity(self, ncm_curve, primes_1e4):
        # replacing c_{p^2} by a_p^2 - 2p at good primes reproduces the sum
        from twistrank.curve import ap_array

        x = 3000.0
        res = rankin_linear_check(ncm_curve, x, primes_1e4)
        ps = primes_1e4.below(x)
        aps = ap_array(ncm_curve, primes_1e4, x)
        terms = []
        for p, a in zip(ps, aps):
            p, a = int(p), int(a)
            c2 = a * a - 2 * p if ncm_curve.conductor % p else a * a
            terms.append(c2 * math.log(p) / p)
        assert res.computed == pytest.approx(fsum(terms), abs=1e-10)

    def test_square_band_ncm_at_1e4(self, ncm_curve, primes_1e4):
        res = rankin_square_check(ncm_curve, math.log(1e4), primes_1e4)
        assert res.passed

    def test_lambda_scaling(self, ncm_curve, primes_1e4):
        # doubling lambda roughly quadruples the square sum
        small = rankin_square_check(ncm_curve, math.log(90.0), primes_1e4)
        big = rankin_square_check(ncm_curve, 2 * math.log(90.0), primes_1e4)
        growth = big.computed / small.computed
        assert 2.5 <= growth <= 5.5

    def test_domain(self, cm_curve, primes_1e3):
        with pytest.raises(ValueError):
            rankin_linear_check(cm_curve, 100.0, primes_1e3)


class TestGaussSums:
    def test_examples(self):
        res5 = gauss_sum_check(5, 1)
        assert res5.passed and abs(res5.computed - math.sqrt(5)) < 1e-9
        res3 = gauss_sum_check(3, 1)
        assert res3.passed and abs(res3.computed - 1j * math.sqrt(3)) < 1e-9
        res1 = gauss_sum_check(1, 1)
        assert res1.passed and abs(res1.computed - 1.0) < 1e-12

    def test_character_argument(self):
        # (2|5) = -1 flips the sign
        res = gauss_sum_check(5, 2)
        assert res.passed and abs(res.computed + math.sqrt(5)) < 1e-9

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gauss_sum_check(4, 1)
        with pytest.raises(ValueError):
            gauss_sum_check(9, 1)

    def test_moderate_sweep(self):
        for q in (15, 21, 35, 105):
            for m in range(1, q):
                if gcd(m, q) != 1:
                    continue
                assert gauss_sum_check(q, m).passed


class TestJsum:
    def test_matches_enumeration(self):
        cases = [
            ((3, 3, 5), 1),
            ((3, 5, 7), 1),
            ((3, 3, 5), 2),
            ((5, 5, 3, 3, 7), 2),
            ((7, 7, 11), 7),
            ((7, 7, 11), -14),
            ((2, 2, 7), 3),
            ((3, 3, 3, 5), 2),
        ]
        for tup, m in cases:
            res = jsum_crt_check(tup, m)
            assert res.passed, (tup, m, res.ratio_or_error)

    def test_vanishing_when_modulus_divides_m(self):
        res = jsum_crt_check((3, 3, 5), 15)  # pi1 * pi2 = 15 | m
        assert res.passed
        assert abs(res.computed) <= 1e-9 * math.sqrt(15)
        assert res.reference == 0

    def test_vanishing_delta2(self):
        res = jsum_crt_check((3, 5), 5)  # delta_2 = 5 > 1
        assert res.passed
        assert abs(res.computed) <= 1e-9 * math.sqrt(15)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            jsum_crt_check((3, 3), 1)  # square product
        with pytest.raises(ValueError):
            jsum_crt_check((2, 7), 1)  # pi2 even
        with pytest.raises(ValueError):
            jsum_crt_check((3, 5), 0)

    def test_random_cases(self):
        import random

        rng = random.Random(123)
        odd = [3, 5, 7, 11, 13]
        done = 0
        while done < 40:
            tup = tuple(rng.choice(odd) for _ in range(rng.choice([2, 3, 4])))
            pd = parity_decompose(tup)
            if pd.pi2 == 1 or pd.pi1 * pd.pi2 > 10_000:
                continue
            m = rng.randint(1, 40) * rng.choice([1, -1])
            assert jsum_crt_check(tup, m).passed, (tup, m)
            done += 1


@pytest.fixture(scope="module")
def default_weight():
    return SmoothWeight(0.5, 1.0, shape="exp", l=0, x=100.0, X_k=600.0)


class TestPoisson:
    def test_identity_small(self, default_weight):
        for q, l in ((7, 0), (7, 1), (12, 1), (1, 0)):
            w = SmoothWeight(0.5, 1.0, shape="exp", l=l, x=100.0, X_k=600.0)
            trunc = poisson_required_truncation(w, l, q)
            for j in (0, 3 % q):
                res = poisson_check(w, l, q, j, trunc)
                assert res.passed, (q, l, j, res.ratio_or_error)

    def test_truncation_refusal(self, default_weight):
        with pytest.raises(PoissonTruncationError) as err:
            poisson_check(default_weight, 0, 5, 0, 3)
        assert err.value.required > 3

    def test_periodicity_in_j(self, default_weight):
        q = 9
        trunc = poisson_required_truncation(default_weight, 0, q) + q
        a = poisson_check(default_weight, 0, q, 2, trunc)
        b = poisson_check(default_weight, 0, q, 2 + q, trunc)
        assert abs(a.computed - b.computed) < 1e-9
        assert abs(a.reference - b.reference) < 1e-9

    def test_zero_frequency_dominates_for_huge_ratio(self):
        # q = 1, huge T/q: the m = 0 term carries the whole transform side
        from twistrank.kernel import weight_fourier

        w = SmoothWeight(0.5, 1.0, shape="exp", l=0, x=100.0, X_k=2000.0)
        trunc = poisson_required_truncation(w, 0, 1)
        res = poisson_check(w, 0, 1, 0, trunc)
        lead = 2000.0 * weight_fourier(w, 0.0, 0).real
        assert res.passed
        assert res.computed == pytest.approx(lead, rel=1e-3)

    def test_poly_shape(self):
        w = SmoothWeight(0.5, 1.0, shape="poly", l=0, x=100.0, X_k=600.0)
        trunc = poisson_required_truncation(w, 0, 5)
        assert poisson_check(w, 0, 5, 2, trunc).passed


class TestDecay:
    def test_gamma_positive_and_cached(self, default_weight):
        g1 = fit_weight_gamma(default_weight)
        g2 = fit_weight_gamma(default_weight)
        assert g1 == g2 > 0

    def test_decay_bound_holds(self, default_weight):
        for l in (1, 2, 3):
            res = wl_decay_check(default_weight, l, x=100.0, X_k=600.0)
            assert res.passed, (l, res.ratio_or_error)

    def test_measured_decay_rate(self, default_weight):
        # |hat(W_0)| at t = 20 is at least 4x smaller than at t = 10
        # (t^-3 predicts 8x; allow 2x slack)
        from twistrank.kernel import weight_fourier

        a = abs(weight_fourier(default_weight, 10.0, 0))
        b = abs(weight_fourier(default_weight, 20.0, 0))
        assert b <= a / 4.0


class TestQTermAndSums:
    def test_qterm_single_prime(self, ncm_curve):
        from twistrank.arith import kronecker
        from twistrank.explicit_formula import beta_p

        x = 500.0
        for p in (3, 7, 11):
            for n in (1, 2, 5):
                if n % p == 0:
                    continue
                for sign in (1, -1):
                    expect = beta_p(ncm_curve, p, x) * kronecker(sign * n, p)
                    assert q_term((p,), n, x, sign, ncm_curve) == expect

    def test_qterm_rejects_squares_and_shared_factors(self, ncm_curve):
        with pytest.raises(ValueError):
            q_term((5, 5), 1, 100.0, 1, ncm_curve)
        with pytest.raises(ValueError):
            q_term((5,), 10, 100.0, 1, ncm_curve)

    def test_qterm_vanishes_beyond_cutoff(self, ncm_curve):
        assert q_term((997,), 1, 100.0, 1, ncm_curve) == 0.0

    def test_qsum_equals_step1_at_r1_n1(self, ncm_curve, primes_1e4):
        res_q = q_sum(1, 1, 800.0, 800.0, ncm_curve, primes_1e4)
        res_s = step1_sum(1, 800.0, 800.0, ncm_curve, primes_1e4)
        assert res_q.computed == res_s.computed

    def test_qsum_oracle_agreement(self, cm_curve, ncm_curve, primes_1e4):
        for curve in (cm_curve, ncm_curve):
            for r in (1, 2):
                for n in (1, 7):
                    res = q_sum(r, n, 600.0, 600.0, curve, primes_1e4)
                    assert res.computed == oracle_qsum(curve, r, n, 600.0, 600.0, primes_1e4)

    def test_step1_oracle_agreement(self, ncm_curve, primes_1e4):
        for r in (1, 2, 3):
            res = step1_sum(r, 500.0, 500.0, ncm_curve, primes_1e4)
            assert res.computed == oracle_step1(ncm_curve, r, 500.0, 500.0, primes_1e4)

    def test_step1_transposed_loops(self, ncm_curve, primes_1e4):
        # transposing the two nested loops reproduces the r = 2 sum exactly
        bmap = {}
        for p, b in zip(primes_1e4.below(500.0), beta_array(ncm_curve, 500.0, primes_1e4)):
            bmap[int(p)] = float(b)
        plist = sorted(bmap)
        terms = []
        for q in plist:  # outer loop over the second index
            for p in plist:
                if p * q > 500.0:
                    break
                lo, hi = min(p, q), max(p, q)
                terms.append(bmap[lo] * bmap[hi])
        transposed = fsum(terms)
        res = step1_sum(2, 500.0, 500.0, ncm_curve, primes_1e4)
        assert res.computed == transposed

    def test_cost_refusal(self, ncm_curve, primes_1e4):
        with pytest.raises(ValueError):
            q_sum(4, 1, 100.0, 100.0, ncm_curve, primes_1e4)
        with pytest.raises(ValueError):
            step1_sum(4, 100.0, 100.0, ncm_curve, primes_1e4)

    def test_empty_sum(self, ncm_curve, primes_1e4):
        res = step1_sum(1, 1.5, 100.0, ncm_curve, primes_1e4)
        assert res.computed == 0.0

    def test_envelope_soft_pass_fields(self, ncm_curve, primes_1e4):
        res = q_sum(2, 1, 900.0, 900.0, ncm_curve, primes_1e4)
        assert "c_fitted" in res.parameters
        assert res.passed  # within 10x by construction of the fit


class TestLogderiv:
    def test_sigma2_real_and_small(self, cm_curve, ncm_curve, primes_1e4):
        for curve in (cm_curve, ncm_curve):
            res = logderiv_partial(curve, 2.0, 0.0, 1e4, primes_1e4)
            assert res.computed.imag == 0.0
            assert abs(res.computed) < 2.0
            assert res.passed

    def test_conjugate_symmetry(self, ncm_curve, primes_1e4):
        up = logderiv_partial(ncm_curve, 1.5, 4.0, 1e4, primes_1e4)
        dn = logderiv_partial(ncm_curve, 1.5, -4.0, 1e4, primes_1e4)
        assert up.computed == dn.computed.conjugate()

    def test_near_one_line(self, ncm_curve, primes_1e4):
        x = 1e4
        sigma = 1.0 + 1.0 / math.log(x)
        res = logderiv_partial(ncm_curve, sigma, 10.0, x, primes_1e4)
        assert res.passed

    def test_domain(self, ncm_curve, primes_1e4):
        with pytest.raises(ValueError):
            logderiv_partial(ncm_curve, 0.9, 0.0, 1e4, primes_1e4)
        with pytest.raises(ValueError):
            logderiv_partial(ncm_curve, 2.5, 0.0, 1e4, primes_1e4)


class TestSuite:
    def test_groups_filter(self, cm_curve, primes_1e4):
        res = run_suite([cm_curve], primes_1e4, x=1e4, only="gauss")
        assert res and all(r.name.startswith("gauss") for r in res)
        assert all(r.passed for r in res)

    def test_unknown_group_rejected(self, cm_curve, primes_1e4):
        with pytest.raises(ValueError):
            run_suite([cm_curve], primes_1e4, only="nonsense")

    def test_jsum_group_deterministic(self, cm_curve, primes_1e4):
        a = run_suite([cm_curve], primes_1e4, only="jsum", seed=5, jsum_cases=10)
        b = run_suite([cm_curve], primes_1e4, only="jsum", seed=5, jsum_cases=10)
        assert [r.name for r in a] == [r.name for r in b]
        assert all(r.passed for r in a)
