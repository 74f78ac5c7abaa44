"""Both sides of Weil's explicit formula for a quadratic twist.

For the twist E_D with kernel scale lambda the identity reads

    sum_rho Phi_lambda(rho) = log N_(E_D)
                              - 2 sum_{p^m} c_{p^m}(E_D) (log p)/p^m F(m log p / lambda)
                              - 2 log 2pi - 2 * (archimedean integral).

The zero side is never located; it is defined by the prime-side equality,
and under GRH every Phi_lambda(rho) is nonnegative with Phi_lambda(1) =
lambda, so total_S / lambda upper-bounds the analytic rank.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import List, Sequence, TextIO, Tuple

import numpy as np

from .arith import PrimeTable, kronecker
from .curve import CurveModel, TwistedCurve, ap, ap_array, cpm, twist_ap, twist_root_number
from .kernel import TriangleKernel, archimedean_integral, triangle

__all__ = [
    "ExplicitFormulaReport",
    "InsufficientPrimeTable",
    "prime_side",
    "ef_total",
    "rank_bound",
    "beta_p",
    "beta_array",
    "R_sum",
    "f_term",
    "twisted_upper_bound",
    "reports_to_csv",
    "reports_to_json",
    "CSV_COLUMNS",
]


class InsufficientPrimeTable(ValueError):
    """The prime table does not reach the cutoff e^lambda."""

    def __init__(self, required: int, limit: int):
        super().__init__(
            f"prime table reaches {limit} but the kernel needs all primes below {required}"
        )
        self.required = required
        self.limit = limit


@dataclass(frozen=True)
class ExplicitFormulaReport:
    """One twist's explicit-formula decomposition.

    total_S reconstructs exactly as
    log_conductor - 2*(prime_m1 + prime_m2 + prime_tail) - archimedean,
    where archimedean = 2*integral + 2*log(2pi).  root_number is 0 when the
    twist relation does not determine a sign for this D.
    """

    D: int
    lam: float
    log_conductor: float
    prime_sum_m1: float
    prime_sum_m2: float
    prime_sum_tail: float
    archimedean: float
    total_S: float
    rank_bound: float
    root_number: int
    conductor_exact: bool


CSV_COLUMNS = [
    "D",
    "lambda",
    "log_conductor",
    "conductor_exact",
    "prime_m1",
    "prime_m2",
    "prime_tail",
    "archimedean",
    "total_S",
    "rank_bound",
    "root_number",
]


def _require_table(primes: PrimeTable, lam: float) -> float:
    cutoff = math.exp(lam)
    if primes.limit + 0.5 < cutoff * (1.0 - 1e-12):
        required = math.ceil(cutoff - 1e-6 * max(1.0, cutoff))
        raise InsufficientPrimeTable(required=required, limit=primes.limit)
    return cutoff


def beta_p(curve: CurveModel, p: int, x: float) -> float:
    """beta_p = a_p (log p)/p * F(log p / log x); zero for p >= x."""
    if not x > 1.0:
        raise ValueError(f"scale x must exceed 1, got {x}")
    if p >= x:
        return 0.0
    lp = math.log(p)
    return ap(curve, p) * lp / p * triangle(lp / math.log(x))


def beta_array(curve: CurveModel, x: float, primes: PrimeTable) -> np.ndarray:
    """beta_p for all p < x as a float array aligned with primes.below(x)."""
    ps = primes.below(x)
    aps = ap_array(curve, primes, x).astype(float)
    lp = np.log(ps.astype(float))
    fv = np.maximum(0.0, 1.0 - lp / math.log(x))
    return aps * lp / ps.astype(float) * fv


def f_term(x: float, D) -> float:
    """f(x, D) = 2 log|D| + (log x)/2."""
    if D == 0:
        raise ValueError("f(x, D) is undefined at D = 0")
    if not x > 1.0:
        raise ValueError(f"scale x must exceed 1, got {x}")
    return 2.0 * math.log(abs(D)) + 0.5 * math.log(x)


def R_sum(curve: CurveModel, D: int, x: float, primes: PrimeTable) -> float:
    """R(x, D) = 2 sum_{p<x} beta_p (D|p), summed over ascending p."""
    if primes.limit + 0.5 < x * (1.0 - 1e-12):
        raise InsufficientPrimeTable(required=math.ceil(x), limit=primes.limit)
    betas = beta_array(curve, x, primes)
    ps = primes.below(x)
    terms = [betas[i] * kronecker(D, int(p)) for i, p in enumerate(ps)]
    return 2.0 * math.fsum(terms)


def _twist_cpm(twist: TwistedCurve, p: int, m: int) -> int:
    """c_{p^m}(E_D) under the model-level twisting rules.

    p coprime to 2ND: (D|p)^m c_{p^m}(E).  p = 2 with 2 coprime to N D and
    D = 1 mod 4: the twist is still good at 2 and the same rule applies with
    the fundamental-discriminant character.  Everything else is bad for the
    twist: a_p(E_D)^m with a_p from the twisted model.
    """
    E = twist.base
    D = twist.D
    if (2 * E.conductor * D) % p != 0:
        chi = kronecker(D, p)
        return chi**m * cpm(E, p, m)
    if p == 2 and (E.conductor * D) % 2 != 0 and D % 4 == 1:
        chi = kronecker(D, 2)
        return chi**m * cpm(E, 2, m)
    return twist_ap(twist, p) ** m


def prime_side(
    twist: TwistedCurve, kernel: TriangleKernel, primes: PrimeTable
) -> Tuple[float, float, float]:
    """The m = 1, m = 2 and m >= 3 partial sums of the prime side.

    Each is sum over p^m < e^lambda of c_{p^m}(E_D) (log p)/p^m *
    F(m log p / lambda), without the overall factor 2.  Terms are generated
    in ascending (p, m) order and reduced with exact compensated summation,
    so results are bit-identical across run configurations.
    """
    lam = kernel.lam
    cutoff = _require_table(primes, lam)
    E = twist.base
    D = twist.D

    ps = primes.below(cutoff)
    special = {int(p) for p in ps if (2 * E.conductor * D) % int(p) == 0}

    aps = ap_array(E, primes, cutoff)
    lp = np.log(ps.astype(float))
    fv = np.maximum(0.0, 1.0 - lp / lam)
    weights = lp / ps.astype(float) * fv

    m1_terms: List[float] = []
    for i, p_np in enumerate(ps):
        p = int(p_np)
        if p in special:
            c1 = _twist_cpm(twist, p, 1)
            m1_terms.append(c1 * float(weights[i]))
        else:
            chi = kronecker(D, p)
            if chi:
                m1_terms.append(int(aps[i]) * chi * float(weights[i]))

    m2_terms: List[float] = []
    tail_terms: List[float] = []
    for p_np in ps:
        p = int(p_np)
        if p * p >= cutoff:
            break
        lpf = math.log(p)
        m2_terms.append(_twist_cpm(twist, p, 2) * lpf / (p * p) * triangle(2.0 * lpf / lam))
        pm = p * p * p
        m = 3
        while pm < cutoff:
            tail_terms.append(_twist_cpm(twist, p, m) * lpf / pm * triangle(m * lpf / lam))
            pm *= p
            m += 1

    return math.fsum(m1_terms), math.fsum(m2_terms), math.fsum(tail_terms)


def ef_total(
    twist: TwistedCurve, kernel: TriangleKernel, primes: PrimeTable
) -> ExplicitFormulaReport:
    """Assemble the full explicit-formula report for one twist."""
    lam = kernel.lam
    m1, m2, tail = prime_side(twist, kernel, primes)
    log_n = math.log(twist.conductor_bound)
    arch = 2.0 * archimedean_integral(kernel) + 2.0 * math.log(2.0 * math.pi)
    total = log_n - 2.0 * (m1 + m2 + tail) - arch
    try:
        root = twist_root_number(twist)
    except ValueError:
        root = 0
    return ExplicitFormulaReport(
        D=twist.D,
        lam=lam,
        log_conductor=log_n,
        prime_sum_m1=m1,
        prime_sum_m2=m2,
        prime_sum_tail=tail,
        archimedean=arch,
        total_S=total,
        rank_bound=total / lam,
        root_number=root,
        conductor_exact=twist.conductor_exact,
    )


def rank_bound(report: ExplicitFormulaReport) -> float:
    """total_S / lambda: under GRH an upper bound for the analytic rank."""
    return report.total_S / report.lam


def twisted_upper_bound(report: ExplicitFormulaReport) -> float:
    """The coarser bound 2 log|D| + lambda/2 - 2*(m=1 sum): the shape with
    log(D^2) in place of the conductor and the higher powers dropped."""
    if report.D == 0:
        raise ValueError("undefined for D = 0")
    return 2.0 * math.log(abs(report.D)) + 0.5 * report.lam - 2.0 * report.prime_sum_m1


def _row_values(r: ExplicitFormulaReport) -> list:
    return [
        r.D,
        repr(r.lam),
        repr(r.log_conductor),
        "true" if r.conductor_exact else "false",
        repr(r.prime_sum_m1),
        repr(r.prime_sum_m2),
        repr(r.prime_sum_tail),
        repr(r.archimedean),
        repr(r.total_S),
        repr(r.rank_bound),
        r.root_number,
    ]


def reports_to_csv(reports: Sequence[ExplicitFormulaReport], out: TextIO) -> None:
    """Write reports as CSV with the fixed column set, floats in shortest
    round-trip form so reruns are byte-identical."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(_row_values(r))


def reports_to_json(reports: Sequence[ExplicitFormulaReport], out: TextIO) -> None:
    """JSON serialization: the CSV fields plus the derived coarse bound."""
    payload = []
    for r in reports:
        d = {
            "D": r.D,
            "lambda": r.lam,
            "log_conductor": r.log_conductor,
            "conductor_exact": r.conductor_exact,
            "prime_m1": r.prime_sum_m1,
            "prime_m2": r.prime_sum_m2,
            "prime_tail": r.prime_sum_tail,
            "archimedean": r.archimedean,
            "total_S": r.total_S,
            "rank_bound": r.rank_bound,
            "root_number": r.root_number,
            "twisted_upper_bound": twisted_upper_bound(r),
        }
        payload.append(d)
    json.dump(payload, out, indent=2)
    out.write("\n")


def csv_string(reports: Sequence[ExplicitFormulaReport]) -> str:
    buf = io.StringIO()
    reports_to_csv(reports, buf)
    return buf.getvalue()
