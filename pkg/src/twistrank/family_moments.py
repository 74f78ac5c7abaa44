"""Weighted moment statistics of the explicit formula over a twist family.

The moment functional per twist is (total_S / lambda)^k, which by the
explicit formula equals [r_an + sum over nonzero-height zeros of sinc^2]^k.
Families are selected by a one-sided smooth weight W(D/T), optionally
restricted to squarefree D coprime to 2N (the regime where conductors are
exact and root numbers are defined).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb, fsum
from typing import Callable, Dict, List, Optional, Sequence, TextIO

from .arith import PrimeTable, is_squarefree
from .curve import CurveModel, TwistedCurve
from .explicit_formula import ExplicitFormulaReport, ef_total
from .kernel import SmoothWeight, TriangleKernel, weight_eval

__all__ = [
    "MomentConfig",
    "MomentRow",
    "MomentTable",
    "FamilyRow",
    "EmptyFamilyError",
    "X_k",
    "theoretical_moment_bound",
    "rank_density_bound",
    "lowzero_density_bound",
    "family_twist_values",
    "evaluate_reports",
    "sweep_family",
    "weighted_moment",
    "sign_partition_stats",
    "empirical_rank_tail",
    "GOLDFELD_K1",
    "HEATH_BROWN_K1",
    "RANK_DENSITY_BASE",
    "LOWZERO_DENSITY_BASE",
    "SINC_HALF_SQUARED",
]

# Reference constants for the k = 1 comparisons and the density bounds.
GOLDFELD_K1 = 3.25
HEATH_BROWN_K1 = 1.5
RANK_DENSITY_BASE = 1.44467
LOWZERO_DENSITY_BASE = 1.402408
SINC_HALF_SQUARED = 0.9193953884  # (sin(1/2) / (1/2))^2


class EmptyFamilyError(ValueError):
    """No twist survives the weight support and the filters."""


def X_k(x: float, k: int) -> float:
    """Family scale x^(k/2) * (log x)^(2k+2)."""
    if not x > 1.0:
        raise ValueError(f"x must exceed 1, got {x}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return x ** (k / 2.0) * math.log(x) ** (2 * k + 2)


def theoretical_moment_bound(k: int) -> float:
    """(1/2) * [(k + 1/2 + 3^(-1/2))^k + (k + 1/2 - 3^(-1/2))^k].

    Evaluated through the even-power binomial expansion
    sum_j C(k, 2j) (k + 1/2)^(k-2j) / 3^j, which involves only rational
    powers of 3 and so returns exactly 1.5 at k = 1.
    """
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    c = k + 0.5
    return fsum(comb(k, 2 * j) * c ** (k - 2 * j) / 3**j for j in range(k // 2 + 1))


def rank_density_bound(R: float) -> float:
    """Density bound (1/2) * 1.44467^(-R) for twists of rank at least R."""
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    return 0.5 * RANK_DENSITY_BASE ** (-R)


def lowzero_density_bound(k: int) -> float:
    """Density bound 1.402408^(-k) for families with 3k-th zero very low."""
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return LOWZERO_DENSITY_BASE ** (-k)


@dataclass(frozen=True)
class MomentConfig:
    """Parameters of one family sweep.

    T defaults to X_k(x, k).  A sign filter requires the squarefree and
    coprimality filters since the root number is only defined there.
    """

    curve: CurveModel
    k: int
    x: float
    weight: SmoothWeight
    T: Optional[float] = None
    squarefree_only: bool = True
    coprime_to_2N: bool = True
    sign: str = "any"  # any | plus | minus

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not self.x > math.e:
            raise ValueError(f"x must exceed e, got {self.x}")
        if self.sign not in ("any", "plus", "minus"):
            raise ValueError(f"sign must be any/plus/minus, got {self.sign!r}")
        if self.sign != "any" and not (self.squarefree_only and self.coprime_to_2N):
            raise ValueError(
                "sign filters need squarefree_only and coprime_to_2N "
                "(root numbers are defined only there)"
            )
        if self.T is None:
            object.__setattr__(self, "T", X_k(self.x, self.k))
        if not self.T >= 1.0:
            raise ValueError(f"family scale T must be >= 1, got {self.T}")

    @property
    def lam(self) -> float:
        return math.log(self.x)

    def filter_flags(self) -> str:
        parts = []
        if self.squarefree_only:
            parts.append("squarefree")
        if self.coprime_to_2N:
            parts.append("coprime")
        parts.append(f"sign={self.sign}")
        return "+".join(parts)


@dataclass(frozen=True)
class FamilyRow:
    D: int
    weight: float
    report: ExplicitFormulaReport


def family_twist_values(config: MomentConfig) -> List[int]:
    """All D != 0 inside the weight support that pass the filters,
    ascending.  Sign filtering happens later, once root numbers exist."""
    lo = config.T * config.weight.support_lo
    hi = config.T * config.weight.support_hi
    first = math.floor(lo) + 1
    last = math.ceil(hi) - 1
    out = []
    n2 = 2 * config.curve.conductor
    for D in range(first, last + 1):
        if D == 0:
            continue
        if weight_eval(config.weight, D / config.T) <= 0.0:
            continue
        if config.squarefree_only and not is_squarefree(abs(D)):
            continue
        if config.coprime_to_2N and math.gcd(D, n2) != 1:
            continue
        out.append(D)
    return out


def _eval_d(curve: CurveModel, D: int, lam: float, primes: PrimeTable) -> ExplicitFormulaReport:
    return ef_total(TwistedCurve(curve, D), TriangleKernel(lam), primes)


# Per-process state for the worker pool; set once by the initializer.
_POOL_STATE: Dict[str, object] = {}


def _pool_init(curve: CurveModel, lam: float, primes: PrimeTable) -> None:
    _POOL_STATE["curve"] = curve
    _POOL_STATE["lam"] = lam
    _POOL_STATE["primes"] = primes


def _pool_chunk(ds: List[int]) -> List[ExplicitFormulaReport]:
    curve = _POOL_STATE["curve"]
    lam = _POOL_STATE["lam"]
    primes = _POOL_STATE["primes"]
    return [_eval_d(curve, D, lam, primes) for D in ds]


def evaluate_reports(
    curve: CurveModel,
    ds: Sequence[int],
    lam: float,
    primes: PrimeTable,
    threads: int = 1,
) -> List[ExplicitFormulaReport]:
    """Explicit-formula reports for a list of twists, optionally on a
    process pool.  Per-twist arithmetic is identical for any thread count
    and results come back in the input order, so the output is
    thread-count-invariant."""
    ds = list(ds)
    if threads <= 1 or len(ds) < 8:
        return [_eval_d(curve, D, lam, primes) for D in ds]
    chunk = max(16, len(ds) // (4 * threads))
    chunks = [ds[i : i + chunk] for i in range(0, len(ds), chunk)]
    with ProcessPoolExecutor(
        max_workers=threads,
        initializer=_pool_init,
        initargs=(curve, lam, primes),
    ) as pool:
        parts = list(pool.map(_pool_chunk, chunks))
    return [r for part in parts for r in part]


def sweep_family(
    config: MomentConfig,
    primes: PrimeTable,
    threads: int = 1,
    weight_fn: Optional[Callable[[float], float]] = None,
) -> List[FamilyRow]:
    """Evaluate the explicit formula on every family member.

    The merge is keyed by ascending D, so output does not depend on the
    thread count.  weight_fn overrides the weight evaluation (used by
    scaling tests).
    """
    ds = family_twist_values(config)
    if weight_fn is None:
        weight_fn = lambda t: weight_eval(config.weight, t)
    reports = evaluate_reports(config.curve, ds, config.lam, primes, threads=threads)
    rows = []
    for D, rep in zip(ds, reports):
        if config.sign == "plus" and rep.root_number != 1:
            continue
        if config.sign == "minus" and rep.root_number != -1:
            continue
        rows.append(FamilyRow(D=D, weight=float(weight_fn(D / config.T)), report=rep))
    return rows


@dataclass(frozen=True)
class MomentRow:
    k: int
    x: float
    T: float
    filter_flags: str
    weighted_count: float
    family_size: int
    empirical_moment: float
    theoretical_bound: float

    @property
    def ratio(self) -> float:
        return self.empirical_moment / self.theoretical_bound


@dataclass
class MomentTable:
    rows: List[MomentRow] = field(default_factory=list)

    CSV_COLUMNS = [
        "k",
        "x",
        "T",
        "filter_flags",
        "weighted_count",
        "family_size",
        "empirical_moment",
        "theoretical_bound",
        "ratio",
    ]

    def to_csv(self, out: TextIO) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r.k,
                    repr(r.x),
                    repr(r.T),
                    r.filter_flags,
                    repr(r.weighted_count),
                    r.family_size,
                    repr(r.empirical_moment),
                    repr(r.theoretical_bound),
                    repr(r.ratio),
                ]
            )

    def to_json(self, out: TextIO) -> None:
        payload = [
            {
                "k": r.k,
                "x": r.x,
                "T": r.T,
                "filter_flags": r.filter_flags,
                "weighted_count": r.weighted_count,
                "family_size": r.family_size,
                "empirical_moment": r.empirical_moment,
                "theoretical_bound": r.theoretical_bound,
                "ratio": r.ratio,
            }
            for r in self.rows
        ]
        json.dump(payload, out, indent=2)
        out.write("\n")


def _moment_from_rows(config: MomentConfig, rows: Sequence[FamilyRow]) -> MomentRow:
    if not rows:
        raise EmptyFamilyError(
            f"no twist passes the filters for T={config.T}, support "
            f"({config.weight.support_lo}, {config.weight.support_hi})"
        )
    wsum = fsum(r.weight for r in rows)
    msum = fsum(r.report.rank_bound ** config.k * r.weight for r in rows)
    return MomentRow(
        k=config.k,
        x=config.x,
        T=float(config.T),
        filter_flags=config.filter_flags(),
        weighted_count=wsum,
        family_size=len(rows),
        empirical_moment=msum / wsum,
        theoretical_bound=theoretical_moment_bound(config.k),
    )


def weighted_moment(
    config: MomentConfig,
    primes: PrimeTable,
    threads: int = 1,
    rows: Optional[Sequence[FamilyRow]] = None,
) -> MomentTable:
    """Empirical weighted k-th moment of total_S/lambda over the family.

    Precomputed family rows may be passed to share one sweep across several
    statistics; otherwise the sweep runs here.
    """
    if rows is None:
        rows = sweep_family(config, primes, threads=threads)
    return MomentTable(rows=[_moment_from_rows(config, rows)])


def sign_partition_stats(
    config: MomentConfig,
    primes: PrimeTable,
    threads: int = 1,
    rows: Optional[Sequence[FamilyRow]] = None,
) -> dict:
    """Per-root-number averages of the rank bound plus the Markov-type
    fraction estimators.

    Writing A+ for the average bound over even twists, ranks there are even,
    so sum r >= 2 * (count with r >= 2) and the rank-0 fraction is at least
    1 - A+/2.  Over odd twists ranks are odd, sum (r - 1) >= 2 * (count with
    r >= 3), so the rank-1 fraction is at least (3 - A-)/2.  Both estimators
    are conservative because the rank bound majorizes the rank under GRH.
    """
    if not (config.squarefree_only and config.coprime_to_2N):
        raise ValueError("sign partition needs squarefree and coprime filters")
    if rows is None:
        rows = sweep_family(config, primes, threads=threads)
    if not rows:
        raise EmptyFamilyError("empty family")
    out: dict = {
        "family_size": len(rows),
        "weighted_count": fsum(r.weight for r in rows),
        "derivation": (
            "rank0_fraction_lb = 1 - avg/2 (even ranks, Markov at 2); "
            "rank1_fraction_lb = (3 - avg)/2 (odd ranks, Markov at 3)"
        ),
    }
    for name, sign in (("plus", 1), ("minus", -1), ("undefined", 0)):
        sel = [r for r in rows if r.report.root_number == sign]
        wsum = fsum(r.weight for r in sel)
        rec = {
            "family_size": len(sel),
            "weighted_count": wsum,
            "avg_rank_bound": (
                fsum(r.weight * r.report.rank_bound for r in sel) / wsum if sel else None
            ),
        }
        if sel and sign == 1:
            rec["rank0_fraction_lb"] = max(0.0, 1.0 - rec["avg_rank_bound"] / 2.0)
        if sel and sign == -1:
            rec["rank1_fraction_lb"] = max(0.0, (3.0 - rec["avg_rank_bound"]) / 2.0)
        out[name] = rec
    return out


def empirical_rank_tail(
    config: MomentConfig,
    R: float,
    primes: PrimeTable,
    threads: int = 1,
    rows: Optional[Sequence[FamilyRow]] = None,
) -> float:
    """Weighted fraction of the family with rank_bound >= R."""
    if rows is None:
        rows = sweep_family(config, primes, threads=threads)
    if not rows:
        raise EmptyFamilyError("empty family")
    wsum = fsum(r.weight for r in rows)
    tail = fsum(r.weight for r in rows if r.report.rank_bound >= R)
    return tail / wsum
