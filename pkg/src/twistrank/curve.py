"""Reduction data for a short Weierstrass curve and its quadratic twists.

The trace of Frobenius a_p is computed by an exhaustive quadratic-character
sum over F_p for good odd primes, by the node/cusp rule at bad primes
p > 3, and from caller-supplied metadata at p in {2, 3} where short
Weierstrass point counting degenerates.  Twisting acts on coefficients
through the Kronecker symbol, on the conductor through N * D^2, and on the
root number through the quadratic character of Q(sqrt(D)).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .arith import (
    PrimeTable,
    fundamental_discriminant,
    is_squarefree,
    kronecker,
    squarefree_part,
)

__all__ = [
    "CurveModel",
    "TwistedCurve",
    "MissingBadPrimeData",
    "ap",
    "ap_array",
    "cpm",
    "twist_ap",
    "twist_conductor_bound",
    "twist_root_number",
    "chi_quadratic",
    "load_catalog",
    "builtin_catalog",
]


class MissingBadPrimeData(ValueError):
    """a_p was requested at p in {2, 3} but the curve carries no metadata."""


@dataclass(frozen=True)
class CurveModel:
    """A fixed curve y^2 = x^3 + A x + B with caller-supplied invariants.

    conductor and root_number are metadata: the model is assumed
    quasi-minimal and the invariants are not re-derived here.  a2 and a3
    hold the L-coefficients at 2 and 3 (None if unknown).
    """

    A: int
    B: int
    conductor: int
    root_number: int
    label: str = ""
    a2: Optional[int] = None
    a3: Optional[int] = None

    def __post_init__(self) -> None:
        if 4 * self.A**3 + 27 * self.B**2 == 0:
            raise ValueError(f"singular model A={self.A}, B={self.B}")
        if self.conductor < 1:
            raise ValueError(f"conductor must be >= 1, got {self.conductor}")
        if self.root_number not in (-1, 1):
            raise ValueError(f"root number must be +-1, got {self.root_number}")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.A**3 + 27 * self.B**2)


def chi_quadratic(D: int, m: int) -> int:
    """Quadratic character of Q(sqrt(D)) at m, via the fundamental
    discriminant normalization (so the character is defined at 2)."""
    return kronecker(fundamental_discriminant(D), m)


def _ap_char_sum(A: int, B: int, p: int) -> int:
    """a_p = -sum_x (x^3+Ax+B | p) for an odd good prime, vectorized."""
    x = np.arange(p, dtype=np.int64)
    sq = (x * x) % p
    fx = ((sq + A % p) * x + B % p) % p
    chi = np.full(p, -1, dtype=np.int64)
    chi[sq] = 1
    chi[0] = 0
    return int(-chi[fx].sum())


def _ap_bad(A: int, B: int, p: int) -> int:
    """a_p at a bad prime p > 3 of the model.

    Triple root (A = B = 0 mod p) means additive reduction, a_p = 0.
    Otherwise the cubic has the double root x0 = -3B / 2A mod p and the
    reduction is multiplicative, split iff 3*x0 is a square mod p.
    """
    if A % p == 0 and B % p == 0:
        return 0
    x0 = (-3 * B * pow(2 * A, -1, p)) % p
    return 1 if kronecker(3 * x0, p) == 1 else -1


def ap(curve: CurveModel, p: int) -> int:
    """Trace of Frobenius a_p of the model.

    Good odd p: exhaustive character sum, so p + 1 - a_p = #E(F_p).
    Bad p > 3: the node/cusp rule.  p in {2, 3}: curve metadata.
    """
    if p in (2, 3):
        meta = curve.a2 if p == 2 else curve.a3
        if meta is None:
            raise MissingBadPrimeData(
                f"curve {curve.label or (curve.A, curve.B)} has no a_{p} metadata"
            )
        return meta
    if (4 * curve.A**3 + 27 * curve.B**2) % p == 0:
        return _ap_bad(curve.A, curve.B, p)
    return _ap_char_sum(curve.A, curve.B, p)


# a_p prefix arrays keyed by (curve, table limit); writes are idempotent so
# concurrent readers may race benignly.
_AP_CACHE: dict = {}
_AP_LOCK = threading.Lock()


def ap_array(curve: CurveModel, primes: PrimeTable, bound: float) -> np.ndarray:
    """a_p for every prime p < bound in the table, as int64.

    The longest prefix computed so far is cached per (curve, table limit).
    """
    ps = primes.below(bound)
    key = (curve, primes.limit)
    cached = _AP_CACHE.get(key)
    if cached is None or cached.size < ps.size:
        vals = np.empty(ps.size, dtype=np.int64)
        start = 0
        if cached is not None:
            vals[: cached.size] = cached
            start = cached.size
        for i in range(start, ps.size):
            vals[i] = ap(curve, int(ps[i]))
        vals.setflags(write=False)
        with _AP_LOCK:
            prev = _AP_CACHE.get(key)
            if prev is None or prev.size < vals.size:
                _AP_CACHE[key] = vals
        cached = vals
    return cached[: ps.size]


def cpm(curve: CurveModel, p: int, m: int) -> int:
    """Prime-power coefficient c_{p^m}.

    Good p: the power-sum recurrence c_{p^m} = a_p c_{p^(m-1)} - p c_{p^(m-2)}
    with c_p = a_p and c_{p^2} = a_p^2 - 2p.  Bad p (p | conductor): a_p^m.
    """
    if m < 1:
        raise ValueError(f"cpm needs m >= 1, got {m}")
    a = ap(curve, p)
    if curve.conductor % p == 0:
        return a**m
    if m == 1:
        return a
    prev, cur = a, a * a - 2 * p
    for _ in range(m - 2):
        prev, cur = cur, a * cur - p * prev
    return cur


@dataclass(frozen=True)
class TwistedCurve:
    """A base curve paired with a twisting integer D.

    The twisted model is y^2 = x^3 + A D^2 x + B D^3.  conductor_bound is
    exactly N * D^2 for D squarefree and coprime to 2N; otherwise it is a
    documented over-estimate (<= 2^8 * 3^5 * N * d^2 with d the squarefree
    part of D).  Note the exact branch follows the N * D^2 convention even
    though twisting a curve of odd conductor by D = 3 mod 4 also moves the
    2-part; the explicit-formula reports flag this through conductor_exact.
    """

    base: CurveModel
    D: int
    twisted_A: int = field(init=False)
    twisted_B: int = field(init=False)
    conductor_bound: int = field(init=False)
    conductor_exact: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.D == 0:
            raise ValueError("twisting integer D must be nonzero")
        object.__setattr__(self, "twisted_A", self.base.A * self.D**2)
        object.__setattr__(self, "twisted_B", self.base.B * self.D**3)
        clean = self.is_clean
        if clean:
            bound = self.base.conductor * self.D**2
        else:
            d = squarefree_part(abs(self.D))
            bound = 2**8 * 3**5 * self.base.conductor * d * d
        object.__setattr__(self, "conductor_bound", bound)
        object.__setattr__(self, "conductor_exact", clean)

    @property
    def is_clean(self) -> bool:
        """D squarefree and coprime to 2N: the regime with exact conductor."""
        return (
            is_squarefree(abs(self.D))
            and math.gcd(self.D, 2 * self.base.conductor) == 1
        )

    def _twisted_small_ap(self, p: int) -> Optional[int]:
        """Metadata a_p of the twisted model at p in {2, 3}.

        Zero when p | D (the twisted model is additive at p); otherwise
        a_p(E) * chi_D(p) with the fundamental-discriminant character, which
        is 0 exactly when the twist ramifies at p.
        """
        base_meta = self.base.a2 if p == 2 else self.base.a3
        if base_meta is None:
            return None
        if self.D % p == 0:
            return 0
        return base_meta * chi_quadratic(self.D, p)

    def as_curve_model(self) -> CurveModel:
        """The twisted equation as a CurveModel (conductor = the bound;
        root number copied from the base as a placeholder)."""
        return CurveModel(
            A=self.twisted_A,
            B=self.twisted_B,
            conductor=self.conductor_bound,
            root_number=self.base.root_number,
            label=f"{self.base.label or 'curve'}[D={self.D}]",
            a2=self._twisted_small_ap(2),
            a3=self._twisted_small_ap(3),
        )


def twist_ap(twist: TwistedCurve, p: int) -> int:
    """a_p of the twist E_D.

    For p coprime to 2 N D this is a_p(E) * (D|p); for p | D away from 2N
    the twisted model is additive and a_p = 0; every remaining p is computed
    directly on the twisted Weierstrass model.
    """
    E = twist.base
    if (2 * E.conductor * twist.D) % p != 0:
        return ap(E, p) * kronecker(twist.D, p)
    if twist.D % p == 0 and p != 2 and (2 * E.conductor) % p != 0:
        return 0
    return ap(twist.as_curve_model(), p)


def twist_conductor_bound(twist: TwistedCurve) -> int:
    """Conductor of E_D in the clean regime, an over-estimate otherwise."""
    return twist.conductor_bound


def twist_root_number(twist: TwistedCurve) -> int:
    """Root number of E_D via w(E_D) = w(E) * chi_D(-N).

    Only stated for D squarefree and coprime to 2N.  The value 0 signals
    that chi_D ramifies at a prime of N (possible when N is even and
    D = 3 mod 4), where the relation does not determine the sign.
    """
    if not twist.is_clean:
        raise ValueError(
            f"root-number relation needs D squarefree and coprime to 2N, got D={twist.D}"
        )
    return twist.base.root_number * chi_quadratic(twist.D, -twist.base.conductor)


# ---------------------------------------------------------------------------
# Curve catalog


def load_catalog(path) -> dict:
    """Parse a curve catalog file.

    One record per line: label, A, B, N_E, w(E), a_2, a_3 (comma-separated);
    '#' starts a comment.
    """
    catalog: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [f.strip() for f in line.split(",")]
        if len(parts) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
        label = parts[0]
        try:
            a, b, n, w, a2, a3 = (int(v) for v in parts[1:])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-integer field: {exc}") from exc
        if label in catalog:
            raise ValueError(f"{path}:{lineno}: duplicate label {label!r}")
        catalog[label] = CurveModel(
            A=a, B=b, conductor=n, root_number=w, label=label, a2=a2, a3=a3
        )
    return catalog


def builtin_catalog() -> dict:
    """The two shipped curves (verified against exhaustive point counts)."""
    from importlib import resources

    with resources.as_file(
        resources.files("twistrank").joinpath("data/curves.cat")
    ) as p:
        return load_catalog(p)
