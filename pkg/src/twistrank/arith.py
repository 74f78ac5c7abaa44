"""Exact integer arithmetic underpinning every prime sum in the toolkit.

Everything here is pure and deterministic: a segmented Eratosthenes sieve,
the full Kronecker symbol, Mobius/squarefree helpers, and the
exponent-parity split of a product of primes into a coprime pair
(pi1, pi2) where pi2 collects the primes of odd exponent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PrimeTable",
    "ParityDecomposition",
    "sieve_primes",
    "kronecker",
    "mobius",
    "squarefree_part",
    "is_squarefree",
    "euler_phi",
    "parity_decompose",
    "is_prime",
    "fundamental_discriminant",
]

# Witness set makes Miller-Rabin deterministic for n < 3.3e24, far past the
# <= 1e12 inputs this package handles.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit in ascending order.

    Immutable after construction; safe to share read-only across workers.
    """

    limit: int
    primes: np.ndarray

    def __post_init__(self) -> None:
        self.primes.setflags(write=False)

    def __len__(self) -> int:
        return int(self.primes.size)

    def below(self, bound: float) -> np.ndarray:
        """Primes p < bound as a read-only view."""
        idx = int(np.searchsorted(self.primes, bound, side="left"))
        # searchsorted 'left' keeps p == bound out only if bound is integral;
        # the strict inequality is enforced explicitly.
        while idx > 0 and self.primes[idx - 1] >= bound:
            idx -= 1
        return self.primes[:idx]


def _dense_sieve(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def sieve_primes(limit: int, segment_size: int = 1 << 20) -> PrimeTable:
    """Segmented sieve of Eratosthenes up to ``limit`` inclusive.

    Segments keep peak memory at O(segment_size) booleans plus the base
    primes up to sqrt(limit), so limits up to 1e8 stay modest.

    Raises ValueError for limit < 2 (empty domain).
    """
    if limit < 2:
        raise ValueError(f"prime sieve needs limit >= 2, got {limit}")
    if segment_size < 16:
        raise ValueError("segment_size must be at least 16")
    base_limit = max(math.isqrt(limit), 2)
    base = _dense_sieve(base_limit)
    if limit <= base_limit:
        pieces = [base[base <= limit]]
    else:
        pieces = [base]
        lo = base_limit + 1
        while lo <= limit:
            hi = min(lo + segment_size, limit + 1)
            mask = np.ones(hi - lo, dtype=bool)
            for p in base:
                p = int(p)
                start = max(p * p, ((lo + p - 1) // p) * p)
                if start < hi:
                    mask[start - lo :: p] = False
            pieces.append(np.flatnonzero(mask).astype(np.int64) + lo)
            lo = hi
    return PrimeTable(limit=limit, primes=np.concatenate(pieces))


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integer pairs.

    Agrees with the Jacobi symbol for odd positive n and with the Legendre
    symbol for odd prime n; completely multiplicative in both arguments.
    Conventions: (a|0) = 1 iff a = +-1; (a|-1) = -1 iff a < 0;
    (a|2) = 0 for even a, else +1 for a = +-1 mod 8 and -1 for a = +-3 mod 8.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        acc = -1 if a < 0 else 1
        n = -n
    else:
        acc = 1
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if twos % 2 == 1 and a % 8 in (3, 5):
            acc = -acc
    # Jacobi loop on odd positive n via quadratic reciprocity.
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                acc = -acc
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            acc = -acc
        a %= n
    return acc if n == 1 else 0


def _factor_trial(n: int):
    """Yield (prime, exponent) pairs by trial division; n <= ~1e12."""
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            yield p, e
    d = 5
    step = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            yield d, e
        d += step
        step = 6 - step  # alternate +2, +4 over 6k+-1
    if n > 1:
        yield n, 1


def mobius(n: int) -> int:
    """Mobius function: 0 on square factors, else (-1)^(number of primes)."""
    if n < 1:
        raise ValueError(f"mobius needs n >= 1, got {n}")
    if n == 1:
        return 1
    k = 0
    for _, e in _factor_trial(n):
        if e > 1:
            return 0
        k += 1
    return -1 if k % 2 else 1


def squarefree_part(n: int) -> int:
    """Product of the primes dividing n to an odd power.

    n / squarefree_part(n) is always a perfect square.
    """
    if n < 1:
        raise ValueError(f"squarefree_part needs n >= 1, got {n}")
    out = 1
    for p, e in _factor_trial(n):
        if e % 2:
            out *= p
    return out


def is_squarefree(n: int) -> bool:
    if n < 1:
        raise ValueError(f"is_squarefree needs n >= 1, got {n}")
    return mobius(n) != 0


def euler_phi(n: int) -> int:
    """Euler totient by trial-division factorization."""
    if n < 1:
        raise ValueError(f"euler_phi needs n >= 1, got {n}")
    out = n
    for p, _ in _factor_trial(n):
        out = out // p * (p - 1)
    return out


@dataclass(frozen=True)
class ParityDecomposition:
    """Split of a product of primes pi by exponent parity.

    pi1 carries the primes of even exponent, pi2 those of odd exponent, so
    gcd(pi1, pi2) = 1, pi2 is the squarefree part of pi, and pi2 = 1 exactly
    when pi is a perfect square.
    """

    pi: int
    pi1: int
    pi2: int


def parity_decompose(tuple_primes: Sequence[int]) -> ParityDecomposition:
    """Exponent-parity decomposition of a nonempty tuple of primes."""
    if not tuple_primes:
        raise ValueError("parity_decompose needs a nonempty tuple of primes")
    counts = Counter()
    pi = 1
    for p in tuple_primes:
        p = int(p)
        if not is_prime(p):
            raise ValueError(f"parity_decompose got non-prime entry {p}")
        counts[p] += 1
        pi *= p
    pi1 = 1
    pi2 = 1
    for p, e in counts.items():
        if e % 2 == 0:
            pi1 *= p
        else:
            pi2 *= p
    return ParityDecomposition(pi=pi, pi1=pi1, pi2=pi2)


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)): the squarefree kernel d0, or 4*d0.

    d0 = sign(d) * squarefree_part(|d|); the result is d0 when d0 = 1 mod 4
    and 4*d0 otherwise. For square d the kernel is 1 (the trivial field).
    """
    if d == 0:
        raise ValueError("no discriminant for d = 0")
    d0 = squarefree_part(abs(d))
    if d < 0:
        d0 = -d0
    return d0 if d0 % 4 == 1 else 4 * d0
