"""Smoothness testing, bounded trial division, twin-smooth sieving, primality."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

SEGMENT_SIZE = 1 << 20

# Deterministic Miller-Rabin witnesses for n < 3.3e24, which covers 64 bits.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_ROUNDS = 64


class InvalidBoundError(ValueError):
    pass


class EmptyRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SmoothnessBound:
    B: int
    primes: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.primes)

    @property
    def q_t(self) -> int:
        return self.primes[-1]

    @cached_property
    def primorial(self) -> int:
        return math.prod(self.primes)

    def __repr__(self) -> str:
        return f"SmoothnessBound(B={self.B}, t={self.t})"


@dataclass(frozen=True)
class Factorization:
    factors: tuple[tuple[int, int], ...]
    cofactor: int = 1

    @property
    def value(self) -> int:
        v = self.cofactor
        for p, e in self.factors:
            v *= p ** e
        return v

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    @property
    def largest_prime(self) -> int:
        return self.factors[-1][0] if self.factors else 1

    def as_lists(self) -> list[list[int]]:
        return [[p, e] for p, e in self.factors]


def _eratosthenes(limit: int) -> list[int]:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


@lru_cache(maxsize=32)
def primes_up_to(B: int) -> SmoothnessBound:
    """All primes <= B, ascending."""
    if not isinstance(B, int) or B < 2:
        raise InvalidBoundError(f"smoothness bound must be an integer >= 2, got {B!r}")
    return SmoothnessBound(B, tuple(_eratosthenes(B)))


def factor_with_bound(n: int, bound: SmoothnessBound) -> Factorization:
    """Trial-divide n by the primes of `bound`; whatever is left is the cofactor."""
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    factors = []
    for p in bound.primes:
        if n == 1:
            break
        if p * p > n:
            # n is 1 or a prime at this point
            if n <= bound.B:
                factors.append((n, 1))
                n = 1
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
    return Factorization(tuple(factors), n)


def is_b_smooth(n: int, bound: SmoothnessBound) -> bool:
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    # Strip smooth primes with gcds against the primorial instead of trial division.
    g = math.gcd(n, bound.primorial)
    while g > 1:
        n //= g
        g = math.gcd(n, g)
    return n == 1


def smooth_part(n: int, bound: SmoothnessBound) -> int:
    m = n
    g = math.gcd(m, bound.primorial)
    while g > 1:
        m //= g
        g = math.gcd(m, g)
    return n // m


def _smooth_mask(lo: int, hi: int, bound: SmoothnessBound) -> np.ndarray:
    """Boolean mask over lo..hi (inclusive) marking the B-smooth integers.

    Each prime power p^k dividing an integer adds log2(p) to its slot.  A
    smooth integer collects exactly log2(n); anything else misses at least
    log2(q) >= 1 bit for some prime q > B, so a half-bit threshold separates
    the two cases with plenty of room for rounding.
    """
    size = hi - lo + 1
    acc = np.zeros(size, dtype=np.float64)
    for p in bound.primes:
        if p > hi:
            break
        logp = math.log2(p)
        pk = p
        while pk <= hi:
            start = (-lo) % pk
            if start < size:
                acc[start::pk] += logp
            pk *= p
    target = np.log2(np.arange(size, dtype=np.float64) + float(lo))
    return acc > target - 0.5


def sieve_twin_smooth(lo: int, hi: int, bound: SmoothnessBound,
                      segment_size: int = SEGMENT_SIZE) -> list[int]:
    """Every m in [lo, hi] with m and m + 1 both B-smooth, ascending."""
    if lo > hi:
        raise EmptyRangeError(f"empty range [{lo}, {hi}]")
    if lo < 1:
        raise ValueError("sieve range must start at 1 or above")
    out = []
    seg_lo = lo
    while seg_lo <= hi:
        seg_hi = min(seg_lo + segment_size - 1, hi)
        mask = _smooth_mask(seg_lo, seg_hi + 1, bound)
        hits = np.flatnonzero(mask[:-1] & mask[1:])
        for i in hits.tolist():
            m = seg_lo + i
            # exact confirmation; the log sieve only nominates
            if is_b_smooth(m * (m + 1), bound):
                out.append(m)
        seg_lo = seg_hi + 1
    return out


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


_SMALL_PRIMES = _eratosthenes(1000)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 2**64, 64 pseudo-random rounds above."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        return all(_mr_round(n, d, s, a) for a in _MR_WITNESSES)
    rng = random.Random(n)
    return all(_mr_round(n, d, s, rng.randrange(2, n - 1)) for _ in range(_MR_ROUNDS))
