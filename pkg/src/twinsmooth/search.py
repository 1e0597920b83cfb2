"""Search strategies for twin smooth pairs in a target bit range.

high_order_search  -- sieve small twin pairs w and map them to m_n(w) for n >= s
smallest_coefficient_search -- solve the Pell equations with the smallest deltas
small_primes_search -- solve equations whose delta has exactly k prime factors
lift_solutions     -- check later solutions of a fundamental pair via v_n(m_1)
chm_expand         -- Conrey-Holmstrom-McLaughlin closure of a seed set
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

from .arith import (Factorization, SmoothnessBound, factor_with_bound, is_b_smooth,
                    is_probable_prime, sieve_twin_smooth)
from .lehmer import CoefficientTriple, enumerate_q_prime, index_bound, index_of, triple_from_pair
from .pell import fundamental_solution
from .poly import NoCandidatesError, evaluate, m_n_from_m1, max_m1_bits, v_coeffs

log = logging.getLogger(__name__)

STRATEGIES = ("high-order", "small-coefficient", "small-primes", "lift", "chm", "enumeration", "sieve")


class InvalidSeedError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    bound: SmoothnessBound
    b_min: int = 2
    b_max: int = 256
    s: int = 2
    x_cap: int | None = None
    delta_max: int | None = None
    k: int | None = None
    delta_lo: int | None = None
    delta_hi: int | None = None
    n_lift_max: int = 12
    powers_of_two_only: bool = False

    def __post_init__(self):
        if not 2 <= self.b_min <= self.b_max:
            raise ValueError(f"need 2 <= b_min <= b_max, got {self.b_min}, {self.b_max}")
        if self.s < 2:
            raise ValueError("minimal solution index s must be >= 2")
        if self.x_cap is None:
            object.__setattr__(self, "x_cap", (1 << (self.b_max + 1)) + 1)

    @property
    def m_max(self) -> int:
        return 1 << self.b_max


@dataclass(frozen=True)
class TwinRecord:
    m: int
    bits: int
    smoothness: int
    delta: int
    x: int
    y: int
    n: int
    strategy: str
    sum_prime: bool
    under_range: bool
    m_factors: Factorization
    m1_factors: Factorization


def make_record(m: int, bound: SmoothnessBound, strategy: str, b_min: int = 2,
                triple: CoefficientTriple | None = None) -> TwinRecord:
    """Build a fully annotated record; missing provenance is recomputed from m."""
    fm, fm1 = factor_with_bound(m, bound), factor_with_bound(m + 1, bound)
    if not (fm.complete and fm1.complete):
        raise ValueError(f"({m}, {m + 1}) is not {bound.B}-smooth")
    if triple is None:
        triple = triple_from_pair(m, bound)
    n = triple.n if triple.n is not None else index_of(triple)
    return TwinRecord(
        m=m,
        bits=m.bit_length(),
        smoothness=max(fm.largest_prime, fm1.largest_prime),
        delta=triple.delta,
        x=triple.x,
        y=triple.y,
        n=n,
        strategy=strategy,
        sum_prime=is_probable_prime(2 * m + 1),
        under_range=m < (1 << b_min),
        m_factors=fm,
        m1_factors=fm1,
    )


def _lift_indices(cfg: SearchConfig) -> range | list[int]:
    top = min(cfg.n_lift_max, index_bound(cfg.bound))
    if cfg.powers_of_two_only:
        return [1 << k for k in range(1, top.bit_length()) if 1 << k <= top]
    return range(2, top + 1)


def lift_solutions(rec: TwinRecord, cfg: SearchConfig) -> Iterator[TwinRecord]:
    """Later solutions of rec's Pell equation that are still twin B-smooth."""
    if rec.n != 1:
        raise ValueError("lifting starts from a fundamental record")
    m1 = rec.m
    for n in _lift_indices(cfg):
        if 4 ** (n - 1) * m1 ** n >= cfg.m_max:
            # m_n > 4^(n-1) m_1^n: this and every later index is out of range
            break
        U = evaluate(v_coeffs(n), m1)
        if not is_b_smooth(U, cfg.bound):
            continue
        mn = m_n_from_m1(m1, n)
        if mn > cfg.m_max:
            continue
        t = CoefficientTriple(rec.delta, 2 * mn + 1, rec.y * U, n)
        yield make_record(mn, cfg.bound, "lift", cfg.b_min, t)


def process_delta(delta: int, cfg: SearchConfig, strategy: str = "small-coefficient",
                  lift: bool = True) -> list[TwinRecord]:
    """Solve x^2 - 2 delta y^2 = 1 under the cap; emit the fundamental pair and its lifts."""
    fund = fundamental_solution(2 * delta, cfg.x_cap)
    if fund is None:
        return []
    if not (is_b_smooth(fund.y, cfg.bound) and is_b_smooth(delta, cfg.bound)):
        return []
    m1 = (fund.x - 1) // 2
    out = []
    if m1 <= cfg.m_max:
        rec = make_record(m1, cfg.bound, strategy, cfg.b_min,
                          CoefficientTriple(delta, fund.x, fund.y, 1))
        out.append(rec)
        if lift:
            out.extend(lift_solutions(rec, cfg))
    return out


def smallest_coefficient_search(cfg: SearchConfig) -> Iterator[TwinRecord]:
    if cfg.delta_max is None:
        raise ValueError("smallest-coefficient search needs delta_max")
    for delta in enumerate_q_prime(cfg.bound, cfg.delta_max):
        yield from process_delta(delta, cfg, "small-coefficient")


def small_prime_deltas(bound: SmoothnessBound, k: int, lo: int, hi: int) -> Iterator[int]:
    """Products of exactly k distinct primes <= B inside [lo, hi], in
    lexicographic order of the prime index tuples."""
    primes = bound.primes
    t = len(primes)
    if k < 1 or k > t or lo > hi:
        return
    # largest product of r primes still available, for pruning from below
    top = [1] * (k + 1)
    for r in range(1, k + 1):
        top[r] = top[r - 1] * primes[t - r]

    def rec(start: int, r: int, prod: int) -> Iterator[int]:
        if r == 0:
            if lo <= prod and prod != 2:
                yield prod
            return
        for i in range(start, t - r + 1):
            p = primes[i]
            low = prod
            for j in range(r):
                low *= primes[i + j]
            if low > hi:
                break
            if prod * p * top[r - 1] < lo:
                continue
            yield from rec(i + 1, r - 1, prod * p)

    yield from rec(0, k, 1)


def small_primes_search(cfg: SearchConfig) -> Iterator[TwinRecord]:
    if cfg.k is None or cfg.delta_lo is None or cfg.delta_hi is None:
        raise ValueError("small-primes search needs k, delta_lo and delta_hi")
    count = 0
    for delta in small_prime_deltas(cfg.bound, cfg.k, cfg.delta_lo, cfg.delta_hi):
        count += 1
        yield from process_delta(delta, cfg, "small-primes")
    if count == 0:
        log.warning("no %d-prime deltas in [%d, %d]", cfg.k, cfg.delta_lo, cfg.delta_hi)
    log.info("small-primes search tried %d deltas", count)


def high_order_limit(bound: SmoothnessBound) -> int:
    return (bound.B + 1) // 2


def high_order_candidate(w: int, n: int, cfg: SearchConfig) -> TwinRecord | None:
    """The inner test of the high-order search for one twin pair (w, w + 1).

    If w is the k-th solution of its equation, m_n(w) is the (k n)-th.
    """
    U = evaluate(v_coeffs(n), w)
    if not is_b_smooth(U, cfg.bound):
        return None
    mn = m_n_from_m1(w, n)
    if mn > cfg.m_max:
        return None
    tw = triple_from_pair(w, cfg.bound)
    k = index_of(tw)
    t = CoefficientTriple(tw.delta, 2 * mn + 1, tw.y * U, k * n)
    return make_record(mn, cfg.bound, "high-order", cfg.b_min, t)


def high_order_segment(n: int, lo: int, hi: int, cfg: SearchConfig) -> list[TwinRecord]:
    out = []
    for w in sieve_twin_smooth(lo, hi, cfg.bound):
        rec = high_order_candidate(w, n, cfg)
        if rec is not None:
            out.append(rec)
    return out


def high_order_plan(cfg: SearchConfig) -> list[tuple[int, int]]:
    """(n, w_max) for every index the high-order search visits."""
    plan = []
    for n in range(cfg.s, high_order_limit(cfg.bound) + 1):
        try:
            T = max_m1_bits(cfg.b_max, n)
        except NoCandidatesError:
            log.info("n=%d: no candidates below %d bits", n, cfg.b_max)
            continue
        plan.append((n, (1 << T) - 1))
    return plan


def dedupe(records: Iterable[TwinRecord], seen: set[int] | None = None) -> Iterator[TwinRecord]:
    """First writer wins; later records for the same m are logged and dropped."""
    seen = set() if seen is None else seen
    for rec in records:
        if rec.m in seen:
            log.debug("duplicate m=%d from %s (n=%d)", rec.m, rec.strategy, rec.n)
            continue
        seen.add(rec.m)
        yield rec


def high_order_search(cfg: SearchConfig) -> Iterator[TwinRecord]:
    def raw():
        for n, w_max in high_order_plan(cfg):
            yield from high_order_segment(n, 1, w_max, cfg)

    yield from dedupe(raw())


def chm_round(S: set[int], frontier: set[int]) -> set[int]:
    """New mu = m (M + 1) / (M - m) over pairs m < M with at least one member in frontier."""
    new = set()
    if not frontier:
        return new
    ordered = sorted(S)
    for M in ordered:
        for m in ordered:
            if m >= M:
                break
            if m not in frontier and M not in frontier:
                continue
            num, den = m * (M + 1), M - m
            if num % den == 0:
                mu = num // den
                if mu not in S:
                    new.add(mu)
    return new


def chm_expand(seeds: Iterable[int], bound: SmoothnessBound, max_rounds: int = 10) -> set[int]:
    S = set(seeds)
    for m in S:
        if m < 1 or not is_b_smooth(m * (m + 1), bound):
            raise InvalidSeedError(f"seed {m} is not a twin {bound.B}-smooth pair")
    frontier = set(S)
    for rnd in range(max_rounds):
        new = chm_round(S, frontier)
        log.info("chm round %d: %d new", rnd + 1, len(new))
        if not new:
            break
        S |= new
        frontier = new
    return S


def default_chm_seeds(bound: SmoothnessBound) -> list[int]:
    """{m < B : (m, m + 1) twin B-smooth}."""
    if bound.B <= 2:
        return []
    return sieve_twin_smooth(1, bound.B - 1, bound)
