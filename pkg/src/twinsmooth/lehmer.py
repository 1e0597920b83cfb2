"""Lehmer's correspondence between twin smooth pairs and Pell equations
x^2 - 2 Delta y^2 = 1, and complete enumeration for small bounds."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterator

from .arith import Factorization, SmoothnessBound, factor_with_bound, is_b_smooth
from .pell import fundamental_solution, solution_index
from .poly import evaluate, m_n_from_m1, v_coeffs

log = logging.getLogger(__name__)


class InvalidTripleError(ValueError):
    pass


class NotTwinSmoothError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientTriple:
    delta: int
    x: int
    y: int
    n: int | None = None  # solution index, when known

    @property
    def m(self) -> int:
        return (self.x - 1) // 2


@dataclass(frozen=True)
class TwinPair:
    m: int
    B: int
    m_factors: Factorization
    m1_factors: Factorization


def index_bound(bound: SmoothnessBound) -> int:
    """Lehmer's bound on the solution index: max(3, (q_t + 1) / 2)."""
    return max(3, (bound.q_t + 1) // 2)


def check_triple(t: CoefficientTriple, bound: SmoothnessBound) -> None:
    if t.delta < 1 or t.x < 1 or t.y < 1:
        raise InvalidTripleError(f"triple entries must be positive: {t}")
    if t.x * t.x - 2 * t.delta * t.y * t.y != 1:
        raise InvalidTripleError(f"x^2 - 2*delta*y^2 != 1 for {t}")
    if t.delta == 2:
        raise InvalidTripleError("delta = 2 is excluded")
    fd = factor_with_bound(t.delta, bound)
    if not fd.complete or any(e > 1 for _, e in fd.factors):
        raise InvalidTripleError(f"delta = {t.delta} is not squarefree and {bound.B}-smooth")
    if not is_b_smooth(t.y, bound):
        raise InvalidTripleError(f"y = {t.y} is not {bound.B}-smooth")
    if t.x % 2 == 0 or t.y % 2:
        raise InvalidTripleError(f"x must be odd and y even: {t}")


def pair_from_triple(t: CoefficientTriple, bound: SmoothnessBound) -> TwinPair:
    check_triple(t, bound)
    m = (t.x - 1) // 2
    return TwinPair(m, bound.B, factor_with_bound(m, bound), factor_with_bound(m + 1, bound))


def squarefree_split(n_factors: dict[int, int]) -> tuple[int, int]:
    """(product of primes with odd exponent, square root of the rest)."""
    core, root = 1, 1
    for p, e in n_factors.items():
        if e % 2:
            core *= p
        root *= p ** (e // 2)
    return core, root


def triple_from_pair(m: int, bound: SmoothnessBound) -> CoefficientTriple:
    if m < 1:
        raise NotTwinSmoothError("m must be positive")
    fm, fm1 = factor_with_bound(m, bound), factor_with_bound(m + 1, bound)
    if not (fm.complete and fm1.complete):
        raise NotTwinSmoothError(f"({m}, {m + 1}) is not {bound.B}-smooth")
    exps = {2: 1}  # 2 m (m + 1)
    for p, e in fm.factors + fm1.factors:
        exps[p] = exps.get(p, 0) + e
    delta, y = squarefree_split(exps)  # delta y^2 = 2 m (m + 1)
    return CoefficientTriple(delta, 2 * m + 1, y)


def index_of(t: CoefficientTriple) -> int:
    """Which solution of x^2 - 2 delta y^2 = 1 the triple is."""
    fund = fundamental_solution(2 * t.delta, t.x)
    n = solution_index(fund, t.x)
    if n is None:
        raise InvalidTripleError(f"{t} is not a solution of its Pell equation")
    return n


def enumerate_q_prime(bound: SmoothnessBound, delta_max: int | None = None) -> Iterator[int]:
    """Squarefree B-smooth integers except 2, ascending, up to delta_max.

    Each subset of primes has one parent (drop its largest prime, or step the
    largest prime down by one), so a heap over (value, index of largest prime)
    walks the products in order without materialising all 2^t of them.
    """
    primes = bound.primes
    yield 1
    heap = [(2, 0)]
    while heap:
        v, i = heapq.heappop(heap)
        if delta_max is not None and v > delta_max:
            return
        if v != 2:
            yield v
        if i + 1 < len(primes):
            nxt = primes[i + 1]
            for child in (v * nxt, v // primes[i] * nxt):
                if delta_max is None or child <= delta_max:
                    heapq.heappush(heap, (child, i + 1))


@dataclass
class Enumeration:
    bound: SmoothnessBound
    triples: dict[int, CoefficientTriple] = field(default_factory=dict)  # keyed by m
    unresolved: list[int] = field(default_factory=list)  # deltas whose solution exceeded the cap
    solved: int = 0

    @property
    def complete(self) -> bool:
        return not self.unresolved

    @property
    def ms(self) -> list[int]:
        return sorted(self.triples)

    def pairs(self) -> list[TwinPair]:
        return [pair_from_triple(self.triples[m], self.bound) for m in self.ms]


def twins_for_delta(delta: int, bound: SmoothnessBound,
                    x_cap: int | None = None) -> list[CoefficientTriple] | None:
    """All twin-smooth triples of one Pell equation; None if unresolved under the cap."""
    fund = fundamental_solution(2 * delta, x_cap)
    if fund is None:
        return None
    if not is_b_smooth(fund.y, bound):
        # no later solution can be smooth either, since y_1 | y_n
        return []
    m1 = (fund.x - 1) // 2
    out = [CoefficientTriple(delta, fund.x, fund.y, 1)]
    for n in range(2, index_bound(bound) + 1):
        U = evaluate(v_coeffs(n), m1)
        if is_b_smooth(U, bound):
            mn = m_n_from_m1(m1, n)
            out.append(CoefficientTriple(delta, 2 * mn + 1, fund.y * U, n))
    return out


def enumerate_all_twins(bound: SmoothnessBound, x_cap: int | None = None) -> Enumeration:
    res = Enumeration(bound)
    for delta in enumerate_q_prime(bound):
        found = twins_for_delta(delta, bound, x_cap)
        if found is None:
            res.unresolved.append(delta)
            log.info("delta=%d unresolved under cap", delta)
            continue
        res.solved += 1
        for t in found:
            res.triples.setdefault(t.m, t)
    return res
