"""Pell equations x^2 - D y^2 = 1: continued-fraction solver with a size cap,
and stepping from the fundamental solution to the n-th one."""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Iterator


class NotApplicableError(ValueError):
    """D is a perfect square, so only the trivial solution exists."""


class CoefficientMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CFState:
    k: int
    P: int
    Q: int
    a: int


@dataclass(frozen=True)
class Convergent:
    A: int
    B: int
    index: int


@dataclass(frozen=True)
class PellSolution:
    D: int
    x: int
    y: int
    n: int = 1

    def __post_init__(self):
        if self.x * self.x - self.D * self.y * self.y != 1:
            raise ValueError(f"({self.x}, {self.y}) does not solve x^2 - {self.D} y^2 = 1")
        if self.n < 1:
            raise ValueError("solution index starts at 1")


def _check_coefficient(D: int) -> int:
    if D < 2:
        raise ValueError(f"Pell coefficient must be >= 2, got {D}")
    a0 = isqrt(D)
    if a0 * a0 == D:
        raise NotApplicableError(f"D = {D} is a perfect square")
    return a0


def cf_states(D: int) -> Iterator[CFState]:
    """Quotients of the continued fraction of sqrt(D), via the P/Q recurrence."""
    a0 = _check_coefficient(D)
    P, Q, a, k = 0, 1, a0, 0
    while True:
        yield CFState(k, P, Q, a)
        P = a * Q - P
        Q = (D - P * P) // Q
        a = (a0 + P) // Q
        k += 1


def convergents(D: int) -> Iterator[Convergent]:
    A_prev, A = 0, 1  # A_(-2), A_(-1)
    B_prev, B = 1, 0
    for st in cf_states(D):
        A_prev, A = A, st.a * A + A_prev
        B_prev, B = B, st.a * B + B_prev
        yield Convergent(A, B, st.k)


def fundamental_solution(D: int, x_cap: int | None = None) -> PellSolution | None:
    """Smallest positive solution of x^2 - D y^2 = 1, or None if its x exceeds x_cap.

    Walks the convergents A_i/B_i of sqrt(D) and stops at the first one that
    solves the equation, or as soon as a numerator passes x_cap.  The test
    uses A_i^2 - D B_i^2 = (-1)^(i+1) Q_(i+1), so only the numerators need to
    be carried as big integers; y is recovered at the end.
    Raises NotApplicableError when D is a perfect square.
    """
    a0 = _check_coefficient(D)
    P, Q, a = 0, 1, a0
    A_prev, A = 1, a0
    odd = False
    while True:
        if x_cap is not None and A > x_cap:
            return None
        P = a * Q - P
        Q = (D - P * P) // Q
        if Q == 1 and odd:
            y = isqrt((A * A - 1) // D)
            return PellSolution(D, A, y, 1)
        a = (a0 + P) // Q
        A_prev, A = A, a * A + A_prev
        odd = not odd


def _step(x1: int, x: int, U: int) -> tuple[int, int]:
    # (x_k, U_k) -> (x_(k+1), U_(k+1)), using D y_1^2 = x_1^2 - 1
    return x * x1 + U * (x1 * x1 - 1), x + x1 * U


def next_solution(fund: PellSolution, cur: PellSolution) -> PellSolution:
    if fund.n != 1:
        raise ValueError("first argument must be the fundamental solution")
    if fund.D != cur.D:
        raise CoefficientMismatchError(f"D = {fund.D} vs D = {cur.D}")
    D = fund.D
    return PellSolution(D, cur.x * fund.x + D * cur.y * fund.y,
                        cur.x * fund.y + cur.y * fund.x, cur.n + 1)


def lucas_pair(x1: int, n: int) -> tuple[int, int]:
    """(x_n, U_n) from x_1 by left-to-right binary doubling."""
    if n < 1:
        raise IndexError("solution index starts at 1")
    x, U = x1, 1
    for bit in bin(n)[3:]:
        x, U = 2 * x * x - 1, 2 * x * U
        if bit == "1":
            x, U = _step(x1, x, U)
    return x, U


def nth_solution(fund: PellSolution, n: int) -> PellSolution:
    if fund.n != 1:
        raise ValueError("first argument must be the fundamental solution")
    if n < 1:
        raise IndexError("solution index starts at 1; the trivial solution is excluded")
    if n == 1:
        return fund
    x, U = lucas_pair(fund.x, n)
    return PellSolution(fund.D, x, fund.y * U, n)


def solution_index(fund: PellSolution, x: int) -> int | None:
    """Index n with x_n == x, or None if x is not an x-coordinate of a solution."""
    xn, U, n = fund.x, 1, 1
    while xn < x:
        xn, U = _step(fund.x, xn, U)
        n += 1
    return n if xn == x else None
