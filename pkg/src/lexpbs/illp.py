"""Branch and bound for integer linear lexicographic programs.

Works on an explicit column set with binary variables.  Each node's
relaxation is a full lexicographic LP solve, so pruning compares true
lexicographic bounds with the incumbent.  Variables are fixed by column
removal (to 0) or by substitution into the right-hand side (to 1).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lexcore import DEFAULT_EPS, LexValue, lex_compare_eps
from .llp import (
    Basis,
    LlpInfeasibleError,
    LlpProblem,
    LlpUnboundedError,
    lex_solve,
)


class IllpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass
class IllpProblem:
    """An LlpProblem whose variables are 0/1."""

    base: LlpProblem

    @property
    def num_cols(self) -> int:
        return self.base.num_cols

    @property
    def num_levels(self) -> int:
        return self.base.num_levels


@dataclass
class BnbNode:
    fixed_zero: frozenset[int]
    fixed_one: frozenset[int]
    bound: LexValue
    relaxation: np.ndarray | None
    basis: Basis | None
    depth: int


@dataclass
class IllpResult:
    status: IllpStatus
    value: LexValue | None
    solution: np.ndarray | None
    node_count: int


def _node_relaxation(problem: IllpProblem, node_zero, node_one, eps):
    """Lex-solve the node LP; returns (bound, full x, basis) or None if
    the node is infeasible.  May return an all +inf bound if the node
    relaxation is unbounded (possible only without binding rows)."""
    base = problem.base
    n = base.num_cols
    free = [j for j in range(n) if j not in node_zero and j not in node_one]
    b = base.b.copy()
    offset = np.zeros(base.num_levels)
    for j in node_one:
        b -= base.A[:, j]
        offset += base.C[:, j]
    sub = LlpProblem(A=base.A[:, free], b=b, C=base.C[:, free])
    try:
        res = lex_solve(sub, eps=eps)
    except LlpInfeasibleError:
        return None
    except LlpUnboundedError:
        return (LexValue.pos_infinite(base.num_levels), None, None, free)
    x = np.zeros(n)
    x[free] = res.primal
    for j in node_one:
        x[j] = 1.0
    return (LexValue(np.asarray(res.value.entries) + offset), x, res.basis, free)


def _is_integral(x: np.ndarray, eps: float) -> bool:
    return bool(np.all((np.abs(x) <= eps) | (np.abs(x - 1.0) <= eps)))


def _branch_var(x: np.ndarray, fixed: set[int], eps: float) -> int:
    """Most-fractional unfixed variable: largest distance to the nearest
    of {0, 1}, ties broken by lowest index."""
    best_j, best_d = -1, -1.0
    for j in range(len(x)):
        if j in fixed:
            continue
        d = min(abs(x[j]), abs(x[j] - 1.0))
        if d > best_d + 1e-12:
            best_j, best_d = j, d
    return best_j


def illp_solve(
    problem: IllpProblem,
    incumbent_hint: np.ndarray | None = None,
    eps: float = DEFAULT_EPS,
) -> IllpResult:
    """Lex-maximal binary solution by best-first branch and bound.

    `incumbent_hint`, when given, must be a feasible 0/1 vector; it
    seeds the incumbent so pruning starts immediately.
    """
    base = problem.base
    m = base.num_levels
    incumbent_x = None
    incumbent_val = LexValue.neg_infinite(m)
    if incumbent_hint is not None:
        hint = np.asarray(incumbent_hint, dtype=float)
        if np.max(np.abs(base.A @ hint - base.b)) > 1e-7:
            raise ValueError("incumbent_hint is not feasible")
        incumbent_x = hint
        incumbent_val = LexValue(base.C @ hint)

    node_count = 0
    counter = 0
    heap: list = []

    def push(node: BnbNode):
        nonlocal counter
        # Best-first on the lex bound, deeper nodes first on ties.
        key = (tuple(-e for e in node.bound.entries), -node.depth, counter)
        heapq.heappush(heap, (key, node))
        counter += 1

    root = _node_relaxation(problem, frozenset(), frozenset(), eps)
    node_count += 1
    if root is None:
        if incumbent_x is None:
            return IllpResult(IllpStatus.INFEASIBLE, None, None, node_count)
        return IllpResult(IllpStatus.OPTIMAL, incumbent_val, incumbent_x, node_count)
    bound, x, _, _ = root
    push(BnbNode(frozenset(), frozenset(), bound, x, None, 0))

    while heap:
        _, node = heapq.heappop(heap)
        if lex_compare_eps(node.bound, incumbent_val, eps) <= 0:
            continue  # cannot strictly improve the incumbent
        x = node.relaxation
        if x is not None and _is_integral(x, eps):
            xi = np.round(x)
            val = LexValue(base.C @ xi)
            if lex_compare_eps(val, incumbent_val, eps) > 0:
                incumbent_val, incumbent_x = val, xi
            continue
        fixed = set(node.fixed_zero) | set(node.fixed_one)
        j = _branch_var(x, fixed, eps) if x is not None \
            else next(k for k in range(base.num_cols) if k not in fixed)
        for side in (0, 1):
            fz = node.fixed_zero | ({j} if side == 0 else set())
            fo = node.fixed_one | ({j} if side == 1 else set())
            child = _node_relaxation(problem, fz, fo, eps)
            node_count += 1
            if child is None:
                continue
            c_bound, c_x, _, _ = child
            if lex_compare_eps(c_bound, incumbent_val, eps) <= 0:
                continue
            push(BnbNode(fz, fo, c_bound, c_x, None, node.depth + 1))

    if incumbent_x is None:
        return IllpResult(IllpStatus.INFEASIBLE, None, None, node_count)
    return IllpResult(IllpStatus.OPTIMAL, incumbent_val, incumbent_x, node_count)
