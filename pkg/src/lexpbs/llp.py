"""Linear lexicographic programming.

Solves  lexmax Cx  s.t.  Ax = b, x >= 0  by a sequence of ordinary LPs:
level l maximizes cost row l over the columns that were optimal at all
previous levels, reusing the previous basis as a warm start.  The final
basis is primal-dual feasible for the whole lexicographic program, and
the per-level dual row vectors reconstruct lexicographic reduced costs.

The backend is an embedded revised simplex with a dense LU-factorized
basis and Bland's anti-cycling rule.  Artificial variables added for
phase 1 are kept in the problem afterwards, pinned to zero, so that a
full basis always exists even when the genuine columns are rank
deficient (the usual situation for a freshly initialized restricted
master).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .lexcore import DEFAULT_EPS, LexValue


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LlpError(Exception):
    """Base class for solver errors."""


class LlpInfeasibleError(LlpError):
    pass


class LlpUnboundedError(LlpError):
    pass


class NumericalError(LlpError):
    pass


@dataclass
class LlpProblem:
    """Standard-form lex program: lexmax Cx s.t. Ax = b, x >= 0.

    A is k x n, b has length k, C is m x n (row l is the level-l cost
    vector, level 1 being the most important).
    """

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        k, n = self.A.shape
        if self.b.shape != (k,):
            raise ValueError("b must have length k")
        if self.C.shape[1] != n:
            raise ValueError("C must have n columns")

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_cols(self) -> int:
        return self.A.shape[1]

    @property
    def num_levels(self) -> int:
        return self.C.shape[0]

    def column_cost(self, j: int) -> LexValue:
        return LexValue(self.C[:, j])


@dataclass(frozen=True)
class Basis:
    """Ordered set of basic column indices (one per row of A)."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class DualBundle:
    """Per-level dual row vectors; row l reconstructs level-l reduced
    costs as C[l, j] - rows[l] . a_j."""

    rows: tuple[tuple[float, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)


@dataclass
class LpBackendResult:
    status: LpStatus
    basis: Basis | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    x: np.ndarray | None = None


@dataclass
class LexSolveResult:
    value: LexValue
    basis: Basis
    duals: DualBundle
    primal: np.ndarray
    supports: list[set[int]] = field(default_factory=list)


_MAX_PIVOTS = 100_000
_BLAND_THRESHOLD = 200  # degenerate pivots before anti-cycling kicks in


class _Simplex:
    """Revised simplex over an augmented column set.

    Columns past `n_real` are artificials.  While `fixed` is set they
    are pinned to zero: they may sit in the basis at value zero but can
    never enter, and any pivot that would increase one instead kicks it
    out through a zero-length (degenerate) step.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, eps: float):
        self.k, self.n_real = A.shape
        # Flip rows so b >= 0; the artificial identity block then gives
        # a feasible starting basis for phase 1.
        signs = np.where(b < 0, -1.0, 1.0)
        self.A = np.hstack([A * signs[:, None], np.eye(self.k)])
        self.b = b * signs
        self.row_signs = signs
        self.n_total = self.n_real + self.k
        self.art = list(range(self.n_real, self.n_total))
        self.eps = eps
        self.basis: list[int] = list(self.art)
        self.fixed = np.zeros(self.n_total, dtype=bool)
        self.allowed = np.ones(self.n_total, dtype=bool)
        # Anti-degeneracy: the ratio test runs against a slightly
        # perturbed right-hand side so ties are rare and the objective
        # makes strict progress.  Duals depend only on the basis and
        # the reported primal solution is computed from the true b.
        rng = np.random.default_rng(0x5EED)
        self.b_pert = self.b + 1e-7 * (1.0 + rng.random(self.k))

    def set_allowed(self, real_columns) -> None:
        """Restrict the columns eligible to enter the basis."""
        self.allowed[: self.n_real] = False
        for j in real_columns:
            self.allowed[j] = True
        self.allowed[self.n_real:] = ~self.fixed[self.n_real:]

    def _factor(self):
        try:
            return lu_factor(self.A[:, self.basis])
        except Exception as exc:  # singular basis
            raise NumericalError(f"singular basis {self.basis}") from exc

    def basic_solution(self) -> np.ndarray:
        factor = self._factor()
        return lu_solve(factor, self.b)

    def run(self, c: np.ndarray) -> LpStatus:
        """Maximize c.x from the current (feasible) basis.  Returns
        OPTIMAL or UNBOUNDED; the basis is updated in place.

        Entering rule: Dantzig (largest reduced cost) normally, Bland
        (lowest index) during degenerate streaks so cycling cannot
        persist."""
        degen_streak = 0
        for _ in range(_MAX_PIVOTS):
            factor = self._factor()
            x_B = lu_solve(factor, self.b_pert)
            c_B = c[self.basis]
            y = lu_solve(factor, c_B, trans=1)
            z = c - y @ self.A
            in_basis = np.zeros(self.n_total, dtype=bool)
            in_basis[self.basis] = True
            candidates = np.flatnonzero(
                (z > self.eps) & self.allowed & ~self.fixed & ~in_basis
            )
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            if degen_streak < _BLAND_THRESHOLD:
                j = int(candidates[np.argmax(z[candidates])])
            else:
                j = int(candidates[0])
            u = lu_solve(factor, self.A[:, j])
            # Ratio test.  Fixed basic variables are pinned at zero: a
            # direction that would raise one forces a zero-length step.
            t_best = np.inf
            leave_pos = -1
            for r in range(self.k):
                ur = u[r]
                if ur > self.eps:
                    t = max(x_B[r], 0.0) / ur
                elif ur < -self.eps and self.fixed[self.basis[r]]:
                    t = 0.0
                else:
                    continue
                if t < t_best - 1e-12 or (
                    abs(t - t_best) <= 1e-12
                    and (leave_pos < 0 or self.basis[r] < self.basis[leave_pos])
                ):
                    t_best = t
                    leave_pos = r
            if leave_pos < 0:
                return LpStatus.UNBOUNDED
            self.basis[leave_pos] = j
            degen_streak = 0 if t_best > 1e-12 else degen_streak + 1
        raise NumericalError("pivot limit exceeded")

    def duals_for(self, c: np.ndarray) -> np.ndarray:
        factor = self._factor()
        y = lu_solve(factor, c[self.basis], trans=1)
        # Undo the row sign flips so duals refer to the original rows.
        return y * self.row_signs

    def phase1(self) -> bool:
        """Drive the artificials to zero.  Returns False if infeasible."""
        c = np.zeros(self.n_total)
        c[self.n_real:] = -1.0
        self.allowed[:] = True
        status = self.run(c)
        if status is not LpStatus.OPTIMAL:
            raise NumericalError("phase 1 terminated abnormally")
        x_B = self.basic_solution()
        art_level = sum(
            x_B[r] for r in range(self.k) if self.basis[r] >= self.n_real
        )
        if art_level > self.eps * max(1.0, float(np.abs(self.b).sum())):
            return False
        self.fixed[self.n_real:] = True
        return True

    def try_warm_start(self, basis_indices) -> bool:
        """Adopt `basis_indices` if it is nonsingular and feasible."""
        cand = list(basis_indices)
        if len(cand) != self.k:
            return False
        try:
            factor = lu_factor(self.A[:, cand])
            x_B = lu_solve(factor, self.b)
        except Exception:
            return False
        if np.min(x_B) < -self.eps:
            return False
        self.basis = cand
        self.fixed[self.n_real:] = True
        return True


def lp_solve(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    warm_start: Basis | None = None,
    eps: float = DEFAULT_EPS,
) -> LpBackendResult:
    """Solve max c.x s.t. Ax = b, x >= 0 with the embedded simplex.

    On OPTIMAL the returned basis is primal-dual feasible and `duals`
    satisfies duals . a_j >= c_j - eps for every column.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    sx = _Simplex(A, b, eps)
    warmed = warm_start is not None and sx.try_warm_start(warm_start.indices)
    if not warmed and not sx.phase1():
        return LpBackendResult(status=LpStatus.INFEASIBLE)
    c_aug = np.concatenate([c, np.zeros(sx.k)])
    sx.set_allowed(range(sx.n_real))
    status = sx.run(c_aug)
    if status is LpStatus.UNBOUNDED:
        return LpBackendResult(status=LpStatus.UNBOUNDED)
    x_B = sx.basic_solution()
    x = np.zeros(sx.n_real)
    for r, j in enumerate(sx.basis):
        if j < sx.n_real:
            x[j] = x_B[r]
    return LpBackendResult(
        status=LpStatus.OPTIMAL,
        basis=Basis(tuple(sx.basis)),
        objective=float(c @ x),
        duals=sx.duals_for(c_aug),
        x=x,
    )


def lex_solve(
    problem: LlpProblem,
    warm_start: Basis | None = None,
    eps: float = DEFAULT_EPS,
) -> LexSolveResult:
    """Solve the lexicographic program by the sequential level method.

    Level l maximizes cost row l over the support set S_l (initially all
    columns); S_{l+1} keeps the columns whose level-l reduced cost is
    zero within a relative epsilon.  The duals of each level are
    retained: together they reconstruct lexicographic reduced costs.

    Raises LlpInfeasibleError / LlpUnboundedError.
    """
    m = problem.num_levels
    sx = _Simplex(problem.A, problem.b, eps)
    warmed = warm_start is not None and sx.try_warm_start(warm_start.indices)
    if not warmed and not sx.phase1():
        raise LlpInfeasibleError("Ax = b, x >= 0 has no solution")

    support = set(range(problem.num_cols))
    supports = [set(support)]
    dual_rows: list[tuple[float, ...]] = []
    for l in range(m):
        c_aug = np.zeros(sx.n_total)
        c_aug[: sx.n_real] = problem.C[l]
        sx.set_allowed(support)
        status = sx.run(c_aug)
        if status is LpStatus.UNBOUNDED:
            raise LlpUnboundedError(f"level {l + 1} is unbounded")
        y = sx.duals_for(c_aug)
        dual_rows.append(tuple(y))
        # Shrink the support to the columns tying the level-l optimum.
        slack = problem.C[l] - y @ problem.A
        tol = eps * np.maximum(1.0, np.abs(problem.C[l]))
        support = {j for j in support if abs(slack[j]) <= tol[j]}
        # The basis always ties (reduced cost zero); keep it explicitly
        # so numerical noise cannot break the nesting B_l <= S_{l+1}.
        support.update(j for j in sx.basis if j < sx.n_real)
        supports.append(set(support))

    x_B = sx.basic_solution()
    x = np.zeros(problem.num_cols)
    for r, j in enumerate(sx.basis):
        if j < sx.n_real:
            x[j] = x_B[r]
    return LexSolveResult(
        value=LexValue(problem.C @ x),
        basis=Basis(tuple(sx.basis)),
        duals=DualBundle(tuple(dual_rows)),
        primal=x,
        supports=supports,
    )


def reduced_cost(duals: DualBundle, c_col: LexValue, a_col: np.ndarray) -> LexValue:
    """Lexicographic reduced cost of a column from the per-level duals."""
    a_col = np.asarray(a_col, dtype=float)
    rows = duals.as_array()
    if rows.shape[1] != a_col.shape[0]:
        raise ValueError("column length does not match dual dimension")
    if rows.shape[0] != len(c_col):
        raise ValueError("cost length does not match number of levels")
    return LexValue(c_col.entries - rows @ a_col)
