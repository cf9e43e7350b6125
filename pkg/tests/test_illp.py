"""Branch and bound for binary lexicographic programs."""

from itertools import product

import numpy as np
import pytest

from lexpbs.illp import IllpProblem, IllpStatus, illp_solve
from lexpbs.lexcore import LexValue
from lexpbs.llp import LlpProblem, LlpUnboundedError, lex_solve


def brute_force(problem: IllpProblem):
    """Lex-max over all feasible 0/1 vectors, or None."""
    base = problem.base
    best = None
    best_x = None
    for bits in product((0.0, 1.0), repeat=base.num_cols):
        x = np.array(bits)
        if np.max(np.abs(base.A @ x - base.b)) > 1e-9:
            continue
        val = LexValue(base.C @ x)
        if best is None or val > best:
            best, best_x = val, x
    return best, best_x


class TestFixtures:
    def test_integral_relaxation(self):
        p = IllpProblem(LlpProblem(A=[[1, 1]], b=[1], C=[[1, 0], [0, 1]]))
        res = illp_solve(p)
        assert res.status is IllpStatus.OPTIMAL
        assert res.value == LexValue((1, 0))

    def test_tie_then_refine(self):
        p = IllpProblem(LlpProblem(A=[[1, 1]], b=[1], C=[[1, 1], [0, 1]]))
        res = illp_solve(p)
        assert res.value == LexValue((1, 1))
        assert res.solution == pytest.approx([0.0, 1.0])

    def test_infeasible(self):
        p = IllpProblem(LlpProblem(A=[[1]], b=[2], C=[[1]]))
        res = illp_solve(p)
        assert res.status is IllpStatus.INFEASIBLE
        assert res.value is None

    def test_node_count_positive(self):
        p = IllpProblem(LlpProblem(A=[[1, 1]], b=[1], C=[[1, 0]]))
        assert illp_solve(p).node_count >= 1

    def test_three_pilot_master(self):
        # Three assignment rows, five partition rows, six hand-built
        # columns; checked against the 2^6 enumeration.
        cols = [
            (0, (0, 1), 12),
            (0, (2,), 5),
            (1, (2, 3), 9),
            (1, (0,), 4),
            (2, (4,), 7),
            (2, (1, 3, 4), 11),
        ]
        A = np.zeros((8, 6))
        C = np.zeros((3, 6))
        for j, (pilot, pairings, score) in enumerate(cols):
            A[pilot, j] = 1.0
            for p in pairings:
                A[3 + p, j] = 1.0
            C[pilot, j] = score
        p = IllpProblem(LlpProblem(A=A, b=np.ones(8), C=C))
        res = illp_solve(p)
        expected, _ = brute_force(p)
        assert res.status is IllpStatus.OPTIMAL
        assert res.value == expected


class TestIncumbentHint:
    def test_feasible_hint_accepted(self):
        p = IllpProblem(LlpProblem(A=[[1, 1]], b=[1], C=[[1, 1], [0, 1]]))
        res = illp_solve(p, incumbent_hint=np.array([1.0, 0.0]))
        assert res.value == LexValue((1, 1))

    def test_infeasible_hint_rejected(self):
        p = IllpProblem(LlpProblem(A=[[1, 1]], b=[1], C=[[1, 0]]))
        with pytest.raises(ValueError):
            illp_solve(p, incumbent_hint=np.array([1.0, 1.0]))


class TestAgainstBruteForce:
    def test_random_instances(self):
        rng = np.random.default_rng(5)
        solved = 0
        for _ in range(40):
            k = int(rng.integers(1, 5))
            n = int(rng.integers(2, 9))
            A = rng.integers(0, 2, size=(k, n)).astype(float)
            x0 = rng.integers(0, 2, size=n).astype(float)
            b = A @ x0
            C = rng.integers(-5, 11, size=(int(rng.integers(1, 4)), n))
            p = IllpProblem(LlpProblem(A=A, b=b, C=C))
            res = illp_solve(p)
            expected, _ = brute_force(p)
            assert res.status is IllpStatus.OPTIMAL
            assert res.value == expected
            assert res.solution is not None
            assert np.max(np.abs(A @ res.solution - b)) <= 1e-7
            solved += 1
        assert solved == 40

    def test_root_sandwich(self):
        # The integer value never exceeds the root relaxation value.
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            A = rng.integers(0, 2, size=(2, n)).astype(float)
            x0 = rng.integers(0, 2, size=n).astype(float)
            C = rng.integers(0, 9, size=(2, n))
            base = LlpProblem(A=A, b=A @ x0, C=C)
            try:
                relax = lex_solve(base)
            except LlpUnboundedError:
                continue  # zero columns can leave the relaxation unbounded
            res = illp_solve(IllpProblem(base))
            assert res.status is IllpStatus.OPTIMAL
            assert tuple(res.value.entries) <= tuple(
                v + 1e-6 for v in relax.value.entries
            )
