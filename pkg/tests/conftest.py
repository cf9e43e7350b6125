"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from lexpbs.pbs import MINUTES_PER_DAY, Instance, Pairing


def day_pairing(pid: str, start_day: int, end_day: int,
                hours: float = 8.0) -> Pairing:
    """A pairing spanning whole calendar days."""
    return Pairing(
        id=pid,
        start=start_day * MINUTES_PER_DAY + 360,
        end=end_day * MINUTES_PER_DAY + 1200,
        flight_hours=hours,
    )


def make_instance(pairings, scores, partition, month_days=30):
    """Instance with default legality limits and generated pilot ids."""
    scores = np.asarray(scores, dtype=int)
    pilot_ids = [f"pilot{i + 1:02d}" for i in range(scores.shape[0])]
    return Instance(
        month_days=month_days,
        pilot_ids=pilot_ids,
        pairings=list(pairings),
        scores=scores,
        initial_partition=[list(s) for s in partition],
    )


def quarter_grid(rng: np.random.Generator, shape, lo=-100, hi=101):
    """Random array of quarter-integers; sums of these are exact floats."""
    return rng.integers(lo, hi, size=shape).astype(float) / 4.0


@pytest.fixture
def two_disjoint_instance():
    """Two sequential pairings with a gap, one per pilot."""
    p1 = day_pairing("p1", 0, 2)
    p2 = day_pairing("p2", 10, 12)
    scores = [[10, 20], [30, 40]]
    return make_instance([p1, p2], scores, [["p1"], ["p2"]])
