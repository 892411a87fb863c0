"""Solution-quality metrics for network outputs against a target solution.

Goodness grades a cell only when its predicted direction equals the single
canonical correct direction; correctness accepts any direction that steps
one closer to the goal. Correctness is therefore never below goodness.
Only goal-reachable path cells are graded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maze import BLOCKED, CellKind, Direction, Maze, TargetSolution, good_directions, neighbor_stack
from .network import NetworkState

_OFF_GRID = -(10**9)  # neighbor-step fill that can never equal steps - 1


@dataclass(frozen=True)
class PerCellGrade:
    predicted: Direction
    canonical: Direction
    good: frozenset
    is_good: bool
    is_correct: bool


@dataclass(frozen=True)
class ScoreReport:
    goodness: float
    correctness: float
    graded_cells: int
    good_count: int
    correct_count: int
    per_cell: dict | None = None


def canonical_direction(target: TargetSolution, cell: tuple[int, int]) -> Direction:
    """The earliest good direction in canonical (Up, Down, Left, Right) order."""
    return min(good_directions(target, cell))


def _prediction_grid(outputs: np.ndarray) -> np.ndarray:
    """argmin over in-grid neighbor outputs; ties pick the canonical-first index."""
    return np.argmin(neighbor_stack(outputs, fill=np.inf), axis=-1)


def _good_grid(target: TargetSolution) -> np.ndarray:
    """Boolean (n, n, 4): neighbor in that direction sits exactly one step closer."""
    nb = neighbor_stack(target.steps, fill=_OFF_GRID)
    return nb == (target.steps - 1)[:, :, None]


def score(state, maze: Maze, target: TargetSolution, per_cell: bool = False) -> ScoreReport:
    """Grade every goal-reachable path cell of one maze.

    `state` may be a NetworkState or a bare (n, n) output grid.
    """
    outputs = state.outputs if isinstance(state, NetworkState) else np.asarray(state, dtype=float)
    if outputs.shape != (maze.n, maze.n):
        raise ValueError(f"outputs shape {outputs.shape} does not match maze side {maze.n}")
    if target.n != maze.n:
        raise ValueError("target does not match maze")
    graded = (np.asarray(maze.grid) == CellKind.PATH) & (target.steps != BLOCKED)
    count = int(graded.sum())
    if count == 0:
        raise ValueError("maze has no goal-reachable path cells to grade")

    pred = _prediction_grid(outputs)
    good = _good_grid(target)
    canonical = np.argmax(good, axis=-1)
    is_good = (pred == canonical) & graded
    is_correct = np.take_along_axis(good, pred[:, :, None], axis=2)[:, :, 0] & graded

    good_count = int(is_good.sum())
    correct_count = int(is_correct.sum())
    detail = None
    if per_cell:
        detail = {}
        for r, c in np.argwhere(graded):
            cell = (int(r), int(c))
            detail[cell] = PerCellGrade(
                predicted=Direction(int(pred[cell])),
                canonical=Direction(int(canonical[cell])),
                good=frozenset(Direction(int(d)) for d in np.flatnonzero(good[cell])),
                is_good=bool(is_good[cell]),
                is_correct=bool(is_correct[cell]),
            )
    return ScoreReport(
        goodness=good_count / count,
        correctness=correct_count / count,
        graded_cells=count,
        good_count=good_count,
        correct_count=correct_count,
        per_cell=detail,
    )


def batch_score(reports) -> tuple[float, float]:
    """Unweighted means of per-maze goodness and correctness fractions."""
    reports = list(reports)
    if not reports:
        raise ValueError("batch_score needs at least one report")
    return (
        float(np.mean([r.goodness for r in reports])),
        float(np.mean([r.correctness for r in reports])),
    )


def write_per_cell_csv(report: ScoreReport, path) -> None:
    """Per-cell grades: row, col, predicted, canonical, good_set, is_good, is_correct."""
    if report.per_cell is None:
        raise ValueError("report was built without per_cell detail")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("row,col,predicted,canonical,good_set,is_good,is_correct\n")
        for (r, c), g in sorted(report.per_cell.items()):
            good_set = "|".join(d.name.lower() for d in sorted(g.good))
            fh.write(
                f"{r},{c},{g.predicted.name.lower()},{g.canonical.name.lower()},"
                f"{good_set},{int(g.is_good)},{int(g.is_correct)}\n"
            )
