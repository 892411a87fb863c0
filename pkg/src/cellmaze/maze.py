"""Square grid mazes: random generation, BFS distance maps, submaze tiling, text I/O.

A maze is an n x n grid of path / obstacle / goal cells with exactly one goal.
The target solution for a maze assigns every cell its shortest 4-connected
step count to the goal; obstacles and unreachable path cells are Blocked.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

BLOCKED = -1

# Bounded rejection sampling keeps generation deterministic and finite.
MAX_GENERATION_ATTEMPTS = 1000


class MazeParseError(ValueError):
    """Malformed maze/target text. Carries 1-based line and column."""

    def __init__(self, line: int, col: int, reason: str):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {reason}")


class GenerationError(RuntimeError):
    """Rejection sampling failed to produce a fully connected maze."""


class CellKind(IntEnum):
    PATH = 0
    OBSTACLE = 1
    GOAL = 2


class Direction(IntEnum):
    """Grid moves in canonical order: Up, Down, Left, Right."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


_DELTAS = {
    Direction.UP: (-1, 0),
    Direction.DOWN: (1, 0),
    Direction.LEFT: (0, -1),
    Direction.RIGHT: (0, 1),
}

# Row/col offsets in canonical Direction order, for vectorized code.
DIRECTION_DELTAS = np.array([[-1, 0], [1, 0], [0, -1], [0, 1]], dtype=np.int64)

_CHAR_TO_KIND = {".": CellKind.PATH, "#": CellKind.OBSTACLE, "G": CellKind.GOAL}
_KIND_TO_CHAR = {v: k for k, v in _CHAR_TO_KIND.items()}


@dataclass(frozen=True, eq=False)
class Maze:
    """Immutable n x n grid of CellKind values with exactly one goal cell."""

    n: int
    grid: np.ndarray
    goal: tuple[int, int]

    def __post_init__(self):
        grid = np.array(self.grid, dtype=np.int8)
        if self.n < 3:
            raise ValueError(f"maze side must be >= 3, got {self.n}")
        if grid.shape != (self.n, self.n):
            raise ValueError(f"grid shape {grid.shape} does not match n={self.n}")
        goals = np.argwhere(grid == CellKind.GOAL)
        if len(goals) != 1 or tuple(goals[0]) != tuple(self.goal):
            raise ValueError("grid must contain exactly one goal, at `goal`")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "goal", (int(self.goal[0]), int(self.goal[1])))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Maze):
            return NotImplemented
        return self.n == other.n and self.goal == other.goal and np.array_equal(self.grid, other.grid)

    def kind(self, cell: tuple[int, int]) -> CellKind:
        return CellKind(self.grid[cell])

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.n and 0 <= col < self.n


@dataclass(frozen=True, eq=False)
class TargetSolution:
    """Per-cell shortest step count to the goal; BLOCKED marks obstacles and
    unreachable path cells."""

    n: int
    steps: np.ndarray

    def __post_init__(self):
        steps = np.array(self.steps, dtype=np.int64)
        if steps.shape != (self.n, self.n):
            raise ValueError(f"steps shape {steps.shape} does not match n={self.n}")
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TargetSolution):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.steps, other.steps)

    @property
    def reached_mask(self) -> np.ndarray:
        return self.steps >= 0

    def is_blocked(self, cell: tuple[int, int]) -> bool:
        return self.steps[cell] == BLOCKED


@dataclass(frozen=True)
class SubmazeSet:
    """Row-major tiling of a parent maze into m x m submazes."""

    m: int
    tiles: tuple  # of (tile_row, tile_col, Maze)


def neighbor_stack(values: np.ndarray, fill: float = 0.0) -> np.ndarray:
    """Stack the four directional neighbor grids along a new trailing axis.

    Note the reversal: the value seen *from* a cell looking Up is the grid
    shifted Down, etc.
    """
    n = values.shape[-1]
    out = np.empty(values.shape + (4,), dtype=values.dtype)
    for d in Direction:
        dr, dc = d.delta
        nb = np.full_like(values, fill)
        src_r = slice(max(dr, 0), n + min(dr, 0))
        dst_r = slice(max(-dr, 0), n + min(-dr, 0))
        src_c = slice(max(dc, 0), n + min(dc, 0))
        dst_c = slice(max(-dc, 0), n + min(-dc, 0))
        nb[..., dst_r, dst_c] = values[..., src_r, src_c]
        out[..., d] = nb
    return out


def _bfs_steps(grid: np.ndarray, goal: tuple[int, int]) -> np.ndarray:
    n = grid.shape[0]
    steps = np.full((n, n), BLOCKED, dtype=np.int64)
    steps[goal] = 0
    queue = deque([goal])
    while queue:
        r, c = queue.popleft()
        d = steps[r, c]
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < n and 0 <= nc < n and steps[nr, nc] == BLOCKED and grid[nr, nc] == CellKind.PATH:
                steps[nr, nc] = d + 1
                queue.append((nr, nc))
    return steps


def generate_maze(n: int, obstacle_fraction: float, seed) -> Maze:
    """Random maze: uniform goal, i.i.d. obstacles, redrawn until connected.

    Deterministic per (n, obstacle_fraction, seed). Raises GenerationError if
    no fully goal-connected sample appears within the attempt budget.
    """
    if n < 3:
        raise ValueError(f"maze side must be >= 3, got {n}")
    if not 0.0 <= obstacle_fraction <= 0.5:
        raise ValueError(f"obstacle_fraction must be in [0, 0.5], got {obstacle_fraction}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_GENERATION_ATTEMPTS):
        goal_idx = int(rng.integers(n * n))
        goal = (goal_idx // n, goal_idx % n)
        grid = np.where(rng.random((n, n)) < obstacle_fraction, np.int8(CellKind.OBSTACLE), np.int8(CellKind.PATH))
        grid[goal] = CellKind.GOAL
        steps = _bfs_steps(grid, goal)
        if not np.any((grid == CellKind.PATH) & (steps == BLOCKED)):
            return Maze(n, grid, goal)
    raise GenerationError(
        f"no connected maze after {MAX_GENERATION_ATTEMPTS} attempts "
        f"(n={n}, obstacle_fraction={obstacle_fraction}, seed={seed})"
    )


def solve_target(maze: Maze) -> TargetSolution:
    """Breadth-first shortest step counts from the goal over 4-connected paths."""
    return TargetSolution(maze.n, _bfs_steps(maze.grid, maze.goal))


def good_directions(target: TargetSolution, cell: tuple[int, int]) -> set[Direction]:
    """Directions whose neighbor sits exactly one step closer to the goal.

    Only defined for reached path cells; never empty for them.
    """
    s = int(target.steps[cell])
    if s == BLOCKED:
        raise ValueError(f"good_directions undefined for blocked cell {cell}")
    if s == 0:
        raise ValueError(f"good_directions undefined for the goal cell {cell}")
    r, c = cell
    out = set()
    for d in Direction:
        dr, dc = d.delta
        nr, nc = r + dr, c + dc
        if 0 <= nr < target.n and 0 <= nc < target.n and target.steps[nr, nc] == s - 1:
            out.add(d)
    return out


def euclid_to_goal(maze: Maze, cell: tuple[int, int]) -> float:
    gr, gc = maze.goal
    return math.hypot(cell[0] - gr, cell[1] - gc)


def partition_submazes(maze: Maze, m: int) -> SubmazeSet:
    """Tile the maze into m x m submazes, row-major.

    Tiles not containing the real goal get a pseudo-goal at their cell nearest
    the global goal (row-major scan breaks distance ties).
    """
    if m < 3:
        raise ValueError(f"submaze side must be >= 3, got {m}")
    if maze.n % m != 0:
        raise ValueError(f"submaze side {m} does not divide maze side {maze.n}")
    k = maze.n // m
    gr, gc = maze.goal
    tiles = []
    for tr in range(k):
        for tc in range(k):
            block = np.array(maze.grid[tr * m:(tr + 1) * m, tc * m:(tc + 1) * m])
            if tr == gr // m and tc == gc // m:
                goal = (gr % m, gc % m)
            else:
                best, goal = None, None
                for r in range(m):
                    for c in range(m):
                        d = (tr * m + r - gr) ** 2 + (tc * m + c - gc) ** 2
                        if best is None or d < best:
                            best, goal = d, (r, c)
                block[goal] = CellKind.GOAL
            tiles.append((tr, tc, Maze(m, block, goal)))
    return SubmazeSet(m, tuple(tiles))


def format_maze(maze: Maze) -> str:
    """Text form: one row per line, '.' path, '#' obstacle, 'G' goal."""
    return "\n".join("".join(_KIND_TO_CHAR[CellKind(v)] for v in row) for row in maze.grid) + "\n"


def parse_maze(text: str, require_connected: bool = False) -> Maze:
    lines = text.splitlines()
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MazeParseError(1, 1, "empty maze")
    n = len(lines)
    grid = np.zeros((n, n), dtype=np.int8)
    goals = []
    for i, line in enumerate(lines):
        if len(line) != n:
            raise MazeParseError(i + 1, len(line) + 1, f"expected {n} columns for a square grid, got {len(line)}")
        for j, ch in enumerate(line):
            kind = _CHAR_TO_KIND.get(ch)
            if kind is None:
                raise MazeParseError(i + 1, j + 1, f"invalid character {ch!r}")
            grid[i, j] = kind
            if kind == CellKind.GOAL:
                goals.append((i, j))
    if len(goals) != 1:
        raise MazeParseError(1, 1, f"expected exactly one goal cell, found {len(goals)}")
    if n < 3:
        raise MazeParseError(1, 1, f"maze side must be >= 3, got {n}")
    maze = Maze(n, grid, goals[0])
    if require_connected:
        steps = _bfs_steps(grid, goals[0])
        bad = np.argwhere((grid == CellKind.PATH) & (steps == BLOCKED))
        if len(bad):
            r, c = bad[0]
            raise MazeParseError(int(r) + 1, int(c) + 1, "path cell unreachable from the goal")
    return maze


def format_target(target: TargetSolution) -> str:
    """Step counts as whitespace-separated decimals, 'X' for blocked cells."""
    rows = []
    for row in target.steps:
        rows.append(" ".join("X" if v == BLOCKED else str(int(v)) for v in row))
    return "\n".join(rows) + "\n"


def render_target_legacy(target: TargetSolution) -> str:
    """Write-only display form that prints 25 at blocked cells."""
    rows = []
    for row in target.steps:
        rows.append(" ".join("25" if v == BLOCKED else str(int(v)) for v in row))
    return "\n".join(rows) + "\n"


def parse_target(text: str) -> TargetSolution:
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise MazeParseError(1, 1, "empty target")
    n = len(lines)
    steps = np.full((n, n), BLOCKED, dtype=np.int64)
    for i, line in enumerate(lines):
        tokens = line.split()
        if len(tokens) != n:
            raise MazeParseError(i + 1, len(tokens) + 1, f"expected {n} values for a square grid, got {len(tokens)}")
        for j, tok in enumerate(tokens):
            if tok == "X":
                continue
            if not (tok.isascii() and tok.isdigit()):
                raise MazeParseError(i + 1, j + 1, f"invalid step count {tok!r}")
            steps[i, j] = int(tok)
    return TargetSolution(n, steps)


def save_maze(maze: Maze, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_maze(maze))


def load_maze(path, require_connected: bool = False) -> Maze:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_maze(fh.read(), require_connected=require_connected)


def save_target(target: TargetSolution, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_target(target))


def load_target(path) -> TargetSolution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_target(fh.read())
