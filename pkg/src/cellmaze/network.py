"""Cellular recurrent network over a maze grid.

One small recurrent core is replicated at every cell with a single shared
weight matrix. Each cell reads its external inputs, the previous-iteration
outputs of its four neighbors, its own previous recurrent state, and a bias;
all cells update synchronously for a fixed number of core iterations. The
cell output is one designated recurrent node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import expit

from .maze import CellKind, Direction, Maze, euclid_to_goal, neighbor_stack

N_NEIGHBORS = 4
WEIGHT_INIT_RANGE = 0.3


class Method(str, Enum):
    """Auxiliary external-input method selector."""

    NONE = "none"
    CLUSTER = "cluster"
    CLUSTER_DURING_EPOCHS = "cluster_during_epochs"
    SUBMAZE = "submaze"
    EUCLIDEAN = "euclidean"

    @property
    def n_external(self) -> int:
        """External input width: obstacle + goal flags, plus one aux channel."""
        return 3 if self in (Method.CLUSTER, Method.CLUSTER_DURING_EPOCHS, Method.EUCLIDEAN) else 2

    @property
    def needs_cluster_aux(self) -> bool:
        return self in (Method.CLUSTER, Method.CLUSTER_DURING_EPOCHS)


@dataclass(frozen=True)
class MethodConfig:
    method: Method = Method.NONE
    cluster_k: int = 24
    submaze_m: int = 4

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.cluster_k < 1:
            raise ValueError(f"cluster_k must be >= 1, got {self.cluster_k}")
        if self.submaze_m < 3:
            raise ValueError(f"submaze_m must be >= 3, got {self.submaze_m}")


@dataclass(frozen=True)
class CsrnConfig:
    """Shape and dynamics of the shared recurrent core.

    core_iterations of None means 2 * n, resolved per maze, so information
    can cross the grid one cell per iteration.
    """

    n_external: int = 2
    n_recurrent: int = 5
    core_iterations: int | None = None
    activation: str = "tanh"
    output_node: int = 0
    offgrid_value: float = 0.0

    def __post_init__(self):
        if self.n_external < 2:
            raise ValueError(f"n_external must be >= 2, got {self.n_external}")
        if self.n_recurrent < 1:
            raise ValueError(f"n_recurrent must be >= 1, got {self.n_recurrent}")
        if self.core_iterations is not None and self.core_iterations < 1:
            raise ValueError(f"core_iterations must be >= 1, got {self.core_iterations}")
        if not 0 <= self.output_node < self.n_recurrent:
            raise ValueError(f"output_node {self.output_node} out of range")
        if self.activation not in ("tanh", "logistic"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def input_width(self) -> int:
        return self.n_external + N_NEIGHBORS + self.n_recurrent + 1

    def resolve_iterations(self, n: int) -> int:
        return self.core_iterations if self.core_iterations is not None else 2 * n

    def activation_fn(self):
        return np.tanh if self.activation == "tanh" else expit


@dataclass(frozen=True, eq=False)
class WeightSet:
    """The single weight matrix shared by every cell.

    Shape (n_recurrent, n_external + 4 + n_recurrent + 1); the trailing
    column is the bias.
    """

    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2:
            raise ValueError("W must be a 2-D matrix")
        if W.shape[1] - W.shape[0] - N_NEIGHBORS - 1 < 2:
            raise ValueError(f"W shape {W.shape} leaves fewer than 2 external inputs")
        if not np.isfinite(W).all():
            raise ValueError("W must be finite")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightSet):
            return NotImplemented
        return np.array_equal(self.W, other.W)

    @property
    def n_recurrent(self) -> int:
        return self.W.shape[0]

    @property
    def n_external(self) -> int:
        return self.W.shape[1] - self.n_recurrent - N_NEIGHBORS - 1

    @property
    def weight_count(self) -> int:
        return self.W.size

    def flat(self) -> np.ndarray:
        return self.W.ravel().copy()

    @classmethod
    def from_flat(cls, w: np.ndarray, n_external: int, n_recurrent: int) -> "WeightSet":
        cols = n_external + N_NEIGHBORS + n_recurrent + 1
        w = np.asarray(w, dtype=float)
        if w.size != n_recurrent * cols:
            raise ValueError(f"flat weight length {w.size} does not match {n_recurrent}x{cols}")
        return cls(w.reshape(n_recurrent, cols))


@dataclass(frozen=True)
class CellState:
    z: np.ndarray
    y: float


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Result of one forward evaluation over a maze grid.

    iteration_deltas[t] is the max absolute change of the output grid at
    core iteration t, a convergence probe for the recurrence.
    """

    n: int
    z: np.ndarray        # (n, n, n_recurrent)
    outputs: np.ndarray  # (n, n)
    iteration_deltas: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def cell(self, row: int, col: int) -> CellState:
        return CellState(z=self.z[row, col].copy(), y=float(self.outputs[row, col]))


def init_weights(config: CsrnConfig, seed) -> WeightSet:
    """Uniform weights on [-0.3, 0.3], deterministic per seed."""
    rng = np.random.default_rng(seed)
    return WeightSet(rng.uniform(-WEIGHT_INIT_RANGE, WEIGHT_INIT_RANGE, (config.n_recurrent, config.input_width)))


def assemble_external_inputs(maze: Maze, method: MethodConfig, aux: np.ndarray | None = None) -> np.ndarray:
    """Per-cell external input vectors for one maze.

    The first two channels flag obstacle and goal cells. Cluster methods
    append the caller-supplied per-cell auxiliary grid; the euclidean method
    appends goal distance scaled by the grid diagonal. `aux` is accepted
    exactly when the method needs cluster labels.
    """
    m = Method(method.method) if isinstance(method, MethodConfig) else Method(method)
    n = maze.n
    base = np.zeros((n, n, 2))
    base[:, :, 0] = maze.grid == CellKind.OBSTACLE
    base[:, :, 1] = maze.grid == CellKind.GOAL
    if m.needs_cluster_aux:
        if aux is None:
            raise ValueError(f"method {m.value} requires a per-cell aux grid")
        aux = np.asarray(aux, dtype=float)
        if aux.shape != (n, n):
            raise ValueError(f"aux shape {aux.shape} does not match maze side {n}")
        return np.concatenate([base, aux[:, :, None]], axis=2)
    if aux is not None:
        raise ValueError(f"method {m.value} does not take an aux grid")
    if m == Method.EUCLIDEAN:
        rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        dist = np.hypot(rows - maze.goal[0], cols - maze.goal[1])
        return np.concatenate([base, (dist / (n * np.sqrt(2.0)))[:, :, None]], axis=2)
    return base


def forward(maze_inputs: np.ndarray, weights: WeightSet, config: CsrnConfig) -> NetworkState:
    """Run the synchronous recurrence from zero state.

    Every iteration, each cell builds x = [external inputs, four neighbor
    outputs from the previous iteration, its own previous recurrent state, 1]
    and applies z_new = activation(W x). Iteration t+1 reads only values from
    iteration t.
    """
    inputs = np.asarray(maze_inputs, dtype=float)
    if inputs.ndim != 3 or inputs.shape[0] != inputs.shape[1]:
        raise ValueError(f"inputs must be (n, n, n_external), got {inputs.shape}")
    if inputs.shape[2] != config.n_external:
        raise ValueError(f"input width {inputs.shape[2]} does not match n_external {config.n_external}")
    if weights.n_recurrent != config.n_recurrent or weights.n_external != config.n_external:
        raise ValueError("weights do not match the network configuration")
    n = inputs.shape[0]
    iters = config.resolve_iterations(n)
    act = config.activation_fn()
    ones = np.ones((n, n, 1))
    z = np.zeros((n, n, config.n_recurrent))
    deltas = np.empty(iters)
    for t in range(iters):
        y = z[:, :, config.output_node]
        nb = neighbor_stack(y, fill=config.offgrid_value)
        x = np.concatenate([inputs, nb, z, ones], axis=2)
        z = act(x @ weights.W.T)
        deltas[t] = np.abs(z[:, :, config.output_node] - y).max()
    return NetworkState(n=n, z=z, outputs=z[:, :, config.output_node].copy(), iteration_deltas=deltas)


def forward_stack(inputs: np.ndarray, W_stack: np.ndarray, config: CsrnConfig, iters: int) -> np.ndarray:
    """Evaluate B weight variants over M same-sized mazes in one pass.

    inputs is (M, n, n, n_external) and W_stack is (B, n_recurrent, width);
    returns the output grids with shape (B, M, n, n). Used for the batched
    finite-difference sweep, where each perturbed weight set needs one full
    forward evaluation.
    """
    M, n, _, _ = inputs.shape
    B = W_stack.shape[0]
    act = config.activation_fn()
    nr = config.n_recurrent
    ext = np.broadcast_to(inputs[None], (B, M, n, n, config.n_external))
    ones = np.ones((B, M, n, n, 1))
    Wt = np.ascontiguousarray(W_stack.transpose(0, 2, 1))
    z = np.zeros((B, M, n, n, nr))
    for _ in range(iters):
        y = z[:, :, :, :, config.output_node]
        nb = neighbor_stack(y, fill=config.offgrid_value)
        x = np.concatenate([ext, nb, z, ones], axis=4)
        flat = x.reshape(B, M * n * n, -1) @ Wt
        z = act(flat).reshape(B, M, n, n, nr)
    return z[:, :, :, :, config.output_node]


def predicted_direction(state: NetworkState, cell: tuple[int, int], maze: Maze) -> Direction:
    """Direction of the in-grid neighbor with the lowest output value.

    Ties break in canonical order (Up, Down, Left, Right). Only meaningful
    for path cells.
    """
    if maze.kind(cell) != CellKind.PATH:
        raise ValueError(f"predicted_direction needs a path cell, got {maze.kind(cell).name} at {cell}")
    r, c = cell
    best = None
    best_dir = None
    for d in Direction:
        dr, dc = d.delta
        nr, nc = r + dr, c + dc
        if not maze.in_bounds(nr, nc):
            continue
        v = state.outputs[nr, nc]
        if best is None or v < best:
            best, best_dir = v, d
    if best_dir is None:
        raise ValueError(f"cell {cell} has no in-grid neighbors")
    return best_dir


def save_weights(weights: WeightSet, path) -> None:
    """Flat text form: 'n_external n_recurrent' then one row of W per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{weights.n_external} {weights.n_recurrent}\n")
        for row in weights.W:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_weights(path) -> WeightSet:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed weight header")
        n_external, n_recurrent = int(header[0]), int(header[1])
        values = np.array(fh.read().split(), dtype=float)
    return WeightSet.from_flat(values, n_external, n_recurrent)


def euclid_aux_value(maze: Maze, cell: tuple[int, int]) -> float:
    """Scaled goal distance as fed to the third external input."""
    return euclid_to_goal(maze, cell) / (maze.n * np.sqrt(2.0))
