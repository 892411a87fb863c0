"""Per-cell feature extraction and Lloyd's k-means with goal-distance sorting.

Each maze cell gets a 7-component feature vector (row, col, four direction
flags, cell value). Cells are clustered with k-means and clusters relabeled
by their centroid's distance to the goal, producing one auxiliary scalar per
cell in [0, 1].
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .maze import CellKind, Maze, TargetSolution, neighbor_stack

FEATURE_DIM = 7
DEFAULT_K = 24
DEFAULT_MAX_ITER = 300


@dataclass
class ClusterModel:
    """k-means result over per-cell feature vectors.

    `assignment` maps each point (row-major cell) to a cluster index;
    `sorted_label` is the goal-distance relabeling added by sort_clusters.
    `objective_history` holds the within-cluster squared distance total
    measured after each assignment step.
    """

    k: int
    centroids: np.ndarray
    assignment: np.ndarray
    iterations_run: int
    converged: bool
    objective_history: list
    sorted_label: np.ndarray | None = None


def static_features(maze: Maze, target: TargetSolution | None = None) -> np.ndarray:
    """Fixed per-cell features: position, direction flags, cell code.

    Direction flags are +1 when stepping that way strictly decreases the
    Euclidean distance to the goal, else -1 (off-grid counts as -1). The
    cell code is 0 for path, 1 for obstacle, -1 for goal. Purely geometric:
    `target` is accepted for signature symmetry with the dynamic variant but
    never consulted.
    """
    n = maze.n
    gr, gc = maze.goal
    rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cur = (rows - gr) ** 2 + (cols - gc) ** 2
    feats = np.empty((n * n, FEATURE_DIM))
    feats[:, 0] = rows.ravel()
    feats[:, 1] = cols.ravel()
    for d, (dr, dc) in enumerate([(-1, 0), (1, 0), (0, -1), (0, 1)]):
        nr, nc = rows + dr, cols + dc
        in_grid = (nr >= 0) & (nr < n) & (nc >= 0) & (nc < n)
        closer = in_grid & ((nr - gr) ** 2 + (nc - gc) ** 2 < cur)
        feats[:, 2 + d] = np.where(closer, 1.0, -1.0).ravel()
    code = np.zeros((n, n))
    code[maze.grid == CellKind.OBSTACLE] = 1.0
    code[maze.grid == CellKind.GOAL] = -1.0
    feats[:, 6] = code.ravel()
    return feats


def dynamic_features(maze: Maze, cell_outputs: np.ndarray) -> np.ndarray:
    """Mid-training per-cell features built from previous-epoch cell outputs.

    Components 3..6 are the four neighbor outputs (0 when off-grid) and the
    7th is the cell's own output.
    """
    n = maze.n
    outputs = np.asarray(cell_outputs, dtype=float)
    if outputs.shape != (n, n):
        raise ValueError(f"cell_outputs shape {outputs.shape} does not match maze side {n}")
    rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    feats = np.empty((n * n, FEATURE_DIM))
    feats[:, 0] = rows.ravel()
    feats[:, 1] = cols.ravel()
    nb = neighbor_stack(outputs, fill=0.0)
    feats[:, 2:6] = nb.reshape(n * n, 4)
    feats[:, 6] = outputs.ravel()
    return feats


def _objective(points: np.ndarray, centroids: np.ndarray, assignment: np.ndarray) -> float:
    return float(((points - centroids[assignment]) ** 2).sum())


def kmeans(points: np.ndarray, k: int, seed, max_iter: int = DEFAULT_MAX_ITER) -> ClusterModel:
    """Lloyd's algorithm with squared Euclidean distance.

    Centroids start at k distinct points sampled without replacement.
    Assignment ties go to the lowest centroid index; a cluster left empty is
    reseeded at the point farthest from its current centroid. Iteration
    stops when assignments repeat or max_iter is hit.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ValueError("points must be a non-empty 2-D array")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    distinct = np.unique(points, axis=0)
    if k > len(distinct):
        raise ValueError(f"k={k} exceeds the {len(distinct)} distinct points")

    rng = np.random.default_rng(seed)
    centroids = distinct[rng.choice(len(distinct), size=k, replace=False)]

    assignment = None
    objective_history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = np.argmin(d2, axis=1)
        objective_history.append(_objective(points, centroids, new_assignment))
        if assignment is not None and np.array_equal(new_assignment, assignment):
            converged = True
            assignment = new_assignment
            break
        assignment = new_assignment
        counts = np.bincount(assignment, minlength=k)
        new_centroids = np.empty_like(centroids)
        for j in range(k):
            if counts[j] > 0:
                new_centroids[j] = points[assignment == j].mean(axis=0)
        used = []
        for j in np.flatnonzero(counts == 0):
            far = ((points - centroids[j]) ** 2).sum(axis=1)
            far[used] = -1.0  # keep two empty clusters from grabbing the same point
            pick = int(np.argmax(far))
            used.append(pick)
            new_centroids[j] = points[pick]
        centroids = new_centroids

    return ClusterModel(
        k=k,
        centroids=centroids,
        assignment=assignment,
        iterations_run=iterations,
        converged=converged,
        objective_history=objective_history,
    )


def sort_clusters(model: ClusterModel, goal: tuple[int, int]) -> ClusterModel:
    """Relabel clusters by centroid (row, col) distance to the goal.

    Rank 0 goes to the nearest centroid; distance ties keep the original
    cluster order. Assignment is untouched.
    """
    d = np.hypot(model.centroids[:, 0] - goal[0], model.centroids[:, 1] - goal[1])
    order = np.argsort(d, kind="stable")
    rank = np.empty(model.k, dtype=np.int64)
    rank[order] = np.arange(model.k)
    return dataclasses.replace(model, sorted_label=rank[model.assignment])


def cluster_input_for(
    maze: Maze,
    target: TargetSolution | None = None,
    k: int = DEFAULT_K,
    seed=0,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Per-cell auxiliary input: goal-sorted cluster rank scaled into [0, 1]."""
    feats = static_features(maze, target)
    model = sort_clusters(kmeans(feats, k, seed, max_iter), maze.goal)
    return (model.sorted_label / max(k - 1, 1)).reshape(maze.n, maze.n)


def scaled_labels(model: ClusterModel, n: int) -> np.ndarray:
    """sorted_label reshaped to the maze grid and scaled into [0, 1]."""
    if model.sorted_label is None:
        raise ValueError("model has no sorted_label; call sort_clusters first")
    return (model.sorted_label / max(model.k - 1, 1)).reshape(n, n)
