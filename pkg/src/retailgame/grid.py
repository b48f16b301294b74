"""Time-space discretization, value/policy storage and trilinear interpolation.

The state (x, y1, y2) lives on a box with uniform nodes per axis; time is
uniform with step h = T / m_time.  Value fields are dense arrays indexed
[time step, x node, y1 node, y2 node], one per player.  Off-grid queries are
clamped to the box before interpolating; clamping is what localizes the
unbounded state space onto the box, and trilinear interpolation keeps the
scheme monotone (pointwise-larger fields interpolate larger everywhere).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, running_payoff, terminal_payoff

# Policy action codes.
WAIT = 0
INTERVENE = 1
ENDURE = 2
ACTION_NAMES = {WAIT: "wait", INTERVENE: "intervene", ENDURE: "endure"}


@dataclass(frozen=True)
class GridSpec:
    """Resolution and bounds of the discretization."""

    m_time: int = 20
    n_x: int = 20
    n_y: int = 20
    x_min: float = 10.0
    x_max: float = 90.0
    y_min: float = 10.0
    y_max: float = 90.0
    n_zeta: int = 9

    def __post_init__(self):
        if self.m_time < 1:
            raise ValueError(f"m_time must be >= 1, got {self.m_time}")
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError(f"need at least 2 nodes per axis, got {self.n_x}x{self.n_y}")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.y_min < self.y_max:
            raise ValueError(f"y_min must be < y_max, got [{self.y_min}, {self.y_max}]")
        if self.n_zeta < 2:
            raise ValueError(f"n_zeta must be >= 2, got {self.n_zeta}")


@dataclass(frozen=True)
class Grid:
    """Materialized axes: time, x, y (shared by both players) and impulse sizes."""

    spec: GridSpec
    h: float
    times: np.ndarray
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    zeta_grid: np.ndarray  # uniform on [zeta_min, zeta_max] with 0 inserted
    zeta_priority: np.ndarray = field(repr=False)  # candidate order: |zeta| asc, then zeta

    @property
    def n_x(self) -> int:
        return self.x_nodes.size

    @property
    def n_y(self) -> int:
        return self.y_nodes.size

    @property
    def m_time(self) -> int:
        return self.spec.m_time

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])

    @property
    def dy(self) -> float:
        return float(self.y_nodes[1] - self.y_nodes[0])

    def shape(self) -> tuple[int, int, int]:
        return (self.n_x, self.n_y, self.n_y)


def build_grid(spec: GridSpec, params: ModelParams) -> Grid:
    """Lay out the uniform axes and the impulse grid (0 always included)."""
    times = np.linspace(0.0, params.T, spec.m_time + 1)
    x_nodes = np.linspace(spec.x_min, spec.x_max, spec.n_x)
    y_nodes = np.linspace(spec.y_min, spec.y_max, spec.n_y)
    zeta = np.linspace(params.zeta_min, params.zeta_max, spec.n_zeta)
    zeta_grid = np.unique(np.concatenate((zeta, [0.0])))
    priority = np.lexsort((zeta_grid, np.abs(zeta_grid)))
    params.check_cost_bounds(zeta_grid, y_nodes)
    return Grid(
        spec=spec,
        h=params.T / spec.m_time,
        times=times,
        x_nodes=x_nodes,
        y_nodes=y_nodes,
        zeta_grid=zeta_grid,
        zeta_priority=priority,
    )


def fractional_index(q, lo: float, step: float, n: int):
    """Clamped fractional position of q on a uniform axis.

    Returns (i0, w) with i0 integer in [0, n-2] and weight w in [0, 1]; the
    interpolated value is (1-w) v[i0] + w v[i0+1].  Queries outside the axis
    clamp to the end nodes, so clamping is idempotent by construction.
    """
    t = (np.asarray(q, dtype=float) - lo) / step
    t = np.clip(t, 0.0, n - 1.0)
    i0 = np.minimum(t.astype(np.int64), n - 2)
    w = t - i0
    return i0, w


def interp_value(values: np.ndarray, grid: Grid, x, y1, y2):
    """Trilinear interpolation of one time slice at (x, y1, y2), clamped.

    `values` has shape (n_x, n_y, n_y).  Scalar or broadcastable array
    queries are accepted; exact at nodes.
    """
    ix, wx = fractional_index(x, grid.x_nodes[0], grid.dx, grid.n_x)
    i1, w1 = fractional_index(y1, grid.y_nodes[0], grid.dy, grid.n_y)
    i2, w2 = fractional_index(y2, grid.y_nodes[0], grid.dy, grid.n_y)
    ix, i1, i2 = np.broadcast_arrays(ix, i1, i2)
    wx, w1, w2 = np.broadcast_arrays(wx, w1, w2)

    out = np.zeros(ix.shape, dtype=float)
    for dx_, cx in ((0, 1.0 - wx), (1, wx)):
        for d1, c1 in ((0, 1.0 - w1), (1, w1)):
            for d2, c2 in ((0, 1.0 - w2), (1, w2)):
                out += cx * c1 * c2 * values[ix + dx_, i1 + d1, i2 + d2]
    return float(out) if np.ndim(out) == 0 and np.ndim(x) == 0 else out


def payoff_field(player: int, grid: Grid, params: ModelParams, terminal: bool = False) -> np.ndarray:
    """Dense (n_x, n_y, n_y) array of the player's payoff at every node."""
    x = grid.x_nodes[:, None, None]
    y1 = grid.y_nodes[None, :, None]
    y2 = grid.y_nodes[None, None, :]
    own, opp = (y1, y2) if player == 1 else (y2, y1)
    fn = terminal_payoff if terminal else running_payoff
    return np.broadcast_to(fn(player, x, own, opp, params), grid.shape()).copy()


def nearest_node_indices(grid: Grid, x, y1, y2) -> tuple:
    """Indices of the grid node closest to a (possibly off-box) state."""

    def near(q, lo, step, n):
        idx = np.rint((np.asarray(q, dtype=float) - lo) / step).astype(np.int64)
        return np.clip(idx, 0, n - 1)

    return (
        near(x, grid.x_nodes[0], grid.dx, grid.n_x),
        near(y1, grid.y_nodes[0], grid.dy, grid.n_y),
        near(y2, grid.y_nodes[0], grid.dy, grid.n_y),
    )


def write_values_csv(path, grid: Grid, v1: np.ndarray, v2: np.ndarray) -> None:
    """All time slices of both value fields: (t, x, y1, y2, v1, v2) rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "x", "y1", "y2", "v1", "v2"])
        for k, t in enumerate(grid.times):
            for j, x in enumerate(grid.x_nodes):
                for a, ya in enumerate(grid.y_nodes):
                    for b, yb in enumerate(grid.y_nodes):
                        w.writerow(
                            [repr(float(t)), repr(float(x)), repr(float(ya)), repr(float(yb)),
                             repr(float(v1[k, j, a, b])), repr(float(v2[k, j, a, b]))]
                        )


def write_policies_csv(path, grid: Grid, actions, zeta_idx) -> None:
    """Non-terminal policy rows: (t, x, y1, y2, action1, zeta1, action2, zeta2).

    `actions` and `zeta_idx` are per-player pairs of arrays shaped
    (m_time, n_x, n_y, n_y); there is no action at the terminal date.
    """
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "x", "y1", "y2", "action1", "zeta1", "action2", "zeta2"])
        for k in range(grid.m_time):
            t = grid.times[k]
            for j, x in enumerate(grid.x_nodes):
                for a, ya in enumerate(grid.y_nodes):
                    for b, yb in enumerate(grid.y_nodes):
                        row = [repr(float(t)), repr(float(x)), repr(float(ya)), repr(float(yb))]
                        for p in (0, 1):
                            act = int(actions[p][k, j, a, b])
                            zi = int(zeta_idx[p][k, j, a, b])
                            zeta = float(grid.zeta_grid[zi]) if act == INTERVENE else 0.0
                            row += [ACTION_NAMES[act], repr(zeta)]
                        w.writerow(row)
