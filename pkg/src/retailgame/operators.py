"""Nonlocal intervention operators evaluated on grid value fields.

Three per-node operators drive the coupled obstacle problems:

* best_impulse_value: the most a player can get by one immediate impulse on
  her own price, net of the intervention cost (her obstacle).
* endured_value: her value after the opponent applies his own best-response
  impulse, minus the optional endured fixed cost.
* counter_impulse_value: her best impulse given that the opponent's impulse
  (frozen per node) is applied too.

The opponent's impulse is computed once per node from the opponent's own
value field at the pre-intervention state and held fixed; with that
convention, countering and enduring evaluate the value field at the same
doubly-shifted point, so composing the two operators in either order gives
identical results.

All operators act on the trailing (x, y1, y2) axes and broadcast over any
leading axes (e.g. a stacked time dimension).  Off-grid impulse destinations
are clamped to the price box.  Ties in every argmax are broken toward the
smallest |zeta|, then the smaller zeta, so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, fractional_index
from .model import ModelParams, intervention_cost, opponent


def _own_axis(player: int) -> int:
    return -2 if player == 1 else -1


def cost_table(player: int, grid: Grid, params: ModelParams) -> np.ndarray:
    """Intervention cost per (impulse index, own price node)."""
    out = np.empty((grid.zeta_grid.size, grid.n_y))
    for m, z in enumerate(grid.zeta_grid):
        for a, y in enumerate(grid.y_nodes):
            out[m, a] = intervention_cost(player, y, z, params)
    return out


def _impulse_destinations(grid: Grid, params: ModelParams):
    """Clamped own-axis interpolation indices for every (impulse, price node)."""
    dest = grid.y_nodes[None, :] * np.exp(params.lam * grid.zeta_grid[:, None])
    return fractional_index(dest, grid.y_nodes[0], grid.dy, grid.n_y)


def _take_own(v: np.ndarray, idx_row: np.ndarray, player: int) -> np.ndarray:
    """Reindex the player's own price axis by a per-node row of indices."""
    return np.take(v, idx_row, axis=_own_axis(player))


def best_impulse_value(player: int, v: np.ndarray, grid: Grid, params: ModelParams):
    """Maximize v over one own-price impulse, net of cost.

    Returns (values, zeta_idx): per node the best achievable
    v(x, shifted own price, opponent price) - cost and the index into
    ``grid.zeta_grid`` attaining it (priority tie-break).
    """
    i0, w = _impulse_destinations(grid, params)
    costs = cost_table(player, grid, params)
    own = _own_axis(player)
    # weight shape aligned with the own axis: (n_y, 1) for player 1, (n_y,) for 2
    expand = (slice(None), None) if player == 1 else (slice(None),)

    best = None
    best_idx = None
    for m in grid.zeta_priority:
        lo = _take_own(v, i0[m], player)
        hi = _take_own(v, i0[m] + 1, player)
        wm = w[m][expand]
        cand = (1.0 - wm) * lo + wm * hi - costs[m][expand]
        if best is None:
            best = cand
            best_idx = np.full(cand.shape, m, dtype=np.int64)
        else:
            improved = cand > best
            np.copyto(best, cand, where=improved)
            np.copyto(best_idx, m, where=improved)
    assert best is not None and best_idx is not None
    return best, best_idx


def best_response_impulse(player_j: int, v_j: np.ndarray, grid: Grid, params: ModelParams) -> np.ndarray:
    """Impulse index the opponent would choose at each node for himself.

    This is the argmax half of the opponent's own best_impulse_value; the
    enduring player freezes it per node before evaluating her shifted value.
    """
    _, idx = best_impulse_value(player_j, v_j, grid, params)
    return idx


def _opponent_gather(player_i: int, v: np.ndarray, zeta_j_idx: np.ndarray,
                     grid: Grid, params: ModelParams):
    """Per-node interpolation indices along the opponent's price axis."""
    opp_axis = _own_axis(opponent(player_i))
    n_y = grid.n_y
    shape = [1] * v.ndim
    shape[opp_axis] = n_y
    base = grid.y_nodes.reshape(shape)
    dest = base * np.exp(params.lam * grid.zeta_grid[zeta_j_idx])
    i0, w = fractional_index(dest, grid.y_nodes[0], grid.dy, n_y)
    return opp_axis, i0, w


def endured_value(player_i: int, v: np.ndarray, zeta_j_idx: np.ndarray,
                  grid: Grid, params: ModelParams) -> np.ndarray:
    """Value after the opponent's frozen impulse hits his own price.

    Interpolates v along the opponent axis at the shifted opponent price and
    charges the endured fixed cost kappa (0 in the unperturbed game).
    """
    opp_axis, i0, w = _opponent_gather(player_i, v, zeta_j_idx, grid, params)
    lo = np.take_along_axis(v, i0, axis=opp_axis)
    hi = np.take_along_axis(v, i0 + 1, axis=opp_axis)
    return (1.0 - w) * lo + w * hi - params.kappa


def counter_impulse_value(player_i: int, v: np.ndarray, zeta_j_idx: np.ndarray,
                          grid: Grid, params: ModelParams):
    """Best own impulse with the opponent's frozen impulse applied as well.

    Per node: max over own impulses of v interpolated at (x, shifted own
    price, shifted opponent price), minus own cost, minus kappa.  Evaluating
    the doubly-shifted point directly (rather than re-reading a stored
    operator field) is what makes the order of the two shifts irrelevant.

    Returns (values, zeta_idx) like best_impulse_value.
    """
    opp_axis, oj0, ow = _opponent_gather(player_i, v, zeta_j_idx, grid, params)
    i0, w = _impulse_destinations(grid, params)
    costs = cost_table(player_i, grid, params)
    expand = (slice(None), None) if player_i == 1 else (slice(None),)

    best = None
    best_idx = None
    for m in grid.zeta_priority:
        lo = _take_own(v, i0[m], player_i)
        hi = _take_own(v, i0[m] + 1, player_i)
        lo = (1.0 - ow) * np.take_along_axis(lo, oj0, axis=opp_axis) \
            + ow * np.take_along_axis(lo, oj0 + 1, axis=opp_axis)
        hi = (1.0 - ow) * np.take_along_axis(hi, oj0, axis=opp_axis) \
            + ow * np.take_along_axis(hi, oj0 + 1, axis=opp_axis)
        wm = w[m][expand]
        cand = (1.0 - wm) * lo + wm * hi - costs[m][expand]
        if best is None:
            best = cand
            best_idx = np.full(cand.shape, m, dtype=np.int64)
        else:
            improved = cand > best
            np.copyto(best, cand, where=improved)
            np.copyto(best_idx, m, where=improved)
    assert best is not None
    return best - params.kappa, best_idx


def intervention_mask(player_l: int, v_l: np.ndarray, grid: Grid, params: ModelParams,
                      r: float) -> np.ndarray:
    """True where player l does NOT intervene under relaxation threshold r.

    A node is in l's continuation region when his impulse obstacle is more
    than r below his value: best_impulse_value(l) - v_l < -r.
    """
    if r < 0:
        raise ValueError(f"relaxation threshold must be >= 0, got {r}")
    m_vals, _ = best_impulse_value(player_l, v_l, grid, params)
    return (m_vals - v_l) < -r
