"""Market model: parameters, payoffs, impulse map and intervention costs.

Two retailers buy energy at the wholesale price x and resell at their own
posted prices y1, y2.  Each player's instantaneous profit is her margin times
her market share; the share is a piecewise-linear function of the price
spread.  A player moves her price only through discrete impulses
y -> y * exp(lam * zeta), paying a fixed cost per intervention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

#: Sentinel for a disabled payoff cap (``k1``/``k2``).
CAP_DISABLED = math.inf


def opponent(player: int) -> int:
    """Return the other player's id (1 <-> 2)."""
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player}")
    return 3 - player


@dataclass(frozen=True)
class ModelParams:
    """All market and game constants.

    Attributes:
        T: horizon in years.
        mu: wholesale price drift (1/year).
        sigma: wholesale price volatility (1/sqrt(year)), > 0.
        rho1, rho2: per-player discount rates (1/year), >= 0.
        lam: impulse scale; an impulse zeta multiplies the price by exp(lam*zeta).
        zeta_min, zeta_max: impulse-size bounds, zeta_min < 0 < zeta_max.
        delta: market-share width (price spread at which a player loses the
            whole market).
        k1, k2: payoff caps; profit rate is capped at k_i * x.  ``math.inf``
            disables the cap (the default configuration).
        phi1, phi2: constant cost per intervention, > 0.
        kappa: fixed cost a player pays when *enduring* the opponent's
            intervention; 0 recovers the unperturbed game.
    """

    T: float = 1.0
    mu: float = 0.0
    sigma: float = 0.5
    rho1: float = 0.0
    rho2: float = 0.0
    lam: float = 0.1
    zeta_min: float = -2.2
    zeta_max: float = 1.8
    delta: float = 40.0
    k1: float = CAP_DISABLED
    k2: float = CAP_DISABLED
    phi1: float = 5.0
    phi2: float = 2.5
    kappa: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not (self.zeta_min < 0 < self.zeta_max):
            raise ValueError(
                f"need zeta_min < 0 < zeta_max, got [{self.zeta_min}, {self.zeta_max}]"
            )
        for name in ("rho1", "rho2", "kappa", "k1", "k2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("phi1", "phi2"):
            if not getattr(self, name) > 0:
                raise ValueError(
                    f"{name} must be a positive intervention cost, got {getattr(self, name)}"
                )

    def rho(self, player: int) -> float:
        return self.rho1 if player == 1 else self.rho2

    def cap(self, player: int) -> float:
        return self.k1 if player == 1 else self.k2

    def phi(self, player: int) -> float:
        return self.phi1 if player == 1 else self.phi2

    def with_kappa(self, kappa: float) -> "ModelParams":
        return replace(self, kappa=kappa)

    def check_cost_bounds(self, zeta_grid, y_grid) -> tuple[float, float]:
        """Sample intervention costs over the impulse and price grids.

        Returns the (min, max) sampled cost and raises if the lower bound is
        not strictly positive: a free intervention would let a player churn
        impulses for nothing and the game degenerates.
        """
        lo = math.inf
        hi = -math.inf
        for player in (1, 2):
            for y in y_grid:
                for z in zeta_grid:
                    c = intervention_cost(player, y, z, self)
                    lo = min(lo, c)
                    hi = max(hi, c)
        if not lo > 0:
            raise ValueError(f"intervention cost must be bounded away from 0, found {lo}")
        return lo, hi


def market_share(y_own, y_opp, delta: float):
    """Fraction of the market captured at the posted price pair.

    1 when undercutting the opponent by delta or more, 0 when overpricing by
    delta or more, linear in between.  The two players' shares sum to 1
    exactly (the linear branch is written as 0.5 - spread/(2*delta), whose
    rounding errors cancel in the cross sum).  Vectorizes over numpy inputs.
    """
    d = np.subtract(y_own, y_opp)
    share = np.clip(0.5 - d / (2.0 * delta), 0.0, 1.0)
    return float(share) if np.ndim(share) == 0 else share


def impulse_map(y, zeta: float, lam: float):
    """New posted price after an impulse of size zeta: y * exp(lam*zeta).

    Multiplicative, so a zero price is absorbing: no impulse can revive it.
    """
    return y * math.exp(lam * zeta)


def running_payoff(player: int, x, y_own, y_opp, params: ModelParams):
    """Profit rate of `player`: margin times market share, optionally capped.

    The cap k_i * x is the regulatory truncation tying retail profits to the
    wholesale level; it is disabled by default.  Vectorizes over numpy inputs.
    """
    raw = np.multiply(np.subtract(y_own, x), market_share(y_own, y_opp, params.delta))
    k = params.cap(player)
    if k != CAP_DISABLED:
        raw = np.minimum(raw, k * np.asarray(x, dtype=float))
    return float(raw) if np.ndim(raw) == 0 else raw


def terminal_payoff(player: int, x, y_own, y_opp, params: ModelParams):
    """Terminal payoff; identical to the profit rate in the reference setup.

    Kept separate so an alternative terminal valuation can be plugged in
    without touching the running flow.
    """
    return running_payoff(player, x, y_own, y_opp, params)


def intervention_cost(player: int, y: float, zeta: float, params: ModelParams) -> float:
    """Cost of one intervention; constant per player in the reference setup."""
    return params.phi(player)
