"""Optimal quantization of the standard normal, and quantized GBM transitions.

The one-step conditional expectations of the backward scheme are computed
against a finite-support approximation of the Gaussian increment: n points
u_l with probabilities P_l such that each u_l is the conditional mean of
N(0,1) over its Voronoi cell (the stationarity / Lloyd fixed point).  The
grid is computed here deterministically rather than loaded from published
tables, so builds are hermetic and the moments can be verified in-process.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import ndtr, ndtri

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / _SQRT_2PI


class QuantizerBuildError(RuntimeError):
    """Raised when the fixed-point iteration fails to reach tolerance."""


@dataclass(frozen=True)
class Quantizer:
    """n-point stationary quantizer of N(0,1): levels and cell probabilities."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.points.size

    def moments(self) -> tuple[float, float, float]:
        """(total mass, mean, second moment) of the discrete law."""
        return quantizer_moments(self)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["level", "weight"])
            for u, p in zip(self.points, self.weights):
                w.writerow([repr(float(u)), repr(float(p))])

    @classmethod
    def from_csv(cls, path) -> "Quantizer":
        pts, wts = [], []
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or set(reader.fieldnames) < {"level", "weight"}:
                raise ValueError(f"{path}: expected columns 'level,weight'")
            for row in reader:
                pts.append(float(row["level"]))
                wts.append(float(row["weight"]))
        if not pts:
            raise ValueError(f"{path}: empty quantizer file")
        return cls(points=np.asarray(pts), weights=np.asarray(wts))


def _cell_edges(points: np.ndarray) -> np.ndarray:
    """Voronoi cell edges: midpoints between consecutive levels, padded by +-inf."""
    inner = 0.5 * (points[:-1] + points[1:])
    return np.concatenate(([-np.inf], inner, [np.inf]))

def _cell_masses(edges: np.ndarray) -> np.ndarray:
    return np.diff(ndtr(edges))


def _cell_centroids(edges: np.ndarray, masses: np.ndarray) -> np.ndarray:
    # E[Z; a<Z<b] = phi(a) - phi(b); phi(+-inf) = 0.
    dens = np.where(np.isfinite(edges), _phi(np.where(np.isfinite(edges), edges, 0.0)), 0.0)
    num = dens[:-1] - dens[1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        cent = num / masses
    return cent


def _stationarity_residual(points: np.ndarray) -> float:
    edges = _cell_edges(points)
    cent = _cell_centroids(edges, _cell_masses(edges))
    return float(np.max(np.abs(points - cent)))


def _newton_step(points: np.ndarray) -> np.ndarray:
    """One Newton step on the distortion gradient g_l = u_l P_l - m_l.

    The Jacobian is tridiagonal because each cell mass/centroid depends only
    on the neighbouring levels through the shared midpoints.
    """
    n = points.size
    edges = _cell_edges(points)
    masses = _cell_masses(edges)
    dens = np.where(np.isfinite(edges), _phi(np.where(np.isfinite(edges), edges, 0.0)), 0.0)
    first_mom = dens[:-1] - dens[1:]
    grad = points * masses - first_mom

    # d(grad_l)/d(u_l); the (c - u) factors are cell half-widths at the edges.
    up_gap = np.where(np.isfinite(edges[1:]), edges[1:] - points, 0.0)
    dn_gap = np.where(np.isfinite(edges[:-1]), points - edges[:-1], 0.0)
    diag = masses - 0.5 * up_gap * dens[1:] - 0.5 * dn_gap * dens[:-1]
    upper = -0.5 * up_gap * dens[1:]   # d(grad_l)/d(u_{l+1})
    lower = -0.5 * dn_gap * dens[:-1]  # d(grad_l)/d(u_{l-1})

    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    delta = solve_banded((1, 1), ab, grad)
    return points - delta


def build_gaussian_quantizer(n: int, tol: float = 1e-10, max_iter: int = 10_000) -> Quantizer:
    """Compute the n-point stationary quantizer of N(0,1).

    Deterministic: quantile-spread initial levels, Lloyd sweeps to get into
    the Newton basin, then Newton polish on the stationarity equations.  The
    returned levels are symmetrized about 0 so the mirror invariants hold
    exactly; weights are the Gaussian masses of the final Voronoi cells.

    Raises QuantizerBuildError if the residual is still above `tol` after
    `max_iter` total iterations.
    """
    if n < 1:
        raise ValueError(f"quantizer size must be >= 1, got {n}")
    if n == 1:
        return Quantizer(points=np.zeros(1), weights=np.ones(1))

    points = ndtri((2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n))

    residual = math.inf
    for it in range(max_iter):
        if it < 20:
            edges = _cell_edges(points)
            new_points = _cell_centroids(edges, _cell_masses(edges))
        else:
            new_points = _newton_step(points)
        move = float(np.max(np.abs(new_points - points)))
        points = new_points
        residual = _stationarity_residual(points)
        if move <= tol and residual <= tol:
            break
    else:
        raise QuantizerBuildError(
            f"quantizer(n={n}) did not converge in {max_iter} iterations; "
            f"last stationarity residual {residual:.3e}"
        )

    points = 0.5 * (points - points[::-1])  # enforce exact mirror symmetry
    weights = _cell_masses(_cell_edges(points))
    weights = 0.5 * (weights + weights[::-1])
    if np.any(np.diff(points) <= 0):
        raise QuantizerBuildError(f"quantizer(n={n}) produced non-increasing levels")
    return Quantizer(points=points, weights=weights)


def quantizer_moments(q: Quantizer) -> tuple[float, float, float]:
    """(sum P, sum P*u, sum P*u^2) - should be close to (1, 0, just under 1)."""
    mass = float(np.sum(q.weights))
    mean = float(np.sum(q.weights * q.points))
    second = float(np.sum(q.weights * q.points**2))
    return mass, mean, second


def validate_quantizer(q: Quantizer, tol: float = 1e-8) -> None:
    """Raise ValueError if the mass/symmetry/stationarity invariants fail."""
    mass, mean, _ = quantizer_moments(q)
    if abs(mass - 1.0) > 1e-12:
        raise ValueError(f"quantizer weights sum to {mass!r}, expected 1")
    if abs(mean) > 1e-12:
        raise ValueError(f"quantizer mean is {mean!r}, expected 0")
    if np.any(np.diff(q.points) <= 0):
        raise ValueError("quantizer levels must be strictly increasing")
    if np.max(np.abs(q.points + q.points[::-1])) > tol:
        raise ValueError("quantizer levels are not symmetric about 0")
    if np.max(np.abs(q.weights - q.weights[::-1])) > tol:
        raise ValueError("quantizer weights are not symmetric")
    if _stationarity_residual(q.points) > max(tol, 1e-8):
        raise ValueError("quantizer levels are not stationary (not cell centroids)")


def gbm_successors(x: float, h: float, mu: float, sigma: float, q: Quantizer):
    """One-step lognormal successors of x and their probabilities.

    Returns (prices, weights): prices[l] = x * exp((mu - sigma^2/2) h
    + sigma sqrt(h) u_l).  x = 0 is absorbing (all successors 0).
    """
    if h <= 0:
        raise ValueError(f"time step must be > 0, got {h}")
    drift = (mu - 0.5 * sigma * sigma) * h
    prices = x * np.exp(drift + sigma * math.sqrt(h) * q.points)
    return prices, q.weights.copy()
