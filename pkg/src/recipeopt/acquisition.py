"""Expected-improvement acquisition, averaged over GP hyperparameter samples.

The candidate search follows the grid-then-local-refinement recipe: score a
uniform random candidate grid (snapped to the discrete cells), then refine
the real-valued coordinates of the best candidate with L-BFGS-B while the
integer/categorical blocks stay fixed at their snapped values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.optimize import minimize
from scipy.special import ndtr

from .gp import GPPosterior
from .space import RealVar

__all__ = [
    "AcquisitionConfig",
    "expected_improvement",
    "AveragedAcquisition",
    "averaged_acquisition",
    "maximize_acquisition",
]

_INV_SQRT_2PI = 1.0 / np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class AcquisitionConfig:
    grid_size: int = 1000
    local_steps: int = 50
    n_gp_samples: int = 10

    def __post_init__(self):
        if self.grid_size < 1 or self.n_gp_samples < 1:
            raise ValueError("grid_size and n_gp_samples must be >= 1")


def expected_improvement(mean, variance, incumbent):
    """Closed-form E[max(N(mean, variance) - incumbent, 0)], elementwise."""
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    sigma = np.sqrt(np.maximum(variance, 0.0))
    improv = mean - incumbent
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = np.where(sigma > 0, improv / np.where(sigma > 0, sigma, 1.0), 0.0)
        ei = np.where(
            sigma > 0,
            improv * ndtr(z) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * z * z),
            np.maximum(improv, 0.0),
        )
    out = np.maximum(ei, 0.0)
    return float(out) if out.ndim == 0 else out


class AveragedAcquisition:
    """Mean EI across one GP posterior per hyperparameter sample.

    Incumbent is the best target observed so far. Posteriors are fitted once
    at construction and reused for every candidate, so evaluation is pure and
    safe to parallelize. Cross-covariances are computed from a single shared
    difference tensor, which keeps the per-candidate cost low.
    """

    def __init__(self, X, y, hp_samples, space=None, snap_queries=True):
        if len(hp_samples) < 1:
            raise ValueError("need at least one hyperparameter sample")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if space is not None and X.size:
            X = space.snap_latent_array(X)
        self.space = space
        self.snap_queries = snap_queries and space is not None
        self.X = X
        self.posteriors = [GPPosterior(X, y, hp) for hp in hp_samples]
        self._Ainv = [
            cho_solve((p.chol, True), np.eye(p.n), check_finite=False)
            for p in self.posteriors
        ]
        self.incumbent = float(np.max(y))

    def __call__(self, Xq):
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        if self.snap_queries:
            Xq = self.space.snap_latent_array(Xq)
        diff2 = (self.X[:, None, :] - Xq[None, :, :]) ** 2
        total = np.zeros(Xq.shape[0])
        for post, Ainv in zip(self.posteriors, self._Ainv):
            amp2 = post.hp.amplitude_sq
            inv_l2 = 1.0 / np.asarray(post.hp.lengthscales) ** 2
            r2 = diff2 @ inv_l2
            r = np.sqrt(r2)
            k = amp2 * (1 + np.sqrt(5.0) * r + (5.0 / 3.0) * r2) * np.exp(-np.sqrt(5.0) * r)
            mean = post.y_mean + post.alpha @ k
            var = amp2 - np.einsum("nm,nm->m", k, Ainv @ k)
            total += expected_improvement(mean, np.maximum(var, 0.0), self.incumbent)
        return total / len(self.posteriors)


def averaged_acquisition(X, y, hp_samples, x, space=None):
    """Averaged EI at a single latent vector."""
    return float(AveragedAcquisition(X, y, hp_samples, space=space)(np.atleast_2d(x))[0])


def _real_dim_indices(space):
    idx, off = [], 0
    for v in space.variables:
        if isinstance(v, RealVar):
            idx.append(off)
        off += v.latent_size
    return np.asarray(idx, dtype=int)


def maximize_acquisition(space, X, y, hp_samples, cfg, rng):
    """Return the (snapped) latent vector maximizing the averaged acquisition.

    Never raises from the local search: any refinement failure falls back to
    the grid maximizer.
    """
    # candidates are snapped up front; real dims need no snapping during refinement
    acq = AveragedAcquisition(X, y, hp_samples, space=space, snap_queries=False)
    candidates = space.snap_latent_array(rng.random((cfg.grid_size, space.latent_dim)))
    values = acq(candidates)
    best = int(np.argmax(values))
    seed_x, seed_val = candidates[best], values[best]

    free = _real_dim_indices(space)
    if free.size == 0 or cfg.local_steps < 1:
        return seed_x

    fixed = seed_x.copy()

    def neg(z):
        x = fixed.copy()
        x[free] = z
        return -acq(x[None, :])[0]

    try:
        res = minimize(
            neg,
            seed_x[free],
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * free.size,
            options={"maxiter": cfg.local_steps},
        )
        refined = fixed.copy()
        refined[free] = np.clip(res.x, 0.0, 1.0)
        refined = space.snap_latent_array(refined[None, :])[0]
        if acq(refined[None, :])[0] > seed_val:
            return refined
    except Exception:
        pass
    return seed_x
