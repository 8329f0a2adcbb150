"""Exact Gaussian-process regression on latent vectors.

Matern-5/2 kernel with per-dimension (ARD) lengthscales, Cholesky-based
posterior, log-marginal-likelihood fitting and coordinate-wise slice
sampling of the hyperparameter posterior.

Targets are centered by their mean inside ``gp_fit`` / the fitting helpers
and de-centered on prediction; ``log_marginal_likelihood`` itself is the
plain zero-mean expression and treats its ``y`` argument as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, get_lapack_funcs, solve_triangular
from scipy.optimize import minimize

__all__ = [
    "GPFitError",
    "KernelHyperparams",
    "HyperparamBounds",
    "GPPosterior",
    "matern52",
    "matern52_matrix",
    "gp_fit",
    "gp_predict",
    "log_marginal_likelihood",
    "log_marginal_likelihood_gradient",
    "optimize_hyperparams",
    "sample_hyperparams",
]

_SQRT5 = np.sqrt(5.0)


class GPFitError(RuntimeError):
    """Gram matrix could not be factorized."""


@dataclass(frozen=True)
class KernelHyperparams:
    amplitude_sq: float
    lengthscales: tuple
    noise_var: float

    def __post_init__(self):
        ls = np.asarray(self.lengthscales, dtype=float)
        object.__setattr__(self, "lengthscales", tuple(float(l) for l in ls))
        vals = np.concatenate(([self.amplitude_sq, self.noise_var], ls))
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError(f"hyperparameters must be finite and > 0, got {self}")

    def to_log_vector(self):
        return np.log(np.concatenate(([self.amplitude_sq], self.lengthscales, [self.noise_var])))

    @staticmethod
    def from_log_vector(t):
        t = np.asarray(t, dtype=float)
        v = np.exp(t)
        return KernelHyperparams(float(v[0]), tuple(v[1:-1]), float(v[-1]))


def matern52(a, b, hp):
    """Matern-5/2 covariance between two latent vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ls = np.asarray(hp.lengthscales)
    if ls.shape != a.shape:
        raise ValueError(f"lengthscale count {ls.shape} != input dim {a.shape}")
    r = np.sqrt(np.sum(((a - b) / ls) ** 2))
    return float(hp.amplitude_sq * (1 + _SQRT5 * r + 5 * r * r / 3) * np.exp(-_SQRT5 * r))


def matern52_matrix(A, B, hp):
    """Cross-covariance matrix between row sets A (n,d) and B (m,d)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    ls = np.asarray(hp.lengthscales)
    diff = (A[:, None, :] - B[None, :, :]) / ls
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return hp.amplitude_sq * (1 + _SQRT5 * r + 5 * r * r / 3) * np.exp(-_SQRT5 * r)


# jitter schedule: zero first, then 1e-10*amp2 escalating x10 up to 1e-4*amp2
def _chol_with_jitter(A, amp2):
    jitters = [0.0] + list(amp2 * 10.0 ** np.arange(-10, -3.9))
    n = A.shape[0]
    last = None
    for j in jitters:
        try:
            return cholesky(A + j * np.eye(n), lower=True), j
        except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy raises its own
            last = exc
        except Exception as exc:
            last = exc
    raise GPFitError(
        "Gram matrix K + noise*I is not positive definite even after jitter "
        f"escalation to {jitters[-1]:.3g}; the Gram condition is too poor"
    ) from last


class GPPosterior:
    """Fitted GP: training data, Cholesky factor of K + noise*I, weights.

    Immutable once built; safe to share read-only across workers.
    """

    def __init__(self, X, y, hp, space=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} inputs vs {y.shape[0]} targets")
        if y.size and not np.all(np.isfinite(y)):
            raise ValueError("targets must be finite")
        self.space = space
        if space is not None and X.size:
            X = space.snap_latent_array(X)
        self.X = X
        self.y = y
        self.hp = hp
        self.n = X.shape[0]
        self.y_mean = float(np.mean(y)) if self.n else 0.0
        if self.n:
            K = matern52_matrix(X, X, hp)
            A = K + hp.noise_var * np.eye(self.n)
            self.chol, self.jitter = _chol_with_jitter(A, hp.amplitude_sq)
            resid = y - self.y_mean
            self.alpha = cho_solve((self.chol, True), resid)
        else:
            self.chol = np.zeros((0, 0))
            self.jitter = 0.0
            self.alpha = np.zeros(0)

    def predict(self, Xq):
        """Posterior mean and variance at query rows Xq (m,d) -> (means, vars)."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        d = len(self.hp.lengthscales)
        if Xq.shape[1] != d:
            raise ValueError(f"query dim {Xq.shape[1]} != {d}")
        if self.space is not None:
            Xq = self.space.snap_latent_array(Xq)
        if self.n == 0:
            m = Xq.shape[0]
            return np.zeros(m) + self.y_mean, np.full(m, self.hp.amplitude_sq)
        ks = matern52_matrix(self.X, Xq, self.hp)
        mean = self.y_mean + ks.T @ self.alpha
        v = solve_triangular(self.chol, ks, lower=True)
        var = self.hp.amplitude_sq - np.einsum("ij,ij->j", v, v)
        # numerical clamp; anything below -1e-10 would indicate a real bug
        var = np.where(var > 0, var, 0.0)
        return mean, var


def gp_fit(X, y, hp, space=None):
    return GPPosterior(X, y, hp, space=space)


def gp_predict(post, x):
    mean, var = post.predict(np.atleast_2d(x))
    return float(mean[0]), float(var[0])


def log_marginal_likelihood(X, y, hp):
    """Zero-mean Gaussian log marginal likelihood of y under the kernel."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = y.size
    K = matern52_matrix(X, X, hp)
    A = K + hp.noise_var * np.eye(n)
    L, _ = _chol_with_jitter(A, hp.amplitude_sq)
    alpha = cho_solve((L, True), y)
    return float(
        -0.5 * np.dot(y, alpha)
        - np.sum(np.log(np.diag(L)))
        - 0.5 * n * np.log(2 * np.pi)
    )


def log_marginal_likelihood_gradient(X, y, hp):
    """Gradient of the zero-mean LML w.r.t. (amplitude_sq, lengthscales, noise_var).

    Returned as a flat vector ordered like KernelHyperparams.to_log_vector
    but in raw (not log) parameters.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    ls = np.asarray(hp.lengthscales)
    diff2 = (X[:, None, :] - X[None, :, :]) ** 2
    r2 = diff2 @ (1.0 / ls**2)
    r = np.sqrt(r2)
    e = np.exp(-_SQRT5 * r)
    K = hp.amplitude_sq * (1 + _SQRT5 * r + 5 * r2 / 3) * e
    A = K + hp.noise_var * np.eye(n)
    L, _ = _chol_with_jitter(A, hp.amplitude_sq)
    alpha = cho_solve((L, True), y)
    Ainv = cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - Ainv

    grads = np.empty(d + 2)
    grads[0] = 0.5 * np.sum(W * (K / hp.amplitude_sq))
    # dK/dr = -(5/3) * amp2 * r * (1 + sqrt5 r) * exp(-sqrt5 r); dr/dl_i = -diff2_i / (l_i^3 r)
    base = (5.0 / 3.0) * hp.amplitude_sq * (1 + _SQRT5 * r) * e
    for i in range(d):
        dK = base * diff2[:, :, i] / ls[i] ** 3
        grads[1 + i] = 0.5 * np.sum(W * dK)
    grads[-1] = 0.5 * np.trace(W)
    return grads


# --- hyperparameter fitting -------------------------------------------


@dataclass(frozen=True)
class HyperparamBounds:
    """Box constraints (inclusive) in raw hyperparameter units."""

    amplitude_sq: tuple
    lengthscale: tuple
    noise_var: tuple

    @staticmethod
    def from_targets(y):
        vy = float(np.var(np.asarray(y, dtype=float)))
        if vy <= 0:
            vy = 1.0
        return HyperparamBounds(
            amplitude_sq=(1e-3 * vy, 1e3 * vy),
            lengthscale=(1e-3, 10.0),
            noise_var=(1e-8, vy),
        )

    def log_box(self, d):
        lo = np.log(np.concatenate(
            ([self.amplitude_sq[0]], [self.lengthscale[0]] * d, [self.noise_var[0]])
        ))
        hi = np.log(np.concatenate(
            ([self.amplitude_sq[1]], [self.lengthscale[1]] * d, [self.noise_var[1]])
        ))
        return lo, hi

    def contains(self, hp):
        if not self.amplitude_sq[0] <= hp.amplitude_sq <= self.amplitude_sq[1]:
            return False
        if not self.noise_var[0] <= hp.noise_var <= self.noise_var[1]:
            return False
        return all(self.lengthscale[0] <= l <= self.lengthscale[1] for l in hp.lengthscales)


class _LMLWorkspace:
    """LML evaluations for fixed (X, y) with per-dimension squared diffs cached.

    Uses raw LAPACK calls; this sits in the slice-sampling inner loop.
    """

    def __init__(self, X, y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.y = np.asarray(y, dtype=float)
        self.n, self.d = X.shape
        self.diff2 = (X[:, None, :] - X[None, :, :]) ** 2
        self._diag = np.arange(self.n) * (self.n + 1)
        self._const = -0.5 * self.n * np.log(2 * np.pi)
        self._potrf, self._trtrs = get_lapack_funcs(
            ("potrf", "trtrs"), (np.empty((1, 1)), )
        )

    def lml_log(self, t):
        """LML at log-hyperparameter vector t; -inf on factorization failure."""
        amp2 = np.exp(t[0])
        inv_l2 = np.exp(-2.0 * t[1:-1])
        noise = np.exp(t[-1])
        r2 = self.diff2 @ inv_l2
        r = np.sqrt(r2)
        A = amp2 * (1 + _SQRT5 * r + (5.0 / 3.0) * r2) * np.exp(-_SQRT5 * r)
        A.ravel()[self._diag] += noise + 1e-10 * amp2
        L, info = self._potrf(A, lower=1, overwrite_a=1, clean=0)
        if info != 0:
            return -np.inf
        z, info = self._trtrs(L, self.y, lower=1)
        if info != 0:
            return -np.inf
        return float(
            -0.5 * np.dot(z, z) - np.sum(np.log(L.ravel()[self._diag])) + self._const
        )


def optimize_hyperparams(X, y, restarts, rng, bounds=None):
    """Maximize the LML over the bound box; best of `restarts` random starts.

    Targets are centered internally (consistent with gp_fit).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 observations to fit hyperparameters")
    yc = y - np.mean(y)
    if bounds is None:
        bounds = HyperparamBounds.from_targets(y)
    d = X.shape[1]
    lo, hi = bounds.log_box(d)
    ws = _LMLWorkspace(X, yc)

    def neg(t):
        val = ws.lml_log(t)
        return np.inf if not np.isfinite(val) else -val

    def neg_grad(t):
        hp = KernelHyperparams.from_log_vector(t)
        try:
            g = log_marginal_likelihood_gradient(X, yc, hp)
        except GPFitError:
            return np.zeros_like(t)
        return -g * np.exp(t)  # chain rule to log space

    best_t, best_val, last_err = None, -np.inf, None
    for _ in range(restarts):
        t0 = rng.uniform(lo, hi)
        try:
            res = minimize(neg, t0, jac=neg_grad, method="L-BFGS-B",
                           bounds=list(zip(lo, hi)))
        except Exception as exc:
            last_err = exc
            continue
        val = -res.fun
        if np.isfinite(val) and val > best_val:
            best_val, best_t = val, res.x
    if best_t is None:
        raise GPFitError(f"all {restarts} hyperparameter restarts failed: {last_err}")
    return KernelHyperparams.from_log_vector(best_t)


def _slice_sweep(ws, t, lo, hi, ft, rng, width=1.0):
    """One coordinate-wise slice-sampling sweep in log-hyperparameter space.

    Step-out is clipped to the bound box, so a sweep never fails.
    """
    for i in range(t.size):
        level = ft - rng.exponential()
        u = rng.uniform()
        left = max(t[i] - width * u, lo[i])
        right = min(left + width, hi[i])

        def f_at(x):
            told = t[i]
            t[i] = x
            val = ws.lml_log(t)
            t[i] = told
            return val

        steps = 6
        while steps > 0 and left > lo[i] and f_at(left) > level:
            left = max(left - width, lo[i])
            steps -= 1
        steps = 6
        while steps > 0 and right < hi[i] and f_at(right) > level:
            right = min(right + width, hi[i])
            steps -= 1
        while True:
            x1 = rng.uniform(left, right)
            fx1 = f_at(x1)
            if fx1 > level or (right - left) < 1e-12:
                t[i] = x1
                ft = fx1
                break
            if x1 < t[i]:
                left = x1
            else:
                right = x1
    return t, ft


def sample_hyperparams(X, y, n_samples, rng, burn_in=50, init=None, bounds=None):
    """Draw hyperparameters from LML + log-uniform box prior by slice sampling.

    Deterministic given the generator state. Targets centered internally.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 observations to sample hyperparameters")
    yc = y - np.mean(y)
    if bounds is None:
        bounds = HyperparamBounds.from_targets(y)
    d = X.shape[1]
    lo, hi = bounds.log_box(d)
    ws = _LMLWorkspace(X, yc)

    if init is not None:
        t = np.clip(init.to_log_vector(), lo, hi)
    else:
        vy = max(float(np.var(yc)), 1e-12)
        t = np.clip(
            np.log(np.concatenate(([vy], [0.5] * d, [0.05 * vy]))), lo, hi
        )
    ft = ws.lml_log(t)
    if not np.isfinite(ft):
        t = 0.5 * (lo + hi)
        ft = ws.lml_log(t)

    samples = []
    for sweep in range(burn_in + n_samples):
        t, ft = _slice_sweep(ws, t, lo, hi, ft, rng)
        if sweep >= burn_in:
            samples.append(KernelHyperparams.from_log_vector(t))
    return samples
