"""Epsilon-insensitive support vector regression trained by SMO.

The dual is solved in the extended 2n-variable form (alpha, alpha*) with the
single equality constraint handled by maximal-violating-pair working-set
selection, LIBSVM style. RBF kernel throughout: k(a, b) = exp(-gamma ||a-b||^2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SVRHyperparams",
    "SVRModel",
    "svr_fit",
    "svr_predict",
    "kfold_split",
    "grid_search_cv",
    "rbf_kernel",
    "dual_objective",
]

KKT_TOL = 1e-3


@dataclass(frozen=True)
class SVRHyperparams:
    C: float
    gamma: float
    epsilon_tube: float = 0.5

    def __post_init__(self):
        if min(self.C, self.gamma, self.epsilon_tube) <= 0:
            raise ValueError(f"SVR hyperparameters must be > 0: {self}")


def _sq_dists(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    aa = np.sum(A * A, axis=1)
    bb = np.sum(B * B, axis=1)
    return np.maximum(aa[:, None] + bb[None, :] - 2.0 * A @ B.T, 0.0)


def rbf_kernel(A, B, gamma):
    return np.exp(-gamma * _sq_dists(A, B))


def dual_objective(K, y, a, epsilon):
    """0.5 a^T Q a + p^T a in the extended (alpha, alpha*) coordinates."""
    n = len(y)
    beta = a[:n] - a[n:]
    return float(0.5 * beta @ K @ beta + epsilon * np.sum(a) - y @ beta)


def _smo_solve(K, y, C, epsilon, tol=KKT_TOL, max_iter=None):
    """Maximal-violating-pair SMO on the extended dual.

    Returns (a, bias, converged, n_iter, kkt_gap).
    """
    n = len(y)
    if max_iter is None:
        max_iter = max(20000, 100 * n)
    s = np.concatenate([np.ones(n), -np.ones(n)])
    p = epsilon - s * np.tile(y, 2)
    a = np.zeros(2 * n)
    G = p.copy()
    Kdiag = np.diag(K)
    cols = np.arange(2 * n) % n

    it = 0
    while True:
        neg_sG = -s * G
        up = ((s > 0) & (a < C - 1e-12)) | ((s < 0) & (a > 1e-12))
        low = ((s > 0) & (a > 1e-12)) | ((s < 0) & (a < C - 1e-12))
        m = np.max(np.where(up, neg_sG, -np.inf))
        M = np.min(np.where(low, neg_sG, np.inf))
        gap = m - M
        if gap <= tol:
            return a, 0.5 * (m + M), True, it, gap
        if it >= max_iter:
            return a, 0.5 * (m + M), False, it, gap
        i = int(np.argmax(np.where(up, neg_sG, -np.inf)))
        j = int(np.argmin(np.where(low, neg_sG, np.inf)))
        ci, cj = cols[i], cols[j]
        quad = max(Kdiag[ci] + Kdiag[cj] - 2.0 * K[ci, cj], 1e-12)
        t = gap / quad
        # box caps along the feasible direction (a_i moves by s_i t, a_j by -s_j t)
        t = min(t, C - a[i] if s[i] > 0 else a[i])
        t = min(t, a[j] if s[j] > 0 else C - a[j])
        a[i] += s[i] * t
        a[j] -= s[j] * t
        kcol = t * (np.tile(K[:, ci], 2) - np.tile(K[:, cj], 2))
        G += s * kcol
        it += 1


class SVRModel:
    """Fitted model: support vectors, dual coefficients (alpha - alpha*), bias."""

    def __init__(self, support_vectors, coef, bias, hp, converged=True,
                 kkt_gap=0.0, dual_objective_=None):
        self.support_vectors = np.atleast_2d(np.asarray(support_vectors, dtype=float))
        self.coef = np.asarray(coef, dtype=float)
        self.bias = float(bias)
        self.hp = hp
        self.converged = bool(converged)
        self.kkt_gap = float(kkt_gap)
        self.dual_objective_ = dual_objective_

    def predict(self, Xq):
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        if self.coef.size == 0:
            return np.full(Xq.shape[0], self.bias)
        if Xq.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"query dim {Xq.shape[1]} != {self.support_vectors.shape[1]}"
            )
        K = rbf_kernel(Xq, self.support_vectors, self.hp.gamma)
        return K @ self.coef + self.bias

    # --- persistence (round-trip is prediction-exact: repr floats) ----

    def to_dict(self):
        return {
            "hyperparams": {
                "C": self.hp.C,
                "gamma": self.hp.gamma,
                "epsilon_tube": self.hp.epsilon_tube,
            },
            "support_vectors": self.support_vectors.tolist(),
            "coef": self.coef.tolist(),
            "bias": self.bias,
            "converged": self.converged,
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @staticmethod
    def from_dict(d):
        hp = SVRHyperparams(**d["hyperparams"])
        sv = np.asarray(d["support_vectors"], dtype=float)
        if sv.size == 0:
            sv = sv.reshape(0, 0)
        return SVRModel(sv, np.asarray(d["coef"], dtype=float), d["bias"], hp,
                        converged=d.get("converged", True))

    @staticmethod
    def load(path):
        return SVRModel.from_dict(json.loads(Path(path).read_text()))


def svr_fit(X, y, hp, tol=KKT_TOL, max_iter=None, _K=None):
    """Train by SMO. Hitting the iteration cap returns the best-so-far model
    flagged ``converged=False`` instead of raising."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 1 or not np.all(np.isfinite(y)):
        raise ValueError("need n >= 1 finite observations")
    K = rbf_kernel(X, X, hp.gamma) if _K is None else _K
    a, bias, converged, _, gap = _smo_solve(K, y, hp.C, hp.epsilon_tube,
                                            tol=tol, max_iter=max_iter)
    n = len(y)
    beta = a[:n] - a[n:]
    mask = np.abs(beta) > 1e-12
    obj = dual_objective(K, y, a, hp.epsilon_tube)
    sv = X[mask] if mask.any() else np.empty((0, X.shape[1]))
    return SVRModel(sv, beta[mask], bias, hp, converged=converged,
                    kkt_gap=gap, dual_objective_=obj)


def svr_predict(model, x):
    return float(model.predict(np.atleast_2d(x))[0])


def kfold_split(n, k, rng):
    """Shuffled partition of range(n) into k folds with sizes differing by <= 1."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return [np.sort(f) for f in np.array_split(rng.permutation(n), k)]


def grid_search_cv(X, y, C_grid, gamma_grid, k, rng, epsilon_tube=0.5,
                   max_iter=None):
    """Mean held-out RMSE over k shared folds for every (C, gamma) cell.

    Returns (best SVRHyperparams, its cv_rmse). Ties break toward smaller C,
    then smaller gamma; a cell whose fit raises scores +inf.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(C_grid) == 0 or len(gamma_grid) == 0:
        raise ValueError("empty hyperparameter grid")
    folds = kfold_split(len(y), k, rng)
    sq = _sq_dists(X, X)
    best_hp, best_rmse = None, np.inf
    for C in sorted(C_grid):
        for gamma in sorted(gamma_grid):
            hp = SVRHyperparams(C=C, gamma=gamma, epsilon_tube=epsilon_tube)
            Kg = np.exp(-gamma * sq)
            try:
                rmses = []
                for test_idx in folds:
                    train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
                    a, bias, _, _, _ = _smo_solve(
                        Kg[np.ix_(train_idx, train_idx)], y[train_idx],
                        C, epsilon_tube, max_iter=max_iter,
                    )
                    nt = len(train_idx)
                    beta = a[:nt] - a[nt:]
                    pred = Kg[np.ix_(test_idx, train_idx)] @ beta + bias
                    rmses.append(np.sqrt(np.mean((pred - y[test_idx]) ** 2)))
                score = float(np.mean(rmses))
            except Exception:
                score = np.inf
            if score < best_rmse:
                best_rmse, best_hp = score, hp
    return best_hp, best_rmse
