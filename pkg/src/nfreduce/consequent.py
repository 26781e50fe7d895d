"""Consequent side of the TSK system and the hybrid baseline trainer.

Layer 4 weighs a first-order polynomial per active rule (or component) by
its activation; layer 5 sums the weighted outputs. Consequent coefficients
are fit in closed form by least squares; the baseline trainer additionally
runs one gradient-descent step per epoch on the premise parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fuzzy import MF_GBELL, FuzzyModel, firing_strengths, normalize

__all__ = [
    "ConsequentParams",
    "AnfisModel",
    "GradientBlowupError",
    "assemble_design",
    "solve_lse",
    "lse_fit",
    "predict",
    "premise_gradient",
    "hybrid_epoch",
    "train_anfis",
    "predict_anfis",
]

# Tikhonov weight used when the triangular factor signals rank deficiency.
RIDGE_LAMBDA = 1e-8
# Relative diagonal threshold below which the QR path is abandoned.
QR_DIAG_RTOL = 1e-10


class GradientBlowupError(RuntimeError):
    """The premise gradient became non-finite; the epoch was aborted."""


@dataclass
class ConsequentParams:
    """(K, d+1) coefficients; row j holds (p_j1 .. p_jd, r_j)."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 2:
            raise ValueError("coeffs must be a 2-D (K, d+1) array")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")

    @property
    def n_rules(self) -> int:
        return self.coeffs.shape[0]


def assemble_design(X, weights) -> np.ndarray:
    """Stack per-rule blocks ``weight_j * [x, 1]`` into an (N, K*(d+1)) matrix.

    Column ``j*(d+1)+i`` holds ``weights[:, j] * X[:, i]`` for i < d and
    ``weights[:, j]`` for i = d.
    """
    X = np.asarray(X, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if X.ndim != 2 or weights.ndim != 2 or X.shape[0] != weights.shape[0]:
        raise ValueError(
            f"row counts must match: X {X.shape} vs weights {weights.shape}"
        )
    n, d = X.shape
    k = weights.shape[1]
    x_aug = np.concatenate([X, np.ones((n, 1))], axis=1)
    return (weights[:, :, None] * x_aug[:, None, :]).reshape(n, k * (d + 1))


def solve_lse(design, y, ridge: float = RIDGE_LAMBDA) -> np.ndarray:
    """Minimize ||design @ theta - y||_2, flat coefficient vector out.

    Uses a thin QR factorization; when the triangular factor has a diagonal
    entry below QR_DIAG_RTOL times its largest (redundant rules make the
    design nearly rank-deficient) or the system is underdetermined, falls
    back to the ridge-regularized normal equations, solved on whichever
    side of the Gram identity is smaller.
    """
    A = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != y.shape[0]:
        raise ValueError(f"design {A.shape} incompatible with y {y.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in least-squares inputs")
    n, p = A.shape
    if n >= p:
        q, r = np.linalg.qr(A)
        diag = np.abs(np.diag(r))
        if diag.size and diag.min() > QR_DIAG_RTOL * diag.max():
            return np.linalg.solve(r, q.T @ y)
        gram = A.T @ A + ridge * np.eye(p)
        return np.linalg.solve(gram, A.T @ y)
    # underdetermined: dual form, identical to (A'A + ridge I)^-1 A' y
    gram = A @ A.T + ridge * np.eye(n)
    return A.T @ np.linalg.solve(gram, y)


def lse_fit(design, y, n_rules: int) -> ConsequentParams:
    """Least-squares consequents reshaped to (n_rules, d+1) rows."""
    theta = solve_lse(design, y)
    if theta.size % n_rules:
        raise ValueError(
            f"design width {theta.size} is not a multiple of n_rules={n_rules}"
        )
    return ConsequentParams(theta.reshape(n_rules, -1))


def rule_outputs(X, params: ConsequentParams) -> np.ndarray:
    """(N, K) first-order rule outputs p_j . x + r_j before weighting."""
    X = np.asarray(X, dtype=float)
    return X @ params.coeffs[:, :-1].T + params.coeffs[:, -1]


def predict(X, weights, params: ConsequentParams) -> np.ndarray:
    """Layer-5 output: sum over rules of weight * (p . x + r)."""
    weights = np.asarray(weights, dtype=float)
    f = rule_outputs(X, params)
    if weights.shape != f.shape:
        raise ValueError(
            f"weights shape {weights.shape} does not match {f.shape}"
        )
    return np.einsum("nk,nk->n", weights, f)


# ---------------------------------------------------------------------------
# Hybrid baseline trainer
# ---------------------------------------------------------------------------


@dataclass
class AnfisModel:
    """Full-grid TSK system: antecedent model plus consequent coefficients."""

    fuzzy: FuzzyModel
    consequents: ConsequentParams | None = None

    @property
    def n_rules(self) -> int:
        return self.fuzzy.n_rules


# Widths and exponents stay strictly positive under gradient steps.
PARAM_FLOOR = 1e-6


def premise_gradient(fuzzy: FuzzyModel, params: ConsequentParams, X, y):
    """d(MSE)/d(theta) for every MF parameter, consequents held fixed.

    Chain rule through membership -> product firing -> sum normalization ->
    weighted rule outputs. Returns one array per input, shaped like
    ``fuzzy.mf_params[i]``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    rules = fuzzy.grid.rules
    mus = fuzzy.membership(X)
    w = np.ones((n, fuzzy.n_rules))
    for i, mu_i in enumerate(mus):
        w *= mu_i[:, rules[:, i]]
    sums = w.sum(axis=1)
    wbar = w / sums[:, None]
    f = rule_outputs(X, params)
    yhat = np.einsum("nk,nk->n", wbar, f)
    # dMSE/dw[n,k] = (2/N)(yhat-y) * (f[n,k] - yhat[n]) / sums[n]
    err = (2.0 / n) * (yhat - y)
    dmse_dw = err[:, None] * (f - yhat[:, None]) / sums[:, None]
    grads = []
    grad_arrays = fuzzy.membership_grads(X)
    for i in range(fuzzy.n_inputs):
        mu_cols = mus[i][:, rules[:, i]]
        # leave-one-out product of the other inputs' memberships
        ratio = w / np.maximum(mu_cols, 1e-290)
        t_i = dmse_dw * ratio
        m_i = fuzzy.mf_params[i].shape[0]
        per_mf = np.empty((n, m_i))
        for m in range(m_i):
            cols = rules[:, i] == m
            per_mf[:, m] = t_i[:, cols].sum(axis=1)
        grads.append(
            np.stack([(per_mf * d).sum(axis=0) for d in grad_arrays[i]], axis=1)
        )
    return grads


def hybrid_epoch(model: AnfisModel, X, y, lr: float) -> float:
    """One two-pass epoch: forward LSE refit, backward premise GD step.

    Returns the training MSE measured after the consequent refit and before
    the gradient step, so ``lr=0`` reproduces the pure-LSE error and leaves
    the premises untouched. Mutates ``model``; a model must not be trained
    from two threads at once.
    """
    if not (np.isfinite(lr) and lr >= 0):
        raise ValueError(f"learning rate must be finite and >= 0, got {lr}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    wbar = normalize(firing_strengths(X, model.fuzzy)).values
    design = assemble_design(X, wbar)
    model.consequents = lse_fit(design, y, model.n_rules)
    residual = design @ model.consequents.coeffs.ravel() - y
    mse = float(np.mean(residual**2))
    if lr > 0:
        grads = premise_gradient(model.fuzzy, model.consequents, X, y)
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise GradientBlowupError(
                    f"non-finite premise gradient at lr={lr}; "
                    "reduce the learning rate"
                )
        for i, g in enumerate(grads):
            p = model.fuzzy.mf_params[i]
            p -= lr * g
            if model.fuzzy.mf_kind == MF_GBELL:
                np.maximum(p[:, 0], PARAM_FLOOR, out=p[:, 0])
                np.maximum(p[:, 1], PARAM_FLOOR, out=p[:, 1])
            else:
                np.maximum(p[:, 0], PARAM_FLOOR, out=p[:, 0])
    return mse


def train_anfis(model: AnfisModel, X, y, epochs: int = 100, lr: float = 0.01):
    """Run the hybrid loop for ``epochs`` epochs; per-epoch MSE history out."""
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    history = [hybrid_epoch(model, X, y, lr) for _ in range(epochs)]
    return history


def predict_anfis(model: AnfisModel, X) -> np.ndarray:
    """Full five-layer forward pass of a trained baseline model."""
    if model.consequents is None:
        raise ValueError("model has no consequents; train it first")
    wbar = normalize(firing_strengths(X, model.fuzzy)).values
    return predict(X, wbar, model.consequents)
