"""Antecedent side of a grid-partitioned TSK fuzzy system.

Covers membership functions (generalized bell and Gaussian), their
analytic parameter gradients, rule-grid construction as the full
Cartesian product of per-input membership functions, rule firing
strengths (product or min t-norm), and per-sample sum-normalization
of the firing strengths.

Everything here is a pure function of its inputs; models are plain
data containers and can be evaluated concurrently over sample blocks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateFiringError",
    "GBellParams",
    "GaussianParams",
    "InputSpec",
    "RuleGrid",
    "FuzzyModel",
    "FiringMatrix",
    "gbell_mu",
    "gbell_grad",
    "gaussian_mu",
    "gaussian_grad",
    "build_grid",
    "firing_strengths",
    "normalize",
]

# Row sums of a firing matrix below this are treated as "no rule fired".
# Bell/Gaussian memberships are strictly positive, so only catastrophic
# underflow can trigger it.
ROW_SUM_FLOOR = 1e-300

MF_GBELL = "gbell"
MF_GAUSSIAN = "gaussian"


class DegenerateFiringError(ValueError):
    """A sample activated no rule: its firing-strength row sums to ~0."""


# ---------------------------------------------------------------------------
# Membership functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GBellParams:
    """Generalized bell membership: mu(x) = 1 / (1 + |(x - c)/a|^(2b)).

    a : width, in feature units, > 0
    b : shape exponent, dimensionless, > 0
    c : center, in feature units
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"gbell width a must be finite and > 0, got {self.a}")
        if not (np.isfinite(self.b) and self.b > 0):
            raise ValueError(f"gbell exponent b must be finite and > 0, got {self.b}")
        if not np.isfinite(self.c):
            raise ValueError(f"gbell center c must be finite, got {self.c}")


@dataclass(frozen=True)
class GaussianParams:
    """Gaussian membership: mu(x) = exp(-(x - c)^2 / (2 sigma^2))."""

    sigma: float
    c: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"gaussian sigma must be finite and > 0, got {self.sigma}")
        if not np.isfinite(self.c):
            raise ValueError(f"gaussian center c must be finite, got {self.c}")


def _gbell_mu(x, a, b, c):
    u = np.square((np.asarray(x, dtype=float) - c) / a)
    with np.errstate(over="ignore"):
        t = u**b
    return 1.0 / (1.0 + t)


def _gbell_grad(x, a, b, c):
    x = np.asarray(x, dtype=float)
    diff = x - c
    u = np.square(diff / a)
    with np.errstate(over="ignore"):
        t = u**b
    denom = np.square(1.0 + t)
    on_center = u == 0.0
    # ln(u) and 1/(x - c) are singular at the center; every partial has
    # limit 0 there, so substitute safe operands and mask afterwards.
    safe_u = np.where(on_center, 1.0, u)
    safe_diff = np.where(on_center, 1.0, diff)
    d_a = 2.0 * b * t / (a * denom)
    d_b = np.where(on_center, 0.0, -t * np.log(safe_u) / denom)
    d_c = np.where(on_center, 0.0, 2.0 * b * t / (safe_diff * denom))
    return d_a, d_b, d_c


def _gaussian_mu(x, sigma, c):
    x = np.asarray(x, dtype=float)
    return np.exp(-np.square(x - c) / (2.0 * sigma**2))


def _gaussian_grad(x, sigma, c):
    x = np.asarray(x, dtype=float)
    diff = x - c
    mu = np.exp(-np.square(diff) / (2.0 * sigma**2))
    d_sigma = mu * np.square(diff) / sigma**3
    d_c = mu * diff / sigma**2
    return d_sigma, d_c


def gbell_mu(x, p: GBellParams):
    """Membership degree in (0, 1]; equals 1 exactly at x = c."""
    return _gbell_mu(x, p.a, p.b, p.c)


def gbell_grad(x, p: GBellParams):
    """Analytic partials (d mu/da, d mu/db, d mu/dc).

    At x = c the b-partial contains t*ln(u) with t -> 0, u -> 0; the limit
    is 0 and all three partials are returned as exactly 0 there.
    """
    return _gbell_grad(x, p.a, p.b, p.c)


def gaussian_mu(x, p: GaussianParams):
    """Gaussian membership degree in (0, 1]."""
    return _gaussian_mu(x, p.sigma, p.c)


def gaussian_grad(x, p: GaussianParams):
    """Analytic partials (d mu/dsigma, d mu/dc)."""
    return _gaussian_grad(x, p.sigma, p.c)


# ---------------------------------------------------------------------------
# Grid partitioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InputSpec:
    """Domain and membership count for one input feature."""

    lo: float
    hi: float
    mf_count: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("input bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"input range must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if self.mf_count < 1:
            raise ValueError(f"mf_count must be >= 1, got {self.mf_count}")


@dataclass(frozen=True)
class RuleGrid:
    """Full Cartesian product of per-input MF indices, lexicographic order.

    ``rules`` is an (M, d) integer array; row j holds the MF index used by
    rule j for each input.
    """

    mf_counts: tuple[int, ...]
    rules: np.ndarray

    @property
    def n_rules(self) -> int:
        return self.rules.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.rules.shape[1]

    @classmethod
    def from_counts(cls, mf_counts) -> "RuleGrid":
        counts = tuple(int(m) for m in mf_counts)
        rules = np.array(
            list(itertools.product(*(range(m) for m in counts))), dtype=np.int64
        ).reshape(-1, len(counts))
        return cls(mf_counts=counts, rules=rules)


def _init_mf_params(spec: InputSpec, mf_kind: str) -> np.ndarray:
    """Evenly spaced centers with ~50% neighbor overlap.

    For m >= 2: centers lo + i*(hi-lo)/(m-1), width (hi-lo)/(2(m-1)).
    For m == 1: center at the midpoint, width (hi-lo)/2. The bell shape
    exponent is fixed at 2; the Gaussian reuses the same width as sigma.
    """
    m = spec.mf_count
    span = spec.hi - spec.lo
    if m >= 2:
        centers = spec.lo + np.arange(m) * span / (m - 1)
        width = span / (2.0 * (m - 1))
    else:
        centers = np.array([0.5 * (spec.lo + spec.hi)])
        width = span / 2.0
    if mf_kind == MF_GBELL:
        params = np.column_stack([np.full(m, width), np.full(m, 2.0), centers])
    elif mf_kind == MF_GAUSSIAN:
        params = np.column_stack([np.full(m, width), centers])
    else:
        raise ValueError(f"unknown mf kind: {mf_kind!r}")
    return params


@dataclass
class FuzzyModel:
    """Grid-partitioned antecedent: per-input MF parameters plus the rule grid.

    ``mf_params[i]`` is an (mf_count_i, 3) array of [a, b, c] rows for the
    bell family or (mf_count_i, 2) of [sigma, c] for the Gaussian family.
    """

    input_specs: list[InputSpec]
    mf_kind: str
    mf_params: list[np.ndarray]
    grid: RuleGrid

    @property
    def n_inputs(self) -> int:
        return len(self.input_specs)

    @property
    def n_rules(self) -> int:
        return self.grid.n_rules

    def copy(self) -> "FuzzyModel":
        return FuzzyModel(
            input_specs=list(self.input_specs),
            mf_kind=self.mf_kind,
            mf_params=[p.copy() for p in self.mf_params],
            grid=self.grid,
        )

    def membership(self, X: np.ndarray) -> list[np.ndarray]:
        """Per-input membership matrices, each (N, mf_count_i)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ValueError(
                f"expected X with {self.n_inputs} columns, got shape {X.shape}"
            )
        out = []
        for i, params in enumerate(self.mf_params):
            col = X[:, i][:, None]
            if self.mf_kind == MF_GBELL:
                out.append(_gbell_mu(col, params[:, 0], params[:, 1], params[:, 2]))
            else:
                out.append(_gaussian_mu(col, params[:, 0], params[:, 1]))
        return out

    def membership_grads(self, X: np.ndarray) -> list[tuple[np.ndarray, ...]]:
        """Per-input tuples of partial-derivative matrices, each (N, mf_count_i)."""
        X = np.asarray(X, dtype=float)
        out = []
        for i, params in enumerate(self.mf_params):
            col = X[:, i][:, None]
            if self.mf_kind == MF_GBELL:
                out.append(_gbell_grad(col, params[:, 0], params[:, 1], params[:, 2]))
            else:
                out.append(_gaussian_grad(col, params[:, 0], params[:, 1]))
        return out


def build_grid(specs, mf_kind: str = MF_GBELL) -> FuzzyModel:
    """Build the full-grid antecedent for the given input specs.

    The rule base enumerates the Cartesian product of per-input MF indices
    exactly once, in lexicographic order, so the rule count is the product
    of the per-input MF counts.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("at least one input spec is required")
    params = [_init_mf_params(s, mf_kind) for s in specs]
    grid = RuleGrid.from_counts([s.mf_count for s in specs])
    return FuzzyModel(input_specs=specs, mf_kind=mf_kind, mf_params=params, grid=grid)


# ---------------------------------------------------------------------------
# Firing strengths
# ---------------------------------------------------------------------------


@dataclass
class FiringMatrix:
    """(N, M) rule activations; ``normalized`` marks rows that sum to 1."""

    values: np.ndarray
    normalized: bool = False


def firing_strengths(X, model: FuzzyModel, tnorm: str = "product") -> FiringMatrix:
    """Layer-2 rule activations: t-norm of the antecedent memberships.

    The default product t-norm is the differentiable choice used by the
    hybrid trainer; ``tnorm="min"`` is available for inference-only use.
    """
    mus = model.membership(X)
    rules = model.grid.rules
    n = np.asarray(X).shape[0]
    w = np.ones((n, model.n_rules))
    if tnorm == "product":
        for i, mu_i in enumerate(mus):
            w *= mu_i[:, rules[:, i]]
    elif tnorm == "min":
        for i, mu_i in enumerate(mus):
            np.minimum(w, mu_i[:, rules[:, i]], out=w)
    else:
        raise ValueError(f"unknown t-norm: {tnorm!r}")
    return FiringMatrix(values=w, normalized=False)


def normalize(fm: FiringMatrix) -> FiringMatrix:
    """Sum-normalize each row so per-sample rule weights sum to 1.

    Raises DegenerateFiringError when a row sum underflows, which signals a
    pathological MF configuration rather than ordinary data. Idempotent:
    normalizing an already-normalized matrix returns the same rows.
    """
    w = np.asarray(fm.values, dtype=float)
    if np.any(w < 0):
        raise ValueError("firing strengths must be nonnegative")
    sums = w.sum(axis=1)
    bad = np.flatnonzero(sums < ROW_SUM_FLOOR)
    if bad.size:
        raise DegenerateFiringError(
            f"firing-strength row {bad[0]} sums to {sums[bad[0]]:.3e}; "
            "no rule fired for this sample"
        )
    return FiringMatrix(values=w / sums[:, None], normalized=True)
