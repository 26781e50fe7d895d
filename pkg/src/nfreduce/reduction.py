"""Rule-base reduction: firing-strength PCA plus swarm-selected components.

The pipeline builds the grid antecedent up to the normalized firing
strengths, fits a frozen PCA basis on them, and runs a binary particle
swarm over component-selection masks. Each candidate mask is scored by
refitting only the consequent coefficients (least squares on the selected
component scores used as layer-4 activations) and taking the training
RMSE. Premise parameters are never updated: after ``fit_reduced`` they are
bit-identical to their grid initialization.

Reachable variants: ``pca-only`` keeps every selected component (all-ones
mask, no swarm) and ``bpso-only`` masks the raw rule activations without
any PCA stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bpso import SwarmConfig, run as bpso_run
from .consequent import ConsequentParams, assemble_design, lse_fit, predict, solve_lse
from .data import CLASSIFICATION, REGRESSION
from .fuzzy import FuzzyModel, InputSpec, build_grid, firing_strengths, normalize
from .pca import PcaBasis, fit_pca, project

__all__ = [
    "MODE_PCA_BPSO",
    "MODE_PCA_ONLY",
    "MODE_BPSO_ONLY",
    "ReductionConfig",
    "ReducedModel",
    "FitStats",
    "MaskFitness",
    "mask_apply",
    "repair_nonempty",
    "fit_reduced",
    "predict_reduced",
    "input_specs_from_data",
]

MODE_PCA_BPSO = "pca-bpso"
MODE_PCA_ONLY = "pca-only"
MODE_BPSO_ONLY = "bpso-only"
_REDUCED_MODES = (MODE_PCA_BPSO, MODE_PCA_ONLY, MODE_BPSO_ONLY)


@dataclass(frozen=True)
class ReductionConfig:
    """Knobs for one reduction fit.

    ``validation_fraction`` switches the mask fitness from training-fold
    RMSE to RMSE on an internal holdout carved from the training fold, for
    overfitting-sensitive studies; the final consequents are always refit
    on the full training fold.
    """

    mode: str = MODE_PCA_BPSO
    variance_threshold: float = 0.95
    iterations: int = 100
    swarm_cap: int = 50
    seed: int = 0
    mf_type: str = "gbell"
    tnorm: str = "product"
    validation_fraction: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in _REDUCED_MODES:
            raise ValueError(f"mode must be one of {_REDUCED_MODES}, got {self.mode!r}")
        if not 0.0 < self.variance_threshold <= 1.0:
            raise ValueError("variance_threshold must be in (0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.swarm_cap < 1:
            raise ValueError("swarm_cap must be >= 1")
        if self.validation_fraction is not None and not (
            0.0 < self.validation_fraction < 1.0
        ):
            raise ValueError("validation_fraction must be in (0, 1)")


@dataclass
class ReducedModel:
    """Finalized reduced system; immutable once fitted, safe to share.

    ``basis`` is None in bpso-only mode, where the mask addresses raw rule
    activations instead of principal components.
    """

    fuzzy: FuzzyModel
    basis: PcaBasis | None
    mask: np.ndarray
    consequents: ConsequentParams
    task: str
    config: ReductionConfig
    n_classes: int | None = None

    @property
    def n_selected(self) -> int:
        return int(self.mask.sum())

    @property
    def n_rules_full(self) -> int:
        return self.fuzzy.n_rules


@dataclass
class FitStats:
    """Per-stage wall-clock seconds and search diagnostics for one fit."""

    rule_count_full: int
    n_components: int
    n_selected: int
    train_rmse: float
    gbest_fitness: float
    timings: dict = field(default_factory=dict)
    bpso_history: list = field(default_factory=list)

    @property
    def fit_seconds(self) -> float:
        return float(sum(self.timings.values()))


def mask_apply(scores, mask) -> np.ndarray:
    """Keep the columns whose mask bit is set (Hadamard-select)."""
    scores = np.asarray(scores, dtype=float)
    mask = np.asarray(mask)
    if mask.ndim != 1 or scores.ndim != 2 or scores.shape[1] != mask.size:
        raise ValueError(
            f"mask of size {mask.size} does not match {scores.shape[1]} columns"
        )
    return scores[:, mask.astype(bool)]


def repair_nonempty(bits, rng) -> np.ndarray:
    """Flip one uniformly random bit on when a mask selects nothing."""
    if bits.any():
        return bits
    out = bits.copy()
    out[int(rng.integers(bits.size))] = 1
    return out


class MaskFitness:
    """Memoized mask objective: consequent-only LSE refit, then RMSE.

    The full design over all candidate columns is assembled once; a mask
    evaluation slices out the selected blocks, which is exactly the design
    of the selected columns. Identical masks are served from a cache, so
    duplicate evaluations return identical values by construction. A
    failed solve yields +inf so the swarm rejects the candidate.
    """

    def __init__(self, scores, X, y, validation_fraction=None, seed: int = 0):
        scores = np.asarray(scores, dtype=float)
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        self.n_candidates = scores.shape[1]
        self.block = X.shape[1] + 1
        self._full_design = assemble_design(X, scores)
        if validation_fraction is not None:
            n = X.shape[0]
            n_val = max(1, int(round(validation_fraction * n)))
            if n_val >= n:
                raise ValueError("validation split leaves no training rows")
            perm = np.random.default_rng(seed).permutation(n)
            self._val_idx = perm[:n_val]
            self._fit_idx = perm[n_val:]
        else:
            self._val_idx = None
            self._fit_idx = None
        self._y = y
        self._cache: dict[bytes, float] = {}
        self.n_evaluations = 0

    def _columns(self, bits) -> np.ndarray:
        sel = np.flatnonzero(bits)
        return (sel[:, None] * self.block + np.arange(self.block)).ravel()

    def __call__(self, bits) -> float:
        key = np.asarray(bits, dtype=np.int8).tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.n_evaluations += 1
        design = self._full_design[:, self._columns(bits)]
        try:
            if self._fit_idx is None:
                theta = solve_lse(design, self._y)
                resid = design @ theta - self._y
            else:
                theta = solve_lse(design[self._fit_idx], self._y[self._fit_idx])
                resid = design[self._val_idx] @ theta - self._y[self._val_idx]
            value = float(np.sqrt(np.mean(resid**2)))
            if not np.isfinite(value):
                value = np.inf
        except (np.linalg.LinAlgError, ValueError):
            value = np.inf
        self._cache[key] = value
        return value


def input_specs_from_data(X, mf_counts) -> list[InputSpec]:
    """Per-feature grid specs from observed ranges.

    A feature with zero observed span carries no grid information; its
    range is widened symmetrically so the spec stays valid.
    """
    X = np.asarray(X, dtype=float)
    counts = _broadcast_counts(mf_counts, X.shape[1])
    specs = []
    for i, m in enumerate(counts):
        lo, hi = float(X[:, i].min()), float(X[:, i].max())
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        specs.append(InputSpec(lo=lo, hi=hi, mf_count=m))
    return specs


def _broadcast_counts(mf_counts, d: int) -> list[int]:
    if np.isscalar(mf_counts):
        return [int(mf_counts)] * d
    counts = [int(m) for m in mf_counts]
    if len(counts) != d:
        raise ValueError(f"got {len(counts)} mf counts for {d} features")
    return counts


def fit_reduced(X, y, task: str, mf_counts, config: ReductionConfig,
                n_classes: int | None = None) -> tuple[ReducedModel, FitStats]:
    """Run the reduction pipeline on one training split.

    Stages: grid antecedent and normalized firing strengths; frozen PCA on
    them (except bpso-only); swarm search over selection masks with the
    consequent-refit fitness (except pca-only, which keeps all selected
    components); final consequent refit under the winning mask. Per-stage
    wall-clock timings are recorded in the returned stats.
    """
    if task not in (CLASSIFICATION, REGRESSION):
        raise ValueError(f"unknown task {task!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    specs = input_specs_from_data(X, mf_counts)
    fuzzy = build_grid(specs, config.mf_type)
    nf = normalize(firing_strengths(X, fuzzy, config.tnorm))
    row_err = np.max(np.abs(nf.values.sum(axis=1) - 1.0))
    if row_err > 1e-9:
        raise AssertionError(f"normalized firing rows off by {row_err:.2e}")
    timings["firing"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if config.mode == MODE_BPSO_ONLY:
        basis = None
        activations = nf.values
    else:
        basis = fit_pca(nf.values, config.variance_threshold)
        activations = project(nf.values, basis)
    timings["pca"] = time.perf_counter() - t0

    dims = activations.shape[1]
    fitness = MaskFitness(
        activations, X, y,
        validation_fraction=config.validation_fraction,
        seed=config.seed,
    )
    t0 = time.perf_counter()
    if config.mode == MODE_PCA_ONLY:
        mask = np.ones(dims, dtype=np.int8)
        gbest_fitness = fitness(mask)
        history = [gbest_fitness]
    else:
        swarm = SwarmConfig(
            swarm_size=min(dims, config.swarm_cap),
            dims=dims,
            max_iter=config.iterations,
            rng_seed=config.seed,
        )
        result = bpso_run(swarm, fitness, repair=repair_nonempty)
        mask = result.position.astype(np.int8)
        gbest_fitness = result.fitness
        history = result.history
    timings["bpso"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    selected = mask_apply(activations, mask)
    design = assemble_design(X, selected)
    consequents = lse_fit(design, y, n_rules=int(mask.sum()))
    resid = design @ consequents.coeffs.ravel() - y
    train_rmse = float(np.sqrt(np.mean(resid**2)))
    timings["refit"] = time.perf_counter() - t0

    model = ReducedModel(
        fuzzy=fuzzy,
        basis=basis,
        mask=mask,
        consequents=consequents,
        task=task,
        config=config,
        n_classes=n_classes,
    )
    stats = FitStats(
        rule_count_full=fuzzy.n_rules,
        n_components=dims,
        n_selected=int(mask.sum()),
        train_rmse=train_rmse,
        gbest_fitness=float(gbest_fitness),
        timings=timings,
        bpso_history=list(history),
    )
    return model, stats


def predict_reduced(model: ReducedModel, X) -> np.ndarray:
    """Forward pass of the reduced system; raw (undecoded) outputs.

    Antecedent layers, projection through the frozen basis (when present),
    column selection by the winning mask, then the weighted first-order
    consequent sum.
    """
    nf = normalize(firing_strengths(X, model.fuzzy, model.config.tnorm))
    if model.basis is not None:
        activations = project(nf.values, model.basis)
    else:
        activations = nf.values
    selected = mask_apply(activations, model.mask)
    return predict(X, selected, model.consequents)
