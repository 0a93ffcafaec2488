"""Iterative magnitude pruning with fine-tuning under a freeze mask.

Each iteration removes the smallest-magnitude fraction of the surviving
weights (40% on the first pass, 5% afterwards by default), freezes them at
exactly zero, and retrains the rest until the relative-error criterion is
met again or an epoch budget runs out.  The loop stops at the first
iteration it cannot repair and reports the last model that passed.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import CriterionError
from .estimator import (
    DEFAULT_THRESHOLD,
    EstimatorConfig,
    ErrorBound,
    estimate_energy,
    relative_error_bound,
)
from .rbm import RbmParams, TrainConfig, train
from .tfim import TfimSpec, solve_ground_state


@dataclass(frozen=True)
class PruneSchedule:
    first_fraction: float = 0.40
    later_fraction: float = 0.05
    finetune_epoch_budget: int = 500
    criterion_threshold: float = DEFAULT_THRESHOLD
    check_every: int = 25  # criterion evaluations during fine-tuning
    retry_failed_once: bool = False

    def __post_init__(self):
        for f in (self.first_fraction, self.later_fraction):
            if not 0.0 < f < 1.0:
                raise ValueError("prune fractions must lie in (0, 1)")
        if self.finetune_epoch_budget < 0 or self.check_every < 1:
            raise ValueError("bad fine-tune budget settings")


@dataclass(frozen=True)
class PruneIteration:
    iteration: int
    delta: float
    weights_remaining: int
    finetune_epochs: int
    epsilon: float
    passed: bool


@dataclass(frozen=True)
class PruneReport:
    iterations: list
    final_model: RbmParams
    final_mask: np.ndarray
    final_nonzero_weights: int
    initial_epsilon: float
    exact_energy: float


def _live_magnitudes(params: RbmParams, mask: Optional[np.ndarray]) -> np.ndarray:
    """|W| over currently unfrozen weights, flattened (frozen -> excluded)."""
    mags = np.abs(params.weights).ravel()
    if mask is not None:
        return mags[np.asarray(mask).ravel() != 0]
    return mags


def prune_threshold(
    params: RbmParams, mask: Optional[np.ndarray], fraction: float
) -> float:
    """Magnitude of the k-th smallest surviving |W|, k = floor(fraction * count).

    k = 0 returns a value strictly below the smallest surviving magnitude,
    so applying it prunes nothing.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    mags = _live_magnitudes(params, mask)
    if mags.size == 0:
        raise ValueError("no unpruned weights left")
    k = int(np.floor(fraction * mags.size))
    if k == 0:
        return float(mags.min() / 2.0)
    return float(np.sort(mags)[k - 1])


def select_prune_indices(
    params: RbmParams, mask: Optional[np.ndarray], fraction: float
) -> np.ndarray:
    """Flat indices of exactly k = floor(fraction * survivors) weights to cut.

    Sorted by magnitude; ties resolved toward the lowest flat index, so the
    removed count is exact even when magnitudes coincide.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    mags = np.abs(params.weights).ravel()
    live = (
        np.flatnonzero(np.asarray(mask).ravel() != 0)
        if mask is not None
        else np.arange(mags.size)
    )
    if live.size == 0:
        raise ValueError("no unpruned weights left")
    k = int(np.floor(fraction * live.size))
    order = np.argsort(mags[live], kind="stable")
    return live[order[:k]]


def apply_prune(
    params: RbmParams, mask: Optional[np.ndarray], delta: float
) -> tuple[RbmParams, np.ndarray]:
    """Zero and freeze every unfrozen weight with |W| <= delta; biases untouched."""
    if mask is None:
        mask = np.ones(params.weights.shape, dtype=np.uint8)
    else:
        mask = np.asarray(mask, dtype=np.uint8).copy()
    w = np.array(params.weights)
    cut = (np.abs(w) <= delta) & (mask != 0)
    w[cut] = 0.0
    mask[cut] = 0
    w[mask == 0] = 0.0
    return RbmParams(w, params.visible_bias, params.hidden_bias), mask


def _apply_prune_indices(
    params: RbmParams, mask: Optional[np.ndarray], indices: np.ndarray
) -> tuple[RbmParams, np.ndarray]:
    if mask is None:
        mask = np.ones(params.weights.shape, dtype=np.uint8)
    else:
        mask = np.asarray(mask, dtype=np.uint8).copy()
    w = np.array(params.weights)
    w.ravel()[indices] = 0.0
    mask.ravel()[indices] = 0
    w[mask == 0] = 0.0
    return RbmParams(w, params.visible_bias, params.hidden_bias), mask


def _evaluate(
    params: RbmParams,
    spec: TfimSpec,
    exact_u: float,
    est_cfg: EstimatorConfig,
    threshold: float,
    seed: int,
) -> ErrorBound:
    est = estimate_energy(params, spec, replace(est_cfg, seed=seed))
    return relative_error_bound(est, exact_u, threshold, est_cfg.confidence_c)


def _finetune(
    params: RbmParams,
    mask: np.ndarray,
    shots: np.ndarray,
    spec: TfimSpec,
    exact_u: float,
    schedule: PruneSchedule,
    est_cfg: EstimatorConfig,
    train_cfg: TrainConfig,
    seeds,
) -> tuple[RbmParams, int, float, bool]:
    """Train in check_every-sized chunks until the criterion holds or budget ends."""
    bound = _evaluate(
        params, spec, exact_u, est_cfg, schedule.criterion_threshold, next(seeds)
    )
    epochs_spent = 0
    while not bound.converged and epochs_spent < schedule.finetune_epoch_budget:
        chunk = min(schedule.check_every, schedule.finetune_epoch_budget - epochs_spent)
        cfg = replace(train_cfg, epochs=chunk, seed=next(seeds), freeze_mask=mask)
        params, _ = train(params, shots, cfg)
        epochs_spent += chunk
        bound = _evaluate(
            params, spec, exact_u, est_cfg, schedule.criterion_threshold, next(seeds)
        )
    return params, epochs_spent, bound.epsilon, bound.converged


def prune_loop(
    params: RbmParams,
    shots: np.ndarray,
    spec: TfimSpec,
    schedule: PruneSchedule,
    est_cfg: EstimatorConfig,
    train_cfg: TrainConfig,
    mask: Optional[np.ndarray] = None,
) -> PruneReport:
    """Prune / fine-tune until the criterion cannot be restored.

    The starting model must already satisfy the criterion.  Exactly
    floor(fraction * survivors) weights are cut per iteration; the loop also
    stops once that count rounds down to zero.  Deterministic under
    est_cfg.seed, which seeds all evaluator and fine-tune streams.
    """
    exact_u = solve_ground_state(spec).energy
    root = np.random.SeedSequence(est_cfg.seed)
    children = iter(root.spawn(100_000))
    seeds = (int(c.generate_state(1)[0]) for c in children)

    if mask is None:
        mask = np.ones(params.weights.shape, dtype=np.uint8)
    else:
        mask = np.asarray(mask, dtype=np.uint8).copy()

    initial = _evaluate(
        params, spec, exact_u, est_cfg, schedule.criterion_threshold, next(seeds)
    )
    if not initial.converged:
        raise CriterionError(
            f"starting model fails the criterion (epsilon = {initial.epsilon:.3g})"
        )

    iterations: list[PruneIteration] = []
    best, best_mask = params, mask
    t = 0
    while True:
        t += 1
        fraction = schedule.first_fraction if t == 1 else schedule.later_fraction
        live = int(np.count_nonzero(best_mask))
        if int(np.floor(fraction * live)) == 0:
            break  # nothing more removable at this fraction
        delta = prune_threshold(best, best_mask, fraction)
        cut = select_prune_indices(best, best_mask, fraction)
        cand, cand_mask = _apply_prune_indices(best, best_mask, cut)

        cand, spent, eps, ok = _finetune(
            cand, cand_mask, shots, spec, exact_u, schedule, est_cfg, train_cfg, seeds
        )
        if not ok and schedule.retry_failed_once:
            cand, cand_mask = _apply_prune_indices(best, best_mask, cut)
            cand, spent2, eps, ok = _finetune(
                cand, cand_mask, shots, spec, exact_u, schedule, est_cfg, train_cfg, seeds
            )
            spent += spent2
        iterations.append(
            PruneIteration(
                t, delta, int(np.count_nonzero(cand_mask)), spent, eps, ok
            )
        )
        if not ok:
            break
        best, best_mask = cand, cand_mask

    return PruneReport(
        iterations,
        best,
        best_mask,
        int(np.count_nonzero(best_mask)),
        initial.epsilon,
        exact_u,
    )
