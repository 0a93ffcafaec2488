"""Scaling studies: minimal hidden units and minimal sample counts.

Both sweeps ascend a resource axis (hidden-unit count, or training-set
size) and report the smallest value at which training meets the
relative-error criterion within an epoch budget.  Every training run is
keyed by (point, resource value, repeat) and seeded independently, so a
sweep is reproducible run-to-run and independent of worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .data import sample_measurements
from .estimator import EstimatorConfig, estimate_energy, relative_error_bound
from .rbm import RbmParams, TrainConfig, init_params, train
from .tfim import TfimSpec, solve_ground_state

# spawn-key tags keeping every RNG stream in a sweep distinct
_TAG_POOL, _TAG_RUN = 0, 1


@dataclass(frozen=True)
class SweepConfig:
    qubit_sizes: tuple = (6, 8, 10, 12, 14, 16)
    field_ratios: tuple = (1.0,)
    coupling: float = 1.0
    hidden_start: int = 1
    hidden_step: int = 1
    hidden_max: int = 20
    sample_start: int = 500
    sample_step: int = 500
    sample_max: int = 20000
    alpha_ratio: float = 0.5
    repeats: int = 3
    pool_size: int = 100_000
    epoch_budget: int = 500
    check_every: int = 50
    threshold: float = 0.002

    def __post_init__(self):
        if not self.qubit_sizes or not self.field_ratios:
            raise ValueError("size and field grids must be nonempty")
        if self.hidden_step < 1 or self.sample_step < 1:
            raise ValueError("grid steps must be >= 1")
        if self.repeats < 1 or self.pool_size < 1:
            raise ValueError("repeats and pool_size must be >= 1")
        if self.epoch_budget < 1 or self.check_every < 1:
            raise ValueError("epoch budget settings must be >= 1")
        if not 0 < self.alpha_ratio:
            raise ValueError("alpha_ratio must be positive")


@dataclass(frozen=True)
class EvalRecord:
    """One criterion evaluation — a row of the evaluation CSV."""

    n_qubits: int
    field_ratio: float
    n_hidden: int
    m: int
    epoch: int
    exact_energy: float
    mean: float
    sigma: float
    n_samples: int
    epsilon: float
    converged: bool
    seed: int


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one training run at a grid point, for one seed."""

    n_qubits: int
    field_ratio: float
    n_hidden: int
    m: int
    seed: int
    epochs_used: int
    epsilon: float  # best value seen across criterion checks
    converged: bool


@dataclass(frozen=True)
class TrainOutcome:
    params: RbmParams
    epochs_used: int
    epsilon: float
    converged: bool
    evals: list


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    residual_norm: float


def train_until_criterion(
    params: RbmParams,
    shots: np.ndarray,
    spec: TfimSpec,
    exact_energy: float,
    budget: int,
    check_every: int,
    threshold: float,
    est_cfg: EstimatorConfig,
    train_template: TrainConfig,
    seed: int,
) -> TrainOutcome:
    """Train in chunks, checking the criterion after each chunk.

    Stops at the first passing check or when the budget runs out.  The
    reported epsilon is the best (smallest) value seen at any check, so
    re-thresholding the records against a looser tolerance stays valid.
    """
    children = iter(np.random.SeedSequence(seed).spawn(2 * (budget // check_every + 2)))
    next_seed = lambda: int(next(children).generate_state(1)[0])  # noqa: E731

    epochs_done = 0
    best_eps = np.inf
    evals = []
    converged = False
    while epochs_done < budget and not converged:
        chunk = min(check_every, budget - epochs_done)
        cfg = replace(train_template, epochs=chunk, seed=next_seed())
        params, _ = train(params, shots, cfg)
        epochs_done += chunk
        est = estimate_energy(params, spec, replace(est_cfg, seed=next_seed()))
        bound = relative_error_bound(est, exact_energy, threshold, est_cfg.confidence_c)
        best_eps = min(best_eps, bound.epsilon)
        converged = bound.converged
        evals.append((epochs_done, est, bound.epsilon, bound.converged))
    return TrainOutcome(params, epochs_done, float(best_eps), converged, evals)


def derive_seed(root_seed: int, *key) -> int:
    """Stable per-job seed derived from the sweep seed and a job key."""
    return int(
        np.random.SeedSequence(root_seed, spawn_key=tuple(key)).generate_state(1)[0]
    )


def _train_job(payload) -> tuple:
    """One grid-point training run (module-level for process pools)."""
    (key, n, ratio, coupling, n_h, shots, exact_u, budget, check_every,
     threshold, est_cfg, train_template, run_seed) = payload
    spec = TfimSpec(n, coupling, coupling * ratio)
    init = init_params(n, n_h, derive_seed(run_seed, 0), train_template.init_scale)
    outcome = train_until_criterion(
        init, shots, spec, exact_u, budget, check_every, threshold,
        est_cfg, train_template, derive_seed(run_seed, 1),
    )
    return key, run_seed, outcome


def _run_jobs(payloads, workers: int):
    if workers <= 1 or len(payloads) <= 1:
        return [_train_job(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sorted(pool.map(_train_job, payloads), key=lambda r: r[0])


@dataclass(frozen=True)
class SweepResult:
    records: list  # SweepRecord per run
    evals: list  # EvalRecord per criterion check
    minima: dict  # point key -> minimal resource value (None if exhausted)
    trained: dict  # point key -> (params of first passing run at the minimum)


def _majority(passes: int, repeats: int) -> bool:
    return passes >= repeats // 2 + 1


def sweep_hidden_units(
    cfg: SweepConfig,
    train_template: TrainConfig,
    est_cfg: EstimatorConfig,
    seed: int,
    workers: int = 1,
) -> SweepResult:
    """Smallest hidden-unit count meeting the criterion, per (N, h/J).

    Each point trains on a fixed pool of cfg.pool_size shots, ascends
    N_h from the grid start, and declares the minimum at the first value
    passing on a majority of cfg.repeats seeds.  Points whose grid is
    exhausted get minimum None and stay in the records as failures.
    """
    points = []
    for ni, n in enumerate(cfg.qubit_sizes):
        for ri, ratio in enumerate(cfg.field_ratios):
            spec = TfimSpec(n, cfg.coupling, cfg.coupling * ratio)
            gs = solve_ground_state(spec)
            pool = sample_measurements(
                gs, cfg.pool_size, derive_seed(seed, _TAG_POOL, ni, ri)
            )
            points.append({
                "key": (ni, ri), "n": n, "ratio": ratio, "u": gs.energy,
                "shots": pool.shots, "n_h": cfg.hidden_start,
            })

    records, evals = [], []
    minima, trained = {}, {}
    active = list(points)
    while active:
        payloads = []
        for pt in active:
            for rep in range(cfg.repeats):
                run_seed = derive_seed(
                    seed, _TAG_RUN, pt["key"][0], pt["key"][1], pt["n_h"], rep
                )
                payloads.append((
                    (pt["key"], rep), pt["n"], pt["ratio"], cfg.coupling,
                    pt["n_h"], pt["shots"], pt["u"], cfg.epoch_budget,
                    cfg.check_every, cfg.threshold, est_cfg, train_template,
                    run_seed,
                ))
        results = _run_jobs(payloads, workers)

        by_point = {}
        for (key, rep), run_seed, outcome in results:
            by_point.setdefault(key, []).append((rep, run_seed, outcome))
        next_active = []
        for pt in active:
            runs = sorted(by_point[pt["key"]])
            passes = 0
            for rep, run_seed, outcome in runs:
                records.append(SweepRecord(
                    pt["n"], pt["ratio"], pt["n_h"], len(pt["shots"]), run_seed,
                    outcome.epochs_used, outcome.epsilon, outcome.converged,
                ))
                for epoch, est, eps, conv in outcome.evals:
                    evals.append(EvalRecord(
                        pt["n"], pt["ratio"], pt["n_h"], len(pt["shots"]), epoch,
                        pt["u"], est.mean, est.std_dev, est.n_samples, eps,
                        conv, run_seed,
                    ))
                passes += outcome.converged
            if _majority(passes, cfg.repeats):
                minima[(pt["n"], pt["ratio"])] = pt["n_h"]
                first_pass = next(o for _, _, o in runs if o.converged)
                trained[(pt["n"], pt["ratio"])] = first_pass.params
            elif pt["n_h"] + cfg.hidden_step > cfg.hidden_max:
                minima[(pt["n"], pt["ratio"])] = None
            else:
                pt["n_h"] += cfg.hidden_step
                next_active.append(pt)
        active = next_active

    return SweepResult(records, evals, minima, trained)


def sweep_sample_complexity(
    cfg: SweepConfig,
    train_template: TrainConfig,
    est_cfg: EstimatorConfig,
    seed: int,
    workers: int = 1,
) -> SweepResult:
    """Smallest training-set size meeting the criterion, per (N, h/J).

    N_h is pinned to round(alpha_ratio * N).  Each repeat ascends M over
    nested prefixes of one pooled dataset and finds its own minimal M;
    the reported minimum is the mean of per-repeat minima (None if every
    repeat hit the cap).
    """
    points = []
    for ni, n in enumerate(cfg.qubit_sizes):
        for ri, ratio in enumerate(cfg.field_ratios):
            spec = TfimSpec(n, cfg.coupling, cfg.coupling * ratio)
            gs = solve_ground_state(spec)
            pool = sample_measurements(
                gs, cfg.sample_max, derive_seed(seed, _TAG_POOL, ni, ri)
            )
            points.append({
                "key": (ni, ri), "n": n, "ratio": ratio, "u": gs.energy,
                "shots": pool.shots,
                "n_h": max(1, round(cfg.alpha_ratio * n)),
                "m": {rep: cfg.sample_start for rep in range(cfg.repeats)},
                "found": {},
            })

    records, evals = [], []
    minima, trained = {}, {}
    active = list(points)
    while active:
        payloads = []
        for pt in active:
            for rep in range(cfg.repeats):
                if rep in pt["found"]:
                    continue
                m = pt["m"][rep]
                run_seed = derive_seed(
                    seed, _TAG_RUN, pt["key"][0], pt["key"][1], m, rep
                )
                payloads.append((
                    (pt["key"], rep), pt["n"], pt["ratio"], cfg.coupling,
                    pt["n_h"], pt["shots"][:m], pt["u"], cfg.epoch_budget,
                    cfg.check_every, cfg.threshold, est_cfg, train_template,
                    run_seed,
                ))
        results = _run_jobs(payloads, workers)

        by_run = {}
        for (key, rep), run_seed, outcome in results:
            by_run[(key, rep)] = (run_seed, outcome)
        next_active = []
        for pt in active:
            for rep in range(cfg.repeats):
                if rep in pt["found"]:
                    continue
                run_seed, outcome = by_run[(pt["key"], rep)]
                m = pt["m"][rep]
                records.append(SweepRecord(
                    pt["n"], pt["ratio"], pt["n_h"], m, run_seed,
                    outcome.epochs_used, outcome.epsilon, outcome.converged,
                ))
                for epoch, est, eps, conv in outcome.evals:
                    evals.append(EvalRecord(
                        pt["n"], pt["ratio"], pt["n_h"], m, epoch, pt["u"],
                        est.mean, est.std_dev, est.n_samples, eps, conv, run_seed,
                    ))
                if outcome.converged:
                    pt["found"][rep] = m
                    if (pt["n"], pt["ratio"]) not in trained:
                        trained[(pt["n"], pt["ratio"])] = outcome.params
                elif m + cfg.sample_step > cfg.sample_max:
                    pt["found"][rep] = None
                else:
                    pt["m"][rep] = m + cfg.sample_step
            if len(pt["found"]) < cfg.repeats:
                next_active.append(pt)
            else:
                found = [v for v in pt["found"].values() if v is not None]
                minima[(pt["n"], pt["ratio"])] = (
                    float(np.mean(found)) if found else None
                )
        active = next_active

    return SweepResult(records, evals, minima, trained)


def minimal_from_records(records, threshold: float) -> dict:
    """Re-derive minimal N_h per point against a (looser) threshold.

    Valid for thresholds at or above the one the sweep ran with, because
    each record keeps the best epsilon seen across its criterion checks.
    """
    by_point = {}
    for r in records:
        key = (r.n_qubits, r.field_ratio, r.n_hidden)
        by_point.setdefault(key, []).append(r.epsilon <= threshold)
    minima: dict = {}
    for (n, ratio, n_h), passes in sorted(by_point.items()):
        point = (n, ratio)
        if point in minima and minima[point] is not None:
            continue
        if _majority(sum(passes), len(passes)):
            minima[point] = n_h
        else:
            minima.setdefault(point, None)
    return minima


def weight_spectrum(params: RbmParams) -> np.ndarray:
    """All |W_ij| sorted descending — the model's weight-magnitude profile."""
    return np.sort(np.abs(params.weights).ravel())[::-1]


def linear_fit(points) -> LinearFit:
    """Ordinary least squares y = slope * x + intercept over (x, y) pairs."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct abscissae")
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.linalg.norm(design @ coef - y))
    return LinearFit(float(coef[0]), float(coef[1]), residual)
