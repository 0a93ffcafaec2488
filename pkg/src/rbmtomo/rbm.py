"""Binary restricted Boltzmann machine: energies, sampling, CD training.

Both layers use {0, 1} units.  The joint energy is

    E(v, h) = -v W h - b.v - c.h

and everything exponential goes through softplus / log-sum-exp so large
weights never overflow.  Amplitudes are psi(v) = sqrt(p(v)), so ratios of
amplitudes reduce to half free-energy differences.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit, logsumexp

from .basis import all_states
from .errors import CapacityError, NumericalError

# exact enumeration over 2^N visible states is capped here
MAX_ENUM_QUBITS = 16

_FMT = "%.17g"  # round-trips float64 exactly


@dataclass(frozen=True)
class RbmParams:
    """Immutable parameter set (W, b, c).  Arrays are copied and locked."""

    weights: np.ndarray  # (n_visible, n_hidden)
    visible_bias: np.ndarray  # (n_visible,)
    hidden_bias: np.ndarray  # (n_hidden,)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.visible_bias, dtype=np.float64)
        c = np.array(self.hidden_bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or c.ndim != 1:
            raise ValueError("weights must be 2-D, biases 1-D")
        if w.shape != (b.size, c.size):
            raise ValueError(
                f"shape mismatch: W {w.shape}, b {b.shape}, c {c.shape}"
            )
        for arr in (w, b, c):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")
            arr.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "visible_bias", b)
        object.__setattr__(self, "hidden_bias", c)

    @property
    def n_visible(self) -> int:
        return self.weights.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[1]

    @property
    def n_parameters(self) -> int:
        return self.weights.size + self.visible_bias.size + self.hidden_bias.size


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    learning_rate: float = 0.01
    batch_size: int = 100
    cd_steps: int = 1
    seed: int = 0
    init_scale: float = 0.01
    momentum: float = 0.0
    freeze_mask: Optional[np.ndarray] = None  # 1 = trainable, 0 = pinned at zero

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.cd_steps < 1:
            raise ValueError("epochs, batch_size, cd_steps must be >= 1")
        if self.learning_rate <= 0 or self.init_scale < 0:
            raise ValueError("learning_rate must be > 0, init_scale >= 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")


@dataclass(frozen=True)
class ExactRbmStats:
    """Enumerated model distribution and its log partition function."""

    probabilities: np.ndarray  # (2^n_visible,)
    log_z: float


@dataclass(frozen=True)
class RbmGradient:
    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    grad_rms: float


def init_params(n_visible: int, n_hidden: int, seed: int, scale: float = 0.01) -> RbmParams:
    """Gaussian weights of the given scale, zero biases."""
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, scale, size=(n_visible, n_hidden))
    return RbmParams(w, np.zeros(n_visible), np.zeros(n_hidden))


def config_energy(params: RbmParams, v: np.ndarray, h: np.ndarray) -> float:
    """Joint energy of one (visible, hidden) configuration."""
    v = np.asarray(v, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    return float(
        -v @ params.weights @ h - params.visible_bias @ v - params.hidden_bias @ h
    )


def free_energy(params: RbmParams, v: np.ndarray) -> np.ndarray:
    """F(v) = -b.v - sum_j softplus(c_j + (v W)_j), batched over rows of v.

    exp(-F(v)) equals the hidden-layer sum of exp(-E(v, h)).
    """
    v = np.asarray(v, dtype=np.float64)
    theta = params.hidden_bias + v @ params.weights
    return -v @ params.visible_bias - np.logaddexp(0.0, theta).sum(axis=-1)


def amplitude_ratio(params: RbmParams, v_num: np.ndarray, v_den: np.ndarray) -> float:
    """psi(v_num) / psi(v_den) with psi = sqrt(p); always positive."""
    delta = free_energy(params, v_num) - free_energy(params, v_den)
    return float(np.exp(-0.5 * delta))


def _hidden_probs(params: RbmParams, v: np.ndarray) -> np.ndarray:
    return expit(params.hidden_bias + np.asarray(v, dtype=np.float64) @ params.weights)


def _visible_probs(params: RbmParams, h: np.ndarray) -> np.ndarray:
    return expit(params.visible_bias + np.asarray(h, dtype=np.float64) @ params.weights.T)


def gibbs_step(params: RbmParams, v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One full block sweep: sample h | v, then v' | h.  Batched over rows."""
    ph = _hidden_probs(params, v)
    h = (rng.random(ph.shape) < ph).astype(np.uint8)
    pv = _visible_probs(params, h)
    return (rng.random(pv.shape) < pv).astype(np.uint8)


def sample_model(
    params: RbmParams,
    n_samples: int,
    seed: int,
    n_chains: int = 100,
    burn_in: int = 1000,
    keep_every: int = 5,
) -> np.ndarray:
    """Draw visible samples from p(v) by block Gibbs.

    Runs ``n_chains`` chains from uniform random starts, discards
    ``burn_in`` sweeps, then after every ``keep_every`` further sweeps
    records all chain states round-robin until ``n_samples`` are collected.
    """
    if n_samples < 1 or n_chains < 1 or keep_every < 1 or burn_in < 0:
        raise ValueError("bad sampler arguments")
    rng = np.random.default_rng(seed)
    v = rng.integers(0, 2, size=(n_chains, params.n_visible), dtype=np.uint8)
    for _ in range(burn_in):
        v = gibbs_step(params, v, rng)
    blocks = []
    collected = 0
    while collected < n_samples:
        for _ in range(keep_every):
            v = gibbs_step(params, v, rng)
        blocks.append(v.copy())
        collected += n_chains
    return np.concatenate(blocks)[:n_samples]


def cd_gradient(
    params: RbmParams, batch: np.ndarray, k: int, rng: np.random.Generator
) -> RbmGradient:
    """Contrastive-divergence ascent direction on the mean log-likelihood.

    Positive phase uses the data; the negative phase uses chain states
    after k Gibbs sweeps started from the batch itself.
    """
    batch = np.atleast_2d(np.asarray(batch))
    if batch.shape[0] == 0:
        raise ValueError("empty batch")
    if k < 1:
        raise ValueError("k must be >= 1")
    v0 = batch.astype(np.float64)
    m = v0.shape[0]

    ph0 = _hidden_probs(params, v0)
    h = (rng.random(ph0.shape) < ph0).astype(np.float64)
    for step in range(k):
        pv = _visible_probs(params, h)
        vk = (rng.random(pv.shape) < pv).astype(np.float64)
        phk = _hidden_probs(params, vk)
        if step < k - 1:
            h = (rng.random(phk.shape) < phk).astype(np.float64)

    dw = (v0.T @ ph0 - vk.T @ phk) / m
    db = (v0 - vk).mean(axis=0)
    dc = (ph0 - phk).mean(axis=0)
    return RbmGradient(dw, db, dc)


def train(
    params: RbmParams, shots: np.ndarray, config: TrainConfig
) -> tuple[RbmParams, list[EpochLog]]:
    """CD-k stochastic gradient ascent over shuffled mini-batches.

    Deterministic under config.seed.  If config.freeze_mask is set, masked
    weight entries are pinned to exactly zero throughout.  Raises
    NumericalError with the epoch index if parameters go non-finite.
    """
    shots = np.atleast_2d(np.asarray(shots))
    if shots.shape[1] != params.n_visible:
        raise ValueError(
            f"dataset has {shots.shape[1]} sites, model has {params.n_visible}"
        )
    mask = None
    if config.freeze_mask is not None:
        mask = np.asarray(config.freeze_mask, dtype=np.float64)
        if mask.shape != params.weights.shape:
            raise ValueError("freeze_mask shape must match weights")

    rng = np.random.default_rng(config.seed)
    w = np.array(params.weights)
    b = np.array(params.visible_bias)
    c = np.array(params.hidden_bias)
    if mask is not None:
        w *= mask
    vel_w = np.zeros_like(w)
    vel_b = np.zeros_like(b)
    vel_c = np.zeros_like(c)

    m_total = shots.shape[0]
    log: list[EpochLog] = []
    for epoch in range(config.epochs):
        order = rng.permutation(m_total)
        sq_sum = 0.0
        n_entries = 0
        for start in range(0, m_total, config.batch_size):
            batch = shots[order[start : start + config.batch_size]]
            grad = cd_gradient(
                RbmParams(w, b, c), batch, config.cd_steps, rng
            )
            gw = grad.weights if mask is None else grad.weights * mask
            vel_w = config.momentum * vel_w + gw
            vel_b = config.momentum * vel_b + grad.visible_bias
            vel_c = config.momentum * vel_c + grad.hidden_bias
            w += config.learning_rate * vel_w
            b += config.learning_rate * vel_b
            c += config.learning_rate * vel_c
            if mask is not None:
                w *= mask
            if not (
                np.all(np.isfinite(w))
                and np.all(np.isfinite(b))
                and np.all(np.isfinite(c))
            ):
                raise NumericalError(f"non-finite parameters at epoch {epoch}")
            sq_sum += float((gw**2).sum())
            n_entries += gw.size
        log.append(EpochLog(epoch, float(np.sqrt(sq_sum / max(n_entries, 1)))))
    return RbmParams(w, b, c), log


def _check_enum_cap(n: int) -> None:
    if n > MAX_ENUM_QUBITS:
        raise CapacityError(
            f"exact enumeration capped at {MAX_ENUM_QUBITS} sites, got {n}"
        )


def exact_distribution(params: RbmParams) -> ExactRbmStats:
    """Normalized p(v) over all 2^N visible states, via log-sum-exp."""
    _check_enum_cap(params.n_visible)
    neg_f = -free_energy(params, all_states(params.n_visible))
    log_z = float(logsumexp(neg_f))
    probs = np.exp(neg_f - log_z)
    return ExactRbmStats(probs / probs.sum(), log_z)


def kl_divergence(target_probs: np.ndarray, params: RbmParams) -> float:
    """KL(target || model) with the 0 log 0 = 0 convention."""
    target = np.asarray(target_probs, dtype=np.float64)
    _check_enum_cap(params.n_visible)
    if target.size != 1 << params.n_visible or abs(target.sum() - 1.0) > 1e-9:
        raise ValueError("target must be normalized over all 2^N states")
    model = exact_distribution(params).probabilities
    pos = target > 0
    return float(np.sum(target[pos] * np.log(target[pos] / model[pos])))


def exact_log_likelihood(params: RbmParams, shots: np.ndarray) -> float:
    """Mean log p(v) over the dataset, by full enumeration of Z."""
    _check_enum_cap(params.n_visible)
    shots = np.atleast_2d(np.asarray(shots))
    neg_f_all = -free_energy(params, all_states(params.n_visible))
    log_z = float(logsumexp(neg_f_all))
    return float((-free_energy(params, shots)).mean() - log_z)


def exact_log_likelihood_gradient(params: RbmParams, shots: np.ndarray) -> RbmGradient:
    """Exact gradient of the mean log-likelihood (enumerated negative phase)."""
    _check_enum_cap(params.n_visible)
    shots = np.atleast_2d(np.asarray(shots)).astype(np.float64)
    ph_data = _hidden_probs(params, shots)
    m = shots.shape[0]

    states = all_states(params.n_visible).astype(np.float64)
    p = exact_distribution(params).probabilities
    ph_model = _hidden_probs(params, states)

    dw = shots.T @ ph_data / m - states.T @ (p[:, None] * ph_model)
    db = shots.mean(axis=0) - p @ states
    dc = ph_data.mean(axis=0) - p @ ph_model
    return RbmGradient(dw, db, dc)


def save_checkpoint(params: RbmParams, path, mask: Optional[np.ndarray] = None) -> None:
    """Text checkpoint: header "N N_h", weight rows, b row, c row, optional MASK."""
    lines = [f"{params.n_visible} {params.n_hidden}"]
    for row in params.weights:
        lines.append(" ".join(_FMT % x for x in row))
    lines.append(" ".join(_FMT % x for x in params.visible_bias))
    lines.append(" ".join(_FMT % x for x in params.hidden_bias))
    if mask is not None:
        if mask.shape != params.weights.shape:
            raise ValueError("mask shape must match weights")
        lines.append("MASK")
        for row in mask:
            lines.append(" ".join(str(int(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[RbmParams, Optional[np.ndarray]]:
    lines = Path(path).read_text().splitlines()
    try:
        n, n_h = (int(tok) for tok in lines[0].split())
        w = np.array([[float(x) for x in lines[1 + i].split()] for i in range(n)])
        b = np.array([float(x) for x in lines[1 + n].split()])
        c = np.array([float(x) for x in lines[2 + n].split()])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed checkpoint") from exc
    mask = None
    if len(lines) > 3 + n and lines[3 + n].strip() == "MASK":
        mask = np.array(
            [[int(x) for x in lines[4 + n + i].split()] for i in range(n)],
            dtype=np.uint8,
        )
    params = RbmParams(w, b, c)
    if w.shape != (n, n_h):
        raise ValueError(f"{path}: weight block does not match header")
    return params, mask
