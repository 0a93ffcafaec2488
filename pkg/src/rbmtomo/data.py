"""Projective measurement datasets drawn from exact ground states.

Shots are sigma^z-basis bitstrings sampled i.i.d. from psi^2 by inverse CDF
over the full amplitude vector, so the sampler is exact (no Markov chain).
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import all_states, spins, states_to_indices
from .tfim import GroundState


@dataclass(frozen=True)
class MeasurementDataset:
    """An ordered list of M projective shots over n_qubits sites."""

    n_qubits: int
    shots: np.ndarray  # (M, n_qubits) uint8
    seed: int

    def __post_init__(self):
        if self.shots.ndim != 2 or self.shots.shape[1] != self.n_qubits:
            raise ValueError(f"shots must be (M, {self.n_qubits})")
        if self.shots.shape[0] < 1:
            raise ValueError("dataset must contain at least one shot")

    @property
    def n_shots(self) -> int:
        return self.shots.shape[0]

    def subset(self, m: int) -> "MeasurementDataset":
        """First m shots; nested prefixes share every earlier draw."""
        if not 1 <= m <= self.n_shots:
            raise ValueError(f"m must be in [1, {self.n_shots}]")
        return MeasurementDataset(self.n_qubits, self.shots[:m], self.seed)


@dataclass(frozen=True)
class DatasetStats:
    site_occupation: np.ndarray  # mean of v_i per site
    magnetization_mean: float  # mean of sum_i (2 v_i - 1)


def sample_measurements(
    gs: GroundState, m: int, seed: int, sector: str = "both"
) -> MeasurementDataset:
    """Draw m i.i.d. shots from p(v) = psi(v)^2.

    ``sector="positive"`` renormalizes onto configurations with
    magnetization >= 0, mimicking a symmetry-broken training set.
    Identical (gs, m, seed, sector) always reproduces identical shots.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = gs.spec.n_qubits
    probs = gs.probabilities
    if sector == "positive":
        mags = spins(all_states(n)).sum(axis=1)
        probs = np.where(mags >= 0, probs, 0.0)
        probs = probs / probs.sum()
    elif sector != "both":
        raise ValueError(f"unknown sector {sector!r}")

    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    draws = rng.random(m)
    indices = np.searchsorted(cdf, draws, side="right")
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = ((indices[:, None] >> shifts) & 1).astype(np.uint8)
    return MeasurementDataset(n, bits, seed)


def dataset_statistics(ds: MeasurementDataset) -> DatasetStats:
    """Per-site mean occupation and total magnetization mean in spin units."""
    if ds.n_shots < 1:
        raise ValueError("empty dataset")
    occ = ds.shots.mean(axis=0)
    mag = float(spins(ds.shots).sum(axis=1).mean())
    return DatasetStats(occ, mag)


def empirical_distribution(ds: MeasurementDataset) -> np.ndarray:
    """Normalized histogram of the shots over all 2^N basis states."""
    counts = np.bincount(states_to_indices(ds.shots), minlength=1 << ds.n_qubits)
    return counts / ds.n_shots


def save_dataset(ds: MeasurementDataset, path) -> None:
    """Text format: line 1 is "N M seed", then one '0'/'1' string per shot."""
    lines = [f"{ds.n_qubits} {ds.n_shots} {ds.seed}"]
    digits = ds.shots + ord("0")
    lines.extend(row.tobytes().decode("ascii") for row in digits)
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> MeasurementDataset:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed dataset header")
        n, m, seed = int(header[0]), int(header[1]), int(header[2])
        shots = np.empty((m, n), dtype=np.uint8)
        for i in range(m):
            line = fh.readline().strip()
            if len(line) != n or set(line) - {"0", "1"}:
                raise ValueError(f"{path}: bad shot on line {i + 2}")
            shots[i] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
    return MeasurementDataset(n, shots, seed)
