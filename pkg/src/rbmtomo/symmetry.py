"""Spin-basis machines, the spin-to-occupation mapping, and Z2 diagnostics.

A bias-free machine over +/-1 units with coupling matrix Wt maps onto the
{0,1}-unit parameterization as W = 4 Wt, b_i = -2 sum_j Wt_ij,
c_j = -2 sum_i Wt_ij (the constant term from expanding the energy cancels
in normalization).  Such models obey p(v) = p(v-bar) under a global bit
flip, and their bias ratios sum_j W_ij / b_i and sum_i W_ij / c_j are
identically -2 — a useful fingerprint for models trained on Z2-symmetric
data.
"""

from dataclasses import dataclass

import numpy as np

from .rbm import RbmParams, exact_distribution

RATIO_GUARD = 1e-12  # |bias| below this is reported undefined, not divided


@dataclass(frozen=True)
class SpinRbm:
    """Bias-free coupling matrix over +/-1-valued visible and hidden units."""

    weights: np.ndarray  # (n_visible, n_hidden)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("weights must be 2-D")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SymmetryReport:
    alpha: np.ndarray  # sum_j W_ij / b_i, NaN where undefined
    beta: np.ndarray  # sum_i W_ij / c_j, NaN where undefined
    undefined_alpha: tuple  # visible indices with |b_i| < RATIO_GUARD
    undefined_beta: tuple  # hidden indices with |c_j| < RATIO_GUARD
    z2_deviation: float  # max_v |p(v) - p(v-bar)|; NaN when not evaluated


def spin_to_occupation(spin: SpinRbm) -> RbmParams:
    """Occupation-basis parameters with the same marginal as the spin model."""
    wt = spin.weights
    return RbmParams(4.0 * wt, -2.0 * wt.sum(axis=1), -2.0 * wt.sum(axis=0))


def bias_ratios(params: RbmParams) -> SymmetryReport:
    """Row/column weight sums over biases; near-zero biases flagged undefined."""
    row = params.weights.sum(axis=1)
    col = params.weights.sum(axis=0)
    bad_b = np.abs(params.visible_bias) < RATIO_GUARD
    bad_c = np.abs(params.hidden_bias) < RATIO_GUARD
    alpha = np.where(bad_b, np.nan, row / np.where(bad_b, 1.0, params.visible_bias))
    beta = np.where(bad_c, np.nan, col / np.where(bad_c, 1.0, params.hidden_bias))
    return SymmetryReport(
        alpha,
        beta,
        tuple(int(i) for i in np.flatnonzero(bad_b)),
        tuple(int(j) for j in np.flatnonzero(bad_c)),
        float("nan"),
    )


def z2_invariance_check(params: RbmParams) -> float:
    """max over v of |p(v) - p(flip-all-bits v)| by enumeration.

    Reversing the enumerated probability vector maps each basis index to
    its bitwise complement.
    """
    probs = exact_distribution(params).probabilities
    return float(np.abs(probs - probs[::-1]).max())


def full_symmetry_report(params: RbmParams) -> SymmetryReport:
    """Bias ratios plus the enumerated Z2 deviation (visible-count capped)."""
    partial = bias_ratios(params)
    return SymmetryReport(
        partial.alpha,
        partial.beta,
        partial.undefined_alpha,
        partial.undefined_beta,
        z2_invariance_check(params),
    )
