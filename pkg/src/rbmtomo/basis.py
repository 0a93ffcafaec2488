"""Computational-basis conventions shared by every module.

Basis states over N sites are indexed by integers a in [0, 2^N).  Site i
occupies integer bit N-1-i, so the N-character bitstring of a (MSB first)
reads left to right as sites 0..N-1.  Bit value 1 means spin up
(sigma = +1); spin values are sigma_i = 2 v_i - 1.
"""

import numpy as np


def all_states(n: int) -> np.ndarray:
    """Enumerate the full basis as a (2^n, n) uint8 matrix of occupation bits.

    Row a equals the bits of index a, site 0 in column 0.
    """
    if not 1 <= n <= 24:
        raise ValueError(f"basis enumeration limited to 24 sites, got {n}")
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def states_to_indices(states: np.ndarray) -> np.ndarray:
    """Map rows of occupation bits back to basis indices (inverse of all_states)."""
    states = np.asarray(states)
    n = states.shape[-1]
    weights = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    return states.astype(np.int64) @ weights


def index_to_bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def bitstring_to_bits(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def spins(states: np.ndarray) -> np.ndarray:
    """Occupation bits {0,1} to spin values {-1,+1} as float64."""
    return 2.0 * np.asarray(states, dtype=np.float64) - 1.0
