"""Random site occupancy with a counter-based, order-independent generator.

Each site's coin flip is a pure function of (seed, canonical site index),
where the canonical index packs the site's donor-relative coordinates on
the quarter-cell integer grid. Occupancy therefore does not depend on
enumeration order or worker count, and a site keeps its decision when the
cube is enlarged, which gives common random numbers across lattice sizes
in convergence studies.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..constants import SI29_ABUNDANCE, SI_LATTICE_NM

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_COORD_OFFSET = np.int64(1 << 20)  # shifts quarter-grid coordinates positive


@dataclasses.dataclass(frozen=True)
class BathConfiguration:
    """One random placement of bath spins, donor-relative positions in nm.

    couplings_j and pairs are filled in by the coupling step; a freshly
    occupied configuration carries sites only.
    """

    seed: int
    positions: np.ndarray                       # (N, 3) nm
    couplings_j: np.ndarray | None = None       # (N,) MHz
    pair_indices: np.ndarray | None = None      # (P, 2) indices into positions
    pair_b: np.ndarray | None = None            # (P,) MHz

    def __post_init__(self):
        self.positions.setflags(write=False)
        for arr in (self.couplings_j, self.pair_indices, self.pair_b):
            if arr is not None:
                arr.setflags(write=False)


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on uint64."""
    x = (x + _GAMMA).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


def _site_keys(positions: np.ndarray, a0_nm: float) -> np.ndarray:
    """Canonical uint64 index per site from quarter-grid coordinates."""
    q = np.rint(positions * (4.0 / a0_nm)).astype(np.int64)
    if np.any(np.abs(q) >= _COORD_OFFSET):
        raise ValueError("lattice too large for the coordinate key")
    shifted = (q + _COORD_OFFSET).astype(np.uint64)
    return shifted[:, 0] | (shifted[:, 1] << np.uint64(21)) | (shifted[:, 2] << np.uint64(42))


def occupy(
    sites: np.ndarray,
    abundance: float = SI29_ABUNDANCE,
    seed: int = 0,
    a0_nm: float = SI_LATTICE_NM,
) -> BathConfiguration:
    """Independent per-site occupation with the given probability.

    The donor site (the origin) is never occupied. Bit-exact across
    platforms: decisions use integer hashing only.
    """
    if not 0.0 <= abundance <= 1.0:
        raise ValueError("abundance must lie in [0, 1]")
    sites = np.asarray(sites, dtype=float)
    keys = _site_keys(sites, a0_nm)
    seed_mixed = _mix64(np.array([seed % (1 << 64)], dtype=np.uint64))[0]
    stream = _mix64(seed_mixed ^ keys)
    uniform = (stream >> np.uint64(11)).astype(np.float64) * 2.0**-53
    chosen = uniform < abundance
    chosen &= keys != _site_keys(np.zeros((1, 3)), a0_nm)[0]  # exclude the donor
    return BathConfiguration(seed=seed, positions=sites[chosen].copy())
