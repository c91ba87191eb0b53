"""Diamond-cubic site generation around a central donor."""

from __future__ import annotations

import dataclasses

import numpy as np

from ..constants import SI_LATTICE_NM

# 8-atom basis of the conventional diamond-cubic cell, in units of a0
_BASIS = np.array(
    [
        [0.00, 0.00, 0.00],
        [0.00, 0.50, 0.50],
        [0.50, 0.00, 0.50],
        [0.50, 0.50, 0.00],
        [0.25, 0.25, 0.25],
        [0.25, 0.75, 0.75],
        [0.75, 0.25, 0.75],
        [0.75, 0.75, 0.25],
    ]
)


@dataclasses.dataclass(frozen=True)
class LatticeSpec:
    """Cube of diamond-cubic silicon with the donor at its centre.

    The cube is tiled with whole conventional cells: n = floor(side/a0)
    cells per axis, 8 sites per cell. The donor is placed on the lattice
    site nearest the cube centre (ties broken by lexicographic position)
    and all site coordinates are donor-relative.
    """

    side_nm: float
    a0_nm: float = SI_LATTICE_NM

    def __post_init__(self):
        if self.a0_nm <= 0:
            raise ValueError("lattice constant must be positive")
        if self.cells_per_axis < 2:
            raise ValueError(f"side {self.side_nm} nm must hold at least 2 cells")

    @property
    def cells_per_axis(self) -> int:
        # small slack so side = k * a0 entered in decimal lands on k cells
        return int(np.floor(self.side_nm / self.a0_nm + 1e-9))

    @property
    def site_count(self) -> int:
        return 8 * self.cells_per_axis**3


def generate_lattice(spec: LatticeSpec) -> np.ndarray:
    """All lattice sites of the cube, donor-relative, in nm.

    Returns an (N, 3) array with N = 8 * floor(side/a0)^3; the donor site
    itself is included and sits exactly at the origin. Site order is
    deterministic (cell-major, basis-minor).
    """
    n = spec.cells_per_axis
    cells = np.indices((n, n, n)).reshape(3, -1).T  # (n^3, 3) integer cell origins
    sites = (cells[:, None, :] + _BASIS[None, :, :]).reshape(-1, 3)

    center = np.full(3, n / 2.0)
    d2 = np.sum((sites - center) ** 2, axis=1)
    nearest = np.flatnonzero(d2 <= d2.min() + 1e-12)
    order = np.lexsort((sites[nearest, 2], sites[nearest, 1], sites[nearest, 0]))
    donor = sites[nearest[order[0]]]

    return (sites - donor) * spec.a0_nm
