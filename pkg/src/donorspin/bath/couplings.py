"""Donor-bath and bath-bath couplings on the silicon lattice.

The donor electron couples to a ²⁹Si nucleus through the contact density
of its six-valley effective-mass wavefunction at the site; bath nuclei
couple pairwise through the secular like-spin dipolar interaction.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.spatial import cKDTree

from ..constants import CONSTANTS, BI_G_FACTOR, SI_LATTICE_NM

PAIR_D2_TOL_NM2 = 1e-9  # squared-distance slack when classifying shells


@dataclasses.dataclass(frozen=True)
class KohnLuttingerModel:
    """Six-valley donor wavefunction with anisotropic hydrogenic envelopes.

    The envelope radii are the effective-mass Bohr radii (a transverse,
    b longitudinal) shrunk by n = sqrt(E0/Ei) for a donor with ionization
    energy Ei; eta is the central-cell charge-density enhancement. All
    values are independently overridable.
    """

    ionization_mev: float = 69.0
    rydberg_mev: float = 31.3
    radius_a_nm: float = 2.509
    radius_b_nm: float = 1.443
    eta: float = 186.0
    k0_factor: float = 0.85
    a0_nm: float = SI_LATTICE_NM
    g_factor: float = BI_G_FACTOR

    def __post_init__(self):
        if min(self.ionization_mev, self.rydberg_mev, self.radius_a_nm, self.radius_b_nm) <= 0:
            raise ValueError("model energies and radii must be positive")

    @property
    def n_scale(self) -> float:
        return math.sqrt(self.rydberg_mev / self.ionization_mev)

    @property
    def k0_per_nm(self) -> float:
        return self.k0_factor * 2.0 * math.pi / self.a0_nm

    def psi_squared(self, positions: np.ndarray) -> np.ndarray:
        """|psi|^2 in nm^-3 at donor-relative positions (nm)."""
        pos = np.atleast_2d(np.asarray(positions, dtype=float))
        na = self.n_scale * self.radius_a_nm
        nb = self.n_scale * self.radius_b_nm
        norm = 1.0 / math.sqrt(math.pi * na * na * nb)
        r2 = np.sum(pos * pos, axis=1)
        psi = np.zeros(len(pos))
        # valleys +-x, +-y, +-z; the two valleys of an axis contribute
        # identically (even envelope, even cosine)
        for axis in range(3):
            longitudinal = pos[:, axis]
            rho2 = r2 - longitudinal * longitudinal
            arg = np.sqrt(rho2 / (na * na) + (longitudinal * longitudinal) / (nb * nb))
            envelope = norm * np.exp(-arg)
            psi += 2.0 * envelope * np.cos(self.k0_per_nm * longitudinal)
        psi /= math.sqrt(6.0)
        return psi * psi


def superhyperfine_j(
    positions: np.ndarray, model: KohnLuttingerModel = KohnLuttingerModel()
) -> np.ndarray:
    """Contact coupling J in MHz at donor-relative positions (nm).

    J = (4 mu0 / 3) * (g mu_B) * gamma_si * eta * |psi|^2 with gamma_si in
    Hz/T and |psi|^2 in m^-3; gamma_si < 0 makes J negative everywhere the
    valley interference does not flip its sign.
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if np.any(np.sum(pos * pos, axis=1) == 0.0):
        raise ValueError("superhyperfine coupling is not defined at the donor site")
    prefactor_si = (
        (4.0 * CONSTANTS.vacuum_permeability / 3.0)
        * model.g_factor
        * CONSTANTS.bohr_magneton
        * (CONSTANTS.gyromagnetic_si29 * 1e6)
        * model.eta
    )
    # nm^-3 -> m^-3 is 1e27, Hz -> MHz is 1e-6
    return prefactor_si * model.psi_squared(pos) * 1e27 * 1e-6


def dipolar_b(
    pos_k: np.ndarray, pos_l: np.ndarray, b_direction: np.ndarray
) -> float | np.ndarray:
    """Secular like-spin dipolar coefficient b in MHz.

    b = -(mu0/4pi) * (gamma_si h)^2 * (1 - 3 cos^2 theta) / (h r^3), with
    theta the angle between the pair axis and the field direction. Enters
    the pair Hamiltonian as b * [Ikz Ilz - (Ik+Il- + Ik-Il+)/4].
    """
    pk = np.atleast_2d(np.asarray(pos_k, dtype=float))
    pl = np.atleast_2d(np.asarray(pos_l, dtype=float))
    direction = np.asarray(b_direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    delta = pl - pk
    r = np.linalg.norm(delta, axis=1)
    if np.any(r == 0.0):
        raise ValueError("coincident bath sites")
    cos_theta = (delta @ direction) / r
    gamma_hz = CONSTANTS.gyromagnetic_si29 * 1e6
    # (mu0/4pi) gamma^2 h / r^3, with r in nm -> m (1e-27) and Hz -> MHz
    scale = 1e-7 * gamma_hz * gamma_hz * CONSTANTS.planck_h / 1e-27 / 1e6
    out = -scale * (1.0 - 3.0 * cos_theta * cos_theta) / r**3
    return float(out[0]) if np.ndim(pos_k) == 1 and np.ndim(pos_l) == 1 else out


def enumerate_pairs(positions: np.ndarray, r_max_nm: float) -> np.ndarray:
    """All index pairs with separation <= r_max, sorted, as a (P, 2) array.

    Membership uses the squared distance with a small absolute slack so
    shell-radius cutoffs (exact lattice distances) are inclusive.
    """
    if r_max_nm <= 0:
        raise ValueError("pair cutoff must be positive")
    pos = np.asarray(positions, dtype=float)
    if len(pos) < 2:
        return np.empty((0, 2), dtype=np.intp)
    tree = cKDTree(pos)
    pairs = tree.query_pairs(r_max_nm * (1.0 + 1e-9) + 1e-12, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.intp)
    d2 = np.sum((pos[pairs[:, 0]] - pos[pairs[:, 1]]) ** 2, axis=1)
    pairs = pairs[d2 <= r_max_nm * r_max_nm + PAIR_D2_TOL_NM2]
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]
