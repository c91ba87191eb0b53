"""Closed-form two-level reduction of the coupled spin Hamiltonian.

Each conserved projection m with |m| <= I - 1/2 spans a doublet
{|+1/2, m-1/2>, |-1/2, m+1/2>} on which the Hamiltonian acts as

    h_m = Delta_m sigma_z + Omega_m sigma_x - eps_m * 1

with (all in MHz)

    Delta_m = [m A + f0 (1 + delta)] / 2
    Omega_m = (A / 2) sqrt((I + 1/2)^2 - m^2)
    eps_m   = A / 4 + m delta f0.

Eigenvalues are E+- = +-beta_m - eps_m, beta_m = sqrt(Delta^2 + Omega^2),
and the mixing angle theta_m = atan2(Omega_m, Delta_m) in (0, pi) fixes
the eigenvectors

    |+, m> = cos(theta/2) |+1/2, m-1/2> + sin(theta/2) |-1/2, m+1/2>
    |-, m> = cos(theta/2) |-1/2, m+1/2> - sin(theta/2) |+1/2, m-1/2>.

The stretched states m = +-(I + 1/2) are field-independent product
states with E = +-f0/2 -+ I f0 delta + I A / 2.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .constants import CONSTANTS
from .spin import SpinSystem


@dataclasses.dataclass(frozen=True)
class DoubletParams:
    """Analytic parameters of one doublet at one field (all MHz but theta)."""

    m: float
    delta_detuning: float   # Delta_m
    omega: float            # Omega_m, > 0 for every doublet
    eps: float              # common shift eps_m
    beta: float             # sqrt(Delta^2 + Omega^2)
    theta: float            # mixing angle, in (0, pi)


def _check_doublet_m(sys: SpinSystem, m: float) -> float:
    top = sys.nuclear_spin + 0.5
    if abs(m) > top - 1 + 1e-9:
        raise ValueError(f"m={m} is not a doublet of I={sys.nuclear_spin}")
    if abs(m - round(m)) > 1e-9 and abs(2 * m - round(2 * m)) > 1e-9:
        raise ValueError(f"m={m} is not on the m ladder")
    return m


def doublet_params(sys: SpinSystem, m: float, b_field: float) -> DoubletParams:
    """Doublet parameters for projection m at field b_field (tesla)."""
    m = _check_doublet_m(sys, m)
    a = sys.hyperfine_mhz
    f0 = sys.zeeman_mhz(b_field)
    top = sys.nuclear_spin + 0.5
    delta_detuning = 0.5 * (m * a + f0 * (1.0 + sys.nuclear_zeeman_delta))
    omega = 0.5 * a * math.sqrt(top * top - m * m)
    eps = 0.25 * a + m * sys.nuclear_zeeman_delta * f0
    beta = math.hypot(delta_detuning, omega)
    theta = math.atan2(omega, delta_detuning)
    return DoubletParams(
        m=m, delta_detuning=delta_detuning, omega=omega, eps=eps, beta=beta, theta=theta
    )


def doublet_energies(sys: SpinSystem, m: float, b_field: float) -> tuple[float, float]:
    """(E-, E+) of the m doublet in MHz."""
    p = doublet_params(sys, m, b_field)
    return (-p.beta - p.eps, p.beta - p.eps)


def doublet_state(sys: SpinSystem, m: float, b_field: float, branch: int) -> np.ndarray:
    """Analytic eigenvector of (m, branch) embedded in the product basis."""
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    p = doublet_params(sys, m, b_field)
    ni = int(round(2 * sys.nuclear_spin)) + 1
    i_val = sys.nuclear_spin
    up = int(round(i_val - (m - 0.5)))          # index of |+1/2, m-1/2>
    dn = ni + int(round(i_val - (m + 0.5)))     # index of |-1/2, m+1/2>
    vec = np.zeros(2 * ni)
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    if branch == +1:
        vec[up], vec[dn] = c, s
    else:
        vec[up], vec[dn] = -s, c
    return vec


def unmixed_energies(sys: SpinSystem, b_field: float) -> tuple[float, float]:
    """(E of m = -(I+1/2), E of m = +(I+1/2)) stretched states, MHz."""
    a = sys.hyperfine_mhz
    i_val = sys.nuclear_spin
    f0 = sys.zeeman_mhz(b_field)
    common = 0.5 * i_val * a
    lower = -0.5 * f0 + i_val * sys.nuclear_zeeman_delta * f0 + common
    upper = +0.5 * f0 - i_val * sys.nuclear_zeeman_delta * f0 + common
    return lower, upper


def bell_field(sys: SpinSystem, m: float) -> float:
    """Field (tesla) where the m doublet is maximally entangled.

    Delta_m = 0 requires m A + f0 (1 + delta) = 0, which has a positive
    solution only for negative doublet m:

        B = -m A h / (g mu_B (1 + delta)).

    At this field theta_m = pi/2, both branches are even/odd Bell-like
    superpositions, <Sz> vanishes and the concurrence is 1.
    """
    m = _check_doublet_m(sys, m)
    if m >= 0:
        raise ValueError("maximal mixing needs m < 0 (Delta_m = 0 unreachable)")
    f0 = -m * sys.hyperfine_mhz / (1.0 + sys.nuclear_zeeman_delta)
    return f0 * 1e6 * CONSTANTS.planck_h / (sys.g_factor * CONSTANTS.bohr_magneton)
