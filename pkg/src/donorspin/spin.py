"""Coupled electron-nuclear spin system: operators, Hamiltonian, eigenstructure.

The working Hamiltonian (units of ordinary frequency, MHz) is

    H = f0*Sz - f0*delta*Iz + A*(S.I),    f0 = g*mu_B*B/h,

for an electron spin S = 1/2 coupled to a nuclear spin I through an
isotropic hyperfine constant A. The nuclear Zeeman term is expressed
through the ratio delta of nuclear to electronic Zeeman frequencies.

Total spin projection m = m_s + m_I is conserved, so the Hamiltonian is
block diagonal in m: 2x2 blocks for |m| <= I - 1/2 (the doublets) and
1x1 blocks for m = +/-(I + 1/2) (the unmixed stretched states).
Diagonalization works block by block, which keeps eigenvectors inside
their exact m sector even at crossings and at B = 0.

States carry adiabatic labels 1..D fixed by the high-field ordering:
lower branch (-) of doublet m gets label (I + 1/2) - m, upper branch (+)
gets 3*(I + 1/2) + m. For Si:Bi (I = 9/2, D = 20) this is the usual
numbering where state 10 is |m_s=-1/2, m_I=-9/2> and state 20 is
|m_s=+1/2, m_I=+9/2>.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from .constants import (
    BI_G_FACTOR,
    BI_HYPERFINE_MHZ,
    BI_NUCLEAR_SPIN,
    BI_NUCLEAR_ZEEMAN_DELTA,
    CONSTANTS,
)


def _check_spin(j: float) -> float:
    if j < 0 or abs(2 * j - round(2 * j)) > 1e-9:
        raise ValueError(f"spin must be a non-negative half-integer, got {j}")
    return round(2 * j) / 2


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Jx, Jy, Jz) for spin j in the descending-m basis.

    Basis order is m = j, j-1, ..., -j. Matrices are complex, shape
    (2j+1, 2j+1), and satisfy [Jx, Jy] = i Jz.
    """
    j = _check_spin(j)
    dim = int(round(2 * j)) + 1
    m = j - np.arange(dim)
    jz = np.diag(m).astype(complex)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); with descending order the
    # raising operator sits on the superdiagonal.
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jplus = np.zeros((dim, dim), dtype=complex)
    jplus[np.arange(dim - 1), np.arange(1, dim)] = ladder
    jminus = jplus.conj().T
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    return jx, jy, jz


@dataclasses.dataclass(frozen=True)
class SpinSystem:
    """A donor: electron spin 1/2 coupled to one nuclear spin.

    hyperfine_mhz is A, g_factor the electron g value, and
    nuclear_zeeman_delta the ratio of nuclear to electronic Zeeman
    frequencies (positive for Bi-209).
    """

    electron_spin: float
    nuclear_spin: float
    hyperfine_mhz: float
    g_factor: float
    nuclear_zeeman_delta: float

    def __post_init__(self):
        if _check_spin(self.electron_spin) != 0.5:
            raise ValueError("only electron spin 1/2 is supported")
        if _check_spin(self.nuclear_spin) < 0.5:
            raise ValueError("nuclear spin must be at least 1/2")
        if self.hyperfine_mhz <= 0:
            raise ValueError("hyperfine coupling must be positive")

    @property
    def dimension(self) -> int:
        return 2 * (int(round(2 * self.nuclear_spin)) + 1)

    def zeeman_mhz(self, b_field: float) -> float:
        """Electron Zeeman frequency f0 = g*mu_B*B/h in MHz (B in tesla)."""
        return self.g_factor * CONSTANTS.bohr_magneton * b_field / CONSTANTS.planck_h / 1e6

    def doublet_ms(self) -> np.ndarray:
        """All conserved projections m = m_s + m_I, descending."""
        top = self.nuclear_spin + 0.5
        return top - np.arange(int(round(2 * top)) + 1)

    def label_of(self, m: float, branch: int) -> int:
        """Adiabatic label for (m, branch); branch is +1 or -1."""
        top = self.nuclear_spin + 0.5
        if branch not in (+1, -1):
            raise ValueError("branch must be +1 or -1")
        if abs(m) > top or (branch == +1 and m == -top) or (branch == -1 and m == top):
            raise ValueError(f"no state with m={m}, branch={branch:+d}")
        label = 3 * top + m if branch == +1 else top - m
        rounded = round(label)
        if abs(label - rounded) > 1e-9:
            raise ValueError(f"non-integer label for m={m}")
        return int(rounded)


def si_bi() -> SpinSystem:
    """The Si:Bi donor (I = 9/2, A = 1475.4 MHz)."""
    return SpinSystem(
        electron_spin=0.5,
        nuclear_spin=BI_NUCLEAR_SPIN,
        hyperfine_mhz=BI_HYPERFINE_MHZ,
        g_factor=BI_G_FACTOR,
        nuclear_zeeman_delta=BI_NUCLEAR_ZEEMAN_DELTA,
    )


@dataclasses.dataclass(frozen=True)
class SpinOperators:
    """Product-space operators for one donor, all shape (D, D), complex."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray
    s_dot_i: np.ndarray


@lru_cache(maxsize=16)
def _operators_cached(two_s: int, two_i: int) -> SpinOperators:
    sx1, sy1, sz1 = spin_matrices(two_s / 2)
    ix1, iy1, iz1 = spin_matrices(two_i / 2)
    es = np.eye(two_s + 1)
    en = np.eye(two_i + 1)
    ops = SpinOperators(
        sx=np.kron(sx1, en),
        sy=np.kron(sy1, en),
        sz=np.kron(sz1, en),
        ix=np.kron(es, ix1),
        iy=np.kron(es, iy1),
        iz=np.kron(es, iz1),
        s_dot_i=np.kron(sx1, ix1) + np.kron(sy1, iy1) + np.kron(sz1, iz1),
    )
    for a in dataclasses.astuple(ops):
        a.setflags(write=False)
    return ops


def spin_operators(sys: SpinSystem) -> SpinOperators:
    """Operators in the product basis |m_s> x |m_I>, both descending."""
    return _operators_cached(int(round(2 * sys.electron_spin)), int(round(2 * sys.nuclear_spin)))


def build_hamiltonian(sys: SpinSystem, b_field: float) -> np.ndarray:
    """Hamiltonian matrix (MHz) at field b_field (tesla), shape (D, D)."""
    ops = spin_operators(sys)
    f0 = sys.zeeman_mhz(b_field)
    h = f0 * ops.sz - f0 * sys.nuclear_zeeman_delta * ops.iz + sys.hyperfine_mhz * ops.s_dot_i
    return h


@dataclasses.dataclass(frozen=True)
class DonorEigensystem:
    """Eigenstructure at one field, stored in adiabatic-label order.

    energies[k] and states[:, k] belong to label k+1; doublet_m[k] and
    branches[k] give the conserved projection and the +/- branch.
    """

    system: SpinSystem
    field_b: float
    energies: np.ndarray        # (D,) MHz
    states: np.ndarray          # (D, D) complex, column per label
    doublet_m: np.ndarray       # (D,)
    branches: np.ndarray        # (D,) values +1 / -1

    def __post_init__(self):
        for a in (self.energies, self.states, self.doublet_m, self.branches):
            a.setflags(write=False)

    def energy(self, label: int) -> float:
        self._check_label(label)
        return float(self.energies[label - 1])

    def state(self, label: int) -> np.ndarray:
        self._check_label(label)
        return self.states[:, label - 1]

    def m_branch(self, label: int) -> tuple[float, int]:
        self._check_label(label)
        return float(self.doublet_m[label - 1]), int(self.branches[label - 1])

    def _check_label(self, label: int):
        if not 1 <= label <= self.system.dimension:
            raise ValueError(f"label must be in 1..{self.system.dimension}, got {label}")


def _m_block_indices(sys: SpinSystem) -> list[tuple[float, list[int]]]:
    """Product-basis indices per m block; 2-dim blocks list m_s=+1/2 first."""
    ni = int(round(2 * sys.nuclear_spin)) + 1
    i_val = sys.nuclear_spin
    blocks = []
    for m in sys.doublet_ms():
        idx = []
        for i_s, m_s in ((0, 0.5), (1, -0.5)):
            m_i = m - m_s
            if abs(m_i) <= i_val + 1e-9:
                i_i = int(round(i_val - m_i))
                idx.append(i_s * ni + i_i)
        blocks.append((float(m), idx))
    return blocks


def diagonalize(sys: SpinSystem, b_field: float) -> DonorEigensystem:
    """Eigendecomposition at one field, labelled adiabatically.

    Works per m block (m is conserved), so labels stay consistent through
    level crossings; within a block the upper-energy state is the +
    branch. Columns are orthonormal with residual |Hv - Ev| at solver
    precision.
    """
    h = build_hamiltonian(sys, b_field)
    dim = sys.dimension
    energies = np.empty(dim)
    states = np.zeros((dim, dim), dtype=complex)
    doublet_m = np.empty(dim)
    branches = np.empty(dim, dtype=int)

    for m, idx in _m_block_indices(sys):
        sub = h[np.ix_(idx, idx)]
        if len(idx) == 1:
            branch = -1 if m < 0 else +1
            label = sys.label_of(m, branch)
            energies[label - 1] = sub[0, 0].real
            states[idx[0], label - 1] = 1.0
            doublet_m[label - 1] = m
            branches[label - 1] = branch
            continue
        vals, vecs = np.linalg.eigh(sub)
        for pos, branch in ((0, -1), (1, +1)):
            label = sys.label_of(m, branch)
            energies[label - 1] = vals[pos]
            vec = vecs[:, pos]
            # fix the arbitrary sign: largest-magnitude component positive
            lead = np.argmax(np.abs(vec))
            if vec[lead].real < 0:
                vec = -vec
            states[np.asarray(idx), label - 1] = vec
            doublet_m[label - 1] = m
            branches[label - 1] = branch
    return DonorEigensystem(
        system=sys,
        field_b=b_field,
        energies=energies,
        states=states,
        doublet_m=doublet_m,
        branches=branches,
    )


def expectation_sz(eigensystem: DonorEigensystem, label: int) -> float:
    """<Sz> of the labelled state; +/- cos(theta_m)/2 on a doublet branch."""
    psi = eigensystem.state(label)
    ops = spin_operators(eigensystem.system)
    return float(np.real(psi.conj() @ (ops.sz @ psi)))


def concurrence(eigensystem: DonorEigensystem, label: int) -> float:
    """Electron-nuclear entanglement C = sqrt(2 (1 - Tr rho_e^2)).

    rho_e is the reduced electron density matrix of the pure eigenstate.
    C is |sin theta_m| on a doublet branch and exactly 0 for the
    stretched states.
    """
    sys = eigensystem.system
    ni = int(round(2 * sys.nuclear_spin)) + 1
    psi = eigensystem.state(label).reshape(2, ni)
    rho_e = psi @ psi.conj().T
    purity = float(np.real(np.trace(rho_e @ rho_e)))
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - purity))))
