"""Magnetic-resonance observables: resonance fields, intensities, spectra.

Allowed transitions connect adjacent doublets (the total projection m
changes by +-1); the drive couples through Sx x 1 only, so transition
intensities are |<i| Sx x 1 |j>|^2 with maximum 1/4. Resonance fields
solve |E_i(B) - E_j(B)| = f for a fixed excitation frequency f; the
solver scans a field grid, brackets sign changes, probes turning points
of the frequency curve so near-tangent root pairs are not missed, and
polishes every root by bisection.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .spin import DonorEigensystem, SpinSystem, diagonalize, spin_operators

SCAN_STEP_T = 0.5e-3        # resonance-search grid pitch
FIELD_TOL_T = 1e-6          # bisection stops at this bracket width
DFDB_STEP_T = 0.1e-3        # central-difference step for df/dB
INTENSITY_FLOOR = 1e-4      # default cut on |<Sx>|^2 (scale: max is 1/4)


@dataclasses.dataclass(frozen=True)
class Transition:
    """One resonance: labels ordered by energy at the resonance field."""

    label_upper: int
    label_lower: int
    field_b: float              # tesla
    frequency: float            # MHz
    sx_element: float           # |<upper| Sx x 1 |lower>|
    intensity: float            # sx_element squared
    dfdb_mhz_per_mt: float

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("transition frequency must be positive")
        if not 0 < self.intensity <= 0.25 + 1e-12:
            raise ValueError("intensity must lie in (0, 1/4]")


@dataclasses.dataclass(frozen=True)
class SpectrumCurve:
    """Synthesized spectrum on a field grid (tesla); mode names the shape."""

    field_grid: np.ndarray
    signal: np.ndarray
    mode: str

    def __post_init__(self):
        self.field_grid.setflags(write=False)
        self.signal.setflags(write=False)


def transition_frequency(sys: SpinSystem, label_i: int, label_j: int, b_field: float) -> float:
    """|E_i - E_j| in MHz at one field."""
    es = diagonalize(sys, b_field)
    return abs(es.energy(label_i) - es.energy(label_j))


def sx_matrix_element(sys: SpinSystem, label_i: int, label_j: int, b_field: float) -> float:
    """|<i| Sx x 1 |j>| at one field; exactly 0 unless |m_i - m_j| = 1."""
    es = diagonalize(sys, b_field)
    ops = spin_operators(sys)
    return abs(complex(es.state(label_i).conj() @ (ops.sx @ es.state(label_j))))


def rabi_frequency(sys: SpinSystem, label_i: int, label_j: int, b_field: float, f1_mhz: float) -> float:
    """Nutation frequency 2 * f1 * |<Sx>| in MHz.

    f1 = g mu_B B1 / (2 h) is the drive amplitude in frequency units; a
    bare electron spin 1/2 (matrix element 1/2) nutates at exactly f1.
    """
    return 2.0 * f1_mhz * sx_matrix_element(sys, label_i, label_j, b_field)


def df_db(sys: SpinSystem, label_i: int, label_j: int, b_field: float) -> float:
    """Field sensitivity d|E_i - E_j|/dB in MHz/mT (central difference)."""
    h = DFDB_STEP_T
    lo = max(b_field - h, 0.0)
    hi = b_field + h
    f_hi = transition_frequency(sys, label_i, label_j, hi)
    f_lo = transition_frequency(sys, label_i, label_j, lo)
    return (f_hi - f_lo) / ((hi - lo) * 1e3)


def _bisect(func, lo: float, hi: float, f_lo: float) -> float:
    """Root of func inside [lo, hi] given func(lo) = f_lo with a sign change."""
    while hi - lo > FIELD_TOL_T:
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0) != (f_mid < 0):
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _refine_extremum(func, lo: float, hi: float, maximize: bool):
    """Ternary search for an interior extremum of func on [lo, hi]."""
    sign = 1.0 if maximize else -1.0
    while hi - lo > FIELD_TOL_T:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if sign * func(m1) < sign * func(m2):
            lo = m1
        else:
            hi = m2
    mid = 0.5 * (lo + hi)
    return mid, func(mid)


def _grid_roots(func, grid: np.ndarray, values: np.ndarray) -> list[float]:
    """All roots of func on the grid: sign-change brackets plus extremum probes."""
    roots = []
    for k in range(len(grid) - 1):
        ga, gb = values[k], values[k + 1]
        if ga == 0.0:
            roots.append(float(grid[k]))
            continue
        if (ga < 0) != (gb < 0):
            roots.append(_bisect(func, float(grid[k]), float(grid[k + 1]), ga))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))

    # probe turning points: a local extremum close to zero hides a root
    # pair that the plain scan cannot bracket
    slopes = np.diff(values)
    for k in range(len(slopes) - 1):
        if slopes[k] == 0.0 or (slopes[k] < 0) == (slopes[k + 1] < 0):
            continue
        lo, hi = float(grid[k]), float(grid[k + 2])
        maximize = slopes[k] > 0
        bx, gx = _refine_extremum(func, lo, hi, maximize)
        if abs(gx) <= 1e-9:
            roots.append(bx)
        elif (values[k] < 0) != (gx < 0):
            roots.append(_bisect(func, lo, bx, values[k]))
            roots.append(_bisect(func, bx, hi, gx))

    roots.sort()
    unique = []
    for r in roots:
        if not unique or r - unique[-1] > 2 * FIELD_TOL_T:
            unique.append(r)
    return unique


def resonance_fields(
    sys: SpinSystem,
    label_i: int,
    label_j: int,
    frequency: float,
    b_range: tuple[float, float],
) -> list[float]:
    """All fields in b_range (tesla) where |E_i - E_j| equals frequency.

    Fields are refined to within FIELD_TOL_T; an empty list means the
    transition never reaches the requested frequency in range.
    """
    if frequency <= 0:
        raise ValueError("target frequency must be positive")
    lo, hi = b_range
    if not 0 <= lo < hi:
        raise ValueError(f"invalid field range {b_range}")
    n = int(math.ceil((hi - lo) / SCAN_STEP_T)) + 1
    grid = np.linspace(lo, hi, n)

    def g(b: float) -> float:
        return transition_frequency(sys, label_i, label_j, b) - frequency

    values = np.array([g(b) for b in grid])
    return _grid_roots(g, grid, values)


def _adjacent_pairs(sys: SpinSystem) -> list[tuple[int, int]]:
    """Label pairs whose doublets differ by exactly one unit of m."""
    es = diagonalize(sys, 1e-4)  # labels and m are field-independent
    dim = sys.dimension
    pairs = []
    for i in range(1, dim + 1):
        m_i, _ = es.m_branch(i)
        for j in range(i + 1, dim + 1):
            m_j, _ = es.m_branch(j)
            if abs(m_i - m_j) == 1.0:
                pairs.append((i, j))
    return pairs


def _transition_at(sys: SpinSystem, label_i: int, label_j: int, b_root: float, frequency: float) -> Transition:
    es = diagonalize(sys, b_root)
    ops = spin_operators(sys)
    upper, lower = label_i, label_j
    if es.energy(upper) < es.energy(lower):
        upper, lower = lower, upper
    sx = abs(complex(es.state(upper).conj() @ (ops.sx @ es.state(lower))))
    return Transition(
        label_upper=upper,
        label_lower=lower,
        field_b=b_root,
        frequency=frequency,
        sx_element=sx,
        intensity=sx * sx,
        dfdb_mhz_per_mt=df_db(sys, upper, lower, b_root),
    )


def find_all_resonances(
    sys: SpinSystem,
    frequency: float,
    b_range: tuple[float, float],
    intensity_floor: float = INTENSITY_FLOOR,
) -> list[Transition]:
    """Every resonance of every allowed pair at one excitation frequency.

    Scans all adjacent-doublet label pairs over b_range, keeps roots whose
    intensity exceeds intensity_floor, and returns transitions sorted by
    field. The energy table over the scan grid is shared between pairs.
    """
    if frequency <= 0:
        raise ValueError("target frequency must be positive")
    lo, hi = b_range
    if not 0 <= lo < hi:
        raise ValueError(f"invalid field range {b_range}")
    n = int(math.ceil((hi - lo) / SCAN_STEP_T)) + 1
    grid = np.linspace(lo, hi, n)
    table = np.array([diagonalize(sys, b).energies for b in grid])

    found = []
    for label_i, label_j in _adjacent_pairs(sys):
        values = np.abs(table[:, label_i - 1] - table[:, label_j - 1]) - frequency

        def g(b: float, li=label_i, lj=label_j) -> float:
            return transition_frequency(sys, li, lj, b) - frequency

        for root in _grid_roots(g, grid, values):
            tr = _transition_at(sys, label_i, label_j, root, frequency)
            if tr.intensity > intensity_floor:
                found.append(tr)
    found.sort(key=lambda t: t.field_b)
    return found


def synthesize_spectrum(
    transitions: list[Transition],
    fwhm_mt: float,
    mode: str,
    field_grid: np.ndarray,
) -> SpectrumCurve:
    """Sum of Gaussian lines, area proportional to intensity.

    mode "absorption" stacks unit-area Gaussians scaled by intensity;
    mode "derivative" stacks their field derivatives (the usual
    continuous-wave lineshape). field_grid is in tesla, fwhm in mT.
    """
    if mode not in ("absorption", "derivative"):
        raise ValueError(f"unknown spectrum mode {mode!r}")
    if fwhm_mt <= 0:
        raise ValueError("fwhm must be positive")
    grid = np.asarray(field_grid, dtype=float)
    sigma = fwhm_mt * 1e-3 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    signal = np.zeros_like(grid)
    for tr in transitions:
        x = (grid - tr.field_b) / sigma
        peak = tr.intensity * np.exp(-0.5 * x * x) / (sigma * math.sqrt(2.0 * math.pi))
        if mode == "derivative":
            peak *= -x / sigma
        signal += peak
    return SpectrumCurve(field_grid=grid, signal=signal, mode=mode)


_MAP_DTYPE = np.dtype(
    [
        ("field_b", float),
        ("freq_mhz", float),
        ("intensity", float),
        ("label_upper", int),
        ("label_lower", int),
    ]
)


def frequency_field_map(
    sys: SpinSystem,
    field_grid: np.ndarray,
    intensity_floor: float = INTENSITY_FLOOR,
) -> np.ndarray:
    """Transition frequency and intensity of every allowed pair vs field.

    Returns a structured array over all adjacent-doublet pairs and grid
    fields, keeping rows with intensity above the floor. Degenerate pairs
    (frequency numerically zero, e.g. within a zero-field multiplet) are
    not transitions and are dropped.
    """
    pairs = _adjacent_pairs(sys)
    ops = spin_operators(sys)
    rows = []
    for b in np.asarray(field_grid, dtype=float):
        es = diagonalize(sys, float(b))
        sx_all = es.states.conj().T @ ops.sx @ es.states
        for label_i, label_j in pairs:
            freq = abs(es.energy(label_i) - es.energy(label_j))
            if freq <= 1e-9:
                continue
            intensity = abs(sx_all[label_i - 1, label_j - 1]) ** 2
            if intensity <= intensity_floor:
                continue
            upper, lower = label_i, label_j
            if es.energy(upper) < es.energy(lower):
                upper, lower = lower, upper
            rows.append((float(b), freq, intensity, upper, lower))
    out = np.array(rows, dtype=_MAP_DTYPE)
    out.setflags(write=False)
    return out
