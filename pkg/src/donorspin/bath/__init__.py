"""Nuclear spin bath: lattice, occupancy, couplings, pair echoes, ensembles."""

from .couplings import KohnLuttingerModel, dipolar_b, enumerate_pairs, superhyperfine_j
from .echo import EchoCurve, cce2_echo, pair_echo
from .ensemble import (
    SECOND_NN_FACTOR,
    THIRD_NN_FACTOR,
    CceParams,
    ConvergenceResult,
    build_configuration,
    convergence_study,
    ensemble_echo,
)
from .lattice import LatticeSpec, generate_lattice
from .occupancy import BathConfiguration, occupy

__all__ = [
    "BathConfiguration",
    "CceParams",
    "ConvergenceResult",
    "EchoCurve",
    "KohnLuttingerModel",
    "LatticeSpec",
    "SECOND_NN_FACTOR",
    "THIRD_NN_FACTOR",
    "build_configuration",
    "cce2_echo",
    "convergence_study",
    "dipolar_b",
    "ensemble_echo",
    "enumerate_pairs",
    "generate_lattice",
    "occupy",
    "pair_echo",
    "superhyperfine_j",
]
