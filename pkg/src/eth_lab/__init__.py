"""Exact-diagonalization laboratory for quantum chaos and eigenstate
thermalization in spin-1 chains.

Symmetry-resolved spectra, random-matrix baselines, entanglement scaling,
matrix-element statistics, momentum- and distance-resolved spectral
functions, and quench dynamics, with a command-line front end (``eth-lab``).
"""

__version__ = "0.1.0"

from .basis import (OBC, PBC, SectorSpec, SymBasis, build_sym_basis,
                    enumerate_m_sector, momentum_sector_indices,
                    sector_dimension, sector_inventory)
from .config import ConfigError, RunConfig, load_config
from .hamiltonian import (ModelParams, OperatorBlock, build_hamiltonian,
                          build_observable, cross_sector_block,
                          full_space_operator, observable_terms,
                          plain_m_basis)
from .spectra import (FitResult, Histogram, Spectrum, diagonalize, dos,
                      level_spacing_stats, make_histogram, ratio_stats)

__all__ = [
    "__version__",
    "OBC", "PBC", "SectorSpec", "SymBasis", "build_sym_basis",
    "enumerate_m_sector", "momentum_sector_indices", "sector_dimension",
    "sector_inventory",
    "ConfigError", "RunConfig", "load_config",
    "ModelParams", "OperatorBlock", "build_hamiltonian", "build_observable",
    "cross_sector_block", "full_space_operator", "observable_terms",
    "plain_m_basis",
    "FitResult", "Histogram", "Spectrum", "diagonalize", "dos",
    "level_spacing_stats", "make_histogram", "ratio_stats",
]
