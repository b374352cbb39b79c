"""Numerical experiments for the radial energy-supercritical wave equation u_tt - Lap u = +-|u|^(p-1) u in 3D."""
from .radial import (AlgebraicTail, Compact, Params, RadialGrid, RadialProfile, StatePair,
                     UnderResolvedError, hdot_norm, quadrature, sine_transform)
from .linwave import FreeWaveData, channel_check, dalembert_evolve, exterior_energy
from .stationary import StationarySolution, build_Z, picard_solve, verify_asymptotics
from .nlwave import EvolveOptions, EvolutionTrace, critical_norm_trace, energy, evolve
from .selfsim import SelfSimilarFrame, dissipation_rate, elliptic_residual, tilde_energy, to_selfsim

__version__ = "0.1.0"
