"""Numerical checks of the distinguishability trade-off imposed by an additive
conservation law on measurement interactions."""

from .conservation import (
    BlockUnitary,
    ConservedPair,
    assemble,
    build_sectors,
    exp_generator,
    generator_params,
    haar_random_block_unitary,
    spin_z,
)
from .linops import partial_trace, psd_sqrt, tensor
from .optimize import Objective, OptimizationResult, optimize_unitary, pareto_scan
from .scenarios import (
    SpinHalfScenario,
    apparatus_scaling_study,
    build_spin_scenario,
    ohira_pearle_scheme,
    ohira_pearle_unitary,
)
from .states import DensityOperator, Povm, PureState, fidelity, optimal_pvm, povm_overlap, purify
from .way import (
    MeasurementScheme,
    TradeoffReport,
    TripartiteScheme,
    evaluate_tradeoff,
    evaluate_tripartite,
    sweep,
    tripartite_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BlockUnitary",
    "ConservedPair",
    "DensityOperator",
    "MeasurementScheme",
    "Objective",
    "OptimizationResult",
    "Povm",
    "PureState",
    "SpinHalfScenario",
    "TradeoffReport",
    "TripartiteScheme",
    "apparatus_scaling_study",
    "assemble",
    "build_sectors",
    "build_spin_scenario",
    "evaluate_tradeoff",
    "evaluate_tripartite",
    "exp_generator",
    "fidelity",
    "generator_params",
    "haar_random_block_unitary",
    "ohira_pearle_scheme",
    "ohira_pearle_unitary",
    "optimal_pvm",
    "optimize_unitary",
    "pareto_scan",
    "partial_trace",
    "povm_overlap",
    "psd_sqrt",
    "purify",
    "spin_z",
    "sweep",
    "tensor",
    "tripartite_sweep",
]
