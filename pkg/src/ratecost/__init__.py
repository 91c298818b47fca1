"""Rate-cost tradeoffs for quantized control of linear stochastic systems:
converse bounds, lattice DPCM coding, and seeded closed-loop simulation."""

from .bounds import (
    BoundPoint,
    InfimumBound,
    alpha_n,
    bits_to_nats,
    causal_slb,
    causal_slb_lowrank,
    causal_slb_projected,
    entropy_cost_upper,
    lattice_entropy_upper,
    lower_bound_full,
    lower_bound_lowrank,
    lower_bound_partial,
    lower_bound_partial_lowrank,
    lower_bound_partial_projected,
    lower_bound_projected,
    make_projection,
    nats_to_bits,
    psi_bits,
    psi_inv_bits,
    rho_covering,
    unstable_floor,
    varrate_sandwich,
)
from .quantizer import (
    DpcmCodec,
    EntropyEstimate,
    IndexStream,
    Lattice,
    a_star_lattice,
    empirical_entropy,
    integer_lattice,
    lattice_for_dimension,
)
from .riccati import (
    ControlRiccati,
    FilterRiccati,
    RiccatiError,
    b_min,
    solve_control,
    solve_filter,
)
from .simloop import (
    SimConfig,
    SimResult,
    TradeoffPoint,
    decompose_cost,
    run,
    run_fully_observed,
    run_partially_observed,
    sweep,
    tradeoff_point,
)
from .sysmodel import LinearPlant, NoiseModel, ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "BoundPoint",
    "ControlRiccati",
    "DpcmCodec",
    "EntropyEstimate",
    "FilterRiccati",
    "IndexStream",
    "InfimumBound",
    "Lattice",
    "LinearPlant",
    "NoiseModel",
    "RiccatiError",
    "SimConfig",
    "SimResult",
    "TradeoffPoint",
    "ValidationReport",
    "a_star_lattice",
    "alpha_n",
    "b_min",
    "bits_to_nats",
    "causal_slb",
    "causal_slb_lowrank",
    "causal_slb_projected",
    "decompose_cost",
    "empirical_entropy",
    "entropy_cost_upper",
    "integer_lattice",
    "lattice_entropy_upper",
    "lattice_for_dimension",
    "lower_bound_full",
    "lower_bound_lowrank",
    "lower_bound_partial",
    "lower_bound_partial_lowrank",
    "lower_bound_partial_projected",
    "lower_bound_projected",
    "make_projection",
    "nats_to_bits",
    "psi_bits",
    "psi_inv_bits",
    "rho_covering",
    "run",
    "run_fully_observed",
    "run_partially_observed",
    "solve_control",
    "solve_filter",
    "sweep",
    "tradeoff_point",
    "unstable_floor",
    "validate",
    "varrate_sandwich",
]
