"""Statevector simulation of QAOA / approximate-annealing schedules on QUBO
problems, with per-qubit mixer angles driven by Fubini-Study metric diagonals.

Submodules:
    qubo_core   -- QUBO representation, energies, exhaustive solving, generators
    statevector -- dense complex statevector engine
    metric      -- Fubini-Study metric elements of the X-rotation control family
    protocols   -- annealing schedules and the three mixer strategies
    qaoa_opt    -- derivative-free variational optimization of layer angles
    analysis    -- layer-phase diagnostics, success statistics, CDFs
    cli         -- experiment harness (`fsqaoa` command)
"""

__version__ = "0.1.0"

from .qubo_core import (
    GadgetInstance,
    GadgetParams,
    GroundTruth,
    QuboMatrix,
    QuboParseError,
    attach_false_minima,
    bits_to_index,
    energy,
    energy_table,
    exhaustive_solve,
    false_minimum_manifold,
    format_bits,
    gadget_ground_truth,
    generate_gadget_problem,
    index_to_bits,
    load_qubo,
    parse_bits,
    random_qubo,
    save_qubo,
)
from .statevector import (
    StateVector,
    apply_mixer,
    apply_phase_separator,
    basis_state,
    dump_amplitudes,
    manifold_probability,
    overlap,
    plus_state,
    probability,
    product_state,
    sample,
    sample_x_basis,
    x_expectation,
    xx_expectation,
)
from .metric import fs_diagonal, fs_diagonal_sampled, fs_element, fs_matrix
from .protocols import (
    MixerStrategy,
    RunRecord,
    Schedule,
    apply_layer,
    evolve_plain,
    linear_aqa_schedule,
    parse_metric_mode,
    problem_hash,
    run_fixed_zeta,
    run_protocol,
    tau_of_p,
    traces_identical,
)
from .qaoa_opt import (
    OptConfig,
    OptRun,
    aggregate_convergence,
    energy_objective,
    final_histogram,
    optimize,
    optimize_many,
)
from .analysis import (
    PhaseMap,
    cdf,
    false_min_probability,
    hamming_phase_points,
    layer_phase,
    phase_difference_map,
    standard_error,
    success_probability,
    three_qubit_quantities,
    three_qubit_sampled,
)

__all__ = [
    "GadgetInstance",
    "GadgetParams",
    "GroundTruth",
    "MixerStrategy",
    "OptConfig",
    "OptRun",
    "PhaseMap",
    "QuboMatrix",
    "QuboParseError",
    "RunRecord",
    "Schedule",
    "StateVector",
    "__version__",
    "aggregate_convergence",
    "apply_layer",
    "apply_mixer",
    "apply_phase_separator",
    "attach_false_minima",
    "basis_state",
    "bits_to_index",
    "cdf",
    "dump_amplitudes",
    "energy",
    "energy_objective",
    "energy_table",
    "evolve_plain",
    "exhaustive_solve",
    "false_min_probability",
    "false_minimum_manifold",
    "final_histogram",
    "format_bits",
    "fs_diagonal",
    "fs_diagonal_sampled",
    "fs_element",
    "fs_matrix",
    "gadget_ground_truth",
    "generate_gadget_problem",
    "hamming_phase_points",
    "index_to_bits",
    "layer_phase",
    "linear_aqa_schedule",
    "load_qubo",
    "manifold_probability",
    "optimize",
    "optimize_many",
    "overlap",
    "parse_bits",
    "parse_metric_mode",
    "phase_difference_map",
    "plus_state",
    "probability",
    "problem_hash",
    "product_state",
    "random_qubo",
    "run_fixed_zeta",
    "run_protocol",
    "sample",
    "sample_x_basis",
    "save_qubo",
    "standard_error",
    "success_probability",
    "tau_of_p",
    "three_qubit_quantities",
    "three_qubit_sampled",
    "traces_identical",
    "x_expectation",
    "xx_expectation",
]
