"""UAV network clustering and resource allocation via QUBO samplers."""

from ._core import (
    CapExceeded,
    ConfigError,
    NoFeasibleSample,
    allocate,
    cluster,
    clustering_qubo,
    clustering_table,
    gain_matrix,
    generate_scenario,
    pipeline,
    solve_qubo,
    sweep,
)

__all__ = [
    "CapExceeded",
    "ConfigError",
    "NoFeasibleSample",
    "allocate",
    "cluster",
    "clustering_qubo",
    "clustering_table",
    "gain_matrix",
    "generate_scenario",
    "pipeline",
    "solve_qubo",
    "sweep",
]
