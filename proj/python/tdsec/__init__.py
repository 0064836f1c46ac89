"""Attack-impact simulation for integrated transmission and distribution grids."""

from ._core import (
    InputError,
    Network,
    SolverError,
    load_network,
    main,
    parse_network,
    rank_catalog,
    risk_score,
    run_scenario,
    severity,
    solve,
    stealth_windows,
    sweep,
)

__all__ = [
    "InputError",
    "Network",
    "SolverError",
    "load_network",
    "main",
    "parse_network",
    "rank_catalog",
    "risk_score",
    "run_scenario",
    "severity",
    "solve",
    "stealth_windows",
    "sweep",
]

__version__ = "0.1.0"
