"""Entangled histories of a single qubit at three times.

Submodules: ``histories`` (history states and the chain-operator inner
product), ``measurement`` (multi-time amplitudes, correlators, the GHZ
functional), ``bounds`` (numerical bound certification), ``ancilla``
(system + ancilla construction) and ``optics`` (interferometer model).
"""
from .histories import (
    HistoryError,
    HistoryState,
    Projector2,
    chain_operator,
    ghz_history,
    history_norm,
    inner_product,
    projector,
    separable_history,
    temporal_bell,
    w_history,
)
from .measurement import (
    expectation,
    ghz_correlators,
    ghz_functional,
    multi_time_amplitude,
)

__version__ = "0.1.0"

__all__ = [
    "HistoryError",
    "HistoryState",
    "Projector2",
    "chain_operator",
    "expectation",
    "ghz_correlators",
    "ghz_functional",
    "ghz_history",
    "history_norm",
    "inner_product",
    "multi_time_amplitude",
    "projector",
    "separable_history",
    "temporal_bell",
    "w_history",
]
