"""Driven three-level ladder atom in a leaking cavity: dressed-state
Fock-block steady states, observables, and a Liouvillian cross-check."""
from .dressed_model import (
    BareParams,
    DressedParams,
    derive_dressed,
    dressed_decomposition,
    validity_report,
)
from .fock_system import (
    FockBlockState,
    GeneratorMatrix,
    auto_truncate,
    build_generator,
    evolve,
    steady_state,
)
from .observables import (
    ObservableRecord,
    dressed_populations,
    g2_zero,
    mean_photon_number,
    observe,
    upper_bare_population,
)

__all__ = [
    "BareParams", "DressedParams", "derive_dressed", "dressed_decomposition", "validity_report",
    "FockBlockState", "GeneratorMatrix", "auto_truncate", "build_generator", "evolve", "steady_state",
    "ObservableRecord", "dressed_populations", "g2_zero", "mean_photon_number", "observe",
    "upper_bare_population",
]
