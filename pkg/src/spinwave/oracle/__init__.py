"""First-principles numerical oracles for the closed-form decay models.

* :mod:`.grid` propagates 1D wavefunctions with a split-operator scheme and
  returns the storage overlaps Q(t), M(t).
* :mod:`.thermal` averages per-state overlaps over a Gibbs ensemble and
  sets up the standard scenarios.
* :mod:`.hermite` evaluates the released-eigenstate overlaps in closed form.
* :mod:`.kuhr` sums the exact coherence of a gas moved between two traps.
"""

from .grid import (
    IDENTITY,
    Grid1D,
    GridState,
    OverlapSeries,
    StorageOperator,
    hermite_functions,
    hermite_required_extent,
    hermite_state,
    propagate_overlaps,
)
from .hermite import hermite_release_closedform, release_norm_at_zero
from .kuhr import GRID_OVERLAP, PERTURBATIVE, KuhrResult, kuhr_exact
from .thermal import (
    ThermalSpec,
    efficiency_from_overlaps,
    harmonic_trap_oracle,
    linear_force_oracle,
    product_series,
    recoil_oracle,
    release_bec_oracle,
    release_state_overlaps,
    release_thermal_oracle,
    thermal_efficiency,
)

__all__ = [
    "IDENTITY",
    "Grid1D",
    "GridState",
    "OverlapSeries",
    "StorageOperator",
    "hermite_functions",
    "hermite_required_extent",
    "hermite_state",
    "propagate_overlaps",
    "hermite_release_closedform",
    "release_norm_at_zero",
    "GRID_OVERLAP",
    "PERTURBATIVE",
    "KuhrResult",
    "kuhr_exact",
    "ThermalSpec",
    "efficiency_from_overlaps",
    "harmonic_trap_oracle",
    "linear_force_oracle",
    "product_series",
    "recoil_oracle",
    "release_bec_oracle",
    "release_state_overlaps",
    "release_thermal_oracle",
    "thermal_efficiency",
]
