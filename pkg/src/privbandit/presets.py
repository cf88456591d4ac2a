"""Named experiment presets.

The three dataset presets mirror the published cohort shapes (state counts,
cohort sizes, cluster counts, auxiliary-cell budgets, noise grids) at full
protocol scale. The ``desk-*`` variants keep each cohort's shape but shrink
the bandit workload to something that runs in minutes on a laptop, and use
small constant noise weights calibrated so the de-anonymization and
identifiability curves sweep their full range across the noise grid on the
synthetic cohorts (entropy weights remain available via configuration).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class DatasetPreset:
    name: str
    d: int
    n_users: int
    base_clusters: int
    aux_cells: int
    aux_grid: tuple[int, ...]
    ranks: tuple[int, ...]
    noise_lo: float = 0.0
    noise_hi: float = 3.0
    noise_points: int = 50
    horizon: int = 2500
    runs: int = 500
    trials: int = 100
    alpha: float = 1e-3
    # synthetic-cohort generation
    synth_clusters: int = 5
    concentration: float = 1000.0
    template_sharpness: float = 1.0
    # noise/identifiability weights
    weight_kind: str = "entropy"
    weight_value: float = 1.0
    weight_bins: int = 20
    weight_floor: float = 1e-3


CASAS = DatasetPreset(
    name="casas", d=41, n_users=30, base_clusters=7, aux_cells=91,
    aux_grid=tuple(range(1, 101, 10)), ranks=tuple(range(41, 0, -1)),
)

ENDOMONDO = DatasetPreset(
    name="endomondo", d=39, n_users=50, base_clusters=8, aux_cells=91,
    aux_grid=tuple(range(1, 101, 10)), ranks=tuple(range(39, 0, -1)),
)

FITBIT = DatasetPreset(
    name="fitbit", d=4, n_users=33, base_clusters=8, aux_cells=14,
    aux_grid=tuple(range(1, 16)), ranks=tuple(range(4, 0, -1)),
    noise_hi=3e-4, synth_clusters=4, concentration=60.0,
)

DESK_CASAS = replace(
    CASAS, name="desk-casas", horizon=1000, runs=200,
    weight_kind="constant", weight_value=0.007,
)

DESK_ENDOMONDO = replace(
    ENDOMONDO, name="desk-endomondo", horizon=1000, runs=200,
    weight_kind="constant", weight_value=0.007,
)

DESK_FITBIT = replace(
    FITBIT, name="desk-fitbit", horizon=1000, runs=200,
    weight_kind="constant", weight_value=1.0,
)

PRESETS = {p.name: p for p in (CASAS, ENDOMONDO, FITBIT,
                               DESK_CASAS, DESK_ENDOMONDO, DESK_FITBIT)}


def get_preset(name: str) -> DatasetPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
