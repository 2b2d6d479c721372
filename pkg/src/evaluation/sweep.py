from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..models import NoiseSpec, SWEEP_COLUMNS, SweepResult
from ..translation.translator import Translator
from ..utils.logger import get_logger
from .evaluator import DIRECTIONS, EvaluationSet, clean_translations, score_noise_level

logger = get_logger("evaluation.sweep")

DEFAULT_A_VALUES = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25)
DEFAULT_B_VALUES = (0.0, 2.0, 3.0, 5.0, 8.0, 10.0)

ROBUSTNESS_SCENARIOS = ("clean", "word", "order", "both")


def level_seed(base_seed: int, a: float, b: float) -> int:
    """Seed of one (a, b) noise level; depends on the level, not on the model evaluated."""
    key = [int(base_seed), int(round(a * 10_000)), int(round(b * 10_000))]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def sweep(translator: Translator, test_set: EvaluationSet, axis: str,
          values: Optional[Sequence[float]] = None, seed: int = 0, label: str = "model") -> SweepResult:
    """Score every sweep column at each noise level on one axis; the other noise stays 0."""
    if axis not in ("a", "b"):
        raise ValueError(f"sweep axis must be 'a' or 'b', got {axis!r}")
    values = [float(v) for v in (values if values is not None else
                                 (DEFAULT_A_VALUES if axis == "a" else DEFAULT_B_VALUES))]
    if not values:
        raise ValueError("sweep needs at least one noise level")
    if any(later <= earlier for earlier, later in zip(values, values[1:])):
        raise ValueError(f"sweep levels must be strictly increasing: {values}")

    clean = clean_translations(translator, test_set)
    cells: Dict[str, List[float]] = {name: [] for name in SWEEP_COLUMNS}
    for value in values:
        level_a, level_b = (value, 0.0) if axis == "a" else (0.0, value)
        spec = NoiseSpec(a=level_a, b=level_b, seed=level_seed(seed, level_a, level_b))
        level = score_noise_level(translator, test_set, spec, cached_clean=clean)
        for name in SWEEP_COLUMNS:
            cells[name].append(level[name])
        logger.info(f"{label} {axis}={value:g} " + " ".join(f"{k}={level[k]:.2f}" for k in SWEEP_COLUMNS))

    return SweepResult(axis=axis, values=values, cells=cells, label=label)


def robustness_table(translators: Mapping[str, Translator], test_set: EvaluationSet, a: float = 0.1,
                     b: float = 3.0, seed: int = 0) -> pd.DataFrame:
    """Clean / word-noise / order-noise / combined scores per model and direction."""
    scenarios = {
        "clean": (0.0, 0.0),
        "word": (a, 0.0),
        "order": (0.0, b),
        "both": (a, b),
    }
    rows = []
    for label, translator in translators.items():
        clean = clean_translations(translator, test_set)
        for scenario in ROBUSTNESS_SCENARIOS:
            scenario_a, scenario_b = scenarios[scenario]
            spec = NoiseSpec(a=scenario_a, b=scenario_b, seed=level_seed(seed, scenario_a, scenario_b))
            level = score_noise_level(translator, test_set, spec, cached_clean=clean)
            row = {"model": label, "scenario": scenario, "a": scenario_a, "b": scenario_b}
            for direction in DIRECTIONS:
                row[f"translation_{direction}"] = level[f"translation_{direction}"]
                row[f"similarity_{direction}"] = level[f"similarity_{direction}"]
            rows.append(row)
            logger.info(f"robustness {label} {scenario}: " +
                        " ".join(f"{k}={v:.2f}" for k, v in row.items() if isinstance(v, float) and k not in ("a", "b")))
    return pd.DataFrame(rows)


def compare_sweeps(results: Sequence[SweepResult]) -> pd.DataFrame:
    """Align sweeps on their shared axis; gap columns are each model minus the first."""
    if not results:
        raise ValueError("nothing to compare")
    baseline = results[0]
    for result in results[1:]:
        if result.axis != baseline.axis or list(result.values) != list(baseline.values):
            raise ValueError(f"sweep {result.label!r} does not share the axis of {baseline.label!r}")

    frame = pd.DataFrame({baseline.axis: baseline.values})
    for result in results:
        for direction in DIRECTIONS:
            frame[f"{result.label}.translation_{direction}"] = result.cells[f"translation_{direction}"]
    for result in results[1:]:
        for direction in DIRECTIONS:
            column = f"translation_{direction}"
            frame[f"gap.{result.label}.{column}"] = (np.asarray(result.cells[column])
                                                     - np.asarray(baseline.cells[column]))
    return frame
