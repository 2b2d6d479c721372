from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd


def format_row(values: Dict[str, Any]) -> str:
    parts = []
    for key, value in values.items():
        if isinstance(value, float):
            parts.append(f"{key}={value:.6f}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


class MetricsLog:
    """Append-only key=value rows; the timestamp lives only in `#` header lines."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(f"# metrics log opened {datetime.now().isoformat(timespec='seconds')}\n")

    def append(self, values: Dict[str, Any]):
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(format_row(values) + "\n")


def _parse_value(value: str) -> Any:
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def read_metrics(path: Union[str, Path]) -> pd.DataFrame:
    """All rows of a metrics log as a frame; keys a row lacks are NaN."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        row: Dict[str, Any] = {}
        for item in line.split():
            key, _, value = item.partition("=")
            row[key] = _parse_value(value)
        rows.append(row)
    return pd.DataFrame(rows)
