"""Per-step observable records and their CSV/JSON serialization."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np

COLUMNS = ("C", "W00", "W01", "W10", "W11", "Q14", "Q23", "norm")
FLOAT_FORMAT = "%.17g"


@dataclass
class TimeSeries:
    """Observables recorded after each map step.

    ``t`` holds the step numbers and ``values`` maps column names (see
    :data:`COLUMNS`) to float arrays of the same length.
    """

    t: np.ndarray
    values: Dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t)
        self.values = {k: np.asarray(v, dtype=float) for k, v in self.values.items()}
        for name, col in self.values.items():
            if col.shape != self.t.shape:
                raise ValueError(f"column {name} has shape {col.shape}, expected {self.t.shape}")

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, name: str) -> np.ndarray:
        if name == "t":
            return self.t
        return self.values[name]

    @property
    def columns(self) -> tuple:
        return tuple(self.values)

    def window(self, start: Optional[float] = None, stop: Optional[float] = None) -> "TimeSeries":
        """Sub-series with ``start <= t <= stop``."""
        mask = np.ones(len(self.t), dtype=bool)
        if start is not None:
            mask &= self.t >= start
        if stop is not None:
            mask &= self.t <= stop
        return TimeSeries(self.t[mask], {k: v[mask] for k, v in self.values.items()}, dict(self.metadata))

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        names = self.columns
        buf.write(",".join(("t",) + names) + "\n")
        for i in range(len(self.t)):
            t = self.t[i]
            t_txt = str(int(t)) if float(t).is_integer() else FLOAT_FORMAT % t
            row = [t_txt] + [FLOAT_FORMAT % self.values[n][i] for n in names]
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
        if path is not None:
            _write(path, text)
        return text

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TimeSeries":
        text = Path(path).read_text()
        header, *rows = [line for line in text.split("\n") if line]
        names = header.split(",")
        data = np.array([[float(x) for x in r.split(",")] for r in rows]).reshape(len(rows), len(names))
        t = data[:, 0]
        if np.all(t == np.round(t)):
            t = t.astype(int)
        return cls(t, {n: data[:, i + 1] for i, n in enumerate(names[1:])})

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "values": {k: v.tolist() for k, v in self.values.items()},
            "metadata": self.metadata,
        }

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            _write(path, text)
        return text


def stack(series: Sequence[TimeSeries], column: str) -> np.ndarray:
    """``(len(series), T)`` array of one column across equally long series."""
    return np.vstack([s[column] for s in series])


def _write(path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
