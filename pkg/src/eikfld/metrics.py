"""Error statistics and report serialization.

``percentage_error`` reports three aggregates of 100*|computed-exact|/exact:

* ``mean``/``maximum`` over the included nodes (exact > 0), the package's
  own contract;
* ``paper_mean``, the experiment-protocol normalization: the same sum
  divided by the total node count, with exact-zero nodes contributing
  nothing. The reproduction targets for the published error tables are
  stated in this normalization.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import ScalarField


@dataclass(frozen=True)
class ErrorStats:
    mean: float
    maximum: float
    paper_mean: float
    included: int
    total: int
    per_node: ScalarField

    def row(self) -> dict:
        return {
            "mean_pct": self.mean,
            "max_pct": self.maximum,
            "paper_mean_pct": self.paper_mean,
            "included_nodes": self.included,
            "total_nodes": self.total,
        }


def percentage_error(computed: ScalarField, exact: ScalarField) -> ErrorStats:
    """Percentage error of ``computed`` against ``exact``, zero nodes excluded."""
    if computed.grid != exact.grid:
        raise ValidationError("fields live on different grids")
    c = computed.values.astype(np.float64)
    e = exact.values.astype(np.float64)
    include = e > 0.0
    per = np.zeros_like(e)
    per[include] = 100.0 * np.abs(c[include] - e[include]) / e[include]
    n_inc = int(include.sum())
    if n_inc == 0:
        raise ValidationError("every exact value is zero; nothing to compare")
    mean = float(per[include].mean())
    maximum = float(per[include].max())
    paper_mean = float(per[include].sum() / e.size)
    return ErrorStats(
        mean=mean,
        maximum=maximum,
        paper_mean=paper_mean,
        included=n_inc,
        total=int(e.size),
        per_node=ScalarField(exact.grid, per),
    )


@dataclass
class Report:
    """Named experiment output: full config plus a list of uniform rows."""

    name: str
    config: dict
    rows: list

    def to_json(self) -> str:
        payload = {"experiment": self.name, "config": self.config, "rows": self.rows}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        if not self.rows:
            return ""
        fields = list(self.rows[0].keys())
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in fields})
        return buf.getvalue()

    def write(self, prefix: str):
        """Write <prefix>.json and <prefix>.csv; '-' prints JSON to stdout."""
        if prefix == "-":
            import sys

            sys.stdout.write(self.to_json())
            return []
        jpath = prefix + ".json"
        cpath = prefix + ".csv"
        with open(jpath, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        with open(cpath, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())
        return [jpath, cpath]


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value
