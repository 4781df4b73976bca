"""Ensemble aggregation and model-quality measures.

The headline measure is the L1 area between mean compartment curves, summed
over S, I and R with unit time steps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

CURVE_SUM_TOL = 1e-12
IDENTITY_TOL = 1e-12
QUADRATURES = ("trapezoid", "rectangle")


@dataclass(frozen=True)
class MeanCurves:
    """Mean S/I/R fractions over time for one ensemble.

    n_runs is the ensemble size (0 marks analytically exact curves);
    population is the node count the fractions refer to.
    """

    s_frac: np.ndarray
    i_frac: np.ndarray
    r_frac: np.ndarray
    n_runs: int
    population: int

    def __post_init__(self):
        arrays = []
        for name in ("s_frac", "i_frac", "r_frac"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            arrays.append(arr)
        lengths = {len(a) for a in arrays}
        if len(lengths) != 1 or 0 in lengths:
            raise ValueError("compartment curves must share a positive length")
        if self.population < 1:
            raise ValueError("population must be positive")
        if self.n_runs < 0:
            raise ValueError("n_runs must be nonnegative")
        stack = np.stack(arrays)
        if stack.min() < -1e-9 or stack.max() > 1 + 1e-9:
            raise ValueError("curve entries must be fractions in [0, 1]")
        total = stack.sum(axis=0)
        if np.max(np.abs(total - 1.0)) > CURVE_SUM_TOL:
            raise ValueError("compartment fractions must sum to 1 at every time")

    def __len__(self):
        return len(self.s_frac)


def mean_curves(trajectories, population: int) -> MeanCurves:
    """Arithmetic mean of compartment counts across runs, as population fractions."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    length = len(trajectories[0].s_counts)
    sums = np.zeros((3, length), dtype=np.int64)
    for traj in trajectories:  # fixed run-index order; integer sums are exact
        if len(traj.s_counts) != length:
            raise ValueError("trajectories must all have the same length")
        if int(traj.s_counts[0] + traj.i_counts[0] + traj.r_counts[0]) != population:
            raise ValueError("trajectory population does not match")
        sums[0] += traj.s_counts
        sums[1] += traj.i_counts
        sums[2] += traj.r_counts
    denom = len(trajectories) * population
    return MeanCurves(sums[0] / denom, sums[1] / denom, sums[2] / denom,
                      len(trajectories), population)


def area_between(a: MeanCurves, b: MeanCurves, quadrature: str = "trapezoid") -> float:
    """Sum over compartments of the integral of |a - b| over time (unit steps).

    Returns exactly 0 when the curves agree within 1e-12 everywhere. The
    default trapezoid rule can be swapped for a left-sum rectangle rule.
    """
    if quadrature not in QUADRATURES:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    if len(a) != len(b):
        raise ValueError("curves must have the same length")
    if a.population != b.population:
        raise ValueError("curves must refer to the same population")
    diffs = [
        np.abs(a.s_frac - b.s_frac),
        np.abs(a.i_frac - b.i_frac),
        np.abs(a.r_frac - b.r_frac),
    ]
    if max(d.max() for d in diffs) <= IDENTITY_TOL:
        return 0.0
    total = 0.0
    for d in diffs:
        if quadrature == "trapezoid":
            total += float((d[:-1] + d[1:]).sum() / 2.0)
        else:
            total += float(d[:-1].sum())
    return total


# ---------------------------------------------------------------------------
# quality table

@dataclass(frozen=True)
class QualityRow:
    model_name: str
    area: float
    neg_log_likelihood_per_pair: float
    parameter_count: int
    dataset: str = ""

    def __post_init__(self):
        if self.area < 0:
            raise ValueError("area must be nonnegative")


_MEASURES = ("area", "neg_log_likelihood_per_pair", "parameter_count")


def _averaged_rows(rows: list[QualityRow]) -> list[QualityRow]:
    """Per-model averages across datasets, in first-appearance model order."""
    order: list[str] = []
    groups: dict[str, list[QualityRow]] = {}
    for row in rows:
        groups.setdefault(row.model_name, []).append(row)
        if row.model_name not in order:
            order.append(row.model_name)
    out = []
    for name in order:
        members = groups[name]
        out.append(QualityRow(
            name,
            sum(r.area for r in members) / len(members),
            sum(r.neg_log_likelihood_per_pair for r in members) / len(members),
            round(sum(r.parameter_count for r in members) / len(members)),
            dataset="average",
        ))
    return out


def _minima(rows: list[QualityRow]) -> dict[str, float]:
    return {m: min(getattr(r, m) for r in rows) for m in _MEASURES}


def quality_table(rows: list[QualityRow]) -> dict:
    """JSON-able fragment: rows, cross-dataset averages when applicable, minima marks."""
    rows = list(rows)
    datasets = {r.dataset for r in rows}
    averages = _averaged_rows(rows) if len(datasets) > 1 else None
    marked = averages if averages is not None else rows
    minima = _minima(marked) if marked else {}

    def row_dict(r: QualityRow, mark_against) -> dict:
        d = {
            "model": r.model_name,
            "area": r.area,
            "neg_log_likelihood_per_pair": r.neg_log_likelihood_per_pair,
            "parameter_count": r.parameter_count,
        }
        if r.dataset:
            d["dataset"] = r.dataset
        if mark_against:
            d["is_minimum"] = {m: getattr(r, m) == mark_against[m] for m in _MEASURES}
        return d

    fragment = {"rows": [row_dict(r, minima if averages is None else None) for r in rows]}
    if averages is not None:
        fragment["averages"] = [row_dict(r, minima) for r in averages]
    return fragment


def _fmt_measure(value: float, minimum: float, mark: bool, integer: bool = False) -> str:
    if math.isinf(value):
        text = "inf"
    elif integer:
        text = str(int(value))
    else:
        text = f"{value:.6f}"
    if mark and value == minimum:
        text += " *"
    return text


def render_quality_table(rows: list[QualityRow]) -> str:
    """Aligned-text rendering; '*' marks the best (lowest) value per measure."""
    rows = list(rows)
    datasets = {r.dataset for r in rows}
    multi = len(datasets) > 1
    sections: list[tuple[str, list[QualityRow], bool]] = [("", rows, not multi)]
    if multi:
        sections.append(("averages over datasets", _averaged_rows(rows), True))

    lines = []
    header = (["dataset"] if multi else []) + [
        "model", "area_between_sir_curves", "neg_log_likelihood_per_pair", "parameter_count",
    ]
    for title, section_rows, mark in sections:
        minima = _minima(section_rows) if section_rows else {}
        if title:
            lines.append("")
            lines.append(f"# {title}")
        table = [header]
        for r in section_rows:
            cells = [r.dataset] if multi else []
            cells += [
                r.model_name,
                _fmt_measure(r.area, minima.get("area", math.nan), mark),
                _fmt_measure(r.neg_log_likelihood_per_pair,
                             minima.get("neg_log_likelihood_per_pair", math.nan), mark),
                _fmt_measure(float(r.parameter_count),
                             minima.get("parameter_count", math.nan), mark, integer=True),
            ]
            table.append(cells)
        widths = [max(len(row[c]) for row in table) for c in range(len(header))]
        for row in table:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# curve CSV round-trip

def write_curves_csv(curves: MeanCurves, stream) -> None:
    """Dump mean curves as CSV with a provenance comment header."""
    stream.write(f"# population={curves.population} n_runs={curves.n_runs}\n")
    stream.write("t,s,i,r\n")
    for t in range(len(curves)):
        s, i, r = float(curves.s_frac[t]), float(curves.i_frac[t]), float(curves.r_frac[t])
        stream.write(f"{t},{s!r},{i!r},{r!r}\n")


def read_curves_csv(lines) -> MeanCurves:
    """Parse the write_curves_csv format back into MeanCurves."""
    it = iter(lines)
    try:
        head = next(it).strip()
    except StopIteration:
        raise ParseError("empty curves file", 1) from None
    if not head.startswith("#"):
        raise ParseError("expected '# population=... n_runs=...' comment header", 1)
    meta = {}
    for token in head.lstrip("#").split():
        if "=" in token:
            key, _, val = token.partition("=")
            meta[key] = val
    try:
        population = int(meta["population"])
        n_runs = int(meta["n_runs"])
    except (KeyError, ValueError):
        raise ParseError("header must carry integer population= and n_runs=", 1) from None
    reader = csv.DictReader(it)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "s", "i", "r"]:
        raise ParseError("expected column header t,s,i,r", 2)
    s, i, r = [], [], []
    for lineno, row in enumerate(reader, start=3):
        try:
            if int(row["t"]) != lineno - 3:
                raise ParseError("time indices must be consecutive from 0", lineno)
            s.append(float(row["s"]))
            i.append(float(row["i"]))
            r.append(float(row["r"]))
        except (TypeError, ValueError):
            raise ParseError("malformed curve row", lineno) from None
    if not s:
        raise ParseError("curves file holds no rows", 3)
    return MeanCurves(np.array(s), np.array(i), np.array(r), n_runs, population)
