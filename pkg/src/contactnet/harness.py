"""Experiment driver: fit models to a dataset, compare epidemic behavior, emit reports.

The protocol per model: simulate a large ensemble on the actual graph, fit the
model, sample networks from it, run epidemics on every sampled network, then
compare mean curves by the area metric alongside likelihood and parameter
count. All randomness derives from (master_seed, branch, indices), so results
never depend on worker count or scheduling.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .community import SpectralConfig, spectral_cluster
from .errors import ConfigError, FitError
from .graph import Graph, clustering_coefficient, degree_stats, density, read_graph
from .metrics import (
    MeanCurves,
    QualityRow,
    area_between,
    quality_table,
    render_quality_table,
    write_curves_csv,
)
from .models import (
    DCSBM_MODES,
    DEGREE_MODES,
    fit_dcsbm,
    fit_degree,
    fit_er,
    fit_sbm,
    log_likelihood_per_pair,
    sample_graph,
)
from .seeding import derived_rng
from .sir import SirParams, simulate_sir, write_trajectories_csv

TOOL_VERSION = "0.1.0"
THREADS_ENV_VAR = "CONTACTNET_THREADS"

MODEL_VARIANTS = ("er", "degree", "sbm", "dcsbm")
DATASET_FORMATS = ("edge_list", "contacts", "attendance")
AREA_AVERAGING = ("pooled", "per_network")

# seed branches: actual-graph epidemics, network sampling, sampled-network epidemics
_BRANCH_ACTUAL = 0
_BRANCH_SAMPLE = 1
_BRANCH_EPIDEMIC = 2

_RUN_BLOCK = 256  # fixed chunk size so partitioning never depends on worker count


@dataclass(frozen=True)
class ModelSpec:
    variant: str
    name: str = ""
    degree_mode: str = "exact_sum"
    dcsbm_mode: str = "exact"
    spectral: SpectralConfig = SpectralConfig()

    def __post_init__(self):
        if self.variant not in MODEL_VARIANTS:
            raise ValueError(f"unknown model variant {self.variant!r}")
        if self.degree_mode not in DEGREE_MODES:
            raise ValueError(f"unknown degree mode {self.degree_mode!r}")
        if self.dcsbm_mode not in DCSBM_MODES:
            raise ValueError(f"unknown dcsbm mode {self.dcsbm_mode!r}")

    @property
    def display_name(self) -> str:
        return self.name or self.variant


@dataclass(frozen=True)
class EnsembleConfig:
    actual_runs: int = 5000
    sampled_networks: int = 100
    runs_per_network: int = 50

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 1:
                raise ValueError(f"{f.name} must be at least 1")


def _default_models() -> tuple[ModelSpec, ...]:
    return tuple(ModelSpec(v) for v in MODEL_VARIANTS)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    dataset_format: str = "edge_list"
    models: tuple[ModelSpec, ...] = field(default_factory=_default_models)
    sir: SirParams = SirParams()
    ensemble: EnsembleConfig = EnsembleConfig()
    master_seed: int = 0
    output_dir: str = "results"
    quadrature: str = "trapezoid"
    clustering_mode: str = "average_local"
    area_averaging: str = "pooled"
    save_trajectories: bool = False

    def __post_init__(self):
        if self.dataset_format not in DATASET_FORMATS:
            raise ValueError(f"unknown dataset format {self.dataset_format!r}")
        if not self.models:
            raise ValueError("at least one model must be configured")
        names = [spec.display_name for spec in self.models]
        if len(set(names)) != len(names):
            raise ValueError("model names collide; set distinct 'name' fields")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.quadrature not in ("trapezoid", "rectangle"):
            raise ValueError(f"unknown quadrature {self.quadrature!r}")
        if self.clustering_mode not in ("average_local", "global_transitivity"):
            raise ValueError(f"unknown clustering mode {self.clustering_mode!r}")
        if self.area_averaging not in AREA_AVERAGING:
            raise ValueError(f"unknown area averaging {self.area_averaging!r}")


# ---------------------------------------------------------------------------
# config JSON round-trip

def _take(data: dict, context: str, known: tuple[str, ...]) -> None:
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(sorted(unknown))}")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from the documented JSON schema, strictly."""
    if not isinstance(data, dict):
        raise ConfigError("experiment config must be a JSON object")
    _take(data, "config", ("dataset", "models", "sir", "ensemble", "master_seed",
                           "output_dir", "metrics", "save_trajectories"))
    try:
        dataset = data.get("dataset")
        if not isinstance(dataset, dict) or "path" not in dataset:
            raise ConfigError("config needs a dataset object with a 'path'")
        _take(dataset, "dataset", ("path", "format"))

        model_specs = []
        for entry in data.get("models", [{"variant": v} for v in MODEL_VARIANTS]):
            _take(entry, "model spec", ("variant", "name", "degree_mode", "dcsbm_mode", "spectral"))
            spectral_data = entry.get("spectral", {})
            _take(spectral_data, "spectral config",
                  tuple(f.name for f in fields(SpectralConfig)))
            kwargs = {k: v for k, v in entry.items() if k != "spectral"}
            model_specs.append(ModelSpec(spectral=SpectralConfig(**spectral_data), **kwargs))

        metrics_data = data.get("metrics", {})
        _take(metrics_data, "metrics", ("quadrature", "clustering_mode", "area_averaging"))

        return ExperimentConfig(
            dataset_path=str(dataset["path"]),
            dataset_format=dataset.get("format", "edge_list"),
            models=tuple(model_specs),
            sir=SirParams(**data.get("sir", {})),
            ensemble=EnsembleConfig(**data.get("ensemble", {})),
            master_seed=int(data.get("master_seed", 0)),
            output_dir=str(data.get("output_dir", "results")),
            save_trajectories=bool(data.get("save_trajectories", False)),
            **{k: metrics_data[k] for k in metrics_data},
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    """Echo a config back into its JSON schema (used for provenance)."""
    return {
        "dataset": {"path": config.dataset_path, "format": config.dataset_format},
        "models": [
            {
                "variant": spec.variant,
                "name": spec.display_name,
                "degree_mode": spec.degree_mode,
                "dcsbm_mode": spec.dcsbm_mode,
                "spectral": {f.name: getattr(spec.spectral, f.name)
                             for f in fields(SpectralConfig)},
            }
            for spec in config.models
        ],
        "sir": {f.name: getattr(config.sir, f.name) for f in fields(SirParams)},
        "ensemble": {f.name: getattr(config.ensemble, f.name) for f in fields(EnsembleConfig)},
        "master_seed": config.master_seed,
        "output_dir": config.output_dir,
        "metrics": {
            "quadrature": config.quadrature,
            "clustering_mode": config.clustering_mode,
            "area_averaging": config.area_averaging,
        },
        "save_trajectories": config.save_trajectories,
    }


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# dataset summary

def graph_summary(g: Graph, path: str | None = None, fmt: str | None = None) -> dict:
    stats = degree_stats(g)
    summary = {
        "n_nodes": g.n_nodes,
        "n_edges": g.n_edges,
        "density": density(g) if g.n_nodes >= 2 else None,
        "clustering_average_local": clustering_coefficient(g, "average_local"),
        "clustering_global_transitivity": clustering_coefficient(g, "global_transitivity"),
        "average_degree": stats.average,
        "max_degree": stats.maximum,
    }
    if path is not None:
        summary = {"path": path, "format": fmt, **summary}
    return summary


def dataset_stats(path: str, fmt: str = "edge_list") -> dict:
    """Summary statistics of a dataset file (the fields of a dataset table)."""
    return graph_summary(read_graph(path, fmt), path=path, fmt=fmt)


# ---------------------------------------------------------------------------
# execution

def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be at least 1")
    return value


def _indexed_map(fn, count: int, workers: int) -> list:
    """Run fn(0..count-1), results ordered by index regardless of scheduling."""
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    results = [None] * count
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, i): i for i in range(count)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def _count_block(g: Graph, params: SirParams, seed_path, run_range, keep: bool):
    sums = np.zeros((3, params.steps + 1), dtype=np.int64)
    kept = [] if keep else None
    for r in run_range:
        traj = simulate_sir(g, params, derived_rng(*seed_path, r))
        sums[0] += traj.s_counts
        sums[1] += traj.i_counts
        sums[2] += traj.r_counts
        if keep:
            kept.append(traj)
    return sums, kept


def _ensemble_counts(g, params, runs, seed_path, workers, keep=False):
    """Summed compartment counts over `runs` epidemics; run r seeded by (*seed_path, r)."""
    n_blocks = math.ceil(runs / _RUN_BLOCK)

    def block(bi):
        lo = bi * _RUN_BLOCK
        return _count_block(g, params, seed_path, range(lo, min(runs, lo + _RUN_BLOCK)), keep)

    parts = _indexed_map(block, n_blocks, workers)
    totals = np.zeros((3, params.steps + 1), dtype=np.int64)
    trajectories = [] if keep else None
    for sums, kept in parts:
        totals += sums
        if keep:
            trajectories.extend(kept)
    return totals, trajectories


def _counts_to_curves(totals: np.ndarray, runs: int, population: int) -> MeanCurves:
    denom = runs * population
    return MeanCurves(totals[0] / denom, totals[1] / denom, totals[2] / denom,
                      runs, population)


def fit_model(g: Graph, spec: ModelSpec):
    """Fit the variant named by `spec`, clustering first where one is needed."""
    if spec.variant == "er":
        return fit_er(g)
    if spec.variant == "degree":
        return fit_degree(g, mode=spec.degree_mode)
    partition = spectral_cluster(g, spec.spectral)
    if spec.variant == "sbm":
        return fit_sbm(g, partition)
    return fit_dcsbm(g, partition, mode=spec.dcsbm_mode)


def _validate_against_graph(config: ExperimentConfig, g: Graph) -> None:
    """Fail fast on config/graph mismatches before any simulation runs."""
    if g.n_nodes < 1:
        raise FitError("dataset has no nodes")
    if config.sir.initial_infectious > g.n_nodes:
        raise ConfigError("initial_infectious exceeds the dataset's node count")
    needs_edges = {"degree", "dcsbm"} & {spec.variant for spec in config.models}
    if needs_edges and g.n_edges == 0:
        raise FitError("degree-based models cannot be fitted to an edgeless graph")
    if {"sbm", "dcsbm"} & {spec.variant for spec in config.models} and g.n_nodes < 2:
        raise FitError("community models need at least 2 nodes")


@dataclass
class ModelResult:
    spec: ModelSpec
    row: QualityRow
    curves: MeanCurves
    details: dict
    trajectories: list | None = None


@dataclass
class ResultsReport:
    dataset: dict
    rows: list[QualityRow]
    model_details: list[dict]
    curves: dict[str, MeanCurves]
    provenance: dict
    wall_clock_seconds: float | None = None
    trajectories: dict | None = None

    def to_json_dict(self) -> dict:
        # wall clock intentionally left out: report bytes stay deterministic
        return {
            "dataset": self.dataset,
            "quality": quality_table(self.rows),
            "models": self.model_details,
            "provenance": self.provenance,
        }


def _evaluate_model(g, spec, model_index, config, workers, actual, keep):
    model = fit_model(g, spec)
    ens = config.ensemble
    sir = config.sir
    seed = config.master_seed

    def one_network(ni):
        sampled = sample_graph(model, derived_rng(seed, _BRANCH_SAMPLE, model_index, ni))
        return _count_block(
            sampled, sir, (seed, _BRANCH_EPIDEMIC, model_index, ni),
            range(ens.runs_per_network), keep,
        )

    per_network = _indexed_map(one_network, ens.sampled_networks, workers)
    totals = np.zeros((3, sir.steps + 1), dtype=np.int64)
    for sums, _ in per_network:
        totals += sums
    pooled = _counts_to_curves(totals, ens.sampled_networks * ens.runs_per_network, g.n_nodes)

    if config.area_averaging == "pooled":
        area = area_between(pooled, actual, quadrature=config.quadrature)
    else:
        areas = [
            area_between(_counts_to_curves(sums, ens.runs_per_network, g.n_nodes),
                         actual, quadrature=config.quadrature)
            for sums, _ in per_network
        ]
        area = float(sum(areas) / len(areas))

    # + 0.0 turns a perfect fit's -0.0 into 0.0
    nll = -log_likelihood_per_pair(model, g) + 0.0
    row = QualityRow(spec.display_name, area, nll, model.parameter_count())
    details = {
        "name": spec.display_name,
        "variant": model.variant,
        "mode": getattr(model, "mode", None),
        "capped": model.capped,
        "communities": getattr(model, "k", None),
        "parameter_count": model.parameter_count(),
        "area_between_sir_curves": area,
        "neg_log_likelihood_per_pair": nll,
    }
    trajectories = [kept for _, kept in per_network] if keep else None
    return ModelResult(spec, row, pooled, details, trajectories)


def run_experiment(config: ExperimentConfig) -> ResultsReport:
    """Execute the full protocol and write artifacts to config.output_dir."""
    started = time.perf_counter()
    workers = _worker_count()
    g = read_graph(config.dataset_path, config.dataset_format)
    _validate_against_graph(config, g)

    # fitting is deterministic and cheap relative to simulation; doing it first
    # surfaces fit errors before any epidemic runs
    for spec in config.models:
        fit_model(g, spec)

    keep = config.save_trajectories
    actual_totals, actual_trajs = _ensemble_counts(
        g, config.sir, config.ensemble.actual_runs,
        (config.master_seed, _BRANCH_ACTUAL), workers, keep,
    )
    actual = _counts_to_curves(actual_totals, config.ensemble.actual_runs, g.n_nodes)

    results = [
        _evaluate_model(g, spec, mi, config, workers, actual, keep)
        for mi, spec in enumerate(config.models)
    ]

    curves = {"actual": actual}
    trajectories = {"actual": actual_trajs} if keep else None
    for res in results:
        curves[res.spec.display_name] = res.curves
        if keep:
            trajectories[res.spec.display_name] = res.trajectories

    report = ResultsReport(
        dataset=graph_summary(g, path=config.dataset_path, fmt=config.dataset_format),
        rows=[res.row for res in results],
        model_details=[res.details for res in results],
        curves=curves,
        provenance={
            "tool": "contactnet",
            "version": TOOL_VERSION,
            "master_seed": config.master_seed,
            "config": config_to_dict(config),
        },
        trajectories=trajectories,
    )
    report.wall_clock_seconds = time.perf_counter() - started
    write_artifacts(report, config)
    return report


def write_artifacts(report: ResultsReport, config: ExperimentConfig) -> None:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
    with open(out / "quality_table.txt", "w", encoding="utf-8") as fh:
        fh.write(render_quality_table(report.rows))
    for name, curves in report.curves.items():
        with open(out / f"curves_{name}.csv", "w", encoding="utf-8") as fh:
            write_curves_csv(curves, fh)
    if report.trajectories is not None:
        base = out / "trajectories"
        base.mkdir(exist_ok=True)
        for name, trajs in report.trajectories.items():
            if name == "actual":
                with open(base / "actual.csv", "w", encoding="utf-8") as fh:
                    write_trajectories_csv(trajs, fh)
                continue
            model_dir = base / name
            model_dir.mkdir(exist_ok=True)
            for ni, net_trajs in enumerate(trajs):
                with open(model_dir / f"network_{ni:03d}.csv", "w", encoding="utf-8") as fh:
                    write_trajectories_csv(net_trajs, fh)
