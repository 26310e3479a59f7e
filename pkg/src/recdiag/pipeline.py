"""End-to-end runs: compute ensembles, CUSUM paths and diagnostics, write artifacts.

All numbers are computed before anything is written, and files are
written by a single writer in a fixed order, so outputs depend only on
the run configuration.
"""

from __future__ import annotations

import json
import logging
import math
import platform
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import figures
from .cusum import Boundary, CrossingReport, CusumPath, cusum_path, detect_crossing
from .diagnostics import DiagnosticsReport, classical_diagnostics
from .engine import Method, TraceEnsemble, trace_ensemble, trim_start_step
from .errors import ConfigError, DimensionMismatch, LeverageOne, UnknownRowId
from .io import load_bundled, load_csv, write_csv, write_json
from .linalg import Dataset, OlsFit, fit_ols
from .permute import PermutationSchedule, suggest_schedule
from .simgen import ScenarioSpec, Target, generate

log = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg", "png")
LARGE_SAMPLE_N = 50


@dataclass
class RunConfig:
    input: str | None = None
    dataset: str | None = None
    response: str | None = None
    id_column: str | None = None
    intercept: bool = True
    scenario: dict | None = None
    schedule: str | None = None
    seed: int = 0
    trim_alpha: float = 0.0
    cusum_alpha: float = 0.01
    method: str = "resolve"
    grid: int = 0
    formats: tuple[str, ...] = ("csv", "svg", "png")
    out: str = "recdiag-out"

    def validate(self) -> None:
        sources = sum(x is not None for x in (self.input, self.dataset, self.scenario))
        if sources != 1:
            raise ConfigError("give exactly one of an input CSV, a bundled dataset or a scenario")
        if self.input is not None and not self.response:
            raise ConfigError("--response is required with --input")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown format(s) {sorted(bad)}; choose from {FORMATS}")
        if not 0.0 <= self.trim_alpha < 1.0:
            raise ConfigError("trim_alpha must lie in [0, 1)")
        if not 0.0 < self.cusum_alpha < 0.5:
            raise ConfigError("cusum_alpha must lie in (0, 0.5)")
        if self.grid < 0:
            raise ConfigError("grid must be >= 0")
        if self.method not in {m.value for m in Method}:
            raise ConfigError(f"unknown method {self.method!r}; choose resolve or update")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["formats"] = list(self.formats)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "formats" in d:
            d["formats"] = tuple(d["formats"])
        return cls(**d)


@dataclass
class RunResult:
    data: Dataset
    fit: OlsFit
    ensemble: TraceEnsemble
    boundary: Boundary
    paths: list[CusumPath]
    crossings: list[CrossingReport]
    diagnostics: DiagnosticsReport | None
    notes: list[str] = field(default_factory=list)

    @property
    def crossing_rate(self) -> float:
        if not self.crossings:
            return float("nan")
        return sum(c.crossed for c in self.crossings) / len(self.crossings)


def load_data(config: RunConfig) -> Dataset:
    if config.dataset is not None:
        return load_bundled(config.dataset)
    if config.input is not None:
        return load_csv(config.input, config.response, intercept=config.intercept,
                        id_column=config.id_column)
    return generate(ScenarioSpec.from_dict(config.scenario))


def resolve_schedule(config: RunConfig, n: int) -> PermutationSchedule:
    if config.schedule is None:
        s = suggest_schedule(n)
        return PermutationSchedule(s.kind, n, N=s.N, seed=config.seed)
    return PermutationSchedule.parse(config.schedule, n, seed=config.seed)


def compute(data: Dataset, config: RunConfig, threads: int | None = None) -> RunResult:
    """All numerical work for one dataset."""
    sched = resolve_schedule(config, data.n)
    trim_start_step(config.trim_alpha, data.n, data.p)
    fit = fit_ols(data)
    ensemble = trace_ensemble(data, sched, Method(config.method), config.trim_alpha, threads=threads)
    boundary = Boundary.for_alpha(config.cusum_alpha)
    notes = []
    invalid = [t.perm_id for t in ensemble.traces if not t.valid]
    if invalid:
        notes.append(f"{len(invalid)} permutation(s) had rank-deficient prefixes and were skipped")

    paths, crossings = [], []
    sigma = math.sqrt(fit.sigma2_hat) if not fit.sigma2_undefined else 0.0
    if sigma > 0:
        for tr in ensemble.valid_traces:
            path = cusum_path(tr.residuals, sigma, data.n, config.grid, perm_id=tr.perm_id)
            paths.append(path)
            crossings.append(detect_crossing(path, boundary))
    else:
        notes.append("full-sample residual variance is zero; CUSUM paths undefined")
    if data.n < LARGE_SAMPLE_N:
        notes.append(f"n = {data.n} < {LARGE_SAMPLE_N}: the CUSUM boundary relies on a "
                     "large-sample Brownian approximation and is indicative only")

    try:
        diag = classical_diagnostics(data)
    except (LeverageOne, DimensionMismatch) as exc:
        diag = None
        notes.append(f"classical diagnostics unavailable: {exc}")
    for note in notes:
        log.warning(note)
    return RunResult(data, fit, ensemble, boundary, paths, crossings, diag, notes)


# --- writers -----------------------------------------------------------------

def trace_rows(result: RunResult):
    ens, data = result.ensemble, result.data
    keep = ens.exported_mask()
    header = ["perm_id", "valid", "step", "subset_size", "entering_row",
              *[f"beta_{lab}" for lab in data.labels], "sigma2", "r2", "recursive_residual", "plotted"]
    rows = []
    for tr in ens.traces:
        if not tr.valid:
            rows.append([tr.perm_id, 0] + [""] * (len(header) - 2))
            continue
        for i in range(tr.n_steps):
            entering = data.row_ids[tr.perm[tr.subset_size[i] - 1] - 1]
            rows.append([tr.perm_id, 1, i + 1, tr.subset_size[i], entering, *tr.beta[i],
                         tr.sigma2[i], tr.r2[i], tr.recursive_residual[i], bool(keep[i])])
    return header, rows


def cusum_rows(result: RunResult, grid: int):
    header = ["perm_id", "t", "value", "boundary_upper", "boundary_lower", "crossed"]
    rows = []
    b = result.boundary
    for path in result.paths:
        ts, xs = path.sample(grid)
        up = b.upper(ts)
        for t, x, u in zip(ts, xs, up):
            rows.append([path.perm_id, t, x, u, -u, bool(t > 0 and abs(x) >= u)])
    return header, rows


def crossing_rows(result: RunResult):
    header = ["perm_id", "crossed", "first_crossing_t", "side"]
    rows = [[c.perm_id, c.crossed, c.first_crossing_t, c.side or ""] for c in result.crossings]
    return header, rows


def diagnostics_rows(report: DiagnosticsReport):
    header = ["row_id", "leverage", "high_leverage", "standardized_residual", "cook_distance", "dffit"]
    rows = [[r["row_id"], r["leverage"], r["high_leverage"], r["standardized_residual"],
             r["cook_distance"], r["dffit"]] for r in report.records()]
    return header, rows


def summary(result: RunResult) -> dict:
    fit = result.fit
    return {
        "n": result.data.n,
        "p": result.data.p,
        "labels": list(result.data.labels),
        "beta_hat": dict(zip(result.data.labels, fit.beta_hat.tolist())),
        "sigma2_hat": fit.sigma2_hat,
        "r2": fit.r2,
        "schedule": result.ensemble.schedule.describe(),
        "permutations": len(result.ensemble.traces),
        "valid_traces": len(result.ensemble.valid_traces),
        "cusum_a": result.boundary.a,
        "crossing_rate": result.crossing_rate,
        "notes": result.notes,
    }


def write_result(result: RunResult, out_dir: Path, config: RunConfig,
                 overlay: TraceEnsemble | None = None, title: str = "") -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    formats = set(config.formats)
    if "csv" in formats:
        write_csv(out_dir / "traces.csv", *trace_rows(result))
        write_csv(out_dir / "cusum.csv", *cusum_rows(result, config.grid))
        write_csv(out_dir / "crossings.csv", *crossing_rows(result))
        if result.diagnostics is not None:
            write_csv(out_dir / "diagnostics.csv", *diagnostics_rows(result.diagnostics))
    if "json" in formats:
        th, tr = trace_rows(result)
        ch, cr = crossing_rows(result)
        write_json(out_dir / "results.json", {
            "summary": summary(result),
            "traces": [dict(zip(th, row)) for row in tr],
            "crossings": [dict(zip(ch, row)) for row in cr],
            "diagnostics": result.diagnostics.records() if result.diagnostics else None,
        })
    layers = [(result.ensemble, figures.ENSEMBLE_COLOR)]
    if overlay is not None:
        layers = [(overlay, figures.FULL_COLOR), (result.ensemble, figures.REDUCED_COLOR)]
    prefix = f"{title}: " if title else ""
    if "svg" in formats:
        figures.write_trace_svgs(out_dir, layers, prefix)
        if result.paths:
            figures.write_cusum_svg(out_dir / "cusum.svg", result.paths, result.boundary, f"{prefix}CUSUM")
    if "png" in formats:
        figures.trace_grid_figure(out_dir / "traces.png", [(title or "traces", layers)])
        if result.paths:
            figures.cusum_grid_figure(out_dir / "cusum.png", [(title or "CUSUM", result.paths, result.boundary)])


def manifest(command: str, config: RunConfig, extra: dict | None = None,
             results: dict[str, RunResult] | None = None) -> dict:
    boundary = Boundary.for_alpha(config.cusum_alpha)
    m = {
        "command": command,
        "config": config.to_dict(),
        "thresholds": {
            "rank_rtol": 1e-10,
            "leverage": "2p/n",
            "cusum_alpha": config.cusum_alpha,
            "cusum_a": boundary.a,
            "trim_alpha": config.trim_alpha,
        },
        "cusum": {"assumes_gaussian": True, "large_sample_only": True},
        "rng": "numpy PCG64",
        "versions": {"recdiag": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
    }
    if extra:
        m.update(extra)
    if results:
        m["runs"] = {name: {"schedule": r.ensemble.schedule.describe(), "seed": r.ensemble.schedule.seed,
                            "notes": r.notes} for name, r in results.items()}
    return m


def _prepare(config: RunConfig) -> Path:
    config.validate()
    if config.input is not None:
        config.input = str(Path(config.input).resolve())
    return Path(config.out)


def run_pipeline(config: RunConfig, threads: int | None = None) -> RunResult:
    out = _prepare(config)
    data = load_data(config)
    result = compute(data, config, threads)
    write_result(result, out, config)
    write_json(out / "manifest.json", manifest("run", config, results={"run": result}))
    return result


def _slug(ids: Sequence[str]) -> str:
    return "drop_" + ("_".join(re.sub(r"[^A-Za-z0-9]+", "-", i) for i in ids) or "none")


def run_compare(config: RunConfig, drop_sets: Sequence[Sequence[str]],
                threads: int | None = None) -> dict[str, RunResult]:
    """Full data against each row-deleted copy; overlays in ``drop_*`` subdirectories."""
    out = _prepare(config)
    if not drop_sets:
        raise ConfigError("compare needs at least one drop set")
    data = load_data(config)
    known = set(data.row_ids)
    for ids in drop_sets:
        missing = [i for i in ids if i not in known]
        if missing:
            raise UnknownRowId(f"unknown row id(s): {', '.join(missing)}")

    full = compute(data, config, threads)
    results = {"full": full}
    for ids in drop_sets:
        results[_slug(ids)] = compute(data.drop(ids), config, threads)

    write_result(full, out / "full", config, title="full data")
    delta_rows = []
    columns = []
    for ids in drop_sets:
        name = _slug(ids)
        red = results[name]
        label = "without " + (", ".join(ids) or "nothing")
        write_result(red, out / name, config, overlay=full.ensemble, title=label)
        columns.append((label, [(full.ensemble, figures.FULL_COLOR), (red.ensemble, figures.REDUCED_COLOR)]))
        for lab, b_full, b_red in zip(data.labels, full.fit.beta_hat, red.fit.beta_hat):
            delta_rows.append([name, f"beta_{lab}", b_full, b_red, b_red - b_full])
        for key in ("sigma2_hat", "r2"):
            a, b = getattr(full.fit, key), getattr(red.fit, key)
            delta_rows.append([name, key, a, b, b - a])
    if "csv" in config.formats:
        write_csv(out / "deltas.csv", ["drop_set", "parameter", "full", "reduced", "delta"], delta_rows)
    if "png" in config.formats:
        figures.trace_grid_figure(out / "compare.png", columns)
    write_json(out / "manifest.json",
               manifest("compare", config, {"drop_sets": [list(s) for s in drop_sets]}, results))
    return results


def run_simulate(config: RunConfig, targets: Sequence[str] | None = None,
                 threads: int | None = None) -> dict[str, RunResult]:
    """One column per outlier target, mirroring the simulated-data figure layout."""
    out = _prepare(config)
    base = ScenarioSpec.from_dict(config.scenario)
    if targets is None:
        targets = [base.target.value]
    targets = [Target(t).value for t in targets]
    results = {}
    for t in targets:
        spec = base.with_(target=t)
        results[t] = compute(generate(spec), config, threads)
    titles = {"none": "no outlier", "x": "outlier in x", "y": "outlier in y", "both": "outlier in x and y"}
    for t, res in results.items():
        write_result(res, out / t, config, title=titles[t])
    if "png" in config.formats:
        figures.trace_grid_figure(out / "traces.png",
                                  [(titles[t], [(r.ensemble, figures.ENSEMBLE_COLOR)]) for t, r in results.items()])
        cols = [(titles[t], r.paths, r.boundary) for t, r in results.items() if r.paths]
        if cols:
            figures.cusum_grid_figure(out / "cusum.png", cols)
    write_json(out / "manifest.json", manifest("simulate", config, {"targets": targets}, results))
    return results


def replay(manifest_path, out: str | None = None, threads: int | None = None):
    """Re-run a recorded command from its manifest."""
    try:
        m = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
        config = RunConfig.from_dict(m["config"])
        command = m["command"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from None
    if out is not None:
        config.out = out
    if command == "run":
        return run_pipeline(config, threads)
    if command == "compare":
        return run_compare(config, m["drop_sets"], threads)
    if command == "simulate":
        return run_simulate(config, m["targets"], threads)
    raise ConfigError(f"manifest has unknown command {command!r}")


__all__ = ["RunConfig", "RunResult", "compute", "run_pipeline", "run_compare", "run_simulate",
           "replay", "load_data"]
