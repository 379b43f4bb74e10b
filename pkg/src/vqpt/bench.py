"""Run configuration, benchmark sweeps and CSV/JSON result files."""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .photonic import NoiseConfig
from .tomography import (
    DEFAULT_LEARNING_RATE,
    Exact,
    Photonic,
    RunRecord,
    Sampled,
    TomographyConfig,
    run_tomography,
)

CSV_HEADER = ["backend", "depth", "replication", "iteration", "cost", "fidelity", "wall_time_s"]
BACKENDS = ("exact", "sampled", "photonic")
SWEEP_KEYS = ("depth", "backend")


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        self.msg = msg
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class RunConfig:
    """One benchmark cell family: a backend at a depth over ``replications`` targets.

    Replication ``r`` uses the Haar target and initial angles drawn from the
    stream ``(seed, unitary_index + r)``.
    """

    t: int = 2
    depth: int = 3
    seed: int = 0
    replications: int = 3
    unitary_index: int = 0
    iterations: int = 10
    backend: str = "exact"
    shots: int = 8194
    phase_sigma: float = 0.0
    noisefloor_mean: float = 0.0
    noisefloor_sigma: float = 0.0
    intensity_noise_sigma: float = 0.0
    learning_rate: float = DEFAULT_LEARNING_RATE
    gradient_mode: str = "gate"
    entangler: str = "alternating"
    workers: int = 1
    output: str = "results"

    def __post_init__(self):
        checks = [
            ("t", self.t >= 1, ">= 1"),
            ("depth", self.depth >= 1, ">= 1"),
            ("replications", self.replications >= 1, ">= 1"),
            ("unitary_index", self.unitary_index >= 0, ">= 0"),
            ("iterations", self.iterations >= 1, ">= 1"),
            ("backend", self.backend in BACKENDS, f"one of {', '.join(BACKENDS)}"),
            ("shots", self.shots >= 1, ">= 1"),
            ("phase_sigma", self.phase_sigma >= 0, ">= 0"),
            ("noisefloor_mean", self.noisefloor_mean >= 0, ">= 0"),
            ("noisefloor_sigma", self.noisefloor_sigma >= 0, ">= 0"),
            ("intensity_noise_sigma", self.intensity_noise_sigma >= 0, ">= 0"),
            ("learning_rate", self.learning_rate > 0, "> 0"),
            ("gradient_mode", self.gradient_mode in ("gate", "mesh"), "gate or mesh"),
            ("entangler", self.entangler in ("alternating", "chain"), "alternating or chain"),
            ("workers", self.workers >= 1, ">= 1"),
        ]
        for key, ok, rule in checks:
            if not ok:
                raise ConfigError(f"{key} must be {rule}, got {getattr(self, key)!r}", key=key)

    @property
    def noise(self) -> NoiseConfig:
        return NoiseConfig(self.phase_sigma, self.noisefloor_mean, self.noisefloor_sigma,
                           self.intensity_noise_sigma)

    def make_backend(self):
        if self.backend == "exact":
            return Exact()
        if self.backend == "sampled":
            return Sampled(self.shots)
        return Photonic(self.noise)

    def tomography_config(self, replication: int) -> TomographyConfig:
        return TomographyConfig(
            t=self.t, d=self.depth, seed=self.seed,
            replication=self.unitary_index + replication,
            iterations=self.iterations, learning_rate=self.learning_rate,
            backend=self.make_backend(), gradient_mode=self.gradient_mode,
            entangler=self.entangler, workers=self.workers,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str, line: int):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}", line) from None
    return raw


def _tokenize(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"{key}: missing value", lineno)
        yield lineno, key, value


def parse_sweep(text: str, overrides: dict | None = None) -> list[RunConfig]:
    """Parse ``key = value`` lines; ``depth`` and ``backend`` may list several
    comma-separated values, giving one :class:`RunConfig` per combination."""
    values: dict[str, list] = {}
    lines: dict[str, int] = {}
    for lineno, key, value in _tokenize(text):
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        parts = [p.strip() for p in value.split(",")] if key in SWEEP_KEYS else [value]
        if any(not p for p in parts):
            raise ConfigError(f"{key}: empty list entry", lineno)
        values[key] = [_convert(key, p, lineno) for p in parts]
        lines[key] = lineno
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = [val]
            lines[key] = None
    scalars = {k: v[0] for k, v in values.items() if k not in SWEEP_KEYS}
    sweep = [values.get(k, [None]) for k in SWEEP_KEYS]
    out = []
    for combo in itertools.product(*sweep):
        kw = dict(scalars)
        kw.update({k: v for k, v in zip(SWEEP_KEYS, combo) if v is not None})
        try:
            out.append(RunConfig(**kw))
        except ConfigError as exc:
            raise ConfigError(exc.msg, lines.get(exc.key), exc.key) from None
    return out


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    configs = parse_sweep(text, overrides)
    if len(configs) != 1:
        raise ConfigError("a single run takes one depth and one backend; use 'bench' for sweeps")
    return configs[0]


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in asdict(cfg).items())


# --- report -------------------------------------------------------------------

@dataclass
class BenchmarkReport:
    configs: list[RunConfig]
    cells: dict[tuple[str, int, int], list[RunRecord]]
    total_wall_time_s: float = 0.0

    def rows(self):
        for (backend, depth, rep), records in self.cells.items():
            for r in records:
                yield backend, depth, rep, r

    def aggregates(self) -> list[dict]:
        """Per (backend, depth, iteration): mean and sample std over replications."""
        groups: dict[tuple[str, int], list[list[RunRecord]]] = {}
        for (backend, depth, _), records in self.cells.items():
            groups.setdefault((backend, depth), []).append(records)
        out = []
        for (backend, depth), runs in groups.items():
            for it in range(min(len(r) for r in runs)):
                row = {"backend": backend, "depth": depth, "iteration": it, "replications": len(runs)}
                for metric in ("cost", "fidelity", "wall_time_s"):
                    vals = np.array([getattr(r[it], metric) for r in runs])
                    row[f"{metric}_mean"] = float(vals.mean())
                    row[f"{metric}_std"] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                out.append(row)
        return out

    def final_fidelity(self, backend: str, depth: int) -> np.ndarray:
        return np.array([recs[-1].fidelity for (b, d, _), recs in self.cells.items()
                         if b == backend and d == depth])


def run_benchmark(configs, workers: int = 1, on_record=None) -> BenchmarkReport:
    """Run every (config, replication) cell; cells may execute in parallel."""
    configs = list(configs)
    jobs = [(cfg, rep) for cfg in configs for rep in range(cfg.replications)]

    def one(job):
        cfg, rep = job
        tc = cfg.tomography_config(rep)
        hook = None
        if on_record is not None:
            hook = lambda rec, trace: on_record(cfg, tc.replication, rec, trace)  # noqa: E731
        try:
            return run_tomography(tc, hook).records
        except Exception as exc:
            cell = f"backend={cfg.backend} depth={cfg.depth} replication={tc.replication}"
            try:
                wrapped = type(exc)(f"{cell}: {exc}")
            except Exception:
                raise exc from None
            raise wrapped from exc

    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]
    cells = {(cfg.backend, cfg.depth, cfg.unitary_index + rep): recs
             for (cfg, rep), recs in zip(jobs, results)}
    return BenchmarkReport(configs, cells, time.perf_counter() - start)


# --- emit ---------------------------------------------------------------------

def report_csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for backend, depth, rep, r in report.rows():
        w.writerow([backend, depth, rep, r.iteration, f"{r.cost:.12g}", f"{r.fidelity:.12g}",
                    f"{r.wall_time_s:.6f}"])
    return buf.getvalue()


def report_json(report: BenchmarkReport) -> dict:
    return {
        "tool": "vqpt",
        "version": __version__,
        "configs": [asdict(c) for c in report.configs],
        "records": [
            {"backend": b, "depth": d, "replication": rep, **asdict(r)}
            for b, d, rep, r in report.rows()
        ],
        "aggregates": report.aggregates(),
        "total_wall_time_s": report.total_wall_time_s,
    }


def emit(report: BenchmarkReport, out_dir, formats=("csv", "json")) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            p = out_dir / "results.csv"
            p.write_text(report_csv(report))
            written.append(p)
        if "json" in formats:
            p = out_dir / "results.json"
            p.write_text(json.dumps(report_json(report), indent=2))
            written.append(p)
    except OSError as exc:
        raise OSError(f"cannot write results to {out_dir}: {exc.strerror or exc}") from exc
    return written


def load_report_json(path) -> BenchmarkReport:
    data = json.loads(Path(path).read_text())
    configs = [RunConfig(**c) for c in data["configs"]]
    cells: dict[tuple[str, int, int], list[RunRecord]] = {}
    for row in data["records"]:
        key = (row["backend"], row["depth"], row["replication"])
        cells.setdefault(key, []).append(RunRecord(
            row["iteration"], row["cost"], row["fidelity"], row["wall_time_s"]))
    return BenchmarkReport(configs, cells, data.get("total_wall_time_s", 0.0))


def write_intensity_dump(path, raw, floored, normalized) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mode", "raw", "floored", "normalized"])
    for k, (a, b, c) in enumerate(zip(raw, floored, normalized)):
        w.writerow([k, f"{a:.12g}", f"{b:.12g}", f"{c:.12g}"])
    Path(path).write_text(buf.getvalue())
