"""Run configurations, file export and multi-run comparison tables.

A run configuration is a plain text file with one ``key = value`` pair per
line; ``#`` starts a comment. Recognised keys and defaults are listed in
``FIELDS``. Outputs of one run go to a single directory:

    field.csv         t, Omega_P, Omega_S
    populations.csv   t, rho11, rho22, rho33, abs_rho31
    convergence.csv   iteration, P, K, field_penalty, state_penalty
    summary.txt       key = value metrics of the final iterate
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import Detunings
from .objective import (SHAPE_KINDS, PenaltyConfig, ShapeFunction, coherence,
                        intermediate_population_metrics)
from .optimizers import (METHODS, REF_ZERO, REFERENCE_MODES, OptimizationResult,
                         OptimizerConfig, optimize)
from .scenarios import (MAX_COHERENCE, SCENARIO_NAMES, GaussianGuess,
                        classify_mechanism, gaussian_guess, make_scenario)

log = logging.getLogger(__name__)

OUTPUT_ENV = "LAMBDA_OCT_OUTPUT"
DEFAULT_OUTPUT = "runs"
CSV_FORMAT = "{:.12g}"


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    method: str
    alpha0: float = 0.01
    beta: float = 0.0
    reference_mode: str = REF_ZERO
    gamma: float = 1e-8
    max_iterations: int = 1000
    target_time: float = 10.0
    num_steps: int = 2000
    guess_amplitude: float = 1.0
    guess_center: float | None = None
    guess_width: float = 1.0
    pump_detuning: float = 0.0
    stokes_detuning: float = 0.0
    shape: str = "sine-squared"
    label: str = ""
    output_dir: str = ""
    seed: int = 0

    def __post_init__(self):
        set_ = object.__setattr__
        if self.guess_center is None:
            set_(self, "guess_center", 0.5 * self.target_time)
        if not self.label:
            set_(self, "label", _default_label(self))
        _validate(self)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            method=self.method,
            penalties=PenaltyConfig(self.alpha0, self.beta, ShapeFunction(self.shape)),
            reference_mode=self.reference_mode,
            max_iterations=self.max_iterations,
            gamma=self.gamma,
        )

    def scenario_obj(self):
        return make_scenario(
            self.scenario, self.target_time, self.num_steps,
            GaussianGuess(self.guess_amplitude, self.guess_center, self.guess_width),
            Detunings(self.pump_detuning, self.stokes_detuning),
        )


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_FIELDS = {"max_iterations", "num_steps", "seed"}
_STR_FIELDS = {"scenario", "method", "reference_mode", "shape", "label", "output_dir"}


def _default_label(cfg: RunConfig) -> str:
    parts = [cfg.scenario, cfg.method]
    if cfg.reference_mode != REF_ZERO:
        parts.append(cfg.reference_mode)
    parts.append(f"a{cfg.alpha0:g}-b{cfg.beta:g}")
    return "_".join(parts)


def _validate(cfg: RunConfig):
    choices = {"scenario": SCENARIO_NAMES, "method": METHODS,
               "reference_mode": REFERENCE_MODES, "shape": SHAPE_KINDS[:2]}
    for name, allowed in choices.items():
        if getattr(cfg, name) not in allowed:
            raise ConfigError(f"{name}: {getattr(cfg, name)!r} is not one of {allowed}")
    for name in FIELDS:
        if name in _STR_FIELDS:
            continue
        value = getattr(cfg, name)
        if name in _INT_FIELDS and (isinstance(value, bool) or int(value) != value):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{name}: must be finite, got {value!r}")
    positive = ("alpha0", "gamma", "target_time", "guess_width", "max_iterations")
    for name in positive:
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name}: must be positive, got {getattr(cfg, name)!r}")
    if cfg.beta < 0:
        raise ConfigError(f"beta: must be non-negative, got {cfg.beta!r}")
    if cfg.num_steps < 10:
        raise ConfigError(f"num_steps: must be at least 10, got {cfg.num_steps!r}")
    if cfg.reference_mode == "previous-iterate" and cfg.method != "krotov":
        raise ConfigError("reference_mode: previous-iterate requires method = krotov")
    if any(c in cfg.label for c in "/\\") or cfg.label.strip() != cfg.label:
        raise ConfigError(f"label: {cfg.label!r} is not usable as a directory name")


def _convert(name: str, raw: str, lineno: int):
    if name in _STR_FIELDS:
        return raw
    try:
        if name in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "an integer" if name in _INT_FIELDS else "a number"
        raise ConfigError(f"line {lineno}: {name}: expected {kind}, got {raw!r}") from None


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key not in FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, lineno)
    for required in ("scenario", "method"):
        if required not in values:
            raise ConfigError(f"{required}: missing required key")
    return RunConfig(**values)


def render_config(cfg: RunConfig) -> str:
    lines = []
    for name in FIELDS:
        value = getattr(cfg, name)
        lines.append(f"{name} = {value!r}" if isinstance(value, float) else f"{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        return parse_config(path.read_text())
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _fmt(x) -> str:
    return CSV_FORMAT.format(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def summarize(cfg: RunConfig, result: OptimizationResult) -> dict:
    s = dict(result.summary)
    pops = result.final_trajectory.populations[-1]
    try:
        mech = classify_mechanism(result.final_field)
    except ValueError:
        mech = {"ordering": "undefined", "half_stirap": False}
    return {
        "label": cfg.label, "scenario": cfg.scenario, "method": cfg.method,
        "reference_mode": cfg.reference_mode, "alpha0": cfg.alpha0, "beta": cfg.beta,
        "P": s["P"], "K": s["K"], "field_penalty": s["field_penalty"],
        "state_penalty": s["state_penalty"], "max_rho22": s["max_rho22"],
        "rho11_final": pops[0], "rho22_final": pops[1], "rho33_final": pops[2],
        "rho31_final": s["rho31_final"],
        "pump_peak_time": s["pump_peak_time"], "stokes_peak_time": s["stokes_peak_time"],
        "ordering": mech["ordering"], "half_stirap": mech["half_stirap"],
        "iterations": s["iterations"], "converged": s["converged"],
        "message": result.message,
    }


def _render_summary(summary: dict) -> str:
    lines = []
    for key, value in summary.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, (float, np.floating)):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_outputs(out_dir, cfg: RunConfig, result: OptimizationResult) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t = result.final_field.grid.nodes
    field = result.final_field
    _write_csv(out / "field.csv", ["t", "Omega_P", "Omega_S"],
               zip(t, field.pump, field.stokes))
    pops = result.final_trajectory.populations
    _write_csv(out / "populations.csv", ["t", "rho11", "rho22", "rho33", "abs_rho31"],
               zip(t, pops[:, 0], pops[:, 1], pops[:, 2], coherence(result.final_trajectory)))
    _write_csv(out / "convergence.csv",
               ["iteration", "P", "K", "field_penalty", "state_penalty"],
               ((r.index, r.transition_probability, r.cost.total, r.cost.field_penalty,
                 r.cost.state_penalty) for r in result.records))
    summary = summarize(cfg, result)
    (out / "summary.txt").write_text(_render_summary(summary))
    (out / "config.txt").write_text(render_config(cfg))
    return summary


def resolve_output(cfg: RunConfig, out: str | os.PathLike | None = None) -> Path:
    base = out or cfg.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    return Path(base)


def execute_run(cfg: RunConfig, out_dir=None) -> tuple[OptimizationResult, dict]:
    """Optimize one configuration and write its files into ``out_dir``."""
    scenario = cfg.scenario_obj()
    out = resolve_output(cfg, out_dir)
    try:
        result = optimize(gaussian_guess(scenario), scenario, cfg.optimizer_config())
    except (FloatingPointError, ValueError) as exc:
        log.error("%s failed: %s", cfg.label, exc)
        summary = {"label": cfg.label, "scenario": cfg.scenario, "method": cfg.method,
                   "converged": False, "message": f"failed: {exc}"}
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(_render_summary(summary))
        return None, summary
    return result, write_outputs(out, cfg, result)


def _run_for_table(args):
    cfg, out = args
    try:
        _, summary = execute_run(cfg, out)
    except Exception as exc:  # one bad run must not abort the comparison
        summary = {"label": cfg.label, "scenario": cfg.scenario, "method": cfg.method,
                   "converged": False, "message": f"failed: {exc}"}
    return summary


TRANSFER_COLUMNS = [("method", "method"), ("alpha0", "alpha0"), ("beta", "beta"),
                    ("P", "P"), ("K", "K"), ("max_rho22", "max rho22")]
COHERENCE_COLUMNS = [("method", "method"), ("alpha0", "alpha0"), ("beta", "beta"),
                     ("rho11_final", "rho11"), ("rho22_final", "rho22"),
                     ("rho33_final", "rho33"), ("rho31_final", "|rho31|"),
                     ("P", "P"), ("K", "K")]


def _method_name(summary: dict) -> str:
    name = summary.get("method", "?")
    ref = summary.get("reference_mode", REF_ZERO)
    return name if ref == REF_ZERO else f"{name} ({ref})"


def render_table(summaries: list[dict], scenario: str) -> str:
    columns = COHERENCE_COLUMNS if scenario == MAX_COHERENCE else TRANSFER_COLUMNS
    header = [title for _, title in columns] + ["status"]
    rows = []
    for s in summaries:
        failed = "P" not in s
        row = []
        for key, _ in columns:
            if key == "method":
                row.append(_method_name(s))
            elif failed:
                row.append("-")
            elif key in ("alpha0", "beta"):
                row.append(f"{s[key]:g}")
            else:
                row.append(f"{s[key]:.3f}")
        row.append("failed" if failed else ("converged" if s["converged"] else "max-iter"))
        rows.append(row)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(header), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


def compare_methods(configs: list[RunConfig], out_dir=None,
                    workers: int = 1) -> tuple[str, list[dict]]:
    """Run every configuration (each into its own subdirectory) and render
    one comparison table per scenario."""
    if not configs:
        raise ValueError("compare_methods needs at least one configuration")
    labels = [c.label for c in configs]
    if len(set(labels)) != len(labels):
        raise ValueError("configurations must have distinct labels")
    jobs = [(c, resolve_output(c, out_dir) / c.label) for c in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_for_table, jobs))
    else:
        summaries = [_run_for_table(job) for job in jobs]
    tables = []
    for scenario in SCENARIO_NAMES:
        group = [s for s in summaries if s["scenario"] == scenario]
        if group:
            tables.append(f"[{scenario}]\n" + render_table(group, scenario))
    return "\n".join(tables), summaries
