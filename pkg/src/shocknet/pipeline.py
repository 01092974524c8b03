"""End-to-end run: panel -> filtered graph -> VAR -> SVAR -> impulse responses."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import platform
import shutil
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, ShocknetError
from .panel import TimeSeriesPanel, garch_volatility, hp_cycle, load_panel, log_returns, standardize
from .planar import KINDS, FilteredGraph, build_graph, identification_check
from .svar import METHODS, cholesky_orthogonalize, estimate_svar_multistart, restriction_mask, structural_irf
from .var import fit_var, select_lag_bic

log = logging.getLogger(__name__)

PREPROCESSING = ("none", "log_returns", "hp_cycle", "garch_volatility")
SHOCKS = ("structural_B", "cholesky_P")

OUTPUT_FILES = {
    "graph_dot": "graph.dot",
    "graph_json": "graph.json",
    "identification": "identification.json",
    "var_model": "var_model.json",
    "svar_model": "svar_model.json",
    "irf_csv": "irf.csv",
}
MANIFEST = "manifest.json"
TIMINGS = "timings.json"


class StageError(ShocknetError):
    """A pipeline stage failed; ``cause`` holds the underlying error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    input: str
    seed: int
    output_dir: str = "shocknet-out"
    frequency: str = "other"
    missing: str = "reject"
    preprocessing: str = "none"
    hp_lambda: float | None = None
    hp_log: bool = True
    standardize: bool = True
    graph_kind: str = "PCPG"
    absolute_correlation: bool = False
    var_lag: int | str = 1
    var_p_max: int = 4
    var_intercept: bool = True
    n_starts: int = 25
    n_restarts: int = 30
    methods: tuple[str, ...] = METHODS
    n_jobs: int = 1
    irf_horizon: int = 10
    irf_shock: str = "structural_B"
    irf_scale: str = "shock"
    epicenter: str | None = None

    def __post_init__(self):
        checks = [
            ("frequency", self.frequency, ("quarterly", "monthly", "other")),
            ("missing", self.missing, ("reject", "ffill")),
            ("preprocessing", self.preprocessing, PREPROCESSING),
            ("graph_kind", self.graph_kind, KINDS),
            ("irf_shock", self.irf_shock, SHOCKS),
            ("irf_scale", self.irf_scale, ("shock", "own_unit")),
        ]
        for name, value, allowed in checks:
            if value not in allowed:
                raise ConfigError(f"{name}={value!r} is not one of {allowed}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}")
        if self.var_lag != "bic" and not (isinstance(self.var_lag, int) and self.var_lag >= 1):
            raise ConfigError(f"var_lag must be a positive integer or 'bic', got {self.var_lag!r}")
        for name in ("n_starts", "n_restarts", "n_jobs", "var_p_max"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.irf_horizon < 0:
            raise ConfigError("irf_horizon must be >= 0")
        if self.hp_lambda is not None and not self.hp_lambda > 0:
            raise ConfigError("hp_lambda must be positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["methods"] = list(self.methods)
        return d


def _coerce(field: dataclasses.Field, raw: str):
    raw = raw.strip()
    name = field.name
    if name in ("hp_lambda", "epicenter") and raw.lower() in ("", "none", "default"):
        return None
    try:
        if name == "methods":
            return tuple(m.strip() for m in raw.split(",") if m.strip())
        if name == "var_lag":
            return "bic" if raw.lower() == "bic" else int(raw)
        if name == "hp_lambda":
            return float(raw)
        if field.type in ("bool",):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if field.type == "int":
            return int(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from None
    return raw


def parse_config(text: str = "", overrides: dict[str, str] | None = None) -> PipelineConfig:
    """Build a config from ``key = value`` lines plus string overrides.

    ``#`` and ``;`` start comments. Unknown keys are rejected.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[pipeline]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw = dict(parser["pipeline"])
    raw.update(overrides or {})
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    for required in ("input", "seed"):
        if required not in raw:
            raise ConfigError(f"config is missing required key {required!r}")
    values = {k: _coerce(fields[k], v) for k, v in raw.items()}
    return PipelineConfig(**values)


def load_config(path, overrides: dict[str, str] | None = None) -> PipelineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text, overrides)
    # relative paths are relative to the config file
    base = Path(path).parent
    for key in ("input", "output_dir"):
        value = Path(getattr(cfg, key))
        if not value.is_absolute():
            cfg = dataclasses.replace(cfg, **{key: str((base / value).resolve())})
    return cfg


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def preprocess(panel: TimeSeriesPanel, config: PipelineConfig) -> TimeSeriesPanel:
    if config.preprocessing == "log_returns":
        panel = log_returns(panel)
    elif config.preprocessing == "hp_cycle":
        panel = hp_cycle(panel, config.hp_lambda, log=config.hp_log)
    elif config.preprocessing == "garch_volatility":
        panel, _ = garch_volatility(log_returns(panel))
    if config.standardize:
        panel = standardize(panel)
    return panel


class _Stages:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        log.info("stage %s", name)
        try:
            return fn(*args, **kwargs)
        except ShocknetError as exc:
            raise StageError(name, exc) from exc
        except (ValueError, ArithmeticError, LookupError, OSError, np.linalg.LinAlgError) as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timings[name] = time.perf_counter() - t0


def build_filtered_graph(config: PipelineConfig, stages: _Stages | None = None) -> tuple[TimeSeriesPanel, FilteredGraph]:
    stages = stages or _Stages()
    panel = stages.run(
        "panel", load_panel, config.input, missing=config.missing, frequency=config.frequency
    )
    panel = stages.run("preprocess", preprocess, panel, config)
    graph = stages.run("graph", build_graph, config.graph_kind, panel, absolute=config.absolute_correlation)
    return panel, graph


def run_pipeline(config: PipelineConfig) -> dict[str, Any]:
    """Execute every stage and write the artefacts listed in the returned manifest.

    Outputs are a pure function of the config and the input bytes. Wall
    times go to a separate ``timings.json`` so the manifest itself is
    reproducible byte for byte. On failure every file written by this call
    is removed and :class:`StageError` is raised.
    """
    out = Path(config.output_dir)
    created_dir = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    stages = _Stages()

    def emit(key: str, writer) -> None:
        path = out / OUTPUT_FILES[key]
        writer(path)
        written.append(path)

    try:
        panel, graph = build_filtered_graph(config, stages)
        if config.epicenter is not None and config.epicenter not in panel.labels:
            raise StageError("panel", LookupError(f"unknown epicenter {config.epicenter!r}"))
        emit("graph_dot", graph.write_dot)
        emit("graph_json", graph.to_json)
        report = identification_check(graph.kind, graph.n)
        emit(
            "identification",
            lambda p: p.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"),
        )

        if config.var_lag == "bic":
            p = stages.run("lag_selection", select_lag_bic, panel, config.var_p_max, intercept=config.var_intercept)
        else:
            p = config.var_lag
        var = stages.run("var", fit_var, panel, p, intercept=config.var_intercept)
        emit("var_model", var.to_json)

        mask = stages.run("restriction_mask", restriction_mask, graph)
        svar = stages.run(
            "svar",
            estimate_svar_multistart,
            var,
            mask,
            n_starts=config.n_starts,
            n_restarts=config.n_restarts,
            methods=config.methods,
            seed=config.seed,
            n_jobs=config.n_jobs,
        )
        emit("svar_model", svar.to_json)

        if config.irf_shock == "structural_B":
            impact = svar.B
        else:
            impact = stages.run("cholesky", cholesky_orthogonalize, var.Sigma_u)
        irf = stages.run(
            "irf", structural_irf, var, impact, config.irf_horizon,
            shock_kind=config.irf_shock, scale=config.irf_scale,
        )
        emit("irf_csv", irf.to_csv)

        manifest = {
            "package": "shocknet",
            "version": __version__,
            "config": config.to_dict(),
            "config_sha256": hashlib.sha256(
                json.dumps(config.to_dict(), sort_keys=True).encode()
            ).hexdigest(),
            "input_sha256": _sha256(Path(config.input)),
            "seed": config.seed,
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "panel": {"labels": list(panel.labels), "T": panel.n_obs, "provenance": list(panel.provenance)},
            "var_lag": p,
            "loglik": svar.loglik,
            "identification": report.to_dict(),
            "outputs": {key: {"file": path.name, "sha256": _sha256(path)} for key, path in zip(OUTPUT_FILES, written)},
        }
        manifest_path = out / MANIFEST
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        written.append(manifest_path)
        timings_path = out / TIMINGS
        timings_path.write_text(json.dumps(stages.timings, indent=2) + "\n", encoding="utf-8")
        return manifest
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        (out / TIMINGS).unlink(missing_ok=True)
        if created_dir and not any(out.iterdir()):
            shutil.rmtree(out, ignore_errors=True)
        raise
