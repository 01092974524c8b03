"""Command-line entry point.

Subcommands::

    shocknet run CONFIG [--set key=value ...]
    shocknet graph-only CONFIG [--set key=value ...]
    shocknet synth --n 6 --t 5000 --kind PCPG --seed 1 --out DIR
    shocknet check-ident --kind PMFG --n 11

Exit status is 0 on success, 2 for configuration or input errors and 3 for
estimation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    MissingDataError,
    ParseError,
    SchemaError,
    ShocknetError,
)
from .panel import write_panel
from .pipeline import StageError, build_filtered_graph, load_config, run_pipeline
from .planar import KINDS, identification_check
from .svar import shock_trace
from .synthetic import SyntheticSpec, generate_synthetic

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION = 0, 2, 3

_INPUT_ERRORS = (ConfigError, ParseError, SchemaError, MissingDataError, FileNotFoundError)


def _overrides(pairs) -> dict[str, str]:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out


def _exit_code(exc: BaseException) -> int:
    cause = exc.cause if isinstance(exc, StageError) else exc
    return EXIT_CONFIG if isinstance(cause, _INPUT_ERRORS) else EXIT_ESTIMATION


def cmd_run(args) -> int:
    config = load_config(args.config, _overrides(args.set))
    manifest = run_pipeline(config)
    out = Path(config.output_dir)
    print(f"wrote {len(manifest['outputs'])} outputs to {out}")
    if config.epicenter is not None:
        from .svar import IrfResult

        irf = IrfResult.from_csv(out / manifest["outputs"]["irf_csv"]["file"], config.irf_shock)
        for row in shock_trace(irf, config.epicenter):
            print(f"{row.horizon:>4d}  {row.node:<12s} {row.response: .6f}")
    return EXIT_OK


def cmd_graph_only(args) -> int:
    config = load_config(args.config, _overrides(args.set))
    _, graph = build_filtered_graph(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph.write_dot(out / "graph.dot")
    graph.to_json(out / "graph.json")
    report = identification_check(graph.kind, graph.n)
    (out / "identification.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"{graph.kind}: {len(graph.edges)} edges on {graph.n} nodes -> {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(args.n, args.t, args.kind, args.radius, args.seed)
    panel, truth = generate_synthetic(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_panel(panel, out / "panel.csv")
    truth.graph.write_dot(out / "truth_graph.dot")
    truth.graph.to_json(out / "truth_graph.json")
    payload = {
        "spec": spec.__dict__,
        "labels": list(panel.labels),
        "A1": truth.A1.tolist(),
        "B0": truth.B0.tolist(),
        "spectral_radius": float(np.max(np.abs(np.linalg.eigvals(truth.A1)))),
    }
    (out / "truth.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"synthetic {spec.kind} panel N={spec.N} T={spec.T} -> {out}")
    return EXIT_OK


def cmd_check_ident(args) -> int:
    if args.n < 1:
        raise ConfigError(f"--n must be >= 1, got {args.n}")
    report = identification_check(args.kind, args.n)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shocknet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("run", cmd_run, "full pipeline: graph, VAR, SVAR and impulse responses"),
        ("graph-only", cmd_graph_only, "stop after building the filtered graph"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="flat key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.set_defaults(func=fn)

    p = sub.add_parser("synth", help="simulate a panel from a random graph-restricted SVAR")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--kind", choices=KINDS, default="PCPG")
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check-ident", help="order condition for a graph kind and node count")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_check_ident)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ShocknetError, FileNotFoundError) as exc:
        print(f"shocknet: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
