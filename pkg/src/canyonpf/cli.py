"""Command-line interface.

::

    canyonpf simulate block_loop --mode all --seed 3 --out runs/loop
    canyonpf replay trace.jsonl map.geojson --mode ronin_pf --jaywalk-weight 0
    canyonpf sweep --scenario jaywalk_cross --param jaywalk_weight --values 0 0.4 1 --replications 20
    canyonpf map-validate map.geojson

Every subcommand prints JSON (or CSV for ``sweep``) on stdout. Failures
print ``{"error": ..., "type": ...}`` on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from .filter import FilterConfig
from .runner import (MODES, RunConfig, SweepSpec, export_scenario, load_session, map_validate,
                     run_session, sweep, write_outputs)
from .simulate import SCENARIOS

EXIT_OK, EXIT_INVALID, EXIT_ERROR = 0, 1, 2


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_common(p: argparse.ArgumentParser, modes: bool = True) -> None:
    if modes:
        p.add_argument("--mode", action="append", choices=(*MODES, "all"),
                       help="tracking configuration; repeatable, 'all' runs the three (default gnss_ronin_pf)")
    p.add_argument("--seed", type=int, help="seed for scenario noise and the filter")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON config file; command-line flags win")
    g = p.add_argument_group("filter parameters")
    for f in fields(FilterConfig):
        if f.name == "seed":
            continue
        g.add_argument(_flag(f.name), dest=f"f_{f.name}", metavar="N" if f.name == "n_particles" else "X",
                       type=int if f.name == "n_particles" else float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canyonpf", description="Map-constrained pedestrian tracking.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a built-in scenario, export it, replay it")
    p.add_argument("scenario", choices=sorted(SCENARIOS))
    p.add_argument("--drift", type=json.loads, help="JSON object of ImuDriftModel overrides")
    p.add_argument("--gnss", type=json.loads, help="JSON object of GnssNoiseModel overrides")
    _add_common(p)

    p = sub.add_parser("replay", help="evaluate a recorded trace against a map")
    p.add_argument("trace")
    p.add_argument("map")
    _add_common(p)

    p = sub.add_parser("sweep", help="sweep one filter parameter over several values")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", choices=sorted(SCENARIOS))
    src.add_argument("--trace")
    p.add_argument("--map")
    p.add_argument("--param", default=None, help="FilterConfig field (default jaywalk_weight)")
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--replications", type=int)
    p.add_argument("--pooling", choices=("pooled", "per_path"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sweep-mode", dest="sweep_mode", choices=MODES)
    _add_common(p, modes=False)

    p = sub.add_parser("map-validate", help="check a GeoJSON map and report problems")
    p.add_argument("path")
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a JSON object")
    return doc


def _filter_config(args, conf: dict) -> FilterConfig:
    data = dict(conf.get("filter", {}))
    for f in fields(FilterConfig):
        v = getattr(args, f"f_{f.name}", None)
        if v is not None:
            data[f.name] = v
    return FilterConfig.from_dict(data)


def _modes(args, conf: dict) -> list[str]:
    chosen = args.mode or conf.get("mode") or ["gnss_ronin_pf"]
    if isinstance(chosen, str):
        chosen = [chosen]
    if "all" in chosen:
        return list(MODES)
    for m in chosen:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}")
    return list(dict.fromkeys(chosen))


def _pick(args_value, conf: dict, key: str, default=None):
    return args_value if args_value is not None else conf.get(key, default)


def _evaluate(base: RunConfig, modes: list[str], out: str | None) -> dict:
    session = load_session(base)
    report = {}
    for mode in modes:
        result = run_session(session, mode, base.filter_config)
        if out:
            write_outputs(result, session.map, out)
        report[mode] = json.loads(result.summary_json())
    return report


def cmd_simulate(args) -> int:
    conf = _load_config(args.config)
    seed = int(_pick(args.seed, conf, "seed", 0))
    out = _pick(args.out, conf, "output_dir", f"runs/{args.scenario}-seed{seed}")
    drift = args.drift if args.drift is not None else conf.get("drift")
    gnss = args.gnss if args.gnss is not None else conf.get("gnss")
    trace_path, map_path = export_scenario(args.scenario, out, seed, drift, gnss)
    base = RunConfig(filter=_filter_config(args, conf), trace=str(trace_path), map=str(map_path), seed=seed)
    report = _evaluate(base, _modes(args, conf), out)
    _emit({"scenario": args.scenario, "seed": seed, "trace": str(trace_path), "map": str(map_path),
           "output_dir": str(out), "results": report})
    return EXIT_OK


def cmd_replay(args) -> int:
    conf = _load_config(args.config)
    seed = _pick(args.seed, conf, "seed")
    out = _pick(args.out, conf, "output_dir")
    base = RunConfig(filter=_filter_config(args, conf), trace=args.trace, map=args.map,
                     seed=None if seed is None else int(seed))
    _emit({"trace": args.trace, "map": args.map, "output_dir": out,
           "results": _evaluate(base, _modes(args, conf), out)})
    return EXIT_OK


def cmd_sweep(args) -> int:
    conf = _load_config(args.config)
    sconf = conf.get("sweep", {})
    scenario = args.scenario or (None if args.trace else conf.get("scenario", "jaywalk_cross"))
    trace = args.trace or (None if args.scenario else conf.get("trace"))
    map_path = args.map or conf.get("map")
    mode = args.sweep_mode or sconf.get("mode") or conf.get("mode") or "ronin_pf"
    base = RunConfig(mode=mode, filter=_filter_config(args, conf), scenario=scenario,
                     trace=trace, map=map_path if trace else None,
                     drift_overrides=conf.get("drift"), gnss_overrides=conf.get("gnss"))
    spec = SweepSpec(
        parameter=args.param or sconf.get("parameter", "jaywalk_weight"),
        values=tuple(args.values or sconf.get("values", (0.0, 0.4, 1.0))),
        replications=int(_pick(args.replications, sconf, "replications", 1)),
        seed0=int(_pick(args.seed, conf, "seed", 0)),
    )
    if trace:
        base = replace(base, seed=None)
    table = sweep(spec, base, pooling=args.pooling or sconf.get("pooling", "pooled"), workers=args.workers)
    text = table.to_csv()
    out = _pick(args.out, conf, "output_dir")
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / f"sweep_{spec.parameter}.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_map_validate(args) -> int:
    report = map_validate(args.path)
    _emit(report)
    return EXIT_OK if report["valid"] else EXIT_INVALID


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


COMMANDS = {"simulate": cmd_simulate, "replay": cmd_replay, "sweep": cmd_sweep,
            "map-validate": cmd_map_validate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
