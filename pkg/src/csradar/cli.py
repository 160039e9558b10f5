"""Command-line front end.

    csradar <command> [--config FILE] [--output-dir DIR] [--seed N] [options]

Values given as flags override values from ``--config``; the fully
resolved configuration is echoed to ``<output-dir>/config.json``, which can
be passed back through ``--config`` to reproduce the run. Exit codes: 0 ok,
1 experiment or I/O error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import bounds, harness
from .gabor import build_dictionary, verify_mub_properties
from .scenes import devectorize

COMMANDS = ("phase-transition", "radar-demo", "classical-compare", "properties", "bounds")
PT_COLUMNS = ("n", "k", "trials", "successes", "fraction", "mean_error", "thm1", "thm2",
              "empirical_line")
BOUNDS_COLUMNS = ("n", "eps", "t", "thm1", "thm2", "thm3", "empirical_line")
REPORT_THRESHOLD = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _snr(value) -> float:
    return math.inf if str(value).strip().lower() in ("inf", "+inf", "infinity") else float(value)


def _snr_list(text) -> list[float]:
    if isinstance(text, list):
        return [_snr(v) for v in text]
    return [_snr(x) for x in str(text).split(",") if x.strip()]


def _opt_float(value):
    return None if value is None else float(value)


def _opt_int(value):
    return None if value is None else int(value)


def _flag(value) -> bool:
    if isinstance(value, bool):
        return value
    raise UsageError(f"expected a boolean, got {value!r}")


# name -> (converter, default, help)
PARAMETERS: dict[str, dict[str, tuple]] = {
    "phase-transition": {
        "primes": (lambda v: v if isinstance(v, list) else _int_list(v), None,
                   "comma-separated primes (default 5..47; 5..127 with --full)"),
        "trials": (_opt_int, None, "trials per (N, K) cell (default 20; 100 with --full)"),
        "k_min": (int, 1, "smallest sparsity"),
        "k_max": (_opt_int, None, "largest sparsity (default N)"),
        "k_step": (int, 1, "sparsity step"),
        "threshold": (float, 1e-4, "success threshold on ||s - s*||_2"),
        "solver": (str, "bp", "bp or omp"),
        "eps": (float, 0.1, "probability parameter for the thm2 column"),
        "full": (_flag, False, "full prime range up to 127 with 100 trials"),
    },
    "radar-demo": {
        "n": (int, 47, "grid size"),
        "k": (int, 8, "number of targets"),
        "snr": (_snr_list, [math.inf, 15.0, 5.0], "comma-separated SNRs in dB; 'inf' allowed"),
        "probe": (str, "alltop", "|".join(harness.PROBES)),
        "recovery": (str, "bp", "|".join(harness.RECOVERIES)),
        "width": (_opt_float, None, "Gaussian pulse width in samples"),
    },
    "classical-compare": {
        "n": (int, 47, "grid size (prime)"),
        "k": (int, 3, "number of targets"),
        "width": (_opt_float, None, "Gaussian pulse width in samples"),
    },
    "properties": {
        "probe": (str, "alltop", "|".join(harness.PROBES)),
        "n": (int, 11, "dimension"),
        "tol": (float, 1e-10, "tolerance for the property checks"),
        "width": (_opt_float, None, "Gaussian pulse width in samples"),
    },
    "bounds": {
        "n": (int, 47, "dimension (prime)"),
        "eps": (float, 0.1, "eps for thm2 (probability) and thm3 (noise bound)"),
        "t": (float, 1.0, "stability budget T for thm3"),
    },
}
GLOBAL_DEFAULTS = {"output_dir": "out", "base_seed": 0}


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "out"
    base_seed: int = 0

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=1, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def _build_parser() -> _Parser:
    parser = _Parser(prog="csradar", description="Compressed-sensing radar experiments.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--output-dir", dest="output_dir", default=argparse.SUPPRESS)
        p.add_argument("--seed", dest="base_seed", type=int, default=argparse.SUPPRESS)
        for key, (_, _, helptext) in PARAMETERS[name].items():
            flag = "--" + key.replace("_", "-")
            if key == "full":
                p.add_argument(flag, dest=key, action="store_true", default=argparse.SUPPRESS,
                               help=helptext)
            else:
                p.add_argument(flag, dest=key, default=argparse.SUPPRESS, help=helptext)
    return parser


def usage() -> str:
    return _build_parser().format_help()


def parse_config(argv) -> RunConfig:
    """Resolve defaults, config file and flags into a validated RunConfig."""
    argv = list(argv)
    if not argv:
        raise UsageError(usage())
    file_data: dict = {}
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config:
        try:
            file_data = json.loads(Path(known.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {known.config}: {exc}") from exc
        if not isinstance(file_data, dict):
            raise UsageError("config file must hold a JSON object")
        if not rest or rest[0] not in COMMANDS:
            if "command" not in file_data:
                raise UsageError("no command given")
            argv = [file_data["command"]] + argv
    ns = vars(_build_parser().parse_args(argv))
    command = ns.pop("command")
    if command is None:
        raise UsageError(usage())
    ns.pop("config", None)

    if "command" in file_data and file_data["command"] != command:
        raise UsageError(f"config is for {file_data['command']!r}, not {command!r}")
    unknown = set(file_data) - {"command", "parameters", "output_dir", "base_seed"}
    file_params = file_data.get("parameters", {})
    unknown |= {f"parameters.{k}" for k in set(file_params) - set(PARAMETERS[command])}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")

    spec = PARAMETERS[command]
    params = {}
    for key, (convert, default, _) in spec.items():
        raw = ns[key] if key in ns else file_params.get(key, default)
        try:
            params[key] = convert(raw) if raw is not None else None
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    if command == "phase-transition":
        full = params["full"]
        if params["primes"] is None:
            params["primes"] = list(harness.FULL_PRIMES if full else harness.DESK_PRIMES)
        if params["trials"] is None:
            params["trials"] = 100 if full else 20
    cfg = RunConfig(
        command=command,
        parameters=params,
        output_dir=str(ns.get("output_dir", file_data.get("output_dir", GLOBAL_DEFAULTS["output_dir"]))),
        base_seed=int(ns.get("base_seed", file_data.get("base_seed", GLOBAL_DEFAULTS["base_seed"]))),
    )
    try:
        _experiment_config(cfg)
    except ValueError as exc:
        raise UsageError(f"invalid {command} configuration: {exc}") from exc
    return cfg


def _experiment_config(cfg: RunConfig):
    """Typed, validated experiment object for ``cfg`` (raises ValueError)."""
    p = cfg.parameters
    if cfg.command == "phase-transition":
        return harness.PhaseTransitionConfig(
            primes=tuple(p["primes"]), trials=p["trials"], k_min=p["k_min"], k_max=p["k_max"],
            k_step=p["k_step"], success_threshold=p["threshold"], solver=p["solver"],
            base_seed=cfg.base_seed, eps=p["eps"],
        )
    if cfg.command == "radar-demo":
        return harness.RadarDemoConfig(
            n=p["n"], k=p["k"], snr_list=tuple(p["snr"]), probe=p["probe"],
            recovery=p["recovery"], seed=cfg.base_seed, pulse_width=p["width"],
        )
    if cfg.command == "classical-compare":
        bounds.thm1_bound(p["n"])
        if not p["k"] < bounds.thm1_bound(p["n"]):
            raise ValueError(f"k={p['k']} must be below {bounds.thm1_bound(p['n']):.4f}")
        return p
    if cfg.command == "properties":
        if p["probe"] not in harness.PROBES:
            raise ValueError(f"unknown probe {p['probe']!r}")
        harness.make_probe(p["probe"], p["n"], cfg.base_seed, p["width"])
        if p["n"] > 61:
            raise ValueError("properties needs a dense Gram; n must be <= 61")
        return p
    if cfg.command == "bounds":
        bounds.bound_report(p["n"], p["eps"], p["t"])
        return p
    raise ValueError(f"unknown command {cfg.command!r}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _snr_tag(snr: float) -> str:
    return "inf" if math.isinf(snr) else format(snr, "g")


def write_outputs(command: str, results: dict, output_dir) -> list[Path]:
    """Serialize one command's results; returns the files written."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, text: str):
        path = out / name
        path.write_text(text)
        written.append(path)

    def put_json(name: str, obj):
        put(name, json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")

    if command == "phase-transition":
        rows = [dict(asdict(c), fraction=c.fraction) for c in results["cells"]]
        put("phase_transition.csv", _csv_text(PT_COLUMNS, rows))
        put_json("empirical_lines.json", results["lines"])
    elif command == "radar-demo":
        demo = results["demo"]
        put_json("scene.json", demo.scene.to_json())
        put_json("radar_demo.json", {"outcomes": [o.summary() for o in demo.outcomes]})
        for o in demo.outcomes:
            tag = _snr_tag(o.snr_db)
            if o.ambiguity is not None:
                path = out / f"ambiguity_snr_{tag}.csv"
                o.ambiguity.to_csv(path, demo.config.probe)
                written.append(path)
            elif o.solution is not None:
                put_json(f"recovered_snr_{tag}.json",
                         devectorize(o.solution, REPORT_THRESHOLD).to_json())
    elif command == "classical-compare":
        res = results["comparison"]
        put_json("scene.json", res.scene.to_json())
        put_json("classical_compare.json", res.summary())
    elif command == "properties":
        put_json("properties.json", results["report"])
    elif command == "bounds":
        put("bounds.csv", _csv_text(BOUNDS_COLUMNS, [asdict(results["bounds"])]))
    else:
        raise ValueError(f"unknown command {command!r}")
    return written


def run_experiment(cfg: RunConfig) -> tuple[dict, bool]:
    """Run the experiment; returns (results, ok)."""
    exp = _experiment_config(cfg)
    p = cfg.parameters
    if cfg.command == "phase-transition":
        cells = harness.run_phase_transition(exp)
        return {"cells": cells, "lines": harness.empirical_lines(exp.primes)}, True
    if cfg.command == "radar-demo":
        demo = harness.run_radar_demo(exp)
        return {"demo": demo}, all(o.failure is None for o in demo.outcomes)
    if cfg.command == "classical-compare":
        res = harness.run_classical_l1_failure(p["n"], p["k"], p["width"], cfg.base_seed)
        return {"comparison": res}, True
    if cfg.command == "properties":
        probe = harness.make_probe(p["probe"], p["n"], cfg.base_seed, p["width"])
        report = verify_mub_properties(build_dictionary(probe), p["tol"])
        return {"report": dict(report.as_dict(), probe=p["probe"])}, True
    if cfg.command == "bounds":
        return {"bounds": bounds.bound_report(p["n"], p["eps"], p["t"])}, True
    raise ValueError(f"unknown command {cfg.command!r}")


def execute(cfg: RunConfig) -> int:
    try:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(cfg.to_json())
        results, ok = run_experiment(cfg)
        write_outputs(cfg.command, results, out)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"csradar: error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
