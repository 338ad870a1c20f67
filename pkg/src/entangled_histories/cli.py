"""Command-line entry point.

Angles given on the command line are in radians; only the trial-table
file uses degrees.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import ancilla, bounds, measurement
from .histories import HistoryError, ghz_history, render, separable_history, w_history
from .optics import experiment, trials
from .optics.jones import CONVENTIONS, DEFAULT_CONVENTION

DEFAULT_SEED = 20160101


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's output.

    ``seed`` defaults to DEFAULT_SEED; ``tolerances`` may override the
    optimizer's ``xatol`` and ``fatol``."""

    command: str
    seed: int = DEFAULT_SEED
    output_format: str = "human"
    table: str | None = None
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.output_format not in ("human", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        unknown = set(self.tolerances) - set(TOLERANCE_KEYS)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"command", "seed", "output_format", "table", "tolerances", "options"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown RunConfig keys: {sorted(unknown)}")
        return cls(**data)


TOLERANCE_KEYS = ("xatol", "fatol")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _angles(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated radians, got {text!r}")
    if len(values) != 3 or not all(np.isfinite(values)):
        raise argparse.ArgumentTypeError(f"expected three comma-separated radians, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", dest="output_format", choices=("human", "json"), default="human")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help="optimizer tolerance override (xatol, fatol)")

    p = _Parser(prog="entangled-histories", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("ghz", parents=[common], help="correlators and G of a three-time history")
    g.add_argument("--state", choices=("ghz", "w", "separable"), default="ghz")
    g.add_argument("--theta", type=_angles, default=(np.pi / 4,) * 3, help="t1,t2,t3 in radians")
    g.add_argument("--phi", type=_angles, default=(np.pi / 4,) * 3, help="t1,t2,t3 in radians")

    for name, text in (("bounds", "certify all three upper bounds"), ("classical", "certify the classical bound")):
        b = sub.add_parser(name, parents=[common], help=text)
        b.add_argument("--grid-points", type=int, default=21)
        b.add_argument("--starts", type=int, default=8)

    sub.add_parser("ancilla", parents=[common], help="ancilla construction transcript")

    o = sub.add_parser("optics", parents=[common], help="simulate the 32-trial experiment")
    o.add_argument("--table", default=None, help="trial table (tab-separated, degrees)")
    o.add_argument("--photons", type=int, default=None, help="photons per trial; omit for analytic mode")
    o.add_argument("--visibility", type=float, default=1.0)
    o.add_argument("--phase-drift", type=float, default=0.0, help="radians")
    o.add_argument("--dark-rate", type=float, default=0.0)
    o.add_argument("--transmission", type=float, default=1.0)

    v = sub.add_parser("validate-table", parents=[common], help="check wave-plate angles against the stage grammar")
    v.add_argument("--table", default=None)
    v.add_argument("--convention", choices=sorted(CONVENTIONS), default=DEFAULT_CONVENTION)
    return p


def _config(args) -> RunConfig:
    tolerances = {}
    for item in args.tol:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"tolerance override must be KEY=VALUE, got {item!r}")
        tolerances[key.strip()] = float(value)
    skip = ("command", "seed", "output_format", "table", "tol")
    opts = {k: v for k, v in vars(args).items() if k not in skip}
    return RunConfig(args.command, args.seed, args.output_format, getattr(args, "table", None), tolerances, opts)


# -- commands ---------------------------------------------------------------

def cmd_ghz(cfg: RunConfig) -> dict:
    name = cfg.options["state"]
    if name == "ghz":
        state = ghz_history()
    elif name == "w":
        state = w_history()
    else:
        th, ph = cfg.options["theta"], cfg.options["phi"]
        state = separable_history(th[0], ph[0], th[1], ph[1], th[2], ph[2])
    corr = measurement.ghz_correlators(state)
    return {
        "command": "ghz",
        "state": name,
        "history": render(state),
        "correlators": {w: v + 0.0 for w, v in corr.items()},
        "G": measurement.ghz_functional(state) + 0.0,
    }


def _result_dict(name, bound, res: bounds.OptimizationResult, seed) -> dict:
    return {
        "objective": name,
        "bound": bound,
        "achieved": res.best_value,
        "argmax": list(res.argmax),
        "iterations": res.iterations,
        "seed": seed,
    }


def cmd_bounds(cfg: RunConfig, which=("classical", "separable", "partial")) -> dict:
    opts = bounds.OptimizerOptions(
        grid_points=cfg.options["grid_points"], n_starts=cfg.options["starts"], seed=cfg.seed,
        **cfg.tolerances,
    )
    runs = {
        "classical": (bounds.CLASSICAL_BOUND, bounds.maximize_classical_g),
        "separable": (bounds.SEPARABLE_BOUND, bounds.maximize_separable_g),
        "partial": (bounds.PARTIAL_BOUND, bounds.maximize_partial_g),
    }
    results = [_result_dict(n, runs[n][0], runs[n][1](opts), cfg.seed) for n in which]
    return {"command": cfg.command, "results": results}


def cmd_classical(cfg: RunConfig) -> dict:
    return cmd_bounds(cfg, which=("classical",))


def cmd_ancilla(cfg: RunConfig) -> dict:
    transcript = ancilla.run_protocol()
    snapshots = []
    for label, reg in zip(("initial", "t1", "t2", "t3"), transcript.states):
        snapshots.append({"after": label, "amplitudes": [[k, [z.real, z.imag]] for k, z in reg.table()]})
    outcomes = {"000": ancilla.ancilla_ket("000"), "111": ancilla.ancilla_ket("111")}
    outcomes.update({"ghz+": ancilla.ancilla_ket("ghz+"), "ghz-": ancilla.ancilla_ket("ghz-")})
    post = {}
    for name, ket in outcomes.items():
        prob, system = ancilla.postselect_ancillas(transcript.final, ket)
        post[name] = {
            "probability": prob,
            "system": None if system is None else [[z.real, z.imag] for z in system],
            "history": render(ancilla.implied_history(name)),
        }
    return {
        "command": "ancilla",
        "coupling_bases": list(transcript.coupling_bases),
        "snapshots": snapshots,
        "postselection": post,
    }


def cmd_optics(cfg: RunConfig) -> dict:
    o = cfg.options
    table = trials.load_trial_table(cfg.table)
    noise = experiment.NoiseModel(o["visibility"], o["phase_drift"], o["dark_rate"])
    result = experiment.run_ghz_experiment(
        table, photons=o["photons"], noise=noise, seed=cfg.seed, transmission=o["transmission"]
    )
    return {"command": "optics", **result.to_dict()}


def cmd_validate_table(cfg: RunConfig) -> dict:
    table = trials.load_trial_table(cfg.table)
    report = trials.validate_convention(cfg.options["convention"], table)
    return {"command": "validate-table", **report.to_dict()}


COMMANDS = {
    "ghz": cmd_ghz,
    "bounds": cmd_bounds,
    "classical": cmd_classical,
    "ancilla": cmd_ancilla,
    "optics": cmd_optics,
    "validate-table": cmd_validate_table,
}


# -- output -----------------------------------------------------------------

def _human(report: dict) -> str:
    cmd = report["command"]
    lines = []
    if cmd == "ghz":
        lines.append(f"state: {report['state']}   {report['history']}")
        for w, v in report["correlators"].items():
            lines.append(f"<{w}> = {v!r}")
        lines.append(f"G = {report['G']!r}")
    elif cmd in ("bounds", "classical"):
        for r in report["results"]:
            arg = ", ".join(f"{x:.6g}" for x in r["argmax"])
            lines.append(f"{r['objective']:<10} bound {r['bound']!r:<8} achieved {r['achieved']!r}   argmax ({arg})")
        lines.append(f"seed {report['results'][0]['seed']}")
    elif cmd == "ancilla":
        lines.append(f"coupling bases: {' '.join(report['coupling_bases'])}   kets |system ancillas>")
        for snap in report["snapshots"]:
            terms = "  ".join(f"{k}: {re:+.6f}{im:+.6f}j" for k, (re, im) in snap["amplitudes"])
            lines.append(f"{snap['after']:>7}  {terms}")
        for name, p in report["postselection"].items():
            lines.append(f"ancillas {name:<5} probability {p['probability']!r:<22} history {p['history']}")
    elif cmd == "optics":
        n = report["noise"]
        lines.append(
            f"mode {report['mode']}  photons/trial {report['photons_per_trial']}  seed {report['seed']}  "
            f"v={n['visibility']} delta={n['phase_drift']} dark={n['dark_rate']}"
        )
        for c in report["cells"]:
            lines.append(f"  C{c['ijk']}  {c['trial'] or '':<10} counts {c['counts']!r:<24} C {c['C']!r}")
        for w, v in report["correlators"].items():
            lines.append(f"<{w}> = {v['value']!r} +- {v['error']!r}")
        lines.append(f"G = {report['G']['value']!r} +- {report['G']['error']!r}")
    elif cmd == "validate-table":
        lines.append(f"convention {report['convention']}: {report['passed']}/{report['total']} trials pass")
        for g, words in report["inferred_words"].items():
            lines.append(f"  {g}: inferred word(s) {', '.join(words)}")
        for t in report["trials"]:
            bad = [k for k, ok in t["plates"].items() if not ok]
            status = "pass" if t["passed"] else f"FAIL plates {','.join(bad)}"
            lines.append(f"  {t['id']:<9} expected {t['expected_labels']}  inferred {t['inferred']}  {status}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        report = COMMANDS[cfg.command](cfg)
    except (ValueError, HistoryError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {msg}", file=sys.stderr)
        return 2
    if cfg.output_format == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(_human(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
