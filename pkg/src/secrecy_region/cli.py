"""Config loading, scheme orchestration and CSV output.

Config files are TOML restricted to a flat set of dotted keys::

    p_t = 10.0
    user1.mean_re = [0.0, 0.0]
    user1.mean_im = [0.0, 0.0]          # optional, default zeros
    user1.cov = [[0.2, 0.0], [0.0, 0.0],
                 [0.0, 0.0], [0.04, 0.0]]  # row-major (re, im) pairs
    user2.cov = ...
    schemes = ["statistical-csit", "time-sharing"]

Optional keys and defaults: ``mc_samples = 100000``, ``alpha_grid = 41``,
``epsilon = 1e-3``, ``max_iters = 200``, ``seed = 42``,
``stop_rule = "absolute"``, ``output_path = "results"``,
``emit_raw = false``, ``userK.label``, ``userK.mean_re``/``mean_im``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel_model import ChannelStats, EncodingOrder, Scenario
from .classifier import classify
from .errors import NumericalError, ParseError, SecrecyRegionError, ValidationError
from .optimizer import SCHEMES, build_region, endpoint_wiretap_rate, low_snr_sweep
from .sampling import draw_batches

log = logging.getLogger("secrecy_region")

ALL_SCHEMES = SCHEMES + ("low-snr",)
CSV_COLUMNS = ("scheme", "order", "alpha", "r1_bits", "r2_bits", "r1_stderr", "r2_stderr",
               "b_iterations", "b_residual", "converged")
DEFAULTS = {"mc_samples": 100_000, "alpha_grid": 41, "epsilon": 1e-3, "max_iters": 200, "seed": 42,
            "stop_rule": "absolute", "output_path": "results", "emit_raw": False,
            "schemes": list(ALL_SCHEMES)}
USER_KEYS = ("label", "mean_re", "mean_im", "cov")
KNOWN_KEYS = {"p_t", *DEFAULTS} | {f"user{k}.{f}" for k in (1, 2) for f in USER_KEYS}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    schemes: tuple[str, ...]
    output_path: Path
    emit_raw: bool = False


def _flatten(table, prefix=""):
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        else:
            yield name, value


def _complex_entries(value, key):
    if not isinstance(value, list):
        raise ValidationError(f"{key}: expected a list, got {type(value).__name__}", key)
    out = []
    for i, entry in enumerate(value):
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            out.append(complex(entry))
        elif isinstance(entry, list) and len(entry) == 2 and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry):
            out.append(complex(entry[0], entry[1]))
        else:
            raise ValidationError(f"{key}[{i}]: expected a number or a [re, im] pair, got {entry!r}", key)
    return np.array(out)


def _real_list(value, key):
    if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise ValidationError(f"{key}: expected a list of numbers, got {value!r}", key)
    return np.array(value, dtype=float)


def _user(flat, k):
    prefix = f"user{k}."
    if prefix + "cov" not in flat:
        raise ValidationError(f"missing required key {prefix}cov", prefix + "cov")
    cov = _complex_entries(flat[prefix + "cov"], prefix + "cov")
    n_t = math.isqrt(cov.size)
    if n_t * n_t != cov.size or n_t == 0:
        raise ValidationError(f"{prefix}cov has {cov.size} entries, not a square number", prefix + "cov")
    cov = cov.reshape(n_t, n_t)
    mean = np.zeros(n_t, dtype=complex)
    if prefix + "mean_re" in flat:
        mean = _real_list(flat[prefix + "mean_re"], prefix + "mean_re").astype(complex)
    if prefix + "mean_im" in flat:
        im = _real_list(flat[prefix + "mean_im"], prefix + "mean_im")
        if im.shape != mean.shape:
            raise ValidationError(f"{prefix}mean_im has length {im.size}, mean_re has {mean.size}",
                                  prefix + "mean_im")
        mean = mean + 1j * im
    label = str(flat.get(prefix + "label", f"user{k}"))
    return ChannelStats(mean, cov, label)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    flat = dict(_flatten(table))
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        raise ParseError(f"{source}: unknown key(s) {', '.join(unknown)}", unknown[0])
    if "p_t" not in flat:
        raise ValidationError(f"{source}: missing required key p_t", "p_t")
    opts = {**DEFAULTS, **{k: v for k, v in flat.items() if k in DEFAULTS}}
    schemes = opts["schemes"]
    if not isinstance(schemes, list) or not schemes:
        raise ValidationError(f"{source}: schemes must be a nonempty list", "schemes")
    bad = [s for s in schemes if s not in ALL_SCHEMES]
    if bad:
        raise ValidationError(f"{source}: unknown scheme(s) {bad}; expected {list(ALL_SCHEMES)}", "schemes")
    for key in ("mc_samples", "alpha_grid", "max_iters", "seed"):
        if not isinstance(opts[key], int) or isinstance(opts[key], bool):
            raise ValidationError(f"{source}: {key} must be an integer, got {opts[key]!r}", key)
    try:
        scenario = Scenario(_user(flat, 1), _user(flat, 2), float(flat["p_t"]),
                            mc_samples=opts["mc_samples"], seed=opts["seed"], epsilon=float(opts["epsilon"]),
                            alpha_grid=opts["alpha_grid"], max_iters=opts["max_iters"],
                            stop_rule=opts["stop_rule"])
    except ValidationError as exc:
        raise type(exc)(f"{source}: {exc}", exc.field) from exc
    return RunConfig(scenario, tuple(dict.fromkeys(schemes)), Path(opts["output_path"]),
                     bool(opts["emit_raw"]))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


# -- output ----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return ""
    return f"{float(x):.12g}"


def write_csv(path: Path, points) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in points:
            writer.writerow([p.scheme, p.order, _fmt(p.alpha), _fmt(p.r1), _fmt(p.r2), _fmt(p.r1_stderr),
                             _fmt(p.r2_stderr), _fmt(p.b_iterations), _fmt(p.b_residual), _fmt(p.converged)])


def run(config: RunConfig, out=sys.stdout) -> dict:
    """Classify, then evaluate every requested scheme and write one CSV each.

    ``<scheme>.csv`` holds the frontier; ``<scheme>_raw.csv`` every evaluated
    point when ``emit_raw`` is set. Returns the summary also written to
    ``summary.json``.
    """
    sc = config.scenario
    verdict = classify(sc.user1, sc.user2)
    print(f"verdict: {verdict.verdict.value}", file=out)
    for reason in verdict.reasons:
        print(f"  {reason}", file=out)
    config.output_path.mkdir(parents=True, exist_ok=True)
    summary = {"verdict": verdict.verdict.value, "reasons": list(verdict.reasons),
               "low_snr_indefinite": verdict.low_snr_indefinite, "p_t": sc.total_power,
               "mc_samples": sc.mc_samples, "seed": sc.seed, "schemes": {}}
    batches = None
    for scheme in config.schemes:
        if scheme == "low-snr":
            frontier = raw = low_snr_sweep(sc)
        else:
            if batches is None:
                batches = draw_batches(sc)
            result = build_region(sc, scheme, batches)
            frontier, raw = result.frontier, result.raw_points
        write_csv(config.output_path / f"{scheme}.csv", frontier)
        if config.emit_raw:
            write_csv(config.output_path / f"{scheme}_raw.csv", raw)
        info = {"frontier_points": len(frontier), "max_r1": max(p.r1 for p in raw),
                "max_r2": max(p.r2 for p in raw),
                "unconverged": sum(not p.converged for p in raw)}
        summary["schemes"][scheme] = info
        print(f"{scheme}: {len(frontier)} frontier points, max r1 {info['max_r1']:.4f}, "
              f"max r2 {info['max_r2']:.4f} bits", file=out)
    (config.output_path / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# -- command line ---------------------------------------------------------

def _apply_overrides(config: RunConfig, args) -> RunConfig:
    sc = config.scenario
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.samples is not None:
        sc = replace(sc, mc_samples=args.samples)
    out = Path(args.out) if args.out is not None else config.output_path
    return replace(config, scenario=sc, output_path=out)


def _cmd_validate(config, out):
    sc = config.scenario
    print(f"ok: n_t={sc.n_t}, p_t={sc.total_power:g}, schemes={', '.join(config.schemes)}", file=out)


def _cmd_classify(config, out):
    c = classify(config.scenario.user1, config.scenario.user2)
    print(f"verdict: {c.verdict.value}", file=out)
    print(f"low_snr_indefinite: {c.low_snr_indefinite}", file=out)
    for reason in c.reasons:
        print(f"  {reason}", file=out)


def _cmd_lowsnr(config, out):
    config.output_path.mkdir(parents=True, exist_ok=True)
    path = config.output_path / "low-snr.csv"
    write_csv(path, low_snr_sweep(config.scenario))
    print(f"wrote {path}", file=out)


def _cmd_wiretap(config, out):
    sc = config.scenario
    batches = draw_batches(sc)
    for user in (1, 2):
        w = endpoint_wiretap_rate(sc, user, sc.total_power, batches)
        rate, se = (w.r1, w.r1_stderr) if user == 1 else (w.r2, w.r2_stderr)
        print(f"user{user}: {rate:.12g} bits (stderr {se:.3g}) order {EncodingOrder(user, 3 - user)}",
              file=out)


def _cmd_region(config, out):
    run(config, out)


COMMANDS = {"classify": _cmd_classify, "region": _cmd_region, "lowsnr": _cmd_lowsnr,
            "wiretap": _cmd_wiretap, "validate": _cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secrecy-region",
                                     description="Secrecy rate regions of a two-user fading MISO "
                                                 "broadcast channel with statistical CSIT.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML scenario file")
        p.add_argument("--out", help="output directory (overrides output_path)")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides seed)")
        p.add_argument("--samples", type=int, help="Monte-Carlo samples per user (overrides mc_samples)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _apply_overrides(load_config(args.config), args)
        COMMANDS[args.command](config, sys.stdout)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except SecrecyRegionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
