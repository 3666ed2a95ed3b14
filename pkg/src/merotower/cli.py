"""Command-line front end (batch, non-interactive).

Exit codes: 0 success, 2 usage or parse problem, 3 computation failure.
Sampling commands require a seed, either via --seed or the MEROTOWER_SEED
environment variable; there is no hidden entropy source.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3


class UsageError(Exception):
    pass


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("MEROTOWER_SEED")
    if env is None:
        raise UsageError("a seed is required: pass --seed or set MEROTOWER_SEED")
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"MEROTOWER_SEED is not an integer: {env!r}") from exc


def _load_map(path: str):
    from .maps import RationalMap

    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise UsageError(f"cannot read map file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"map file {path!r} is not valid JSON: {exc}") from exc
    try:
        return RationalMap.from_json(payload)
    except ValueError as exc:
        raise UsageError(f"map file {path!r}: {exc}") from exc


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise UsageError("config file must hold a JSON object")
    return payload


def _parse_m_range(text: str) -> list[int]:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"--m-range expects a:b, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"--m-range bounds out of order: {text!r}")
    return list(range(lo, hi + 1))


def _parse_eps(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise UsageError(f"--eps expects comma-separated numbers, got {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise UsageError("--eps values must be positive")
    return values


# -- commands ----------------------------------------------------------------


def cmd_degrees(args) -> int:
    from .reporting import write_csv

    f = _load_map(args.map)
    seed = _resolve_seed(args.seed)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    seq = f.degree_sequence(args.n)
    rows = []
    prev = 1
    for n, deg in enumerate(seq, start=1):
        rows.append((n, deg, deg / prev))
        prev = deg
    comments = []
    if args.n >= 2:
        comments.append(f"d1_estimate={f.d1_estimate(args.n):.12g}")
    if f.dim_k == 2:
        topo = f.topological_degree(trials=args.trials, seed=seed)
        comments.append(f"topological_degree={topo}")
    if args.out:
        write_csv(Path(args.out), ["n", "degree", "ratio"], rows, comments=comments)
    else:
        print("n,degree,ratio")
        for n, deg, ratio in rows:
            print(f"{n},{deg},{ratio:.12g}")
        for comment in comments:
            print(f"# {comment}")
    return EXIT_OK


def cmd_indeterminacy(args) -> int:
    from .reporting import canonical_json

    f = _load_map(args.map)
    locus = f.indeterminacy_locus()
    text = canonical_json(locus.to_json())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build_system(spec: str):
    from .systems import ExceptionalCircleSystem, PlaneMapSystem, TorusDoublingSystem, TowerShiftSystem

    if spec == "guedj-circle":
        from .blowup import LiftedSelfMap
        from .scenarios import guedj_atlases, guedj_map

        once, _ = guedj_atlases()
        return ExceptionalCircleSystem(LiftedSelfMap(once, guedj_map()))
    if spec == "torus-squaring":
        return TorusDoublingSystem()
    if spec.startswith("tower:"):
        from .maps import RationalMap
        from .tower import identity_tower

        path = spec.split(":", 1)[1]
        try:
            with open(path, "r", encoding="utf-8") as handle:
                payload = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read tower descriptor {path!r}: {exc}") from exc
        kind = payload.get("type")
        if kind != "identity":
            raise UsageError(f"unsupported tower descriptor type {kind!r} (expected 'identity')")
        try:
            depth = int(payload["depth"])
            f = RationalMap.from_json(payload["map"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"tower descriptor {path!r}: {exc}") from exc
        try:
            tower = identity_tower(f, depth)
        except ValueError as exc:
            raise UsageError(f"tower descriptor {path!r}: {exc}") from exc
        return TowerShiftSystem(tower)
    if Path(spec).exists():
        return PlaneMapSystem(_load_map(spec), name=Path(spec).stem)
    raise UsageError(
        f"unknown system {spec!r}: expected a map file, guedj-circle, torus-squaring, or tower:<file>"
    )


def cmd_entropy(args) -> int:
    from .entropy import SATURATION_FRACTION, entropy_report
    from .reporting import entropy_figure, write_csv, write_json

    seed = _resolve_seed(args.seed)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    m_values = _parse_m_range(args.m_range)
    if len(m_values) < 2:
        raise UsageError("--m-range must span at least two values")
    epsilons = _parse_eps(args.eps)
    system = _build_system(args.system)
    points = system.sample_points(args.samples, seed)
    report = entropy_report(system, points, m_values, epsilons, threads=max(1, args.threads))
    warning = any(
        report.counts[eps][max(m_values)] >= SATURATION_FRACTION * report.admissible
        for eps in report.epsilons
    )
    payload = report.to_json()
    payload["saturation_warning"] = warning
    payload["seed"] = seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "entropy.csv", ["m", "epsilon", "separated_count", "discards"], report.rows())
    write_json(out / "entropy.json", payload)
    entropy_figure(out / "entropy.png", [report], f"separated-set growth: {report.system_name}")
    for eps in report.epsilons:
        fit = report.slopes[eps]
        slope = "saturated" if fit.slope is None else f"{fit.slope:.4f}"
        print(f"eps={eps:g}: rate={slope} (m used: {fit.m_used})")
    if warning:
        print("warning: counts at the largest m are sample-limited; rates are lower bounds")
    print(f"wrote {out / 'entropy.csv'}, entropy.json, entropy.png")
    return EXIT_OK


def cmd_demo(args) -> int:
    from .scenarios import (
        GuedjDemoConfig,
        ToyDemoConfig,
        run_guedj_demo,
        run_toy_tower_demo,
    )

    seed = _resolve_seed(args.seed)
    overrides = _load_config(args.config)
    overrides["seed"] = seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.which == "guedj" and args.threads is not None:
        overrides["threads"] = max(1, args.threads)
    try:
        if args.which == "guedj":
            config = GuedjDemoConfig.from_dict(overrides)
            run_guedj_demo(args.out, config)
        else:
            config = ToyDemoConfig.from_dict(overrides)
            run_toy_tower_demo(args.out, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"report bundle written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="merotower",
        description="degree growth, indeterminacy resolution and entropy estimates for plane rational maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrees", help="degree sequence, growth estimate and generic fiber count")
    p.add_argument("map", help="path to a map JSON file")
    p.add_argument("--n", type=int, default=6, help="number of iterates")
    p.add_argument("--trials", type=int, default=5, help="targets for the fiber count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(handler=cmd_degrees)

    p = sub.add_parser("indeterminacy", help="common zeros of the map components")
    p.add_argument("map", help="path to a map JSON file")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(handler=cmd_indeterminacy)

    p = sub.add_parser("entropy", help="separated-set growth rates for a system")
    p.add_argument("system", help="map file, guedj-circle, torus-squaring, or tower:<file>")
    p.add_argument("--m-range", required=True, help="orbit lengths a:b (inclusive)")
    p.add_argument("--eps", required=True, help="comma-separated separation radii")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="worker cap for the per-radius passes")
    p.add_argument("--out", default="merotower-entropy", help="output directory")
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser("demo", help="end-to-end report bundles")
    p.add_argument("which", choices=["guedj", "toy"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None, help="override the sample count")
    p.add_argument("--threads", type=int, default=None, help="worker cap for entropy passes")
    p.add_argument("--config", default=None, help="JSON file of config overrides")
    p.set_defaults(handler=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # computation failures
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
