"""Command-line front end.

Exit codes: 0 success, 1 domain failure (violations, non-convergence),
2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attack_graph import (
    GraphParseError,
    GraphValidationError,
    dump_attack_graph,
    enumerate_attack_paths,
    graph_from_dict,
    load_attack_graph,
    validate_graph,
)
from .catalog import CatalogError, dump_catalog, load_catalog, parse_ac_map
from .countermeasure import run_sweep
from .game import ConfigError, GameConfig, GameError, build_game
from .scenarios import ScenarioError, ScenarioSpec, generate_scenario
from .solver import solve_exact, solve_pure

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

_CONFIG_KEYS = {"gamma", "p_detect", "monitor_cost", "ac_map", "epsilon", "max_iters", "mode", "seed", "workers"}


class UsageError(Exception):
    pass


def _fail(msg: str, code: int = EXIT_USAGE) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _read_config(args) -> dict:
    raw: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
    for flag, key in (
        ("gamma", "gamma"),
        ("p_detect", "p_detect"),
        ("monitor_cost", "monitor_cost"),
        ("epsilon", "epsilon"),
        ("max_iters", "max_iters"),
        ("mode", "mode"),
        ("seed", "seed"),
        ("workers", "workers"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    return raw


def _game_config(raw: dict) -> GameConfig:
    kwargs = {k: raw[k] for k in ("gamma", "p_detect", "monitor_cost", "epsilon", "max_iters") if k in raw}
    if "ac_map" in raw:
        try:
            kwargs["ac_map"] = parse_ac_map(raw["ac_map"])
        except (CatalogError, AttributeError, TypeError, ValueError) as exc:
            raise ConfigError(f"ac_map: {exc}") from None
    return GameConfig(**kwargs)


def _load_inputs(args):
    graph = load_attack_graph(args.graph)
    cat = load_catalog(args.catalog)
    return graph, cat


def cmd_validate(args) -> int:
    try:
        data = json.loads(Path(args.graph).read_text(encoding="utf-8"))
        g = graph_from_dict(data)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, GraphParseError) as exc:
        return _fail(f"{args.graph}: {exc}")
    report = validate_graph(g)
    problems = [str(v) for v in report.violations]
    if args.catalog:
        try:
            cat = load_catalog(args.catalog)
        except CatalogError as exc:
            return _fail(str(exc))
        for ex in g.exploits():
            if ex.vuln_ref and ex.vuln_ref not in cat:
                problems.append(f"dangling vulnerability reference: {ex.id} ({ex.vuln_ref})")
    if problems:
        print("\n".join(problems))
        return EXIT_DOMAIN
    print("ok")
    return EXIT_OK


def cmd_paths(args) -> int:
    g = load_attack_graph(args.graph)
    source = args.source or g.initial
    target = args.target or g.goal
    try:
        paths = enumerate_attack_paths(g, source, target)
    except (KeyError, ValueError) as exc:
        return _fail(exc.args[0] if exc.args else str(exc))
    for p in paths:
        print(" -> ".join(p) if p else "(empty path)")
    return EXIT_OK


def _solve(args):
    raw = _read_config(args)
    mode = raw.get("mode", "exact")
    if mode not in ("exact", "pure"):
        raise UsageError(f"unknown mode {mode!r}")
    cfg = _game_config(raw)
    graph, cat = _load_inputs(args)
    game = build_game(graph, cat, cfg)
    solver = solve_exact if mode == "exact" else solve_pure
    return game, solver(game, cfg, raw.get("workers"))


def _policy_dict(game, sol) -> dict:
    out = {}
    for s, st in enumerate(game.states):
        out[st.id] = {
            "attacker": {a: float(p) for a, p in zip(game.attacker_actions[s], sol.attacker_policy[s])},
            "defender": {a: float(p) for a, p in zip(game.defender_actions[s], sol.defender_policy[s])},
        }
    return out


def cmd_solve(args) -> int:
    game, sol = _solve(args)
    initial = game.states[game.initial].id
    report = {
        "mode": sol.mode,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "initial": initial,
        "values": {sid: float(v) for sid, v in zip(sol.state_ids, sol.values)},
        "policies": _policy_dict(game, sol),
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"V*({initial}) = {sol.value_of(initial):.6f}  [{sol.mode}, {sol.iterations} iterations]")
    if not sol.converged:
        print(f"warning: not converged (residual {sol.residual:.3e})", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_policy(args) -> int:
    game, sol = _solve(args)
    for sid, pol in _policy_dict(game, sol).items():
        value = sol.value_of(sid)
        print(f"{sid}  V={value:.6f}")
        for who in ("attacker", "defender"):
            cells = "  ".join(f"{a}={p:.4f}" for a, p in pol[who].items() if p > 0)
            print(f"  {who:9s} {cells}")
    return EXIT_OK if sol.converged else EXIT_DOMAIN


def _parse_coverages(text: str) -> list[int]:
    items = [t for t in (text or "").split(",") if t.strip()]
    if not items:
        raise UsageError("--coverages needs at least one value")
    try:
        return [int(t) for t in items]
    except ValueError:
        raise UsageError(f"bad coverage list {text!r}") from None


def cmd_sweep(args) -> int:
    coverages = _parse_coverages(args.coverages)
    raw = _read_config(args)
    cfg = _game_config(raw)
    graph, cat = _load_inputs(args)
    game = build_game(graph, cat, cfg)
    try:
        report = run_sweep(game, cat, cfg, coverages, seed=raw.get("seed"), workers=raw.get("workers"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = report.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _pair(text: str, n: int, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad {name} {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{name} needs {n} comma-separated numbers")
    return vals


def cmd_gen(args) -> int:
    kwargs = {"seed": args.seed if args.seed is not None else 0}
    for key in ("n_vms", "n_vulns", "n_layers"):
        if getattr(args, key) is not None:
            kwargs[key] = getattr(args, key)
    if args.cia_range:
        kwargs["cia_range"] = _pair(args.cia_range, 2, "--cia-range")
    if args.ac_weights:
        kwargs["ac_weights"] = _pair(args.ac_weights, 3, "--ac-weights")
    g, cat = generate_scenario(ScenarioSpec(**kwargs))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_attack_graph(g, out / "graph.json")
    dump_catalog(cat, out / "catalog.json")
    print(f"wrote {out / 'graph.json'} and {out / 'catalog.json'} ({len(cat)} vulnerabilities)")
    return EXIT_OK


def _add_game_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--config")
    p.add_argument("--gamma", type=float)
    p.add_argument("--p-detect", dest="p_detect", type=float)
    p.add_argument("--monitor-cost", dest="monitor_cost", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--workers", type=int, help="threads for per-state solves")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtdgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an attack graph (and catalog references)")
    p.add_argument("--graph", required=True)
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="list attack paths between two privileges")
    p.add_argument("--graph", required=True)
    p.add_argument("--from", dest="source")
    p.add_argument("--to", dest="target")
    p.set_defaults(func=cmd_paths)

    for name, func, text in (
        ("solve", cmd_solve, "solve the game and write a JSON report"),
        ("policy", cmd_policy, "solve the game and print per-state policies"),
    ):
        p = sub.add_parser(name, help=text)
        _add_game_flags(p)
        p.add_argument("--mode", choices=("exact", "pure"))
        if name == "solve":
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="naive vs strategic patching over coverage levels (CSV)")
    _add_game_flags(p)
    p.add_argument("--coverages", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="generate a seeded scenario (graph.json + catalog.json)")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-vms", dest="n_vms", type=int)
    p.add_argument("--n-vulns", dest="n_vulns", type=int)
    p.add_argument("--n-layers", dest="n_layers", type=int)
    p.add_argument("--cia-range", dest="cia_range")
    p.add_argument("--ac-weights", dest="ac_weights")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphValidationError as exc:
        print(str(exc.report))
        return EXIT_DOMAIN
    except (UsageError, GraphParseError, CatalogError, ConfigError, GameError, ScenarioError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
