"""Patch placement under a budget: CIA ranking versus game-guided interdiction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal

from .catalog import Catalog
from .game import GameConfig, MarkovGame, restrict_game
from .solver import EquilibriumSolution, solve_exact, solve_monotone, upstream_states

Strategy = Literal["naive", "strategic"]

_SUPPORT_EPS = 1e-12
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class Placement:
    strategy: str
    coverage_pct: int
    patched: tuple[str, ...]


@dataclass(frozen=True)
class SweepRow:
    coverage_pct: int
    naive_value: float
    strategic_value: float


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    seed: int | None = None
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["coverage_pct,naive_value,strategic_value"]
        for r in self.rows:
            lines.append(f"{r.coverage_pct},{_fmt(r.naive_value)},{_fmt(r.strategic_value)}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"seed": self.seed, "config": self.config, "rows": [asdict(r) for r in self.rows]}


def _fmt(x: float) -> str:
    # keep tiny negative round-off from printing as -0.000000
    return f"{0.0 if abs(x) < 5e-7 else x:.6f}"


def budget_for(coverage_pct: int, total: int) -> int:
    """ceil(coverage_pct / 100 * total) in exact integer arithmetic."""
    if not 0 <= coverage_pct <= 100:
        raise ValueError(f"coverage_pct must be in [0, 100], got {coverage_pct}")
    return -(-coverage_pct * total // 100)


def naive_placement(cat: Catalog, coverage_pct: int) -> Placement:
    """Patch the highest-CIA vulnerabilities; ties go to the smaller key."""
    ranked = sorted(cat.values(), key=lambda r: (-r.cia, r.key))
    budget = budget_for(coverage_pct, len(ranked))
    return Placement("naive", coverage_pct, tuple(r.key for r in ranked[:budget]))


def _support(game: MarkovGame, sol: EquilibriumSolution) -> dict[str, set[int]]:
    """Vulnerability key -> states where the attacker plays one of its exploits."""
    out: dict[str, set[int]] = {}
    for s, x in enumerate(sol.attacker_policy):
        for i, key in enumerate(game.exploit_vulns[s]):
            if key is not None and x[i] > _SUPPORT_EPS:
                out.setdefault(key, set()).add(s)
    return out


def _states_with(game: MarkovGame, key: str) -> set[int]:
    return {s for s, row in enumerate(game.exploit_vulns) if key in row}


def interdiction_order(
    game: MarkovGame, cfg: GameConfig | None, budget: int, workers: int | None = None
) -> list[str]:
    """Greedy patch sequence: each step removes the vulnerability whose patch
    leaves the attacker the lowest equilibrium value at the initial state.

    Candidates are scored by re-solving the restricted game. Two shortcuts
    keep this cheap without changing the scores: only states upstream of the
    patched exploits are re-solved, and a vulnerability the attacker never
    plays in the current equilibrium keeps the current value (its removal
    leaves the equilibrium in place). Ties within 1e-9 go to the smaller key.
    """
    cfg = cfg or GameConfig()
    current_game = game
    current = solve_monotone(game, cfg)
    remaining = sorted(game.vuln_keys())
    order: list[str] = []
    init = game.initial

    for _ in range(min(budget, len(remaining))):
        base = float(current.values[init])
        support = _support(current_game, current)

        def score(key: str):
            if key not in support:
                return base, None
            reduced = restrict_game(current_game, {key})
            stale = upstream_states(reduced, _states_with(current_game, key))
            if init not in stale:
                return base, None
            sol = solve_monotone(reduced, cfg, known=current, stale=stale)
            return float(sol.values[init]), (reduced, sol)

        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scores = list(pool.map(score, remaining))
        else:
            scores = [score(k) for k in remaining]

        best = 0
        for i, (value, _) in enumerate(scores):
            if value < scores[best][0] - _TIE_TOL * max(1.0, abs(scores[best][0])):
                best = i
        key = remaining.pop(best)
        order.append(key)
        if scores[best][1] is not None:
            current_game, current = scores[best][1]
        else:
            current_game = restrict_game(current_game, {key})
            current = solve_monotone(current_game, cfg)
    return order


def strategic_placement(
    game: MarkovGame, cfg: GameConfig | None, coverage_pct: int, workers: int | None = None
) -> Placement:
    budget = budget_for(coverage_pct, len(game.vuln_keys()))
    order = interdiction_order(game, cfg, budget, workers)
    return Placement("strategic", coverage_pct, tuple(order))


def evaluate_placement(
    game: MarkovGame, cfg: GameConfig | None, placement: Placement, workers: int | None = None
) -> float:
    """Attacker's equilibrium value at the initial state once the placement is patched."""
    sol = solve_exact(restrict_game(game, placement.patched), cfg, workers)
    return float(sol.values[game.initial])


def run_sweep(
    game: MarkovGame,
    cat: Catalog,
    cfg: GameConfig | None,
    coverages,
    seed: int | None = None,
    workers: int | None = None,
) -> SweepReport:
    """Evaluate naive and strategic placements at each coverage level."""
    cfg = cfg or GameConfig()
    coverages = [int(c) for c in coverages]
    if not coverages:
        raise ValueError("at least one coverage level is required")
    if any(b <= a for a, b in zip(coverages, coverages[1:])):
        raise ValueError("coverages must be strictly increasing")
    if set(cat) != game.vuln_keys():
        raise ValueError("catalog keys and the game's exploitable vulnerabilities differ")

    total = len(cat)
    # greedy choices are prefix-consistent, so one run serves every budget
    order = interdiction_order(game, cfg, budget_for(coverages[-1], total), workers)
    rows = []
    for pct in coverages:
        naive = naive_placement(cat, pct)
        strategic = Placement("strategic", pct, tuple(order[: budget_for(pct, total)]))
        rows.append(
            SweepRow(
                pct,
                evaluate_placement(game, cfg, naive, workers),
                evaluate_placement(game, cfg, strategic, workers),
            )
        )
    echo = {
        "gamma": cfg.gamma,
        "p_detect": cfg.p_detect,
        "monitor_cost": cfg.monitor_cost,
        "epsilon": cfg.epsilon,
        "max_iters": cfg.max_iters,
        "ac_map": {k.value: v for k, v in cfg.ac_map.items()},
    }
    return SweepReport(tuple(rows), seed, echo)
