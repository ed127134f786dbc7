"""Value iteration for the attacker/defender Markov game.

Two backups are available. The exact (Shapley) backup replaces each
state's value with the mixed-strategy value of its Q matrix. The pure
backup restricts the attacker to a single action per state: the value is
the best row minimum of the Q matrix and the defender answers with the
minimizing column.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from typing import Literal

import numpy as np

from .game import ConfigError, GameConfig, MarkovGame
from .matrix_game import pure_minimax, solve_matrix_game

Mode = Literal["exact", "pure"]


@dataclass(frozen=True)
class EquilibriumSolution:
    state_ids: tuple[str, ...]
    values: np.ndarray
    attacker_policy: tuple[np.ndarray, ...]
    defender_policy: tuple[np.ndarray, ...]
    iterations: int
    residual: float
    mode: str
    converged: bool

    def value_of(self, state_id: str) -> float:
        return float(self.values[self.state_ids.index(state_id)])


def q_matrix(game: MarkovGame, s: int, V) -> np.ndarray:
    """Q(s, a1, a2) = R(s, a1, a2) + gamma * sum_s' tau(s, a1, a2, s') V(s')."""
    return game.rewards[s] + game.gamma * (game.transitions[s] @ np.asarray(V, dtype=float))


def _state_backup(game: MarkovGame, s: int, V: np.ndarray, mode: str):
    if game.states[s].terminal:
        return 0.0, np.ones(1), np.ones(1)
    Q = q_matrix(game, s, V)
    if mode == "exact":
        sol = solve_matrix_game(Q)
        return sol.value, sol.row_strategy, sol.col_strategy
    value, row, col = pure_minimax(Q)
    x = np.zeros(Q.shape[0])
    y = np.zeros(Q.shape[1])
    x[row] = 1.0
    y[col] = 1.0
    return value, x, y


def shapley_backup(game: MarkovGame, V, mode: Mode = "exact", workers: int | None = None):
    """One synchronous backup of every state.

    Returns ``(V_next, attacker_policy, defender_policy)``. Terminal states
    are pinned to zero. With ``workers > 1`` states are solved on a thread
    pool; each state reads only ``V`` and writes its own slot, so the result
    does not depend on scheduling.
    """
    if mode not in ("exact", "pure"):
        raise ValueError(f"unknown backup mode {mode!r}")
    V = np.asarray(V, dtype=float)
    states = range(game.n_states)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _state_backup(game, s, V, mode), states))
    else:
        results = [_state_backup(game, s, V, mode) for s in states]
    V_next = np.array([r[0] for r in results], dtype=float)
    return V_next, tuple(r[1] for r in results), tuple(r[2] for r in results)


def _iterate(game: MarkovGame, cfg: GameConfig, mode: Mode, workers: int | None):
    if cfg.gamma >= 1.0:
        raise ConfigError(f"discount must be < 1 for {mode} mode")
    V = np.zeros(game.n_states)
    residual = float("inf")
    it = 0
    converged = False
    while it < cfg.max_iters:
        V_next, pi_a, pi_d = shapley_backup(game, V, mode, workers)
        it += 1
        residual = float(np.max(np.abs(V_next - V))) if game.n_states else 0.0
        V = V_next
        if cfg.epsilon > 0 and residual <= cfg.epsilon:
            converged = True
            break
    else:
        # fixed-k stopping: epsilon == 0 asks for exactly max_iters backups
        converged = cfg.epsilon == 0 or residual <= cfg.epsilon
    V.setflags(write=False)
    return EquilibriumSolution(
        state_ids=game.state_ids,
        values=V,
        attacker_policy=pi_a,
        defender_policy=pi_d,
        iterations=it,
        residual=residual,
        mode=mode,
        converged=converged,
    )


def solve_exact(game: MarkovGame, cfg: GameConfig | None = None, workers: int | None = None):
    """Minimax value iteration from V = 0 with LP-solved state games."""
    return _iterate(game, cfg or GameConfig(), "exact", workers)


def solve_pure(game: MarkovGame, cfg: GameConfig | None = None, workers: int | None = None):
    """Value iteration with the attacker restricted to pure actions."""
    return _iterate(game, cfg or GameConfig(), "pure", workers)


def bellman_residual(game: MarkovGame, solution: EquilibriumSolution) -> float:
    V = np.asarray(solution.values, dtype=float)
    V_next, _, _ = shapley_backup(game, V, solution.mode)
    return float(np.max(np.abs(V_next - V)))


def evaluate_policies(game: MarkovGame, attacker_policy, defender_policy) -> np.ndarray:
    """Exact discounted attacker value of a stationary (mixed) policy pair.

    Solves ``(I - gamma P) v = r`` for the Markov chain the two policies
    induce; terminal states contribute nothing.
    """
    S = game.n_states
    P = np.zeros((S, S))
    r = np.zeros(S)
    for s in range(S):
        if game.states[s].terminal:
            continue
        x = np.asarray(attacker_policy[s], dtype=float)
        y = np.asarray(defender_policy[s], dtype=float)
        r[s] = x @ game.rewards[s] @ y
        P[s] = np.einsum("i,j,ijk->k", x, y, game.transitions[s])
    return np.linalg.solve(np.eye(S) - game.gamma * P, r)


def pure_attacker_policies(game: MarkovGame):
    """Every deterministic attacker policy, as one-hot vectors per state."""
    choices = [range(len(a)) for a in game.attacker_actions]
    for pick in product(*choices):
        yield tuple(np.eye(len(game.attacker_actions[s]))[i] for s, i in enumerate(pick))


def best_response_value(game: MarkovGame, defender_policy, cfg: GameConfig | None = None):
    """Attacker's optimal value against a fixed defender policy.

    The fixed defender turns the game into an MDP for the attacker, solved
    here by value iteration to ``cfg.epsilon``.
    """
    cfg = cfg or GameConfig()
    S = game.n_states
    r = []
    P = []
    for s in range(S):
        y = np.asarray(defender_policy[s], dtype=float)
        r.append(game.rewards[s] @ y)
        P.append(np.einsum("j,ijk->ik", y, game.transitions[s]))
    V = np.zeros(S)
    for _ in range(cfg.max_iters):
        V_next = np.array(
            [0.0 if game.states[s].terminal else float(np.max(r[s] + game.gamma * P[s] @ V)) for s in range(S)]
        )
        done = np.max(np.abs(V_next - V)) <= cfg.epsilon * (1 - game.gamma) / 2
        V = V_next
        if done:
            break
    return V


def is_monotone(game: MarkovGame) -> bool:
    """True when every transition stays put or moves to a later state index."""
    for s in range(game.n_states):
        back = game.transitions[s][:, :, :s]
        if back.size and np.any(back > 0.0):
            return False
    return True


def upstream_states(game: MarkovGame, targets) -> set[int]:
    """``targets`` plus every state with a positive-probability path into them."""
    preds: dict[int, set[int]] = {s: set() for s in range(game.n_states)}
    for s in range(game.n_states):
        reach = np.flatnonzero(game.transitions[s].max(axis=(0, 1)) > 0.0)
        for t in reach:
            if t != s:
                preds[int(t)].add(s)
    out = set(targets)
    stack = list(out)
    while stack:
        t = stack.pop()
        for p in preds[t] - out:
            out.add(p)
            stack.append(p)
    return out


def _state_fixed_point(game: MarkovGame, s: int, V: np.ndarray, tol: float, max_steps: int):
    """Solve v = val(Q_s(v)) for state ``s``, all other entries of ``V`` held fixed.

    ``g(v) = val(Q_s(v)) - v`` is strictly decreasing with slope in
    ``[-1, gamma - 1]``; safeguarded Newton steps use the slope
    ``gamma * x'Py - 1`` from the current saddle point, with bisection
    whenever a step leaves the bracket.
    """
    T = game.transitions[s]
    stay = T[:, :, s]
    others = V.copy()
    others[s] = 0.0
    base = game.rewards[s] + game.gamma * (T @ others)
    bound = float(np.abs(base).max()) / (1.0 - game.gamma) + 1.0
    lo, hi = -bound, bound
    v = float(min(max(V[s], lo), hi))
    steps = 0
    while True:
        steps += 1
        sol = solve_matrix_game(base + game.gamma * v * stay)
        g = sol.value - v
        if abs(g) <= tol * max(1.0, abs(v)) or steps >= max_steps:
            return sol.value, sol, steps
        if g > 0:
            lo = v
        else:
            hi = v
        slope = game.gamma * float(sol.row_strategy @ stay @ sol.col_strategy) - 1.0
        nxt = v - g / slope
        v = nxt if lo < nxt < hi else 0.5 * (lo + hi)


def solve_monotone(
    game: MarkovGame,
    cfg: GameConfig | None = None,
    known: EquilibriumSolution | None = None,
    stale=None,
    tol: float = 1e-12,
) -> EquilibriumSolution:
    """Exact equilibrium of a monotone game by backward induction over states.

    States are solved from the last index to the first, each by a
    one-dimensional fixed-point search on its own self-loop; no global
    value iteration is needed. When ``known`` (a solution of a game with
    the same states) and ``stale`` (state indices whose values may have
    changed) are given, only the stale states are recomputed.
    ``iterations`` counts matrix-game solves.
    """
    cfg = cfg or GameConfig()
    if cfg.gamma >= 1.0:
        raise ConfigError("discount must be < 1 for exact mode")
    if not is_monotone(game):
        raise ValueError("game has transitions to earlier states; use solve_exact")
    S = game.n_states
    if known is not None:
        V = np.array(known.values, dtype=float)
        pi_a = list(known.attacker_policy)
        pi_d = list(known.defender_policy)
        todo = set(range(S)) if stale is None else set(stale)
    else:
        V = np.zeros(S)
        pi_a = [None] * S
        pi_d = [None] * S
        todo = set(range(S))
    solves = 0
    for s in sorted(todo, reverse=True):
        if game.states[s].terminal:
            V[s], pi_a[s], pi_d[s] = 0.0, np.ones(1), np.ones(1)
            continue
        V[s], sol, steps = _state_fixed_point(game, s, V, tol, max_steps=200)
        pi_a[s], pi_d[s] = sol.row_strategy, sol.col_strategy
        solves += steps
    V.setflags(write=False)
    solution = EquilibriumSolution(
        state_ids=game.state_ids,
        values=V,
        attacker_policy=tuple(pi_a),
        defender_policy=tuple(pi_d),
        iterations=solves,
        residual=0.0,
        mode="exact",
        converged=True,
    )
    residual = bellman_residual(game, solution)
    return replace(solution, residual=residual, converged=residual <= max(cfg.epsilon, 1e-9))
