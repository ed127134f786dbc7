"""Compile an attack graph and a vulnerability catalog into a zero-sum Markov game.

States are the privilege and goal nodes. At each state the attacker may
idle (``no-act``) or try any exploit the privilege enables (``exp:<id>``);
the defender may idle (``no-mon``) or monitor one of those exploits
(``mon:<id>``). Defender columns are aligned with attacker rows: column
``j >= 1`` monitors the exploit of row ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .attack_graph import AttackGraph, NodeKind, validate_graph
from .catalog import DEFAULT_AC_MAP, AccessComplexity, Catalog, ac_to_probability, check_ac_map

NO_ACT = "no-act"
NO_MON = "no-mon"


class GameError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    gamma: float = 0.9
    p_detect: float = 0.95
    monitor_cost: float = 0.5
    ac_map: Mapping[AccessComplexity, float] = field(default_factory=lambda: dict(DEFAULT_AC_MAP))
    epsilon: float = 1e-6
    max_iters: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 <= self.p_detect <= 1.0:
            raise ConfigError(f"p_detect must be in [0, 1], got {self.p_detect}")
        if not self.monitor_cost >= 0.0:
            raise ConfigError(f"monitor_cost must be >= 0, got {self.monitor_cost}")
        # epsilon == 0 selects a fixed iteration count (max_iters backups)
        if not self.epsilon >= 0.0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if not (isinstance(self.max_iters, int) and self.max_iters > 0):
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters}")
        try:
            check_ac_map(self.ac_map)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class State:
    id: str
    terminal: bool
    rank: int


@dataclass(frozen=True, eq=False)
class MarkovGame:
    """Finite zero-sum Markov game; rewards are the attacker's payoff.

    ``rewards[s]`` has shape ``(|A1(s)|, |A2(s)|)`` and ``transitions[s]``
    shape ``(|A1(s)|, |A2(s)|, |S|)``. ``exploit_vulns[s][i]`` is the
    catalog key behind attacker row ``i`` (``None`` for ``no-act``).
    """

    states: tuple[State, ...]
    attacker_actions: tuple[tuple[str, ...], ...]
    defender_actions: tuple[tuple[str, ...], ...]
    exploit_vulns: tuple[tuple[str | None, ...], ...]
    rewards: tuple[np.ndarray, ...]
    transitions: tuple[np.ndarray, ...]
    gamma: float
    initial: int

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def state_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.states)

    def index(self, state_id: str) -> int:
        for i, s in enumerate(self.states):
            if s.id == state_id:
                return i
        raise KeyError(f"unknown state {state_id!r}")

    def vuln_keys(self) -> set[str]:
        return {k for row in self.exploit_vulns for k in row if k is not None}

    def _cell(self, state_id: str, a1: str, a2: str) -> tuple[int, int, int]:
        s = self.index(state_id)
        try:
            return s, self.attacker_actions[s].index(a1), self.defender_actions[s].index(a2)
        except ValueError:
            raise KeyError(f"action pair ({a1}, {a2}) not available at {state_id}") from None

    def reward(self, state_id: str, a1: str, a2: str) -> float:
        s, i, j = self._cell(state_id, a1, a2)
        return float(self.rewards[s][i, j])

    def transition(self, state_id: str, a1: str, a2: str) -> dict[str, float]:
        s, i, j = self._cell(state_id, a1, a2)
        row = self.transitions[s][i, j]
        return {self.states[k].id: float(p) for k, p in enumerate(row) if p > 0.0}

    def same_as(self, other: MarkovGame) -> bool:
        """Structural and numeric equality (bit-exact arrays)."""
        return (
            self.states == other.states
            and self.attacker_actions == other.attacker_actions
            and self.defender_actions == other.defender_actions
            and self.exploit_vulns == other.exploit_vulns
            and self.gamma == other.gamma
            and self.initial == other.initial
            and all(np.array_equal(a, b) for a, b in zip(self.rewards, other.rewards))
            and all(np.array_equal(a, b) for a, b in zip(self.transitions, other.transitions))
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_game(g: AttackGraph, cat: Catalog, cfg: GameConfig | None = None) -> MarkovGame:
    cfg = cfg or GameConfig()
    report = validate_graph(g)
    if not report.ok:
        raise GameError(f"attack graph does not validate: {report}")
    for ex in g.exploits():
        if ex.vuln_ref not in cat:
            raise GameError(f"exploit {ex.id} references unknown vulnerability {ex.vuln_ref!r}")

    ranks = g.privilege_ranks()
    privs = g.nodes_of(NodeKind.PRIVILEGE, NodeKind.GOAL)
    ordered = sorted(privs, key=lambda n: (ranks[n.id], n.id))
    states = tuple(State(n.id, n.kind is NodeKind.GOAL, ranks[n.id]) for n in ordered)
    pos = {s.id: k for k, s in enumerate(states)}
    S = len(states)

    A1, A2, vulns, R, T = [], [], [], [], []
    for k, st in enumerate(states):
        exploits = [] if st.terminal else g.enabled_exploits(st.id)
        A1.append((NO_ACT, *(f"exp:{e}" for e in exploits)))
        A2.append((NO_MON, *(f"mon:{e}" for e in exploits)))
        vulns.append((None, *(g.node(e).vuln_ref for e in exploits)))

        m = len(exploits) + 1
        rew = np.zeros((m, m))
        tr = np.zeros((m, m, S))
        tr[:, :, k] = 1.0
        if not st.terminal:
            rew[0, 1:] = cfg.monitor_cost
            for i, e in enumerate(exploits, start=1):
                rec = cat[g.node(e).vuln_ref]
                p = ac_to_probability(rec.ac, cfg.ac_map)
                dest = pos[g.granted_privileges(e)[0]]
                rew[i, :] = rec.cia
                rew[i, i] = -rec.cia
                p_adv = np.full(m, p)
                p_adv[i] = p * (1.0 - cfg.p_detect)
                tr[i, :, :] = 0.0
                tr[i, :, dest] = p_adv
                tr[i, :, k] += 1.0 - p_adv
        R.append(_frozen(rew))
        T.append(_frozen(tr))

    return MarkovGame(
        states=states,
        attacker_actions=tuple(A1),
        defender_actions=tuple(A2),
        exploit_vulns=tuple(vulns),
        rewards=tuple(R),
        transitions=tuple(T),
        gamma=cfg.gamma,
        initial=pos[g.initial],
    )


def restrict_game(game: MarkovGame, patched) -> MarkovGame:
    """Copy of ``game`` with every exploit (and its monitor) of a patched vulnerability removed."""
    patched = set(patched)
    unknown = patched - game.vuln_keys()
    if unknown:
        raise GameError(f"unknown vulnerability keys {sorted(unknown)}")
    if not patched:
        return game

    A1, A2, vulns, R, T = [], [], [], [], []
    for s in range(game.n_states):
        keep = [i for i, v in enumerate(game.exploit_vulns[s]) if v not in patched]
        A1.append(tuple(game.attacker_actions[s][i] for i in keep))
        A2.append(tuple(game.defender_actions[s][i] for i in keep))
        vulns.append(tuple(game.exploit_vulns[s][i] for i in keep))
        idx = np.ix_(keep, keep)
        R.append(_frozen(game.rewards[s][idx].copy()))
        T.append(_frozen(game.transitions[s][idx].copy()))
    return replace(
        game,
        attacker_actions=tuple(A1),
        defender_actions=tuple(A2),
        exploit_vulns=tuple(vulns),
        rewards=tuple(R),
        transitions=tuple(T),
    )
