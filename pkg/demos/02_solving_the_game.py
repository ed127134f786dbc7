"""
Solving the Markov game
=======================

Shapley value iteration solves a matrix game at every state on every sweep.
The pure-strategy variant keeps only deterministic saddle points and ends up
far more pessimistic about what the attacker can get.
"""

import numpy as np

from mtdgame import GameConfig, build_game, paper_fixture, solve_exact, solve_pure
from mtdgame.solver import bellman_residual

cfg = GameConfig(gamma=0.9, epsilon=1e-6)
game = build_game(*paper_fixture(), cfg)

exact = solve_exact(game, cfg)
pure = solve_pure(game, cfg)
print(f"exact: {exact.iterations} iterations, residual {bellman_residual(game, exact):.2e}")
print(f"pure:  {pure.iterations} iterations")

print(f"\n{'state':10s} {'mixed':>8s} {'pure':>8s}")
for sid in game.state_ids:
    print(f"{sid:10s} {exact.value_of(sid):8.4f} {pure.value_of(sid):8.4f}")

# Out of LDAP root the defender splits its attention between both exploits.
s = game.index("LDAP:root")
for action, p in zip(game.defender_actions[s], exact.defender_policy[s]):
    print(f"  {action:18s} {p:.4f}")

# A larger discount makes the future count for more.
for gamma in (0.5, 0.8, 0.9, 0.95):
    c = GameConfig(gamma=gamma)
    v = solve_exact(build_game(*paper_fixture(), c), c).value_of("LDAP:user")
    print(f"gamma={gamma:.2f}  V(LDAP:user)={v:.4f}")
