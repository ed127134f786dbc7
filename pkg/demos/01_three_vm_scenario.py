"""
The three-VM cloud scenario
===========================

An attacker starts with a user shell on the LDAP server and wants root on
the FTP server. We load the built-in scenario, list its attack paths, and
look at the one-shot games the two players face at each privilege.
"""

import numpy as np

from mtdgame import build_game, enumerate_attack_paths, paper_fixture, solve_matrix_game

graph, catalog = paper_fixture()

for rec in catalog.values():
    print(f"{rec.key:9s} {rec.cve}  cia={rec.cia:4.1f}  ac={rec.ac.value}")

# Two ways to the goal: straight from LDAP root, or through the web server.
for path in enumerate_attack_paths(graph, graph.initial, graph.goal):
    print(" -> ".join(path))

# Rows are attacker actions, columns defender monitoring choices.
game = build_game(graph, catalog)
for s, state in enumerate(game.states):
    if state.terminal:
        continue
    R = game.rewards[s]
    sol = solve_matrix_game(R)
    print(f"\n{state.id}")
    print("  attacker:", game.attacker_actions[s])
    print("  defender:", game.defender_actions[s])
    print("  " + np.array2string(R, prefix="  "))
    print(f"  one-shot value {sol.value:.4f}, attacker mix {np.round(sol.row_strategy, 4)}")
