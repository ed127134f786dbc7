from dataclasses import replace

import numpy as np
import pytest

from mtdgame.game import ConfigError, GameConfig, MarkovGame, State, build_game, restrict_game
from mtdgame.matrix_game import pure_minimax, solve_matrix_game
from mtdgame.scenarios import ScenarioSpec, generate_scenario
from mtdgame.solver import (
    bellman_residual,
    best_response_value,
    evaluate_policies,
    is_monotone,
    pure_attacker_policies,
    q_matrix,
    shapley_backup,
    solve_exact,
    solve_monotone,
    solve_pure,
)

from oracles import fixpoint_values, linprog_value, scalar_q

CFG = GameConfig(gamma=0.9, epsilon=1e-6)


def _zero(game):
    return np.zeros(game.n_states)


def test_terminal_q_matrix(paper_game):
    goal = paper_game.index("FTP:root")
    V = np.arange(paper_game.n_states, dtype=float)
    assert q_matrix(paper_game, goal, V).tolist() == [[0.9 * V[goal]]]
    assert q_matrix(paper_game, goal, _zero(paper_game)).tolist() == [[0.0]]


def test_q_with_zero_values_is_the_one_shot_table(paper_game):
    g = paper_game
    np.testing.assert_array_equal(q_matrix(g, g.index("LDAP:user"), _zero(g)), [[0, 0.5], [5, -5]])
    np.testing.assert_array_equal(q_matrix(g, g.index("Web:root"), _zero(g)), [[0, 0.5], [10, -10]])


def test_q_hand_evaluation(paper, paper_game):
    g = paper_game
    V = _zero(g)
    V[g.index("FTP:root")] = 10.0
    s = g.index("Web:root")
    Q = q_matrix(g, s, V)
    # 10 + 0.9 * (0.66 * 10 + 0.34 * 0)
    assert Q[1, 0] == pytest.approx(15.94, abs=1e-12)
    graph, cat = paper
    Vd = dict(zip(g.state_ids, V))
    cols = [None, "exploit-FTP"]
    for i, a in enumerate(cols):
        for j, b in enumerate(cols):
            assert Q[i, j] == pytest.approx(scalar_q(graph, cat, CFG, "Web:root", a, b, Vd), abs=1e-12)


def test_q_matches_scalar_oracle_everywhere(paper, paper_game):
    graph, cat = paper
    rng = np.random.default_rng(1)
    V = rng.uniform(-5, 5, paper_game.n_states)
    Vd = dict(zip(paper_game.state_ids, V))
    for s, st in enumerate(paper_game.states):
        if st.terminal:
            continue
        acts = [None] + graph.enabled_exploits(st.id)
        expected = [[scalar_q(graph, cat, CFG, st.id, a, b, Vd) for b in acts] for a in acts]
        np.testing.assert_allclose(q_matrix(paper_game, s, V), expected, atol=1e-12)


def test_first_backup_from_zero(paper_game):
    g = paper_game
    V1, pa, pd = shapley_backup(g, _zero(g))
    assert V1[g.index("Web:root")] == pytest.approx(10 / 41, abs=1e-12)
    assert V1[g.index("LDAP:user")] == pytest.approx(5 / 21, abs=1e-12)
    assert V1[g.index("FTP:root")] == 0.0
    for x in pa + pd:
        assert x.sum() == pytest.approx(1.0, abs=1e-9)


def test_zero_reward_game_is_a_fixed_point(paper):
    g, cat = paper
    cat = {k: replace(v, cia=0.0) for k, v in cat.items()}
    game = build_game(g, cat, GameConfig(monitor_cost=0.0))
    V1, _, _ = shapley_backup(game, _zero(game))
    assert V1.tolist() == [0.0] * game.n_states
    sol = solve_exact(game, CFG)
    assert sol.iterations == 1 and sol.values.tolist() == [0.0] * game.n_states


@pytest.mark.parametrize("mode", ["exact", "pure"])
def test_backup_is_a_contraction(paper_game, mode):
    rng = np.random.default_rng(7)
    for _ in range(100):
        V, W = rng.uniform(-20, 20, (2, paper_game.n_states))
        BV = shapley_backup(paper_game, V, mode)[0]
        BW = shapley_backup(paper_game, W, mode)[0]
        assert np.abs(BV - BW).max() <= 0.9 * np.abs(V - W).max() + 1e-9


def test_exact_solve_matches_independent_oracle(paper, paper_game):
    sol = solve_exact(paper_game, CFG)
    assert sol.converged and sol.iterations < 1000
    assert sol.value_of("FTP:root") == 0.0
    oracle = fixpoint_values(*paper, CFG)
    for sid in paper_game.state_ids:
        assert sol.value_of(sid) == pytest.approx(oracle[sid], abs=1e-4)


def test_exact_solve_on_generated_scenario_matches_oracle():
    graph, cat = generate_scenario(ScenarioSpec(seed=11, n_vms=3, n_vulns=12, n_layers=3))
    game = build_game(graph, cat, CFG)
    sol = solve_exact(game, CFG)
    oracle = fixpoint_values(graph, cat, CFG)
    for sid in game.state_ids:
        assert sol.value_of(sid) == pytest.approx(oracle[sid], abs=1e-4)


def test_policies_are_distributions(paper_game):
    sol = solve_exact(paper_game, CFG)
    for x, a in zip(sol.attacker_policy, paper_game.attacker_actions):
        assert len(x) == len(a) and x.sum() == pytest.approx(1.0, abs=1e-9)
    for y, a in zip(sol.defender_policy, paper_game.defender_actions):
        assert len(y) == len(a) and y.sum() == pytest.approx(1.0, abs=1e-9)


def test_exact_rejects_undiscounted(paper_game):
    with pytest.raises(ConfigError, match="discount must be < 1"):
        solve_exact(paper_game, GameConfig(gamma=1.0))
    with pytest.raises(ConfigError):
        solve_pure(paper_game, GameConfig(gamma=1.0))


def _idle_game():
    """One non-terminal state where only the defender has a (monitoring) choice."""
    R = np.array([[0.0, 0.5]])
    T = np.ones((1, 2, 1))
    for a in (R, T):
        a.setflags(write=False)
    return MarkovGame(
        states=(State("s", False, 0),),
        attacker_actions=(("no-act",),),
        defender_actions=(("no-mon", "mon:x"),),
        exploit_vulns=((None,),),
        rewards=(R,),
        transitions=(T,),
        gamma=0.9,
        initial=0,
    )


def test_idle_game_value_is_zero():
    sol = solve_exact(_idle_game(), CFG)
    assert sol.values.tolist() == [0.0]
    assert sol.defender_policy[0].tolist() == [1.0, 0.0]


def test_fully_patched_game_is_worth_nothing(paper_game):
    r = restrict_game(paper_game, paper_game.vuln_keys())
    assert solve_exact(r, CFG).values.tolist() == [0.0] * r.n_states


def test_pure_on_terminal_only_game(paper_game):
    goal = paper_game.index("FTP:root")
    tiny = MarkovGame(
        states=(paper_game.states[goal],),
        attacker_actions=(("no-act",),),
        defender_actions=(("no-mon",),),
        exploit_vulns=((None,),),
        rewards=(np.zeros((1, 1)),),
        transitions=(np.ones((1, 1, 1)),),
        gamma=0.9,
        initial=0,
    )
    assert solve_pure(tiny, CFG).values.tolist() == [0.0]


def test_pure_backup_below_mixed(paper_game):
    g = paper_game
    s1 = g.index("Web:root")
    pure = shapley_backup(g, _zero(g), "pure")[0]
    mixed = shapley_backup(g, _zero(g), "exact")[0]
    assert pure[s1] == 0.0
    assert mixed[s1] == pytest.approx(10 / 41)
    assert np.all(pure <= mixed + 1e-12)


def test_pure_solution_is_deterministic(paper_game):
    sol = solve_pure(paper_game, CFG)
    assert sol.mode == "pure"
    for x in sol.attacker_policy:
        assert sorted(x.tolist())[-1] == 1.0 and x.sum() == 1.0


def test_residual_of_converged_solution(paper_game):
    sol = solve_exact(paper_game, CFG)
    assert bellman_residual(paper_game, sol) <= CFG.epsilon


def test_residual_at_zero_is_largest_one_shot_value(paper_game):
    g = paper_game
    zero = replace(solve_exact(g, CFG), values=_zero(g))
    one_shot = [
        linprog_value(g.rewards[s]) if not st.terminal else 0.0 for s, st in enumerate(g.states)
    ]
    assert bellman_residual(g, zero) == pytest.approx(max(one_shot), abs=1e-9)


def test_residual_detects_perturbation(paper_game):
    sol = solve_exact(paper_game, CFG)
    for s, st in enumerate(paper_game.states):
        if st.terminal:
            continue
        V = np.array(sol.values)
        V[s] += 1.0
        assert bellman_residual(paper_game, replace(sol, values=V)) >= (1 - 0.9) - CFG.epsilon


def test_defender_policy_caps_every_attacker_response(paper_game):
    sol = solve_exact(paper_game, CFG)
    for policy in pure_attacker_policies(paper_game):
        v = evaluate_policies(paper_game, policy, sol.defender_policy)
        assert np.all(v <= sol.values + 1e-4)
    br = best_response_value(paper_game, sol.defender_policy, CFG)
    assert np.all(br <= sol.values + 1e-4)


def test_thread_count_does_not_change_results():
    game = build_game(*generate_scenario(ScenarioSpec(seed=2, n_vulns=40)))
    a = solve_exact(game, CFG, workers=1)
    b = solve_exact(game, CFG, workers=4)
    assert a.values.tobytes() == b.values.tobytes()
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.attacker_policy, b.attacker_policy))
    assert a.iterations == b.iterations


def test_fixed_iteration_count(paper_game):
    sol = solve_exact(paper_game, GameConfig(epsilon=0.0, max_iters=5))
    assert sol.iterations == 5 and sol.converged


def test_non_convergence_is_flagged(paper_game):
    sol = solve_exact(paper_game, GameConfig(epsilon=1e-6, max_iters=3))
    assert sol.iterations == 3 and not sol.converged


@pytest.mark.parametrize("seed", range(4))
def test_monotone_solver_agrees_with_value_iteration(seed):
    game = build_game(*generate_scenario(ScenarioSpec(seed=seed, n_vulns=40)))
    assert is_monotone(game)
    fast = solve_monotone(game, CFG)
    tight = solve_exact(game, GameConfig(epsilon=1e-11))
    np.testing.assert_allclose(fast.values, tight.values, atol=1e-8)
    assert fast.residual <= 1e-9


def test_monotone_solver_partial_update(paper_game):
    base = solve_monotone(paper_game, CFG)
    reduced = restrict_game(paper_game, {"ftp-rce"})
    fresh = solve_monotone(reduced, CFG)
    stale = {reduced.index(s) for s in ("LDAP:user", "LDAP:root", "Web:root")}
    partial = solve_monotone(reduced, CFG, known=base, stale=stale)
    np.testing.assert_allclose(partial.values, fresh.values, atol=1e-12)


def test_pure_value_never_above_mixed_value_per_state(paper_game):
    rng = np.random.default_rng(3)
    for _ in range(50):
        V = rng.uniform(0, 30, paper_game.n_states)
        for s in range(paper_game.n_states):
            Q = q_matrix(paper_game, s, V)
            assert pure_minimax(Q)[0] <= solve_matrix_game(Q).value + 1e-9
