import dataclasses

import numpy as np
import pytest

from mcmo.engine import (ReplayBuffer, Trainer, TrainingConfig, actor_update, build_state,
                         critic_update, exploration_sigma, select_action, split_state, train)
from mcmo.nn import IDENTITY, TANH, AdamState, init_network
from mcmo.problem import BoxSpace, EvaluationError, MCMOProblem
from mcmo.scalarization import ReproducedSamples, chebyshev


def test_state_layout():
    s = build_state([0.1], [0.3, 0.7], [-1.0, 2.0])
    assert s.tolist() == [0.1, 0.3, 0.7, -1.0, 2.0]
    c, w, u = split_state(s, 1, 2)
    assert c.tolist() == [0.1] and w.tolist() == [0.3, 0.7] and u.tolist() == [-1.0, 2.0]
    with pytest.raises(ValueError):
        build_state([0.1], [0.5, 0.5], [np.inf, 0.0])


def test_sigma_schedule():
    cfg = TrainingConfig(warmup_episodes=1000)
    assert all(exploration_sigma(e, cfg) == 1.0 for e in (1, 500, 1000))
    assert exploration_sigma(2000, cfg) == pytest.approx(0.1)
    assert exploration_sigma(1500, cfg) == pytest.approx(0.0, abs=1e-15)
    assert all(0.0 <= exploration_sigma(e, cfg) <= 1.0 for e in range(1, 5000, 7))


def test_select_action_bounded(rng):
    actor = init_network((5, 8, 3), TANH, rng)
    for _ in range(50):
        a = select_action(actor, rng.normal(size=5), 5.0, rng)
        assert np.all(np.abs(a) <= 1.0)
    assert np.array_equal(select_action(actor, np.ones(5), 0.0, rng), actor.forward(np.ones(5)))


def test_replay_buffer_grows_and_samples_with_replacement(rng):
    buf = ReplayBuffer(3, 2, 2, capacity=4)
    with pytest.raises(ValueError):
        buf.sample(1, rng)
    for k in range(3):
        buf.add(ReproducedSamples(np.full((5, 3), k), np.zeros((5, 2)), np.full(5, -k),
                                  np.zeros((5, 2))))
    assert len(buf) == 15
    s, a, r = buf.sample(100, rng)
    assert s.shape == (100, 3) and set(np.unique(r)) <= {0.0, -1.0, -2.0}


def test_critic_update_reduces_loss(rng):
    critic = init_network((3, 16, 1), IDENTITY, rng)
    adam = AdamState(critic.n_params, learning_rate=1e-2)
    s, a = rng.normal(size=(64, 2)), rng.normal(size=(64, 1))
    r = s[:, 0] - a[:, 0]
    losses = [critic_update(critic, adam, s, a, r) for _ in range(200)]
    assert losses[-1] < 0.2 * losses[0]


def test_actor_update_increases_critic_value(rng):
    critic = init_network((3, 1), IDENTITY, rng)
    critic.weights[0][:] = [[0.0], [0.0], [1.0]]   # Q = action
    actor = init_network((2, 8, 1), TANH, rng)
    adam = AdamState(actor.n_params, learning_rate=1e-2)
    s = rng.normal(size=(32, 2))
    before = actor_update(actor, adam, critic, s)
    for _ in range(50):
        after = actor_update(actor, adam, critic, s)
    assert after > before
    # the critic is never modified by an actor step
    assert critic.weights[0][2, 0] == 1.0


def test_episode_accounting(kursawe, small_config):
    tr = Trainer(kursawe, small_config)
    for e in range(1, 11):
        tr.run_episode()
        assert kursawe.counter.count == e
        assert len(tr.buffer) == small_config.n_reproduce * e
    cfg = small_config
    assert tr.critic_updates == 10 * cfg.learning_iterations
    assert tr.actor_updates == 10 * (cfg.learning_iterations // cfg.actor_delay)


def test_stored_rewards_recompute_from_state(kursawe, small_config):
    tr = Trainer(kursawe, small_config)
    tr.train(20)
    S, F, R = tr.buffer.states, tr.buffer.objectives, tr.buffer.rewards
    for s, f, r in zip(S, F, R):
        assert r == -chebyshev(f, s[1:3], s[3:5])


def test_utopia_in_stored_state_is_post_update(kursawe, small_config):
    tr = Trainer(kursawe, small_config)
    rec = tr.run_episode()
    last = tr.buffer.states[-1]
    assert np.array_equal(last[3:5], rec.objectives - small_config.tau)


def test_failures_are_flagged_and_learning_continues(small_config):
    calls = {"n": 0}

    def evaluator(x, c):
        calls["n"] += 1
        if calls["n"] % 3 == 0:
            raise EvaluationError("solver crashed")
        return np.array([x[0] ** 2, (x[0] - c[0]) ** 2])

    problem = MCMOProblem(BoxSpace((-1.0,), (1.0,)), BoxSpace((0.0,), (1.0,)), 2, evaluator)
    tr = Trainer(problem, small_config)
    tr.train(12)
    failed = [r for r in tr.records if r.failed]
    assert len(failed) == 4 and problem.counter.count == 12
    assert len(tr.buffer) == 8 * small_config.n_reproduce
    # failed episodes still learn from the non-empty buffer
    assert tr.critic_updates == 12 * small_config.learning_iterations
    assert np.all(np.isnan(failed[0].objectives))


def test_same_seed_same_run(kursawe, small_config):
    a = Trainer(kursawe, small_config)
    a.train(15)
    b = Trainer(kursawe, small_config)
    b.train(15)
    for ra, rb in zip(a.records, b.records):
        assert np.array_equal(ra.decision_raw, rb.decision_raw)
        assert np.array_equal(ra.objectives, rb.objectives)
    assert np.array_equal(a.actor.params, b.actor.params)
    c = Trainer(kursawe, dataclasses.replace(small_config, seed=99))
    c.train(15)
    assert not np.array_equal(a.records[-1].decision_raw, c.records[-1].decision_raw)


def test_prescribed_conditions_restrict_sampling(kursawe, small_config):
    tr = Trainer(kursawe, small_config, conditions=[[0.0], [0.5]])
    tr.train(20)
    assert {float(r.condition_raw[0]) for r in tr.records} <= {0.0, 0.5}
    with pytest.raises(ValueError):
        tr.set_conditions([[2.0]])


def test_train_logs_hv_and_callback_stops(kursawe, small_config):
    tr = train(kursawe, small_config)
    assert len(tr.records) == small_config.episodes
    assert tr.history.episodes == [10, 20, 30]
    assert tr.history.hv_avg[-1] == tr.hv_avg()
    tr2 = Trainer(kursawe, small_config)
    tr2.train(callback=lambda t, rec: t.episode == 5)
    assert tr2.episode == 5


def test_plateau_stop(kursawe, small_config):
    cfg = dataclasses.replace(small_config, episodes=200, stop_on_plateau=True,
                              plateau_window=2, plateau_tol=1.0, log_interval=5)
    tr = train(kursawe, cfg)
    assert tr.episode == 10


def test_policy_outputs_raw_decisions(kursawe, small_config):
    tr = train(kursawe, small_config)
    x = tr.policy([[0.1], [0.7]], [[0.5, 0.5], [0.2, 0.8]])
    assert x.shape == (2, 3)
    assert all(kursawe.decision_space.contains(row) for row in x)


def test_config_round_trip_and_validation():
    cfg = TrainingConfig(hidden=[8, 8], hv_reference=[1, 2])
    again = TrainingConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ValueError):
        TrainingConfig.from_dict({"batchsize": 3})
    with pytest.raises(ValueError):
        TrainingConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainingConfig(tau=-1.0)
    with pytest.raises(ValueError):
        TrainingConfig(hidden=())
