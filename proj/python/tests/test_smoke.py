import math

import numpy as np
import pytest

import djam


def two_agent_setup():
    net = djam.Network.build(2, 1, [(0, 1, 1.0)])
    losses = [
        djam.QuadraticLoss(np.eye(1), np.array([0.0])),
        djam.QuadraticLoss(np.eye(1), np.array([2.0])),
    ]
    return net, losses


def test_network_basics():
    net = djam.Network.build(3, 1, [(0, 1, 1.0), (1, 2, 2.0)])
    assert net.n == 3 and net.p == 1 and net.num_edges == 2
    assert net.weight(2, 1) == 2.0
    assert net.weight(0, 2) == 0.0
    assert net.agent_weight_sum(1) == 3.0
    with pytest.raises(djam.DjamError):
        djam.Network.build(4, 1, [(0, 1, 1.0), (2, 3, 1.0)])


def test_huber_loss_values():
    loss = djam.HuberFieldLoss(0.0, 1.0, 1.0)
    assert loss.eval(np.array([0.5])) == pytest.approx(0.25)
    assert loss.eval(np.array([3.0])) == pytest.approx(7.0)
    assert loss.grad(np.array([0.5]))[0] == pytest.approx(1.0)
    assert loss.grad(np.array([3.0]))[0] == pytest.approx(4.0)


def test_exact_solve_and_gossip_convergence():
    net, losses = two_agent_setup()
    sol = djam.solve_exact_quadratic(net, losses)
    assert sol.theta_star[0][0] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert sol.theta_star[1][0] == pytest.approx(4.0 / 3.0, abs=1e-12)

    state = djam.init_state(net)
    sched = djam.Schedule.uniform(net, 7)
    trace = djam.run_djam(state, net, losses, sched, 500, sol.theta_star)
    assert trace.rows[-1].v <= 1e-10
    vs = trace.v_series()
    assert all(vs[i + 1] <= vs[i] + 1e-10 for i in range(len(vs) - 1))


def test_run_is_deterministic():
    net, losses = two_agent_setup()
    runs = []
    for _ in range(2):
        state = djam.init_state(net)
        sched = djam.Schedule.uniform(net, 123)
        trace = djam.run_djam(state, net, losses, sched, 50)
        runs.append([(r.round, r.edge_i, r.edge_j) for r in trace.rows])
    assert runs[0] == runs[1]


def test_epoch_boundaries_and_contraction():
    net = djam.Network.build(3, 1, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    seq = [(0, 1), (1, 2), (0, 2), (0, 2), (1, 2), (0, 1)]
    assert djam.epoch_boundaries(seq, net) == [3, 6]

    net2, losses2 = two_agent_setup()
    assert djam.contraction_factor(net2, losses2) == pytest.approx(0.5)


def test_admm_converges():
    net, losses = two_agent_setup()
    sol = djam.solve_exact_quadratic(net, losses)
    state = djam.admm_init(net, losses, 1.0)
    djam.run_admm(state, net, losses, djam.Schedule.uniform(net, 3), 2000)
    assert state.theta[0][0] == pytest.approx(sol.theta_star[0][0], abs=1e-8)
    assert state.theta[1][0] == pytest.approx(sol.theta_star[1][0], abs=1e-8)


def test_experiment_pipeline():
    cfg = djam.ExperimentConfig()
    cfg.n = 8
    cfg.topology_radius = 0.6
    cfg.trials = 2
    cfg.rounds = 3000
    cfg.algorithm = djam.Algorithm.DJAM

    inst1 = djam.generate_instance(cfg)
    inst2 = djam.generate_instance(cfg)
    assert inst1.theta_true == inst2.theta_true
    assert inst1.y == inst2.y

    result = djam.monte_carlo(cfg)
    series = result.series[0].mean_rel_error
    assert len(series) == cfg.rounds
    assert series[-1] < 1e-6
    assert not math.isnan(result.solution.residual)
    assert result.solution.residual <= 1e-13
