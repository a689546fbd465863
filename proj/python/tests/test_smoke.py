import json
import math
import pathlib
import random

import pytest

import optbench as ob

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_sgd_step_is_plain_descent():
    cfg = ob.OptimizerConfig(ob.Rule.SGD)
    state = ob.init_state(cfg, 2)
    theta, state = ob.step(cfg, state, [1.0, -2.0], [0.5, 0.25], 0.1)
    assert theta == [1.0 - 0.05, -2.0 - 0.025]
    assert state.step == 1


def test_zero_momentum_matches_sgd():
    rng = random.Random(3)
    sgd, mom = ob.OptimizerConfig(ob.Rule.SGD), ob.OptimizerConfig(ob.Rule.MOMENTUM, gamma=0.0)
    a = b = [rng.uniform(-1, 1) for _ in range(5)]
    sa, sb = ob.init_state(sgd, 5), ob.init_state(mom, 5)
    for _ in range(20):
        g = [rng.uniform(-1, 1) for _ in range(5)]
        a, sa = ob.step(sgd, sa, a, g, 0.05)
        b, sb = ob.step(mom, sb, b, g, 0.05)
    assert a == b


def test_adam_first_step_moves_by_about_lr():
    cfg = ob.OptimizerConfig(ob.Rule.ADAM, beta1=0.9, beta2=0.999, epsilon=1e-8)
    theta, _ = ob.step(cfg, ob.init_state(cfg, 3), [0.0, 0.0, 0.0], [3.0, -0.2, 1e-3], 0.01)
    for x, g in zip(theta, [3.0, -0.2, 1e-3]):
        assert x == pytest.approx(-0.01 * math.copysign(1, g), rel=1e-4)


def test_schedule_values():
    s = ob.Schedule.linear_decay(1.0, 0.01, 0.5, 1000)
    assert s.decay_steps() == 500
    assert s.lr_at(0) == 1.0
    assert s.lr_at(250) == pytest.approx(0.505)
    assert s.lr_at(999) == pytest.approx(0.01)


def test_adam_imitates_momentum():
    mom = ob.OptimizerConfig(ob.Rule.MOMENTUM, gamma=0.9)
    sched = ob.Schedule.constant(0.1, 40)
    cfg, mapped = ob.map_to_general(mom, sched, ob.Rule.ADAM, 1e8)
    assert (cfg.beta1, cfg.beta2, cfg.epsilon) == (0.9, 0.0, 1e8)
    for t in (0, 5, 39):
        assert mapped.lr_at(t) == pytest.approx(1e8 * (1 - 0.9 ** (t + 1)), rel=1e-12)
    d = ob.trajectory_divergence(mom, sched, cfg, mapped, "quadratic", 40)
    assert d["max_rel_deviation"] <= 1e-5
    with pytest.raises(ob.UnsupportedMapping):
        ob.map_to_general(mom, sched, ob.Rule.SGD)


def test_inclusion_checks_pass():
    checks = ob.check_inclusions()
    assert len(checks) == 6
    assert all(c["pass"] for c in checks)


def test_sampler():
    assert [ob.sample_unit(1, i, reference=True)[0] for i in (1, 2, 3)] == [0.5, 0.25, 0.75]
    assert ob.radical_inverse(1, 3) == pytest.approx(1 / 3)
    space = json.loads((CONFIGS / "spaces" / "adam.json").read_text())
    pts = ob.sample_space(json.dumps(space), 4)
    assert len(pts) == 4
    for p in pts:
        d = p["decoded"]
        assert d["lr"] == pytest.approx(d["lr_over_eps"] * d["epsilon"])
        assert 0 <= d["beta1"] < 1


def test_bootstrap_min_of_uniform():
    rng = random.Random(0)
    pool = [rng.random() for _ in range(50)]
    s = ob.bootstrap(50, 10, 200, 1, lambda idx: min(pool[i] for i in idx))
    assert s["p5"] <= s["mean"] <= s["p95"]
    assert 0.0 < s["mean"] < 0.3
    never = ob.bootstrap(10, 2, 50, 1, lambda idx: None)
    assert never["mean"] is None and never["defined_fraction"] == 0.0


def test_run_study_is_reproducible(tmp_path):
    cfg = (CONFIGS / "smoke.json").read_text()
    a = ob.run_study(cfg, tmp_path / "a")
    b = ob.run_study(str(CONFIGS / "smoke.json"), tmp_path / "b", parallelism=3)
    assert a.csv() == b.csv()
    assert (tmp_path / "a" / "trials.jsonl").read_bytes() == (tmp_path / "b" / "trials.jsonl").read_bytes()
    assert a.optimizers() == ["sgd", "momentum", "adam"]
    rows = a.rows()
    assert {r["optimizer"] for r in rows} == {"sgd", "momentum", "adam"}
    assert "ranking:" in a.table()
    assert a.svg().startswith("<svg")
    assert ob.load_result(tmp_path / "a").csv() == a.csv()


def test_errors():
    with pytest.raises(ob.ConfigError):
        ob.validate_study('{"name": 3')
    with pytest.raises(ValueError):
        ob.OptimizerConfig(ob.Rule.MOMENTUM, gamma=-0.5)
    cfg = ob.OptimizerConfig(ob.Rule.SGD)
    with pytest.raises(ob.UsageError):
        ob.step(cfg, ob.init_state(cfg, 2), [1.0], [1.0], 0.1)
    with pytest.raises(ob.DivergenceError):
        ob.step(cfg, ob.init_state(cfg, 1), [1.0], [float("nan")], 0.1)
