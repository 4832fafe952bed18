from dada.schemas.metrics import MetricsRecord, Phase
from dada.services.diagnostics import (
    alternation_dynamics, gradient_check, identity_audit, run_all, schedule_exactness, sign_property, step_dynamics,
)


def test_gradient_check_passes():
    result = gradient_check(draws=3, seed=1)
    assert result.passed, result.detail
    assert "loss_dann_ca.L_G" in result.metrics


def test_sign_property():
    result = sign_property(n_points=2000, seed=2)
    assert result.passed
    assert result.metrics["max_grad_py"] <= 0


def test_step_dynamics():
    result = step_dynamics(trials=20, seed=3)
    assert result.passed, result.detail


def test_schedule_exactness():
    result = schedule_exactness(points=200)
    assert result.passed
    assert result.metrics["lambda_at_1"] > 0.9999


def test_identity_audit():
    assert identity_audit(draws=10, seed=4).passed


def _rates(*pairs):
    return [
        MetricsRecord(step=index, epoch=index, phase=phase, name="cond_fail_rate", value=value)
        for index, (phase, value) in enumerate(pairs)
    ]


def test_alternation_dynamics_valley_pattern():
    history = _rates(
        (Phase.CLS, 0.2), (Phase.CLS, 0.05), (Phase.ADV, 0.1), (Phase.ADV, 0.3),
        (Phase.CLS, 0.1), (Phase.CLS, 0.02), (Phase.ADV, 0.04),
    )
    result = alternation_dynamics(history)
    assert result.passed
    assert result.metrics["transitions"] == 1.0


def test_alternation_dynamics_rising_rate_fails():
    history = _rates((Phase.ADV, 0.1), (Phase.CLS, 0.3), (Phase.ADV, 0.2), (Phase.CLS, 0.4))
    result = alternation_dynamics(history)
    assert not result.passed
    assert result.metrics["fraction"] == 0.0


def test_alternation_dynamics_without_transitions():
    assert not alternation_dynamics(_rates((Phase.PRETRAIN, 0.1), (Phase.ADV, 0.2))).passed


def test_run_all_names():
    results = run_all(seed=0, draws=2, n_points=100, trials=5, points=50)
    assert [result.name for result in results] == [
        "gradient_check", "sign_property", "step_dynamics", "schedule_exactness", "identity_audit",
        "degenerate_denominators",
    ]
    assert all(result.passed for result in results)
