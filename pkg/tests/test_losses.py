import math

import numpy as np
import pytest

from conftest import prob_output
from dada.autodiff import Tensor, check_gradients
from dada.core.errors import DomainError, ValidationError
from dada.models import probabilities_from_logits
from dada.schemas.config import SupervisionSignal
from dada.services.losses import (
    CategoryWeights, category_weights, cross_entropy_bar, cross_entropy_full, grad_signs_source, loss_dann_ca,
    loss_entropy, loss_source_dada, loss_source_dada_p, loss_symmetric_dc, loss_target_F_dada,
    loss_target_F_openset, loss_target_G_dada, source_prob_gradients, supervision_loss,
)

LN2 = math.log(2.0)


def test_source_loss_examples():
    assert loss_source_dada(prob_output([[0.7, 0.1, 0.2]]), np.array([1])).item() == pytest.approx(0.526135, abs=1e-6)
    assert loss_source_dada(prob_output([[0.5, 1e-9, 0.5]]), np.array([1])).item() == pytest.approx(LN2, abs=1e-6)
    assert loss_source_dada(prob_output([[1 - 2e-10, 1e-10, 1e-10]]), np.array([1])).item() == pytest.approx(0.0, abs=1e-8)


def test_source_loss_rejects_bad_labels():
    with pytest.raises(ValidationError):
        loss_source_dada(prob_output([[0.7, 0.1, 0.2]]), np.array([3]))
    with pytest.raises(ValidationError):
        loss_source_dada(prob_output([[0.7, 0.1, 0.2]]), np.array([0]))


def test_target_losses_examples():
    p = prob_output([[0.2, 0.3, 0.5]])
    assert loss_target_F_dada(p).item() == pytest.approx(0.416591, abs=1e-5)
    assert loss_target_G_dada(p).item() == pytest.approx(-1.08960, abs=1e-4)


def test_target_F_single_term():
    assert loss_target_F_dada(prob_output([[0.5, 1e-12, 0.5]])).item() == pytest.approx(LN2, abs=1e-6)


def test_target_G_increases_with_category_mass():
    base = loss_target_G_dada(prob_output([[0.2, 0.3, 0.5]])).item()
    moved = loss_target_G_dada(prob_output([[0.21, 0.3, 0.49]])).item()
    assert moved > base


def test_entropy_examples():
    assert loss_entropy(prob_output([[0.15, 0.15, 0.15, 0.15, 0.4]])).item() == pytest.approx(math.log(4), abs=1e-9)
    assert loss_entropy(prob_output([[0.6, 0.2, 0.2]])).item() == pytest.approx(0.562335, abs=1e-6)
    assert loss_entropy(prob_output([[0.9, 1e-15, 0.1]])).item() == pytest.approx(0.0, abs=1e-9)


def test_dann_ca_terms():
    p_s = prob_output([[0.7, 0.1, 0.2]])
    p_t = prob_output([[0.25, 0.25, 0.5]])
    bundle = loss_dann_ca(p_s, np.array([1]), p_t, lam=0.5)
    assert bundle.components["L_s_F"].item() == pytest.approx(-math.log(0.7))
    assert bundle.components["L_t_F"].item() == pytest.approx(LN2)
    assert bundle.L_G.item() == pytest.approx(math.log(0.7 / 0.8) + 0.5 * math.log(0.5))
    assert set(loss_dann_ca(p_s, np.array([1]), None, lam=1.0).components) == {"L_s_F", "L_s_G"}


def test_symmetric_dc_maximum():
    at_half = loss_symmetric_dc(prob_output([[0.3, 0.2, 0.5]])).item()
    assert at_half == pytest.approx(-LN2)
    assert loss_symmetric_dc(prob_output([[0.05, 0.05, 0.9]])).item() < at_half
    assert loss_symmetric_dc(prob_output([[0.45, 0.05, 0.5]])).item() == pytest.approx(at_half)


def test_category_weights_examples():
    assert category_weights(np.array([[0.2, 0.8], [0.6, 0.4]]), 0.0).c.tolist() == [1.0, 1.0]
    assert category_weights(np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), 1.0).c.tolist() == [1.0, 0.0, 0.0]
    weights = category_weights(np.array([[0.2, 0.4], [0.2, 0.4]]), 0.5)
    assert weights.c == pytest.approx([0.75, 1.0])
    assert weights.c_bar == pytest.approx([0.2, 0.4])


@pytest.mark.parametrize("batch, lam", [(np.zeros((0, 2)), 0.5), (np.ones((2, 2)), 1.5)])
def test_category_weights_errors(batch, lam):
    with pytest.raises(ValidationError):
        category_weights(batch, lam)


def test_weighted_source_loss():
    p = prob_output([[0.7, 0.1, 0.2], [0.3, 0.5, 0.2]])
    y = np.array([1, 2])
    assert loss_source_dada_p(p, y, CategoryWeights.uniform(2)).item() == loss_source_dada(p, y).item()
    assert loss_source_dada_p(p, y, np.zeros(2)).item() == 0.0
    single = prob_output([[0.7, 0.1, 0.2]])
    assert loss_source_dada_p(single, np.array([1]), np.array([0.5, 1.0])).item() == pytest.approx(0.263068, abs=1e-6)
    with pytest.raises(ValidationError):
        loss_source_dada_p(p, y, np.ones(3))


def test_openset_loss():
    p = prob_output([[0.1, 0.3, 0.6]])
    assert loss_target_F_openset(p, 0.1).item() == pytest.approx(0.580140, abs=1e-6)
    for q in (0.0, 0.5, -0.1):
        with pytest.raises(ValidationError):
            loss_target_F_openset(p, q)


def test_openset_loss_approaches_plain_target_term():
    p = prob_output([[0.1, 0.3, 0.6]])
    plain = -math.log(0.6)
    gaps = [abs(loss_target_F_openset(p, q).item() - plain) for q in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_openset_minimizer_ratio():
    q = 0.2
    best, best_value = None, np.inf
    for p_K in np.linspace(0.01, 0.98, 98):
        for p_K1 in np.linspace(0.01, 0.99 - p_K, 60):
            value = -(q * math.log(p_K) + (1 - q) * math.log(p_K1))
            if value < best_value:
                best, best_value = (p_K, p_K1), value
    assert best[0] / best[1] == pytest.approx(q / (1 - q), rel=0.1)


def test_cross_entropy_bar_uses_conditional_probabilities():
    assert cross_entropy_bar(prob_output([[0.2, 0.3, 0.5]]), np.array([2])).item() == pytest.approx(-math.log(0.6))


def test_full_cross_entropy_adds_domain_term():
    p = prob_output([[0.2, 0.3, 0.5]])
    full = cross_entropy_full(p, np.array([2])).item()
    assert full == pytest.approx(-math.log(0.3))
    assert full == pytest.approx(cross_entropy_bar(p, np.array([2])).item() - math.log(0.5))
    assert supervision_loss(p, np.array([2]), SupervisionSignal.BAR).item() == pytest.approx(-math.log(0.6))
    assert supervision_loss(p, np.array([2])).item() == full
    with pytest.raises(ValidationError):
        cross_entropy_full(p, np.array([3]))


def test_grad_sign_examples():
    assert grad_signs_source(0.7, 0.2) == (-1, 1)
    assert grad_signs_source(0.3, 0.2)[1] == -1
    assert grad_signs_source(0.5, 0.5) == (0, 0)
    with pytest.raises(DomainError):
        grad_signs_source(0.7, 0.4)


def test_grad_sign_property(rng):
    draws = rng.dirichlet(np.ones(3), size=10_000)
    p_y, p_K1 = draws[:, 0], draws[:, 2]
    grad_py, grad_pk1 = source_prob_gradients(p_y, p_K1)
    assert np.all(grad_py <= 0)
    assert np.array_equal(np.sign(grad_pk1), np.sign(p_y - 0.5))


def _logits_check(loss_fn, K, rng, draws=20):
    for _ in range(draws):
        logits = Tensor(rng.normal(size=(3, K + 1)))
        result = check_gradients(lambda x: loss_fn(probabilities_from_logits(x, K)), logits, rtol=1e-4, atol=1e-8)
        assert result.passed, result


@pytest.mark.parametrize("loss_fn", [
    lambda p: loss_source_dada(p, np.array([1, 2, 3])),
    lambda p: loss_source_dada_p(p, np.array([1, 2, 3]), np.array([0.5, 1.0, 0.25])),
    loss_target_F_dada,
    loss_target_G_dada,
    loss_entropy,
    loss_symmetric_dc,
    lambda p: loss_target_F_openset(p, 0.1),
    lambda p: cross_entropy_bar(p, np.array([3, 1, 2])),
    lambda p: cross_entropy_full(p, np.array([3, 1, 2])),
])
def test_loss_gradients_match_finite_differences(loss_fn, rng):
    _logits_check(loss_fn, 3, rng)


def test_descent_step_moves_source_probabilities():
    logits = Tensor(np.log(np.array([[0.6, 0.15, 0.25]])), requires_grad=True)
    loss_source_dada(probabilities_from_logits(logits, 2), np.array([1])).backward()
    step = 1.0
    while step > 1e-8:
        moved = probabilities_from_logits(Tensor(logits.data - step * logits.grad), 2).p.data[0]
        if moved[0] > 0.6 and moved[2] < 0.25:
            break
        step /= 2
    assert moved[0] > 0.6 and moved[2] < 0.25
