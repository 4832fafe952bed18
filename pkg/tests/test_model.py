import math

import numpy as np
import pytest

from conftest import prob_output
from dada.core.errors import ArtifactError, ShapeError, ValidationError
from dada.models import (
    domain_pred_shares, domain_pred_vector, forward, get_degenerate_events, glorot_bound, init_network,
    load_checkpoint, predict_category, save_checkpoint,
)


def test_conditional_probabilities():
    p = prob_output([[0.2, 0.3, 0.5]])
    assert p.p_bar.data[0] == pytest.approx([0.4, 0.6, 0.0])
    assert p.p_domain.data[0, 0] == pytest.approx(0.5)


def test_domain_pred_vector():
    p = prob_output([[0.2, 0.3, 0.5]])
    vector = domain_pred_vector(p, 1).data[0]
    assert vector == pytest.approx([0.285714, 0.0, 0.714286], abs=1e-6)
    assert vector.sum() == pytest.approx(1.0)


def test_domain_pred_shares_match_per_class_vectors():
    p = prob_output([[0.2, 0.3, 0.5], [0.6, 0.1, 0.3]])
    category_share, domain_share = domain_pred_shares(p)
    for k in (1, 2):
        vector = domain_pred_vector(p, k).data
        assert category_share.data[:, k - 1] == pytest.approx(vector[:, k - 1])
        assert domain_share.data[:, k - 1] == pytest.approx(vector[:, 2])


def test_domain_pred_vector_rejects_bad_index():
    p = prob_output([[0.2, 0.3, 0.5]])
    with pytest.raises(ValidationError):
        domain_pred_vector(p, 3)


def test_degenerate_denominator_is_counted():
    p = prob_output([[1.0 - 2e-13, 1e-13, 1e-13]])
    vector = domain_pred_vector(p, 2).data
    assert np.all(np.isfinite(vector))
    assert get_degenerate_events()["domain_pred_vector"] == 1


def test_forward_with_zero_weights_is_uniform():
    net = init_network([2, 4], K=3, seed=0)
    for tensor in net.parameters():
        tensor.data[...] = 0.0
    p = forward(net, np.ones((5, 2)))
    assert p.p.data == pytest.approx(np.full((5, 4), 0.25))
    assert p.p_bar.data[:, :3] == pytest.approx(np.full((5, 3), 1 / 3))


def test_forward_rows_are_distributions(rng):
    net = init_network([2, 8, 8], K=2, seed=1)
    p = forward(net, rng.normal(size=(20, 2)))
    assert p.p.data.sum(axis=1) == pytest.approx(np.ones(20))
    assert p.p_bar.data.sum(axis=1) == pytest.approx(np.ones(20))
    assert np.all(p.p_bar.data[:, 2] == 0.0)


def test_forward_rejects_wrong_feature_count():
    net = init_network([3, 4], K=2)
    with pytest.raises(ShapeError):
        forward(net, np.zeros((2, 2)))


def test_predict_category_breaks_ties_low():
    p = prob_output([[0.25, 0.25, 0.5], [0.1, 0.6, 0.3]])
    assert predict_category(p).tolist() == [1, 2]


def test_init_shapes_and_bounds():
    net = init_network([6, 6], K=2, seed=0)
    weight, bias = net.G_layers[0]
    assert glorot_bound(3, 3) == pytest.approx(1.0)
    assert glorot_bound(6, 6) == pytest.approx(math.sqrt(0.5))
    assert np.all(np.abs(weight.data) <= math.sqrt(0.5))
    assert np.all(bias.data == 0.0)
    assert net.F_layer[0].shape == (6, 3)
    assert net.dims == [6, 6]
    assert list(net.named_parameters()) == ["G.0.weight", "G.0.bias", "F.weight", "F.bias"]


def test_init_is_seeded():
    first = init_network([2, 5], K=2, seed=9)
    second = init_network([2, 5], K=2, seed=9)
    for a, b in zip(first.parameters(), second.parameters()):
        assert np.array_equal(a.data, b.data)


@pytest.mark.parametrize("dims, K", [([], 2), ([2, 0], 2), ([2, 4], 0)])
def test_init_rejects_bad_sizes(dims, K):
    with pytest.raises(ValidationError):
        init_network(dims, K)


def test_checkpoint_round_trip(tmp_path):
    net = init_network([2, 8, 4], K=3, seed=2)
    path = save_checkpoint(net, tmp_path / "ckpt" / "model.npz")
    loaded = load_checkpoint(path)
    assert loaded.K == 3
    assert loaded.dims == [2, 8, 4]
    for name, tensor in net.named_parameters().items():
        assert np.array_equal(loaded.named_parameters()[name].data, tensor.data)


def test_checkpoint_missing_file(tmp_path):
    with pytest.raises(ArtifactError):
        load_checkpoint(tmp_path / "absent.npz")


def test_checkpoint_wrong_version(tmp_path):
    path = tmp_path / "old.npz"
    np.savez(path, __format_version__=np.array(99), __K__=np.array(2))
    with pytest.raises(ArtifactError, match="format version"):
        load_checkpoint(path)


def test_checkpoint_without_category_count(tmp_path):
    net = init_network([2, 4], K=2, seed=0)
    arrays = {name: tensor.data for name, tensor in net.named_parameters().items()}
    path = tmp_path / "no_k.npz"
    np.savez(path, __format_version__=np.array(1), **arrays)
    with pytest.raises(ArtifactError, match="__K__"):
        load_checkpoint(path)
