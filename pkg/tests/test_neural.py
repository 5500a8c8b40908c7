import numpy as np
import pytest

from isacsim.neural import Adam, DenseNet, soft_update


def finite_diff_param_grads(net, x, loss_weights, h=1e-5):
    """Central-difference dL/dparam for L = sum(forward(x) * loss_weights)."""
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            lp = float(np.sum(net.forward(x) * loss_weights))
            p[idx] = orig - h
            lm = float(np.sum(net.forward(x) * loss_weights))
            p[idx] = orig
            g[idx] = (lp - lm) / (2.0 * h)
        grads.append(g)
    return grads


def relative_error(a, b):
    denom = np.maximum(np.abs(a) + np.abs(b), 1e-8)
    return np.abs(a - b) / denom


@pytest.mark.parametrize("act", ["linear", "tanh"])
def test_parameter_gradients_match_finite_differences(act):
    rng = np.random.default_rng(0)
    net = DenseNet([5, 7, 4], output_activation=act, rng=rng)
    x = rng.standard_normal((3, 5))
    c = rng.standard_normal((3, 4))
    # keep pre-activations away from the ReLU kink so the derivative exists
    _, pre = net.forward(x), net._cache[1]
    assert all(np.min(np.abs(z)) > 1e-6 for z in pre[:-1])
    net.forward(x)
    net.backward(c)
    numeric = finite_diff_param_grads(net, x, c)
    for g_an, g_num in zip(net.gradients(), numeric):
        assert np.max(relative_error(g_an, g_num)) < 1e-4


def test_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    net = DenseNet([6, 8, 3], output_activation="tanh", rng=rng)
    x = rng.standard_normal(6)
    c = rng.standard_normal(3)
    net.forward(x)
    g_in = net.backward(c)[0]
    h = 1e-5
    fd = np.zeros(6)
    for i in range(6):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd[i] = (np.sum(net.forward(xp) * c) - np.sum(net.forward(xm) * c)) / (2 * h)
    assert np.max(relative_error(g_in, fd)) < 1e-4


def test_batch_and_single_forward_agree():
    rng = np.random.default_rng(2)
    net = DenseNet([4, 10, 2], rng=rng)
    x = rng.standard_normal((5, 4))
    batch = net.forward(x)
    assert batch.shape == (5, 2)
    for i in range(5):
        np.testing.assert_allclose(net.forward(x[i]), batch[i], rtol=1e-12)


def test_init_bounds_and_final_scale():
    rng = np.random.default_rng(3)
    net = DenseNet([100, 50, 20], output_activation="tanh", final_scale=3e-3, rng=rng)
    assert np.max(np.abs(net.weights[0])) <= 1.0 / np.sqrt(100)
    assert np.max(np.abs(net.biases[0])) <= 1.0 / np.sqrt(100)
    assert np.max(np.abs(net.weights[1])) <= 3e-3
    assert np.max(np.abs(net.biases[1])) <= 3e-3
    # tanh output stays in (-1, 1)
    y = net.forward(rng.standard_normal((10, 100)) * 50)
    assert np.all(np.abs(y) < 1.0)


def test_seeded_init_reproducible():
    a = DenseNet([3, 4, 2], rng=np.random.default_rng(7))
    b = DenseNet([3, 4, 2], rng=np.random.default_rng(7))
    for pa, pb in zip(a.parameters(), b.parameters()):
        np.testing.assert_array_equal(pa, pb)


def test_adam_first_step_is_signed_lr():
    theta = np.array([10.0])
    opt = Adam([theta], lr=0.01)
    opt.step([np.array([4.0])])
    # bias-corrected first step is lr * g / (|g| + eps) ~ lr
    assert theta[0] == pytest.approx(10.0 - 0.01, rel=1e-6)


def test_adam_minimises_quadratic():
    theta = np.array([0.0])
    opt = Adam([theta], lr=0.1)
    for _ in range(500):
        opt.step([2.0 * (theta - 3.0)])
    assert theta[0] == pytest.approx(3.0, abs=1e-3)


def test_adam_rejects_mismatched_grads():
    opt = Adam([np.zeros(2)], lr=0.1)
    with pytest.raises(ValueError):
        opt.step([np.zeros(2), np.zeros(2)])


def test_soft_update_geometric_convergence():
    rng = np.random.default_rng(4)
    online = DenseNet([3, 5, 2], rng=rng)
    target = DenseNet([3, 5, 2], rng=np.random.default_rng(5))
    tau = 0.1
    gap0 = np.linalg.norm(target.weights[0] - online.weights[0])
    for n in (1, 5, 20):
        tgt = target.copy()
        for _ in range(n):
            soft_update(tgt, online, tau)
        gap = np.linalg.norm(tgt.weights[0] - online.weights[0])
        assert gap == pytest.approx(gap0 * (1 - tau) ** n, rel=1e-9)
    with pytest.raises(ValueError):
        soft_update(target, online, 1.5)


def test_copy_is_independent():
    net = DenseNet([2, 3, 1], rng=np.random.default_rng(6))
    twin = net.copy()
    twin.weights[0] += 1.0
    assert not np.allclose(net.weights[0], twin.weights[0])
    x = np.ones(2)
    assert net.forward(x) != twin.forward(x)


def test_save_load_roundtrip(tmp_path):
    net = DenseNet([4, 6, 3], output_activation="tanh", rng=np.random.default_rng(8))
    path = tmp_path / "net.npz"
    net.save(path)
    loaded = DenseNet.load(path)
    assert loaded.layer_sizes == net.layer_sizes
    assert loaded.output_activation == "tanh"
    for pa, pb in zip(net.parameters(), loaded.parameters()):
        np.testing.assert_array_equal(pa, pb)
    x = np.random.default_rng(9).standard_normal((2, 4))
    np.testing.assert_array_equal(net.forward(x), loaded.forward(x))


def test_validation_errors():
    with pytest.raises(ValueError):
        DenseNet([5])
    with pytest.raises(ValueError):
        DenseNet([5, 2], output_activation="sigmoid")
    net = DenseNet([5, 2], rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        net.forward(np.zeros(4))
    with pytest.raises(RuntimeError):
        DenseNet([5, 2], rng=np.random.default_rng(0)).backward(np.zeros(2))
