import numpy as np
import pytest

from coordnet.elementwise import Nonlinearity
from coordnet import elementwise as ew
from coordnet.engine import LossConfig, TangentTarget, Loss
from coordnet.gradcheck import (FdConfig, NonFiniteError, Report, adjoint_check, away_from_kinks,
                                fd_grad_scalar_loss, fd_jvp, kink_margin, reference_tangent, rel_error,
                                run_suite, untied_sum_oracle, _engine_default)
from coordnet.linalg import DimensionError
from coordnet.network import Kind, forward, init_network, tangent_forward

S, T, R, I = Nonlinearity.SIGMOID, Nonlinearity.TANH, Nonlinearity.RAMP, Nonlinearity.IDENTITY


# meta-tests: the oracle against closed forms


def test_fd_quadratic_and_constant():
    g = fd_grad_scalar_loss(lambda t: 0.5 * float(t[0]) ** 2, np.array([3.0]))
    assert abs(g[0] - 3.0) <= 1e-9
    g = fd_grad_scalar_loss(lambda t: 7.0, np.zeros(4))
    assert np.all(np.abs(g) <= FdConfig().abs_floor)


def test_fd_least_squares_over_matrix(rng):
    W, x, y = rng.standard_normal((3, 4)), rng.standard_normal(4), rng.standard_normal(3)
    g = fd_grad_scalar_loss(lambda M: 0.5 * float(np.sum((M @ x - y) ** 2)), W)
    assert rel_error(g, np.outer(W @ x - y, x)) <= 1e-9


def test_fd_jvp_closed_forms(rng):
    W, x, v = rng.standard_normal((3, 4)), rng.standard_normal(4), rng.standard_normal(4)
    assert np.max(np.abs(fd_jvp(lambda a: W @ a, x, v) - W @ v)) <= 1e-9
    np.testing.assert_array_equal(fd_jvp(lambda a: np.sin(a), x, np.zeros(4)), np.zeros(4))


def test_fd_non_finite_reports_coordinate():
    def f(t):
        with np.errstate(invalid="ignore"):
            return float(np.log(t[1])) + t[0]

    with pytest.raises(NonFiniteError) as e:
        fd_grad_scalar_loss(f, np.array([1.0, 1e-6]))
    assert e.value.index == (1,)


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FdConfig(h_base=0.0)
    with pytest.raises(ValueError):
        FdConfig(rel_tol=-1.0)


def test_rel_error_examples():
    x = np.array([1.0, -2.0])
    assert rel_error(x, x) == 0.0
    assert rel_error(np.zeros(3), np.zeros(3)) == 0.0
    assert rel_error(np.array([1.0]), np.array([1 + 1e-6])) == pytest.approx(1e-6, rel=1e-5)
    with pytest.raises(DimensionError):
        rel_error(np.zeros(2), np.zeros(3))


def test_adjoint_check_examples(rng):
    W = rng.standard_normal((5, 3))
    assert adjoint_check(lambda v: W @ v, lambda u: W.T @ u, (3, 5), 100, rng).passed
    A = rng.standard_normal((4, 4))
    bad = adjoint_check(lambda v: A @ v, lambda u: A @ u, (4, 4), 100, rng)
    assert not bad.passed and bad.max_defect > 1e-3
    z = rng.standard_normal(6)
    assert adjoint_check(lambda v: ew.dpsi_action(T, z, v), lambda u: ew.dpsi_action(T, z, u), (6, 6), 100,
                         rng).passed


def test_reference_tangent_is_jacobian_product(mlp, rng):
    x, v = rng.standard_normal(4), rng.standard_normal(4)
    np.testing.assert_allclose(reference_tangent(mlp, x, v), tangent_forward(mlp, forward(mlp, x), v).vs[-1],
                               rtol=1e-13, atol=1e-15)


def test_kink_resampling(rng):
    net = init_network(Kind.MLP, [3, 4, 2], [R, S], 0)
    W0 = net.weights[0].copy()
    W0[0] = 0.0
    b0 = net.biases[0].copy()
    b0[0] = 0.0
    net = net.with_params(weights=[W0, net.weights[1]], biases=[b0, net.biases[1]])
    x = rng.standard_normal(3)
    assert kink_margin(net, x) == 0.0
    with pytest.raises(RuntimeError):
        away_from_kinks(net, x, rng, tries=20)
    smooth = init_network(Kind.MLP, [3, 2], [T], 0)
    assert kink_margin(smooth, x) == np.inf and away_from_kinks(smooth, x, rng) is x


# the suite itself


def test_suite_passes_on_smooth_mlp(mlp, rng):
    tt = TangentTarget.of([(rng.standard_normal(4), rng.standard_normal(2))])
    rep = run_suite(mlp, rng.standard_normal(4), rng.standard_normal(2), LossConfig(lam=0.1, mu=1.0), tt, seed=1)
    assert rep.passed, rep.text()
    names = " ".join(c.name for c in rep.checks)
    for key in ["vjp_state/jvp_state", "dpsi self-adjoint", "d2f hook", "grad_W adjoint", "mixed_W hook",
                "grad J vs FD", "lambda T", "tangent_forward", "grad R vs FD"]:
        assert key in names
    assert rep.text().endswith(f"RESULT PASS ({len(rep.checks)}/{len(rep.checks)})")


def test_suite_reports_tied_oracle(ae, rng):
    tt = TangentTarget.of([(rng.standard_normal(8), rng.standard_normal(8))])
    rep = run_suite(ae, rng.standard_normal(8), None, LossConfig(mu=1.0), tt, seed=2)
    assert rep.passed, rep.text()
    names = [c.name for c in rep.checks]
    assert "tied grad_W J vs untied-sum oracle" in names and "tied grad_W R vs untied-sum oracle" in names


def test_suite_xent(rng):
    net = init_network(Kind.MLP, [4, 5, 3, 2], [T, S, S], 4)
    rep = run_suite(net, rng.standard_normal(4), np.array([1.0, 0.0]), LossConfig(Loss.XENT), seed=3)
    assert rep.passed, rep.text()


def test_suite_ramp_skips_R_fd(rng):
    net = init_network(Kind.MLP, [4, 5, 2], [R, S], 6)
    tt = TangentTarget.of([(rng.standard_normal(4), rng.standard_normal(2))])
    rep = run_suite(net, rng.standard_normal(4), rng.standard_normal(2), LossConfig(mu=1.0), tt, seed=4)
    assert rep.passed, rep.text()
    assert any("skipped" in n for n in rep.notes)


def test_suite_detects_stale_gradients(mlp, rng):
    """Gradients computed before W was perturbed must FAIL against the oracle."""
    x, y = rng.standard_normal(4), rng.standard_normal(2)
    tt = TangentTarget.of([(rng.standard_normal(4), rng.standard_normal(2))])
    cfg = LossConfig(mu=1.0)
    stale = _engine_default(mlp, x, y, cfg, tt)
    W = [w.copy() for w in mlp.weights]
    W[1] = W[1] + 0.05
    moved = mlp.with_params(weights=W)
    rep = run_suite(moved, x, y, cfg, tt, seed=5, grad_fn=lambda *a: stale)
    assert not rep.passed
    failed = {c.name for c in rep.checks if not c.passed}
    assert any("grad J" in n for n in failed) and "grad R vs FD" in failed


def test_untied_sum_oracle_folds_decoder_transposes(ae, rng):
    from coordnet.engine import Grads
    un = [rng.standard_normal(lay.effective_weight().shape) for lay in ae.layers]
    folded = untied_sum_oracle(ae, Grads(un, list(ae.biases)))
    np.testing.assert_array_equal(folded[0], un[0] + un[3].T)
    np.testing.assert_array_equal(folded[1], un[1] + un[2].T)


def test_report_text_format():
    rep = Report()
    rep.add("alpha", 1e-9, 1e-6)
    rep.add("beta", float("nan"), 1e-6)
    lines = rep.text().splitlines()
    assert lines[0].split()[-1] == "PASS" and lines[1].split()[-1] == "FAIL"
    assert lines[-1] == "RESULT FAIL (1/2)" and not rep.passed
