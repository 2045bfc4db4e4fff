"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a single ``criterion <n> ... PASS|FAIL`` line, printed in
the terminal summary (see ``conftest.py``) as well as to stdout.
"""

import itertools
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from coordnet import elementwise as ew
from coordnet.cli import main
from coordnet.elementwise import Nonlinearity
from coordnet.engine import (Example, Loss, LossConfig, TangentTarget, backprop_higher, backprop_standard,
                             batch_objective, grad_R_multi, halving_probe, seed_error, total_gradient,
                             train)
from coordnet.formats import save_dataset
from coordnet.gradcheck import (ADJOINT_TOL, Report, adjoint_check, fd_jvp, fd_param_grads, grads_rel_error,
                                layer_adjoint_checks, reference_forward, reference_J, reference_R, rel_error,
                                untied_sum_oracle)
from coordnet.network import Kind, forward, init_network, tangent_forward

S, T, R, I = Nonlinearity.SIGMOID, Nonlinearity.TANH, Nonlinearity.RAMP, Nonlinearity.IDENTITY
MLP_DIMS = [4, 5, 3, 2]
SMOOTH_ACTS = list(itertools.product([S, T], repeat=3))

# pinned on first reproduction: first epoch whose summed MSE is below 0.05
XOR_PIN_EPOCH = 1270
# pinned on first reproduction: learning rate chosen by the halving probe
AE_PIN_ETA = 0.003125


def record(n, title, checks, elapsed, budget):
    """``checks`` is a list of (label, error, tol); also applies the runtime budget."""
    ok_checks = all(np.isfinite(e) and e <= t for _, e, t in checks)
    ok_time = elapsed < budget
    worst = ", ".join(f"{label} {e:.2e}<={t:.0e}" for label, e, t in checks)
    line = (f"criterion {n} {title}: {'PASS' if ok_checks and ok_time else 'FAIL'} "
            f"[{worst}] [{elapsed:.2f}s < {budget:g}s]")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok_checks, line
    assert ok_time, line


def worst(errors):
    return max(errors) if errors else float("nan")


def test_criterion_1_adjoint_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    mv, rep = [], Report()
    for _ in range(5):
        m, n = rng.integers(1, 9, size=2)
        W = rng.standard_normal((m, n))
        mv.append(adjoint_check(lambda v: W @ v, lambda u: W.T @ u, (n, m), 100, rng).max_defect)
    for act in Nonlinearity:
        for tied in (False, True):
            net = init_network(Kind.AE if tied else Kind.MLP, [8, 5, 8] if tied else [6, 8, 3], [act, act], 7)
            layer_adjoint_checks(net, rng.standard_normal(net.n_in), rep, rng, trials=100)

    def group(key):
        return worst([c.error for c in rep.checks if key in c.name])

    checks = [("matvec", worst(mv), ADJOINT_TOL), ("dpsi", group("dpsi"), ADJOINT_TOL),
              ("d2f hook", group("d2f hook"), ADJOINT_TOL), ("vjp/jvp", group("vjp_state"), ADJOINT_TOL),
              ("grad_W", group("grad_W"), ADJOINT_TOL), ("mixed_W", group("mixed_W"), ADJOINT_TOL)]
    record(1, "adjoint identity suite", checks, time.perf_counter() - t0, 1.0)


def test_criterion_2_first_order_gradients():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    plain, l2, xent = [], [], []
    for k, acts in enumerate(SMOOTH_ACTS):
        net = init_network(Kind.MLP, MLP_DIMS, acts, 100 + k)
        x, y = rng.standard_normal(4), rng.standard_normal(2)
        s = forward(net, x)
        gJ = backprop_standard(net, s, seed_error(net, s, y, LossConfig()))
        plain.append(grads_rel_error(gJ, fd_param_grads(net, lambda n: reference_J(n, x, y, LossConfig()))))

        lam = 0.1
        g_T = total_gradient(net, gJ, LossConfig(lam=lam))
        fd_T = fd_param_grads(net, lambda n: reference_J(n, x, y, LossConfig())
                              + 0.5 * lam * sum(float(np.sum(p * p)) for p in n.params()))
        l2.append(grads_rel_error(g_T, fd_T))

        if acts[-1] is S:
            cfg = LossConfig(Loss.XENT)
            yb = rng.integers(0, 2, size=2).astype(float)
            gX = backprop_standard(net, s, seed_error(net, s, yb, cfg))
            xent.append(grads_rel_error(gX, fd_param_grads(net, lambda n: reference_J(n, x, yb, cfg))))
    checks = [("mse", worst(plain), 1e-6), ("l2 lambda=0.1", worst(l2), 1e-6), ("xent", worst(xent), 1e-6)]
    record(2, "first-order gradient suite", checks, time.perf_counter() - t0, 5.0)


def test_criterion_3_tangent_forward():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    errs = []
    for k in range(20):
        net = init_network(Kind.MLP, MLP_DIMS, SMOOTH_ACTS[k % len(SMOOTH_ACTS)], 200 + k)
        x, v = rng.standard_normal(4), rng.standard_normal(4)
        ts = tangent_forward(net, forward(net, x), v)
        errs.append(rel_error(ts.vs[-1], fd_jvp(lambda a: reference_forward(net, a), x, v)))
    record(3, "tangent suite (20 pairs)", [("jvp", worst(errs), 1e-6)], time.perf_counter() - t0, 1.0)


def test_criterion_4_higher_order_gradients():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    fd_errs, add_errs = [], []
    for k, acts in enumerate(SMOOTH_ACTS):
        net = init_network(Kind.MLP, MLP_DIMS, acts, 300 + k)
        x = rng.standard_normal(4)
        tt = TangentTarget.of([(rng.standard_normal(4), rng.standard_normal(2)) for _ in range(2)])
        g, _ = grad_R_multi(net, x, tt)
        fd_errs.append(grads_rel_error(g, fd_param_grads(net, lambda n: reference_R(n, x, tt))))
        parts = [grad_R_multi(net, x, TangentTarget((p,)))[0] for p in tt.pairs]
        add_errs.append(grads_rel_error(g, parts[0] + parts[1]))

    # piecewise-linear network: every second-derivative hook must vanish
    net = init_network(Kind.MLP, MLP_DIMS, [R, R, R], 400)
    degenerate = []
    for _ in range(10):
        x, v, beta = rng.standard_normal(4), rng.standard_normal(4), rng.standard_normal(2)
        ts = tangent_forward(net, forward(net, x), v)
        e_v = ts.vs[-1] - beta
        _, g = backprop_higher(net, ts, None, e_v)
        e_t, d = np.zeros(2), 0.0
        for i in reversed(range(3)):
            lay, c = net.layers[i], ts.caches[i]
            d = max(d, rel_error(g.b[i], ew.apply_d1(R, c.z) * e_t),
                    float(np.max(np.abs(lay.d2f_hook_adjoint(c, ts.vs[i], e_v)))),
                    float(np.max(np.abs(lay.mixed_b_hook_adjoint(c, ts.vs[i], e_v)))))
            e_t, e_v = lay.vjp_state(c, e_t), lay.vjp_state(c, e_v)
        degenerate.append(d)
    checks = [("grad R vs FD", worst(fd_errs), 1e-5), ("multi-pair additivity", worst(add_errs), 1e-10),
              ("ramp degenerate", worst(degenerate), 0.0)]
    record(4, "higher-order gradient suite", checks, time.perf_counter() - t0, 10.0)


def test_criterion_5_tied_autoencoder():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    a, b, c_fd, c_un = [], [], [], []
    cfg = LossConfig()
    for k, dims in enumerate([[6, 3, 6], [8, 4, 2, 4, 8]]):
        for trial in range(2):
            net = init_network(Kind.AE, dims, [T] * (len(dims) - 1), 500 + 10 * k + trial)
            x = rng.standard_normal(dims[0])
            s = forward(net, x)
            gJ = backprop_standard(net, s, seed_error(net, s, None, cfg))
            fdJ = fd_param_grads(net, lambda n: reference_J(n, x, None, cfg))
            a.append(max(rel_error(g, f) for g, f in zip(gJ.W, fdJ.W)))
            un = net.untied()
            us = forward(un, x)
            ugJ = backprop_standard(un, us, seed_error(un, us, x, cfg))
            b.append(max(rel_error(g, o) for g, o in zip(gJ.W, untied_sum_oracle(net, ugJ))))

            tt = TangentTarget.of([(rng.standard_normal(dims[0]), rng.standard_normal(dims[0]))])
            gR, _ = grad_R_multi(net, x, tt)
            fdR = fd_param_grads(net, lambda n: reference_R(n, x, tt))
            c_fd.append(max(rel_error(g, f) for g, f in zip(gR.W, fdR.W)))
            ugR, _ = grad_R_multi(un, x, tt)
            c_un.append(max(rel_error(g, o) for g, o in zip(gR.W, untied_sum_oracle(net, ugR))))
    checks = [("(a) J vs FD", worst(a), 1e-6), ("(b) J vs untied", worst(b), 1e-12),
              ("(c) R vs FD", worst(c_fd), 1e-5), ("(c) R vs untied", worst(c_un), 1e-10)]
    record(5, "tied-autoencoder suite", checks, time.perf_counter() - t0, 10.0)


def rank2_data():
    g = np.random.default_rng(7)
    A, C = g.standard_normal((8, 2)), g.standard_normal((32, 2))
    return C @ A.T


def test_criterion_6_training_pins():
    t0 = time.perf_counter()
    xor = [Example(np.array(r[:2], float), np.array(r[2:], float))
           for r in [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]]
    net = init_network(Kind.MLP, [2, 4, 1], [S, S], 42)
    _, log = train(net, xor, LossConfig(eta=0.5), 20000, stop=lambda o: o < 0.05)
    xor_loss, xor_epoch = log[-1], len(log)

    X = rank2_data()
    batch = [Example(x) for x in X]
    ae = init_network(Kind.AE, [8, 2, 8], [I, I], 42)
    eta = halving_probe(ae, batch, LossConfig(), trial_epochs=20)
    J0 = batch_objective(ae, batch, LossConfig(eta=eta))
    _, alog = train(ae, batch, LossConfig(eta=eta), 5000, stop=lambda o: o <= 0.1 * J0)
    ratio = alog[-1] / alog[0]
    checks = [("xor loss", xor_loss, np.nextafter(0.05, 0.0)), ("xor pinned epoch", abs(xor_epoch - XOR_PIN_EPOCH), 0),
              ("ae probe eta pin", abs(eta - AE_PIN_ETA), 0), ("ae final/initial", ratio, 0.1)]
    record(6, f"training pins (xor epoch {xor_epoch}, ae eta {eta}, ae epochs {len(alog)})", checks,
           time.perf_counter() - t0, 30.0)


def test_criterion_7_cli_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    d, ad, tf = tmp_path / "xor.csv", tmp_path / "ae.csv", tmp_path / "tan.txt"
    save_dataset([[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]], d)
    rows = rng.standard_normal((5, 4))
    save_dataset(rows, ad)
    tf.write_text("".join(",".join(f"{v:.6f}" for v in rng.standard_normal(4)) + " ; "
                          + ",".join(f"{v:.6f}" for v in rng.standard_normal(4)) + "\n" for _ in range(5)))
    runs = [
        (["init", "{m}", "--dims", "2", "4", "1", "--activations", "sigmoid", "sigmoid", "--seed", "42"],
         ["train", "{m}", str(d), "--epochs", "200", "--eta", "0.5", "--lambda", "0.01", "--out", "{o}"]),
        (["init", "{m}", "--kind", "ae", "--dims", "4", "2", "4", "--activations", "tanh", "tanh", "--seed", "9"],
         ["train", "{m}", str(ad), "--epochs", "50", "--eta", "0.01", "--mu", "0.5", "--tangents", str(tf),
          "--out", "{o}"]),
    ]
    diffs = []
    for k, (init, tr) in enumerate(runs):
        seen = []
        for rep in range(2):
            m, o = tmp_path / f"m{k}{rep}.txt", tmp_path / f"o{k}{rep}.txt"
            sub = {"{m}": str(m), "{o}": str(o)}
            assert main([sub.get(a, a) for a in init]) == 0
            assert main([sub.get(a, a) for a in tr]) == 0
            seen.append((m.read_bytes(), capsys.readouterr().out, o.read_bytes()))
        diffs.append(0.0 if seen[0] == seen[1] else 1.0)
    record(7, "determinism of init + train (models and logs)", [("byte mismatches", max(diffs), 0.0)],
           time.perf_counter() - t0, 30.0)
