import numpy as np
import pytest

from nfreduce.consequent import (
    AnfisModel,
    ConsequentParams,
    assemble_design,
    hybrid_epoch,
    lse_fit,
    predict,
    premise_gradient,
    rule_outputs,
    solve_lse,
    train_anfis,
)
from nfreduce.fuzzy import FuzzyModel, InputSpec, build_grid, firing_strengths, normalize


# ---------------------------------------------------------------------------
# design assembly
# ---------------------------------------------------------------------------


def test_design_single_always_on_rule():
    X = np.array([[1.0], [2.0], [3.0]])
    w = np.ones((3, 1))
    design = assemble_design(X, w)
    assert np.array_equal(design, np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]))


def test_design_hand_expansion():
    design = assemble_design(np.array([[2.0]]), np.array([[0.5, 0.5]]))
    assert np.array_equal(design, np.array([[1.0, 0.5, 1.0, 0.5]]))


def test_design_zero_weight_row():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    w = np.array([[1.0, 1.0], [0.0, 0.0]])
    design = assemble_design(X, w)
    assert np.all(design[1] == 0.0)


def test_design_rejects_mismatched_rows():
    with pytest.raises(ValueError):
        assemble_design(np.ones((3, 2)), np.ones((4, 2)))


# ---------------------------------------------------------------------------
# least squares
# ---------------------------------------------------------------------------


def test_lse_exact_interpolation():
    # one rule, unit weights, data {(0,1),(1,3)}: two points, two coefficients
    X = np.array([[0.0], [1.0]])
    design = assemble_design(X, np.ones((2, 1)))
    params = lse_fit(design, np.array([1.0, 3.0]), n_rules=1)
    assert params.coeffs[0] == pytest.approx([2.0, 1.0], abs=1e-12)


def test_lse_identity_design():
    y = np.array([3.0, -1.0, 0.5, 2.0])
    theta = solve_lse(np.eye(4), y)
    assert theta == pytest.approx(y, abs=1e-12)


def test_lse_normal_equations_residual():
    # full-rank 20x6 random system: the residual must be orthogonal to the
    # column space (normal-equations oracle)
    rng = np.random.default_rng(42)
    A = rng.normal(size=(20, 6))
    y = rng.normal(size=20)
    theta = solve_lse(A, y)
    assert np.max(np.abs(A.T @ (A @ theta - y))) < 1e-6 * np.linalg.norm(y)


def test_lse_rejects_nonfinite():
    with pytest.raises(ValueError):
        solve_lse(np.array([[1.0, np.nan]]), np.array([1.0]))
    with pytest.raises(ValueError):
        solve_lse(np.eye(2), np.array([np.inf, 0.0]))


def test_lse_rank_deficient_falls_back_to_ridge():
    # duplicated column: QR diagonal collapses, ridge path must return a
    # finite solution that still fits the data
    A = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    y = np.array([2.0, 4.0, 6.0])
    theta = solve_lse(A, y)
    assert np.all(np.isfinite(theta))
    assert A @ theta == pytest.approx(y, abs=1e-6)


def test_lse_underdetermined_matches_primal_ridge():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(4, 9))
    y = rng.normal(size=4)
    theta = solve_lse(A, y, ridge=1e-8)
    # the primal oracle is itself conditioned like sigma^2/ridge, so compare
    # at the accuracy it can deliver
    primal = np.linalg.solve(A.T @ A + 1e-8 * np.eye(9), A.T @ y)
    assert theta == pytest.approx(primal, rel=1e-5, abs=1e-7)
    assert A @ theta == pytest.approx(y, abs=1e-6)


@pytest.mark.parametrize("shape", [(15, 4), (6, 10), (12, 12)])
def test_lse_never_worse_than_zero_model(shape):
    rng = np.random.default_rng(shape[0] * 100 + shape[1])
    A = rng.normal(size=shape)
    A[:, -1] = A[:, 0]  # force some redundancy
    y = rng.normal(size=shape[0])
    theta = solve_lse(A, y)
    assert np.sum((A @ theta - y) ** 2) <= np.sum(y**2) + 1e-9


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def test_predict_interpolates_training_points():
    X = np.array([[0.0], [1.0]])
    w = np.ones((2, 1))
    params = lse_fit(assemble_design(X, w), np.array([1.0, 3.0]), n_rules=1)
    assert predict(X, w, params) == pytest.approx([1.0, 3.0], abs=1e-9)


def test_predict_zero_params():
    params = ConsequentParams(np.zeros((3, 3)))
    out = predict(np.ones((4, 2)), np.ones((4, 3)), params)
    assert np.array_equal(out, np.zeros(4))


def test_predict_agrees_with_design_product():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(15, 3))
    w = rng.random((15, 4))
    theta = rng.normal(size=16)
    params = ConsequentParams(theta.reshape(4, 4))
    via_design = assemble_design(X, w) @ theta
    assert predict(X, w, params) == pytest.approx(via_design, abs=1e-12)


def test_predict_linear_in_params():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(8, 2))
    w = rng.random((8, 3))
    t1 = ConsequentParams(rng.normal(size=(3, 3)))
    t2 = ConsequentParams(rng.normal(size=(3, 3)))
    both = ConsequentParams(t1.coeffs + t2.coeffs)
    assert predict(X, w, both) == pytest.approx(
        predict(X, w, t1) + predict(X, w, t2), abs=1e-12
    )


# ---------------------------------------------------------------------------
# hybrid learning
# ---------------------------------------------------------------------------


def _toy_model(mf_counts=(2, 2)):
    specs = [InputSpec(0.0, 1.0, m) for m in mf_counts]
    return AnfisModel(fuzzy=build_grid(specs))


def _toy_data(seed=0, n=40, d=2):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = np.sin(3 * X[:, 0])
    if d > 1:
        y = y + 0.5 * X[:, 1] ** 2
    return X, y


def test_hybrid_lr_zero_keeps_premises():
    model = _toy_model()
    X, y = _toy_data()
    before = [p.copy() for p in model.fuzzy.mf_params]
    mse = hybrid_epoch(model, X, y, lr=0.0)
    for b, a in zip(before, model.fuzzy.mf_params):
        assert np.array_equal(b, a)
    # equals the pure-LSE MSE
    wbar = normalize(firing_strengths(X, model.fuzzy)).values
    design = assemble_design(X, wbar)
    theta = solve_lse(design, y)
    assert mse == pytest.approx(np.mean((design @ theta - y) ** 2), rel=1e-12)


def test_hybrid_single_rule_zero_premise_gradient():
    # with one rule the normalized weight is constant 1, so the premise
    # contribution through the normalization vanishes
    model = _toy_model(mf_counts=(1,))
    X, y = _toy_data(d=1)
    wbar = normalize(firing_strengths(X, model.fuzzy)).values
    design = assemble_design(X, wbar)
    params = lse_fit(design, y, 1)
    grads = premise_gradient(model.fuzzy, params, X, y)
    assert np.allclose(grads[0], 0.0, atol=1e-12)


def test_premise_gradient_matches_finite_differences():
    model = _toy_model()
    X, y = _toy_data(seed=3, n=30)
    # nudge the premises off the symmetric init so gradients are generic
    rng = np.random.default_rng(4)
    for p in model.fuzzy.mf_params:
        p[:, 2] += rng.normal(scale=0.05, size=p.shape[0])
        p[:, 0] *= rng.uniform(0.8, 1.2, size=p.shape[0])
    wbar = normalize(firing_strengths(X, model.fuzzy)).values
    params = lse_fit(assemble_design(X, wbar), y, model.n_rules)

    def mse_at(fuzzy):
        w = normalize(firing_strengths(X, fuzzy)).values
        return np.mean((predict(X, w, params) - y) ** 2)

    analytic = premise_gradient(model.fuzzy, params, X, y)
    h = 1e-6
    fd, flat = [], []
    for i, p in enumerate(model.fuzzy.mf_params):
        fd_i = np.zeros_like(p)
        for m in range(p.shape[0]):
            for j in range(p.shape[1]):
                hi = model.fuzzy.copy()
                hi.mf_params[i][m, j] += h
                lo = model.fuzzy.copy()
                lo.mf_params[i][m, j] -= h
                fd_i[m, j] = (mse_at(hi) - mse_at(lo)) / (2 * h)
        fd.append(fd_i)
        flat.append((analytic[i] - fd_i).ravel())
    num = np.linalg.norm(np.concatenate(flat))
    den = np.linalg.norm(np.concatenate([f.ravel() for f in fd]))
    assert num / den < 1e-3


def test_hybrid_mse_mostly_nonincreasing_on_noiseless_tsk():
    # data generated by a ground-truth TSK system whose premises differ from
    # the grid init; over 100 epochs the training error may overshoot only
    # occasionally
    rng = np.random.default_rng(12)
    truth = _toy_model()
    for p in truth.fuzzy.mf_params:
        p[:, 2] += rng.normal(scale=0.15, size=p.shape[0])
        p[:, 0] *= rng.uniform(0.6, 1.4, size=p.shape[0])
    truth_params = ConsequentParams(rng.normal(size=(truth.n_rules, 3)))
    X = rng.random((120, 2))
    wbar = normalize(firing_strengths(X, truth.fuzzy)).values
    y = predict(X, wbar, truth_params)

    model = _toy_model()
    history = train_anfis(model, X, y, epochs=100, lr=0.01)
    diffs = np.diff(history)
    non_increasing = np.sum(diffs <= 1e-15)
    assert non_increasing >= 95
    assert history[-1] < history[0]


def test_train_rejects_bad_args():
    model = _toy_model()
    X, y = _toy_data()
    with pytest.raises(ValueError):
        train_anfis(model, X, y, epochs=0)
    with pytest.raises(ValueError):
        hybrid_epoch(model, X, y, lr=-0.1)


def test_rule_outputs_shape():
    params = ConsequentParams(np.array([[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]]))
    f = rule_outputs(np.array([[2.0, 3.0]]), params)
    assert f.shape == (1, 2)
    assert f[0] == pytest.approx([4.0, 2.0])
