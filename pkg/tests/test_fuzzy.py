import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfreduce.fuzzy import (
    DegenerateFiringError,
    FiringMatrix,
    FuzzyModel,
    GBellParams,
    InputSpec,
    RuleGrid,
    build_grid,
    firing_strengths,
    gbell_grad,
    gbell_mu,
    normalize,
)


# ---------------------------------------------------------------------------
# gbell membership
# ---------------------------------------------------------------------------


def test_gbell_at_center_is_one():
    assert gbell_mu(0.0, GBellParams(1.0, 1.0, 0.0)) == 1.0


def test_gbell_at_one_width():
    # |x-c|/a = 1 forces 1/(1+1)
    assert gbell_mu(1.0, GBellParams(1.0, 1.0, 0.0)) == pytest.approx(0.5, abs=1e-15)


def test_gbell_hand_value():
    # 1/(1 + |2/1|^(2*2)) = 1/17, evaluated by hand
    assert gbell_mu(2.0, GBellParams(1.0, 2.0, 0.0)) == pytest.approx(1.0 / 17.0, rel=1e-14)


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_gbell_rejects_bad_params(a, b):
    with pytest.raises(ValueError):
        GBellParams(a, b, 0.0)


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(-50, 50),
    a=st.floats(0.05, 10),
    b=st.floats(0.3, 6),
    c=st.floats(-20, 20),
)
def test_gbell_bounded_and_peaked(x, a, b, c):
    mu = gbell_mu(x, GBellParams(a, b, c))
    assert 0.0 < mu <= 1.0
    if x == c:
        assert mu == 1.0
    elif abs(x - c) >= 1e-3 * a:
        # away from the center the peak is strict; closer than this the
        # residual (|x-c|/a)^(2b) can underflow below float resolution
        assert mu < 1.0


def test_gbell_strictly_decreasing_in_distance():
    p = GBellParams(0.7, 1.5, 0.3)
    ds = np.linspace(0.0, 4.0, 50)
    mus = gbell_mu(p.c + ds, p)
    assert np.all(np.diff(mus) < 0)


# ---------------------------------------------------------------------------
# gbell gradients vs finite differences
# ---------------------------------------------------------------------------


def _fd_gbell_grad(x, a, b, c, h=1e-6):
    """Central-difference oracle, independent of the analytic path."""
    da = (gbell_mu(x, GBellParams(a + h, b, c)) - gbell_mu(x, GBellParams(a - h, b, c))) / (2 * h)
    db = (gbell_mu(x, GBellParams(a, b + h, c)) - gbell_mu(x, GBellParams(a, b - h, c))) / (2 * h)
    dc = (gbell_mu(x, GBellParams(a, b, c + h)) - gbell_mu(x, GBellParams(a, b, c - h))) / (2 * h)
    return np.array([da, db, dc])


def test_gbell_grad_zero_at_center():
    g = gbell_grad(0.5, GBellParams(1.0, 2.0, 0.5))
    assert g == (0.0, 0.0, 0.0)


def test_gbell_grad_center_symmetry():
    p = GBellParams(1.0, 1.0, 0.0)
    _, _, dc_pos = gbell_grad(1.0, p)
    _, _, dc_neg = gbell_grad(-1.0, p)
    assert dc_neg == pytest.approx(-dc_pos, rel=1e-14)


def test_gbell_grad_matches_finite_differences():
    # 1000 random (x, a, b, c) draws avoiding the center, vector-relative
    # error against the central-difference oracle below 1e-4
    # draws keep mu away from the float saturation at 0 and 1, where the
    # finite-difference oracle itself is all roundoff
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        a = rng.uniform(0.2, 2.0)
        b = rng.uniform(0.6, 3.0)
        c = rng.uniform(-1.0, 1.0)
        delta = rng.uniform(0.1, 4.0) * a * rng.choice([-1.0, 1.0])
        x = c + delta
        analytic = np.array(gbell_grad(x, GBellParams(a, b, c)))
        fd = _fd_gbell_grad(x, a, b, c)
        rel = np.linalg.norm(analytic - fd) / np.linalg.norm(fd)
        worst = max(worst, rel)
    assert worst < 1e-4


# ---------------------------------------------------------------------------
# grid construction
# ---------------------------------------------------------------------------


def test_grid_rule_counts():
    m4x3 = build_grid([InputSpec(0.0, 1.0, 3)] * 4)
    assert m4x3.n_rules == 81
    m2x3 = build_grid([InputSpec(0.0, 1.0, 3)] * 2)
    assert m2x3.n_rules == 9
    degenerate = build_grid([InputSpec(0.0, 1.0, 1)])
    assert degenerate.n_rules == 1


def test_grid_rows_distinct_and_lexicographic():
    grid = RuleGrid.from_counts([2, 3, 2])
    rows = [tuple(r) for r in grid.rules]
    assert len(set(rows)) == len(rows) == 12
    assert rows == sorted(rows)


def test_grid_mf_initialization():
    model = build_grid([InputSpec(0.0, 2.0, 3)])
    params = model.mf_params[0]
    assert np.allclose(params[:, 2], [0.0, 1.0, 2.0])  # centers evenly spaced
    assert np.allclose(params[:, 0], 0.5)  # width = span / (2*(m-1))
    assert np.allclose(params[:, 1], 2.0)
    single = build_grid([InputSpec(-1.0, 1.0, 1)])
    assert np.allclose(single.mf_params[0], [[1.0, 2.0, 0.0]])


def test_build_grid_rejects_empty_and_bad_counts():
    with pytest.raises(ValueError):
        build_grid([])
    with pytest.raises(ValueError):
        InputSpec(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        InputSpec(1.0, 1.0, 2)


# ---------------------------------------------------------------------------
# firing strengths
# ---------------------------------------------------------------------------


def _toy_2x2_model():
    """Two inputs, two MFs each, hand-set parameters."""
    specs = [InputSpec(0.0, 1.0, 2), InputSpec(0.0, 1.0, 2)]
    model = build_grid(specs)
    model.mf_params[0] = np.array([[0.5, 1.0, 0.0], [0.5, 1.0, 1.0]])
    model.mf_params[1] = np.array([[0.4, 2.0, 0.0], [0.4, 2.0, 1.0]])
    return model


def test_firing_is_product_of_memberships():
    model = _toy_2x2_model()
    # x chosen so each first-input membership is 0.5: |x-c|/a = 1
    X = np.array([[0.5, 0.4]])
    mu0 = gbell_mu(0.5, GBellParams(0.5, 1.0, 0.0))
    mu1 = gbell_mu(0.4, GBellParams(0.4, 2.0, 0.0))
    w = firing_strengths(X, model).values
    assert w[0, 0] == pytest.approx(mu0 * mu1, rel=1e-14)
    assert mu0 == pytest.approx(0.5)


def test_firing_one_at_rule_centers():
    model = _toy_2x2_model()
    # sample exactly at the centers of rule (1, 0)
    X = np.array([[1.0, 0.0]])
    w = firing_strengths(X, model).values
    j = [tuple(r) for r in model.grid.rules].index((1, 0))
    assert w[0, j] == 1.0


def test_firing_matches_per_cell_hand_evaluation():
    model = _toy_2x2_model()
    rng = np.random.default_rng(7)
    X = rng.random((5, 2))
    w = firing_strengths(X, model).values
    # independent oracle: direct scalar evaluation per sample and rule
    for n in range(5):
        for j, (i0, i1) in enumerate(model.grid.rules):
            a0, b0, c0 = model.mf_params[0][i0]
            a1, b1, c1 = model.mf_params[1][i1]
            mu0 = 1.0 / (1.0 + abs((X[n, 0] - c0) / a0) ** (2 * b0))
            mu1 = 1.0 / (1.0 + abs((X[n, 1] - c1) / a1) ** (2 * b1))
            assert w[n, j] == pytest.approx(mu0 * mu1, rel=1e-12)


def test_firing_rejects_dimension_mismatch():
    model = _toy_2x2_model()
    with pytest.raises(ValueError):
        firing_strengths(np.ones((3, 5)), model)


def test_firing_permutation_equivariant():
    model = _toy_2x2_model()
    rng = np.random.default_rng(11)
    X = rng.random((20, 2))
    perm = rng.permutation(20)
    w = firing_strengths(X, model).values
    w_perm = firing_strengths(X[perm], model).values
    assert np.array_equal(w[perm], w_perm)


def test_min_tnorm():
    model = _toy_2x2_model()
    X = np.array([[0.3, 0.8]])
    mus = model.membership(X)
    w = firing_strengths(X, model, tnorm="min").values
    for j, (i0, i1) in enumerate(model.grid.rules):
        assert w[0, j] == pytest.approx(min(mus[0][0, i0], mus[1][0, i1]), rel=1e-14)
    with pytest.raises(ValueError):
        firing_strengths(X, model, tnorm="lukasiewicz")


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "row,expected",
    [
        ([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]),
        ([1.0, 1.0], [0.5, 0.5]),
        ([2.0, 6.0], [0.25, 0.75]),
    ],
)
def test_normalize_rows(row, expected):
    out = normalize(FiringMatrix(np.array([row])))
    assert out.normalized
    assert np.allclose(out.values[0], expected, atol=1e-15)


def test_normalize_rows_sum_to_one_and_idempotent():
    rng = np.random.default_rng(3)
    w = rng.random((50, 8)) + 1e-6
    once = normalize(FiringMatrix(w))
    assert np.allclose(once.values.sum(axis=1), 1.0, atol=1e-9)
    twice = normalize(once)
    assert np.allclose(once.values, twice.values, atol=1e-15)


def test_normalize_degenerate_row():
    with pytest.raises(DegenerateFiringError):
        normalize(FiringMatrix(np.array([[1e-310, 1e-310]])))


def test_normalize_rejects_negative():
    with pytest.raises(ValueError):
        normalize(FiringMatrix(np.array([[0.5, -0.1]])))
