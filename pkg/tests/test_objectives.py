import numpy as np
import pytest

from fwrestart.objectives import (
    CsvFormatError,
    Dataset,
    LeastSquares,
    Logistic,
    PoweredNorm,
    generate_synthetic,
    load_csv,
)


def _fd_gradient(obj, w, h=1e-6):
    g = np.zeros_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (obj.value(w + e) - obj.value(w - e)) / (2 * h)
    return g


@pytest.fixture(scope="module")
def regression_data():
    return generate_synthetic("regression", 60, 8, 0.1, seed=5)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 2)), np.ones(4))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 1.0]]), np.ones(1))


def test_least_squares_value_gradient(regression_data):
    obj = LeastSquares(regression_data.X, regression_data.y)
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.standard_normal(obj.dim)
        np.testing.assert_allclose(
            obj.gradient(w), _fd_gradient(obj, w), rtol=1e-5, atol=1e-8
        )
    # curvature along a direction equals the exact quadratic term
    d = rng.standard_normal(obj.dim)
    w = rng.standard_normal(obj.dim)
    lhs = obj.value(w + d) - obj.value(w) - float(obj.gradient(w) @ d)
    assert lhs == pytest.approx(0.5 * obj.curvature_along(d), rel=1e-9)


def test_least_squares_lipschitz_matches_eigenvalue(regression_data):
    obj = LeastSquares(regression_data.X, regression_data.y)
    lam = np.linalg.eigvalsh(regression_data.X.T @ regression_data.X).max()
    assert obj.lipschitz() == pytest.approx(lam / obj.n, rel=1e-6)


def test_powered_norm_gradient_including_near_zero_residual(regression_data):
    obj = PoweredNorm(regression_data.X, regression_data.y, 1.5)
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.standard_normal(obj.dim) * 0.2
        np.testing.assert_allclose(
            obj.gradient(w), _fd_gradient(obj, w), rtol=2e-5, atol=1e-7
        )
    # exact zero residuals contribute zero gradient (alpha > 1)
    X = np.eye(2)
    y = np.zeros(2)
    z = PoweredNorm(X, y, 1.5)
    np.testing.assert_allclose(z.gradient(np.zeros(2)), np.zeros(2))
    with pytest.raises(ValueError):
        PoweredNorm(X, y, 1.0)


def test_logistic_gradient_and_lipschitz():
    data = generate_synthetic("classification", 80, 6, 0.2, seed=2)
    obj = Logistic(data.X, data.y)
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = rng.standard_normal(6)
        np.testing.assert_allclose(
            obj.gradient(w), _fd_gradient(obj, w), rtol=1e-5, atol=1e-8
        )
    lam = np.linalg.eigvalsh(data.X.T @ data.X).max()
    assert obj.lipschitz() == pytest.approx(lam / (4 * obj.n), rel=1e-6)
    with pytest.raises(ValueError):
        Logistic(data.X, np.zeros(80))


def test_logistic_is_stable_at_extreme_margins():
    X = np.array([[1000.0], [-1000.0]])
    y = np.array([1.0, -1.0])
    obj = Logistic(X, y)
    assert np.isfinite(obj.value(np.array([5.0])))
    assert np.all(np.isfinite(obj.gradient(np.array([5.0]))))


def test_generate_synthetic_determinism_and_sparsity():
    a = generate_synthetic("regression", 50, 30, 0.1, seed=9)
    b = generate_synthetic("regression", 50, 30, 0.1, seed=9)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)
    assert np.count_nonzero(a.w_star) == 3  # dim // 10
    c = generate_synthetic("classification", 50, 5, 0.1, seed=9)
    assert set(np.unique(c.y)) <= {-1.0, 1.0}
    assert np.count_nonzero(c.w_star) == 1  # at least one
    with pytest.raises(ValueError):
        generate_synthetic("other", 10, 5, 0.1, seed=0)


def test_load_csv_roundtrip_and_errors(tmp_path):
    p = tmp_path / "data.csv"
    p.write_text("target,f1,f2\n1.0,2.0,3.0\n-1.0,0.5,0.25\n")
    d = load_csv(p)
    np.testing.assert_allclose(d.y, [1.0, -1.0])
    np.testing.assert_allclose(d.X, [[2.0, 3.0], [0.5, 0.25]])

    p.write_text("1.0,2.0\n3.0,abc\n")
    with pytest.raises(CsvFormatError, match="line 2"):
        load_csv(p)

    p.write_text("1.0,2.0\n3.0,4.0,5.0\n")
    with pytest.raises(CsvFormatError, match="line 2"):
        load_csv(p)

    p.write_text("header,only\n")
    with pytest.raises(CsvFormatError, match="no data"):
        load_csv(p)
