import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fspesoa.baselines import (
    BaselineError,
    LdaModel,
    PcaModel,
    covariance,
    lda_fit,
    lda_transform,
    pca_fit,
    pca_transform,
)
from fspesoa.data import prepare
from fspesoa.linalg import JacobiNonConvergence, jacobi_eigh, orient


# --- Jacobi ------------------------------------------------------------------------


def test_jacobi_diagonal():
    vals, vecs = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
    assert vals.tolist() == [3.0, 2.0, 1.0]
    assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])


def test_jacobi_two_by_two():
    vals, vecs = jacobi_eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(vals, [3.0, 1.0])
    assert np.allclose(np.abs(vecs[:, 0]), [2**-0.5, 2**-0.5])


def test_jacobi_non_convergence_reports_norm():
    A = np.random.default_rng(0).random((6, 6))
    with pytest.raises(JacobiNonConvergence) as info:
        jacobi_eigh(A + A.T, max_sweeps=1)
    assert info.value.off_norm > 0


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 8).map(lambda n: (n, n)), elements=st.floats(-10, 10)))
def test_jacobi_against_numpy(A):
    S = (A + A.T) / 2
    vals, vecs = jacobi_eigh(S)
    assert np.allclose(vals, np.sort(np.linalg.eigvalsh(S))[::-1], atol=1e-9)
    assert np.allclose(vecs.T @ vecs, np.eye(S.shape[0]), atol=1e-10)
    assert np.allclose(S @ vecs, vecs * vals, atol=1e-8)


def test_orient():
    out = orient(np.array([[0.1, -0.9], [0.6, 0.2]]))
    assert out.tolist() == [[-0.1, 0.9], [0.6, 0.2]]


# --- PCA ---------------------------------------------------------------------------


def test_isotropic_eigenvalues():
    # the four corners of a square have identity covariance
    X = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    assert np.allclose(pca_fit(X, 2).eigenvalues, [1.0, 1.0])


def test_line_y_equals_x():
    t = np.linspace(-2, 3, 9)
    model = pca_fit(np.column_stack([t, t]), 2)
    assert np.allclose(model.components[0], [2**-0.5, 2**-0.5])
    assert model.eigenvalues[1] == pytest.approx(0.0, abs=1e-12)


def test_covariance_divisor_n():
    X = np.random.default_rng(1).random((10, 3))
    assert np.allclose(covariance(X), np.cov(X.T, bias=True))


@pytest.mark.parametrize("k", [0, 5])
def test_pca_k_range(k):
    with pytest.raises(BaselineError):
        pca_fit(np.random.default_rng(0).random((5, 4)), k)


def test_pca_transform_cases():
    X = np.random.default_rng(2).normal(size=(20, 4))
    model = pca_fit(X, 4)
    assert np.allclose(pca_transform(model, X.mean(axis=0)), 0)
    Y = pca_transform(model, X)
    d = lambda A: np.linalg.norm(A[:, None] - A[None], axis=-1)
    assert np.allclose(d(X), d(Y), atol=1e-8)
    assert np.array_equal(pca_transform(model, X[:1]), pca_transform(model, X[:1]))
    assert np.abs(Y @ model.components + model.mean - X).max() < 1e-8
    with pytest.raises(BaselineError):
        pca_transform(model, np.ones((2, 3)))


def test_pca_sign_convention():
    X = np.random.default_rng(3).normal(size=(30, 5))
    for row in pca_fit(X, 5).components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_round_trip_dict():
    model = pca_fit(np.random.default_rng(4).random((10, 3)), 2)
    back = PcaModel.from_dict(model.to_dict())
    X = np.random.default_rng(5).random((4, 3))
    assert np.array_equal(pca_transform(back, X), pca_transform(model, X))


def test_pca_all_datasets(datasets):
    for ds in datasets.values():
        X = prepare(ds, 0).X_train
        m = X.shape[1]
        model = pca_fit(X, m)
        S = covariance(X)
        V = model.components
        assert np.abs(V @ V.T - np.eye(m)).max() < 1e-10
        for v, lam in zip(V, model.eigenvalues):
            assert np.linalg.norm(S @ v - lam * v) < 1e-8
        assert abs(model.eigenvalues.sum() - np.trace(S)) < 1e-8
        assert np.all(np.diff(model.eigenvalues) <= 0) and model.eigenvalues.min() >= -1e-10


# --- LDA -----------------------------------------------------------------------------


def test_lda_two_clusters():
    X = np.array([[0.0], [0.1], [0.9], [1.0]])
    y = np.array([0, 0, 1, 1])
    model = lda_fit(X, y)
    z = lda_transform(model, X).ravel()
    lo, hi = sorted([z[:2], z[2:]], key=lambda a: a.mean())
    assert lo.max() < hi.min()


def test_lda_two_classes_gives_one_direction():
    X = np.random.default_rng(0).normal(size=(20, 4))
    y = np.arange(20) % 2
    assert lda_fit(X, y).n_components == 1
    with pytest.raises(BaselineError):
        lda_fit(X, y, k=2)


def test_lda_equal_means_uninformative():
    X = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.2], [0.5, 0.2]])
    y = np.array([0, 0, 1, 1, 0, 1])
    model = lda_fit(X, y)
    assert np.allclose(model.eigenvalues, 0, atol=1e-10)
    assert np.isfinite(model.projection).all()


def test_lda_transform_cases():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 3))
    y = np.arange(30) % 3
    model = lda_fit(X, y, k=2)
    assert np.allclose(lda_transform(model, X.mean(axis=0)), 0)
    assert np.array_equal(lda_transform(model, X[:2]), lda_transform(model, X[:2]))
    with pytest.raises(BaselineError):
        lda_transform(model, np.ones((1, 4)))
    back = LdaModel.from_dict(model.to_dict())
    assert np.array_equal(lda_transform(back, X), lda_transform(model, X))


def test_lda_regularization_value():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(40, 3))
    y = np.arange(40) % 2
    model = lda_fit(X, y)
    Sw = sum(((X[y == c] - X[y == c].mean(0)).T @ (X[y == c] - X[y == c].mean(0))) for c in (0, 1)) / 40
    assert model.regularization == pytest.approx(1e-6 * np.trace(Sw) / 3)


def test_lda_never_nan(datasets):
    for ds in datasets.values():
        for seed in range(3):
            p = prepare(ds, seed)
            model = lda_fit(p.X_train, p.y_train, n_classes=ds.n_classes)
            assert np.isfinite(lda_transform(model, p.X_test)).all()
            assert np.isfinite(model.eigenvalues).all()
