import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from frachardy import Ball, Box, IntervalUnion, OutsideDomainError
from frachardy.estimators import FEATURES, BoundaryWeightTransformer


def test_transform_columns_square():
    X = np.array([[0.3, 0.2], [0.5, 0.5], [0.9, 0.1]])
    est = BoundaryWeightTransformer(Box([0, 0], [1, 1]), alpha=1.5).fit(X)
    out = est.transform(X)
    assert out.shape == (3, len(FEATURES))
    assert out[:, 0] == pytest.approx([0.2, 0.5, 0.1])
    assert out[:, 1] == pytest.approx([1.0, 1.0, 1.0])
    assert np.all(out[:, 2] >= out[:, 3] * (1 - 1e-6))
    assert list(est.get_feature_names_out()) == list(FEATURES)


def test_nonconvex_domain_gives_nan_columns():
    X = np.array([[0.5], [2.9]])
    out = BoundaryWeightTransformer(IntervalUnion([(0, 1), (2, 3)]), alpha=1.5).fit_transform(X)
    assert np.all(np.isnan(out[:, 1])) and np.all(np.isnan(out[:, 3]))
    assert out[:, 0] == pytest.approx([0.5, 0.1])


def test_sklearn_protocol():
    est = BoundaryWeightTransformer(Ball([0, 0], 1.0), alpha=1.25, sphere_resolution=256)
    twin = clone(est)
    assert twin.domain.to_dict() == est.domain.to_dict()
    assert (twin.alpha, twin.sphere_resolution) == (1.25, 256)
    with pytest.raises(NotFittedError):
        est.transform([[0.0, 0.0]])
    pipe = make_pipeline(est, FunctionTransformer(np.log))
    out = pipe.fit_transform(np.array([[0.1, 0.2], [-0.3, 0.4]]))
    assert np.all(np.isfinite(out))


def test_input_validation():
    est = BoundaryWeightTransformer(Box([0, 0], [1, 1]))
    with pytest.raises(ValueError):
        est.fit(np.zeros((2, 3)))
    with pytest.raises(OutsideDomainError):
        est.fit([[1.5, 0.5]])
    with pytest.raises(ValueError):
        BoundaryWeightTransformer().fit([[0.5, 0.5]])
