"""scikit-learn style wrapper for the pointwise boundary functionals."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import geometry
from .sphere import build_sphere_quadrature

FEATURES = ("d", "D", "inv_M_alpha", "convex_bound", "inv_m_alpha")


class BoundaryWeightTransformer(TransformerMixin, BaseEstimator):
    """Map points of a domain to ``[d, D, 1/M_alpha^alpha, convex bound, 1/m_alpha^alpha]``.

    ``D`` and the convex bound are NaN on non-convex domains. ``fit`` only
    validates the input and builds the sphere quadrature.
    """

    def __init__(self, domain=None, alpha=1.5, sphere_resolution=None):
        self.domain = domain
        self.alpha = alpha
        self.sphere_resolution = sphere_resolution

    def fit(self, X, y=None):
        if self.domain is None:
            raise ValueError("BoundaryWeightTransformer needs a domain")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.domain.n:
            raise ValueError(f"expected {self.domain.n} features, got {X.shape[1]}")
        self.domain.require_inside(X)
        res = self.sphere_resolution or geometry.DEFAULT_RESOLUTION[self.domain.n]
        self.quadrature_ = build_sphere_quadrature(self.domain.n, res)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "quadrature_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        dom, a, quad = self.domain, self.alpha, self.quadrature_
        out = np.full((X.shape[0], len(FEATURES)), np.nan)
        out[:, 0] = dom.dist_to_boundary(X)
        out[:, 2] = geometry.m_weight(dom, X, a, quad, two_sided=True)
        out[:, 4] = geometry.m_weight(dom, X, a, quad, two_sided=False)
        if dom.convex:
            out[:, 1] = dom.width(X)
            out[:, 3] = geometry.convex_weight(dom, X, a)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)
