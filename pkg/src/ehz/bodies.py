"""Convex bodies represented through their support functions.

A body is an immutable descriptor tree.  Leaves (balls, ellipsoids,
polytopes) know their support function h_K(u) = sup_{x in K} <x, u> in
closed form; composite nodes (p-sums, Minkowski combinations, linear
images, translates, scalings, smoothed polytopes) compose the children's
support values and support points by the standard rules.  The gradient of
h_K at a smooth direction is the support point, i.e. the boundary point
where the supremum is attained.

Gauges ||x||_K = inf{r > 0 : x/r in K} are served analytically whenever a
polar descriptor exists (ellipsoidal families and their linear images and
scalings) and otherwise by maximizing <x, u>/h_K(u) over directions, which
equals the gauge by polarity.

All evaluation entry points are batched over rows so that samplers and the
capacity solver can amortize the tree walk.
"""

from __future__ import annotations

import hashlib
import math
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .optimize import batched_descent
from .symplectic import DimensionError, check_even_dim


class BodyError(ValueError):
    """Invalid body construction (dimension mismatch, origin not interior, ...)."""


def _even_dim(dim: int) -> int:
    try:
        return check_even_dim(dim)
    except DimensionError as e:
        raise BodyError(str(e)) from None


@dataclass
class SupportEval:
    """Support value h_K(u), a support point, and whether it is a true gradient."""

    value: float
    gradient: np.ndarray
    smooth: bool


@dataclass
class GaugeEval:
    """Gauge value with its gradient and the evaluation route taken."""

    value: float
    gradient: np.ndarray
    analytic: bool
    tol: float


def _as_matrix(x, name: str) -> np.ndarray:
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise BodyError(f"{name} must be a 2-d array, got shape {m.shape}")
    return m


class ConvexBody:
    """Base class; subclasses set `dim` and implement `support_batch`."""

    dim: int

    # -- evaluation ---------------------------------------------------------

    def support_batch(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Support values (B,) and support points (B, dim) for directions U."""
        raise NotImplementedError

    def support(self, u: np.ndarray) -> SupportEval:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise BodyError(f"direction has shape {u.shape}, body dimension is {self.dim}")
        if not np.any(u):
            raise BodyError("support direction must be nonzero")
        vals, grads = self.support_batch(u[None, :])
        return SupportEval(float(vals[0]), grads[0], self._smooth_at(u))

    def _smooth_at(self, u: np.ndarray) -> bool:
        return self.is_smooth

    @property
    def is_smooth(self) -> bool:
        return True

    # -- polarity and gauge -------------------------------------------------

    def polar(self) -> "ConvexBody | None":
        """Analytic polar body, or None when only iterative gauges exist."""
        return None

    def gauge_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool, float]:
        """Gauge values and gradients for points X; returns (vals, grads, analytic, tol)."""
        X = np.asarray(X, dtype=float)
        polar = self.polar()
        norms = np.linalg.norm(X, axis=1)
        nz = norms > 0
        vals = np.zeros(X.shape[0])
        grads = np.zeros_like(X)
        if polar is not None:
            if np.any(nz):
                v, g = polar.support_batch(X[nz])
                vals[nz] = v
                grads[nz] = g
            return vals, grads, True, 0.0
        tol = 0.0
        if np.any(nz):
            v, g, tol = _gauge_by_dual_ascent(self, X[nz])
            vals[nz] = v
            grads[nz] = g
        return vals, grads, False, tol

    def gauge(self, x: np.ndarray) -> float:
        return self.gauge_eval(x).value

    def gauge_eval(self, x: np.ndarray) -> GaugeEval:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise BodyError(f"point has shape {x.shape}, body dimension is {self.dim}")
        vals, grads, analytic, tol = self.gauge_batch(x[None, :])
        return GaugeEval(float(vals[0]), grads[0], analytic, tol)

    # -- plumbing ------------------------------------------------------------

    def recipe(self) -> dict:
        raise NotImplementedError

    def content_hash(self) -> str:
        blob = json.dumps(self.recipe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(dim={self.dim})"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Ball(ConvexBody):
    """Euclidean ball of given radius centered at the origin."""

    def __init__(self, radius: float, dim: int):
        if radius <= 0:
            raise BodyError(f"ball radius must be positive, got {radius}")
        _even_dim(dim)
        self.radius = float(radius)
        self.dim = int(dim)

    def support_batch(self, U):
        norms = np.linalg.norm(U, axis=1)
        vals = self.radius * norms
        with np.errstate(invalid="ignore", divide="ignore"):
            grads = np.where(norms[:, None] > 0, self.radius * U / norms[:, None], 0.0)
        return vals, grads

    def polar(self):
        return Ball(1.0 / self.radius, self.dim)

    def recipe(self):
        return {"type": "ball", "r": self.radius, "dim": self.dim}


class Ellipsoid(ConvexBody):
    """Symplectic ellipsoid sum_i (x_i^2 + y_i^2) / r_i^2 <= 1, radii ascending."""

    def __init__(self, radii):
        radii = np.asarray(radii, dtype=float)
        if radii.ndim != 1 or radii.size == 0:
            raise BodyError("radii must be a non-empty 1-d sequence")
        if np.any(radii <= 0):
            raise BodyError("ellipsoid radii must be positive")
        self.radii = _freeze(np.sort(radii))
        self.dim = 2 * radii.size
        # per-coordinate squared radii, interleaved (r_1^2, r_1^2, r_2^2, ...)
        self._d2 = _freeze(np.repeat(self.radii**2, 2))

    def support_batch(self, U):
        q = U * self._d2
        vals = np.sqrt(np.sum(U * q, axis=1))
        with np.errstate(invalid="ignore", divide="ignore"):
            grads = np.where(vals[:, None] > 0, q / vals[:, None], 0.0)
        return vals, grads

    def polar(self):
        return GeneralEllipsoid(np.diag(1.0 / self._d2))

    def recipe(self):
        return {"type": "ellipsoid", "radii": self.radii.tolist()}


class GeneralEllipsoid(ConvexBody):
    """Ellipsoid {x : x^T Q^{-1} x <= 1} for symmetric positive definite Q."""

    def __init__(self, Q):
        Q = _as_matrix(Q, "Q")
        if Q.shape[0] != Q.shape[1]:
            raise BodyError(f"Q must be square, got shape {Q.shape}")
        _even_dim(Q.shape[0])
        if not np.allclose(Q, Q.T, rtol=1e-10, atol=1e-12):
            raise BodyError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            raise BodyError("Q must be positive definite") from None
        self.Q = _freeze(Q)
        self.dim = Q.shape[0]

    def support_batch(self, U):
        q = U @ self.Q
        vals = np.sqrt(np.maximum(np.sum(U * q, axis=1), 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            grads = np.where(vals[:, None] > 0, q / vals[:, None], 0.0)
        return vals, grads

    def polar(self):
        Qinv = np.linalg.inv(self.Q)
        return GeneralEllipsoid(0.5 * (Qinv + Qinv.T))

    def recipe(self):
        return {"type": "general_ellipsoid", "Q": self.Q.tolist()}


class Polytope(ConvexBody):
    """Convex hull of a vertex list; support picks the lowest-index maximizer."""

    def __init__(self, vertices):
        V = _as_matrix(vertices, "vertices")
        _even_dim(V.shape[1])
        if V.shape[0] < V.shape[1] + 1:
            raise BodyError("a full-dimensional polytope needs at least dim+1 vertices")
        if np.linalg.matrix_rank(V - V[0], tol=1e-10) < V.shape[1]:
            raise BodyError("polytope is degenerate (vertices span a lower-dimensional set)")
        self.vertices = _freeze(V)
        self.dim = V.shape[1]
        if not self._origin_interior():
            raise BodyError("origin is not strictly inside the polytope")

    def _origin_interior(self) -> bool:
        # max eps s.t. sum lam_i v_i = 0, sum lam_i = 1, lam_i >= eps
        m = self.vertices.shape[0]
        A_eq = np.vstack([self.vertices.T, np.ones(m)])
        b_eq = np.zeros(self.dim + 1)
        b_eq[-1] = 1.0
        c = np.zeros(m + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m),
                      A_eq=np.hstack([A_eq, np.zeros((self.dim + 1, 1))]), b_eq=b_eq,
                      bounds=[(None, None)] * m + [(None, None)], method="highs")
        return bool(res.status == 0 and -res.fun > 1e-12)

    def support_batch(self, U):
        R = U @ self.vertices.T
        idx = np.argmax(R, axis=1)
        vals = R[np.arange(R.shape[0]), idx]
        grads = self.vertices[idx]
        return vals, grads

    @property
    def is_smooth(self) -> bool:
        return False

    def _smooth_at(self, u) -> bool:
        R = self.vertices @ u
        top = np.max(R)
        return int(np.sum(R >= top - 1e-12 * max(abs(top), 1.0))) == 1

    def recipe(self):
        return {"type": "polytope", "vertices": self.vertices.tolist()}


class PSum(ConvexBody):
    """Firey p-sum: support function (sum_i h_i^p)^{1/p}, p >= 1."""

    def __init__(self, p: float, terms):
        if p < 1:
            raise BodyError(f"p-sum exponent must be >= 1, got {p}")
        terms = tuple(terms)
        if len(terms) < 2:
            raise BodyError("p-sum needs at least two terms")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise BodyError(f"p-sum terms have inconsistent dimensions {sorted(dims)}")
        self.p = float(p)
        self.terms = terms
        self.dim = terms[0].dim

    def support_batch(self, U):
        vals_k = []
        grads_k = []
        for t in self.terms:
            v, g = t.support_batch(U)
            vals_k.append(v)
            grads_k.append(g)
        V = np.stack(vals_k)  # (k, B)
        if self.p == 1.0:
            vals = np.sum(V, axis=0)
            grads = np.sum(np.stack(grads_k), axis=0)
            return vals, grads
        vmax = np.max(V, axis=0)
        safe = np.where(vmax > 0, vmax, 1.0)
        vals = safe * np.sum((V / safe) ** self.p, axis=0) ** (1.0 / self.p)
        vals = np.where(vmax > 0, vals, 0.0)
        ratios = np.where(vals > 0, V / np.where(vals > 0, vals, 1.0), 0.0)
        w = ratios ** (self.p - 1.0)  # (k, B)
        grads = np.einsum("kb,kbd->bd", w, np.stack(grads_k))
        return vals, grads

    @property
    def is_smooth(self) -> bool:
        return all(t.is_smooth for t in self.terms)

    def _smooth_at(self, u) -> bool:
        return all(t._smooth_at(u) for t in self.terms)

    def recipe(self):
        return {"type": "psum", "p": self.p, "terms": [t.recipe() for t in self.terms]}


class MinkowskiSum(ConvexBody):
    """Weighted Minkowski combination sum_i w_i K_i with w_i >= 0."""

    def __init__(self, terms, weights=None):
        terms = tuple(terms)
        if not terms:
            raise BodyError("Minkowski sum needs at least one term")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise BodyError(f"Minkowski terms have inconsistent dimensions {sorted(dims)}")
        if weights is None:
            weights = np.ones(len(terms))
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(terms),):
            raise BodyError("need exactly one weight per term")
        if np.any(weights < 0) or not np.any(weights > 0):
            raise BodyError("weights must be nonnegative with at least one positive")
        self.terms = terms
        self.weights = _freeze(weights)
        self.dim = terms[0].dim

    def support_batch(self, U):
        vals = np.zeros(U.shape[0])
        grads = np.zeros_like(U)
        for w, t in zip(self.weights, self.terms):
            if w == 0:
                continue
            v, g = t.support_batch(U)
            vals += w * v
            grads += w * g
        return vals, grads

    @property
    def is_smooth(self) -> bool:
        return all(t.is_smooth for w, t in zip(self.weights, self.terms) if w > 0)

    def _smooth_at(self, u) -> bool:
        return all(t._smooth_at(u) for w, t in zip(self.weights, self.terms) if w > 0)

    def recipe(self):
        return {"type": "minkowski", "terms": [t.recipe() for t in self.terms],
                "weights": self.weights.tolist()}


class LinearImage(ConvexBody):
    """Image A K of a body under an invertible matrix: h_{AK}(u) = h_K(A^T u)."""

    def __init__(self, matrix, body: ConvexBody):
        A = _as_matrix(matrix, "matrix")
        if A.shape != (body.dim, body.dim):
            raise BodyError(f"matrix shape {A.shape} does not match body dimension {body.dim}")
        if abs(np.linalg.det(A)) < 1e-12:
            raise BodyError("matrix must be invertible")
        self.matrix = _freeze(A)
        self.body = body
        self.dim = body.dim

    def support_batch(self, U):
        v, g = self.body.support_batch(U @ self.matrix)
        return v, g @ self.matrix.T

    @property
    def is_smooth(self) -> bool:
        return self.body.is_smooth

    def _smooth_at(self, u) -> bool:
        return self.body._smooth_at(self.matrix.T @ u)

    def polar(self):
        inner = self.body.polar()
        if inner is None:
            return None
        return LinearImage(np.linalg.inv(self.matrix).T, inner)

    def recipe(self):
        return {"type": "linear", "matrix": self.matrix.tolist(), "body": self.body.recipe()}


class Translate(ConvexBody):
    """Translated body K + x0: h(u) = h_K(u) + <x0, u>."""

    def __init__(self, vector, body: ConvexBody):
        x0 = np.asarray(vector, dtype=float)
        if x0.shape != (body.dim,):
            raise BodyError(f"translation vector has shape {x0.shape}, body dimension {body.dim}")
        self.vector = _freeze(x0)
        self.body = body
        self.dim = body.dim

    def support_batch(self, U):
        v, g = self.body.support_batch(U)
        return v + U @ self.vector, g + self.vector

    @property
    def is_smooth(self) -> bool:
        return self.body.is_smooth

    def _smooth_at(self, u) -> bool:
        return self.body._smooth_at(u)

    def recipe(self):
        return {"type": "translate", "vector": self.vector.tolist(), "body": self.body.recipe()}


class Scale(ConvexBody):
    """Dilated body s K for s > 0."""

    def __init__(self, factor: float, body: ConvexBody):
        if factor <= 0:
            raise BodyError(f"scale factor must be positive, got {factor}")
        self.factor = float(factor)
        self.body = body
        self.dim = body.dim

    def support_batch(self, U):
        v, g = self.body.support_batch(U)
        return self.factor * v, self.factor * g

    @property
    def is_smooth(self) -> bool:
        return self.body.is_smooth

    def _smooth_at(self, u) -> bool:
        return self.body._smooth_at(u)

    def polar(self):
        inner = self.body.polar()
        if inner is None:
            return None
        return Scale(1.0 / self.factor, inner)

    def recipe(self):
        return {"type": "scale", "factor": self.factor, "body": self.body.recipe()}


class Smoothed(ConvexBody):
    """Smooth outer approximation of a polytope.

    Replaces max_i <v_i, u> by (sum_i max(<v_i, u>, 0)^s)^{1/s}.  The result
    is 1-homogeneous, convex, smooth away from the origin, and shrinks to
    the polytope as the sharpness s grows (the overshoot is at most a factor
    m^{1/s} for m vertices).
    """

    def __init__(self, body: ConvexBody, sharpness: float = 64.0):
        if sharpness <= 1:
            raise BodyError(f"sharpness must exceed 1, got {sharpness}")
        if not isinstance(body, Polytope):
            raise BodyError("Smoothed wraps a Polytope")
        self.body = body
        self.sharpness = float(sharpness)
        self.dim = body.dim

    def support_batch(self, U):
        s = self.sharpness
        V = self.body.vertices
        R = np.maximum(U @ V.T, 0.0)  # (B, m)
        rmax = np.max(R, axis=1)
        safe = np.where(rmax > 0, rmax, 1.0)
        ratio = R / safe[:, None]
        # ratios below cut contribute < 1e-19 relative to the l^s sum; the
        # masked exp/log evaluation skips the (dominant) power cost on them
        cut = math.exp(-46.0 / s)
        rows, cols = np.nonzero(ratio > cut)
        logr = np.log(ratio[rows, cols])
        P = np.zeros_like(R)
        P[rows, cols] = np.exp(s * logr)
        S = np.sum(P, axis=1)
        logS = np.log(np.where(S > 0, S, 1.0))
        vals = np.where(rmax > 0, safe * np.exp(logS / s), 0.0)
        W = np.zeros_like(R)
        W[rows, cols] = np.exp((s - 1.0) * logr - ((s - 1.0) / s) * logS[rows])
        grads = W @ V
        return vals, grads

    def recipe(self):
        return {"type": "smoothed", "sharpness": self.sharpness, "body": self.body.recipe()}


# ---------------------------------------------------------------------------
# iterative gauge and infimal convolution
# ---------------------------------------------------------------------------


def _gauge_by_dual_ascent(body: ConvexBody, X: np.ndarray, restarts: int = 3,
                          max_iter: int = 300) -> tuple[np.ndarray, np.ndarray, float]:
    """Gauge by maximizing <x, u>/h(u) over the direction sphere.

    By polarity the maximum equals ||x||_K and the maximizer u* yields the
    gauge gradient u*/h(u*).  Multiple deterministic starts guard against
    flat ridges on composite bodies.
    """
    B, d = X.shape
    norms = np.linalg.norm(X, axis=1)
    base = X / norms[:, None]
    rng = np.random.default_rng(12345)
    starts = [base]
    for _ in range(restarts - 1):
        jitter = rng.normal(size=(B, d))
        cand = base + 0.3 * jitter
        cand /= np.linalg.norm(cand, axis=1)[:, None]
        flip = np.sum(cand * base, axis=1) < 0
        cand[flip] = -cand[flip]
        starts.append(cand)
    U0 = np.vstack(starts)
    Xrep = np.tile(X, (restarts, 1))

    def neg_log_ratio(U):
        dots = np.sum(Xrep * U, axis=1)
        h, grad_h = body.support_batch(U)
        bad = (dots <= 0) | (h <= 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = -(np.log(dots) - np.log(h))
            g = -(Xrep / dots[:, None] - grad_h / h[:, None])
        f = np.where(bad, np.inf, f)
        g = np.where(bad[:, None], 0.0, g)
        return f, g

    def renorm(U):
        n = np.linalg.norm(U, axis=1)
        return U / np.where(n > 0, n, 1.0)[:, None]

    u1, f1 = batched_descent(neg_log_ratio, U0, max_iter=max_iter // 2,
                             grad_tol=1e-13, project=renorm)
    best_u, best_f = batched_descent(neg_log_ratio, u1, max_iter=max_iter // 2,
                                     grad_tol=1e-13, step0=0.02, project=renorm)
    F = best_f.reshape(restarts, B)
    Ustar = best_u.reshape(restarts, B, d)
    pick = np.argmin(F, axis=0)
    ustar = Ustar[pick, np.arange(B)]
    h, _ = body.support_batch(ustar)
    vals = np.sum(X * ustar, axis=1) / h
    grads = ustar / h[:, None]
    # achieved tolerance: relative improvement still seen in the second phase
    improve = (f1 - best_f).reshape(restarts, B)[pick, np.arange(B)]
    tol = float(max(np.max(improve, initial=0.0), 1e-14))
    return vals, grads, tol


@dataclass
class InfimalConvolution:
    """Result of a directional support query on an intersection."""

    value: float
    split: np.ndarray
    gap: float
    converged: bool


def intersection_support_batch(K: ConvexBody, T: ConvexBody, U: np.ndarray,
                               tol: float = 1e-9, max_iter: int = 400
                               ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Support of K cap T at each row of U via infimal convolution.

    h_{K cap T}(u) = inf_{w} h_K(w) + h_T(u - w).  The objective is convex
    in the split variable w; descent runs from w in {eps*u, u/2, (1-eps)*u}
    (the endpoints are nudged off the support-function kinks at 0) and the
    exact endpoint values h_T(u), h_K(u) join the final minimum.

    Returns (values, splits, gaps, converged) where `gaps` estimates the
    residual decrease still available and `splits` the minimizing w.
    """
    if K.dim != T.dim:
        raise BodyError(f"dimension mismatch: {K.dim} vs {T.dim}")
    U = np.asarray(U, dtype=float)
    B, d = U.shape
    eps = 1e-6
    W0 = np.vstack([eps * U, 0.5 * U, (1 - eps) * U])
    Urep = np.tile(U, (3, 1))

    def fg(W):
        vK, gK = K.support_batch(W)
        vT, gT = T.support_batch(Urep - W)
        return vK + vT, gK - gT

    scale = np.linalg.norm(U, axis=1)
    w1, f1 = batched_descent(fg, W0, max_iter=max_iter // 2, grad_tol=1e-13,
                             step0=0.25)
    w2, f2 = batched_descent(fg, w1, max_iter=max_iter - max_iter // 2,
                             grad_tol=1e-13, step0=0.05)
    improve = (f1 - f2).reshape(3, B)
    F = f2.reshape(3, B)
    Wopt = w2.reshape(3, B, d)
    pick = np.argmin(F, axis=0)
    vals = F[pick, np.arange(B)]
    splits = Wopt[pick, np.arange(B)]
    gaps = improve[pick, np.arange(B)]

    # exact endpoint candidates: w = 0 gives h_T(u), w = u gives h_K(u)
    vK_end, _ = K.support_batch(U)
    vT_end, _ = T.support_batch(U)
    for v_end, w_end in ((vT_end, np.zeros_like(U)), (vK_end, U)):
        better = v_end < vals
        vals = np.where(better, v_end, vals)
        splits = np.where(better[:, None], w_end, splits)
        gaps = np.where(better, 0.0, gaps)

    converged = gaps <= np.maximum(tol, 1e-12) * np.maximum(scale, 1.0)
    return vals, splits, gaps, converged


def intersection_support(K: ConvexBody, T: ConvexBody, u: np.ndarray,
                         tol: float = 1e-9, max_iter: int = 400) -> InfimalConvolution:
    """Single-direction wrapper around `intersection_support_batch`."""
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise BodyError("support direction must be nonzero")
    vals, splits, gaps, conv = intersection_support_batch(K, T, u[None, :],
                                                          tol=tol, max_iter=max_iter)
    return InfimalConvolution(float(vals[0]), splits[0], float(gaps[0]), bool(conv[0]))


# ---------------------------------------------------------------------------
# recipe documents
# ---------------------------------------------------------------------------

_LEAF_KEYS = {
    "ball": {"r", "dim"},
    "ellipsoid": {"radii"},
    "general_ellipsoid": {"Q"},
    "polytope": {"vertices"},
}


def build_body(document: dict, path: str = "body") -> ConvexBody:
    """Validate a recipe document and build the immutable descriptor tree.

    Raises BodyError with the offending field path on malformed input.
    """
    if not isinstance(document, dict):
        raise BodyError(f"{path}: expected an object, got {type(document).__name__}")
    if "type" not in document:
        raise BodyError(f"{path}: missing 'type' field")
    kind = document["type"]

    def need(field):
        if field not in document:
            raise BodyError(f"{path}: '{kind}' requires field '{field}'")
        return document[field]

    try:
        if kind == "ball":
            return Ball(float(need("r")), int(need("dim")))
        if kind == "ellipsoid":
            return Ellipsoid(need("radii"))
        if kind == "general_ellipsoid":
            return GeneralEllipsoid(need("Q"))
        if kind == "polytope":
            return Polytope(need("vertices"))
        if kind == "psum":
            terms = [build_body(t, f"{path}.terms[{i}]") for i, t in enumerate(need("terms"))]
            return PSum(float(need("p")), terms)
        if kind == "minkowski":
            terms = [build_body(t, f"{path}.terms[{i}]") for i, t in enumerate(need("terms"))]
            weights = document.get("weights")
            return MinkowskiSum(terms, weights)
        if kind == "linear":
            return LinearImage(need("matrix"), build_body(need("body"), f"{path}.body"))
        if kind == "translate":
            return Translate(need("vector"), build_body(need("body"), f"{path}.body"))
        if kind == "scale":
            return Scale(float(need("factor")), build_body(need("body"), f"{path}.body"))
        if kind == "smoothed":
            return Smoothed(build_body(need("body"), f"{path}.body"),
                            float(document.get("sharpness", 64.0)))
    except BodyError as e:
        msg = str(e)
        if not msg.startswith(path):
            raise BodyError(f"{path}: {msg}") from None
        raise
    raise BodyError(f"{path}: unknown body type '{kind}'")
