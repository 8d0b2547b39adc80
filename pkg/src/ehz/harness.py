"""Numerical checks of the capacity inequalities and their corollaries.

Every check returns an `InequalityReport` with the convention that the
signed deficit is (favored side) - (other side), so `passed` is exactly
`deficit >= -slack`.  Slacks default to 1e-3 relative for solver-vs-solver
comparisons and 1e-6 for analytic-vs-analytic ones; computed capacities are
restricted minima over the Fourier subspace and hence upper bounds, which
the slack absorbs.

The central inequality is superadditivity of c^{p/2} under p-sums,

    c(K +_p T)^{p/2} >= c(K)^{p/2} + c(T)^{p/2},

with equality exactly when K and T have homothetic minimal-action
characteristics; the isoperimetric, directional-derivative, mean-width and
intersection checks are its corollaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import (Ball, ConvexBody, Ellipsoid, GeneralEllipsoid, LinearImage,
                     MinkowskiSum, Polytope, PSum, Scale, Smoothed, Translate)
from .loops import length_in_gauge
from .solver import CapacityResult, SolveConfig, capacity


class HarnessError(RuntimeError):
    pass


class AsymmetricBodyError(HarnessError):
    """Mean-width requires a centrally symmetric body."""


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    deficit: float
    slack: float
    passed: bool
    witnesses: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def all_ok(self) -> bool:
        """The deficit test together with any auxiliary witness conditions
        (chain bounds, monotonicity); `passed` itself stays a pure function
        of (deficit, slack)."""
        aux = ("chain_ok", "monotone", "sqrt_upper_ok")
        return self.passed and all(bool(self.witnesses[k]) for k in aux
                                   if k in self.witnesses)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "lhs": self.lhs, "rhs": self.rhs,
            "deficit": self.deficit, "slack": self.slack, "passed": self.passed,
            "all_ok": self.all_ok(), "witnesses": self.witnesses, "meta": self.meta,
        }

    def csv_row(self) -> list:
        return [self.name, self.lhs, self.rhs, self.deficit, self.passed]


def _report(name, lhs, rhs, deficit, slack, witnesses, meta) -> InequalityReport:
    return InequalityReport(name=name, lhs=float(lhs), rhs=float(rhs),
                            deficit=float(deficit), slack=float(slack),
                            passed=bool(deficit >= -slack),
                            witnesses=witnesses, meta=meta)


def p_combination(K: ConvexBody, T: ConvexBody, p: float) -> ConvexBody:
    """K +_p T; the Minkowski sum for p = 1, the Firey p-sum otherwise."""
    if p < 1:
        raise HarnessError(f"p-sum exponent must be >= 1, got {p}")
    if p == 1.0:
        return MinkowskiSum([K, T])
    return PSum(p, [K, T])


def _meta(cfg: SolveConfig, **extra) -> dict:
    return {"p": cfg.p, "modes": cfg.modes, "starts": cfg.starts,
            "seed": cfg.seed, **extra}


# ---------------------------------------------------------------------------
# Brunn-Minkowski style checks
# ---------------------------------------------------------------------------


def bm_check(K: ConvexBody, T: ConvexBody, p: float, cfg: SolveConfig | None = None,
             slack_rel: float = 1e-3) -> InequalityReport:
    """Superadditivity of c^{p/2} under the p-sum of K and T."""
    cfg = cfg or SolveConfig()
    r_K = capacity(K, cfg)
    r_T = capacity(T, cfg)
    r_KT = capacity(p_combination(K, T, p), cfg)
    half_p = 0.5 * p
    lhs = r_KT.capacity**half_p
    rhs = r_K.capacity**half_p + r_T.capacity**half_p
    slack = slack_rel * abs(rhs)
    witnesses = {
        "c_K": r_K.capacity, "c_T": r_T.capacity, "c_combined": r_KT.capacity,
        "converged": r_K.converged and r_T.converged and r_KT.converged,
        "worst_certificate": max(r.certificates.worst() for r in (r_K, r_T, r_KT)),
    }
    return _report("bm", lhs, rhs, lhs - rhs, slack, witnesses, _meta(cfg, sum_p=p))


def _area_clock(carrier, N: int = 256, iters: int = 40):
    """Reparametrize a closed curve so the symplectic area sweep about its
    center is uniform in time, with the center fixed so that it equals the
    time-mean of the reclocked curve.

    This normalization is covariant under homothety (l -> alpha l + beta
    maps fixed points to fixed points), unlike the characteristic clock,
    whose speed profile depends on the gauge and is not
    translation-covariant.  Homothetic carriers become pointwise comparable
    after it.
    """
    from .loops import resample_by_clock
    from .symplectic import apply_J
    g = carrier.sample(N)
    center = g.z.mean(axis=0)
    clocked = carrier
    for _ in range(iters):
        speed = np.sum(apply_J(g.z - center) * g.dz, axis=1)
        clocked = resample_by_clock(carrier, speed, modes=carrier.loop.modes)
        new_center = clocked.sample(N).z.mean(axis=0)
        if np.linalg.norm(new_center - center) <= 1e-13 * (1 + np.linalg.norm(center)):
            break
        center = new_center
    return clocked


def _phase_aligned_residual(l_K, l_T, alpha: float, N: int = 256) -> tuple[float, float]:
    """min over phase of ||l_T - alpha l_K(.+phi) - beta|| / ||l_T centered||.

    Carriers are defined up to a time shift; beta is fixed by the offsets.
    Returns (relative residual, best phase).
    """
    t = 2 * np.pi * np.arange(N) / N
    target = l_T.loop.evaluate(t)
    scale = max(float(np.linalg.norm(target) / math.sqrt(N)), 1e-300)
    # coarse scan then golden-section refinement on the best bracket
    phis = 2 * np.pi * np.arange(720) / 720

    def resid(phi):
        probe = alpha * l_K.loop.evaluate(t + phi)
        return float(np.linalg.norm(probe - target) / math.sqrt(N)) / scale

    vals = [resid(p) for p in phis]
    i0 = int(np.argmin(vals))
    a = phis[i0] - 2 * np.pi / 720
    b = phis[i0] + 2 * np.pi / 720
    gr = (math.sqrt(5) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = resid(c), resid(d)
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = resid(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = resid(d)
    phi = 0.5 * (a + b)
    return resid(phi), phi


def equality_certificate(K: ConvexBody, T: ConvexBody, p: float,
                         cfg: SolveConfig | None = None,
                         tol: float = 1e-6) -> InequalityReport:
    """Homothety test for the equality case of the p-sum inequality.

    Equality holds iff the minimal-action characteristics are homothetic
    with ratio alpha = sqrt(c(T)/c(K)); the report's deficit is minus the
    phase-aligned fit residual.  The T solve is warm-started from the K
    minimizer: in the equality case the two bodies share a minimizing loop,
    and warm-starting selects the corresponding characteristic when the
    minimizer is not unique (e.g. balls carry one circle per complex line).
    """
    cfg = cfg or SolveConfig()
    r_K = capacity(K, cfg)
    r_T = capacity(T, cfg, initial=r_K.minimizer)
    alpha = math.sqrt(r_T.capacity / r_K.capacity)
    # normalize carriers to the homothety-covariant area clock before the
    # pointwise comparison (characteristic clocks of a translated pair
    # differ by more than a phase)
    l_T = _area_clock(r_T.carrier)

    def aligned(result_K):
        l_K = _area_clock(result_K.carrier)
        res, phi = _phase_aligned_residual(l_K, l_T, alpha)
        return res, phi, l_K

    residual, phi, l_K = aligned(r_K)
    if residual > tol:
        # bodies with non-unique carriers (e.g. balls: one circle per complex
        # line) may return non-corresponding members of the two carrier
        # families; in the equality case the T minimizer also minimizes the
        # K functional, so re-solving K from it selects the matching carrier
        r_K2 = capacity(K, cfg, initial=r_T.minimizer)
        residual2, phi2, l_K2 = aligned(r_K2)
        if residual2 < residual:
            residual, phi, l_K, r_K = residual2, phi2, l_K2, r_K2
    beta = l_T.offset - alpha * l_K.offset
    bm = bm_check(K, T, p, cfg)
    witnesses = {
        "alpha": alpha, "beta": beta.tolist(), "phase": phi,
        "homothety_residual": residual,
        "bm_deficit": bm.deficit, "bm_rhs": bm.rhs,
        "c_K": r_K.capacity, "c_T": r_T.capacity,
    }
    return _report("bm-equality", residual, 0.0, -residual, tol, witnesses,
                   _meta(cfg, sum_p=p))


# ---------------------------------------------------------------------------
# isoperimetric-type inequality
# ---------------------------------------------------------------------------


def isoperimetric_check(K: ConvexBody, T: ConvexBody, cfg: SolveConfig | None = None,
                        slack_rel: float = 1e-3,
                        eps_list: tuple[float, ...] = (1.0, 0.5, 0.1)) -> InequalityReport:
    """4 c(K) c(T) <= length of the K-carrier in the gauge of J T polar, squared.

    Also verifies the finite-epsilon chain
        sqrt(c(T)) <= (sqrt(c(K + eps T)) - sqrt(c(K))) / eps
                   <= length / (2 sqrt(c(K)))
    at each epsilon in eps_list.
    """
    cfg = cfg or SolveConfig()
    r_K = capacity(K, cfg)
    r_T = capacity(T, cfg)
    N = max(4 * r_K.carrier.loop.modes, 64)
    length = length_in_gauge(r_K.carrier, T, N, mode="J_inverse")
    lhs = length**2
    rhs = 4.0 * r_K.capacity * r_T.capacity
    slack = slack_rel * abs(rhs)

    chain = []
    chain_ok = True
    sqrt_cK = math.sqrt(r_K.capacity)
    sqrt_cT = math.sqrt(r_T.capacity)
    upper = length / (2.0 * sqrt_cK)
    for eps in eps_list:
        r_eps = capacity(MinkowskiSum([K, T], [1.0, eps]), cfg)
        quot = (math.sqrt(r_eps.capacity) - sqrt_cK) / eps
        lo_ok = quot >= sqrt_cT - slack_rel * sqrt_cT
        hi_ok = quot <= upper + slack_rel * max(upper, 1.0)
        chain_ok = chain_ok and lo_ok and hi_ok
        chain.append({"eps": eps, "quotient": quot, "lower": sqrt_cT,
                      "upper": upper, "ok": lo_ok and hi_ok})
    witnesses = {
        "length_JT_polar": length, "c_K": r_K.capacity, "c_T": r_T.capacity,
        "chain": chain, "chain_ok": chain_ok,
    }
    return _report("isoperimetric", lhs, rhs, lhs - rhs, slack, witnesses, _meta(cfg))


# ---------------------------------------------------------------------------
# directional derivative
# ---------------------------------------------------------------------------


def directional_derivative(K: ConvexBody, T: ConvexBody,
                           cfg: SolveConfig | None = None,
                           eps_schedule: tuple[float, ...] = (0.5, 0.2, 0.1, 0.05),
                           slack_rel: float = 1e-3) -> InequalityReport:
    """Difference quotients of eps -> c(K + eps T) against the lower bound
    2 sqrt(c(K) c(T)).

    The quotient sequence along the decreasing schedule must decrease (the
    sqrt-capacity quotient is non-increasing in eps by concavity, and the
    plain quotient inherits this near the limit); each quotient must clear
    the lower bound, and the sqrt-quotient must stay below
    length_{JT polar}(carrier) / (2 sqrt(c(K))), whose limit bounds the
    one-sided derivative.
    """
    cfg = cfg or SolveConfig()
    if any(e <= 0 for e in eps_schedule) or list(eps_schedule) != sorted(eps_schedule, reverse=True):
        raise HarnessError("eps schedule must be positive and strictly decreasing")
    r_K = capacity(K, cfg)
    r_T = capacity(T, cfg)
    sqrt_cK = math.sqrt(r_K.capacity)
    bound = 2.0 * math.sqrt(r_K.capacity * r_T.capacity)
    N = max(4 * r_K.carrier.loop.modes, 64)
    length = length_in_gauge(r_K.carrier, T, N, mode="J_inverse")
    upper_sqrt = length / (2.0 * sqrt_cK)

    rows = []
    quots = []
    for eps in eps_schedule:
        r_eps = capacity(MinkowskiSum([K, T], [1.0, eps]), cfg)
        quot = (r_eps.capacity - r_K.capacity) / eps
        sqrt_quot = (math.sqrt(r_eps.capacity) - sqrt_cK) / eps
        rows.append({"eps": eps, "quotient": quot, "sqrt_quotient": sqrt_quot,
                     "c_eps": r_eps.capacity})
        quots.append(quot)

    scale = max(abs(q) for q in quots)
    mono_tol = slack_rel * scale
    monotone = all(quots[i] >= quots[i + 1] - mono_tol for i in range(len(quots) - 1))
    sqrt_upper_ok = all(r["sqrt_quotient"] <= upper_sqrt + slack_rel * max(upper_sqrt, 1.0)
                        for r in rows)
    deficit = min(q - bound for q in quots)
    slack = slack_rel * max(bound, 1.0)
    witnesses = {
        "lower_bound": bound, "carrier_length_upper": length,
        "upper_sqrt_bound": upper_sqrt, "schedule": rows,
        "monotone": monotone, "sqrt_upper_ok": sqrt_upper_ok,
        "c_K": r_K.capacity, "c_T": r_T.capacity,
    }
    return _report("directional-derivative", min(quots), bound, deficit, slack,
                   witnesses, _meta(cfg))


# ---------------------------------------------------------------------------
# mean width
# ---------------------------------------------------------------------------


@dataclass
class MeanWidthEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr,
                "samples": self.samples, "seed": self.seed}


def _check_symmetry(K: ConvexBody, seed: int, tol: float = 1e-10) -> None:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5E1)))
    U = rng.normal(size=(64, K.dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    hp, _ = K.support_batch(U)
    hm, _ = K.support_batch(-U)
    if np.max(np.abs(hp - hm)) > tol * max(np.max(hp), 1.0):
        raise AsymmetricBodyError("body is not centrally symmetric")


def mean_width(K: ConvexBody, samples: int = 200_000, seed: int = 0) -> MeanWidthEstimate:
    """Monte-Carlo average of the support function over the unit sphere.

    Directions are normalized Gaussian vectors; the body must be centrally
    symmetric (verified on sampled antipodal pairs).
    """
    _check_symmetry(K, seed)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x3E4)))
    total = 0.0
    total_sq = 0.0
    left = samples
    while left > 0:
        m = min(left, 100_000)
        U = rng.normal(size=(m, K.dim))
        U /= np.linalg.norm(U, axis=1)[:, None]
        h, _ = K.support_batch(U)
        total += float(np.sum(h))
        total_sq += float(np.sum(h * h))
        left -= m
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    return MeanWidthEstimate(mean, math.sqrt(var / samples), samples, seed)


def mean_width_bound_check(K: ConvexBody, cfg: SolveConfig | None = None,
                           samples: int = 200_000, seed: int = 0,
                           slack_rel: float = 1e-3) -> InequalityReport:
    """c(K) <= pi * M*(K)^2 for centrally symmetric K, equality only for balls.

    The slack folds in a three-standard-error Monte-Carlo margin on M*.
    """
    cfg = cfg or SolveConfig()
    mw = mean_width(K, samples, seed)
    r_K = capacity(K, cfg)
    lhs = math.pi * mw.estimate**2
    rhs = r_K.capacity
    mc_margin = math.pi * ((mw.estimate + 3 * mw.stderr)**2 - mw.estimate**2)
    slack = slack_rel * abs(rhs) + mc_margin
    witnesses = {
        "mean_width": mw.to_dict(), "c_K": r_K.capacity,
        "equality_expected": isinstance(K, Ball),
        "equality_within_margin": bool(abs(lhs - rhs) <= slack),
    }
    return _report("mean-width-bound", lhs, rhs, lhs - rhs, slack, witnesses,
                   _meta(cfg, samples=samples, mw_seed=seed))


# ---------------------------------------------------------------------------
# 2D area oracle
# ---------------------------------------------------------------------------


def capacity_area_2d(K: ConvexBody, n: int = 40_000) -> float:
    """Area of a 2D convex body; in the plane every capacity equals the area.

    Exact (shoelace) for polytopes; support-function quadrature
    1/2 * integral(h^2 - h'^2) otherwise, with h' taken from the support
    point.  Affine wrappers are peeled off exactly.
    """
    if K.dim != 2:
        raise HarnessError("the area oracle is only valid in dimension 2")
    if isinstance(K, Translate):
        return capacity_area_2d(K.body, n)
    if isinstance(K, Scale):
        return K.factor**2 * capacity_area_2d(K.body, n)
    if isinstance(K, LinearImage):
        return abs(np.linalg.det(K.matrix)) * capacity_area_2d(K.body, n)
    if isinstance(K, Ball):
        return math.pi * K.radius**2
    if isinstance(K, Ellipsoid):
        return math.pi * float(K.radii[0])**2
    if isinstance(K, GeneralEllipsoid):
        return math.pi * math.sqrt(float(np.linalg.det(K.Q)))
    if isinstance(K, Polytope):
        V = K.vertices
        order = np.argsort(np.arctan2(V[:, 1], V[:, 0]))
        V = V[order]
        x, y = V[:, 0], V[:, 1]
        return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))
    theta = 2 * np.pi * np.arange(n) / n
    U = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    Uperp = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    h, grad = K.support_batch(U)
    hprime = np.sum(grad * Uperp, axis=1)
    return float(0.5 * np.mean(h**2 - hprime**2) * 2 * np.pi)
