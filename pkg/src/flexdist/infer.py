"""Likelihood fitting, information-criterion ranking, and calibrated tests.

Families are fit by maximum likelihood over an unconstrained
reparameterization (log sigma, bounded-tanh delta, log nu) with a custom
Nelder-Mead simplex and seeded restarts.  The two-piece normal family has an
exact profile-likelihood path: for fixed mu the optimal scale and asymmetry
are closed-form, so the fit reduces to a one-dimensional search over mu.
"""

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtri, stdtr

from .base import (
    LOG_SQRT_TWO_PI,
    LocatedBase,
    LocationScale,
    NumericsError,
    golden_section_max,
    logistic_base,
    make_rng,
    normal_base,
    student_base,
)
from .skewsym import SkewNormal, SkewT
from .transform import GhTransform, KTransform, SasTransform, TransformParams
from .twopiece import EpsilonScaling, IsfScaling, TwoPieceParams

__all__ = [
    "FAMILY_ORDER",
    "NESTED_PAIRS",
    "FitConfig",
    "FitResult",
    "TestResult",
    "GhQuantileFit",
    "nelder_mead",
    "fit_mle",
    "fit_mle_penalized_skew_normal",
    "fit_gh_quantile",
    "log_likelihood",
    "distribution_for",
    "model_select",
    "lr_test",
]

FAMILY_ORDER = (
    "normal",
    "logistic",
    "t",
    "skew_normal",
    "skew_t",
    "sas_normal",
    "twopiece_normal",
    "twopiece_t",
)

NESTED_PAIRS = frozenset(
    {
        ("normal", "skew_normal"),
        ("normal", "sas_normal"),
        ("normal", "twopiece_normal"),
        ("t", "skew_t"),
    }
)

_LOG_TWO = math.log(2.0)

# delta is optimized through delta = cap * tanh(slope * t / cap): unbounded in
# t, bounded by the cap, slope `_MAP_SLOPE` at the origin.  The caps act as the
# practical frontier for the boundary_flag rule.
_SKEW_CAP = 200.0
_SAS_CAP = 50.0
_MAP_SLOPE = 10.0
_EPS_CAP = 1.0 - 1e-6
_ISF_LO, _ISF_HI = 1e-4, 1e4
_NU_LO, _NU_HI = 0.5, 200.0
_ETA_LO, _ETA_HI = 1e-3, 1e3
_FRONTIER_TOL = 1e-4

# t-value that puts delta within ~2e-5 of the +-200 cap; used as a dedicated
# restart so a likelihood that increases all the way to the frontier is found
# even when interior starts stall on the ridge.
_CHASE_T = 170.0


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def nelder_mead(fn, x0, steps, xatol=1e-8, fatol=1e-8, maxiter=400):
    """Minimize fn from x0 with a plain Nelder-Mead simplex.

    steps gives the per-coordinate offsets of the initial simplex.  NaN
    objective values are treated as +inf.  Convergence requires both the
    simplex spread (max-norm) and the value spread to fall below tolerance.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    steps = np.asarray(steps, dtype=float)
    if steps.size != d:
        raise ValueError(f"got {steps.size} steps for {d} parameters")

    def ev(v):
        val = fn(v)
        return val if val == val else math.inf

    verts = np.tile(x0, (d + 1, 1))
    for i in range(d):
        verts[i + 1, i] += steps[i]
    fv = np.array([ev(v) for v in verts])

    iters = 0
    converged = False
    while iters < maxiter:
        order = np.argsort(fv, kind="stable")
        verts = verts[order]
        fv = fv[order]
        if (
            np.max(np.abs(verts[1:] - verts[0])) <= xatol
            and fv[-1] - fv[0] <= fatol
        ):
            converged = True
            break
        centroid = verts[:-1].mean(axis=0)
        direction = centroid - verts[-1]
        xr = centroid + direction
        fr = ev(xr)
        if fr < fv[0]:
            xe = centroid + 2.0 * direction
            fe = ev(xe)
            if fe < fr:
                verts[-1], fv[-1] = xe, fe
            else:
                verts[-1], fv[-1] = xr, fr
        elif fr < fv[-2]:
            verts[-1], fv[-1] = xr, fr
        else:
            shrink = False
            if fr < fv[-1]:
                xc = centroid + 0.5 * direction
                fc = ev(xc)
                if fc <= fr:
                    verts[-1], fv[-1] = xc, fc
                else:
                    shrink = True
            else:
                xc = centroid - 0.5 * direction
                fc = ev(xc)
                if fc < fv[-1]:
                    verts[-1], fv[-1] = xc, fc
                else:
                    shrink = True
            if shrink:
                for j in range(1, d + 1):
                    verts[j] = verts[0] + 0.5 * (verts[j] - verts[0])
                    fv[j] = ev(verts[j])
        iters += 1

    best = int(np.argmin(fv))
    return SimplexResult(verts[best].copy(), float(fv[best]), iters, converged)


# ---------------------------------------------------------------------------
# parameter maps between the optimizer space and natural parameters


def _dec_bounded(t: float, cap: float) -> float:
    return cap * math.tanh(_MAP_SLOPE * t / cap)


def _enc_bounded(delta: float, cap: float) -> float:
    u = min(max(delta / cap, -1.0 + 1e-15), 1.0 - 1e-15)
    return cap / _MAP_SLOPE * math.atanh(u)


def _dec_log(t: float, lo: float, hi: float) -> float:
    return math.exp(min(max(t, math.log(lo)), math.log(hi)))


def _enc_log(v: float, lo: float, hi: float) -> float:
    return math.log(min(max(v, lo), hi))


def _dec_eps(t: float) -> float:
    return _EPS_CAP * math.tanh(t)


def _enc_eps(delta: float) -> float:
    u = min(max(delta / _EPS_CAP, -1.0 + 1e-12), 1.0 - 1e-12)
    return math.atanh(u)


def _sigma_of(ls: float) -> float:
    return math.exp(min(max(ls, -200.0), 200.0))


def _t_const(nu: float) -> float:
    return (
        math.lgamma(0.5 * (nu + 1.0))
        - math.lgamma(0.5 * nu)
        - 0.5 * math.log(nu * math.pi)
    )


def _guard(mu: float, ls: float) -> bool:
    return abs(mu) > 1e6 or abs(ls) > 200.0


# ---------------------------------------------------------------------------
# negative log-likelihoods on standardized data, one closure per family


def _obj_logistic(w, cfg):
    n = w.size

    def fn(t):
        mu, ls = t
        if _guard(mu, ls):
            return math.inf
        z = np.abs(w - mu) * math.exp(-ls)
        return n * ls + float(np.sum(z + 2.0 * np.log1p(np.exp(-z))))

    return fn


def _obj_t(w, cfg):
    n = w.size

    def fn(t):
        mu, ls, tn = t
        if _guard(mu, ls):
            return math.inf
        nu = _dec_log(tn, _NU_LO, _NU_HI)
        z = (w - mu) * math.exp(-ls)
        tail = float(np.sum(np.log1p(z * z / nu)))
        return n * (ls - _t_const(nu)) + 0.5 * (nu + 1.0) * tail

    return fn


def _obj_skew_normal(w, cfg, penalized=False):
    n = w.size
    c1, c2 = cfg.penalty_c1, cfg.penalty_c2

    def fn(t):
        mu, ls, td = t
        if _guard(mu, ls):
            return math.inf
        delta = _dec_bounded(td, _SKEW_CAP)
        z = (w - mu) * math.exp(-ls)
        val = (
            n * (ls + LOG_SQRT_TWO_PI - _LOG_TWO)
            + 0.5 * float(z @ z)
            - float(np.sum(log_ndtr(delta * z)))
        )
        if penalized:
            val += c1 * math.log1p(c2 * delta * delta)
        return val

    return fn


def _obj_skew_t(w, cfg):
    n = w.size

    def fn(t):
        mu, ls, tn, td = t
        if _guard(mu, ls):
            return math.inf
        nu = _dec_log(tn, _NU_LO, _NU_HI)
        delta = _dec_bounded(td, _SKEW_CAP)
        z = (w - mu) * math.exp(-ls)
        q = z * z
        arg = delta * z * np.sqrt((nu + 1.0) / (q + nu))
        with np.errstate(divide="ignore"):
            tilt = float(np.sum(np.log(stdtr(nu + 1.0, arg))))
        if not math.isfinite(tilt):
            return math.inf
        tail = float(np.sum(np.log1p(q / nu)))
        return n * (ls - _LOG_TWO - _t_const(nu)) + 0.5 * (nu + 1.0) * tail - tilt

    return fn


def _obj_sas(w, cfg):
    n = w.size

    def fn(t):
        mu, ls, td, te = t
        if _guard(mu, ls):
            return math.inf
        delta = _dec_bounded(td, _SAS_CAP)
        eta = _dec_log(te, _ETA_LO, _ETA_HI)
        z = (w - mu) * math.exp(-ls)
        with np.errstate(over="ignore"):
            u = eta * np.arcsinh(z) + delta
            y = np.sinh(u)
            au = np.abs(u)
            log_cosh = au + np.log1p(np.exp(-2.0 * au)) - _LOG_TWO
            val = n * (ls + LOG_SQRT_TWO_PI - math.log(eta)) + float(
                0.5 * (y @ y) - np.sum(log_cosh) + 0.5 * np.sum(np.log1p(z * z))
            )
        return val if math.isfinite(val) else math.inf

    return fn


def _obj_two_piece(w, cfg, with_nu):
    n = w.size
    epsilon = cfg.scaling == "epsilon"

    def fn(t):
        if with_nu:
            mu, ls, tn, td = t
            nu = _dec_log(tn, _NU_LO, _NU_HI)
        else:
            mu, ls, td = t
        if _guard(mu, ls):
            return math.inf
        if epsilon:
            delta = _dec_eps(td)
            s_l, s_r = 1.0 / (1.0 - delta), 1.0 / (1.0 + delta)
            a = 1.0
        else:
            delta = _dec_log(td, _ISF_LO, _ISF_HI)
            s_l, s_r = delta, 1.0 / delta
            a = 2.0 / (delta + 1.0 / delta)
        z = (w - mu) * math.exp(-ls)
        v = np.where(z < 0.0, s_l, s_r) * z
        if with_nu:
            tail = float(np.sum(np.log1p(v * v / nu)))
            return n * (ls - math.log(a) - _t_const(nu)) + 0.5 * (nu + 1.0) * tail
        return n * (ls + LOG_SQRT_TWO_PI - math.log(a)) + 0.5 * float(v @ v)

    return fn


# ---------------------------------------------------------------------------
# start points (in optimizer coordinates, for standardized data)


def _skewness(w) -> float:
    return float(np.mean(w**3))


def _skew_normal_moment_start(w):
    """Method-of-moments inversion for a skew-normal start point."""
    g1 = _skewness(w)
    b = math.sqrt(2.0 / math.pi)
    a1 = min(abs(g1), 0.99)
    c = (2.0 * a1 / (4.0 - math.pi)) ** (1.0 / 3.0)
    m = c / math.sqrt(1.0 + c * c)
    mb = min(m / b, 0.995)
    d0 = math.copysign(mb / math.sqrt(1.0 - mb * mb), g1)
    md = b * d0 / math.sqrt(1.0 + d0 * d0)
    s0 = 1.0 / math.sqrt(max(1.0 - md * md, 1e-3))
    return -s0 * md, math.log(s0), d0


def _chase_start(w, sign: float):
    """mu, log sigma of the half-normal limit the likelihood ridge runs to."""
    mu_c = float(np.min(w)) if sign > 0 else float(np.max(w))
    s_c = math.sqrt(float(np.mean((w - mu_c) ** 2)))
    return mu_c, math.log(max(s_c, 1e-12))


def _starts_logistic(w, cfg):
    med = float(np.median(w))
    return [np.array([med, math.log(0.551)])]


def _starts_t(w, cfg):
    med = float(np.median(w))
    return [
        np.array([med, math.log(0.75), math.log(4.0)]),
        np.array([med, math.log(0.92), math.log(12.0)]),
    ]


def _starts_skew_normal(w, cfg):
    m0, ls0, d0 = _skew_normal_moment_start(w)
    sign = 1.0 if _skewness(w) >= 0.0 else -1.0
    mu_c, ls_c = _chase_start(w, sign)
    return [
        np.array([0.0, 0.0, 0.0]),
        np.array([m0, ls0, _enc_bounded(d0, _SKEW_CAP)]),
        np.array([mu_c, ls_c, sign * _CHASE_T]),
    ]


def _starts_skew_t(w, cfg):
    m0, ls0, d0 = _skew_normal_moment_start(w)
    sign = 1.0 if _skewness(w) >= 0.0 else -1.0
    mu_c, ls_c = _chase_start(w, sign)
    td0 = _enc_bounded(d0, _SKEW_CAP)
    return [
        np.array([0.0, 0.0, math.log(5.0), 0.0]),
        np.array([m0, ls0, math.log(5.0), td0]),
        np.array([mu_c, ls_c, math.log(5.0), sign * _CHASE_T]),
        np.array([m0, ls0, math.log(2.0), td0]),
    ]


def _starts_sas(w, cfg):
    med = float(np.median(w))
    sign = 1.0 if _skewness(w) >= 0.0 else -1.0
    return [
        np.array([0.0, 0.0, 0.0, 0.0]),
        np.array([0.0, 0.0, _enc_bounded(-0.7 * sign, _SAS_CAP), 0.0]),
        np.array([med, math.log(0.8), _enc_bounded(-0.4 * sign, _SAS_CAP), math.log(0.7)]),
    ]


def _two_piece_delta0(w, mu0: float, epsilon: bool) -> float:
    p_left = float(np.clip(np.mean(w < mu0), 0.05, 0.95))
    if epsilon:
        return 1.0 - 2.0 * p_left
    return math.sqrt(1.0 / p_left - 1.0)


def _starts_two_piece(w, cfg, with_nu):
    epsilon = cfg.scaling == "epsilon"
    out = []
    for q in (0.25, 0.5, 0.75):
        mu0 = float(np.quantile(w, q))
        d0 = _two_piece_delta0(w, mu0, epsilon)
        td = _enc_eps(d0) if epsilon else _enc_log(d0, _ISF_LO, _ISF_HI)
        if with_nu:
            out.append(np.array([mu0, 0.0, math.log(5.0), td]))
        else:
            out.append(np.array([mu0, 0.0, td]))
    return out


# ---------------------------------------------------------------------------
# coordinate decoding/encoding


def _dec_normal(t, cfg):
    return {"mu": float(t[0]), "sigma": _sigma_of(t[1])}


def _dec_t(t, cfg):
    return {
        "mu": float(t[0]),
        "sigma": _sigma_of(t[1]),
        "nu": _dec_log(t[2], _NU_LO, _NU_HI),
    }


def _dec_skew_normal(t, cfg):
    return {
        "mu": float(t[0]),
        "sigma": _sigma_of(t[1]),
        "delta": _dec_bounded(t[2], _SKEW_CAP),
    }


def _dec_skew_t(t, cfg):
    return {
        "mu": float(t[0]),
        "sigma": _sigma_of(t[1]),
        "nu": _dec_log(t[2], _NU_LO, _NU_HI),
        "delta": _dec_bounded(t[3], _SKEW_CAP),
    }


def _dec_sas(t, cfg):
    return {
        "mu": float(t[0]),
        "sigma": _sigma_of(t[1]),
        "delta": _dec_bounded(t[2], _SAS_CAP),
        "eta": _dec_log(t[3], _ETA_LO, _ETA_HI),
    }


def _dec_two_piece(t, cfg):
    td = float(t[-1])
    delta = _dec_eps(td) if cfg.scaling == "epsilon" else _dec_log(td, _ISF_LO, _ISF_HI)
    out = {"mu": float(t[0]), "sigma": _sigma_of(t[1]), "delta": delta}
    if len(t) == 4:
        out["nu"] = _dec_log(t[2], _NU_LO, _NU_HI)
    return out


def _enc_common(params, cfg, family):
    mu = float(params["mu"])
    ls = math.log(float(params["sigma"]))
    if family == "logistic":
        return np.array([mu, ls])
    if family == "t":
        return np.array([mu, ls, _enc_log(params["nu"], _NU_LO, _NU_HI)])
    if family == "skew_normal":
        return np.array([mu, ls, _enc_bounded(params["delta"], _SKEW_CAP)])
    if family == "skew_t":
        return np.array(
            [
                mu,
                ls,
                _enc_log(params["nu"], _NU_LO, _NU_HI),
                _enc_bounded(params["delta"], _SKEW_CAP),
            ]
        )
    if family == "sas_normal":
        return np.array(
            [
                mu,
                ls,
                _enc_bounded(params["delta"], _SAS_CAP),
                _enc_log(params["eta"], _ETA_LO, _ETA_HI),
            ]
        )
    if family in ("twopiece_normal", "twopiece_t"):
        if cfg.scaling == "epsilon":
            td = _enc_eps(params["delta"])
        else:
            td = _enc_log(params["delta"], _ISF_LO, _ISF_HI)
        if family == "twopiece_t":
            return np.array([mu, ls, _enc_log(params["nu"], _NU_LO, _NU_HI), td])
        return np.array([mu, ls, td])
    raise ValueError(f"cannot encode parameters for family {family!r}")


# ---------------------------------------------------------------------------
# boundary rules (on the final natural parameters)


def _boundary_none(params) -> bool:
    return False


def _boundary_skew(params) -> bool:
    return _SKEW_CAP - abs(params["delta"]) <= _FRONTIER_TOL


def _boundary_sas(params) -> bool:
    return _SAS_CAP - abs(params["delta"]) <= _FRONTIER_TOL


def _boundary_two_piece(params) -> bool:
    delta = params["delta"]
    if params.get("scaling", "isf") == "epsilon":
        return 1.0 - abs(delta) <= _FRONTIER_TOL
    return delta <= _ISF_LO or delta >= _ISF_HI


@dataclass(frozen=True)
class _Family:
    name: str
    n_free: int
    param_names: tuple
    objective: Callable
    decode: Callable
    starts: Callable
    steps: tuple
    jitter: tuple
    boundary: Callable


_FAMILIES = {
    "normal": _Family(
        "normal", 2, ("mu", "sigma"), None, _dec_normal, None, (), (), _boundary_none
    ),
    "logistic": _Family(
        "logistic",
        2,
        ("mu", "sigma"),
        _obj_logistic,
        _dec_normal,
        _starts_logistic,
        (0.25, 0.25),
        (0.4, 0.3),
        _boundary_none,
    ),
    "t": _Family(
        "t",
        3,
        ("mu", "sigma", "nu"),
        _obj_t,
        _dec_t,
        _starts_t,
        (0.25, 0.25, 0.5),
        (0.4, 0.3, 0.8),
        _boundary_none,
    ),
    "skew_normal": _Family(
        "skew_normal",
        3,
        ("mu", "sigma", "delta"),
        _obj_skew_normal,
        _dec_skew_normal,
        _starts_skew_normal,
        (0.25, 0.25, 0.6),
        (0.4, 0.3, 0.8),
        _boundary_skew,
    ),
    "skew_t": _Family(
        "skew_t",
        4,
        ("mu", "sigma", "nu", "delta"),
        _obj_skew_t,
        _dec_skew_t,
        _starts_skew_t,
        (0.25, 0.25, 0.5, 0.6),
        (0.4, 0.3, 0.8, 0.8),
        _boundary_skew,
    ),
    "sas_normal": _Family(
        "sas_normal",
        4,
        ("mu", "sigma", "delta", "eta"),
        _obj_sas,
        _dec_sas,
        _starts_sas,
        (0.25, 0.25, 0.5, 0.3),
        (0.4, 0.3, 0.6, 0.5),
        _boundary_sas,
    ),
    "twopiece_normal": _Family(
        "twopiece_normal",
        3,
        ("mu", "sigma", "delta"),
        lambda w, cfg: _obj_two_piece(w, cfg, with_nu=False),
        _dec_two_piece,
        lambda w, cfg: _starts_two_piece(w, cfg, with_nu=False),
        (0.25, 0.25, 0.5),
        (0.4, 0.3, 0.6),
        _boundary_two_piece,
    ),
    "twopiece_t": _Family(
        "twopiece_t",
        4,
        ("mu", "sigma", "nu", "delta"),
        lambda w, cfg: _obj_two_piece(w, cfg, with_nu=True),
        _dec_two_piece,
        lambda w, cfg: _starts_two_piece(w, cfg, with_nu=True),
        (0.25, 0.25, 0.5, 0.5),
        (0.4, 0.3, 0.8, 0.6),
        _boundary_two_piece,
    ),
}


# ---------------------------------------------------------------------------
# public records


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings shared by fit_mle and lr_test.

    restarts caps the number of simplex runs drawn from the family's start
    list (jittered copies fill the list when it is shorter).  scaling picks
    the two-piece parameterization.  two_piece_profile switches the two-piece
    normal fit to the exact profile-likelihood path.
    """

    restarts: int = 5
    xatol: float = 1e-8
    fatol: float = 1e-8
    maxiter: Optional[int] = None
    seed: int = 0
    scaling: str = "isf"
    penalty_c1: float = 1.0
    penalty_c2: float = 1.0 / 3.0
    two_piece_profile: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.xatol <= 0.0 or self.fatol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.scaling not in ("isf", "epsilon"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.penalty_c1 < 0.0 or self.penalty_c2 <= 0.0:
            raise ValueError("penalty constants must be positive")


@dataclass(frozen=True)
class FitResult:
    family: str
    params: dict
    loglik: float
    aic: float
    bic: float
    n: int
    converged: bool
    iterations: int
    boundary_flag: bool


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    replicates: int
    method: str = "parametric_bootstrap"
    failures: int = 0


@dataclass(frozen=True)
class GhQuantileFit:
    mu: float
    sigma: float
    g: float
    h: float
    n: int


# ---------------------------------------------------------------------------
# distribution construction and likelihood


def distribution_for(family: str, params: dict):
    """Build the distribution object named by family from a parameter dict."""
    mu = float(params["mu"])
    sigma = float(params["sigma"])
    loc = LocationScale(mu, sigma)
    if family == "normal":
        return LocatedBase(normal_base(), loc)
    if family == "logistic":
        return LocatedBase(logistic_base(), loc)
    if family == "t":
        return LocatedBase(student_base(float(params["nu"])), loc)
    if family == "skew_normal":
        return SkewNormal(mu, sigma, float(params["delta"]))
    if family == "skew_t":
        return SkewT(mu, sigma, float(params["nu"]), float(params["delta"]))
    if family == "sas_normal":
        return TransformParams(
            normal_base(), loc, SasTransform(float(params["delta"]), float(params["eta"]))
        )
    if family == "gh_normal":
        return TransformParams(
            normal_base(), loc, GhTransform(float(params["g"]), float(params["h"]))
        )
    if family == "k_normal":
        return TransformParams(normal_base(), loc, KTransform(float(params["eta"])))
    if family in ("twopiece_normal", "twopiece_t"):
        delta = float(params["delta"])
        if params.get("scaling", "isf") == "epsilon":
            scheme = EpsilonScaling(delta)
        else:
            scheme = IsfScaling(delta)
        if family == "twopiece_t":
            base = student_base(float(params["nu"]))
        else:
            base = normal_base()
        return TwoPieceParams(base, loc, scheme)
    raise ValueError(f"unknown family {family!r}")


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty data")
    if not np.isfinite(x).all():
        raise ValueError("data must be finite (no NaN or infinity)")
    return x


def log_likelihood(family: str, params: dict, data) -> float:
    """Sum of log densities; -inf when any point has zero density."""
    x = _as_data(data)
    dist = distribution_for(family, params)
    return float(np.sum(dist.log_pdf(x)))


# ---------------------------------------------------------------------------
# fitting


def _result(family, params, loglik, n, n_free, converged, iterations, boundary):
    aic = 2.0 * n_free - 2.0 * loglik
    bic = n_free * math.log(n) - 2.0 * loglik
    return FitResult(
        family=family,
        params=params,
        loglik=loglik,
        aic=aic,
        bic=bic,
        n=n,
        converged=converged,
        iterations=iterations,
        boundary_flag=boundary,
    )


def _fit_normal(x: np.ndarray) -> FitResult:
    n = x.size
    mu = float(np.mean(x))
    sigma = math.sqrt(float(np.mean((x - mu) ** 2)))
    loglik = -n * (LOG_SQRT_TWO_PI + math.log(sigma) + 0.5)
    return _result(
        "normal",
        {"mu": mu, "sigma": sigma},
        loglik,
        n,
        2,
        converged=True,
        iterations=0,
        boundary=False,
    )


def _fit_two_piece_profile(x: np.ndarray, cfg: FitConfig) -> FitResult:
    """Exact two-piece normal MLE via the profile likelihood in mu.

    For fixed mu, with L and R the left/right sums of squared deviations,
    the inverse-scale-factor optimum is delta = (R/L)^(1/6) and
    sigma^2 = (delta^2 L + R / delta^2) / n, both closed form.  The profile
    is maximized over a candidate grid (all data points, midpoints, and the
    sample mean) and refined with golden-section search.
    """
    xs = np.sort(x)
    n = xs.size
    s1 = np.concatenate(([0.0], np.cumsum(xs)))
    s2 = np.concatenate(([0.0], np.cumsum(xs * xs)))
    xs_list = xs.tolist()
    s1_list = s1.tolist()
    s2_list = s2.tolist()
    s1n, s2n = s1_list[n], s2_list[n]
    evals = [0]
    sixth = 1.0 / 6.0
    const = 0.5 * n + n * LOG_SQRT_TWO_PI

    def at(mu: float):
        evals[0] += 1
        k = bisect_left(xs_list, mu)
        left = max(s2_list[k] - 2.0 * mu * s1_list[k] + k * mu * mu, 0.0)
        right = max((s2n - s2_list[k]) - 2.0 * mu * (s1n - s1_list[k]) + (n - k) * mu * mu, 0.0)
        if left <= 0.0:
            delta = _ISF_HI
        elif right <= 0.0:
            delta = _ISF_LO
        else:
            delta = min(max((right / left) ** sixth, _ISF_LO), _ISF_HI)
        var = (delta * delta * left + right / (delta * delta)) / n
        if var <= 0.0:
            return -math.inf, delta, 0.0
        ll = n * math.log(2.0 / (delta + 1.0 / delta)) - 0.5 * n * math.log(var) - const
        return ll, delta, math.sqrt(var)

    def profile_grid(mu):
        k = np.searchsorted(xs, mu, side="left")
        left = np.maximum(s2[k] - 2.0 * mu * s1[k] + k * mu * mu, 0.0)
        right = np.maximum(
            (s2[n] - s2[k]) - 2.0 * mu * (s1[n] - s1[k]) + (n - k) * mu * mu, 0.0
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.clip((right / left) ** sixth, _ISF_LO, _ISF_HI)
            delta = np.where(left <= 0.0, _ISF_HI, delta)
            delta = np.where(right <= 0.0, _ISF_LO, delta)
            var = (delta**2 * left + right / delta**2) / n
            ll = np.where(
                var > 0.0,
                n * np.log(2.0 / (delta + 1.0 / delta)) - 0.5 * n * np.log(var) - const,
                -np.inf,
            )
        evals[0] += mu.size
        return ll

    mids = 0.5 * (xs[:-1] + xs[1:])
    cands = np.unique(np.concatenate((xs, mids, [np.mean(xs)])))
    ll_c = profile_grid(cands)
    i = int(np.argmax(ll_c))
    lo = cands[max(i - 1, 0)]
    hi = cands[min(i + 1, cands.size - 1)]
    span = max(float(xs[-1] - xs[0]), 1e-12)
    mu_hat = golden_section_max(
        lambda m: at(m)[0], float(lo), float(hi), tol=1e-7 * span
    )
    if at(mu_hat)[0] < ll_c[i]:
        mu_hat = float(cands[i])
    ll_best, delta_isf, sigma_isf = at(mu_hat)

    if cfg.scaling == "epsilon":
        d2 = delta_isf * delta_isf
        delta = (d2 - 1.0) / (d2 + 1.0)
        delta = min(max(delta, -_EPS_CAP), _EPS_CAP)
        sigma = sigma_isf / math.sqrt(1.0 - delta * delta)
    else:
        delta, sigma = delta_isf, sigma_isf

    params = {"mu": mu_hat, "sigma": sigma, "delta": delta, "scaling": cfg.scaling}
    loglik = log_likelihood("twopiece_normal", params, x)
    return _result(
        "twopiece_normal",
        params,
        loglik,
        n,
        3,
        converged=True,
        iterations=int(evals[0]),
        boundary=_boundary_two_piece(params),
    )


def _to_w_units(params: dict, m0: float, s0: float) -> dict:
    out = dict(params)
    out["mu"] = (float(params["mu"]) - m0) / s0
    out["sigma"] = float(params["sigma"]) / s0
    return out


def _run_simplex(spec, w, cfg, objective, extra_encoded):
    structural = spec.starts(w, cfg)
    runs = list(extra_encoded)
    runs.extend(structural[: cfg.restarts])
    if len(structural) < cfg.restarts:
        rng = make_rng(cfg.seed)
        ref = structural[min(1, len(structural) - 1)]
        scales = np.asarray(spec.jitter)
        for _ in range(cfg.restarts - len(structural)):
            runs.append(ref + rng.normal(0.0, 1.0, ref.size) * scales)
    maxiter = cfg.maxiter if cfg.maxiter is not None else 400 * spec.n_free
    best = None
    total_iter = 0
    for t0 in runs:
        res = nelder_mead(objective, t0, spec.steps, cfg.xatol, cfg.fatol, maxiter)
        total_iter += res.iterations
        if best is None or res.fun < best.fun:
            best = res
    return best, total_iter


def fit_mle(
    family: str,
    data,
    config: Optional[FitConfig] = None,
    extra_starts: Optional[Sequence[dict]] = None,
) -> FitResult:
    """Maximum-likelihood fit of one family.

    Data are standardized internally, so results are location-scale
    equivariant.  extra_starts, if given, are parameter dicts (natural units)
    added as additional optimizer starting points.
    """
    cfg = config if config is not None else FitConfig()
    if family not in _FAMILIES:
        raise ValueError(
            f"unknown family {family!r}; expected one of {', '.join(FAMILY_ORDER)}"
        )
    x = _as_data(data)
    spec = _FAMILIES[family]
    min_n = spec.n_free + 1
    if x.size < min_n:
        raise ValueError(f"{family} fit needs at least {min_n} observations, got {x.size}")
    s0 = float(np.std(x))
    if s0 == 0.0:
        raise ValueError("degenerate sample: zero variance")

    if family == "normal":
        return _fit_normal(x)
    if family == "twopiece_normal" and cfg.two_piece_profile:
        return _fit_two_piece_profile(x, cfg)

    m0 = float(np.mean(x))
    w = (x - m0) / s0
    extra_encoded = []
    if extra_starts:
        for p in extra_starts:
            extra_encoded.append(_enc_common(_to_w_units(p, m0, s0), cfg, family))
    objective = spec.objective(w, cfg)
    best, total_iter = _run_simplex(spec, w, cfg, objective, extra_encoded)

    params_w = spec.decode(best.x, cfg)
    params = dict(params_w)
    params["mu"] = m0 + s0 * params_w["mu"]
    params["sigma"] = s0 * params_w["sigma"]
    if family in ("twopiece_normal", "twopiece_t"):
        params["scaling"] = cfg.scaling
    loglik = log_likelihood(family, params, x)
    return _result(
        family,
        params,
        loglik,
        x.size,
        spec.n_free,
        converged=best.converged,
        iterations=total_iter,
        boundary=spec.boundary(params),
    )


def fit_mle_penalized_skew_normal(data, config: Optional[FitConfig] = None) -> FitResult:
    """Skew-normal fit with the penalty c1*ln(1 + c2*delta^2) on the loglik.

    The penalty keeps the asymmetry estimate finite on samples where plain
    maximum likelihood runs to the frontier.  The reported loglik (and the
    criteria built from it) is the unpenalized value at the penalized optimum.
    """
    cfg = config if config is not None else FitConfig()
    x = _as_data(data)
    spec = _FAMILIES["skew_normal"]
    if x.size < spec.n_free + 1:
        raise ValueError(f"skew_normal fit needs at least {spec.n_free + 1} observations")
    s0 = float(np.std(x))
    if s0 == 0.0:
        raise ValueError("degenerate sample: zero variance")
    m0 = float(np.mean(x))
    w = (x - m0) / s0
    objective = _obj_skew_normal(w, cfg, penalized=True)
    best, total_iter = _run_simplex(spec, w, cfg, objective, [])
    params_w = spec.decode(best.x, cfg)
    params = dict(params_w)
    params["mu"] = m0 + s0 * params_w["mu"]
    params["sigma"] = s0 * params_w["sigma"]
    loglik = log_likelihood("skew_normal", params, x)
    return _result(
        "skew_normal",
        params,
        loglik,
        x.size,
        spec.n_free,
        converged=best.converged,
        iterations=total_iter,
        boundary=spec.boundary(params),
    )


def fit_gh_quantile(data) -> GhQuantileFit:
    """Letter-value estimates of the g-and-h parameters.

    g comes from the median of depth-wise log half-spread ratios; h and sigma
    come from regressing the log corrected full spreads on z_p^2 / 2.  This
    sidesteps the family's unavailable closed-form density.
    """
    x = _as_data(data)
    if x.size < 50:
        raise ValueError(f"letter-value fit needs at least 50 observations, got {x.size}")
    med = float(np.median(x))
    ps = np.array([0.75, 0.875, 0.9375, 0.96875])
    zp = ndtri(ps)
    upper = np.quantile(x, ps)
    lower = np.quantile(x, 1.0 - ps)
    uhs = upper - med
    lhs = med - lower
    if np.any(uhs <= 0.0) or np.any(lhs <= 0.0):
        raise ValueError("tied letter values: half-spreads must be positive at every depth")
    g = float(np.median(np.log(uhs / lhs) / zp))
    spread = upper - lower
    if abs(g) < 1e-8:
        corr = 1.0 / (2.0 * zp)
    else:
        corr = g / (np.exp(g * zp) - np.exp(-g * zp))
    y = np.log(spread * corr)
    slope, intercept = np.polyfit(0.5 * zp * zp, y, 1)
    return GhQuantileFit(
        mu=med, sigma=float(math.exp(intercept)), g=g, h=float(slope), n=int(x.size)
    )


# ---------------------------------------------------------------------------
# model comparison


def model_select(fits: Sequence[FitResult], criterion: str = "aic"):
    """Rank fits best-first; ties break toward fewer parameters."""
    if criterion not in ("aic", "bic"):
        raise ValueError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    fits = list(fits)
    if not fits:
        raise ValueError("no fits to rank")
    sizes = {f.n for f in fits}
    if len(sizes) != 1:
        raise ValueError(f"fits mix sample sizes {sorted(sizes)}; refusing to rank")

    def key(f: FitResult):
        value = f.aic if criterion == "aic" else f.bic
        spec = _FAMILIES.get(f.family)
        n_free = spec.n_free if spec is not None else len(f.params)
        order = FAMILY_ORDER.index(f.family) if f.family in FAMILY_ORDER else len(FAMILY_ORDER)
        return (value, n_free, order)

    return sorted(fits, key=key)


# ---------------------------------------------------------------------------
# vectorized refitting for the normal-vs-skew-normal bootstrap
#
# Calibrating that pair needs hundreds of skew-normal refits per test.  Run
# them as one batch: vertices for every replicate move in lock step, so each
# simplex step costs one vectorized objective evaluation instead of a Python
# loop over replicates.


def _batch_nelder_mead(fn, x0, steps, xatol, fatol, maxiter):
    """Nelder-Mead over a batch of independent problems of equal dimension.

    fn(T, rows) evaluates parameter rows T (k, d) for problem indices rows.
    Returns per-problem best point, value, and convergence flag.  Converged
    problems are frozen and drop out of subsequent evaluations.
    """
    if x0.ndim == 3:
        verts = x0.copy()
        m, _, d = verts.shape
    else:
        m, d = x0.shape
        verts = np.repeat(x0[:, None, :], d + 1, axis=1)
        for i in range(d):
            verts[:, i + 1, i] += steps[i]
    all_rows = np.arange(m)
    fv = np.empty((m, d + 1))
    for j in range(d + 1):
        fv[:, j] = fn(verts[:, j, :], all_rows)
    fv = np.where(np.isnan(fv), np.inf, fv)

    active = np.ones(m, dtype=bool)
    conv = np.zeros(m, dtype=bool)
    it = 0
    while it < maxiter and active.any():
        rows = np.where(active)[0]
        va = verts[rows]
        fa = fv[rows]
        order = np.argsort(fa, axis=1, kind="stable")
        va = np.take_along_axis(va, order[:, :, None], axis=1)
        fa = np.take_along_axis(fa, order, axis=1)
        verts[rows] = va
        fv[rows] = fa
        spread_x = np.max(np.abs(va[:, 1:, :] - va[:, :1, :]), axis=(1, 2))
        spread_f = fa[:, -1] - fa[:, 0]
        done = (spread_x <= xatol) & (spread_f <= fatol)
        if done.any():
            conv[rows[done]] = True
            active[rows[done]] = False
            keep = ~done
            rows, va, fa = rows[keep], va[keep], fa[keep]
        if rows.size == 0:
            break

        centroid = va[:, :-1, :].mean(axis=1)
        direction = centroid - va[:, -1, :]
        xr = centroid + direction
        fr = fn(xr, rows)
        fr = np.where(np.isnan(fr), np.inf, fr)
        new_x = xr
        new_f = fr.copy()

        lt_best = fr < fa[:, 0]
        idx = np.where(lt_best)[0]
        if idx.size:
            xe = centroid[idx] + 2.0 * direction[idx]
            fe = fn(xe, rows[idx])
            fe = np.where(np.isnan(fe), np.inf, fe)
            take = fe < fr[idx]
            sel = idx[take]
            new_x[sel] = xe[take]
            new_f[sel] = fe[take]
        accept = lt_best | (fr < fa[:, -2])

        idx = np.where(~accept)[0]
        shrink = np.array([], dtype=int)
        if idx.size:
            outside = fr[idx] < fa[idx, -1]
            xc = np.where(
                outside[:, None],
                centroid[idx] + 0.5 * direction[idx],
                centroid[idx] - 0.5 * direction[idx],
            )
            fc = fn(xc, rows[idx])
            fc = np.where(np.isnan(fc), np.inf, fc)
            ok = np.where(outside, fc <= fr[idx], fc < fa[idx, -1])
            sel = idx[ok]
            new_x[sel] = xc[ok]
            new_f[sel] = fc[ok]
            accept[sel] = True
            shrink = idx[~ok]

        acc = np.where(accept)[0]
        va[acc, -1, :] = new_x[acc]
        fa[acc, -1] = new_f[acc]
        if shrink.size:
            va[shrink, 1:, :] = va[shrink, :1, :] + 0.5 * (
                va[shrink, 1:, :] - va[shrink, :1, :]
            )
            flat = va[shrink, 1:, :].reshape(-1, d)
            fshr = fn(flat, np.repeat(rows[shrink], d))
            fa[shrink, 1:] = np.where(np.isnan(fshr), np.inf, fshr).reshape(-1, d)
        verts[rows] = va
        fv[rows] = fa
        it += 1

    best = np.argmin(fv, axis=1)
    fun = fv[all_rows, best]
    x_best = verts[all_rows, best, :]
    return x_best, fun, conv


def _batch_skn_objective(w_rows):
    n = w_rows.shape[1]
    const = LOG_SQRT_TWO_PI - _LOG_TWO

    def fn(t, rows):
        mu = t[:, 0]
        ls = t[:, 1]
        delta = _SKEW_CAP * np.tanh(_MAP_SLOPE * t[:, 2] / _SKEW_CAP)
        with np.errstate(over="ignore", invalid="ignore"):
            z = (w_rows[rows] - mu[:, None]) * np.exp(-np.clip(ls, -200.0, 200.0))[:, None]
            val = (
                n * (ls + const)
                + 0.5 * np.einsum("ij,ij->i", z, z)
                - np.sum(log_ndtr(delta[:, None] * z), axis=1)
            )
        bad = (np.abs(mu) > 1e6) | (np.abs(ls) > 200.0) | ~np.isfinite(val)
        return np.where(bad, np.inf, val)

    return fn


def _batch_skn_starts(w_rows, cfg, steps):
    """Initial simplexes mirroring the skew-normal structural start points.

    The first run folds the moment-based start and the exact null point into
    one simplex: the moment vertex shortens travel while the null vertex
    pins the best value at or below the normal fit from the outset.  Extra
    restarts add the frontier-chase start and a plain null-start simplex.
    """
    m = w_rows.shape[0]
    d = 3
    g1 = np.mean(w_rows**3, axis=1)
    b = math.sqrt(2.0 / math.pi)
    a1 = np.minimum(np.abs(g1), 0.99)
    c = (2.0 * a1 / (4.0 - math.pi)) ** (1.0 / 3.0)
    mm = c / np.sqrt(1.0 + c * c)
    mb = np.minimum(mm / b, 0.995)
    d0 = np.copysign(mb / np.sqrt(1.0 - mb * mb), g1)
    md = b * d0 / np.sqrt(1.0 + d0 * d0)
    s0 = 1.0 / np.sqrt(np.maximum(1.0 - md * md, 1e-3))
    td0 = _SKEW_CAP / _MAP_SLOPE * np.arctanh(np.clip(d0 / _SKEW_CAP, -1 + 1e-15, 1 - 1e-15))
    moment = np.column_stack((-s0 * md, np.log(s0), td0))

    simplex = np.repeat(moment[:, None, :], d + 1, axis=1)
    for i in range(d):
        simplex[:, i + 1, i] += steps[i]
    # last vertex -> the null point, unless it would degenerate the simplex
    apart = np.max(np.abs(moment), axis=1) > 0.05
    simplex[apart, d, :] = 0.0

    runs = [simplex]
    if cfg.restarts >= 2:
        sign = np.where(g1 >= 0.0, 1.0, -1.0)
        mu_c = np.where(sign > 0.0, w_rows.min(axis=1), w_rows.max(axis=1))
        s_c = np.sqrt(np.mean((w_rows - mu_c[:, None]) ** 2, axis=1))
        runs.append(
            np.column_stack((mu_c, np.log(np.maximum(s_c, 1e-12)), sign * _CHASE_T))
        )
    if cfg.restarts >= 3:
        runs.append(np.zeros((m, 3)))
    return runs


def _batch_skn_lr_stats(x_rows, cfg):
    """LR statistics of skew-normal vs closed-form normal for each data row.

    Rows are standardized so the normal null log-likelihood is the same known
    constant for every row and the scale terms cancel from the statistic.
    Returns (stats, ok) where ok marks rows whose refit produced a finite
    statistic.
    """
    m, n = x_rows.shape
    s0 = x_rows.std(axis=1)
    ok = s0 > 0.0
    w = np.zeros_like(x_rows)
    safe = np.where(ok, s0, 1.0)
    w[:] = (x_rows - x_rows.mean(axis=1)[:, None]) / safe[:, None]
    fn = _batch_skn_objective(w)
    spec = _FAMILIES["skew_normal"]
    maxiter = cfg.maxiter if cfg.maxiter is not None else 400 * spec.n_free
    best_fun = np.full(m, np.inf)
    for start in _batch_skn_starts(w, cfg, spec.steps):
        _, fun, _ = _batch_nelder_mead(
            fn, start, spec.steps, cfg.xatol, cfg.fatol, maxiter
        )
        best_fun = np.minimum(best_fun, fun)
    ll_alt = -best_fun
    ll_null = -n * (LOG_SQRT_TWO_PI + 0.5)
    stats = np.maximum(0.0, 2.0 * (ll_alt - ll_null))
    ok &= np.isfinite(stats)
    return stats, ok


def _lr_normal_vs_skew_normal(x, b, gen, cfg):
    n = x.size
    null_fit = _fit_normal(x)
    null_dist = distribution_for("normal", null_fit.params)
    rows = np.empty((b + 1, n))
    rows[0] = x
    for i, child in enumerate(gen.spawn(b)):
        rows[i + 1] = null_dist.sample(n, child)
    stats, ok = _batch_skn_lr_stats(rows, cfg)
    if not ok[0]:
        raise NumericsError("skew-normal fit of the observed data failed")
    observed = float(stats[0])
    failures = int(np.sum(~ok[1:]))
    if failures > 0.05 * b:
        raise NumericsError(
            f"{failures} of {b} bootstrap refits failed; cannot calibrate the test"
        )
    exceed = int(np.sum(stats[1:][ok[1:]] >= observed))
    p_value = (1.0 + exceed) / (b + 1.0)
    return TestResult(
        statistic=observed,
        p_value=p_value,
        replicates=b,
        method="parametric_bootstrap",
        failures=failures,
    )


# ---------------------------------------------------------------------------
# bootstrap-calibrated likelihood-ratio test


def _null_embed(null_family, alt_family, params, cfg):
    """Starting points that reproduce the fitted null inside the alternative.

    For the normal-null pairs the alternative's own first start already sits
    at the normal MLE after standardization, so no extra start is needed.
    """
    if (null_family, alt_family) == ("t", "skew_t"):
        return [
            {
                "mu": params["mu"],
                "sigma": params["sigma"],
                "nu": params["nu"],
                "delta": 0.0,
            }
        ]
    if alt_family == "twopiece_normal":
        return [
            {
                "mu": params["mu"],
                "sigma": params["sigma"],
                "delta": 1.0 if cfg.scaling == "isf" else 0.0,
            }
        ]
    return []


def lr_test(
    data,
    null_family: str,
    alt_family: str,
    b_reps: int,
    rng: Optional[np.random.Generator] = None,
    config: Optional[FitConfig] = None,
) -> TestResult:
    """Parametric-bootstrap likelihood-ratio test for one nested pair.

    The statistic is max(0, 2 * (loglik_alt - loglik_null)).  Its null
    distribution is estimated by refitting both families on b_reps samples
    drawn from the fitted null; p = (1 + #{boot >= observed}) / (b_reps + 1).
    Each replicate gets an independent child generator spawned from rng, so
    results are reproducible for a given seed and config.
    """
    if (null_family, alt_family) not in NESTED_PAIRS:
        allowed = ", ".join(f"{a} < {b}" for a, b in sorted(NESTED_PAIRS))
        raise ValueError(
            f"({null_family!r}, {alt_family!r}) is not a supported nested pair; "
            f"supported: {allowed}"
        )
    b = int(b_reps)
    if b < 99:
        raise ValueError(f"need at least 99 bootstrap replicates, got {b}")
    x = _as_data(data)
    cfg = config if config is not None else FitConfig()
    gen = rng if rng is not None else make_rng(0)

    if (null_family, alt_family) == ("normal", "skew_normal"):
        return _lr_normal_vs_skew_normal(x, b, gen, cfg)

    null_fit = fit_mle(null_family, x, cfg)
    alt_fit = fit_mle(
        alt_family, x, cfg, extra_starts=_null_embed(null_family, alt_family, null_fit.params, cfg)
    )
    observed = max(0.0, 2.0 * (alt_fit.loglik - null_fit.loglik))

    null_dist = distribution_for(null_family, null_fit.params)
    n = x.size
    exceed = 0
    failures = 0
    for child in gen.spawn(b):
        xb = null_dist.sample(n, child)
        try:
            nf = fit_mle(null_family, xb, cfg)
            af = fit_mle(
                alt_family, xb, cfg, extra_starts=_null_embed(null_family, alt_family, nf.params, cfg)
            )
            stat = 2.0 * (af.loglik - nf.loglik)
        except (ValueError, NumericsError):
            failures += 1
            continue
        if not math.isfinite(stat):
            failures += 1
            continue
        if max(0.0, stat) >= observed:
            exceed += 1
    if failures > 0.05 * b:
        raise NumericsError(
            f"{failures} of {b} bootstrap refits failed; cannot calibrate the test"
        )
    p_value = (1.0 + exceed) / (b + 1.0)
    return TestResult(
        statistic=observed,
        p_value=p_value,
        replicates=b,
        method="parametric_bootstrap",
        failures=failures,
    )
