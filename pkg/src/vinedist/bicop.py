"""Bivariate parametric copula families.

Every family handled here is exchangeable, ``c(u, v) = c(v, u)``, so one
h-function ``h(u | v) = dC(u, v)/dv`` covers both conditioning directions.
The survival flag applies a 180 degree rotation.

The underscored functions (``_logpdf``, ``_hfunc``, ``_hinv``) are the
vectorised kernels used by the vine recursions; they skip argument checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericError

CLAMP = 1e-10
_BISECT_STEPS = 200


class Family(str, enum.Enum):
    INDEPENDENCE = "I"
    GAUSSIAN = "N"
    STUDENT_T = "t"
    CLAYTON = "C"
    GUMBEL = "G"
    FRANK = "F"
    JOE = "J"

    @property
    def n_params(self) -> int:
        if self is Family.INDEPENDENCE:
            return 0
        return 2 if self is Family.STUDENT_T else 1


_ROTATABLE = (Family.CLAYTON, Family.GUMBEL, Family.JOE)


class Side(str, enum.Enum):
    """Which argument is the conditioned one in an h-function call."""

    FIRST_GIVEN_SECOND = "1|2"
    SECOND_GIVEN_FIRST = "2|1"


@dataclass(frozen=True)
class PairCopula:
    family: Family
    p1: float = 0.0
    p2: float = 0.0
    survival: bool = False

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))
        object.__setattr__(self, "survival", bool(self.survival))
        p1, p2 = self.p1, self.p2
        if not (math.isfinite(p1) and math.isfinite(p2)):
            raise DomainError(f"{fam.name}: parameters must be finite")
        if fam in (Family.GAUSSIAN, Family.STUDENT_T) and not -1.0 < p1 < 1.0:
            raise DomainError(f"{fam.name}: correlation {p1} outside (-1, 1)")
        if fam is Family.STUDENT_T and not p2 > 2.0:
            raise DomainError(f"StudentT: degrees of freedom {p2} must exceed 2")
        if fam is Family.CLAYTON and not p1 > 0.0:
            raise DomainError(f"Clayton: theta {p1} must be positive")
        if fam is Family.GUMBEL and not p1 >= 1.0:
            raise DomainError(f"Gumbel: theta {p1} must be >= 1")
        if fam is Family.FRANK and p1 == 0.0:
            raise DomainError("Frank: theta must be nonzero")
        if fam is Family.JOE and not p1 > 1.0:
            raise DomainError(f"Joe: theta {p1} must exceed 1")
        if self.survival and fam not in _ROTATABLE:
            raise DomainError(f"{fam.name}: survival rotation is only defined for C, G, J")

    @property
    def code(self) -> str:
        return ("s" if self.survival else "") + self.family.value

    @classmethod
    def from_code(cls, code: str, p1: float = 0.0, p2: float = 0.0) -> "PairCopula":
        survival = code.startswith("s")
        try:
            fam = Family(code[1:] if survival else code)
        except ValueError:
            raise DomainError(f"unknown family code {code!r}") from None
        return cls(fam, p1, p2, survival)

    def __repr__(self) -> str:
        if self.family is Family.INDEPENDENCE:
            return "PairCopula(I)"
        if self.family is Family.STUDENT_T:
            return f"PairCopula({self.code}, {self.p1:g}, {self.p2:g})"
        return f"PairCopula({self.code}, {self.p1:g})"


INDEPENDENCE = PairCopula(Family.INDEPENDENCE)


# ---------------------------------------------------------------------------
# family kernels (unrotated); all take broadcastable float arrays


def _logaddexp_m1(a, b):
    """log(exp(a) + exp(b) - 1) for a, b >= 0."""
    m = np.maximum(a, b)
    return m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))


def _gauss_logpdf(rho, u, v):
    x, y = special.ndtri(u), special.ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * math.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h(rho, u, v):
    x, y = special.ndtri(u), special.ndtri(v)
    return special.ndtr((x - rho * y) / math.sqrt(1.0 - rho * rho))


def _gauss_hinv(rho, p, v):
    y = special.ndtri(v)
    return special.ndtr(special.ndtri(p) * math.sqrt(1.0 - rho * rho) + rho * y)


def _t_ppf(nu, p):
    """Student-t quantile through the inverse regularised incomplete beta function.

    Uses ``I_z(nu/2, 1/2) = 2q`` in the tails and the complementary form
    ``I_{1-z}(1/2, nu/2) = 1 - 2q`` near the centre to avoid cancellation.
    """
    p = np.asarray(p, dtype=float)
    q = np.minimum(p, 1.0 - p)
    tail = q < 0.25
    x2 = np.empty_like(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = special.betaincinv(nu / 2.0, 0.5, 2.0 * q[tail])
        x2[tail] = nu * ((1.0 - z) / z)
        w = special.betaincinv(0.5, nu / 2.0, 1.0 - 2.0 * q[~tail])
        x2[~tail] = nu * (w / (1.0 - w))
    x = np.sqrt(x2)
    return np.where(p < 0.5, -x, x)


def _t_logpdf(rho, nu, u, v):
    return _t_logpdf_xy(rho, nu, _t_ppf(nu, u), _t_ppf(nu, v))


def _t_logpdf_xy(rho, nu, x, y):
    r2 = 1.0 - rho * rho
    const = (
        special.gammaln((nu + 2.0) / 2.0)
        + special.gammaln(nu / 2.0)
        - 2.0 * special.gammaln((nu + 1.0) / 2.0)
        - 0.5 * math.log(r2)
    )
    quad = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
    return (
        const
        - (nu + 2.0) / 2.0 * np.log1p(quad)
        + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    )


def _t_h(rho, nu, u, v):
    return _t_h_xy(rho, nu, _t_ppf(nu, u), _t_ppf(nu, v))


def _t_h_xy(rho, nu, x, y):
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu + 1.0, (x - rho * y) / scale)


def _t_hinv(rho, nu, p, v):
    y = _t_ppf(nu, v)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu, _t_ppf(nu + 1.0, p) * scale + rho * y)


def _clayton_logpdf(th, u, v):
    lu, lv = np.log(u), np.log(v)
    la = _logaddexp_m1(-th * lu, -th * lv)
    return math.log1p(th) - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * la


def _clayton_h(th, u, v):
    # h = (1 + t)^(-1 - 1/th) with t = v^th (u^-th - 1), kept in logs so a small
    # t is not swamped when v^-th dominates u^-th
    x = -th * np.log(u)
    log_t = th * np.log(v) + x + np.log(-np.expm1(-x))
    return np.exp(-(1.0 + 1.0 / th) * np.logaddexp(0.0, log_t))


def _clayton_hinv(th, p, v):
    b = -th * np.log(v)
    lb = b + np.log(np.expm1(-th / (th + 1.0) * np.log(p)) + np.exp(-b))
    return np.exp(-lb / th)


def _gumbel_parts(th, u, v):
    x, y = -np.log(u), -np.log(v)
    lx, ly = np.log(x), np.log(y)
    ls = np.logaddexp(th * lx, th * ly)
    return x, y, lx, ly, ls, np.exp(ls / th)


def _gumbel_logpdf(th, u, v):
    x, y, lx, ly, ls, a = _gumbel_parts(th, u, v)
    return -a + x + y + (th - 1.0) * (lx + ly) + (1.0 / th - 2.0) * ls + np.log(a + th - 1.0)


def _gumbel_h(th, u, v):
    _, y, _, ly, ls, a = _gumbel_parts(th, u, v)
    return np.exp(-a + (1.0 - th) / th * ls + (th - 1.0) * ly + y)


def _joe_parts(th, u, v):
    lub, lvb = np.log1p(-u), np.log1p(-v)
    a, b = np.exp(th * lub), np.exp(th * lvb)
    return lub, lvb, a, b, a + b - a * b


def _joe_logpdf(th, u, v):
    lub, lvb, _, _, s = _joe_parts(th, u, v)
    return (1.0 / th - 2.0) * np.log(s) + (th - 1.0) * (lub + lvb) + np.log(th - 1.0 + s)


def _joe_h(th, u, v):
    _, lvb, a, _, s = _joe_parts(th, u, v)
    return np.exp((1.0 / th - 1.0) * np.log(s) + (th - 1.0) * lvb) * (1.0 - a)


def _frank_parts(th, u, v):
    e = -math.expm1(-th)
    uu, vv = -np.expm1(-th * u), -np.expm1(-th * v)
    return e, uu, vv


def _frank_logpdf(th, u, v):
    e, uu, vv = _frank_parts(th, u, v)
    return math.log(th * e) - th * (u + v) - 2.0 * np.log(np.abs(e - uu * vv))


def _frank_h(th, u, v):
    e, uu, vv = _frank_parts(th, u, v)
    return np.exp(-th * v) * uu / (e - uu * vv)


def _frank_hinv(th, p, v):
    e = -math.expm1(-th)
    vv = -np.expm1(-th * v)
    uu = p * e / (np.exp(-th * v) + p * vv)
    return -np.log1p(-uu) / th


def _frank_cdf(th, u, v):
    num = np.expm1(-th * u) * np.expm1(-th * v)
    return -np.log1p(num / math.expm1(-th)) / th


def _bisect_hinv(hfun, p, v):
    lo = np.zeros(np.broadcast(p, v).shape)
    hi = np.ones_like(lo)
    p = np.broadcast_to(p, lo.shape)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = hfun(np.clip(mid, 1e-300, 1.0 - 1e-16), v) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-15):
            return 0.5 * (lo + hi)
    raise NumericError("bisection for the inverse h-function did not converge")


# ---------------------------------------------------------------------------
# dispatch on PairCopula


def _base_logpdf(pc: PairCopula, u, v):
    f, p1 = pc.family, pc.p1
    if f is Family.INDEPENDENCE:
        return np.zeros(np.broadcast(u, v).shape)
    if f is Family.GAUSSIAN:
        return _gauss_logpdf(p1, u, v)
    if f is Family.STUDENT_T:
        return _t_logpdf(p1, pc.p2, u, v)
    if f is Family.CLAYTON:
        return _clayton_logpdf(p1, u, v)
    if f is Family.GUMBEL:
        return _gumbel_logpdf(p1, u, v)
    if f is Family.FRANK:
        return _frank_logpdf(p1, u, v)
    return _joe_logpdf(p1, u, v)


def _base_h(pc: PairCopula, u, v):
    f, p1 = pc.family, pc.p1
    if f is Family.INDEPENDENCE:
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)
    if f is Family.GAUSSIAN:
        return _gauss_h(p1, u, v)
    if f is Family.STUDENT_T:
        return _t_h(p1, pc.p2, u, v)
    if f is Family.CLAYTON:
        return _clayton_h(p1, u, v)
    if f is Family.GUMBEL:
        return _gumbel_h(p1, u, v)
    if f is Family.FRANK:
        return _frank_h(p1, u, v)
    return _joe_h(p1, u, v)


def _base_hinv(pc: PairCopula, p, v):
    f, p1 = pc.family, pc.p1
    if f is Family.INDEPENDENCE:
        return np.broadcast_to(p, np.broadcast(p, v).shape).astype(float)
    if f is Family.GAUSSIAN:
        return _gauss_hinv(p1, p, v)
    if f is Family.STUDENT_T:
        return _t_hinv(p1, pc.p2, p, v)
    if f is Family.CLAYTON:
        return _clayton_hinv(p1, p, v)
    if f is Family.FRANK:
        return _frank_hinv(p1, p, v)
    kernel = _gumbel_h if f is Family.GUMBEL else _joe_h
    return _bisect_hinv(lambda u, w: kernel(p1, u, w), p, v)


def _logpdf(pc: PairCopula, u, v):
    if pc.survival:
        return _base_logpdf(pc, 1.0 - u, 1.0 - v)
    return _base_logpdf(pc, u, v)


def _hfunc(pc: PairCopula, u, v):
    """C(u | v), clamped to [CLAMP, 1 - CLAMP]."""
    if pc.survival:
        out = 1.0 - _base_h(pc, 1.0 - u, 1.0 - v)
    else:
        out = _base_h(pc, u, v)
    return np.clip(out, CLAMP, 1.0 - CLAMP)


def _logpdf_h(pc: PairCopula, u, v):
    """``(_logpdf(pc, u, v), _hfunc(pc, u, v))`` sharing the t quantiles."""
    if pc.family is not Family.STUDENT_T:
        return _logpdf(pc, u, v), _hfunc(pc, u, v)
    x, y = _t_ppf(pc.p2, u), _t_ppf(pc.p2, v)
    logc = _t_logpdf_xy(pc.p1, pc.p2, x, y)
    h = _t_h_xy(pc.p1, pc.p2, x, y)
    return logc, np.clip(h, CLAMP, 1.0 - CLAMP)


def _hinv(pc: PairCopula, p, v):
    if pc.survival:
        out = 1.0 - _base_hinv(pc, 1.0 - p, 1.0 - v)
    else:
        out = _base_hinv(pc, p, v)
    return np.clip(out, CLAMP, 1.0 - CLAMP)


# ---------------------------------------------------------------------------
# public API


def _interior(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all((x > 0.0) & (x < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return x


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def pair_logpdf(pc: PairCopula, u, v):
    u, v = _interior("u", u), _interior("v", v)
    return _scalar_or_array(_logpdf(pc, u, v))


def pair_pdf(pc: PairCopula, u, v):
    """Copula density c(u, v)."""
    return _scalar_or_array(np.exp(pair_logpdf(pc, u, v)))


def pair_hfun(pc: PairCopula, u, v, side: Side | str = Side.FIRST_GIVEN_SECOND):
    """Conditional distribution function.

    ``side="1|2"`` returns C(u | v), ``side="2|1"`` returns C(v | u).
    """
    u, v = _interior("u", u), _interior("v", v)
    if Side(side) is Side.FIRST_GIVEN_SECOND:
        return _scalar_or_array(_hfunc(pc, u, v))
    return _scalar_or_array(_hfunc(pc, v, u))


def pair_hinv(pc: PairCopula, p, v, side: Side | str = Side.FIRST_GIVEN_SECOND):
    """Inverse of :func:`pair_hfun` in its conditioned argument.

    ``v`` is always the conditioning value; for exchangeable families the
    two sides coincide.
    """
    p, v = _interior("p", p), _interior("v", v)
    Side(side)
    return _scalar_or_array(_hinv(pc, p, v))


def pair_cdf(pc: PairCopula, u, v):
    """Joint distribution function (used by tests and diagnostics)."""
    u, v = _interior("u", u), _interior("v", v)
    if pc.survival:
        base = PairCopula(pc.family, pc.p1, pc.p2)
        return _scalar_or_array(u + v - 1.0 + pair_cdf(base, 1.0 - u, 1.0 - v))
    f, th = pc.family, pc.p1
    if f is Family.INDEPENDENCE:
        out = u * v
    elif f is Family.CLAYTON:
        out = np.exp(-_logaddexp_m1(-th * np.log(u), -th * np.log(v)) / th)
    elif f is Family.GUMBEL:
        out = np.exp(-_gumbel_parts(th, u, v)[5])
    elif f is Family.FRANK:
        out = _frank_cdf(th, u, v)
    elif f is Family.JOE:
        out = 1.0 - _joe_parts(th, u, v)[4] ** (1.0 / th)
    else:
        # elliptical families: C(u, v) = int_0^v C(u | s) ds
        ub, vb = np.broadcast_arrays(u, v)
        out = np.array([
            integrate.quad(lambda s, x=x: float(_base_h(pc, x, s)), 0.0, y,
                           epsabs=1e-13, epsrel=1e-12, limit=200)[0]
            for x, y in zip(ub.ravel(), vb.ravel())
        ]).reshape(ub.shape)
    return _scalar_or_array(out)


def _debye1(x: float) -> float:
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t != 0 else 1.0, 0.0, x,
                            epsabs=1e-14, epsrel=1e-13)
    return val / x


def _frank_tau(theta: float) -> float:
    return 1.0 - 4.0 / theta + 4.0 * _debye1(theta) / theta


def _joe_tau(theta: float) -> float:
    # t log(t) (1 - t)^e with e < -1 possible: fold one (1 - t) into the
    # integrand, leave (1 - t)^(e + 1) to the algebraic weight
    e = 2.0 * (1.0 - theta) / theta
    val, _ = integrate.quad(lambda t: t * math.log(t) / (1.0 - t) if 0.0 < t < 1.0 else -float(t == 1.0), 0.0, 1.0, weight="alg",
                            wvar=(0.0, e + 1.0), epsabs=1e-14, epsrel=1e-13)
    return 1.0 + 4.0 / theta**2 * val


def pair_tau(pc: PairCopula) -> float:
    """Kendall's tau of a pair copula (rotation by 180 degrees keeps it)."""
    f, p1 = pc.family, pc.p1
    if f is Family.INDEPENDENCE:
        return 0.0
    if f in (Family.GAUSSIAN, Family.STUDENT_T):
        return 2.0 / math.pi * math.asin(p1)
    if f is Family.CLAYTON:
        return p1 / (p1 + 2.0)
    if f is Family.GUMBEL:
        return 1.0 - 1.0 / p1
    if f is Family.FRANK:
        return _frank_tau(p1)
    return _joe_tau(p1)


def pair_from_tau(family: Family | str, tau: float, nu: float | None = None,
                  survival: bool = False) -> PairCopula:
    """Pair copula of ``family`` with Kendall's tau equal to ``tau``."""
    fam = Family(family)
    tau = float(tau)
    if not -1.0 < tau < 1.0:
        raise DomainError(f"tau {tau} outside (-1, 1)")
    if fam is Family.INDEPENDENCE:
        if tau != 0.0:
            raise DomainError("Independence copula only attains tau = 0")
        return INDEPENDENCE
    if fam in (Family.GAUSSIAN, Family.STUDENT_T):
        rho = math.sin(math.pi * tau / 2.0)
        if fam is Family.GAUSSIAN:
            return PairCopula(fam, rho, 0.0, survival)
        if nu is None:
            raise DomainError("StudentT needs degrees of freedom")
        return PairCopula(fam, rho, nu, survival)
    if fam in (Family.CLAYTON, Family.GUMBEL, Family.JOE) and tau <= 0.0:
        raise DomainError(f"{fam.name} cannot attain tau {tau} <= 0")
    if fam is Family.CLAYTON:
        return PairCopula(fam, 2.0 * tau / (1.0 - tau), 0.0, survival)
    if fam is Family.GUMBEL:
        return PairCopula(fam, 1.0 / (1.0 - tau), 0.0, survival)
    if fam is Family.FRANK:
        if tau == 0.0:
            raise DomainError("Frank cannot attain tau = 0 with theta != 0")
        lo, hi = 1e-6, 50.0
        sign = 1.0 if tau > 0 else -1.0
        target = abs(tau)
        if not _frank_tau(lo) < target < _frank_tau(hi):
            raise DomainError(f"Frank: tau {tau} outside the supported range")
        th = optimize.brentq(lambda t: _frank_tau(t) - target, lo, hi, xtol=1e-13, rtol=1e-15)
        return PairCopula(fam, sign * th, 0.0, survival)
    lo, hi = 1.0 + 1e-6, 50.0
    if not _joe_tau(lo) < tau < _joe_tau(hi):
        raise DomainError(f"Joe: tau {tau} outside the supported range")
    th = optimize.brentq(lambda t: _joe_tau(t) - tau, lo, hi, xtol=1e-13, rtol=1e-15)
    return PairCopula(fam, th, 0.0, survival)
