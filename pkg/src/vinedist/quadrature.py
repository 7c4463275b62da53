"""Vectorised adaptive Gauss-Kronrod (7/15) quadrature over many integrands.

All integrands of a batch share one interval and tolerance.  Each round
evaluates every still-open subinterval of every integrand in a single call of
the user function, so the per-call overhead of the vine recursions is paid
once per round rather than once per subinterval.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 Kronrod abscissae on [-1, 1] and the matching weights
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS = np.zeros(15)
GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def integrate_batch(fun, count: int, lo: float, hi: float, tol: float,
                    initial: int = 8, max_rounds: int = 60, max_intervals: int = 2048):
    """Integrate ``count`` functions over ``[lo, hi]`` to absolute tolerance ``tol``.

    ``fun(x, rows)`` receives abscissae ``x`` of shape ``(m, 15)`` and the
    integrand index of each row, and returns values of the same shape.

    Returns ``(values, errors)``.  A subinterval is accepted once its error
    estimate is below its length share of ``tol``; an integrand is finished
    as soon as its total estimated error is below ``tol``.

    Two safeguards stop bisection where more of it cannot help.  Intervals
    narrower than ``1e-12`` of the range are accepted, so an isolated jump
    costs at most that share of its height.  An integrand whose open
    intervals would exceed ``max_intervals`` is noise-limited (rounding noise
    in the integrand defeats the error estimate); it is accepted as it
    stands and its returned error keeps the unresolved estimate.  Raises
    :class:`NumericError` if some integrand is still open after
    ``max_rounds`` bisections.
    """
    length = hi - lo
    edges = np.linspace(lo, hi, initial + 1)
    rows = np.repeat(np.arange(count), initial)
    a = np.tile(edges[:-1], count)
    b = np.tile(edges[1:], count)
    total = np.zeros(count)
    total_err = np.zeros(count)
    for _ in range(max_rounds):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x = mid[:, None] + half[:, None] * NODES
        fx = fun(x, rows)
        if not np.all(np.isfinite(fx)):
            bad = np.flatnonzero(~np.all(np.isfinite(fx), axis=1))[0]
            raise NumericError("non-finite integrand value",
                               detail={"interval": (float(a[bad]), float(b[bad]))})
        k = half * (fx @ KRONROD)
        err = np.abs(k - half * (fx @ GAUSS))
        est = total.copy()
        np.add.at(est, rows, k)
        est_err = total_err.copy()
        np.add.at(est_err, rows, err)
        done = (est_err <= tol)[rows]
        good = done | (err <= tol * (b - a) / length) | (b - a <= 1e-12 * length)
        crowded = np.bincount(rows[~good], minlength=count) * 2 > max_intervals
        good |= crowded[rows]
        np.add.at(total, rows[good], k[good])
        np.add.at(total_err, rows[good], err[good])
        if good.all():
            return total, total_err
        a, b, rows = a[~good], b[~good], rows[~good]
        m = 0.5 * (a + b)
        a, b, rows = np.concatenate([a, m]), np.concatenate([m, b]), np.concatenate([rows, rows])
        order = np.lexsort((a, rows))
        a, b, rows = a[order], b[order], rows[order]
    worst = int(np.argmax(b - a))
    raise NumericError(
        f"adaptive quadrature did not converge within {max_rounds} rounds",
        detail={"interval": (float(a[worst]), float(b[worst])), "integrand": int(rows[worst])})
