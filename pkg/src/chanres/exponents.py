"""Cumulant-style generating functions and the exponent bounds they yield.

Two families of generating functions drive every exponential bound in
this package:

    psi(s | W, p) = log E_p sum_y W_x(y)^(1+s) W_p(y)^(-s)
    phi(t | W, p) = log sum_y ( E_p W_x(y)^(1/(1+t)) )^(1+t)

Both vanish at the origin, are convex in the parameter, and are
additive over memoryless products, so single-letter optimization gives
blocklength exponents directly.  Worst-case variants maximize over the
input distribution; the inner maximand is concave in p, and a
multiplicative-gradient iteration with a stationarity certificate
solves it (with a dense simplex grid as fallback on small alphabets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    Channel,
    Distribution,
    dispersion_J,
    mutual_information,
    output_distribution,
    uniform,
)

GIVEN_FAMILIES = (
    "vd_psi",
    "kl_phi",
    "vd_phi_half",
    "vd_psi_worst",
    "kl_phi_worst",
    "vd_phi_half_worst",
)

WORST_FAMILIES = ("vd_psi_worst", "kl_phi_worst", "vd_phi_half_worst")

GRID_STEP = 1e-3

_KKT_TOL = 1e-9
_KKT_ACCEPT = 1e-8


class ConvergenceError(RuntimeError):
    """An iterative optimizer could not certify its result."""

    def __init__(self, message, best_value=None, residual=None):
        super().__init__(message)
        self.best_value = best_value
        self.residual = residual


def psi(s: float, W: Channel, p: Distribution) -> float:
    """log E_p sum_y W_x(y)^(1+s) W_p(y)^(-s); psi(0) == 0 exactly."""
    if s <= -1:
        raise ValueError("s must exceed -1")
    if p.size != W.input_size:
        raise ValueError("distribution does not match channel input")
    if s == 0:
        return 0.0
    wp = output_distribution(W, p).probs
    live = wp > 0
    sup = p.support()
    rows = W.rows[np.ix_(sup, live)]
    inner = np.sum(rows ** (1.0 + s) * wp[live] ** (-s), axis=1)
    return float(np.log(p.probs[sup] @ inner))


def phi(t: float, W: Channel, p: Distribution) -> float:
    """log sum_y (E_p W_x(y)^(1/(1+t)))^(1+t); phi(0) == 0 exactly."""
    if t <= -1:
        raise ValueError("t must exceed -1")
    if p.size != W.input_size:
        raise ValueError("distribution does not match channel input")
    if t == 0:
        return 0.0
    g = p.probs @ (W.rows ** (1.0 / (1.0 + t)))
    return float(np.log(np.sum(g ** (1.0 + t))))


# ---------------------------------------------------------------------------
# Concave maximization of F(p) = sum_y (p @ A)_y^c over the simplex.
#
# The gradient is c * D with D_x = sum_y A[x,y] (p @ A)_y^(c-1), and
# p @ D == F, so the multiplicative update p <- p * D / F stays on the
# simplex and increases F.  Stationarity: D_x == F on the support of
# the maximizer and D_x <= F off it.
# ---------------------------------------------------------------------------


def _kkt_residual(p: np.ndarray, D: np.ndarray, F: float) -> float:
    scale = max(abs(F), 1.0)
    on = p > 1e-10
    r_on = float(np.max(np.abs(D[on] - F))) if np.any(on) else 0.0
    off = ~on
    r_off = float(max(0.0, np.max(D[off] - F))) if np.any(off) else 0.0
    return max(r_on, r_off) / scale


def _multiplicative_max(A: np.ndarray, c: float, start: np.ndarray,
                        max_iter: int = 200_000,
                        tol: float = _KKT_TOL):
    p = np.array(start, dtype=float)
    p = p / p.sum()
    F = 0.0
    resid = math.inf
    for _ in range(max_iter):
        g = p @ A
        D = A @ np.where(g > 0, g ** (c - 1.0), 0.0)
        F = float(p @ D)
        if not math.isfinite(F) or F <= 0:
            return F, p, math.inf
        resid = _kkt_residual(p, D, F)
        if resid <= tol:
            return F, p, resid
        p = p * (D / F)
        p = p / p.sum()
    return F, p, resid


def _simplex_grid_argmax(A: np.ndarray, c: float, step: float) -> np.ndarray:
    K = A.shape[0]
    m = int(round(1.0 / step))

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    best_val = -math.inf
    best = None
    batch = []

    def flush():
        nonlocal best_val, best
        if not batch:
            return
        P = np.array(batch, dtype=float) / m
        vals = np.sum((P @ A) ** c, axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best = P[i]
        batch.clear()

    for comp in compositions(m, K):
        batch.append(comp)
        if len(batch) >= 20000:
            flush()
    flush()
    return best


def _certified_power_max(A: np.ndarray, c: float, warm: np.ndarray | None = None):
    """Returns (F_max, argmax p, residual) with a stationarity certificate."""
    A = A[:, np.any(A > 0, axis=0)]
    K = A.shape[0]
    starts = []
    if warm is not None and warm.size == K:
        starts.append(np.maximum(warm, 1e-12))
    starts.append(np.full(K, 1.0 / K))
    if K <= 8:
        for x in range(K):
            v = np.full(K, 0.1 / K)
            v[x] += 0.9
            starts.append(v)
    rng = np.random.Generator(np.random.Philox(key=[0xC0FFEE, 0]))
    for _ in range(6):
        starts.append(rng.dirichlet(np.ones(K)))

    best = (-math.inf, None, math.inf)
    for start in starts:
        F, p, resid = _multiplicative_max(A, c, start)
        if resid <= _KKT_TOL:
            return F, p, resid
        if math.isfinite(F) and (F, -resid) > (best[0], -best[2]):
            best = (F, p, resid)

    if K <= 4:
        pg = _simplex_grid_argmax(A, c, 0.01)
        start = 0.99 * pg + 0.01 * np.full(K, 1.0 / K)
        F, p, resid = _multiplicative_max(A, c, start)
        if resid <= _KKT_ACCEPT:
            return F, p, resid
        if math.isfinite(F) and F > best[0]:
            best = (F, p, resid)

    if best[1] is not None and best[2] <= _KKT_ACCEPT:
        return best
    raise ConvergenceError(
        f"input-distribution maximization failed to certify "
        f"(best value {best[0]!r}, stationarity residual {best[2]!r})",
        best_value=best[0], residual=best[2],
    )


def _psi_worst_solve(s: float, W: Channel, warm: np.ndarray | None = None):
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    K = W.input_size
    if s == 0.0:
        return 0.0, np.full(K, 1.0 / K)
    if s == 1.0:
        # the maximand degenerates to counting outputs reachable from supp(p)
        covered = int(np.count_nonzero(np.any(W.rows > 0, axis=0)))
        return math.log(covered), np.full(K, 1.0 / K)
    A = W.rows ** (1.0 + s)
    F, p, _ = _certified_power_max(A, 1.0 - s, warm)
    return float(np.log(F)), p


def _phi_worst_solve(t: float, W: Channel, warm: np.ndarray | None = None):
    if not -0.5 <= t <= 0.0:
        raise ValueError("t must lie in [-1/2, 0]")
    K = W.input_size
    if t == 0.0:
        return 0.0, np.full(K, 1.0 / K)
    A = W.rows ** (1.0 / (1.0 + t))
    F, p, _ = _certified_power_max(A, 1.0 + t, warm)
    return float(np.log(F)), p


def psi_worst(s: float, W: Channel) -> tuple[float, Distribution]:
    """max_p psi-style generating function, with its maximizing input law."""
    val, p = _psi_worst_solve(s, W)
    return val, Distribution(p)


def phi_worst(t: float, W: Channel) -> tuple[float, Distribution]:
    """max_p phi(t | W, p) over input laws, for t in [-1/2, 0]."""
    val, p = _phi_worst_solve(t, W)
    return val, Distribution(p)


class _WorstCurve:
    """Memoized worst-case generating function along a parameter sweep."""

    def __init__(self, solver, W: Channel):
        self._solver = solver
        self._W = W
        self._cache: dict[float, float] = {}
        self._warm: np.ndarray | None = None

    def __call__(self, x: float) -> float:
        val = self._cache.get(x)
        if val is None:
            val, p = self._solver(x, self._W, self._warm)
            self._warm = p
            self._cache[x] = val
        return val


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _grid_golden_max(f, lo: float, hi: float, step: float = GRID_STEP):
    """Dense grid scan refined by golden-section around the best cell."""
    npts = int(round((hi - lo) / step)) + 1
    xs = np.linspace(lo, hi, npts)
    vals = [f(float(x)) for x in xs]
    i = int(np.argmax(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, npts - 1)])
    xg, vg = _golden_max(f, a, b)
    if vg >= vals[i]:
        return float(xg), float(vg)
    return float(xs[i]), float(vals[i])


@dataclass(frozen=True)
class ExponentReport:
    """One optimized exponent bound at a given coding rate."""

    rate_R: float
    bound_value: float
    optimizer: float
    family: str


def _family_reports(R: float, psi_fn, phi_fn, suffix: str) -> list[ExponentReport]:
    s_star, vd_val = _grid_golden_max(
        lambda s: (s * R - psi_fn(s)) / (1.0 + s), 0.0, 1.0
    )
    t_star, kl_val = _grid_golden_max(
        lambda t: -phi_fn(t) - t * R, -0.5, 0.0
    )
    return [
        ExponentReport(R, max(vd_val, 0.0), s_star, "vd_psi" + suffix),
        ExponentReport(R, max(kl_val, 0.0), t_star, "kl_phi" + suffix),
        ExponentReport(R, max(kl_val, 0.0) / 2.0, t_star, "vd_phi_half" + suffix),
    ]


def exponent_sweep(W: Channel, rates, p: Distribution | None = None
                   ) -> list[ExponentReport]:
    """Exponent reports for every rate in `rates`.

    With an input law p, six families are reported per rate: the
    direct psi and phi bounds for that p plus the worst-case variants.
    With p=None only the three worst-case families apply.
    """
    psi_curve = _WorstCurve(_psi_worst_solve, W)
    phi_curve = _WorstCurve(_phi_worst_solve, W)
    reports: list[ExponentReport] = []
    for R in rates:
        R = float(R)
        if R < 0:
            raise ValueError("rates must be nonnegative")
        if p is not None:
            reports.extend(_family_reports(
                R, lambda s: psi(s, W, p), lambda t: phi(t, W, p), ""))
        reports.extend(_family_reports(R, psi_curve, phi_curve, "_worst"))
    return reports


def resolvability_exponents(R: float, W: Channel,
                            p: Distribution | None = None
                            ) -> list[ExponentReport]:
    """Exponent bounds on approximation error decay at rate R."""
    return exponent_sweep(W, [R], p)


@dataclass(frozen=True)
class WiretapExponentReport:
    """Joint error/leakage exponents for rate pair (R, R')."""

    R: float
    R_prime: float
    error_exponent: float
    leak_kl_exponent: float
    leak_vd_exponent_psi: float
    leak_vd_exponent_phi: float
    error_s: float
    leak_kl_t: float
    leak_vd_psi_s: float
    error_saturated: bool
    leak_kl_saturated: bool
    leak_vd_psi_saturated: bool


def wiretap_exponents(R: float, R_prime: float, W_B: Channel, W_E: Channel,
                      p: Distribution) -> WiretapExponentReport:
    """Exponents of decoding error and of the three leakage measures."""
    if R < 0 or R_prime < 0:
        raise ValueError("rates must be nonnegative")
    if W_B.input_size != W_E.input_size:
        raise ValueError("channels must share an input alphabet")
    s_err, e_err = _grid_golden_max(
        lambda s: -phi(s, W_B, p) - s * (R + R_prime), 0.0, 1.0)
    t_kl, e_kl = _grid_golden_max(
        lambda t: -phi(t, W_E, p) - t * R_prime, -0.5, 0.0)
    s_vd, e_vd = _grid_golden_max(
        lambda s: (s * R_prime - psi(s, W_E, p)) / (1.0 + s), 0.0, 1.0)
    e_err = max(e_err, 0.0)
    e_kl = max(e_kl, 0.0)
    e_vd = max(e_vd, 0.0)
    edge = 2.0 * GRID_STEP
    return WiretapExponentReport(
        R=float(R), R_prime=float(R_prime),
        error_exponent=e_err, leak_kl_exponent=e_kl,
        leak_vd_exponent_psi=e_vd, leak_vd_exponent_phi=e_kl / 2.0,
        error_s=s_err, leak_kl_t=t_kl, leak_vd_psi_s=s_vd,
        error_saturated=(1.0 - s_err) <= edge,
        leak_kl_saturated=(t_kl + 0.5) <= edge,
        leak_vd_psi_saturated=(1.0 - s_vd) <= edge,
    )


@dataclass(frozen=True)
class CapacityResult:
    value: float
    argmax: Distribution
    iterations: int
    residual: float


def capacity(W: Channel, tol: float = 1e-8,
             max_iter: int = 200_000) -> CapacityResult:
    """Channel capacity in nats by alternating maximization.

    The stationarity certificate is max_x D(W_x || W_p) - I <= tol.
    """
    rows = W.rows
    K = rows.shape[0]
    logrows = np.where(rows > 0, np.log(np.where(rows > 0, rows, 1.0)), 0.0)
    p = np.full(K, 1.0 / K)
    for it in range(max_iter):
        wp = p @ rows
        lwp = np.where(wp > 0, np.log(np.where(wp > 0, wp, 1.0)), 0.0)
        D = np.sum(np.where(rows > 0, rows * (logrows - lwp), 0.0), axis=1)
        i_val = float(p @ D)
        resid = float(np.max(D) - i_val)
        if resid <= tol:
            return CapacityResult(max(i_val, 0.0), Distribution(p), it + 1, resid)
        p = p * np.exp(D - np.max(D))
        p = np.maximum(p, 1e-300)
        p = p / p.sum()
    raise ConvergenceError(
        f"capacity iteration cap {max_iter} exceeded "
        f"(best value {i_val!r}, residual {resid!r})",
        best_value=i_val, residual=resid,
    )


def secrecy_rate(W_B: Channel, W_E: Channel, p: Distribution) -> float:
    """I(p; W_B) - I(p; W_E); may be negative."""
    if W_B.input_size != W_E.input_size:
        raise ValueError("channels must share an input alphabet")
    return mutual_information(p, W_B) - mutual_information(p, W_E)


def secrecy_capacity_lb(W_B: Channel, W_E: Channel) -> tuple[float, Distribution]:
    """Best found value of max_p [I(p;W_B) - I(p;W_E)].

    The objective is not concave, so this is a certified-achievable
    lower bound: the returned value is the exact secrecy rate of the
    returned input law, found by multi-start ascent (plus a dense grid
    on alphabets of size <= 4).
    """
    from scipy.optimize import minimize

    if W_B.input_size != W_E.input_size:
        raise ValueError("channels must share an input alphabet")
    K = W_B.input_size

    def exact(pv: np.ndarray) -> float:
        return secrecy_rate(W_B, W_E, Distribution(pv))

    def neg_obj(pv: np.ndarray) -> float:
        pv = np.maximum(pv, 0.0)
        tot = pv.sum()
        if tot <= 0:
            return 1e9
        pv = pv / tot
        val = exact(pv)
        return -val if math.isfinite(val) else 1e9

    starts = [np.full(K, 1.0 / K)]
    for x in range(min(K, 8)):
        v = np.full(K, 0.1 / K)
        v[x] += 0.9
        starts.append(v)
    rng = np.random.Generator(np.random.Philox(key=[0x5EC2EC, 0]))
    for _ in range(12):
        starts.append(rng.dirichlet(np.ones(K)))
    if K <= 4:
        m = 50
        best_g = None
        best_gv = -math.inf

        def comps(total, parts):
            if parts == 1:
                yield (total,)
                return
            for first in range(total + 1):
                for rest in comps(total - first, parts - 1):
                    yield (first,) + rest

        for comp in comps(m, K):
            pv = np.array(comp, dtype=float) / m
            v = secrecy_rate(W_B, W_E, Distribution(pv))
            if v > best_gv:
                best_gv = v
                best_g = pv
        starts.append(0.98 * best_g + 0.02 * np.full(K, 1.0 / K))

    best_p = None
    best_v = -math.inf
    cons = ({"type": "eq", "fun": lambda v: v.sum() - 1.0},)
    bounds = [(0.0, 1.0)] * K
    for start in starts:
        res = minimize(neg_obj, start / start.sum(), method="SLSQP",
                       bounds=bounds, constraints=cons,
                       options={"maxiter": 400, "ftol": 1e-14})
        pv = np.maximum(res.x, 0.0)
        if pv.sum() <= 0:
            continue
        pv = pv / pv.sum()
        v = exact(pv)
        if v > best_v:
            best_v = v
            best_p = pv
    return best_v, Distribution(best_p)


@dataclass(frozen=True)
class TaylorComparison:
    """Quadratic small-deviation approximations next to the exact bounds."""

    Delta: float
    approx_psi: float
    approx_phi_half: float
    exact_psi_bound: float
    exact_phi_half_bound: float


def taylor_compare(R: float, W: Channel, p: Distribution) -> TaylorComparison:
    """Compare exact exponents at rate R with their quadratic expansions.

    Requires positive information-density variance; noiseless and
    constant channels have none, so the expansion is undefined there.
    """
    J = dispersion_J(p, W)
    if J <= 0.0:
        raise ValueError("zero information-density variance: "
                         "quadratic approximation undefined")
    i_val = mutual_information(p, W)
    delta = float(R) - i_val
    approx_phi_half = delta * delta / (8.0 * J)
    approx_psi = 2.0 * approx_phi_half
    reports = resolvability_exponents(R, W, p)
    by_family = {r.family: r for r in reports}
    return TaylorComparison(
        Delta=delta,
        approx_psi=approx_psi,
        approx_phi_half=approx_phi_half,
        exact_psi_bound=by_family["vd_psi"].bound_value,
        exact_phi_half_bound=by_family["vd_phi_half"].bound_value,
    )
