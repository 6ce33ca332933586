"""Analytic cross-checks for the numerical Riccati engine.

Three families are provided, each kept deliberately independent of the
adaptive ODE solver so that they can catch engine bugs:

* the Heston Riccati system along a linear argument path, solved exactly
  through Kummer's confluent hypergeometric function M(a, b, z);
* the BNS system, whose psi equation is linear and solves in terms of
  the elementary pieces f0, f1, f2, with phi reduced to a 1-d quadrature
  of the subordinator cumulant;
* the Bates phi correction, a 1-d quadrature of the jump cumulant along
  the argument path, added on top of the Heston phi.

The numerical engine remains authoritative; these backends raise
NoConvergenceError outside their comfortable parameter regime instead of
returning degraded values.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import mpmath as mp
import numpy as np

from .contracts import PayoffKind
from .errors import BranchAmbiguityError, NoConvergenceError
from .models import Bates, Bns, Heston, functional_characteristics, jump_cumulant
from .quadrature import adaptive_gl
from .riccati import SolverConfig, solve_with_characteristics

__all__ = [
    "KummerSeriesConfig",
    "kummer_m",
    "heston_cumulant_pieces",
    "heston_average_price_pieces",
    "heston_average_strike_pieces",
    "heston_pieces_or_riccati",
    "BnsClosedFormPieces",
    "bns_f_pieces",
    "bns_average_price_pieces",
    "bns_average_strike_pieces",
    "bates_phi_jump_correction",
]


@dataclass(frozen=True)
class KummerSeriesConfig:
    max_terms: int = 500
    tail_tol: float = 1e-15

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


def _is_nonpositive_int(b: complex) -> bool:
    return abs(b.imag) < 1e-12 and b.real <= 0 and abs(b.real - round(b.real)) < 1e-12


def _m_series(a, b, z, max_terms: int, tail_tol, expf, one):
    """Kummer series in whatever arithmetic ``one`` carries (complex or mpc)."""
    if z.real < 0:
        return expf(z) * _m_series(b - a, b, -z, max_terms, tail_tol, expf, one)
    term = one
    total = one
    prev_small = False
    for n in range(max_terms):
        term = term * (a + n) / (b + n) * z / (n + 1)
        total = total + term
        small = abs(term) <= tail_tol * max(abs(total), 1e-300)
        if small and prev_small:
            return total
        prev_small = small
    raise NoConvergenceError(f"kummer series({a}, {b}, {z}): term budget exhausted")


def _term_budget(cfg: KummerSeriesConfig, z) -> int:
    # terms needed grow like |z|; never report NoConvergence just because
    # the default budget was tuned for small arguments
    return max(cfg.max_terms, int(4 * abs(z)) + 64)


def kummer_m(a, b, z, config: KummerSeriesConfig = KummerSeriesConfig()) -> complex:
    """Confluent hypergeometric M(a, b, z) by Taylor series.

    Applies the Kummer transformation M(a,b,z) = e^z M(b-a, b, -z) for
    Re(z) < 0 so the summed series never suffers the exponential
    cancellation of a large negative argument.  Raises NoConvergenceError
    when the term budget runs out or when floating cancellation has
    destroyed the requested relative accuracy.
    """
    a = complex(a)
    b = complex(b)
    z = complex(z)
    if _is_nonpositive_int(b):
        raise ValueError(f"kummer_m undefined for nonpositive integer b={b}")
    if z == 0:
        return 1.0 + 0j

    # strongly imaginary arguments make the alternating series cancel at
    # the e^{|Im z|} level; refuse once double precision cannot deliver
    if abs(z.imag) > 30.0:
        raise NoConvergenceError(
            f"kummer_m({a}, {b}, {z}): |Im z| too large for double-precision series"
        )
    return complex(_m_series(a, b, z, _term_budget(config, z), config.tail_tol, cmath.exp, 1.0 + 0j))


def _kummer_mp(a, b, z, cfg: KummerSeriesConfig):
    """Same series in the active mpmath context; tail follows the precision."""
    tol = mp.mpf(10) ** (-(mp.mp.dps - 2))
    return _m_series(mp.mpc(a), mp.mpc(b), mp.mpc(z), _term_budget(cfg, z), tol, mp.exp, mp.mpc(1))


# ---------------------------------------------------------------------------
# Heston along a linear argument path, via Kummer functions
# ---------------------------------------------------------------------------
#
# The Riccati system for psi along the argument path q(t) = c0 + c1 t,
#
#   psi' = (zeta^2/2) psi^2 + (rho zeta q(t) - lam) psi + (q^2 - q)/2,
#   psi(0) = 0,
#
# linearizes through psi = -(2/zeta^2) y'/y into
#
#   y'' + (lam - rho zeta q(t)) y' + (zeta^2/4)(q^2 - q) y = 0.
#
# Removing a Gaussian factor y = exp(alpha t^2/2 + beta t) w and shifting
# time tau = t + B1/A reduces this to w'' + A tau w' + D w = 0, whose even
# and odd solutions are M(a, 1/2, z) and tau M(a + 1/2, 3/2, z) with
# z = -A tau^2 / 2 and a = D / (2A).  phi = lam theta int psi follows as
# -(2 lam theta / zeta^2) log y(t), with the logarithm unwound by
# continuity on a time grid.


def _heston_reduction(c0: complex, c1: complex, p: Heston):
    lam, ze, rho = p.mean_reversion, p.vol_of_vol, p.correlation
    if abs(rho) >= 1.0:
        raise NoConvergenceError("hypergeometric backend requires |correlation| < 1")
    p0 = lam - rho * ze * c0
    p1 = -rho * ze * c1
    quarter_z2 = 0.25 * ze * ze
    q0 = quarter_z2 * (c0 * c0 - c0)
    q1 = quarter_z2 * c1 * (2.0 * c0 - 1.0)
    d = 1j * math.sqrt(1.0 - rho * rho)
    alpha = 0.5 * ze * c1 * (rho + d)
    big_a = ze * c1 * d
    beta = -(p0 * alpha + q1) / big_a
    b1 = 2.0 * beta + p0
    big_d = alpha + beta * beta + p0 * beta + q0
    a_kummer = big_d / (2.0 * big_a)
    tau0 = b1 / big_a
    return alpha, beta, big_a, a_kummer, tau0


class _InsufficientPrecision(Exception):
    def __init__(self, loss_digits: float):
        self.loss_digits = loss_digits


def _nonfinite(v) -> bool:
    # works for floats and (possibly huge) mpmath mpf values
    try:
        return not math.isfinite(float(v))
    except OverflowError:
        return False


def _heston_assemble(
    consts,
    params: Heston,
    t: float,
    grid: int,
    cfg: KummerSeriesConfig,
    use_mp: bool,
    max_loss: float | None,
) -> tuple[complex, complex, float]:
    """One fixed-precision evaluation of (phi, psi) plus its measured
    cancellation loss (decimal digits) in the basis combination.

    ``max_loss`` aborts early with _InsufficientPrecision once the
    dominant terms are known to cancel below the working precision.
    """
    alpha, beta, big_a, a_k, tau0 = consts
    ze = params.vol_of_vol
    lam_theta = params.mean_reversion * params.long_run_var

    if use_mp:
        alpha, beta, big_a, a_k, tau0 = (mp.mpc(v) for v in consts)
        m_eval = lambda a, b, z: _kummer_mp(a, b, z, cfg)
        expf, argf = mp.exp, mp.arg
        absf = lambda v: mp.fabs(v)
        log10f = lambda v: float(mp.log(v, 10))
        logf = lambda v: float(mp.log(v))
        two_thirds = mp.mpf(2) / 3  # must be exact: it feeds the cancelling combination
    else:
        m_eval = lambda a, b, z: _m_series(
            a, b, z, _term_budget(cfg, z), cfg.tail_tol, cmath.exp, 1.0 + 0j
        )
        expf, argf = cmath.exp, cmath.phase
        absf = abs
        log10f = lambda v: math.log10(v) if v > 0 else -math.inf
        logf = math.log
        two_thirds = 2.0 / 3.0

    def basis(tau):
        z = -0.5 * big_a * tau * tau
        m_a = m_eval(a_k, 0.5, z)
        m_a1 = m_eval(a_k + 1.0, 1.5, z)
        m_b = m_eval(a_k + 0.5, 1.5, z)
        m_b1 = m_eval(a_k + 1.5, 2.5, z)
        h1 = m_a
        h1p = -2.0 * a_k * big_a * tau * m_a1
        h2 = tau * m_b
        h2p = m_b - two_thirds * (a_k + 0.5) * big_a * tau * tau * m_b1
        return h1, h2, h1p, h2p

    h1_0, h2_0, h1p_0, h2p_0 = basis(tau0)
    # the Wronskian of the reduced pair is exactly exp(z); avoids forming a
    # cancelling determinant from exponentially large basis values
    det = expf(-0.5 * big_a * tau0 * tau0)
    c_a = (beta * h2_0 + h2p_0) / det
    c_b = -(beta * h1_0 + h1p_0) / det

    ts = np.linspace(0.0, float(t), grid + 1)
    angles = np.empty(grid + 1)
    loss = 0.0
    ln_h0 = ln_ht = 0.0
    ratio_end = 0j
    for j, tj in enumerate(ts):
        h1, h2, h1p, h2p = basis(tau0 + tj)
        hv = c_a * h1 + c_b * h2
        dominant = absf(c_a) * absf(h1) + absf(c_b) * absf(h2)
        mag = absf(hv)
        if mag == 0 or _nonfinite(mag) or _nonfinite(dominant):
            raise _InsufficientPrecision(math.inf)
        loss = max(loss, log10f(dominant / mag))
        if max_loss is not None and loss > max_loss:
            raise _InsufficientPrecision(loss)
        angles[j] = float(argf(hv))
        if j == 0:
            ln_h0 = logf(mag)
        if j == grid:
            ln_ht = logf(mag)
            ratio_end = complex((c_a * h1p + c_b * h2p) / hv)

    steps = np.diff(angles)
    steps -= 2.0 * np.pi * np.round(steps / (2.0 * np.pi))
    if np.any(np.abs(steps) > 2.8):
        raise BranchAmbiguityError("log-unwinding grid too coarse; refine the grid")
    delta_log = (ln_ht - ln_h0) + 1j * float(np.sum(steps))

    alpha_c, beta_c = complex(alpha), complex(beta)
    g_t = 0.5 * alpha_c * t * t + beta_c * t
    g_prime = alpha_c * t + beta_c
    psi = -(2.0 / (ze * ze)) * (g_prime + ratio_end)
    phi = -lam_theta * (2.0 / (ze * ze)) * (g_t + delta_log)
    return phi, psi, loss


def heston_cumulant_pieces(
    c0,
    c1,
    t: float,
    params: Heston,
    config: KummerSeriesConfig = KummerSeriesConfig(),
    grid: int = 64,
) -> tuple[complex, complex]:
    """Exact (phi, psi) of the Heston Riccati system along q(s) = c0 + c1 s.

    psi(0) = 0.  The even/odd hypergeometric basis is evaluated around
    the shifted origin of the reduced equation, so far from it the wanted
    solution is an exponentially small combination of exponentially large
    basis values.  The assembly measures that cancellation and, when
    double precision cannot carry it, re-runs in extended precision until
    two precision levels agree to 1e-9.  Raises NoConvergenceError when
    no precision level suffices and BranchAmbiguityError when the
    logarithm-unwinding grid is too coarse; callers refine or fall back
    to the numerical engine, which is authoritative.
    """
    c0 = complex(c0)
    c1 = complex(c1)
    if t == 0:
        return 0j, 0j
    if c1 == 0:
        if c0 in (0j, 1 + 0j):
            return 0j, 0j
        raise NoConvergenceError("constant argument path not supported by this backend")

    consts = _heston_reduction(c0, c1, params)
    _, _, big_a, _, tau0 = consts
    zs = -0.5 * big_a * (tau0 + np.linspace(0.0, t, 9)) ** 2
    series_loss = 0.434 * float(np.max(np.abs(zs.imag)))

    try:
        phi, psi, loss = _heston_assemble(
            consts, params, t, grid, config, use_mp=False, max_loss=6.5 - series_loss
        )
        if loss + series_loss <= 6.5:
            return phi, psi
        est_loss = loss
    except _InsufficientPrecision as exc:
        est_loss = exc.loss_digits
    except NoConvergenceError:
        est_loss = 16.0

    if not math.isfinite(est_loss):
        est_loss = 20.0
    dps = int(min(max(16.0 + est_loss + series_loss + 12.0, 30.0), 140.0))
    prev: tuple[complex, complex] | None = None
    while dps <= 150:
        with mp.workdps(dps):
            try:
                phi, psi, loss = _heston_assemble(
                    consts, params, t, grid, config, use_mp=True, max_loss=dps - 10.0
                )
            except _InsufficientPrecision as exc:
                if math.isfinite(exc.loss_digits):
                    dps = max(dps + 12, int(exc.loss_digits + series_loss + 22.0))
                else:
                    dps += 25
                prev = None
                continue
        if dps - (loss + series_loss) >= 12.0:
            return phi, psi
        if prev is not None:
            agree = abs(phi - prev[0]) <= 1e-9 * (1.0 + abs(phi)) and abs(
                psi - prev[1]
            ) <= 1e-9 * (1.0 + abs(psi))
            if agree:
                return phi, psi
        prev = (phi, psi)
        dps += 12
    raise NoConvergenceError(
        "hypergeometric backend could not reach the target accuracy at any precision"
    )


def heston_average_price_pieces(
    u, t: float, horizon: float, params: Heston, config: KummerSeriesConfig = KummerSeriesConfig(), grid: int = 64
) -> tuple[complex, complex]:
    """(phi, psi) of the average-price system, argument path u s / T."""
    return heston_cumulant_pieces(0j, u / horizon, t, params, config, grid)


def heston_average_strike_pieces(
    u, t: float, horizon: float, params: Heston, config: KummerSeriesConfig = KummerSeriesConfig(), grid: int = 64
) -> tuple[complex, complex]:
    """(phi, psi) of the average-strike system, argument path (1-u) + u s / T."""
    return heston_cumulant_pieces(1.0 - u, u / horizon, t, params, config, grid)


def heston_pieces_or_riccati(
    c0,
    c1,
    t: float,
    params: Heston,
    config: KummerSeriesConfig = KummerSeriesConfig(),
    solver: SolverConfig = SolverConfig(),
) -> tuple[complex, complex]:
    """Hypergeometric pieces with grid refinement and numerical fallback.

    Retries the branch-unwinding grid up to 1024 points; if the series
    backend cannot converge (extreme vol-of-vol or argument regimes) the
    numerical Riccati engine supplies the value instead.
    """
    grid = 64
    while True:
        try:
            return heston_cumulant_pieces(c0, c1, t, params, config, grid)
        except BranchAmbiguityError:
            grid *= 2
            if grid > 1024:
                break
        except NoConvergenceError:
            break
    fc = functional_characteristics(params)
    res = solve_with_characteristics(fc, c0, 0j, c1, 0j, t, solver)
    return res.phi, res.psi


# ---------------------------------------------------------------------------
# BNS closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BnsClosedFormPieces:
    """Elementary integrals of the exponential decay kernel.

    f0(t) = (1 - e^{-lam t}) / lam
    f1(t) = t / lam - (1 - e^{-lam t}) / lam^2
    f2(t) = t^2 / lam - 2 t / lam^2 + 2 (1 - e^{-lam t}) / lam^3

    These solve f' = g - lam f, f(0) = 0 for g = 1, t, t^2 respectively.
    """

    f0: Callable
    f1: Callable
    f2: Callable


def bns_f_pieces(decay: float) -> BnsClosedFormPieces:
    lam = float(decay)

    def f0(t):
        return (1.0 - np.exp(-lam * t)) / lam

    def f1(t):
        return t / lam - (1.0 - np.exp(-lam * t)) / lam**2

    def f2(t):
        return t * t / lam - 2.0 * t / lam**2 + 2.0 * (1.0 - np.exp(-lam * t)) / lam**3

    return BnsClosedFormPieces(f0, f1, f2)


def bns_average_price_pieces(
    u, t: float, horizon: float, params: Bns, quad_tol: float = 1e-10
) -> tuple[complex, complex]:
    """Exact (phi, psi) of the BNS average-price system at time t.

    psi solves the linear equation psi' = (q^2 - q)/2 - lam psi with
    q(s) = u s / T, giving psi(s) = u^2/(2 T^2) f2(s) - u/(2 T) f1(s);
    phi is the lam k(psi + rho q) integral by composite Gauss quadrature
    minus the leverage compensator lam k(rho) u t^2 / (2 T).
    """
    u = complex(u)
    T = horizon
    lam, rho = params.decay, params.leverage
    k = params.bdlp.cumulant
    f = bns_f_pieces(lam)

    def psi_of(s):
        return (u * u) / (2.0 * T * T) * f.f2(s) - u / (2.0 * T) * f.f1(s)

    integrand = lambda s: lam * k(psi_of(s) + rho * u * s / T)
    phi = adaptive_gl(integrand, 0.0, t, tol=quad_tol)
    k_rho = complex(k(complex(rho))) if rho != 0 else 0j
    phi -= lam * k_rho * u * t * t / (2.0 * T)
    return phi, complex(psi_of(t))


def bns_average_strike_pieces(
    u, t: float, horizon: float, params: Bns, quad_tol: float = 1e-10
) -> tuple[complex, complex]:
    """Exact (phi, psi) of the BNS average-strike system at time t.

    Argument path q(s) = (1 - u) + u s / T; the linear psi equation gives
    psi(s) = u^2/(2T^2) f2(s) + u(1 - 2u)/(2T) f1(s) + (u^2 - u)/2 f0(s).
    """
    u = complex(u)
    T = horizon
    lam, rho = params.decay, params.leverage
    k = params.bdlp.cumulant
    f = bns_f_pieces(lam)

    def psi_of(s):
        return (
            (u * u) / (2.0 * T * T) * f.f2(s)
            + u * (1.0 - 2.0 * u) / (2.0 * T) * f.f1(s)
            + 0.5 * (u * u - u) * f.f0(s)
        )

    def q_of(s):
        return (1.0 - u) + u * s / T

    integrand = lambda s: lam * k(psi_of(s) + rho * q_of(s))
    phi = adaptive_gl(integrand, 0.0, t, tol=quad_tol)
    k_rho = complex(k(complex(rho))) if rho != 0 else 0j
    phi -= lam * k_rho * ((1.0 - u) * t + u * t * t / (2.0 * T))
    return phi, complex(psi_of(t))


# ---------------------------------------------------------------------------
# Bates jump correction
# ---------------------------------------------------------------------------

def bates_phi_jump_correction(
    u,
    horizon: float,
    model: Bates,
    kind: PayoffKind,
    t: float | None = None,
    quad_tol: float = 1e-10,
) -> complex:
    """Jump contribution to phi for the Bates average-price/strike systems.

    The jumps enter F additively, so phi equals the Heston phi plus

        nu * [ int_0^t kappa(q(s)) ds  -  kappa(1) int_0^t q(s) ds ]

    along the payoff's argument path q.  The compensator integral is
    elementary; the cumulant integral uses adaptive Gauss panels.
    """
    u = complex(u)
    T = horizon
    if t is None:
        t = T
    nu = model.jump_intensity
    law = model.jumps
    if nu == 0:
        return 0j
    k1 = complex(jump_cumulant(law, 1.0 + 0j))
    if kind.is_average_price:
        q_of = lambda s: u * s / T
        comp = u * t * t / (2.0 * T)
    else:
        q_of = lambda s: (1.0 - u) + u * s / T
        comp = (1.0 - u) * t + u * t * t / (2.0 * T)
    integral = adaptive_gl(lambda s: jump_cumulant(law, q_of(s)), 0.0, t, tol=quad_tol)
    return nu * (integral - k1 * comp)
