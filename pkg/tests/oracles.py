"""Independent reference computations used to pin expected test values.

Everything here is deliberately primitive (series, brute-force sums,
textbook formulas) and shares no code with the implementation under test.
"""
import math

import numpy as np
from scipy.stats import norm


def erf_series(x: float, terms: int = 80) -> float:
    """erf by its Maclaurin series: 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1))."""
    total = 0.0
    term = x
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -x * x / (n + 1)
    return 2.0 / math.sqrt(math.pi) * total


def lognormal_geometric_asian_price(S0, K, r, q, sigma, T, kind="call") -> float:
    """Continuously monitored geometric Asian under constant volatility.

    log of the average is Gaussian with mean log S0 + (r - q - sigma^2/2) T/2
    and variance sigma^2 T / 3 (Kemna-Vorst style closed form).
    """
    m = math.log(S0) + (r - q - 0.5 * sigma * sigma) * T / 2.0
    s = sigma * math.sqrt(T / 3.0)
    fwd = math.exp(m + 0.5 * s * s)
    d1 = (m - math.log(K) + s * s) / s
    d2 = d1 - s
    disc = math.exp(-r * T)
    if kind == "call":
        return disc * (fwd * norm.cdf(d1) - K * norm.cdf(d2))
    return disc * (K * norm.cdf(-d2) - fwd * norm.cdf(-d1))


def riemann_integral(f, a: float, b: float, n: int = 10_000) -> complex:
    """Midpoint Riemann sum; the brute-force quadrature oracle."""
    xs = a + (np.arange(n) + 0.5) * (b - a) / n
    return complex(np.sum(f(xs)) * (b - a) / n)


def trapezoid_ode_linear(g, lam: float, t: float, n: int = 10_000) -> float:
    """Solve f' = g(s) - lam f, f(0) = 0 by fine trapezoidal stepping."""
    h = t / n
    f = 0.0
    s = 0.0
    for _ in range(n):
        # trapezoidal (Crank-Nicolson) step for the linear ODE
        rhs = g(s) + g(s + h)
        f = (f * (1.0 - 0.5 * h * lam) + 0.5 * h * rhs) / (1.0 + 0.5 * h * lam)
        s += h
    return f
