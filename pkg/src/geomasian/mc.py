"""Monte Carlo oracle for the model catalog.

Validation-side pricer: simulates terminal triples (X_T, Ybar, V_T) with
Ybar = (1/T) int_0^T X_s ds (trapezoid on the step grid) and estimates
payoff prices and joint cumulants from them.  Never the primary pricing
path.

Reproducibility: paths are generated in fixed-size blocks, each driven by
its own counter-based Philox stream keyed by (seed, block index).  The
stream layout therefore depends only on the seed and the block position,
never on scheduling or worker count, and reductions run in fixed block
order, so estimates are bit-identical for a given (seed, config).

Variance schemes: square-root (CIR) variance uses full-truncation Euler;
subordinator-driven OU variance is sampled exactly between jumps, with
compound-Poisson-exponential background drivers (the Gamma-OU built-in).
Other subordinators have no exact jump representation here and are
reported as unsupported.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .contracts import ContractSpec, PayoffKind
from .errors import UnsupportedModelError
from .models import (
    Bates,
    Bns,
    CirTcLevy,
    GammaOuSubordinator,
    Heston,
    KouJumps,
    ModelSpec,
    NoJumps,
    NormalJumps,
    OuTcLevy,
    TurboBates,
    jump_cumulant,
)

__all__ = ["SimConfig", "McEstimate", "TerminalSample", "simulate_terminal", "mc_price", "mc_cumulant"]

_PAIR_BLOCK = 32768  # driving paths per Philox stream block

SCHEME_FULL_TRUNCATION = "FullTruncationEuler"
SCHEME_EXACT_OU = "ExactOu"

_REQUIRED_SCHEME = {
    Heston: SCHEME_FULL_TRUNCATION,
    Bates: SCHEME_FULL_TRUNCATION,
    TurboBates: SCHEME_FULL_TRUNCATION,
    CirTcLevy: SCHEME_FULL_TRUNCATION,
    Bns: SCHEME_EXACT_OU,
    OuTcLevy: SCHEME_EXACT_OU,
}


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_paths: int = 100_000
    n_steps: int = 1000
    scheme: str | None = None  # None selects the scheme the model requires
    antithetic: bool = True

    def __post_init__(self):
        if self.n_paths < 100:
            raise ValueError("n_paths must be >= 100")
        if self.n_steps < 10:
            raise ValueError("n_steps must be >= 10")
        if self.scheme not in (None, SCHEME_FULL_TRUNCATION, SCHEME_EXACT_OU):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int


@dataclass(frozen=True)
class TerminalSample:
    x_t: np.ndarray
    y_bar: np.ndarray
    v_t: np.ndarray
    pair_split: int | None  # antithetic mate of path i is path i + pair_split

    def fold_pairs(self, values: np.ndarray) -> np.ndarray:
        if self.pair_split is None:
            return values
        s = self.pair_split
        return 0.5 * (values[:s] + values[s:])


def _rng_for_block(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _normal_pair(rng: np.random.Generator, m: int, antithetic: bool) -> np.ndarray:
    z = rng.standard_normal(m)
    return np.concatenate([z, -z]) if antithetic else z


def _jump_sizes(rng: np.random.Generator, law, counts: np.ndarray) -> np.ndarray:
    """Sum of ``counts`` i.i.d. jump sizes per path."""
    n = counts.size
    if isinstance(law, NormalJumps):
        z = rng.standard_normal(n)
        return law.mean * counts + law.stdev * np.sqrt(counts) * z
    if isinstance(law, KouJumps):
        total = np.zeros(n)
        for j in range(int(counts.max(initial=0))):
            up = rng.random(n) < law.up_prob
            size = np.where(
                up,
                rng.exponential(1.0 / law.up_rate, n),
                -rng.exponential(1.0 / law.down_rate, n),
            )
            total += np.where(counts > j, size, 0.0)
        return total
    return np.zeros(n)


def _k1(law, intensity: float) -> float:
    if intensity == 0 or isinstance(law, NoJumps):
        return 0.0
    return complex(jump_cumulant(law, 1.0 + 0j)).real


# ---------------------------------------------------------------------------
# Block simulators: return (x_T, trapezoid sum of x, v_T) for one block
# ---------------------------------------------------------------------------

def _block_cir_family(model, x0, v0, T, n_steps, m, rng, antithetic):
    if isinstance(model, Heston):
        h = model
        nu0 = nu1 = 0.0
        law = NoJumps()
        turbo = False
    elif isinstance(model, Bates):
        h = model.heston
        nu0, nu1 = model.jump_intensity, 0.0
        law = model.jumps
        turbo = False
    else:  # TurboBates
        h = model.heston
        nu0, nu1 = model.base_intensity, model.var_intensity
        law = model.jumps
        turbo = True

    lam, theta, zeta, rho = h.mean_reversion, h.long_run_var, h.vol_of_vol, h.correlation
    k1_0 = _k1(law, nu0)
    k1_1 = _k1(law, nu1)
    rho_c = math.sqrt(1.0 - rho * rho)
    dt = T / n_steps
    sdt = math.sqrt(dt)
    n_out = 2 * m if antithetic else m

    x = np.full(n_out, x0)
    v = np.full(n_out, v0)
    ysum = 0.5 * x.copy()
    for _ in range(n_steps):
        z1 = _normal_pair(rng, m, antithetic)
        z2 = _normal_pair(rng, m, antithetic)
        vp = np.maximum(v, 0.0)
        v_next = v + lam * (theta - vp) * dt + zeta * np.sqrt(vp) * sdt * z2

        jump = 0.0
        if nu0 > 0 or nu1 > 0:
            if turbo:
                vnp = np.maximum(v_next, 0.0)
                bound = nu0 + nu1 * np.maximum(vp, vnp)
                counts = rng.poisson(bound * dt)
                jump = np.zeros(n_out)
                for j in range(int(counts.max(initial=0))):
                    tau = rng.random(n_out)
                    v_tau = vp + (vnp - vp) * tau
                    accept = rng.random(n_out) < (nu0 + nu1 * v_tau) / bound
                    size = _single_jump(rng, law, n_out)
                    jump += np.where((counts > j) & accept, size, 0.0)
            else:
                counts = rng.poisson(nu0 * dt, n_out)
                jump = _jump_sizes(rng, law, counts)

        drift = -(nu0 * k1_0) - (0.5 + nu1 * k1_1) * vp
        x = x + drift * dt + np.sqrt(vp) * sdt * (rho * z2 + rho_c * z1) + jump
        v = v_next
        ysum += x
    ysum -= 0.5 * x
    return x, ysum * dt, v


def _single_jump(rng: np.random.Generator, law, n: int) -> np.ndarray:
    if isinstance(law, NormalJumps):
        return law.mean + law.stdev * rng.standard_normal(n)
    if isinstance(law, KouJumps):
        up = rng.random(n) < law.up_prob
        return np.where(
            up, rng.exponential(1.0 / law.up_rate, n), -rng.exponential(1.0 / law.down_rate, n)
        )
    return np.zeros(n)


def _ou_variance_step(rng, lam, intensity, jump_scale, v, dt, n_out):
    """Exact OU decay plus compound-Poisson-exponential jumps over one step.

    Returns (v_next, integral of V over the step, sum of jump sizes).
    """
    counts = rng.poisson(intensity * dt, n_out)
    sum_sizes = np.zeros(n_out)
    v_end_j = np.zeros(n_out)
    v_int_j = np.zeros(n_out)
    for j in range(int(counts.max(initial=0))):
        active = counts > j
        rem = (1.0 - rng.random(n_out)) * dt  # time left after the jump
        size = np.where(active, rng.exponential(jump_scale, n_out), 0.0)
        sum_sizes += size
        v_end_j += size * np.exp(-lam * rem)
        v_int_j += size * (1.0 - np.exp(-lam * rem)) / lam
    decay = math.exp(-lam * dt)
    f0 = (1.0 - decay) / lam
    v_int = v * f0 + v_int_j
    v_next = v * decay + v_end_j
    return v_next, v_int, sum_sizes


def _require_gamma_ou(sub, what: str) -> GammaOuSubordinator:
    if not isinstance(sub, GammaOuSubordinator):
        raise UnsupportedModelError(
            f"{what}: only the compound-Poisson-exponential (Gamma-OU) subordinator "
            "has an exact jump representation for simulation"
        )
    return sub


def _block_bns(model: Bns, x0, v0, T, n_steps, m, rng, antithetic):
    sub = _require_gamma_ou(model.bdlp, "BNS oracle")
    lam = model.decay
    rho = model.leverage
    k_rho = sub.shape * rho / (sub.rate - rho) if rho != 0 else 0.0
    dt = T / n_steps
    n_out = 2 * m if antithetic else m

    x = np.full(n_out, x0)
    v = np.full(n_out, v0)
    ysum = 0.5 * x.copy()
    for _ in range(n_steps):
        v_next, v_int, jumps = _ou_variance_step(
            rng, lam, sub.shape * lam, 1.0 / sub.rate, v, dt, n_out
        )
        z = _normal_pair(rng, m, antithetic)
        x = x - lam * k_rho * dt - 0.5 * v_int + np.sqrt(v_int) * z + rho * jumps
        v = v_next
        ysum += x
    ysum -= 0.5 * x
    return x, ysum * dt, v


def _levy_increment(rng, base, d_gamma, n_out):
    """Increment of the martingale-normalized base Levy process over d_gamma."""
    sig = base.diffusion_vol
    nu = base.jump_intensity
    k1 = _k1(base.jumps, nu)
    drift = -(0.5 * sig * sig + nu * k1)
    z = rng.standard_normal(n_out)
    inc = drift * d_gamma + sig * np.sqrt(d_gamma) * z
    if nu > 0:
        counts = rng.poisson(nu * d_gamma)
        inc = inc + _jump_sizes(rng, base.jumps, counts)
    return inc


def _block_ou_tc(model: OuTcLevy, x0, v0, T, n_steps, m, rng, antithetic):
    sub = _require_gamma_ou(model.subordinator, "OU time-change oracle")
    lam = model.decay
    dt = T / n_steps
    n_out = 2 * m if antithetic else m

    x = np.full(n_out, x0)
    v = np.full(n_out, v0)
    ysum = 0.5 * x.copy()
    for _ in range(n_steps):
        v, d_gamma, _ = _ou_variance_step(rng, lam, sub.shape * lam, 1.0 / sub.rate, v, dt, n_out)
        x = x + _levy_increment(rng, model.base, d_gamma, n_out)
        ysum += x
    ysum -= 0.5 * x
    return x, ysum * dt, v


def _block_cir_tc(model: CirTcLevy, x0, v0, T, n_steps, m, rng, antithetic):
    lam, theta, eta = model.mean_reversion, model.long_run, model.vol_of_vol
    dt = T / n_steps
    sdt = math.sqrt(dt)
    n_out = 2 * m if antithetic else m

    x = np.full(n_out, x0)
    v = np.full(n_out, v0)
    ysum = 0.5 * x.copy()
    for _ in range(n_steps):
        z2 = _normal_pair(rng, m, antithetic)
        vp = np.maximum(v, 0.0)
        v_next = v + lam * (theta - vp) * dt + eta * np.sqrt(vp) * sdt * z2
        d_gamma = 0.5 * (vp + np.maximum(v_next, 0.0)) * dt
        x = x + _levy_increment(rng, model.base, d_gamma, n_out)
        v = v_next
        ysum += x
    ysum -= 0.5 * x
    return x, ysum * dt, v


_BLOCK_SIMULATORS = {
    Heston: _block_cir_family,
    Bates: _block_cir_family,
    TurboBates: _block_cir_family,
    Bns: _block_bns,
    OuTcLevy: _block_ou_tc,
    CirTcLevy: _block_cir_tc,
}


def simulate_terminal(model: ModelSpec, contract: ContractSpec, sim: SimConfig) -> TerminalSample:
    """Simulate (X_T, Ybar, V_T) for every path; X_0 = log(spot).

    Ybar is the trapezoidal time average of X on the step grid, so
    exp((r-q)T/2 + Ybar) is the simulated geometric average price.
    """
    required = _REQUIRED_SCHEME[type(model)]
    if sim.scheme is not None and sim.scheme != required:
        raise ValueError(f"{type(model).__name__} requires scheme {required}, got {sim.scheme}")

    simulate = _BLOCK_SIMULATORS[type(model)]
    x0 = contract.log_spot
    v0 = contract.initial_var
    T = contract.maturity

    n = sim.n_paths + (sim.n_paths % 2 if sim.antithetic else 0)
    driving = n // 2 if sim.antithetic else n
    fresh_x, fresh_y, fresh_v = [], [], []
    mirror_x, mirror_y, mirror_v = [], [], []

    block = 0
    done = 0
    while done < driving:
        m = min(_PAIR_BLOCK, driving - done)
        rng = _rng_for_block(sim.seed, block)
        bx, bysum, bv = simulate(model, x0, v0, T, sim.n_steps, m, rng, sim.antithetic)
        by = bysum / T
        if sim.antithetic:
            fresh_x.append(bx[:m])
            fresh_y.append(by[:m])
            fresh_v.append(bv[:m])
            mirror_x.append(bx[m:])
            mirror_y.append(by[m:])
            mirror_v.append(bv[m:])
        else:
            fresh_x.append(bx)
            fresh_y.append(by)
            fresh_v.append(bv)
        done += m
        block += 1

    if sim.antithetic:
        x = np.concatenate(fresh_x + mirror_x)
        y = np.concatenate(fresh_y + mirror_y)
        v = np.concatenate(fresh_v + mirror_v)
        return TerminalSample(x, y, v, n // 2)
    return TerminalSample(np.concatenate(fresh_x), np.concatenate(fresh_y), np.concatenate(fresh_v), None)


def _estimate(folded: np.ndarray) -> McEstimate:
    n = folded.size
    mean = float(np.mean(folded))
    se = float(np.std(folded, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean, se, n)


def mc_price(
    model: ModelSpec,
    contract: ContractSpec,
    sim: SimConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """Discounted Monte Carlo payoff estimate (antithetic pairs counted once)."""
    if sample is None:
        sample = simulate_terminal(model, contract, sim)
    T = contract.maturity
    drift = contract.rate - contract.dividend_yield
    avg = np.exp(drift * T / 2.0 + sample.y_bar)
    terminal = np.exp(drift * T + sample.x_t)
    kind = contract.payoff
    if kind is PayoffKind.AVERAGE_PRICE_CALL:
        payoff = np.maximum(avg - contract.strike, 0.0)
    elif kind is PayoffKind.AVERAGE_PRICE_PUT:
        payoff = np.maximum(contract.strike - avg, 0.0)
    elif kind is PayoffKind.AVERAGE_STRIKE_CALL:
        payoff = np.maximum(terminal - avg, 0.0)
    else:
        payoff = np.maximum(avg - terminal, 0.0)
    disc = math.exp(-contract.rate * T)
    est = _estimate(sample.fold_pairs(disc * payoff))
    return est


def mc_cumulant(
    model: ModelSpec,
    u1: float,
    u3: float,
    contract: ContractSpec,
    sim: SimConfig,
    sample: TerminalSample | None = None,
) -> McEstimate:
    """Estimate log E[exp(u1 X_T + u3 Y_T)] for real u1, u3.

    Standard error by the delta method.  Warns when the sample kurtosis
    of the exponential weight exceeds 100, which signals an unreliable
    empirical moment generating function at these arguments.
    """
    if sample is None:
        sample = simulate_terminal(model, contract, sim)
    T = contract.maturity
    w = np.exp(u1 * sample.x_t + u3 * T * sample.y_bar)
    centered = w - np.mean(w)
    var = float(np.mean(centered**2))
    if var > 0:
        kurt = float(np.mean(centered**4)) / var**2
        if kurt > 100:
            warnings.warn(
                f"empirical mgf at (u1={u1}, u3={u3}) has kurtosis {kurt:.1f}; "
                "estimate may be unreliable",
                RuntimeWarning,
                stacklevel=2,
            )
    est = _estimate(sample.fold_pairs(w))
    if est.mean <= 0:
        raise ValueError("empirical mgf mean is not positive; cannot take log")
    return McEstimate(math.log(est.mean), est.std_error / est.mean, est.n_paths)
