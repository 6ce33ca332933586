"""Affine stochastic volatility model catalog.

Six models are shipped: Heston, Bates, Turbo-Bates (state-dependent jump
intensity), Barndorff-Nielsen/Shephard (BNS), and Levy processes
time-changed by an integrated OU or CIR activity rate.  Each model is a
frozen parameter record; :func:`functional_characteristics` turns it into
the pair of complex functions ``(F, R)`` driving the generalized Riccati
equations of the affine transform

    d/dt phi = F(u, psi),    d/dt psi = R(u, psi).

Risk-neutral compensators are baked into F and R, so every catalog model
satisfies F(0,0) = R(0,0) = F(1,0) = R(1,0) = 0 and the discounted asset
exp(X) is a martingale.  All closures are pure and accept python complex
scalars or numpy complex arrays, so they are safe to evaluate from any
number of threads.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Callable, Union

import numpy as np

from .errors import DomainExitError

__all__ = [
    "NormalJumps",
    "KouJumps",
    "NoJumps",
    "JumpLaw",
    "jump_cumulant",
    "jump_strip",
    "GammaOuSubordinator",
    "InverseGaussianSubordinator",
    "CustomSubordinator",
    "BaseLevy",
    "Heston",
    "Bates",
    "TurboBates",
    "Bns",
    "OuTcLevy",
    "CirTcLevy",
    "ModelSpec",
    "FunctionalCharacteristics",
    "functional_characteristics",
    "MartingaleReport",
    "check_martingale",
    "model_name",
]

_INF = math.inf


def _exp(z):
    # cmath for python scalars keeps the hot Riccati loop free of numpy overhead
    if type(z) is complex:
        return cmath.exp(z)
    return np.exp(z)


def _sqrt(z):
    if type(z) is complex:
        return cmath.sqrt(z)
    return np.sqrt(z)


# ---------------------------------------------------------------------------
# Jump laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalJumps:
    """Gaussian jump sizes with the given mean and standard deviation."""

    mean: float = 0.0
    stdev: float = 0.0

    def __post_init__(self):
        if self.stdev < 0:
            raise ValueError("NormalJumps.stdev must be >= 0")


@dataclass(frozen=True)
class KouJumps:
    """Double-exponential jump sizes: up with probability ``up_prob``.

    Up jumps are Exp(up_rate), down jumps are -Exp(down_rate).  The
    cumulant has simple poles at up_rate and -down_rate, so it is only
    defined for Re(z) strictly inside (-down_rate, up_rate).
    """

    up_prob: float
    up_rate: float
    down_rate: float

    def __post_init__(self):
        if not 0.0 <= self.up_prob <= 1.0:
            raise ValueError("KouJumps.up_prob must lie in [0, 1]")
        if self.up_rate <= 0 or self.down_rate <= 0:
            raise ValueError("KouJumps rates must be > 0")


@dataclass(frozen=True)
class NoJumps:
    """Degenerate jump law: no jumps at all."""


JumpLaw = Union[NormalJumps, KouJumps, NoJumps]


def jump_cumulant(law: JumpLaw, z):
    """Unit-intensity jump cumulant exponent kappa(z) = E[exp(z J)] - 1.

    The compound-Poisson intensity is deliberately factored out: every
    model multiplies by its own intensity when assembling F and R, which
    keeps one convention across Bates, Turbo-Bates and the time-changed
    variants.  kappa(0) = 0 for every law.
    """
    if isinstance(law, NoJumps):
        return z * 0
    if isinstance(law, NormalJumps):
        return _exp(law.mean * z + 0.5 * law.stdev * law.stdev * z * z) - 1.0
    if isinstance(law, KouJumps):
        re = z.real
        if np.any(re >= law.up_rate) or np.any(re <= -law.down_rate):
            raise DomainExitError(
                f"Kou cumulant argument Re(z) outside ({-law.down_rate}, {law.up_rate})"
            )
        return z * (law.up_prob / (law.up_rate - z) - (1.0 - law.up_prob) / (law.down_rate + z))
    raise TypeError(f"unknown jump law {law!r}")


def jump_strip(law: JumpLaw) -> tuple[float, float]:
    """Open interval of Re(z) on which the jump cumulant is finite."""
    if isinstance(law, KouJumps):
        return (-law.down_rate, law.up_rate)
    return (-_INF, _INF)


# ---------------------------------------------------------------------------
# Subordinator cumulants (BDLP for BNS, activity driver for OU time change)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaOuSubordinator:
    """Compound-Poisson-exponential subordinator (Gamma-OU background driver).

    Cumulant k(z) = shape * z / (rate - z), finite for Re(z) < rate.  The
    driven OU process has a stationary Gamma(shape, rate) marginal.  This
    is the only shipped subordinator with an exact jump representation
    (intensity ``shape``, Exp(``rate``) jump sizes), hence the only one the
    Monte Carlo oracle can simulate.
    """

    shape: float
    rate: float

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("GammaOuSubordinator parameters must be > 0")

    @property
    def domain_bound(self) -> float:
        return self.rate

    @property
    def simulable(self) -> bool:
        return True

    def cumulant(self, z):
        if np.any(z.real >= self.rate):
            raise DomainExitError(f"subordinator cumulant needs Re(z) < {self.rate}")
        return self.shape * z / (self.rate - z)


@dataclass(frozen=True)
class InverseGaussianSubordinator:
    """BDLP of an OU process with stationary IG(delta, gamma) marginal.

    Cumulant k(z) = delta * z / sqrt(gamma^2 - 2 z), finite for
    Re(z) < gamma^2 / 2.  Infinite activity: usable for transform pricing
    but not for the jump-exact Monte Carlo scheme.
    """

    delta: float
    gamma: float

    def __post_init__(self):
        if self.delta <= 0 or self.gamma <= 0:
            raise ValueError("InverseGaussianSubordinator parameters must be > 0")

    @property
    def domain_bound(self) -> float:
        return 0.5 * self.gamma * self.gamma

    @property
    def simulable(self) -> bool:
        return False

    def cumulant(self, z):
        if np.any(z.real >= self.domain_bound):
            raise DomainExitError(f"subordinator cumulant needs Re(z) < {self.domain_bound}")
        return self.delta * z / _sqrt(self.gamma * self.gamma - 2.0 * z)


@dataclass(frozen=True)
class CustomSubordinator:
    """User-supplied subordinator cumulant with a declared domain bound."""

    fn: Callable
    bound: float
    label: str = "custom"

    @property
    def domain_bound(self) -> float:
        return self.bound

    @property
    def simulable(self) -> bool:
        return False

    def cumulant(self, z):
        if np.any(z.real >= self.bound):
            raise DomainExitError(f"subordinator cumulant needs Re(z) < {self.bound}")
        return self.fn(z)


Subordinator = Union[GammaOuSubordinator, InverseGaussianSubordinator, CustomSubordinator]


def _check_subordinator(k: Subordinator, where: str) -> None:
    # light structural checks: k(0) = 0 and k increasing on the real axis
    z0 = complex(k.cumulant(0.0 + 0j))
    if abs(z0) > 1e-12:
        raise ValueError(f"{where}: subordinator cumulant must vanish at 0, got {z0}")
    pts = [-2.0, -1.0, -0.25, 0.0]
    vals = [complex(k.cumulant(p + 0j)).real for p in pts]
    if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
        raise ValueError(f"{where}: subordinator cumulant must be increasing on the real axis")


# ---------------------------------------------------------------------------
# Base Levy process for the time-changed models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseLevy:
    """Martingale-normalized Levy cumulant for the time-changed models.

    theta(u) = sigma^2/2 (u^2 - u) + nu (kappa(u) - u kappa(1)).  The
    linear compensation term makes any additive drift choice irrelevant,
    so the record carries no drift field; exp(L_s) is a martingale in s
    by construction.
    """

    diffusion_vol: float = 1.0
    jump_intensity: float = 0.0
    jumps: JumpLaw = field(default_factory=NoJumps)

    def __post_init__(self):
        if self.diffusion_vol < 0:
            raise ValueError("BaseLevy.diffusion_vol must be >= 0")
        if self.jump_intensity < 0:
            raise ValueError("BaseLevy.jump_intensity must be >= 0")
        if self.diffusion_vol == 0 and self.jump_intensity == 0:
            raise ValueError("BaseLevy needs a diffusion or a jump component")
        if self.jump_intensity > 0 and isinstance(self.jumps, KouJumps) and self.jumps.up_rate <= 1:
            raise ValueError("Kou up_rate must exceed 1 so that kappa(1) is finite")

    def compensated_cumulant(self, u):
        half_s2 = 0.5 * self.diffusion_vol * self.diffusion_vol
        out = half_s2 * (u * u - u)
        if self.jump_intensity > 0 and not isinstance(self.jumps, NoJumps):
            k1 = complex(jump_cumulant(self.jumps, 1.0 + 0j))
            out = out + self.jump_intensity * (jump_cumulant(self.jumps, u) - u * k1)
        return out

    def strip(self) -> tuple[float, float]:
        if self.jump_intensity > 0:
            return jump_strip(self.jumps)
        return (-_INF, _INF)


# ---------------------------------------------------------------------------
# Model parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Heston:
    """Square-root stochastic variance with correlated Brownian drivers."""

    mean_reversion: float
    long_run_var: float
    vol_of_vol: float
    correlation: float

    def __post_init__(self):
        if self.mean_reversion <= 0 or self.long_run_var <= 0 or self.vol_of_vol <= 0:
            raise ValueError("Heston mean_reversion, long_run_var, vol_of_vol must be > 0")
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError("Heston correlation must lie in [-1, 1]")

    @property
    def feller_satisfied(self) -> bool:
        # violation is a warning, not an error: the transform stays valid
        return self.vol_of_vol**2 < 2.0 * self.mean_reversion * self.long_run_var


def _require_k1_finite(law: JumpLaw, where: str) -> None:
    if isinstance(law, KouJumps) and law.up_rate <= 1:
        raise ValueError(f"{where}: Kou up_rate must exceed 1 so that kappa(1) is finite")


@dataclass(frozen=True)
class Bates:
    """Heston variance plus compound-Poisson jumps in the log price."""

    heston: Heston
    jump_intensity: float
    jumps: JumpLaw = field(default_factory=NormalJumps)

    def __post_init__(self):
        if self.jump_intensity < 0:
            raise ValueError("Bates.jump_intensity must be >= 0")
        _require_k1_finite(self.jumps, "Bates")


@dataclass(frozen=True)
class TurboBates:
    """Bates with jump intensity base_intensity + var_intensity * V_t."""

    heston: Heston
    base_intensity: float
    var_intensity: float
    jumps: JumpLaw = field(default_factory=NormalJumps)

    def __post_init__(self):
        if self.base_intensity < 0 or self.var_intensity < 0:
            raise ValueError("TurboBates intensities must be >= 0")
        _require_k1_finite(self.jumps, "TurboBates")


@dataclass(frozen=True)
class Bns:
    """Barndorff-Nielsen/Shephard: OU variance driven by a subordinator.

    The background driver runs on the lambda-scaled clock (jumps arrive at
    rate ``decay`` times the subordinator's own intensity), and ``leverage``
    feeds the same jumps into the log price.
    """

    decay: float
    leverage: float
    bdlp: Subordinator

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("Bns.decay must be > 0")
        if self.leverage > 0:
            raise ValueError("Bns.leverage must be <= 0")
        _check_subordinator(self.bdlp, "Bns")


@dataclass(frozen=True)
class OuTcLevy:
    """Levy process time-changed by an integrated subordinator-driven OU rate."""

    decay: float
    subordinator: Subordinator
    base: BaseLevy

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("OuTcLevy.decay must be > 0")
        _check_subordinator(self.subordinator, "OuTcLevy")


@dataclass(frozen=True)
class CirTcLevy:
    """Levy process time-changed by an integrated CIR activity rate."""

    mean_reversion: float
    long_run: float
    vol_of_vol: float
    base: BaseLevy

    def __post_init__(self):
        if self.mean_reversion <= 0 or self.long_run <= 0 or self.vol_of_vol <= 0:
            raise ValueError("CirTcLevy mean_reversion, long_run, vol_of_vol must be > 0")


ModelSpec = Union[Heston, Bates, TurboBates, Bns, OuTcLevy, CirTcLevy]

_MODEL_NAMES = {
    Heston: "Heston",
    Bates: "Bates",
    TurboBates: "TurboBates",
    Bns: "BNS",
    OuTcLevy: "OuTcLevy",
    CirTcLevy: "CirTcLevy",
}


def model_name(model: ModelSpec) -> str:
    return _MODEL_NAMES[type(model)]


# ---------------------------------------------------------------------------
# Functional characteristics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalCharacteristics:
    """The pair (F, R) plus the open Re(u) strip on which both are finite.

    F and R are pure closures of two complex arguments (u, w); the strip
    constrains the first argument only.  State-dependent constraints (the
    subordinator domain for the second argument) are enforced inside the
    closures and surface as :class:`DomainExitError`.
    """

    F: Callable
    R: Callable
    u_strip: tuple[float, float]


@singledispatch
def functional_characteristics(model) -> FunctionalCharacteristics:
    raise TypeError(f"no functional characteristics registered for {type(model).__name__}")


@functional_characteristics.register
def _(model: Heston) -> FunctionalCharacteristics:
    lam = model.mean_reversion
    lt = lam * model.long_run_var
    half_z2 = 0.5 * model.vol_of_vol**2
    rz = model.correlation * model.vol_of_vol

    def F(u, w):
        return lt * w

    def R(u, w):
        return 0.5 * (u * u - u) + half_z2 * w * w - lam * w + rz * u * w

    return FunctionalCharacteristics(F, R, (-_INF, _INF))


@functional_characteristics.register
def _(model: Bates) -> FunctionalCharacteristics:
    base = functional_characteristics(model.heston)
    nu = model.jump_intensity
    law = model.jumps
    if nu == 0 or isinstance(law, NoJumps):
        return base
    k1 = complex(jump_cumulant(law, 1.0 + 0j))

    def F(u, w):
        return base.F(u, w) + nu * (jump_cumulant(law, u) - u * k1)

    return FunctionalCharacteristics(F, base.R, jump_strip(law))


@functional_characteristics.register
def _(model: TurboBates) -> FunctionalCharacteristics:
    base = functional_characteristics(model.heston)
    nu0, nu1 = model.base_intensity, model.var_intensity
    law = model.jumps
    if isinstance(law, NoJumps) or (nu0 == 0 and nu1 == 0):
        return base
    k1 = complex(jump_cumulant(law, 1.0 + 0j))

    def F(u, w):
        return base.F(u, w) + nu0 * (jump_cumulant(law, u) - u * k1)

    def R(u, w):
        return base.R(u, w) + nu1 * (jump_cumulant(law, u) - u * k1)

    return FunctionalCharacteristics(F, R, jump_strip(law))


@functional_characteristics.register
def _(model: Bns) -> FunctionalCharacteristics:
    lam = model.decay
    rho = model.leverage
    k = model.bdlp.cumulant
    k_rho = complex(k(complex(rho))) if rho != 0 else 0j

    def F(u, w):
        return lam * (k(w + rho * u) - u * k_rho)

    def R(u, w):
        return 0.5 * (u * u - u) - lam * w

    ell = model.bdlp.domain_bound
    strip = (ell / rho, _INF) if rho < 0 else (-_INF, _INF)
    return FunctionalCharacteristics(F, R, strip)


@functional_characteristics.register
def _(model: OuTcLevy) -> FunctionalCharacteristics:
    lam = model.decay
    sub = model.subordinator
    theta = model.base.compensated_cumulant

    def F(u, w):
        return lam * sub.cumulant(w)

    def R(u, w):
        return -lam * w + theta(u)

    return FunctionalCharacteristics(F, R, model.base.strip())


@functional_characteristics.register
def _(model: CirTcLevy) -> FunctionalCharacteristics:
    lam = model.mean_reversion
    lt = lam * model.long_run
    half_e2 = 0.5 * model.vol_of_vol**2
    theta = model.base.compensated_cumulant

    def F(u, w):
        return lt * w

    def R(u, w):
        return half_e2 * w * w - lam * w + theta(u)

    return FunctionalCharacteristics(F, R, model.base.strip())


# ---------------------------------------------------------------------------
# Martingale / conservativeness check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MartingaleReport:
    conservative: bool
    martingale: bool
    chi0: float
    chi1: float
    failures: tuple[str, ...] = ()


_ZERO_TOL = 1e-12
_FD_STEP = 1e-6


def check_martingale(model_or_fc) -> MartingaleReport:
    """Verify the sufficient conditions for exp(X) to be a true martingale.

    Checks F(0,0) = R(0,0) = F(1,0) = R(1,0) = 0 (to 1e-12) and that
    chi(u) = dR/dw(u, 0), computed by a central finite difference with
    step 1e-6, is finite at u = 0 and u = 1.  Never raises: any failure
    is named in the report instead.
    """
    if isinstance(model_or_fc, FunctionalCharacteristics):
        fc = model_or_fc
    else:
        fc = functional_characteristics(model_or_fc)
    failures: list[str] = []

    def _eval(fn, u, w, label):
        try:
            v = complex(fn(complex(u), complex(w)))
        except Exception as exc:  # never throw: report instead
            failures.append(f"{label} raised {type(exc).__name__}")
            return None
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            failures.append(f"{label} not finite")
            return None
        return v

    checks = [
        ("F(0,0)", fc.F, 0.0, 0.0),
        ("R(0,0)", fc.R, 0.0, 0.0),
        ("F(1,0)", fc.F, 1.0, 0.0),
        ("R(1,0)", fc.R, 1.0, 0.0),
    ]
    zero_ok = {}
    for label, fn, u, w in checks:
        v = _eval(fn, u, w, label)
        ok = v is not None and abs(v) < _ZERO_TOL
        if v is not None and not ok:
            failures.append(f"{label} = {v:.3e} (expected 0)")
        zero_ok[label] = ok

    def _chi(u):
        hi = _eval(fc.R, u, _FD_STEP, f"R({u},+h)")
        lo = _eval(fc.R, u, -_FD_STEP, f"R({u},-h)")
        if hi is None or lo is None:
            return math.nan
        return ((hi - lo) / (2.0 * _FD_STEP)).real

    chi0 = _chi(0.0)
    chi1 = _chi(1.0)
    if not math.isfinite(chi0):
        failures.append("chi(0) not finite")
    if not math.isfinite(chi1):
        failures.append("chi(1) not finite")

    conservative = zero_ok["F(0,0)"] and zero_ok["R(0,0)"] and math.isfinite(chi0)
    martingale = (
        conservative and zero_ok["F(1,0)"] and zero_ok["R(1,0)"] and math.isfinite(chi1)
    )
    return MartingaleReport(conservative, martingale, chi0, chi1, tuple(failures))
