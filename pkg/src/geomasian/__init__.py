"""Geometric Asian option pricing under affine stochastic volatility models.

Continuously monitored average-price and average-strike calls and puts,
priced by solving generalized Riccati equations for the payoff cumulant
and inverting the resulting Laplace representation along a Bromwich
contour.  A Monte Carlo oracle and analytic closed forms cross-check the
transform prices.
"""
from .contracts import ContractSpec, PayoffKind
from .errors import (
    BlowUpError,
    BranchAmbiguityError,
    ConfigError,
    DomainExitError,
    GeomasianError,
    NoConvergenceError,
    NoValidAbscissaError,
    PoleProximityError,
    PricingError,
    StepUnderflowError,
    TailNotDecayingError,
    UnsupportedModelError,
)
from .mc import McEstimate, SimConfig, mc_cumulant, mc_price, simulate_terminal
from .models import (
    BaseLevy,
    Bates,
    Bns,
    CirTcLevy,
    CustomSubordinator,
    GammaOuSubordinator,
    Heston,
    InverseGaussianSubordinator,
    KouJumps,
    ModelSpec,
    NoJumps,
    NormalJumps,
    OuTcLevy,
    TurboBates,
    check_martingale,
    functional_characteristics,
    jump_cumulant,
    model_name,
)
from .pricing import (
    ContourConfig,
    PriceResult,
    bromwich_invert_payoff,
    choose_abscissa,
    payoff_transform,
    price,
    price_strikes,
)
from .riccati import (
    CumulantResult,
    RiccatiProblem,
    SolverConfig,
    cumulant_average_price,
    cumulant_average_strike,
    cumulant_integrated_variance,
    duality_check,
    numeraire_shift,
    solve_joint,
)

__version__ = "0.1.0"
