import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from geomasian.contracts import ContractSpec, PayoffKind
from geomasian.models import (
    BaseLevy,
    Bates,
    Bns,
    CirTcLevy,
    GammaOuSubordinator,
    Heston,
    KouJumps,
    NormalJumps,
    OuTcLevy,
    TurboBates,
)

settings.register_profile(
    "geomasian",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("geomasian")


STD_HESTON = Heston(mean_reversion=2.0, long_run_var=0.04, vol_of_vol=0.5, correlation=-0.7)


def standard_models() -> dict:
    """One sane parameterization per catalog model."""
    return {
        "Heston": STD_HESTON,
        "Bates": Bates(STD_HESTON, 0.5, NormalJumps(-0.1, 0.15)),
        "TurboBates": TurboBates(STD_HESTON, 0.3, 2.0, NormalJumps(-0.05, 0.1)),
        "BNS": Bns(1.0, -2.0, GammaOuSubordinator(2.0, 50.0)),
        "OuTcLevy": OuTcLevy(
            1.0, GammaOuSubordinator(2.0, 50.0), BaseLevy(1.0, 10.0, KouJumps(0.5, 12.0, 10.0))
        ),
        "CirTcLevy": CirTcLevy(2.0, 0.04, 0.3, BaseLevy(1.0, 3.0, NormalJumps(-0.05, 0.1))),
    }


def random_model(name: str, rng: np.random.Generator):
    """A random valid parameterization of the named model."""
    def heston():
        return Heston(
            rng.uniform(0.5, 3.0),
            rng.uniform(0.01, 0.09),
            rng.uniform(0.1, 0.9),
            rng.uniform(-0.9, 0.5),
        )

    if name == "Heston":
        return heston()
    if name == "Bates":
        return Bates(heston(), rng.uniform(0.0, 2.0), NormalJumps(rng.uniform(-0.3, 0.1), rng.uniform(0.0, 0.3)))
    if name == "TurboBates":
        return TurboBates(
            heston(),
            rng.uniform(0.0, 1.0),
            rng.uniform(0.0, 5.0),
            KouJumps(rng.uniform(0.2, 0.8), rng.uniform(4.0, 20.0), rng.uniform(4.0, 20.0)),
        )
    if name == "BNS":
        return Bns(
            rng.uniform(0.3, 3.0),
            -rng.uniform(0.0, 4.0),
            GammaOuSubordinator(rng.uniform(0.5, 4.0), rng.uniform(20.0, 80.0)),
        )
    if name == "OuTcLevy":
        return OuTcLevy(
            rng.uniform(0.3, 3.0),
            GammaOuSubordinator(rng.uniform(0.5, 4.0), rng.uniform(20.0, 80.0)),
            BaseLevy(rng.uniform(0.5, 1.5), rng.uniform(0.0, 10.0), KouJumps(0.5, rng.uniform(6.0, 20.0), rng.uniform(6.0, 20.0))),
        )
    if name == "CirTcLevy":
        return CirTcLevy(
            rng.uniform(0.5, 3.0),
            rng.uniform(0.01, 0.09),
            rng.uniform(0.1, 0.5),
            BaseLevy(rng.uniform(0.5, 1.5), rng.uniform(0.0, 3.0), NormalJumps(rng.uniform(-0.2, 0.1), rng.uniform(0.0, 0.25))),
        )
    raise KeyError(name)


@pytest.fixture(scope="session")
def std_heston() -> Heston:
    return STD_HESTON


@pytest.fixture(scope="session")
def catalog() -> dict:
    return standard_models()


def make_contract(payoff=PayoffKind.AVERAGE_PRICE_CALL, strike=100.0, maturity=1.0, rate=0.03):
    return ContractSpec(
        spot=100.0,
        initial_var=0.04,
        rate=rate,
        dividend_yield=0.0,
        strike=strike,
        maturity=maturity,
        payoff=payoff,
    )


@pytest.fixture(scope="session")
def std_contract() -> ContractSpec:
    return make_contract()
