import math

import numpy as np
import pytest

from geomasian.contracts import ContractSpec, PayoffKind
from geomasian.errors import UnsupportedModelError
from geomasian.mc import SimConfig, mc_cumulant, mc_price, simulate_terminal
from geomasian.models import (
    BaseLevy,
    Bns,
    GammaOuSubordinator,
    Heston,
    InverseGaussianSubordinator,
    OuTcLevy,
)
from geomasian.riccati import SolverConfig, cumulant_average_strike

from .conftest import make_contract
from .oracles import lognormal_geometric_asian_price

LOGNORMAL = Heston(2.0, 0.04, 1e-9, -0.7)


@pytest.fixture(scope="module")
def heston_sample(std_heston, std_contract):
    sim = SimConfig(seed=1234, n_paths=100_000, n_steps=400)
    return sim, simulate_terminal(std_heston, std_contract, sim)


class TestSimulateTerminal:
    def test_deterministic_variance_limit(self, std_contract):
        # zeta ~ 0: every path carries the same (deterministic) variance
        model = Heston(2.0, 0.04, 1e-9, -0.7)
        sim = SimConfig(seed=7, n_paths=200, n_steps=50)
        s = simulate_terminal(model, std_contract, sim)
        assert np.ptp(s.v_t) < 1e-7
        assert s.v_t[0] == pytest.approx(0.04, rel=1e-6)

    def test_bns_pure_decay_when_driver_silent(self, std_contract):
        # background driver with vanishing intensity: V decays exactly
        model = Bns(1.5, -1.0, GammaOuSubordinator(1e-12, 50.0))
        sim = SimConfig(seed=3, n_paths=500, n_steps=64)
        s = simulate_terminal(model, std_contract, sim)
        want = 0.04 * math.exp(-1.5 * 1.0)
        assert np.allclose(s.v_t, want, rtol=1e-12)

    def test_martingale_self_check(self, heston_sample, std_contract):
        _, s = heston_sample
        w = s.fold_pairs(np.exp(s.x_t - math.log(std_contract.spot)))
        se = w.std(ddof=1) / math.sqrt(w.size)
        assert abs(w.mean() - 1.0) < 4.0 * se

    def test_reproducibility(self, std_heston, std_contract):
        sim = SimConfig(seed=42, n_paths=5_000, n_steps=60)
        a = simulate_terminal(std_heston, std_contract, sim)
        b = simulate_terminal(std_heston, std_contract, sim)
        assert np.array_equal(a.x_t, b.x_t)
        assert np.array_equal(a.y_bar, b.y_bar)
        assert np.array_equal(a.v_t, b.v_t)

    def test_seed_changes_draws(self, std_heston, std_contract):
        a = simulate_terminal(std_heston, std_contract, SimConfig(seed=1, n_paths=1_000, n_steps=20))
        b = simulate_terminal(std_heston, std_contract, SimConfig(seed=2, n_paths=1_000, n_steps=20))
        assert not np.array_equal(a.x_t, b.x_t)

    def test_scheme_mismatch_rejected(self, std_heston, std_contract, catalog):
        with pytest.raises(ValueError):
            simulate_terminal(std_heston, std_contract, SimConfig(seed=1, n_paths=200, n_steps=16, scheme="ExactOu"))
        with pytest.raises(ValueError):
            simulate_terminal(
                catalog["BNS"], std_contract, SimConfig(seed=1, n_paths=200, n_steps=16, scheme="FullTruncationEuler")
            )

    def test_infinite_activity_subordinator_unsupported(self, std_contract):
        model = Bns(1.0, -1.0, InverseGaussianSubordinator(1.0, 6.0))
        with pytest.raises(UnsupportedModelError):
            simulate_terminal(model, std_contract, SimConfig(seed=1, n_paths=200, n_steps=16))


class TestMcPrice:
    def test_far_strike_is_zero(self, std_heston):
        contract = make_contract(strike=1e6)
        est = mc_price(std_heston, contract, SimConfig(seed=5, n_paths=2_000, n_steps=30))
        assert est.mean == 0.0 and est.std_error == 0.0

    def test_lognormal_against_closed_form(self, std_contract):
        sim = SimConfig(seed=2024, n_paths=200_000, n_steps=400)
        est = mc_price(LOGNORMAL, std_contract, sim)
        want = lognormal_geometric_asian_price(100.0, 100.0, 0.03, 0.0, 0.2, 1.0)
        assert abs(est.mean - want) < 3.0 * est.std_error

    def test_discretization_doubling(self, std_heston, std_contract):
        base = mc_price(std_heston, std_contract, SimConfig(seed=6, n_paths=100_000, n_steps=250))
        fine = mc_price(std_heston, std_contract, SimConfig(seed=6, n_paths=100_000, n_steps=500))
        assert abs(base.mean - fine.mean) < 2.0 * base.std_error

    def test_antithetic_variance_reduction(self, std_contract):
        anti = mc_price(LOGNORMAL, std_contract, SimConfig(seed=9, n_paths=40_000, n_steps=100, antithetic=True))
        plain = mc_price(LOGNORMAL, std_contract, SimConfig(seed=9, n_paths=40_000, n_steps=100, antithetic=False))
        assert anti.std_error <= plain.std_error

    def test_all_payoff_kinds(self, heston_sample, std_heston):
        sim, s = heston_sample
        values = {}
        for kind in PayoffKind:
            contract = make_contract(payoff=kind)
            values[kind] = mc_price(std_heston, contract, sim, sample=s)
        # average-strike put-call parity holds inside the sample exactly
        mean_avg = s.fold_pairs(np.exp(0.015 + s.y_bar)).mean()
        mean_terminal = s.fold_pairs(np.exp(0.03 + s.x_t)).mean()
        lhs = values[PayoffKind.AVERAGE_STRIKE_CALL].mean - values[PayoffKind.AVERAGE_STRIKE_PUT].mean
        rhs = math.exp(-0.03) * (mean_terminal - mean_avg)
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestMcCumulant:
    def test_trivial_zero(self, heston_sample, std_heston, std_contract):
        sim, s = heston_sample
        est = mc_cumulant(std_heston, 0.0, 0.0, std_contract, sim, sample=s)
        assert est.mean == 0.0 and est.std_error == 0.0

    def test_martingale_point(self, heston_sample, std_heston, std_contract):
        sim, s = heston_sample
        est = mc_cumulant(std_heston, 1.0, 0.0, std_contract, sim, sample=s)
        # log E[e^{X_T}] = X_0, i.e. the estimate minus log-spot is 0
        assert abs(est.mean - math.log(100.0)) < 4.0 * est.std_error

    def test_joint_moment_matches_strike_cumulant(self, heston_sample, std_heston, std_contract):
        # log E[exp(0.5 log Shat + 0.5 log S_T)] via the engine equals the
        # sample moment of the same functional
        sim, s = heston_sample
        u = 0.5
        kappa = complex(cumulant_average_strike(complex(u), std_contract, std_heston))
        drift_T = 0.03
        w = np.exp(u * (drift_T / 2.0 + s.y_bar) + (1.0 - u) * (drift_T + s.x_t))
        folded = s.fold_pairs(w)
        se = folded.std(ddof=1) / math.sqrt(folded.size) / folded.mean()
        assert abs(math.log(folded.mean()) - kappa.real) < 4.0 * se

    def test_kurtosis_warning(self, std_heston, std_contract):
        sim = SimConfig(seed=77, n_paths=5_000, n_steps=50)
        with pytest.warns(RuntimeWarning):
            mc_cumulant(std_heston, 4.0, 0.0, std_contract, sim)
