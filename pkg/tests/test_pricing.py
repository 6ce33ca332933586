import cmath
import math

import numpy as np
import pytest

from geomasian.contracts import ContractSpec, PayoffKind
from geomasian.errors import ConfigError, NoValidAbscissaError, PoleProximityError
from geomasian.models import Bates, Heston, NormalJumps
from geomasian.pricing import (
    ContourConfig,
    bromwich_invert_payoff,
    choose_abscissa,
    payoff_transform,
    price,
    price_strikes,
)
from geomasian.riccati import SolverConfig, cumulant_average_price

from .conftest import make_contract
from .oracles import lognormal_geometric_asian_price

LOGNORMAL = Heston(2.0, 0.04, 1e-6, -0.7)


class TestPayoffTransform:
    def test_call_values(self):
        assert payoff_transform("call", 2.0 + 0j, 1.0) == pytest.approx(0.5)
        assert payoff_transform("call", 2.0 + 0j, math.e) == pytest.approx(math.exp(-1.0) / 2.0)

    def test_sides_enforced(self):
        with pytest.raises(ValueError):
            payoff_transform("call", 0.5 + 1j, 1.0)
        with pytest.raises(ValueError):
            payoff_transform("put", 0.5 + 1j, 1.0)
        with pytest.raises(ValueError):
            payoff_transform("protected", 2.0 + 0j, 1.0)

    def test_pole_proximity(self):
        with pytest.raises(PoleProximityError):
            payoff_transform("protected", 1.0 - 1e-12j, 1.0)

    def test_inversion_at_the_kink(self):
        # the payoff vanishes exactly at x = log K
        for K in (1.0, 2.0):
            got = bromwich_invert_payoff("call", math.log(K), K)
            assert abs(got) < 1e-6 * K

    @pytest.mark.parametrize("K", [1.0, 2.5])
    def test_inversion_grid(self, K):
        # all three transforms reproduce their payoffs pointwise
        xs = np.linspace(math.log(K) - 2.0, math.log(K) + 2.0, 41)
        tol = 1e-6 * (1.0 + K)
        for x in xs:
            ex = math.exp(x)
            assert abs(bromwich_invert_payoff("call", x, K) - max(ex - K, 0.0)) < tol
            assert abs(bromwich_invert_payoff("put", x, K) - max(K - ex, 0.0)) < tol
            got = bromwich_invert_payoff("protected", x, K)
            assert abs(got - (max(ex - K, 0.0) - ex)) < tol

    def test_simpson_rule_inversion(self):
        got = bromwich_invert_payoff("call", 0.5, 1.0, rule="simpson")
        assert got == pytest.approx(math.exp(0.5) - 1.0, abs=2e-6)


class TestChooseAbscissa:
    def test_lognormal_hits_default_cap(self, std_contract):
        assert choose_abscissa(std_contract, LOGNORMAL) == 2.0

    def test_price_side_inside_convergence_region(self, std_heston):
        contract = make_contract()
        a = choose_abscissa(contract, std_heston)
        assert a > 1.0
        # the postcondition: the returned abscissa admits a solve
        assert complex(cumulant_average_price(complex(a), contract, std_heston)) is not None

    def test_strike_side_negative(self, std_heston):
        contract = make_contract(payoff=PayoffKind.AVERAGE_STRIKE_CALL)
        b = choose_abscissa(contract, std_heston)
        assert b < 0.0

    def test_hot_params_stay_below_boundary(self):
        from geomasian.errors import BlowUpError

        hot = Heston(0.5, 0.09, 1.0, 0.8)
        contract = make_contract(maturity=3.0)
        a = choose_abscissa(contract, hot)
        assert 1.0 < a < 2.0
        cumulant_average_price(complex(a), contract, hot)  # must not raise
        with pytest.raises(BlowUpError):
            # past the boundary the scan target genuinely explodes
            cumulant_average_price(complex(1.0 + (a - 1.0) * 8.0), contract, hot)


class TestPriceLognormalLimit:
    def test_strike_grid_against_closed_form(self, std_contract):
        strikes = [80.0, 90.0, 100.0, 110.0, 120.0]
        results = price_strikes(std_contract, LOGNORMAL, strikes)
        for K, res in zip(strikes, results):
            want = lognormal_geometric_asian_price(100.0, K, 0.03, 0.0, 0.2, 1.0)
            assert res.price == pytest.approx(want, rel=1e-5)

    def test_put_against_closed_form(self):
        contract = make_contract(payoff=PayoffKind.AVERAGE_PRICE_PUT)
        res = price(contract, LOGNORMAL)
        want = lognormal_geometric_asian_price(100.0, 100.0, 0.03, 0.0, 0.2, 1.0, "put")
        assert res.price == pytest.approx(want, rel=1e-5)


class TestPriceDegenerateCases:
    def test_vanishing_strike(self, std_heston):
        contract = make_contract(strike=1e-8)
        res = price(contract, std_heston)
        want = math.exp(-0.03) * cmath.exp(
            cumulant_average_price(1.0 + 0j, contract, std_heston)
        ).real
        assert res.price == pytest.approx(want, rel=1e-6)

    def test_vanishing_maturity(self, std_heston):
        contract = ContractSpec(1.0, 0.04, 0.03, 0.0, 0.9, 1e-4, PayoffKind.AVERAGE_PRICE_CALL)
        res = price(contract, std_heston)
        assert res.price == pytest.approx(0.1, abs=1e-3)


class TestPriceContract:
    def test_manual_abscissa_side_validation(self, std_heston, std_contract):
        with pytest.raises(ConfigError):
            price(std_contract, std_heston, ContourConfig(abscissa=0.5))
        put = make_contract(payoff=PayoffKind.AVERAGE_PRICE_PUT)
        with pytest.raises(ConfigError):
            price(put, std_heston, ContourConfig(abscissa=1.5))
        strike = make_contract(payoff=PayoffKind.AVERAGE_STRIKE_CALL)
        with pytest.raises(ConfigError):
            price(strike, std_heston, ContourConfig(abscissa=0.5))

    def test_result_fields(self, std_heston, std_contract):
        res = price(std_contract, std_heston)
        assert res.price > 0
        assert math.isfinite(res.error_estimate) and res.error_estimate >= 0
        assert res.nodes_used >= 16
        assert res.ode_evals > 0

    def test_average_strike_put_parity(self, std_heston):
        call = price(make_contract(payoff=PayoffKind.AVERAGE_STRIKE_CALL), std_heston)
        put = price(make_contract(payoff=PayoffKind.AVERAGE_STRIKE_PUT), std_heston)
        contract = make_contract()
        fwd_stock = 100.0 * math.exp(0.03)
        mean_avg = cmath.exp(cumulant_average_price(1.0 + 0j, contract, std_heston)).real
        want = call.price - math.exp(-0.03) * (fwd_stock - mean_avg)
        assert put.price == pytest.approx(want, abs=1e-12)


class TestQuadratureProperties:
    def test_conjugate_symmetry_fold(self, std_heston, std_contract):
        # the full two-sided contour sum equals twice the real part of the
        # half-line sum, node for node
        a = 2.0
        vs = np.linspace(0.1, 30.0, 40)
        from geomasian.pricing import _KappaBatch, _kernel

        kb = _KappaBatch(std_contract, std_heston, a, SolverConfig())
        u_up, k_up = kb(vs)
        u_dn, k_dn = kb(-vs)
        g_up = _kernel(u_up, 100.0) * np.exp(k_up)
        g_dn = _kernel(u_dn, 100.0) * np.exp(k_dn)
        full = np.sum(g_up + g_dn)
        folded = 2.0 * np.sum(g_up).real
        assert abs(full - folded) < 1e-12 * abs(folded)

    def test_node_doubling_within_error_estimate(self, catalog):
        for name, model in catalog.items():
            contract = make_contract()
            lo = price(contract, model, ContourConfig(nodes=1024, half_width=80.0))
            hi = price(contract, model, ContourConfig(nodes=2048, half_width=80.0))
            assert abs(hi.price - lo.price) <= lo.error_estimate + 1e-12, name

    def test_monotone_and_convex_in_strike(self, std_heston, std_contract):
        ks = list(np.linspace(70.0, 130.0, 20))
        res = price_strikes(std_contract, std_heston, ks)
        p = np.array([r.price for r in res])
        assert np.all(np.diff(p) <= 1e-9)
        assert np.all(np.diff(p, 2) >= -1e-9)

    def test_simpson_rule_agrees(self, std_heston, std_contract):
        gl = price(std_contract, std_heston, ContourConfig(half_width=80.0))
        sp = price(std_contract, std_heston, ContourConfig(rule="simpson", nodes=4096, half_width=80.0))
        assert sp.price == pytest.approx(gl.price, abs=1e-7)


class TestModelDegenerationChain:
    def test_bates_to_heston(self, std_heston, std_contract):
        tiny = Bates(std_heston, 1e-12, NormalJumps(-0.1, 0.15))
        a = price(std_contract, std_heston).price
        b = price(std_contract, tiny).price
        assert abs(a - b) < 1e-6

    def test_cir_time_change_to_lognormal(self, std_contract):
        # Brownian base cumulant (sigma = 1) with eta -> 0 and V0 = theta
        # freezes the activity at theta: plain lognormal with variance theta T
        from geomasian.models import BaseLevy, CirTcLevy

        model = CirTcLevy(2.0, 0.04, 1e-6, BaseLevy(1.0, 0.0))
        res = price(std_contract, model)
        want = lognormal_geometric_asian_price(100.0, 100.0, 0.03, 0.0, 0.2, 1.0)
        assert res.price == pytest.approx(want, rel=1e-5)
