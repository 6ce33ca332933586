import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomasian.errors import DomainExitError
from geomasian.models import (
    Bates,
    FunctionalCharacteristics,
    GammaOuSubordinator,
    Heston,
    InverseGaussianSubordinator,
    KouJumps,
    NoJumps,
    NormalJumps,
    check_martingale,
    functional_characteristics,
    jump_cumulant,
    jump_strip,
)

from .conftest import standard_models, random_model


class TestJumpCumulant:
    def test_degenerate_normal_is_zero(self):
        assert jump_cumulant(NormalJumps(0.0, 0.0), 5.0 + 0j) == 0

    def test_normal_value(self):
        # exp(gamma z + delta^2 z^2 / 2) - 1 at gamma=0.1, delta=0.2, z=1
        got = jump_cumulant(NormalJumps(0.1, 0.2), 1.0 + 0j)
        assert got == pytest.approx(math.expm1(0.12), abs=1e-15)

    def test_kou_at_zero(self):
        assert jump_cumulant(KouJumps(0.5, 10.0, 10.0), 0.0 + 0j) == 0

    def test_kou_value(self):
        # z (p/(up - z) - (1-p)/(down + z)) = 2 (0.5/8 - 0.5/12) = 1/24
        got = jump_cumulant(KouJumps(0.5, 10.0, 10.0), 2.0 + 0j)
        assert got == pytest.approx(1.0 / 24.0, abs=1e-15)

    def test_kou_domain_error(self):
        with pytest.raises(DomainExitError):
            jump_cumulant(KouJumps(0.5, 10.0, 10.0), 11.0 + 0j)
        with pytest.raises(DomainExitError):
            jump_cumulant(KouJumps(0.5, 10.0, 10.0), -10.5 + 0j)

    def test_none_jumps(self):
        assert jump_cumulant(NoJumps(), 3.0 + 2j) == 0

    @given(st.floats(-8, 8), st.floats(-8, 8))
    def test_conjugate_symmetry(self, re, im):
        z = complex(re, im)
        for law in (NormalJumps(-0.1, 0.3), KouJumps(0.4, 9.0, 11.0)):
            a = jump_cumulant(law, z)
            b = jump_cumulant(law, z.conjugate())
            assert b == pytest.approx(a.conjugate(), rel=1e-12, abs=1e-12)

    def test_kou_poles(self):
        # simple poles at up_rate and -down_rate: huge just inside the strip
        law = KouJumps(0.5, 10.0, 10.0)
        assert abs(jump_cumulant(law, 10.0 - 1e-7 + 0j)) > 1e6
        assert abs(jump_cumulant(law, -10.0 + 1e-7 + 0j)) > 1e6

    def test_kou_strip(self):
        assert jump_strip(KouJumps(0.5, 10.0, 12.0)) == (-12.0, 10.0)
        assert jump_strip(NormalJumps(0.0, 1.0)) == (-math.inf, math.inf)


class TestFunctionalCharacteristics:
    def test_heston_f(self, std_heston):
        fc = functional_characteristics(std_heston)
        assert fc.F(3.0 + 0j, 2.0 + 0j) == pytest.approx(0.16, abs=1e-15)

    def test_heston_r_martingale_point(self, std_heston):
        fc = functional_characteristics(std_heston)
        assert fc.R(1.0 + 0j, 0j) == 0

    def test_heston_r_no_corr(self):
        fc = functional_characteristics(Heston(2.0, 0.04, 0.5, 0.0))
        assert fc.R(2.0 + 0j, 0j) == pytest.approx(1.0, abs=1e-15)

    def test_bns_f_at_zero_second_arg(self):
        from geomasian.models import Bns

        bns = Bns(1.0, 0.0, GammaOuSubordinator(2.0, 50.0))
        fc = functional_characteristics(bns)
        assert abs(fc.F(0.7 + 0.3j, 0j)) < 1e-14

    def test_zero_conditions_random_params(self):
        rng = np.random.default_rng(2024)
        for name in standard_models():
            for _ in range(100):
                model = random_model(name, rng)
                fc = functional_characteristics(model)
                for fn in (fc.F, fc.R):
                    assert abs(fn(0j, 0j)) < 1e-12
                    assert abs(fn(1.0 + 0j, 0j)) < 1e-12

    def test_complex_differentiable_in_u(self, catalog):
        # Cauchy-Riemann by finite differences along real/imaginary steps
        rng = np.random.default_rng(11)
        h = 1e-6
        for model in catalog.values():
            fc = functional_characteristics(model)
            lo, hi = fc.u_strip
            for _ in range(10):
                u = complex(rng.uniform(max(lo, -3.0) + 0.5, min(hi, 3.5) - 0.5), rng.uniform(-2, 2))
                w = complex(rng.uniform(-0.5, 0.2), rng.uniform(-0.5, 0.5))
                for fn in (fc.F, fc.R):
                    d_re = (fn(u + h, w) - fn(u - h, w)) / (2 * h)
                    d_im = (fn(u + 1j * h, w) - fn(u - 1j * h, w)) / (2j * h)
                    assert d_re == pytest.approx(d_im, rel=1e-6, abs=1e-6)


class TestMartingale:
    def test_heston_report(self, std_heston):
        rep = check_martingale(std_heston)
        assert rep.conservative and rep.martingale
        assert rep.chi0 == pytest.approx(-2.0, abs=1e-9)
        assert rep.chi1 == pytest.approx(-2.35, abs=1e-9)

    def test_all_catalog_models(self, catalog):
        for name, model in catalog.items():
            rep = check_martingale(model)
            assert rep.martingale, f"{name}: {rep.failures}"

    def test_broken_compensation_detected(self, std_heston):
        # Bates-style F with the jump compensator removed: F(1,0) = kappa(1) != 0
        nu, law = 0.5, NormalJumps(-0.1, 0.15)
        base = functional_characteristics(std_heston)
        broken = FunctionalCharacteristics(
            F=lambda u, w: base.F(u, w) + nu * jump_cumulant(law, u),
            R=base.R,
            u_strip=base.u_strip,
        )
        rep = check_martingale(broken)
        assert not rep.martingale
        assert any("F(1,0)" in f for f in rep.failures)

    def test_never_throws(self):
        def bad(u, w):
            raise RuntimeError("boom")

        rep = check_martingale(FunctionalCharacteristics(bad, bad, (-math.inf, math.inf)))
        assert not rep.martingale and not rep.conservative
        assert rep.failures


class TestValidation:
    def test_feller_flag(self):
        assert Heston(2.0, 0.04, 0.3, 0.0).feller_satisfied
        assert not Heston(2.0, 0.04, 0.5, 0.0).feller_satisfied  # 0.25 > 0.16

    def test_kou_needs_up_rate_above_one_for_price_jumps(self):
        with pytest.raises(ValueError):
            Bates(Heston(2.0, 0.04, 0.5, 0.0), 1.0, KouJumps(0.5, 0.9, 10.0))

    def test_bns_leverage_sign(self):
        from geomasian.models import Bns

        with pytest.raises(ValueError):
            Bns(1.0, 0.5, GammaOuSubordinator(2.0, 50.0))

    def test_subordinator_domains(self):
        g = GammaOuSubordinator(2.0, 50.0)
        assert g.domain_bound == 50.0
        with pytest.raises(DomainExitError):
            g.cumulant(51.0 + 0j)
        ig = InverseGaussianSubordinator(1.0, 4.0)
        assert ig.domain_bound == 8.0
        # k(z) = delta z / sqrt(gamma^2 - 2z)
        assert complex(ig.cumulant(2.0 + 0j)) == pytest.approx(2.0 / math.sqrt(12.0), rel=1e-14)
