import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renewal.bijections import (
    BUILTIN_TRANSFORMS,
    AsymptoticParams,
    ConvergenceError,
    DomainError,
    Identity,
    LogProduct,
    PiecewiseLinear,
    Power,
    asymptotic_params,
    from_knot_file,
    integrate,
    parse_transform,
)

E = math.e
EM1 = math.e - 1.0

SPECS = [
    Identity(),
    LogProduct(),
    Power(0.5),
    Power(2.0),
    PiecewiseLinear(((0.0, 0.0), (0.25, 0.1), (0.7, 0.8), (1.0, 1.0))),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label)
class TestBijectionContract:
    def test_endpoints_exact(self, spec):
        assert float(spec.forward(0.0)) == 0.0
        assert float(spec.forward(1.0)) == 1.0
        assert float(spec.inverse(0.0)) == 0.0
        assert float(spec.inverse(1.0)) == 1.0

    def test_roundtrip(self, spec):
        tol = 1e-9 if isinstance(spec, PiecewiseLinear) else 1e-12
        x = np.linspace(0.0, 1.0, 1001)
        assert np.max(np.abs(spec.inverse(spec.forward(x)) - x)) <= tol
        assert np.max(np.abs(spec.forward(spec.inverse(x)) - x)) <= tol

    def test_strictly_increasing(self, spec):
        x = np.linspace(0.0, 1.0, 10001)
        assert np.all(np.diff(spec.forward(x)) > 0.0)

    def test_scalar_and_array_shapes(self, spec):
        out = spec.forward(0.5)
        assert np.ndim(out) == 0 and isinstance(float(out), float)
        arr = spec.forward(np.array([[0.1, 0.2], [0.3, 0.4]]))
        assert arr.shape == (2, 2)

    def test_domain_rejected(self, spec):
        for bad in (-0.1, 1.1, math.nan):
            with pytest.raises(DomainError):
                spec.forward(bad)
            with pytest.raises(DomainError):
                spec.inverse(bad)

    def test_value_objects(self, spec):
        other = type(spec)(*([spec.knots] if isinstance(spec, PiecewiseLinear) else
                             [spec.p] if isinstance(spec, Power) else []))
        assert other == spec and hash(other) == hash(spec)
        assert str(spec) == spec.label


class TestLogProduct:
    def test_known_forward_point(self):
        # f((e-2)/(e-1)) = ln(e-1)
        got = float(LogProduct().forward((E - 2.0) / EM1))
        assert got == pytest.approx(math.log(EM1), abs=1e-15)

    def test_known_inverse_point(self):
        # f^{-1}(1/2) = (sqrt(e)-1)/(e-1)
        got = float(LogProduct().inverse(0.5))
        assert got == pytest.approx((math.sqrt(E) - 1.0) / EM1, abs=1e-15)

    def test_dominates_identity_strictly_inside(self):
        x = np.linspace(0.0, 1.0, 2001)
        f = LogProduct().forward(x)
        assert np.all(f >= x)
        inner = (x > 0.0) & (x < 1.0)
        assert np.all(f[inner] > x[inner])


class TestPower:
    def test_simple_values(self):
        assert float(Power(2.0).forward(0.5)) == 0.25
        assert float(Power(0.5).forward(0.25)) == 0.5

    def test_label(self):
        assert Power(2.0).label == "power:2"
        assert Power(0.5).label == "power:0.5"

    @pytest.mark.parametrize("bad", [0.05, 10.5, 0.0, -1.0, math.nan, math.inf])
    def test_exponent_rejected(self, bad):
        with pytest.raises(DomainError):
            Power(bad)

    @settings(max_examples=50, deadline=None)
    @given(
        p=st.floats(0.1, 10.0),
        x=st.floats(0.0, 1.0, allow_nan=False),
    )
    def test_roundtrip_property(self, p, x):
        s = Power(p)
        assert float(s.inverse(s.forward(x))) == pytest.approx(x, abs=1e-9)


class TestPiecewiseLinear:
    def test_interpolates_knots_and_midpoints(self):
        s = PiecewiseLinear(((0.0, 0.0), (0.5, 0.2), (1.0, 1.0)))
        assert float(s.forward(0.5)) == 0.2
        assert float(s.forward(0.25)) == pytest.approx(0.1, abs=1e-15)
        assert float(s.inverse(0.6)) == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize(
        "knots",
        [
            ((0.0, 0.0),),
            ((0.1, 0.0), (1.0, 1.0)),
            ((0.0, 0.0), (1.0, 0.9)),
            ((0.0, 0.0), (0.6, 0.5), (0.4, 0.7), (1.0, 1.0)),
            ((0.0, 0.0), (0.4, 0.5), (0.6, 0.5), (1.0, 1.0)),
        ],
    )
    def test_bad_knots_rejected(self, knots):
        with pytest.raises(DomainError):
            PiecewiseLinear(knots)


class TestKnotFile:
    def test_valid_file(self, tmp_path):
        p = tmp_path / "knots.txt"
        p.write_text("0 0\n\n0.3   0.55\n1 1\n")
        s = from_knot_file(p)
        assert s.knots == ((0.0, 0.0), (0.3, 0.55), (1.0, 1.0))

    def test_malformed_line_reports_number(self, tmp_path):
        p = tmp_path / "knots.txt"
        p.write_text("0 0\n0.3 oops\n1 1\n")
        with pytest.raises(DomainError, match="line 2"):
            from_knot_file(p)

    def test_wrong_arity_line(self, tmp_path):
        p = tmp_path / "knots.txt"
        p.write_text("0 0\n0.5\n1 1\n")
        with pytest.raises(DomainError, match="line 2"):
            from_knot_file(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "knots.txt"
        p.write_text("\n\n")
        with pytest.raises(DomainError, match="at least 2"):
            from_knot_file(p)

    def test_endpoint_enforced(self, tmp_path):
        p = tmp_path / "knots.txt"
        p.write_text("0 0\n0.5 0.4\n0.9 1\n")
        with pytest.raises(DomainError, match="last knot"):
            from_knot_file(p)


class TestParseTransform:
    def test_builtins(self):
        assert parse_transform("identity") is BUILTIN_TRANSFORMS["identity"]
        assert parse_transform(" logproduct ") is BUILTIN_TRANSFORMS["logproduct"]

    def test_power(self):
        assert parse_transform("power:2") == Power(2.0)
        with pytest.raises(DomainError):
            parse_transform("power:zap")
        with pytest.raises(DomainError):
            parse_transform("power:99")

    def test_knot_path(self, tmp_path):
        p = tmp_path / "t.knots"
        p.write_text("0 0\n0.5 0.25\n1 1\n")
        s = parse_transform(str(p))
        assert isinstance(s, PiecewiseLinear)

    def test_unknown(self):
        with pytest.raises(DomainError, match="unknown transform"):
            parse_transform("no-such-transform")


class TestIntegrate:
    def test_polynomial(self):
        assert integrate(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_exponential(self):
        assert integrate(np.exp, 0.0, 1.0) == pytest.approx(EM1, abs=1e-12)

    def test_kink_integrand(self):
        # 0.3 is a sqrt-kink: int |x - c|^(1/2) dx = (2/3)((1-c)^1.5 + c^1.5)
        c = 0.3
        want = (2.0 / 3.0) * ((1.0 - c) ** 1.5 + c**1.5)
        got = integrate(lambda x: np.sqrt(np.abs(x - c)), 0.0, 1.0, 1e-9)
        assert got == pytest.approx(want, abs=1e-9)

    def test_empty_and_bad_intervals(self):
        assert integrate(lambda x: x, 0.5, 0.5) == 0.0
        with pytest.raises(DomainError):
            integrate(lambda x: x, 1.0, 0.0)
        with pytest.raises(DomainError):
            integrate(lambda x: x, 0.0, math.inf)
        with pytest.raises(DomainError):
            integrate(lambda x: x, 0.0, 1.0, 0.0)

    def test_panel_budget_exhaustion(self):
        with pytest.raises(ConvergenceError, match="panels"):
            integrate(lambda x: np.sin(50.0 * x), 0.0, 1.0, 1e-14, max_panels=4)


class TestAsymptoticParams:
    def test_identity_constants(self):
        p = asymptotic_params(Identity())
        assert p.mu == pytest.approx(0.5, abs=1e-12)
        assert p.sigma2 == pytest.approx(1.0 / 12.0, abs=1e-12)
        assert p.c == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert p.slope == pytest.approx(2.0, abs=1e-12)
        assert p.intercept == pytest.approx(2.0 / 3.0, abs=1e-10)

    def test_logproduct_constants(self):
        p = asymptotic_params(LogProduct())
        assert p.mu == pytest.approx(1.0 / EM1, abs=1e-12)
        assert p.sigma2 == pytest.approx((E - 2.0) / EM1 - 1.0 / EM1**2, abs=1e-12)
        assert p.c == pytest.approx((E - 2.0) / 2.0, abs=1e-10)

    def test_power_constants(self):
        # mu = 1/(p+1); E[f^2] = 1/(2p+1); c = E[f^2] / (2 mu)
        p2 = asymptotic_params(Power(2.0))
        assert p2.mu == pytest.approx(1.0 / 3.0, abs=1e-11)
        assert p2.sigma2 == pytest.approx(1.0 / 5.0 - 1.0 / 9.0, abs=1e-11)
        assert p2.c == pytest.approx(0.3, abs=1e-10)
        ph = asymptotic_params(Power(0.5))
        assert ph.mu == pytest.approx(2.0 / 3.0, abs=1e-11)
        assert ph.sigma2 == pytest.approx(0.5 - 4.0 / 9.0, abs=1e-11)
        assert ph.c == pytest.approx(0.375, abs=1e-10)

    def test_validation(self):
        with pytest.raises(DomainError):
            AsymptoticParams(mu=0.0, sigma2=0.1, c=0.3)
        with pytest.raises(DomainError):
            AsymptoticParams(mu=1.5, sigma2=0.1, c=0.3)
        with pytest.raises(DomainError):
            AsymptoticParams(mu=0.5, sigma2=-0.1, c=0.3)
        with pytest.raises(DomainError):
            AsymptoticParams(mu=0.5, sigma2=0.1, c=1.5)

    @settings(max_examples=20, deadline=None)
    @given(
        xs=st.lists(st.floats(0.01, 0.99), min_size=1, max_size=4, unique=True),
        ys=st.lists(st.floats(0.01, 0.99), min_size=1, max_size=4, unique=True),
    )
    def test_mean_two_routes_piecewise(self, xs, ys):
        k = min(len(xs), len(ys))
        knots = ((0.0, 0.0), *zip(sorted(xs)[:k], sorted(ys)[:k]), (1.0, 1.0))
        spec = PiecewiseLinear(knots)
        mu = asymptotic_params(spec).mu
        mu_alt = 1.0 - integrate(lambda u: spec._finv(u), 0.0, 1.0, 1e-11)
        assert mu == pytest.approx(mu_alt, abs=2e-10)
        assert 0.0 < mu < 1.0
