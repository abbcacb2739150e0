import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cosmiclab.piecewise import (
    PiecewiseLinearConvexFn,
    StepFunction,
    antiderivative,
    evaluate,
    invert,
    prox_1d,
    subgradient_interval,
)
from cosmiclab.prox2d import build_paper_operator

from oracles import integrate_step, prox_1d_oracle


@pytest.fixture(scope="module")
def Phi():
    return build_paper_operator(6).phi_fn


@st.composite
def step_functions(draw, max_knots=8):
    n = draw(st.integers(0, max_knots))
    raw = draw(st.lists(st.floats(-40, 40, allow_nan=False), min_size=n, max_size=n, unique=True))
    bps = sorted(raw)
    assume(all(b - a > 1e-3 for a, b in zip(bps, bps[1:])))
    vals = sorted(draw(st.lists(st.floats(-1.0, -1e-3), min_size=n + 1, max_size=n + 1)))
    return StepFunction(tuple(bps), tuple(vals))


finite = st.floats(-60, 60, allow_nan=False)


class TestStepFunction:
    def test_values_apply_on_half_open_intervals(self):
        s = StepFunction((0.0, 2.0), (-1.0, -0.5, -0.25))
        assert s(-1) == -1.0
        assert s(0.0) == -0.5
        assert s(1.999) == -0.5
        assert s(2.0) == -0.25

    @pytest.mark.parametrize(
        "bps,vals",
        [
            ((), ()),
            ((1.0, 0.0), (-1.0, -0.5, -0.2)),
            ((0.0,), (-0.5, -0.7)),
            ((0.0,), (-1.5, -0.5)),
            ((0.0,), (-0.5, 0.0)),
            ((0.0,), (-0.5,)),
        ],
    )
    def test_rejects_invalid(self, bps, vals):
        with pytest.raises(ValueError):
            StepFunction(bps, vals)

    def test_json_roundtrip(self):
        s = StepFunction((0.0, 1.0), (-1.0, -0.5, -0.1))
        assert StepFunction.from_dict(json.loads(json.dumps(s.to_dict()))) == s


class TestAntiderivative:
    def test_paper_phi_values(self, Phi):
        assert Phi(1.0) == -1.0
        assert Phi(0.0) == 0.0
        assert Phi(-2.0) == 2.0

    def test_zero_inserted_as_knot(self):
        F = antiderivative(StepFunction((1.0,), (-1.0, -0.5)))
        assert 0.0 in F.knots
        assert F(0.0) == 0.0
        assert F(3.0) == pytest.approx(-1.0 - 1.0)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            antiderivative(StepFunction((), (-2.0,)))

    @given(step_functions(), finite)
    @settings(max_examples=150, deadline=None)
    def test_matches_quadrature(self, s, x):
        F = antiderivative(s)
        ref = integrate_step(s, x)
        assert F(x) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    @given(step_functions())
    def test_convex_decreasing_lipschitz(self, s):
        F = antiderivative(s)
        assert all(-1 <= t < 0 for t in F.slopes)
        assert list(F.slopes) == sorted(F.slopes)


class TestEvaluate:
    def test_examples(self, Phi):
        assert evaluate(Phi, 5.0) == -2.0
        assert evaluate(Phi, 0.0) == 0.0
        # slope -1/4 on [1, 5)
        assert evaluate(Phi, 3.0) == -1.5

    def test_vectorized_matches_scalar(self, Phi):
        xs = np.array([-3.0, 0.0, 0.5, 1.0, 3.0, 5.0, 100.0, 1e6])
        assert np.array_equal(Phi(xs), np.array([Phi(float(x)) for x in xs]))

    def test_inconsistent_knot_values_rejected(self):
        with pytest.raises(ValueError):
            PiecewiseLinearConvexFn((0.0, 1.0), (0.0, -0.7), (-1.0, -0.5, -0.5))

    @given(step_functions(), finite, finite)
    def test_one_lipschitz(self, s, x, y):
        F = antiderivative(s)
        assert abs(F(x) - F(y)) <= abs(x - y) * (1 + 1e-12) + 1e-12

    def test_json_roundtrip(self, Phi):
        assert PiecewiseLinearConvexFn.from_dict(json.loads(json.dumps(Phi.to_dict()))) == Phi


class TestInvert:
    def test_examples(self, Phi):
        assert invert(Phi, -2.0) == 5.0
        assert invert(Phi, 0.0) == 0.0
        assert invert(Phi, -1.5) == 3.0

    def test_out_of_range(self, Phi):
        with pytest.raises(ValueError):
            invert(Phi, 0.5)
        with pytest.raises(ValueError):
            invert(Phi, Phi.knot_values[-1] - 1.0)

    @given(step_functions(), st.floats(0, 1))
    def test_inverse_of_eval(self, s, frac):
        F = antiderivative(s)
        lo, hi = F.knots[0], F.knots[-1]
        x = lo + frac * (hi - lo)
        assert invert(F, F(x)) == pytest.approx(x, rel=1e-12, abs=1e-12 * max(1.0, abs(lo), abs(hi)))


class TestSubgradient:
    def test_examples(self, Phi):
        assert subgradient_interval(Phi, 1.0) == (-1.0, -0.25)
        assert subgradient_interval(Phi, 0.5) == (-1.0, -1.0)

    @given(step_functions(), finite)
    def test_within_range(self, s, x):
        lo, hi = subgradient_interval(antiderivative(s), x)
        assert -1 <= lo <= hi < 0


def inclusion_residual(F, lam, xp, z):
    lo, hi = subgradient_interval(F, z)
    need = xp - z  # must lie in lam * [lo, hi]
    return max(lam * lo - need, need - lam * hi, 0.0)


class TestProx1d:
    def test_examples(self, Phi):
        assert prox_1d(Phi, 1.0, 0.0) == 1.0
        assert prox_1d(Phi, 1.0, -3.0) == -2.0
        assert prox_1d(Phi, 0.0, 7.0) == 7.0

    def test_example_against_golden_section(self, Phi):
        assert prox_1d_oracle(Phi, 1.0, 0.0) == pytest.approx(1.0, abs=1e-7)

    def test_rejects_negative_lambda(self, Phi):
        with pytest.raises(ValueError):
            prox_1d(Phi, -0.1, 0.0)

    @given(step_functions(), st.floats(0, 3), finite)
    @settings(max_examples=150, deadline=None)
    def test_optimality(self, s, lam, xp):
        F = antiderivative(s)
        z = prox_1d(F, lam, xp)
        assert inclusion_residual(F, lam, xp, z) <= 1e-12 * max(1.0, abs(xp))
        obj = lambda t: lam * F(t) + 0.5 * (t - xp) ** 2
        rng = np.random.default_rng(0)
        cands = z + rng.normal(scale=0.5, size=1000) * rng.choice([1e-6, 1e-3, 1.0], size=1000)
        best = obj(z)
        assert all(obj(float(c)) >= best - 1e-12 for c in cands)

    @given(step_functions(), st.floats(0, 3), finite, finite)
    def test_nonexpansive(self, s, lam, a, b):
        F = antiderivative(s)
        assert abs(prox_1d(F, lam, a) - prox_1d(F, lam, b)) <= abs(a - b) * (1 + 1e-12) + 1e-12

    @given(step_functions(), st.floats(0.01, 3), finite)
    @settings(max_examples=50, deadline=None)
    def test_matches_golden_section(self, s, lam, xp):
        F = antiderivative(s)
        assert prox_1d(F, lam, xp) == pytest.approx(prox_1d_oracle(F, lam, xp, width=lam + 1), abs=1e-6)
