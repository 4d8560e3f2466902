import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from rototrack import CutLocusWarning, NumericalError
from rototrack.se2 import (
    SE2_IDENTITY,
    SE2Coords,
    SE2Element,
    se2_algebra_basis,
    se2_approx_distance,
    se2_compose,
    se2_coords_to_matrix,
    se2_dilate,
    se2_exp,
    se2_frame,
    se2_fundamental_gauge,
    se2_gauge_norm,
    se2_inverse,
    se2_log,
    se2_matrix_to_coords,
    se2_nilpotent_compose,
    wrap_angle,
)

RNG = np.random.default_rng(20240501)


def random_element(rng, theta_cap=math.pi - 1e-3):
    x, y = rng.uniform(-3, 3, size=2)
    theta = rng.uniform(-theta_cap, theta_cap)
    return SE2Element(x, y, theta)


def _clip_tiny(v):
    # avoid float underflow of the quartic gauge for denormal-scale inputs
    return 0.0 if abs(v) < 1e-60 else v


finite_coords = st.builds(
    SE2Coords,
    st.floats(-3, 3, allow_nan=False).map(_clip_tiny),
    st.floats(-5, 5, allow_nan=False).map(_clip_tiny),
    st.floats(-5, 5, allow_nan=False).map(_clip_tiny),
)


class TestGroupOps:
    def test_identity(self):
        g = SE2Element(0.3, -1.2, 0.7)
        assert se2_compose(SE2_IDENTITY, g) == g
        assert se2_compose(g, SE2_IDENTITY) == g

    def test_inverse_law(self):
        for _ in range(50):
            g = random_element(RNG)
            e = se2_compose(g, se2_inverse(g))
            assert abs(e.x) < 1e-12 and abs(e.y) < 1e-12 and abs(e.theta) < 1e-12

    def test_compose_quarter_turn(self):
        out = se2_compose(SE2Element(1, 0, math.pi / 2), SE2Element(1, 0, 0))
        assert np.allclose(out.as_array(), [1.0, 1.0, math.pi / 2])

    def test_inverse_examples(self):
        assert se2_inverse(SE2_IDENTITY) == SE2_IDENTITY
        assert np.allclose(se2_inverse(SE2Element(1, 0, 0)).as_array(), [-1, 0, 0])
        inv = se2_inverse(SE2Element(1, 0, math.pi / 2))
        assert np.allclose(inv.as_array(), [0.0, 1.0, -math.pi / 2])

    def test_associativity(self):
        for _ in range(20):
            g, h, k = (random_element(RNG) for _ in range(3))
            lhs = se2_compose(se2_compose(g, h), k)
            rhs = se2_compose(g, se2_compose(h, k))
            assert np.allclose(lhs.as_array(), rhs.as_array(), atol=1e-12)

    def test_theta_wrap(self):
        g = SE2Element(0, 0, 3 * math.pi)
        assert g.theta == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)


class TestExpLog:
    def test_log_zero_rotation(self):
        c = se2_log(SE2Element(1, 2, 0))
        assert np.allclose(c.as_array(), [0, 1, 2])

    def test_log_identity(self):
        assert np.allclose(se2_log(SE2_IDENTITY).as_array(), 0)

    def test_log_quarter_turn(self):
        c = se2_log(SE2Element(1, 0, math.pi / 2))
        assert np.allclose(c.as_array(), [math.pi / 2, math.pi / 4, -math.pi / 4])

    def test_log_matches_matrix_logarithm(self):
        # independent oracle: principal matrix logarithm of the homogeneous form
        for _ in range(100):
            g = random_element(RNG)
            m = scipy.linalg.logm(g.matrix())
            ref = se2_matrix_to_coords(np.real(m))
            assert np.allclose(se2_log(g).as_array(), ref.as_array(), atol=1e-9)

    def test_exp_examples(self):
        assert se2_exp(SE2Coords(0, 0, 0)) == SE2_IDENTITY
        assert np.allclose(se2_exp(SE2Coords(0, 1.5, -2.5)).as_array(), [1.5, -2.5, 0])
        g = se2_exp(SE2Coords(math.pi / 2, math.pi / 4, -math.pi / 4))
        assert np.allclose(g.as_array(), [1, 0, math.pi / 2], atol=1e-12)

    def test_exp_matches_matrix_exponential(self):
        for _ in range(100):
            c = SE2Coords(*RNG.uniform(-2.5, 2.5, size=3))
            ref = scipy.linalg.expm(se2_coords_to_matrix(c))
            assert np.allclose(se2_exp(c).matrix(), ref, atol=1e-10)

    def test_roundtrip(self):
        for _ in range(500):
            g = random_element(RNG)
            back = se2_exp(se2_log(g))
            assert np.allclose(back.as_array(), g.as_array(), atol=1e-10)

    def test_roundtrip_small_angle(self):
        for theta in [1e-9, -1e-7, 1e-5, 0.0]:
            g = SE2Element(0.7, -0.3, theta)
            assert np.allclose(se2_exp(se2_log(g)).as_array(), g.as_array(), atol=1e-12)

    def test_cut_locus_warning(self):
        with pytest.warns(CutLocusWarning):
            c = se2_log(SE2Element(1, 0, math.pi))
        # cot(pi/2) = 0, so the coefficients stay finite
        assert np.allclose(c.as_array(), [math.pi, 0.0, -math.pi / 2])


class TestFrame:
    def test_at_identity(self):
        a1, a2, a3 = se2_frame(SE2_IDENTITY)
        assert np.allclose(a1, [0, 0, 1])
        assert np.allclose(a2, [1, 0, 0])
        assert np.allclose(a3, [0, 1, 0])

    def test_quarter_turn(self):
        _, a2, _ = se2_frame(SE2Element(0, 0, math.pi / 2))
        assert np.allclose(a2, [0, 1, 0], atol=1e-15)

    def test_orthonormal_spatial(self):
        for _ in range(20):
            g = random_element(RNG)
            _, a2, a3 = se2_frame(g)
            assert abs(np.dot(a2, a3)) < 1e-14
            assert np.linalg.norm(a2) == pytest.approx(1.0)
            assert np.linalg.norm(a3) == pytest.approx(1.0)


class TestNilpotentGroup:
    @given(finite_coords)
    def test_identity(self, c):
        out = se2_nilpotent_compose(SE2Coords(0, 0, 0), c)
        assert np.allclose(out.as_array(), c.as_array())

    def test_heisenberg_product(self):
        out = se2_nilpotent_compose(SE2Coords(1, 0, 0), SE2Coords(0, 1, 0))
        assert np.allclose(out.as_array(), [1, 1, 0.5])

    @given(finite_coords)
    def test_inverse_is_negation(self, c):
        neg = SE2Coords(-c.c1, -c.c2, -c.c3)
        assert np.allclose(se2_nilpotent_compose(c, neg).as_array(), 0, atol=1e-12)

    def test_dilation_is_automorphism(self):
        for _ in range(50):
            a = SE2Coords(*RNG.uniform(-2, 2, size=3))
            b = SE2Coords(*RNG.uniform(-2, 2, size=3))
            s = RNG.uniform(0.1, 3.0)
            lhs = se2_dilate(s, se2_nilpotent_compose(a, b))
            rhs = se2_nilpotent_compose(se2_dilate(s, a), se2_dilate(s, b))
            assert np.allclose(lhs.as_array(), rhs.as_array(), atol=1e-12)

    def test_dilate_examples(self):
        c = SE2Coords(1, 1, 1)
        assert np.allclose(se2_dilate(1.0, c).as_array(), c.as_array())
        assert np.allclose(se2_dilate(2.0, c).as_array(), [2, 2, 4])
        with pytest.raises(ValueError):
            se2_dilate(0.0, c)


class TestGaugeNorm:
    def test_examples(self):
        assert se2_gauge_norm(SE2Coords(0, 0, 0)) == 0.0
        assert se2_gauge_norm(SE2Coords(1, 0, 0), xi=1, zeta=7.0) == pytest.approx(1.0)
        assert se2_gauge_norm(SE2Coords(0, 0, 1), xi=1, zeta=16) == pytest.approx(2.0)

    @given(finite_coords, st.floats(0.05, 5.0))
    def test_homogeneity(self, c, s):
        lhs = se2_gauge_norm(se2_dilate(s, c), xi=1.0, zeta=44.0)
        rhs = s * se2_gauge_norm(c, xi=1.0, zeta=44.0)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    @given(finite_coords)
    def test_symmetry(self, c):
        neg = SE2Coords(-c.c1, -c.c2, -c.c3)
        assert se2_gauge_norm(c) == se2_gauge_norm(neg)

    @given(finite_coords)
    def test_positive_definite(self, c):
        n = se2_gauge_norm(c)
        if c.c1 == 0 and c.c2 == 0 and c.c3 == 0:
            assert n == 0
        else:
            assert n > 0


class TestApproxDistance:
    def test_zero_on_diagonal(self):
        for _ in range(10):
            g = random_element(RNG)
            assert se2_approx_distance(g, g) == pytest.approx(0.0, abs=1e-12)

    def test_left_invariance(self):
        for _ in range(50):
            g, h, k = (random_element(RNG) for _ in range(3))
            d0 = se2_approx_distance(g, h, xi=0.7, zeta=44)
            d1 = se2_approx_distance(se2_compose(k, g), se2_compose(k, h), xi=0.7, zeta=44)
            assert d1 == pytest.approx(d0, rel=1e-10, abs=1e-12)

    def test_pure_translation(self):
        d = se2_approx_distance(SE2_IDENTITY, SE2Element(0.5, 0, 0), xi=1, zeta=44)
        assert d == pytest.approx(0.5)


class TestFundamentalGauge:
    def test_unit_norm(self):
        # ||(0,0,1)||_16 = 2, so pick the dilated point with norm 1
        c = se2_dilate(0.5, SE2Coords(0, 0, 1))
        assert se2_gauge_norm(c, 1, 16) == pytest.approx(1.0)
        assert se2_fundamental_gauge(c) == pytest.approx(1.0)

    def test_scaling(self):
        c = SE2Coords(0.4, -0.2, 0.9)
        for s in [0.5, 2.0, 3.7]:
            ratio = se2_fundamental_gauge(se2_dilate(s, c)) / se2_fundamental_gauge(c)
            assert ratio == pytest.approx(s ** (2 - 4), rel=1e-12)

    def test_singularity(self):
        with pytest.raises(NumericalError):
            se2_fundamental_gauge(SE2Coords(0, 0, 0))


class TestAlgebraStructure:
    def test_bracket_table(self):
        a1, a2, a3 = se2_algebra_basis()

        def bracket(x, y):
            return x @ y - y @ x

        assert np.abs(bracket(a1, a2) - a3).max() < 1e-12
        assert np.abs(bracket(a1, a3) + a2).max() < 1e-12
        assert np.abs(bracket(a2, a3)).max() < 1e-12

    def test_bch_truncation_order(self):
        # generic algebra elements with nonvanishing nested brackets
        X = SE2Coords(0.9, 0.4, -0.2)
        Y = SE2Coords(-0.3, 0.8, 0.5)
        mx, my = se2_coords_to_matrix(X), se2_coords_to_matrix(Y)
        comm = se2_matrix_to_coords(mx @ my - my @ mx).as_array()
        xv, yv = X.as_array(), Y.as_array()

        def residual(t):
            g = se2_compose(se2_exp(SE2Coords(*(t * xv))), se2_exp(SE2Coords(*(t * yv))))
            truncated = t * xv + t * yv + 0.5 * t * t * comm
            return np.linalg.norm(se2_log(g).as_array() - truncated)

        r = [residual(t) for t in (0.1, 0.05, 0.025)]
        for a, b in zip(r, r[1:]):
            assert 8.0 * 0.7 <= a / b <= 8.0 * 1.3
