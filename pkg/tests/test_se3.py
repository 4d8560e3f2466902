import math

import numpy as np
import pytest
import scipy.linalg

from rototrack import CutLocusWarning, NumericalError
from rototrack.se3 import (
    SE3_IDENTITY,
    OrientedPoint3D,
    SE3Coords,
    SE3Element,
    lift_to_se3,
    orthonormalize,
    rot_exp,
    rot_log,
    rot_y,
    rot_z,
    se3_algebra_basis,
    se3_approx_distance,
    se3_compose,
    se3_dilate,
    se3_exp,
    se3_frame,
    se3_fundamental_gauge,
    se3_gauge_norm,
    se3_inverse,
    se3_log,
    se3_nilpotent_compose,
    skew,
)

RNG = np.random.default_rng(20240502)


def random_rotation(rng, angle_cap=math.pi - 0.05):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return rot_exp(axis * rng.uniform(-angle_cap, angle_cap))


def random_element(rng, angle_cap=math.pi - 0.05):
    return SE3Element(rng.uniform(-3, 3, size=3), random_rotation(rng, angle_cap))


def random_unit(rng):
    n = rng.normal(size=3)
    return n / np.linalg.norm(n)


class TestGroupOps:
    def test_identity_and_inverse(self):
        g = random_element(RNG)
        e = se3_compose(g, se3_inverse(g))
        assert np.abs(e.x).max() < 1e-10
        assert np.abs(e.R - np.eye(3)).max() < 1e-10

    def test_pure_translations_add(self):
        a = SE3Element([1, 2, 3], np.eye(3))
        b = SE3Element([-4, 0, 1], np.eye(3))
        out = se3_compose(a, b)
        assert np.allclose(out.x, [-3, 2, 4])
        assert np.allclose(out.R, np.eye(3))

    def test_compose_example(self):
        g = SE3Element([1, 0, 0], rot_z(math.pi / 2))
        h = SE3Element([1, 0, 0], np.eye(3))
        out = se3_compose(g, h)
        assert np.allclose(out.x, [1, 1, 0], atol=1e-15)
        assert np.allclose(out.R, rot_z(math.pi / 2))

    def test_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            SE3Element(np.zeros(3), np.eye(3) * 1.001)

    def test_orthonormalize(self):
        R = random_rotation(RNG) + RNG.normal(scale=1e-6, size=(3, 3))
        fixed = orthonormalize(R)
        assert np.abs(fixed.T @ fixed - np.eye(3)).max() < 1e-12


class TestRotExpLog:
    def test_zero(self):
        assert np.allclose(rot_exp(np.zeros(3)), np.eye(3))
        assert np.allclose(rot_log(np.eye(3)), np.zeros(3))

    def test_quarter_turn_about_z(self):
        R = rot_exp([0, 0, math.pi / 2])
        assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_angle_identity(self):
        for _ in range(50):
            R = random_rotation(RNG)
            q = np.linalg.norm(rot_log(R))
            assert q == pytest.approx(math.acos((np.trace(R) - 1) / 2), abs=1e-10)

    def test_roundtrip(self):
        for _ in range(200):
            w = RNG.normal(size=3)
            w *= RNG.uniform(0, math.pi - 0.02) / np.linalg.norm(w)
            assert np.allclose(rot_exp(rot_log(rot_exp(w))), rot_exp(w), atol=1e-10)

    def test_angle_pi_flagged_and_consistent(self):
        axis = np.array([0.6, 0.0, 0.8])
        R = rot_exp(axis * math.pi)
        with pytest.warns(CutLocusWarning):
            w = rot_log(R)
        assert np.linalg.norm(w) == pytest.approx(math.pi, abs=1e-9)
        assert np.abs(rot_exp(w) - R).max() < 1e-9


class TestSE3ExpLog:
    def test_pure_translation(self):
        c = se3_log(SE3Element([1, -2, 3], np.eye(3)))
        assert np.allclose(c.spatial, [1, -2, 3])
        assert np.allclose(c.rotational, 0)

    def test_log_example(self):
        c = se3_log(SE3Element([1, 0, 0], rot_z(math.pi / 2)))
        assert np.allclose(c.spatial, [math.pi / 4, -math.pi / 4, 0], atol=1e-12)
        assert np.allclose(c.rotational, [0, 0, math.pi / 2], atol=1e-12)

    def test_log_matches_matrix_logarithm(self):
        basis = se3_algebra_basis()
        for _ in range(100):
            g = random_element(RNG)
            m = np.real(scipy.linalg.logm(g.matrix()))
            ref = np.array(
                [m[0, 3], m[1, 3], m[2, 3], m[2, 1], m[0, 2], m[1, 0]]
            )
            assert np.allclose(se3_log(g).c, ref, atol=1e-8)
            # double check the flattening convention against the basis
            rebuilt = sum(ref[i] * basis[i] for i in range(6))
            assert np.abs(rebuilt - m).max() < 1e-8

    def test_exp_examples(self):
        e = se3_exp(SE3Coords(np.zeros(6)))
        assert np.allclose(e.x, 0) and np.allclose(e.R, np.eye(3))
        g = se3_exp(SE3Coords([1, 2, 3, 0, 0, 0]))
        assert np.allclose(g.x, [1, 2, 3]) and np.allclose(g.R, np.eye(3))

    def test_roundtrip_sweep(self):
        for _ in range(1000):
            w = RNG.normal(size=3)
            w *= RNG.uniform(0, min(3.0, math.pi - 0.02)) / np.linalg.norm(w)
            c = SE3Coords(np.concatenate([RNG.uniform(-3, 3, size=3), w]))
            back = se3_log(se3_exp(c))
            assert np.allclose(back.c, c.c, atol=1e-10)


class TestLift:
    def test_north_pole(self):
        p = OrientedPoint3D([0.5, 0, 0], [0, 0, 1])
        assert np.allclose(lift_to_se3(p).R, np.eye(3))

    def test_e_x(self):
        p = OrientedPoint3D(np.zeros(3), [1, 0, 0])
        assert np.allclose(lift_to_se3(p).R, rot_y(math.pi / 2), atol=1e-15)

    def test_antipode_convention(self):
        p = OrientedPoint3D(np.zeros(3), [0, 0, -1])
        assert np.allclose(lift_to_se3(p).R, rot_y(math.pi), atol=1e-15)

    def test_heading_property(self):
        for _ in range(200):
            n = random_unit(RNG)
            g = lift_to_se3(OrientedPoint3D(np.zeros(3), n))
            assert np.abs(g.R @ [0, 0, 1] - n).max() < 1e-12

    def test_unit_norm_required(self):
        with pytest.raises(ValueError):
            OrientedPoint3D(np.zeros(3), [0, 0, 0.5])


class TestFrame:
    def test_spatial_parts_are_rotation_columns(self):
        g = random_element(RNG)
        frame = se3_frame(g)
        for i in range(3):
            assert np.allclose(frame[i][:3, 3], g.R[:, i], atol=1e-12)
        assert np.allclose(frame[2][:3, 3], g.R @ [0, 0, 1], atol=1e-12)

    def test_structure_constants(self):
        basis = se3_algebra_basis()

        def coeffs(m):
            return np.array(
                [m[0, 3], m[1, 3], m[2, 3], m[2, 1], m[0, 2], m[1, 0]]
            )

        # nonzero brackets of the motion algebra, translations first:
        # [A4,A5]=A6 and cyclic; [A_rot_i, A_trans_j] = hat(e_i) e_j
        table = {}
        for i in range(3, 6):
            w = np.zeros(3)
            w[i - 3] = 1.0
            for j in range(3):
                e = np.zeros(3)
                e[j] = 1.0
                table[(i, j)] = np.concatenate([skew(w) @ e, np.zeros(3)])
        table[(3, 4)] = np.array([0, 0, 0, 0, 0, 1.0])
        table[(4, 5)] = np.array([0, 0, 0, 1.0, 0, 0])
        table[(5, 3)] = np.array([0, 0, 0, 0, 1.0, 0])
        for i in range(6):
            for j in range(6):
                got = coeffs(basis[i] @ basis[j] - basis[j] @ basis[i])
                want = table.get((i, j), -table.get((j, i), np.zeros(6)) if (j, i) in table else np.zeros(6))
                assert np.abs(got - want).max() < 1e-12, (i, j)

    def test_bch_truncation_order(self):
        basis = se3_algebra_basis()
        xv = np.array([0.4, -0.2, 0.7, 0.5, -0.3, 0.2])
        yv = np.array([-0.1, 0.6, 0.2, -0.4, 0.5, 0.3])
        mx = sum(xv[i] * basis[i] for i in range(6))
        my = sum(yv[i] * basis[i] for i in range(6))
        m = mx @ my - my @ mx
        comm = np.array([m[0, 3], m[1, 3], m[2, 3], m[2, 1], m[0, 2], m[1, 0]])

        def residual(t):
            g = se3_compose(se3_exp(SE3Coords(t * xv)), se3_exp(SE3Coords(t * yv)))
            truncated = t * xv + t * yv + 0.5 * t * t * comm
            return np.linalg.norm(se3_log(g).c - truncated)

        r = [residual(t) for t in (0.1, 0.05, 0.025)]
        for a, b in zip(r, r[1:]):
            assert 8.0 * 0.7 <= a / b <= 8.0 * 1.3


class TestNilpotentGroup:
    def test_identity(self):
        c = SE3Coords(RNG.uniform(-1, 1, size=6))
        out = se3_nilpotent_compose(SE3Coords(np.zeros(6)), c)
        assert np.allclose(out.c, c.c)

    def test_product_example(self):
        a = SE3Coords([0, 0, 1, 0, 0, 0])
        b = SE3Coords([0, 0, 0, 0, 1, 0])
        assert np.allclose(se3_nilpotent_compose(a, b).c, [-0.5, 0, 1, 0, 1, 0])

    def test_inverse_is_negation(self):
        for _ in range(50):
            c = SE3Coords(RNG.uniform(-2, 2, size=6))
            out = se3_nilpotent_compose(c, SE3Coords(-c.c))
            assert np.allclose(out.c, 0, atol=1e-12)


class TestGaugeNorm:
    def test_examples(self):
        assert se3_gauge_norm(SE3Coords(np.zeros(6))) == 0.0
        assert se3_gauge_norm(SE3Coords([0, 0, 0, 1, 0, 0])) == pytest.approx(1.0)
        assert se3_gauge_norm(SE3Coords([0, 0, 0, 0, 0, 1]), zeta=16) == pytest.approx(2.0)

    def test_homogeneity(self):
        for _ in range(100):
            c = SE3Coords(RNG.uniform(-2, 2, size=6))
            s = RNG.uniform(0.1, 4.0)
            lhs = se3_gauge_norm(se3_dilate(s, c), xi=1.0, zeta=100.0)
            rhs = s * se3_gauge_norm(c, xi=1.0, zeta=100.0)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_symmetry(self):
        c = SE3Coords(RNG.uniform(-2, 2, size=6))
        assert se3_gauge_norm(c) == se3_gauge_norm(SE3Coords(-c.c))


class TestApproxDistance:
    def test_zero_on_diagonal(self):
        g = random_element(RNG)
        assert se3_approx_distance(g, g) == pytest.approx(0.0, abs=1e-12)

    def test_left_invariance(self):
        for _ in range(50):
            g, h, k = (random_element(RNG, 1.2) for _ in range(3))
            d0 = se3_approx_distance(g, h)
            d1 = se3_approx_distance(se3_compose(k, g), se3_compose(k, h))
            assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-12)

    def test_accepts_oriented_points(self):
        p = OrientedPoint3D([0, 0, 0], [0, 0, 1])
        q = OrientedPoint3D([0, 0, 0.5], [0, 0, 1])
        assert se3_approx_distance(p, q, xi=1) == pytest.approx(0.5)

    def test_quotient_rotation_invariance(self):
        # rotating both oriented points about e_z must not change the distance
        for _ in range(50):
            p = OrientedPoint3D(RNG.uniform(-2, 2, 3), random_unit(RNG))
            q = OrientedPoint3D(RNG.uniform(-2, 2, 3), random_unit(RNG))
            d0 = se3_approx_distance(p, q)
            a = RNG.uniform(0, 2 * math.pi)
            Rz = rot_z(a)
            p2 = OrientedPoint3D(Rz @ p.y, Rz @ p.n)
            q2 = OrientedPoint3D(Rz @ q.y, Rz @ q.n)
            assert se3_approx_distance(p2, q2) == pytest.approx(d0, rel=1e-8, abs=1e-8)


class TestFundamentalGauge:
    def test_unit_norm(self):
        c = SE3Coords([0, 0, 0, 1, 0, 0])
        assert se3_fundamental_gauge(c) == pytest.approx(1.0)

    def test_scaling(self):
        c = SE3Coords([0.2, -0.1, 0.5, 0.3, -0.4, 0.1])
        for s in [0.5, 2.0]:
            ratio = se3_fundamental_gauge(se3_dilate(s, c)) / se3_fundamental_gauge(c)
            assert ratio == pytest.approx(s ** (2 - 9), rel=1e-10)

    def test_singularity(self):
        with pytest.raises(NumericalError):
            se3_fundamental_gauge(SE3Coords(np.zeros(6)))
