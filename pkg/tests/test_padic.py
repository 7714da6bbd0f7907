"""Local heights: Newton polygon, predictions, traces, Hensel, lag times."""

import itertools
import random
from fractions import Fraction as F

import pytest

from heightdyn import (
    INFINITY,
    InfiniteValuationError,
    PreconditionError,
    SingularMatrixError,
    ValuationTrace,
    affine_map,
    hensel_quadratic_roots,
    is_nondegenerate,
    lag_time,
    measured_local_height,
    near_eigenspace_point,
    newton_valuations,
    orbit,
    point_height,
    point_padic_abs,
    predict_local_height,
    valuation_trace,
)
from heightdyn.padic import rational_residue


class TestNewtonPolygon:
    def test_two_slopes(self):
        r = newton_valuations(0, -1)
        assert (r.val_alpha, r.val_beta, r.case_tag) == (-1, 1, "distinct_slopes")
        r = newton_valuations(3, 1)
        assert (r.val_alpha, r.val_beta, r.case_tag) == (1, 2, "distinct_slopes")

    def test_single_slope(self):
        r = newton_valuations(2, 1)
        assert (r.val_alpha, r.val_beta, r.case_tag) == (1, 1, "single_slope")

    def test_zero_trace(self):
        r = newton_valuations(4, INFINITY)
        assert (r.val_alpha, r.val_beta, r.case_tag) == (2, 2, "single_slope")

    def test_half_integer(self):
        r = newton_valuations(3, 2)
        assert r.val_alpha == F(3, 2) == r.val_beta

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            newton_valuations(INFINITY, 1)

    def test_ordering_invariant(self):
        for u in range(-6, 7):
            for v in list(range(-6, 7)) + [INFINITY]:
                r = newton_valuations(u, v)
                assert r.val_alpha <= r.val_beta
                assert r.val_alpha + r.val_beta == u  # product has valuation u


class TestPredictLocalHeight:
    def test_case_i_homogeneous(self, case_i_map):
        pred = predict_local_height(case_i_map, 2)
        assert (pred.value, pred.theorem_case, pred.homogeneous) == (1, "i", True)

    def test_case_i_clamped(self):
        # affine with T = -3/4, D = 1 and a nonzero translation
        A = affine_map([[F(-3, 4), -1], [1, 0]], (1, 0))
        pred = predict_local_height(A, 2)
        assert (pred.value, pred.theorem_case) == (2, "i")
        assert not pred.homogeneous

    def test_case_ii_negative(self):
        # T=6, D=4 at p=2 sits exactly on v_p(D) = 2 v_p(T): case-ii value,
        # flagged as bound-backed
        A = affine_map([[6, -4], [1, 0]])
        pred = predict_local_height(A, 2)
        assert (pred.value, pred.theorem_case) == (-1, "ii")
        assert pred.bound_only

    def test_case_ii_strict(self):
        # T=12, D=8 at p=2: u=3 < 2v=4, value -u/2 is a half-integer
        A = affine_map([[12, -8], [1, 0]])
        pred = predict_local_height(A, 2)
        assert (pred.value, pred.theorem_case) == (F(-3, 2), "ii")
        assert not pred.bound_only

    def test_boundary_flagged(self):
        # v_3(6) = 1, v_3(9) = 2: u = 2v exactly
        A = affine_map([[6, -9], [1, 0]])
        pred = predict_local_height(A, 3)
        assert pred.theorem_case == "ii"
        assert pred.bound_only
        assert pred.value == -1

    def test_clamp_only_when_translated(self):
        hom = affine_map([[6, -4], [1, 0]])
        shifted = affine_map([[6, -4], [1, 0]], (1, 1))
        assert predict_local_height(hom, 2).value == -1
        assert predict_local_height(shifted, 2).value == 0


class TestValuationTrace:
    def test_constant_zero_orbit(self):
        tr = valuation_trace(itertools.repeat((F(0), F(0))), 2, 10)
        assert all(nu == INFINITY for _, nu in tr.samples)

    def test_case_i_slope(self, case_i_map):
        tr = valuation_trace(orbit(case_i_map, (F(1), F(0))), 2, 30)
        lag = lag_time(tr, 1)
        assert lag is not None and lag <= 5
        incs = tr.increments()
        assert all(i == -1 for i in incs[lag:])

    def test_csv_round_trip(self, tmp_path):
        tr = valuation_trace(itertools.repeat((F(0), F(4))), 3, 5)
        path = tmp_path / "t.csv"
        tr.write_csv(path)
        back = ValuationTrace.read_csv(path, 3)
        assert back == tr


class TestMeasured:
    def test_periodic_orbit_zero(self):
        pts = itertools.cycle([(F(1), F(0)), (F(0), F(-1))])
        tr = valuation_trace(pts, 2, 40)
        assert measured_local_height(tr) == 0

    def test_linear_map(self, case_i_map):
        tr = valuation_trace(orbit(case_i_map, (F(1), F(0))), 2, 500)
        assert abs(measured_local_height(tr) - 1) <= 0.01

    def test_infinite_endpoint(self):
        tr = ValuationTrace(2, ((0, INFINITY), (1, 3)))
        with pytest.raises(InfiniteValuationError):
            measured_local_height(tr)

    def test_too_short(self):
        with pytest.raises(PreconditionError):
            measured_local_height(ValuationTrace(2, ((0, 1),)))


class TestLagTime:
    def test_not_reached_tail(self):
        tr = ValuationTrace(2, ((0, 0), (1, -1), (2, -2), (3, -2)))
        assert lag_time(tr, 1) is None

    def test_stabilized(self):
        tr = ValuationTrace(2, ((0, 5), (1, 6), (2, 5), (3, 4), (4, 3)))
        assert lag_time(tr, 1) == 1

    def test_all_matching(self):
        tr = ValuationTrace(2, ((0, 0), (1, -2), (2, -4)))
        assert lag_time(tr, 2) == 0

    def test_trivial_window(self):
        assert lag_time(ValuationTrace(2, ((0, 1),)), 1) is None


class TestHensel:
    def test_hand_lift(self):
        a, b = hensel_quadratic_roots(3, 4, 2, 3)
        assert a.residue == 7 and a.valuation == 0
        assert b.residue == 4 and b.valuation == 2

    def test_k1(self):
        a, b = hensel_quadratic_roots(3, 4, 2, 1)
        assert a.residue == 1  # alpha' = T' mod p
        assert b.residue == 0

    def test_congruences_to_64(self):
        for K in (2, 5, 16, 33, 64):
            mod = 2**K
            a, b = hensel_quadratic_roots(3, 4, 2, K)
            assert (a.residue * a.residue - 3 * a.residue + 4) % mod == 0
            assert (b.residue * b.residue - 3 * b.residue + 4) % mod == 0
            assert (a.residue + b.residue) % mod == 3 % mod
            assert (a.residue * b.residue) % mod == 4 % mod

    def test_unit_root_valuation_always_zero(self):
        rng = random.Random(13)
        for _ in range(50):
            p = rng.choice((2, 3, 5, 7))
            Tp = rng.randint(1, 400)
            if Tp % p == 0:
                Tp += 1
            Dt = p ** rng.randint(1, 5) * rng.randint(1, 50)
            a, b = hensel_quadratic_roots(Tp, Dt, p, 40)
            assert a.valuation == 0
            assert a.residue % p == Tp % p
            mod = p**40
            assert (a.residue + b.residue) % mod == Tp % mod
            assert (a.residue * b.residue) % mod == Dt % mod

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            hensel_quadratic_roots(4, 4, 2, 3)  # p | T'
        with pytest.raises(PreconditionError):
            hensel_quadratic_roots(3, 5, 2, 3)  # p does not divide Dterm

    def test_rational_residue(self):
        assert rational_residue(F(3, 5), 2, 4) == (3 * pow(5, -1, 16)) % 16
        with pytest.raises(PreconditionError):
            rational_residue(F(1, 2), 2, 4)


class TestNearEigenspace:
    def test_weak_constraints(self, case_i_map):
        zp = near_eigenspace_point(case_i_map, 2, (F(2), F(0)), 1, F(1))
        assert max(abs(zp[0] - 2), abs(zp[1])) < 1

    def test_lemma_contract(self, case_i_map):
        from heightdyn import eigenline_representative, point_padic_abs

        eps = F(1, 2**20)
        z = (F(2), F(0))
        zp = near_eigenspace_point(case_i_map, 2, z, 30, eps)
        zeta, _ = eigenline_representative(case_i_map, 2, 30)
        arch = max(abs(zp[0] - z[0]), abs(zp[1] - z[1]))
        padic = point_padic_abs((zp[0] - zeta[0], zp[1] - zeta[1]), 2)
        assert arch + padic < eps  # exact rational comparison

    def test_two_regimes(self, case_i_map):
        zp = near_eigenspace_point(case_i_map, 2, (F(2), F(0)), 20, F(1, 10**8))
        tr = valuation_trace(orbit(case_i_map, zp), 2, 150)
        incs = tr.increments()
        assert incs[0] == 1  # rising prefix: contracting eigenvalue dominates
        tau = lag_time(tr, 1)
        assert tau is not None
        assert all(i == -1 for i in incs[tau:])

    def test_lag_monotone(self, case_i_map):
        taus = []
        for K in (10, 20, 30):
            zp = near_eigenspace_point(case_i_map, 2, (F(2), F(0)), K, F(1, 2**20))
            tr = valuation_trace(orbit(case_i_map, zp), 2, 200)
            taus.append(lag_time(tr, 1))
        assert all(t is not None for t in taus)
        assert taus == sorted(taus)
        assert taus[2] >= 20

    def test_height_growth(self, case_i_map):
        hts = []
        for K in (10, 20, 30):
            zp = near_eigenspace_point(case_i_map, 2, (F(2), F(0)), K, F(1, 2**20))
            hts.append(point_height(zp))
            assert point_height(zp) > 2 ** (K // 2)
        assert hts == sorted(hts)

    def test_case_ii_rejected(self):
        A = affine_map([[6, -4], [1, 0]])
        with pytest.raises(PreconditionError):
            near_eigenspace_point(A, 2, (F(1), F(0)), 5, F(1))


class TestTheoremAgreementAcrossMaps:
    """Measured vs predicted local heights on the eight fixed test maps:
    five with distinct eigenvalue valuations, three single-slope with
    even v_p(D)."""

    CASES = [
        # (T, D, p): five two-slope maps ...
        (F(3, 2), F(1), 2),
        (F(3, 4), F(1), 2),
        (F(5, 3), F(1), 3),
        (F(1, 6), F(1), 2),
        (F(1, 2), F(3), 2),
        # ... and three single-slope maps with even u
        (F(1), F(3, 4), 2),
        (F(1), F(2, 9), 3),
        (F(40), F(16), 2),
    ]

    def test_measured_matches_prediction(self):
        rng = random.Random(97)
        horizon = 2000
        total = 0
        for T, D, p in self.CASES:
            A = affine_map([[T, -D], [1, 0]])
            pred = predict_local_height(A, p)
            case_i = pred.theorem_case == "i"
            done = 0
            while done < 7:
                z0 = (
                    F(rng.randint(-50, 50), rng.randint(1, 20)),
                    F(rng.randint(-50, 50), rng.randint(1, 20)),
                )
                if z0 == (0, 0) or not is_nondegenerate(A, z0, p):
                    continue
                tr = valuation_trace(orbit(A, z0), p, horizon)
                measured = measured_local_height(tr)
                assert abs(measured - float(pred.value)) <= 0.01, (T, D, p, z0)
                if case_i:
                    # exact eventual step law, only claimed for two slopes
                    lag = lag_time(tr, pred.value)
                    assert lag is not None, (T, D, p, z0)
                done += 1
                total += 1
        assert total >= 50


class TestNondegenerate:
    def test_fixed_point_degenerate(self, case_i_map):
        assert not is_nondegenerate(case_i_map, (F(0), F(0)), 2)

    def test_generic_point(self, case_i_map):
        assert is_nondegenerate(case_i_map, (F(1), F(0)), 2)

    def test_constructed_degenerate(self, case_i_map):
        # v(x'1)+v(T) = v(x'0)+v(D) and same for y: x'0=2, y'0=-1
        assert not is_nondegenerate(case_i_map, (F(2), F(-1)), 2)
