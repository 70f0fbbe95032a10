import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hillspec.eig import spectrum
from hillspec.locate import (Cone, Disc, ExtM, Vert, asymptotic_ratios, common_certificate,
                             disc_radius_bounded, localization_report, min_certificate,
                             region_contains)
from hillspec.operator import OperatorSpec, assemble
from hillspec.seqspace import CoeffSeq, make_potential

PI2 = math.pi ** 2


def _spec(v, m=1, K=32):
    return spectrum(assemble(OperatorSpec(m, v), K))


class TestRegions:
    def test_ext(self):
        assert region_contains(ExtM(1), -2)
        assert not region_contains(ExtM(1), 0)

    def test_ext_boundary_is_closed(self):
        assert region_contains(ExtM(2), complex(1, 3))

    def test_vert(self):
        assert region_contains(Vert(1, 2, 2), 4 * PI2 + 3j)
        assert not region_contains(Vert(1, 2, 2), 4 * PI2 + 1j)
        assert not region_contains(Vert(1, 2, 2), 7 * PI2)

    def test_cone(self):
        assert region_contains(Cone(1, 1, 2), 0)
        assert Cone(1, 1, 2).upper == 2 * PI2
        assert not region_contains(Cone(1, 1, 2), 2.5 * PI2)

    def test_disc_is_open(self):
        assert region_contains(Disc(1j, 1), 1j + 0.5)
        assert not region_contains(Disc(1j, 1), 1j + 1)

    def test_invariants(self):
        with pytest.raises(ValueError):
            ExtM(0.5)
        with pytest.raises(ValueError):
            Vert(1, 1, PI2)
        with pytest.raises(ValueError):
            Cone(1, 1, 0)
        with pytest.raises(ValueError):
            Disc(0, 0)


class TestReport:
    def test_free_cone_count(self):
        rep = localization_report(_spec(CoeffSeq()), 1, 3, 16)
        assert rep.cone_count == 5
        assert rep.expected_cone_count == 5
        assert all(d.passed for d in rep.discs)
        assert rep.certified and rep.defects == 0
        assert [d.n for d in rep.discs] == list(range(3, 17))

    def test_window_limit(self):
        res = _spec(CoeffSeq(), K=16)
        with pytest.raises(ValueError):
            localization_report(res, 1, 1, 9)
        with pytest.raises(ValueError):
            localization_report(res, 1, 9, 8)

    def test_strict_inequality(self):
        # deviation exactly 1 at n = 1 with bound 1^m = 1 fails "< n^m"
        rep = localization_report(_spec(CoeffSeq({0: 1})), 1, 1, 16)
        assert not rep.discs[0].passed
        assert all(d.passed for d in rep.discs[1:])

    @pytest.mark.parametrize("m", [1, 2])
    def test_trig_certificate(self, m):
        v = make_potential("trig_poly", {"cos": [0, 30], "sin": [0, 0, 10j]})
        res = _spec(v, m, 128)
        cert = min_certificate(res, 64)
        assert cert.ok
        rep = localization_report(res, cert.M, cert.n0, 64)
        assert rep.certified


class TestMinCertificate:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_free(self, m):
        res = _spec(CoeffSeq(), m)
        cert = min_certificate(res, 16)
        assert (cert.ok, cert.M, cert.n0) == (True, 1.0, 1)
        assert all(r == 0 for _, r in asymptotic_ratios(res, 16))

    def test_unit_shift(self):
        # eigenvalues k^2 pi^2 + 1: the n = 1 deviation equals the bound 1, and
        # the n0 = 1 cone ends at 0 < 1, so the smallest certificate has n0 = 2
        cert = min_certificate(_spec(CoeffSeq({0: 1}), K=64), 32)
        assert (cert.ok, cert.M, cert.n0) == (True, 1.0, 2)
        assert cert.report.cone_count == 3

    def test_failure_is_reported(self):
        # a huge imaginary shift pushes every eigenvalue outside every cone
        cert = min_certificate(_spec(CoeffSeq({0: 5000j}), K=16), 8)
        assert not cert.ok and cert.M is None and cert.n0 is None
        assert cert.report is not None and not cert.report.certified

    def test_common(self):
        v = make_potential("trig_poly", {"cos": [0, 10]})
        res = [_spec(v), _spec(v + CoeffSeq({2: 0.01j}))]
        cert = common_certificate(res, 16)
        assert cert.ok
        assert all(localization_report(r, cert.M, cert.n0, 16).certified for r in res)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 2), st.integers(1, 12), st.sampled_from([1.0, 2.0, 8.0, 1024.0]))
def test_free_cone_count_stable_in_M(m, n0, M):
    res = _spec(CoeffSeq(), m)
    assert localization_report(res, M, n0, 16).cone_count == 2 * n0 - 1


class TestDiscRadius:
    def test_values(self):
        assert math.isclose(disc_radius_bounded(1, 1), 5.242640687119285, rel_tol=1e-15)
        assert disc_radius_bounded(2, 0) == 0
        assert math.isclose(disc_radius_bounded(3, 2), 2 * (27 * math.sqrt(2) + 1), rel_tol=1e-15)
        assert math.isclose(disc_radius_bounded(3, 2), 78.36753236814712, rel_tol=1e-14)

    def test_negative(self):
        with pytest.raises(ValueError):
            disc_radius_bounded(1, -1)


class TestAsymptotics:
    @pytest.mark.parametrize("c", [1.0, -3 + 2j])
    def test_constant_shift(self, c):
        ratios = asymptotic_ratios(_spec(CoeffSeq({0: c}), K=64), 32)
        assert [n for n, _ in ratios] == list(range(1, 33))
        for n, r in ratios:
            assert abs(r - abs(c) / n) <= 1e-10
        assert all(b[1] < a[1] for a, b in zip(ratios, ratios[1:]))

    def test_mathieu_trend(self):
        r = dict(asymptotic_ratios(_spec(CoeffSeq({-1: 5, 1: 5}), K=128), 64))
        early = np.median([r[n] for n in range(2, 17)])
        late = np.median([r[n] for n in range(33, 65)])
        assert late < 0.5 * early
