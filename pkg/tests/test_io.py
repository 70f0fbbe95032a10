import math

import pytest
from hypothesis import HealthCheck, given, settings

from hillspec import io as hio
from hillspec.eig import spectrum
from hillspec.locate import min_certificate
from hillspec.operator import OperatorSpec, assemble
from hillspec.seqspace import CoeffSeq
from strategies import coeff_seqs, finite_complex


def _write(tmp_path, text, name="v.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_single_constant(tmp_path):
    assert hio.ingest_potential(_write(tmp_path, "k,re,im\n0,7,0\n")) == CoeffSeq({0: 7})


def test_mathieu_file(tmp_path):
    p = _write(tmp_path, "k,re,im\n-1,5,0\n1,5,0\n")
    assert hio.ingest_potential(p) == CoeffSeq({-1: 5, 1: 5})


@pytest.mark.parametrize("body, match", [
    ("k,re,im\n0,7,0\n0,1,0\n", "duplicate"),
    ("k,re,im\n0,7\n", "3 fields"),
    ("k,re,im\n0,nan,0\n", "non-finite"),
    ("k,re,im\n0,inf,0\n", "non-finite"),
    ("k,re,im\nx,1,0\n", "invalid literal"),
    ("index,re,im\n0,1,0\n", "header"),
    ("", "header"),
])
def test_rejections(tmp_path, body, match):
    with pytest.raises(hio.PotentialFormatError, match=match):
        hio.ingest_potential(_write(tmp_path, body))


@settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(coeff_seqs(radius=40, max_size=20, values=finite_complex))
def test_round_trip_is_exact(tmp_path, v):
    p = hio.write_potential(tmp_path / "rt.csv", v)
    assert hio.ingest_potential(p) == v


def test_fmt():
    assert hio.fmt(True) == "true" and hio.fmt(3) == "3"
    x = 0.1 + 0.2
    assert float(hio.fmt(x)) == x
    assert hio.fmt(math.pi) == "3.1415926535897931"


def test_spectrum_and_meta(tmp_path):
    res = spectrum(assemble(OperatorSpec(1, CoeffSeq()), 4))
    csv, meta = hio.write_spectrum(tmp_path / "s.csv", res)
    lines = csv.read_text().splitlines()
    assert lines[0] == "index,re,im,residual"
    assert lines[2] == f"1,{hio.fmt(math.pi ** 2)},0,0"
    assert "solver_path = diagonal" in meta.read_text()


def test_matrix_dump(tmp_path):
    op = assemble(OperatorSpec(1, CoeffSeq({1: 2j})), 1)
    rows = hio.write_matrix(tmp_path / "a.csv", op).read_text().splitlines()
    assert rows[0] == "k,j,re,im"
    assert "0,-1,0,2" in rows and "-1,-1,9.869604401089358,0" in rows


def test_localization_files(tmp_path):
    rep = min_certificate(spectrum(assemble(OperatorSpec(1, CoeffSeq()), 8)), 4).report
    a, b = hio.write_localization(tmp_path / "l.csv", rep, tmp_path / "ls.csv")
    assert a.read_text().splitlines()[0] == "n,dev_odd,dev_even,bound,pass"
    assert b.read_text().splitlines() == ["cone_count,expected,M,n0,certified", "1,1,1,1,true"]
