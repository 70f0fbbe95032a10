import json
import math

import pytest

from hillspec import cli, verify


def _cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _main(tmp_path, suite, text, *extra):
    cfg = _cfg(tmp_path, text)
    out = tmp_path / "out"
    code = cli.main([suite, "--config", str(cfg), "--out", str(out), "--quiet", *extra])
    return code, out


class TestConfig:
    def test_parse(self):
        cfg = cli.parse_config("# header\nK = 16  # window\nK_list = 8, 16\n\npotential=zero\n")
        assert cfg == {"K": "16", "K_list": "8, 16", "potential": "zero"}

    @pytest.mark.parametrize("text", ["K 16\n", "= 3\n", "K = 1\nK = 2\n"])
    def test_parse_errors(self, text):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(text)

    def test_complex_values(self):
        cfg = cli.ExperimentConfig("resolvent", {"lambda": "-3 + 2i"})
        assert cfg.complex("lambda") == complex(-3, 2)

    def test_overrides(self, tmp_path):
        p = _cfg(tmp_path, "K = 8\nseed = 1\n")
        cfg = cli.load_config("spectrum", p, seed=9, k=32)
        assert cfg.K == 32 and cfg.int("seed") == 9

    def test_suite_mismatch(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.load_config("spectrum", _cfg(tmp_path, "suite = localize\n"))

    def test_digest_is_order_independent(self):
        a = cli.ExperimentConfig("spectrum", {"K": "8", "m": "1"})
        b = cli.ExperimentConfig("spectrum", {"m": "1", "K": "8"})
        assert a.digest() == b.digest()
        assert a.digest() != cli.ExperimentConfig("localize", {"K": "8", "m": "1"}).digest()


class TestSuites:
    def test_free_spectrum(self, tmp_path):
        code, out = _main(tmp_path, "spectrum", "m = 1\nK = 16\npotential = zero\n")
        assert code == 0
        rows = [r.split(",") for r in (out / "spectrum.csv").read_text().splitlines()[1:4]]
        vals = [float(r[1]) for r in rows]
        assert vals == [0.0, math.pi ** 2, math.pi ** 2]
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["files"]) == {"potential.csv", "spectrum.csv", "spectrum.meta"}
        assert "spectrum" in manifest["stages"]

    def test_truncation_table(self, tmp_path):
        code, out = _main(tmp_path, "spectrum",
                          "K = 16\npotential = trig_poly\ncos = 0, 10\nK_list = 8, 16, 32\ncount = 6\n")
        assert code == 0
        assert (out / "truncation.csv").read_text().startswith("K,index,re,im,max_change\n")

    def test_localize_unit_shift(self, tmp_path, capsys):
        cfg = _cfg(tmp_path, "m = 1\nK = 64\npotential = constant\nc = 1\n")
        code = cli.main(["localize", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        assert line.endswith("cone_count=3,expected=3,M=1,n0=2,certified=true")
        summary = (tmp_path / "o" / "localization_summary.csv").read_text().splitlines()
        assert summary[1] == "3,3,1,2,true"

    def test_localize_fixed_failure_exit_1(self, tmp_path):
        code, _ = _main(tmp_path, "localize", "K = 16\npotential = constant\nc = 1\nM = 1\nn0 = 1\nn_max = 8\n")
        assert code == 1

    def test_localize_potential_file(self, tmp_path):
        (tmp_path / "v.csv").write_text("k,re,im\n-1,5,0\n1,5,0\n")
        code, _ = _main(tmp_path, "localize", "K = 32\npotential = file\npath = v.csv\n")
        assert code == 0

    def test_projector(self, tmp_path):
        code, out = _main(tmp_path, "projector", "K = 16\ncontour = 9.869604401089358, 0, 1\nnodes = 64\n")
        assert code == 0
        rows = (out / "certificates.csv").read_text().splitlines()
        assert rows[0] == "s,trace_re,trace_im,count,valid"
        s, tr, ti, count, valid = rows[1].split(",")
        assert (count, valid) == ("2", "true")
        assert abs(float(tr) - 2) < 1e-6

    def test_projector_split_homotopy(self, tmp_path):
        text = ("m = 1\nK = 24\npotential = random_decay\neta = 0.25\nnorm = 3\nseed = 3\n"
                "contour = 88.82643960980423, 0, 3\nsplit_eps = 0.5\ns_grid = 0, 0.25, 0.5, 0.75, 1\n")
        code, out = _main(tmp_path, "projector", text)
        assert code == 0
        assert len((out / "certificates.csv").read_text().splitlines()) == 6

    def test_asymptotics(self, tmp_path):
        code, out = _main(tmp_path, "asymptotics", "K = 128\npotential = trig_poly\ncos = 0, 10\n")
        assert code == 0
        assert len((out / "asymptotics.csv").read_text().splitlines()) == 65

    def test_resolvent(self, tmp_path):
        text = ("m = 1\nK = 24\npotential = trig_poly\ncos = 0, 10, 0, 0, 0, 0, 2\nlambda = 40 + 20i\n"
                "neumann_order = 30\nsplit_eps = 0.2\ndelta = 0.1\ntrials = 50\n")
        code, out = _main(tmp_path, "resolvent", text)
        assert code == 0
        quantities = [r.split(",")[0] for r in (out / "resolvent.csv").read_text().splitlines()]
        assert "neumann_rel_error" in quantities and "relative_bound_margin" in quantities

    def test_resolvent_free_closed_form(self, tmp_path):
        code, out = _main(tmp_path, "resolvent", "m = 1\nK = 16\nlambda = -1\nin_space = -1, 0\nout_space = 1, 0\n")
        assert code == 0
        rows = dict(r.split(",") for r in (out / "resolvent.csv").read_text().splitlines()[1:])
        assert float(rows["closed_form_norm"]) == 1.0


class TestExitCodes:
    def test_missing_contour(self, tmp_path):
        assert _main(tmp_path, "projector", "K = 16\n")[0] == 2

    def test_bad_number(self, tmp_path):
        assert _main(tmp_path, "spectrum", "K = x\n")[0] == 2

    def test_bad_line(self, tmp_path):
        assert _main(tmp_path, "spectrum", "K 16\n")[0] == 2

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["spectrum", "--config", str(tmp_path / "none.cfg")]) == 2

    def test_bad_potential_file(self, tmp_path):
        (tmp_path / "v.csv").write_text("k,re,im\n0,1,0\n0,2,0\n")
        assert _main(tmp_path, "spectrum", "K = 8\npotential = file\npath = v.csv\n")[0] == 2

    def test_window_too_small_for_n_max(self, tmp_path):
        assert _main(tmp_path, "localize", "K = 8\nn_max = 5\n")[0] == 2

    def test_numerical_failure_names_stage(self, tmp_path):
        code, out = _main(tmp_path, "projector", "K = 16\ncontour = 9.869604401089358, 1, 1\n")
        assert code == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert any("stage 'projector'" in msg for msg in manifest["messages"])

    def test_neumann_divergence(self, tmp_path):
        # a loose split leaves the whole potential in the tail, so rho >= 1
        text = ("K = 16\npotential = trig_poly\ncos = 0, 0, 0, 0, 0, 0, 0, 0, 400\nlambda = 5 + 1i\n"
                "neumann_order = 5\nsplit_eps = 100\n")
        code, out = _main(tmp_path, "resolvent", text)
        assert code == 3


def test_determinism(tmp_path):
    text = "m = 2\nK = 24\npotential = random_decay\neta = 0.3\nnorm = 4\nseed = 11\nK_list = 8, 16, 24\n"
    cfg = _cfg(tmp_path, text)
    manifests = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert cli.main(["spectrum", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        manifests.append(json.loads((out / "manifest.json").read_text()))
    assert manifests[0]["files"] == manifests[1]["files"]
    assert manifests[0]["config_digest"] == manifests[1]["config_digest"]


def test_threads_env_does_not_change_output(tmp_path, monkeypatch):
    text = "m = 1\nK = 16\npotential = trig_poly\ncos = 0, 10\nK_list = 8, 16\ncontour = 88.82643960980423, 0, 3\n"
    files = []
    for threads in ("1", "4"):
        monkeypatch.setenv("HILLSPEC_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert cli.main(["projector", "--config", str(_cfg(tmp_path, text)), "--out", str(out), "--quiet"]) == 0
        files.append(json.loads((out / "manifest.json").read_text())["files"])
    assert files[0] == files[1]


def test_verify_all_fails_when_a_check_fails(tmp_path, monkeypatch):
    monkeypatch.setattr(verify, "CHECKS", [("ok", lambda: (True, "fine"), None),
                                           ("bad", lambda: (False, "broken"), None)])
    out = tmp_path / "v"
    assert cli.main(["verify-all", "--out", str(out), "--quiet"]) == 1
    assert (out / "verify_all.csv").read_text().splitlines() == ["check,pass,detail", "ok,true,fine",
                                                                   "bad,false,broken"]


def test_verify_all_full(tmp_path):
    out = tmp_path / "all"
    assert cli.main(["verify-all", "--out", str(out), "--quiet"]) == 0
    rows = (out / "verify_all.csv").read_text().splitlines()
    assert len(rows) == 1 + len(verify.CHECKS)
    assert all(",true," in r for r in rows[1:])
