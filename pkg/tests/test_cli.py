import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sipinterp import cli, lpspace
from sipinterp import io as sio
from sipinterp._numerics import ConvergenceError

finite = st.floats(allow_nan=False, allow_infinity=False)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestComplexFormat:
    @pytest.mark.parametrize(
        "text,value",
        [("1+2i", 1 + 2j), ("-0.5-1e-3i", -0.5 - 0.001j), ("3", 3), ("2i", 2j), ("1-2j", 1 - 2j), ("-i", -1j)],
    )
    def test_parse(self, text, value):
        assert sio.parse_complex(text) == value

    @pytest.mark.parametrize("text", ["", "abc", "1+2k"])
    def test_parse_errors(self, text):
        with pytest.raises(ValueError):
            sio.parse_complex(text)

    @given(finite, finite)
    def test_roundtrip_exact(self, a, b):
        z = complex(a, b)
        assert sio.parse_complex(sio.format_complex(z)) == z

    def test_json_pairs(self):
        assert json.loads(sio.dumps({"z": 1 - 2j, "v": np.array([1j, 2])})) == {"z": [1.0, -2.0], "v": [[0.0, 1.0], [2.0, 0.0]]}

    def test_vectors(self):
        np.testing.assert_array_equal(sio.complex_vector([1, [0, 1], "2-3i"]), [1, 1j, 2 - 3j])
        assert sio.complex_vector([1, 2]).dtype == float
        with pytest.raises(ValueError):
            sio.complex_vector([[1, 2, 3]])


class TestProblemFiles:
    def test_json_inline(self, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"S": [[1, 0], [0, [0, 2]]], "J": [2], "s": ["1+i"], "p": 3}))
        prob = sio.load_lp_problem(str(f))
        assert prob.indices.tolist() == [1]
        assert prob.S[1, 1] == 2j and prob.values[0] == 1 + 1j and prob.p.p == 3

    def test_json_csv_matrix(self, tmp_path):
        (tmp_path / "S.csv").write_text("1,0,0\n0,2-1i,0\n0,0,1\n")
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"S": "S.csv", "J": [1, 3], "s": [1, 2]}))
        prob = sio.load_lp_problem(str(f), p=1.5)
        assert prob.S[1, 1] == 2 - 1j and prob.p.p == 1.5

    def test_roundtrip(self, tmp_path):
        prob = lpspace.tridiagonal_inverse_problem(p=2.5)
        f = tmp_path / "t.json"
        f.write_text(json.dumps(sio.lp_problem_to_json(prob)))
        back = sio.load_lp_problem(str(f))
        np.testing.assert_array_equal(back.S, prob.S)
        np.testing.assert_array_equal(back.indices, prob.indices)

    def test_missing_keys(self, tmp_path):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"S": [[1]]}))
        with pytest.raises(ValueError):
            sio.load_lp_problem(str(f))

    def test_sweep_csv(self):
        rows, _ = lpspace.p_sweep(lpspace.hadamard_problem(), [1.5, 3.0])
        table = list(csv.reader(io.StringIO(sio.sweep_csv(rows))))
        assert table[0] == ["p", "norm", "x_1", "x_2", "x_3", "x_4"]
        assert float(table[2][0]) == 3.0


class TestCommands:
    def test_interp_single(self, capsys):
        code, out, _ = run(capsys, "interp-single", "--space", "hardy-disk", "--p", "2", "--node", "0.5", "--value", "1")
        assert code == 0
        assert json.loads(out)["norm"] == pytest.approx(0.8660254, abs=1e-7)

    def test_interp_single_oracle_gap_fails(self, capsys):
        code, _, err = run(
            capsys, "interp-single", "--space", "hardy-ball", "--n", "2", "--p", "3",
            "--node", "0.3,0.2i", "--value", "1", "--oracle", "--oracle-tol", "1e-12",
        )
        assert code == 2 and "oracle gap" in err

    def test_sweep(self, capsys, tmp_path):
        f = tmp_path / "h.json"
        f.write_text(json.dumps(sio.lp_problem_to_json(lpspace.hadamard_problem())))
        code, out, _ = run(capsys, "sweep-p", "--problem", str(f), "--pmin", "1.02", "--pmax", "10", "--points", "60")
        assert code == 0
        table = list(csv.reader(io.StringIO(out)))
        norms = np.array([float(r[1]) for r in table[1:]])
        assert norms.size == 60 and np.all(np.diff(norms) < 0)

    def test_sweep_deterministic(self, capsys, tmp_path):
        args = ["sweep-p", "--problem", "tridiagonal-16", "--pmin", "1.1", "--pmax", "5", "--points", "6", "--jobs", "2"]
        a = run(capsys, *args)[1]
        b = run(capsys, *args)[1]
        assert a == b
        out = tmp_path / "s.csv"
        assert cli.main(args + ["--output", str(out)]) == 0
        assert out.read_text() == a

    def test_sweep_hardy(self, capsys, tmp_path):
        f = tmp_path / "h.json"
        f.write_text(json.dumps({"nodes": [0.5, "-0.3333333333333333", [0, 0.25]], "values": [1, 0.9, 0.8]}))
        code, out, _ = run(capsys, "sweep-p", "--problem", str(f), "--pmin", "1.7", "--pmax", "2.6", "--points", "4",
                           "--spacing", "linear", "--no-solution")
        assert code == 0
        norms = [float(r.split(",")[1]) for r in out.strip().splitlines()[1:]]
        assert np.all(np.diff(norms) > 0)

    def test_lp_min_oracle(self, capsys):
        code, out, _ = run(capsys, "lp-min", "--problem", "hadamard-4x4", "--p", "3", "--oracle")
        res = json.loads(out)
        assert code == 0 and res["oracle_gap"] <= 1e-6

    def test_lp_min_csv_inputs(self, capsys, tmp_path):
        (tmp_path / "S.csv").write_text("2,1\n1,2\n")
        code, out, _ = run(capsys, "lp-min", "--S", str(tmp_path / "S.csv"), "--J", "1", "--s", "1", "--p", "4",
                           "--format", "csv")
        assert code == 0 and out.startswith("field,value\n")

    def test_interp_hardy(self, capsys):
        code, out, _ = run(capsys, "interp-hardy", "--nodes", "0.5,-0.3333333333333333,0.25i", "--values", "1,0.9,0.8",
                           "--p", "3")
        res = json.loads(out)
        assert code == 0 and res["certificate"] <= 1e-6 and len(res["blaschke_zeros"]) == 1

    def test_even_p_certified(self, capsys):
        code, out, _ = run(capsys, "even-p", "--space", "bergman-ball", "--n", "2", "--p", "4",
                           "--nodes", "0.25,0.75;0,0", "--values", "1,0.98")
        res = json.loads(out)
        assert code == 0 and res["certificate_method"] == "triangle"

    def test_even_p_certificate_failure(self, capsys):
        code, out, err = run(capsys, "even-p", "--space", "hardy-disk", "--p", "4",
                             "--nodes", "0.5,-0.3333333333333333,0.25i", "--values", "1,0.9,0.8")
        assert code == 3 and "certificate" in err
        assert json.loads(out)["zero_free"] is False

    def test_tde_synthetic(self, capsys):
        code, out, _ = run(capsys, "tde", "--synthetic", "--seed", "7", "--N", "2001", "--D", "5", "--M", "10",
                           "--noise", "10", "--p", "1.01")
        res = json.loads(out)
        assert code == 0 and round(res["D_opt"]) == 5
        assert {"D_opt", "h_opt", "objective", "rank"} <= set(res)

    def test_tde_files(self, capsys, tmp_path):
        from sipinterp.tde import synthetic_signals

        x1, x2 = synthetic_signals(80, 2, 1.0, 0.0, seed=1)
        (tmp_path / "a.csv").write_text("\n".join(repr(float(v)) for v in x1))
        (tmp_path / "b.csv").write_text("\n".join(repr(float(v)) for v in x2))
        code, out, _ = run(capsys, "tde", "--x1", str(tmp_path / "a.csv"), "--x2", str(tmp_path / "b.csv"), "--M", "3",
                           "--oracle")
        assert code == 0 and json.loads(out)["D_opt"] == pytest.approx(2)


class TestExitCodes:
    def test_input_errors(self, capsys):
        assert run(capsys, "interp-single", "--space", "hardy-disk", "--p", "2", "--node", "1.5", "--value", "1")[0] == 1
        assert run(capsys, "lp-min", "--problem", "/nonexistent.json")[0] == 1
        assert run(capsys, "lp-min")[0] == 1
        assert run(capsys, "tde", "--M", "3")[0] == 1
        assert run(capsys, "sweep-p", "--problem", "hadamard-4x4", "--pmin", "0.5", "--pmax", "2")[0] == 1

    def test_non_convergence(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise ConvergenceError("stalled", last_p=1.3)

        monkeypatch.setattr(lpspace, "solve", boom)
        code, _, err = run(capsys, "lp-min", "--problem", "hadamard-4x4", "--p", "1.1")
        assert code == 2 and "did not converge" in err

    def test_log_level_env(self, capsys, monkeypatch):
        monkeypatch.setenv("SIP_INTERP_LOG", "debug")
        assert run(capsys, "interp-single", "--space", "hardy-disk", "--p", "2", "--node", "0", "--value", "1")[0] == 0

    def test_help_documents_complex_format(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["--help"])
        assert "a+bi" in capsys.readouterr().out
