import io
import json
import math
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest.mock import patch

import numpy as np

from spinlab.constants import DISPLAY_ORDER_3SPIN
from spinlab.gates import EFFECTIVE_GATE
from spinlab.labcli import main, run

MEDIATOR_ONE_BLOCK = np.array([[-1, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def invoke(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(list(argv))
    return code, out.getvalue(), err.getvalue()


def as_complex(pairs: list) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


class CliTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def write_spec(self, name: str, data: dict | str) -> str:
        path = self.dir / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)


class TestGate(CliTestCase):
    def test_json(self) -> None:
        code, out, _ = invoke("gate", "--n", "3", "--omega", "1", "--t", "tau", "--format", "json")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertEqual(record["basis_order"], list(DISPLAY_ORDER_3SPIN))
        expected = np.zeros((8, 8), dtype=complex)
        expected[:4, :4] = EFFECTIVE_GATE
        expected[4:, 4:] = MEDIATOR_ONE_BLOCK
        np.testing.assert_allclose(as_complex(record["unitary"]), expected, atol=1e-10)
        report = record["report"]
        self.assertTrue(report["invariant"])
        self.assertLessEqual(report["decomposition_residual"], 1e-10)
        np.testing.assert_allclose(as_complex(report["effective_gate"]), EFFECTIVE_GATE, atol=1e-10)

    def test_pretty(self) -> None:
        code, out, _ = invoke("gate")
        self.assertEqual(code, 0)
        self.assertIn("effective gate", out)
        self.assertIn("101", out)

    def test_byte_identical(self) -> None:
        first = invoke("gate", "--t", "tau/2", "--format", "json")
        second = invoke("gate", "--t", "tau/2", "--format", "json")
        self.assertEqual(first[1], second[1])

    def test_leakage_is_a_numerical_failure(self) -> None:
        code, out, err = invoke("gate", "--lambda", "0.5", "--format", "json")
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("not invariant", err)

    def test_allow_leakage(self) -> None:
        code, out, _ = invoke("gate", "--lambda", "0.5", "--allow-leakage", "--format", "json")
        self.assertEqual(code, 0)
        self.assertFalse(json.loads(out)["report"]["invariant"])

    def test_csv_rejected(self) -> None:
        code, out, err = invoke("gate", "--format", "csv")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("csv", err)

    def test_bad_time(self) -> None:
        self.assertEqual(invoke("gate", "--t", "soon")[0], 2)


class TestInputErrors(CliTestCase):
    def test_unknown_flag(self) -> None:
        self.assertEqual(invoke("gate", "--frobnicate")[0], 2)

    def test_unknown_command(self) -> None:
        self.assertEqual(invoke("teleport")[0], 2)

    def test_malformed_spec(self) -> None:
        bad_json = self.write_spec("bad.json", "{not json")
        self.assertEqual(invoke("scan", "--spec", bad_json)[0], 2)
        wrong_length = self.write_spec("short.json", {"n_spins": 4, "couplings": [1.0, 1.0]})
        code, _, err = invoke("scan", "--spec", wrong_length)
        self.assertEqual(code, 2)
        self.assertIn("Error", err)

    def test_empty_window(self) -> None:
        self.assertEqual(invoke("scan", "--t-min", "5", "--t-max", "5")[0], 2)

    def test_short_asymptotic_chain(self) -> None:
        self.assertEqual(invoke("asymptotics", "--n", "10")[0], 2)

    def test_help(self) -> None:
        code, out, _ = invoke("--help")
        self.assertEqual(code, 0)
        self.assertIn("tune-field", out)

    def test_console_script(self) -> None:
        setup_py = Path(__file__).resolve().parents[3] / "setup.py"
        self.assertIn('"spinlab=spinlab.labcli:main"', setup_py.read_text())
        err = io.StringIO()
        with patch.object(sys, "argv", ["spinlab", "asymptotics", "--n", "10"]), redirect_stderr(err):
            with self.assertRaises(SystemExit) as ctx:
                main()
        self.assertEqual(ctx.exception.code, 2)
        self.assertIn("Error", err.getvalue())


class TestScan(CliTestCase):
    def test_csv_curve(self) -> None:
        spec = self.write_spec("chain4.json", {"n_spins": 4, "model": "xy", "couplings": [1, 1, 1], "fields": [0, 0, 0, 0]})
        code, out, _ = invoke("scan", "--spec", spec, "--t-max", "100", "--samples", "10000", "--format", "csv")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "t,f,F")
        self.assertEqual(len(lines), 10001)
        self.assertTrue(lines[1].startswith("0,"))
        self.assertLess(float(lines[1].split(",")[1]), 1e-12)
        t, f, big_f = (float(x) for x in lines[-1].split(","))
        self.assertEqual(t, 100.0)
        self.assertAlmostEqual(big_f, 0.5 + f / 3 + f**2 / 6, places=10)
        self.assertNotIn(";", out)

    def test_json_peak(self) -> None:
        code, out, _ = invoke("scan", "--n", "2", "--t-max", "3", "--format", "json")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertAlmostEqual(record["peak"]["t_star"], math.pi / 2, delta=1e-6)
        self.assertEqual(len(record["curve"]["times"]), 301)

    def test_field_flag(self) -> None:
        code, out, _ = invoke("scan", "--n", "4", "--b-field", "0.625", "--t-max", "20", "--format", "json")
        self.assertEqual(code, 0)
        peak = json.loads(out)["peak"]
        self.assertAlmostEqual(peak["F_star"], 0.99991, delta=1e-4)

    def test_output_file(self) -> None:
        target = self.dir / "curve.csv"
        code, out, _ = invoke("scan", "--n", "3", "--t-max", "1", "--format", "csv", "--output", str(target))
        self.assertEqual(code, 0)
        self.assertEqual(out, "")
        self.assertTrue(target.read_text(encoding="utf-8").startswith("t,f,F\n"))


class TestCommands(CliTestCase):
    def test_design_verify(self) -> None:
        code, out, _ = invoke("design", "--n", "9", "--lambda", "1", "--verify", "--format", "json")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertGreaterEqual(record["verification"]["amplitude"], 1 - 1e-10)
        self.assertEqual(record["spec"]["n_spins"], 9)
        self.assertEqual(len(record["spec"]["couplings"]), 8)

    def test_exchange(self) -> None:
        code, out, _ = invoke("exchange", "--a", "1", "--b", "0", "--shots", "20", "--seed", "3", "--format", "json")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertEqual((record["alice_reads"], record["bob_reads"]), (0, 1))
        self.assertEqual(record["samples"], {"01": 20})

    def test_transfer(self) -> None:
        code, out, _ = invoke("transfer", "--theta", "1.1", "--phi", "0.4", "--format", "json")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(out)["figure_of_merit"], 1.0, delta=1e-10)

    def test_unequal_couplings_rejected(self) -> None:
        spec = self.write_spec("lopsided.json", {"n_spins": 3, "model": "xy", "couplings": [1.0, 0.5], "fields": [0, 0, 0]})
        code, out, err = invoke("transfer", "--spec", spec, "--format", "json")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("omega = lambda", err)

    def test_repeated_ebits_csv(self) -> None:
        code, out, _ = invoke("ebit", "--mode", "repeated", "--rounds", "3", "--format", "csv")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "round,t,fidelity,mediator_purity")
        self.assertEqual(len(lines), 4)

    def test_wstate(self) -> None:
        code, out, _ = invoke("wstate", "--format", "json")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(out)["figure_of_merit"], 1.0, delta=1e-10)

    def test_network(self) -> None:
        code, out, _ = invoke("network", "--branches", "1,2,2", "--format", "json")
        self.assertEqual(code, 0)
        record = json.loads(out)
        self.assertAlmostEqual(record["collective_coupling"], 3.0, places=12)
        self.assertFalse(record["report"]["invariant"])
        self.assertEqual(invoke("network", "--branches", "1,2,2", "--strict")[0], 1)

    def test_tune_field(self) -> None:
        code, out, _ = invoke("tune-field", "--b-grid", "0,0.625", "--format", "csv")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "B,t_star,f_star,F_star,best")
        self.assertTrue(lines[2].startswith("0.625,"))
        self.assertTrue(lines[2].endswith(",True"))

    def test_compare(self) -> None:
        code, out, _ = invoke("compare", "--n-min", "2", "--n-max", "3", "--t-max", "10", "--format", "json")
        self.assertEqual(code, 0)
        rows = json.loads(out)
        self.assertEqual([row["n_spins"] for row in rows], [2, 3])
        self.assertAlmostEqual(rows[1]["f_max_xy"], 1.0, delta=1e-8)

    def test_asymptotics(self) -> None:
        code, out, _ = invoke("asymptotics", "--n", "501", "--format", "json")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(json.loads(out)["f_est"], 0.3399, delta=1e-4)

    def test_log_level(self) -> None:
        code, _, err = invoke("--log-level", "info", "design", "--n", "5", "--verify", "--format", "json")
        self.assertEqual(code, 0)
        self.assertIn("INFO", err)


if __name__ == "__main__":
    unittest.main()
