import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO

import numpy as np
import simplejson as json

from synaptic import serialize
from synaptic.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from synaptic.golden import r3_pair


class TestCli(unittest.TestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = tmp.name
        p, e = r3_pair()
        self.pair = self.write("pair.json", serialize.pair_to_dict(p, e))

    def write(self, name, data):
        filename = os.path.join(self.dir, name)
        serialize.dump(data, filename)
        return filename

    def run_cli(self, *argv):
        out, err = StringIO(), StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_example(self):
        code, out, _ = self.run_cli("example")
        self.assertEqual(code, EXIT_OK)
        lines = out.splitlines()
        self.assertIn("[p,e] = 1", lines)
        self.assertIn("rank(b°) = 2", lines)
        self.assertIn("α = 0.5", lines)
        self.assertEqual(lines[-1], "golden values match")

    def test_example_golden_mismatch(self):
        golden = self.write("golden.json", {"alpha": 0.25})
        code, out, _ = self.run_cli("example", "--golden", golden)
        self.assertEqual(code, EXIT_FAILED)
        self.assertIn("golden mismatch alpha", out)

    def test_decompose_json(self):
        code, out, _ = self.run_cli("decompose", "--input", self.pair,
                                    "--output", "json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["dim"], 3)
        self.assertEqual(data["ranks"]["b"], 2)
        self.assertLess(data["residuals"]["reconstruction"], 1e-10)
        p, e = r3_pair()
        rebuilt = (np.array(data["c"]) @ np.array(data["c"]) @ p.entries
                   + np.array(data["b"]) @ np.array(data["k"])
                   + np.array(data["s"]) @ np.array(data["s"]) @ p.perp.entries)
        np.testing.assert_allclose(rebuilt, e.entries, atol=1e-10)

    def test_command_line_tolerance_beats_file(self):
        pair = self.write("loose.json", {
            "p": np.diag([1., 1e-6, 0.]).tolist(),
            "e": np.diag([0.25, 0.5, 0.75]).tolist(),
            "tol": {"rank_eps": 1e-9}})
        code, _, err = self.run_cli("spectral", "--input", pair)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("neither 0 nor 1", err)
        code, _, _ = self.run_cli("spectral", "--input", pair,
                                  "--tol-rank", "1e-5")
        self.assertEqual(code, EXIT_OK)

    def test_commutator(self):
        code, out, _ = self.run_cli("commutator", "--input", self.pair)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("[p,e] = 1\n"))
        code, out, _ = self.run_cli("commutator", "--input", self.pair,
                                    "--output", "json")
        data = json.loads(out)
        self.assertEqual(data["rank"], 3)
        self.assertTrue(data["totally_noncompatible"])
        self.assertFalse(data["generic_position"])

    def test_infimum(self):
        code, out, _ = self.run_cli("infimum", "--input", self.pair,
                                    "--output", "json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertAlmostEqual(data["trace"], 11 / 12)
        self.assertAlmostEqual(data["alpha"], 0.5)
        q = self.write("q.json", {"q": np.eye(3).tolist()})
        code, out, _ = self.run_cli("infimum", "--input", self.pair,
                                    "--q", q, "--output", "json")
        data = json.loads(out)
        self.assertAlmostEqual(data["trace"], 1.5)
        self.assertNotIn("alpha", data)

    def test_spectral(self):
        code, out, _ = self.run_cli("spectral", "--input", self.pair,
                                    "--output", "json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        np.testing.assert_allclose(data["thresholds"], [0.25, 0.5, 0.75],
                                   atol=1e-12)
        self.assertEqual(data["ranks"], [1, 2, 3])

    def test_invalid_input(self):
        bad = self.write("bad.json", {"p": np.diag([0.5, 1.]).tolist(),
                                      "e": np.eye(2).tolist()})
        code, out, err = self.run_cli("decompose", "--input", bad)
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(out, "")
        self.assertIn("projection", err)
        code, _, _ = self.run_cli("decompose", "--input",
                                  os.path.join(self.dir, "missing.json"))
        self.assertEqual(code, EXIT_USAGE)

    def test_usage_errors(self):
        self.assertEqual(self.run_cli("verify", "--trials", "0")[0], EXIT_USAGE)
        self.assertEqual(self.run_cli("verify", "--check", "nonexistent")[0],
                         EXIT_USAGE)
        self.assertEqual(self.run_cli("verify", "--dims", "5..2")[0],
                         EXIT_USAGE)
        self.assertEqual(self.run_cli("decompose")[0], EXIT_USAGE)
        self.assertEqual(self.run_cli("decompose", "--input", self.pair,
                                      "--tol-rank", "-1")[0], EXIT_USAGE)

    def test_verify(self):
        report = os.path.join(self.dir, "report.json")
        code, out, _ = self.run_cli(
            "verify", "--seed", "2", "--trials", "4", "--dims", "2..3",
            "--check", "cbs.reconstruction", "--report", report)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("4 checks, 0 failed", out)
        data = serialize.load(report)
        self.assertEqual(data["total_checks"], 4)
        self.assertEqual(data["failures"], [])

    def test_verify_by_statement_label(self):
        code, out, _ = self.run_cli(
            "verify", "--seed", "42", "--trials", "3", "--dims", "2..4",
            "--check", "th:commutatorineq", "--output", "json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(list(data["checks"]), ["commutator.chain"])
        self.assertEqual(data["statements"],
                         {"th:commutatorineq": {"passed": 3, "failed": 0}})
        self.assertEqual(self.run_cli("verify", "--check", "th:nonexistent")[0],
                         EXIT_USAGE)

    def test_list_checks(self):
        code, out, _ = self.run_cli("verify", "--list-checks")
        self.assertEqual(code, EXIT_OK)
        lines = out.splitlines()
        self.assertIn("cbs.reconstruction  th:bProps, th:CBSdecomp", lines)
        self.assertIn("eigen.reconstruction", lines)

    def test_replay(self):
        p, e = r3_pair()
        record = serialize.pair_to_dict(p, e, check="cbs.reconstruction",
                                        seed=0, trial=0)
        single = self.write("failure.json", record)
        code, out, _ = self.run_cli("verify", "--input", single)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("cbs.reconstruction: passed"))
        report = self.write("report.json", {"failures": [record, record]})
        code, out, _ = self.run_cli("verify", "--input", report,
                                    "--output", "json")
        self.assertEqual(len(json.loads(out)["replayed"]), 2)
        code, _, err = self.run_cli("verify", "--input", self.pair)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("replayed", err)


if __name__ == "__main__":
    unittest.main()
