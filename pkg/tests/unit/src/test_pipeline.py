import json
import tempfile
import unittest
from pathlib import Path

from src.core.session import REPO_ROOT, load_config
from src.pipeline import (
    EXIT_INPUT_ERROR,
    EXIT_PASS,
    RunConfig,
    ShearForgePipeline,
    build_parser,
    run,
)

EXAMPLE_PROBLEM = REPO_ROOT / "templates" / "example_problem.json"
EXAMPLE_MATRIX = REPO_ROOT / "templates" / "example_matrix.json"


class TestRunConfig(unittest.TestCase):
    def test_no_flags_no_overrides(self):
        self.assertEqual(RunConfig("interp", "in.json", "out.json").overrides(), {})

    def test_flags_map_to_config_paths(self):
        rc = RunConfig("interp", "in.json", "out.json", mode="exact", precision_bits=192, seed=5, tol=1e-9)
        self.assertEqual(rc.overrides(), {
            "arithmetic": {"mode": "exact", "precision_bits": 192},
            "seed": 5,
            "verify": {"tol": 1e-9},
        })


class TestParser(unittest.TestCase):
    def test_interp(self):
        args = build_parser().parse_args(["interp", "p.json", "--out", "w.json", "--mode", "exact", "--seed", "3"])
        self.assertEqual(args.subcommand, "interp")
        self.assertEqual(args.mode, "exact")
        self.assertEqual(args.seed, 3)
        self.assertFalse(args.volume)

    def test_verify_requires_problem(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["verify", "w.json", "--out", "r.json"])

    def test_verbose_and_quiet_exclusive(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["factor", "m.json", "--out", "f.json", "--verbose", "--quiet"])


class TestLoadProblem(unittest.TestCase):
    def setUp(self):
        self.pipeline = ShearForgePipeline(load_config(overrides={"arithmetic": {"mode": "exact"}}, environ={}))
        with open(EXAMPLE_PROBLEM) as f:
            self.data = json.load(f)

    def test_example(self):
        spec = self.pipeline.load_problem(self.data)
        self.assertEqual(spec.n, 2)
        self.assertEqual(len(spec.targets), 1)
        self.assertEqual(spec.fix_order, 3)
        self.assertFalse(spec.volume_preserving)

    def test_volume_flag(self):
        spec = self.pipeline.load_problem(self.data, volume=True)
        self.assertTrue(spec.volume_preserving)

    def test_schema_error_names_field(self):
        del self.data["targets"][0]["order"]
        with self.assertRaises(ValueError) as ctx:
            self.pipeline.load_problem(self.data)
        self.assertIn("order", str(ctx.exception))


class TestRun(unittest.TestCase):
    def test_factor_exact(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "factors.json"
            code = run(RunConfig("factor", str(EXAMPLE_MATRIX), str(out), mode="exact"))
            self.assertEqual(code, EXIT_PASS)
            with open(out) as f:
                data = json.load(f)
            self.assertEqual(data["n"], 2)
            self.assertTrue(data["transvections"])
            self.assertIn("0-based", data["convention"])
            self.assertTrue((Path(tmp) / "factors.report.json").is_file())
            self.assertTrue((Path(tmp) / "factors.manifest.json").is_file())

    def test_missing_input(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = run(RunConfig("interp", str(Path(tmp) / "nope.json"), str(Path(tmp) / "w.json")))
            self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_unknown_subcommand(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = run(RunConfig("bogus", str(EXAMPLE_PROBLEM), str(Path(tmp) / "w.json")))
            self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_verify_without_problem(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = run(RunConfig("verify", str(EXAMPLE_PROBLEM), str(Path(tmp) / "r.json")))
            self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_low_precision_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = run(RunConfig("interp", str(EXAMPLE_PROBLEM), str(Path(tmp) / "w.json"), precision_bits=32))
            self.assertEqual(code, EXIT_INPUT_ERROR)


if __name__ == '__main__':
    unittest.main()
