"""
shearForge Command Line
=======================
Front end over the engine and the verifier.

Subcommands:
- interp   ProblemSpec JSON -> AutoWord certificate + Report
- verify   AutoWord + ProblemSpec -> Report
- factor   constant matrix (SL_n) or 2x2 polynomial matrix (SL_2 over C[x])
           -> transvection list with block grouping + multiply-back Report

Exit codes: 0 all requirements pass, 1 verification failure,
2 input or contract error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from src.core.logger import setup_logging
from src.core.session import REPO_ROOT, RunSession, load_config
from src.engine.interpolate import solve_problem
from src.engine.problem import ProblemSpec, load_schema, validate_against_schema, validate_problem
from src.jets.linalg import mat_sub, matrix_from_json, mat_max_abs
from src.jets.unipoly import describe_ring, make_ring
from src.linear.transvections import (
    group_blocks,
    multiply_transvections,
    sl2_polyring_to_transvections,
    sln_to_transvections,
)
from src.shears.word import AutoWord
from src.verify.oracle import crosscheck_numeric, verify_word
from src.verify.report import Report

logger = logging.getLogger("shearForge.pipeline")

EXIT_PASS = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2

TRANSVECTION_CONVENTION = "T(row, col, a) = I + a*E[row][col], 0-based; product taken left to right"


@dataclass
class RunConfig:
    """One CLI invocation after argument parsing."""
    subcommand: str
    input: str
    output: str
    problem: Optional[str] = None
    mode: Optional[str] = None
    precision_bits: Optional[int] = None
    seed: Optional[int] = None
    tol: Optional[float] = None
    volume: bool = False
    param: Optional[str] = None
    config_path: Optional[str] = None

    def overrides(self) -> Dict:
        """Settings given explicitly on the command line."""
        out: Dict[str, Any] = {}
        arithmetic = {}
        if self.mode is not None:
            arithmetic["mode"] = self.mode
        if self.precision_bits is not None:
            arithmetic["precision_bits"] = self.precision_bits
        if arithmetic:
            out["arithmetic"] = arithmetic
        if self.seed is not None:
            out["seed"] = self.seed
        if self.tol is not None:
            out["verify"] = {"tol": self.tol}
        return out


def _schema_path(config: Dict, key: str, default: str) -> str:
    path = config.get("paths", {}).get(key) or default
    p = Path(path)
    return str(p if p.is_absolute() else REPO_ROOT / p)


def _check_schema(data: Any, config: Dict, key: str, default: str) -> None:
    errors = validate_against_schema(data, load_schema(_schema_path(config, key, default)))
    if errors:
        raise ValueError("schema validation failed: " + "; ".join(errors))


class ShearForgePipeline:
    """
    Runs one subcommand against a resolved configuration.

    Every method returns the process exit code; contract errors propagate as
    exceptions and are mapped in `run`.
    """

    def __init__(self, config: Dict):
        self.config = config
        arithmetic = config.get("arithmetic", {})
        self.mode = arithmetic.get("mode", "float")
        self.precision_bits = int(arithmetic.get("precision_bits", 128))
        self.tolerance = arithmetic.get("tolerance")
        self.seed = int(config.get("seed", 0))
        verify_cfg = config.get("verify", {})
        self.verify_tol = verify_cfg.get("tol")
        self.grid_resolution = int(verify_cfg.get("grid_resolution", 17))
        self.max_grid_points = verify_cfg.get("max_grid_points")
        self.crosscheck = bool(verify_cfg.get("crosscheck", False))
        self.fd_safety = float(verify_cfg.get("fd_safety", 4.0))
        self.fd_max_order = int(verify_cfg.get("fd_max_order", 2))

    def _ring(self, param: Optional[str]):
        return make_ring(self.mode, self.precision_bits, self.tolerance, param)

    # ------------------------------------------------------------------
    # Problem loading
    # ------------------------------------------------------------------

    def load_problem(self, data: Dict, ring=None, param: Optional[str] = None,
                     volume: bool = False) -> ProblemSpec:
        """
        Validate and parse a ProblemSpec document.

        Raises:
            ValueError: schema errors (with JSON paths) or violated invariants
        """
        errors = validate_problem(data, _schema_path(self.config, "problem_schema",
                                                     "templates/problem_spec.schema.json"))
        if errors:
            raise ValueError("problem schema validation failed: " + "; ".join(errors))
        if ring is None:
            ring = self._ring(param or data.get("param"))
        spec = ProblemSpec.from_dict(data, ring)
        if volume:
            spec.volume_preserving = True
        if spec.fix_order is None and self.config.get("engine", {}).get("fix_order") is not None:
            spec.fix_order = int(self.config["engine"]["fix_order"])
        spec.check()
        logger.info("Problem: n=%d, %d target(s), %d fix point(s), %d axis point(s), mode=%s",
                    spec.n, len(spec.targets), len(spec.fix_points), len(spec.axis_points),
                    describe_ring(ring)["mode"])
        return spec

    def _verify(self, word: AutoWord, spec: ProblemSpec) -> Report:
        report = verify_word(word, spec, tol=self.verify_tol, grid_resolution=self.grid_resolution,
                             max_grid_points=self.max_grid_points, seed=self.seed)
        if self.crosscheck and word.ring.is_field and not word.ring.exact:
            for j, t in enumerate(spec.targets):
                report.merge(crosscheck_numeric(word, t.anchor, min(self.fd_max_order, t.order),
                                                safety=self.fd_safety), tag=f"crosscheck[{j}]")
        return report

    def _write_report(self, session: RunSession, report: Report, main: bool = False) -> None:
        path = session.out_path if main else session.sibling(".report.json")
        csv_path = path.with_suffix(".csv")
        report.write(str(path), str(csv_path))
        session.register(path)
        session.register(csv_path)

    # ------------------------------------------------------------------
    # Subcommands
    # ------------------------------------------------------------------

    def interp(self, run: RunConfig, session: RunSession) -> int:
        data = session.load_input(run.input)
        spec = self.load_problem(data, param=run.param, volume=run.volume)
        word = solve_problem(spec, self.config, self.seed)
        session.write_json(word.to_dict())
        report = self._verify(word, spec)
        self._write_report(session, report)
        return EXIT_PASS if report.passed else EXIT_VERIFY_FAILED

    def verify(self, run: RunConfig, session: RunSession) -> int:
        if not run.problem:
            raise ValueError("verify needs --problem <ProblemSpec JSON>")
        word_data = session.load_input(run.input)
        _check_schema(word_data, self.config, "word_schema", "templates/auto_word.schema.json")
        word = AutoWord.from_dict(word_data)
        problem_data = session.load_input(run.problem)
        spec = self.load_problem(problem_data, ring=word.ring, volume=run.volume)
        report = self._verify(word, spec)
        self._write_report(session, report, main=True)
        return EXIT_PASS if report.passed else EXIT_VERIFY_FAILED

    def factor(self, run: RunConfig, session: RunSession) -> int:
        data = session.load_input(run.input)
        _check_schema(data, self.config, "matrix_schema", "templates/matrix.schema.json")
        param = run.param or data.get("param")
        ring = self._ring(param)
        matrix = matrix_from_json(data["matrix"], ring)
        n = len(matrix)
        if any(len(row) != n for row in matrix):
            raise ValueError(f"matrix: expected a square matrix, got {n} rows of lengths "
                             f"{[len(row) for row in matrix]}")
        if ring.is_field:
            ts = sln_to_transvections(matrix, ring)
        else:
            ts = sl2_polyring_to_transvections(matrix, ring)
        back = multiply_transvections(ts, n, ring)
        residual = _matrix_residual(back, matrix, ring)
        report = Report(seeds={"verify": self.seed}, arithmetic=describe_ring(ring))
        tol = self.verify_tol if self.verify_tol is not None else (0.0 if ring.exact else float(ring.tol))
        report.add("multiply_back", residual, tol, {"transvections": len(ts)})
        session.write_json({
            "n": n,
            "arithmetic": describe_ring(ring),
            "convention": TRANSVECTION_CONVENTION,
            "transvections": [t.to_dict(ring) for t in ts],
            "blocks": group_blocks(ts),
        })
        self._write_report(session, report)
        return EXIT_PASS if report.passed else EXIT_VERIFY_FAILED


def _matrix_residual(a, b, ring) -> float:
    diff = mat_sub(a, b)
    if ring.is_field:
        return mat_max_abs(diff, ring)
    field = ring.base
    return max((float(field.abs(c)) for row in diff for x in row for c in x.coeffs), default=0.0)


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------


def run(run_config: RunConfig) -> int:
    """Execute one subcommand and map every outcome to an exit code."""
    try:
        config = load_config(run_config.config_path, run_config.overrides())
        session = RunSession(run_config.output, config)
        pipeline = ShearForgePipeline(config)
        handler = {"interp": pipeline.interp, "verify": pipeline.verify, "factor": pipeline.factor}
        if run_config.subcommand not in handler:
            raise ValueError(f"unknown subcommand '{run_config.subcommand}'")
        code = handler[run_config.subcommand](run_config, session)
        session.save_manifest(run_config.subcommand, code)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        print(f"error: {path}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    print("=" * 60)
    print(f"shearForge {run_config.subcommand}: {'PASS' if code == EXIT_PASS else 'FAIL'}")
    print(f"  output: {run_config.output}")
    print("=" * 60)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearforge",
        description="shearForge: shear and overshear words realizing prescribed jets")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="Output JSON path")
    common.add_argument("--mode", choices=["exact", "float"], help="Arithmetic mode")
    common.add_argument("--precision-bits", type=int, help="Mantissa bits in float mode (>= 64)")
    common.add_argument("--seed", type=int, help="Sampling seed")
    common.add_argument("--tol", type=float, help="Verification tolerance")
    common.add_argument("--volume", action="store_true", help="Require a volume-preserving word")
    common.add_argument("--param", choices=["poly1"], help="One-parameter polynomial family track")
    common.add_argument("--config", help="Configuration JSON merged over config/defaults.json")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings only")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    interp = sub.add_parser("interp", parents=[common], help="Build a word for a ProblemSpec")
    interp.add_argument("input", help="ProblemSpec JSON")
    verify = sub.add_parser("verify", parents=[common], help="Verify an AutoWord against a ProblemSpec")
    verify.add_argument("input", help="AutoWord JSON")
    verify.add_argument("--problem", required=True, help="ProblemSpec JSON")
    factor = sub.add_parser("factor", parents=[common], help="Factor a matrix into transvections")
    factor.add_argument("input", help="Matrix JSON")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else (logging.WARNING if args.quiet else logging.INFO)
    setup_logging(level)
    run_config = RunConfig(
        subcommand=args.subcommand,
        input=args.input,
        output=args.out,
        problem=getattr(args, "problem", None),
        mode=args.mode,
        precision_bits=args.precision_bits,
        seed=args.seed,
        tol=args.tol,
        volume=args.volume,
        param=args.param,
        config_path=args.config,
    )
    return run(run_config)


if __name__ == "__main__":
    sys.exit(main())
