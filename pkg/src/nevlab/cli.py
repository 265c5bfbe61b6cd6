"""Configuration-driven command line: scenario runs, batch verification,
expression evaluation, Wronskian and zero queries.

Scenario files are INI format; see the bundled scenarios under
``nevlab/scenarios`` and the README for the schema.  All artifacts are
deterministic: fixed key order in JSON, 12-significant-digit CSV, LF endings.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from .exprlang import ExprError, ParseError, parse, to_meromorphic
from .geometry import (
    DivisorSpec,
    GeometryError,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TorusCurve,
)
from .growth import GrowthError, QuadratureError, jensen_residual
from .jets import CurveMap, JetsError, wronskian
from .rootcount import (
    Disc,
    RootCountError,
    WindingConvergenceError,
    locate_zeros,
)
from .smt import (
    DegeneracyUnresolvedError,
    HypothesisError,
    SmtError,
    check_cartan,
    check_general,
    check_smt7,
    degeneracy_probe,
)

EXIT_PASS = 0
EXIT_HYPOTHESIS = 1
EXIT_FAIL = 2
EXIT_PARSE = 3
EXIT_NONCONVERGENCE = 4


class ScenarioError(Exception):
    """Configuration-level problem (maps to exit 3)."""


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _error_payload(exc: Exception, exit_code: int) -> dict:
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code,
    }
    if isinstance(exc, ParseError) and exc.offset is not None:
        payload["offset"] = exc.offset
    if isinstance(exc, HypothesisError):
        payload["hypothesis"] = exc.name
        payload.update(exc.extra)
    return payload


def _classify(exc: Exception) -> int:
    if isinstance(exc, (ParseError, ScenarioError, configparser.Error)):
        return EXIT_PARSE
    if isinstance(exc, (QuadratureError, WindingConvergenceError)):
        return EXIT_NONCONVERGENCE
    if isinstance(
        exc,
        (
            HypothesisError,
            DegeneracyUnresolvedError,
            SmtError,
            JetsError,
            GeometryError,
            ExprError,
            RootCountError,
            GrowthError,
        ),
    ):
        return EXIT_HYPOTHESIS
    raise exc


# ---------------------------------------------------------------------------
# Scenario parsing


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace("i", "j"))
    except ValueError as exc:
        raise ScenarioError(f"bad complex literal {text!r}") from exc


def _parse_grid(cfg) -> list:
    if not cfg.has_section("grid"):
        raise ScenarioError("missing [grid] section")
    g = cfg["grid"]
    lo = float(g.get("min", "5"))
    hi = float(g.get("max", "40"))
    count = int(g.get("count", "16"))
    spacing = g.get("spacing", "log").strip()
    if lo < 1:
        raise ScenarioError("grid min must be >= 1")
    if count < 8:
        raise ScenarioError("grid count must be >= 8")
    if spacing == "log":
        return [float(x) for x in np.geomspace(lo, hi, count)]
    if spacing == "linear":
        return [float(x) for x in np.linspace(lo, hi, count)]
    raise ScenarioError(f"unknown grid spacing {spacing!r}")


def _parse_curve(cfg) -> CurveMap:
    if not cfg.has_section("curve"):
        raise ScenarioError("missing [curve] section")
    c = cfg["curve"]
    target = c.get("target", "").strip().lower()
    if target in ("p1xp1", "p1*p1"):
        if "f" not in c or "g" not in c:
            raise ScenarioError("product-target curve needs F and G expressions")
        F = to_meromorphic(parse(c["f"]))
        G = to_meromorphic(parse(c["g"]))
        return CurveMap(P1xP1Flat(), (F, G))
    if target.startswith("p") and target[1:].isdigit():
        n = int(target[1:])
        comps = [s.strip() for s in c.get("components", "").split(";") if s.strip()]
        if len(comps) != n + 1:
            raise ScenarioError(f"target {target} needs {n + 1} homogeneous components")
        return CurveMap(ProjectiveFS(n), tuple(parse(s) for s in comps))
    raise ScenarioError(f"unknown target {target!r}")


def _parse_divisor(cfg, curve: CurveMap) -> DivisorSpec:
    if not cfg.has_section("divisor"):
        raise ScenarioError("missing [divisor] section")
    comps = []
    for key, value in cfg["divisor"].items():
        if key.startswith("hyperplane"):
            coeffs = tuple(_parse_complex(s) for s in value.split(","))
            comps.append(Hyperplane(coeffs))
        elif key.startswith("torus"):
            parts = [s.strip() for s in value.split(",")]
            if len(parts) != 3:
                raise ScenarioError(f"torus component needs m,n,c: {value!r}")
            comps.append(
                TorusCurve(int(parts[0]), int(parts[1]), _parse_complex(parts[2]))
            )
        else:
            raise ScenarioError(f"unknown divisor key {key!r}")
    if not comps:
        raise ScenarioError("empty divisor")
    return DivisorSpec(curve.target, tuple(comps))


def _load_scenario(path: Path):
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read:
        raise ScenarioError(f"cannot read scenario file {path}")
    if not cfg.has_section("check"):
        raise ScenarioError("missing [check] section")
    return cfg


# ---------------------------------------------------------------------------
# Artifacts


def _zeros_csv(curve: CurveMap, divisors: DivisorSpec, rmax: float) -> str:
    from .growth import component_label
    from .smt import BOUNDARY, pullback_entire

    comps = list(divisors.components)
    if isinstance(curve.target, P1xP1Flat):
        comps = comps + list(BOUNDARY)
    lines = ["re,im,multiplicity,component"]
    for comp in comps:
        h = pullback_entire(curve, comp)
        zs = locate_zeros(h, Disc(0j, rmax * (1.0 + 1e-3)))
        for z, mult in zs.zeros:
            lines.append(
                f"{z.real:.12g},{z.imag:.12g},{mult},{component_label(comp)}"
            )
    return "\n".join(lines) + "\n"


def _plot_csv(report) -> str:
    lines = ["r,lhs,rhs,margin"]
    for r, l, v, m in zip(report.radii, report.lhs, report.rhs, report.margin):
        lines.append(f"{r:.12g},{l:.12g},{v:.12g},{m:.12g}")
    return "\n".join(lines) + "\n"


def _report_json(report, settings: dict) -> str:
    payload = json.loads(report.to_json())
    payload["settings"] = settings
    return _dump_json(payload)


def run_scenario(path, out_dir, eps_override=None, grid_override=None, threads=1) -> int:
    """Run a scenario file; write artifacts; return the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = _load_scenario(Path(path))
        theorem = cfg["check"].get("theorem", "").strip().lower()
        if theorem == "jensen":
            return _run_jensen(cfg, out)
        curve = _parse_curve(cfg)
        if theorem == "degeneracy":
            return _run_degeneracy(curve, out)
        grid = grid_override if grid_override is not None else _parse_grid(cfg)
        eps = (
            eps_override
            if eps_override is not None
            else float(cfg["check"].get("eps", "0.05"))
        )
        divisors = _parse_divisor(cfg, curve)
        # the thread count is deliberately not recorded: results are
        # identical for any value, and artifacts must be byte-identical
        settings = {
            "eps": eps,
            "grid": [float(r) for r in grid],
            "theorem": theorem,
        }
        if theorem == "cartan":
            hyps = [c for c in divisors.components if isinstance(c, Hyperplane)]
            report = check_cartan(curve, hyps, grid, eps)
        elif theorem == "thm1_1":
            report = check_general(curve, divisors, grid, eps)
        elif theorem == "smt7":
            report = check_smt7(curve, divisors, grid, eps)
        else:
            raise ScenarioError(f"unknown theorem {theorem!r}")
        _write(out / "growth.csv", report.table.to_csv())
        _write(out / "report.json", _report_json(report, settings))
        _write(out / "zeros.csv", _zeros_csv(curve, divisors, max(grid)))
        _write(out / "plot.csv", _plot_csv(report))
        return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code = _classify(exc)
        _write(out / "error.json", _dump_json(_error_payload(exc, code)))
        return code


def _run_degeneracy(curve: CurveMap, out: Path) -> int:
    from .smt import _degeneracy_extra

    verdict = degeneracy_probe(curve)
    if verdict.kind == "nondegenerate":
        _write(
            out / "report.json",
            _dump_json(
                {
                    "check": "degeneracy",
                    "verdict": "nondegenerate",
                    "evidence": verdict.evidence,
                }
            ),
        )
        return EXIT_PASS
    payload = _error_payload(
        HypothesisError("degeneracy", f"curve is degenerate ({verdict.kind})",
                        _degeneracy_extra(verdict)),
        EXIT_HYPOTHESIS,
    )
    _write(out / "error.json", _dump_json(payload))
    return EXIT_HYPOTHESIS


def _run_jensen(cfg, out: Path) -> int:
    if not cfg.has_section("jensen"):
        raise ScenarioError("jensen check needs a [jensen] section")
    sec = cfg["jensen"]
    exprs = [s.strip() for s in sec.get("functions", "").split(";") if s.strip()]
    radii = [float(s) for s in sec.get("radii", "10").split(",")]
    tol = float(sec.get("tolerance", "1e-5"))
    if not exprs:
        raise ScenarioError("jensen check needs at least one function")
    rows = []
    worst = 0.0
    for text in exprs:
        h = parse(text)
        for r in radii:
            res = jensen_residual(h, r)
            worst = max(worst, res)
            rows.append({"function": text, "r": r, "residual": res})
    verdict = "pass" if worst <= tol else "fail"
    _write(
        out / "report.json",
        _dump_json(
            {
                "check": "jensen",
                "rows": rows,
                "tolerance": tol,
                "worst": worst,
                "verdict": verdict,
            }
        ),
    )
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def verify_suite(corpus_dir, out_dir, threads=1) -> int:
    """Run every scenario in a directory; print one verdict line per scenario."""
    corpus = Path(corpus_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    any_bad = False
    for path in sorted(corpus.glob("*.ini")):
        expected = "pass"
        try:
            cfg = _load_scenario(path)
            expected = cfg["check"].get("expect", "pass").strip()
        except Exception:  # noqa: BLE001
            expected = "pass"
        code = run_scenario(path, out / path.stem, threads=threads)
        expected_codes = {
            "pass": {EXIT_PASS},
            "fail": {EXIT_FAIL},
            "hypothesis_error": {EXIT_HYPOTHESIS},
        }.get(expected, {EXIT_PASS})
        ok = code in expected_codes
        any_bad = any_bad or not ok
        rows.append(
            {
                "scenario": path.stem,
                "exit_code": code,
                "expected": expected,
                "ok": ok,
            }
        )
        print(f"{path.stem}: exit {code} (expected {expected}) {'ok' if ok else 'UNEXPECTED'}")
    _write(out / "summary.json", _dump_json({"scenarios": rows}))
    return EXIT_PASS if not any_bad else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point


def _cmd_eval(args) -> int:
    try:
        e = parse(args.expr)
        z = _parse_complex(args.z)
        fn = to_meromorphic(e)
        from .exprlang import evaluate

        v = evaluate(fn, z)
        if v.is_finite:
            print(f"{v.value.real:.12g}{v.value.imag:+.12g}i")
        else:
            print(f"pole of order {v.order}")
        return EXIT_PASS
    except ParseError as exc:
        print(f"parse error at byte {exc.offset}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ExprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


def _cmd_wronskian(args) -> int:
    try:
        cfg = _load_scenario(Path(args.scenario))
        curve = _parse_curve(cfg)
        z = _parse_complex(args.z)
        w = wronskian(curve, z)
        print(f"{w.real:.12g}{w.imag:+.12g}i")
        return EXIT_PASS
    except Exception as exc:  # noqa: BLE001
        code = _classify(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


def _cmd_zeros(args) -> int:
    try:
        h = parse(args.expr)
        zs = locate_zeros(h, Disc(0j, float(args.radius)))
        print("re,im,multiplicity")
        for z, m in zs.zeros:
            print(f"{z.real:.12g},{z.imag:.12g},{m}")
        return EXIT_PASS
    except ParseError as exc:
        print(f"parse error at byte {exc.offset}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001
        code = _classify(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


def _parse_grid_flag(text: str) -> list:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ScenarioError("grid flag format is min:max:count[:log|linear]")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    spacing = parts[3] if len(parts) == 4 else "log"
    if spacing == "log":
        return [float(x) for x in np.geomspace(lo, hi, count)]
    if spacing == "linear":
        return [float(x) for x in np.linspace(lo, hi, count)]
    raise ScenarioError(f"unknown spacing {spacing!r}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="nevlab",
        description="Desk-scale verification of value-distribution inequalities",
    )
    ap.add_argument("--eps", type=float, default=None, help="exceptional grid fraction")
    ap.add_argument("--grid", type=str, default=None, help="min:max:count[:log|linear]")
    ap.add_argument("--out", type=str, default=".", help="artifact output directory")
    ap.add_argument(
        "--threads", type=int, default=1,
        help="worker count (results are identical for any value)",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_ver = sub.add_parser("verify", help="run a directory of scenarios")
    p_ver.add_argument("corpus")
    p_eval = sub.add_parser("eval", help="evaluate an expression at a point")
    p_eval.add_argument("expr")
    p_eval.add_argument("z")
    p_wr = sub.add_parser("wronskian", help="Wronskian of a scenario's curve at a point")
    p_wr.add_argument("scenario")
    p_wr.add_argument("z")
    p_z = sub.add_parser("zeros", help="zeros of an entire expression in a disc")
    p_z.add_argument("expr")
    p_z.add_argument("radius")
    args = ap.parse_args(argv)

    if args.command == "run":
        grid = None
        if args.grid is not None:
            try:
                grid = _parse_grid_flag(args.grid)
            except ScenarioError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_PARSE
        return run_scenario(
            args.scenario, args.out, eps_override=args.eps,
            grid_override=grid, threads=args.threads,
        )
    if args.command == "verify":
        return verify_suite(args.corpus, args.out, threads=args.threads)
    if args.command == "eval":
        return _cmd_eval(args)
    if args.command == "wronskian":
        return _cmd_wronskian(args)
    if args.command == "zeros":
        return _cmd_zeros(args)
    return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
