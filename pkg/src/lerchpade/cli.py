"""Command-line front end.

Usage: ``lerchpade <group> <command> [flags]``.  Every command builds a JSON
report, writes it to ``--output`` in the chosen ``--format`` (or prints it),
and exits 0 on success, 1 on a failed verification and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from fractions import Fraction
from typing import Callable

from . import criterion, determinant, numeric, pade
from .exact_core import DEFAULT_PRECISION, Poly, rat_from_str, rat_to_str

PRECISION_ENV = "LERCHPADE_PRECISION"


class InputError(ValueError):
    pass


@dataclass
class Result:
    report: dict
    summary: str
    ok: bool = True
    csv_text: str | None = None


# ---------------------------------------------------------------------------
# flag parsing helpers


def parse_rat(text: str) -> Fraction:
    try:
        return rat_from_str(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {text!r}") from exc


def parse_rat_list(text: str) -> list[Fraction]:
    return [parse_rat(part) for part in text.split(",") if part.strip()]


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InputError(f"not a list of integers: {text!r}") from exc


def parse_shifts(text: str) -> list[tuple[Fraction, int]]:
    """``"0:1,1/2:2"`` -> [(0, 1), (1/2, 2)]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise InputError(f"shift {part!r} must look like x:r")
        x, r = part.split(":", 1)
        try:
            out.append((parse_rat(x), int(r)))
        except ValueError as exc:
            raise InputError(f"bad multiplicity in {part!r}") from exc
    if not out:
        raise InputError("no shifts given")
    return out


def read_config(path: str) -> dict[str, str]:
    """Plain ``key=value`` lines; ``#`` starts a comment.  Dashes in keys become underscores."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputError(f"{path}:{lineno}: expected key=value")
                key, value = line.split("=", 1)
                values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return values


def _need(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise InputError(f"missing required option --{name.replace('_', '-')}")
    return value


def _instance(args) -> pade.Instance:
    alphas = parse_rat_list(_need(args, "alphas"))
    shifts = parse_shifts(_need(args, "shifts"))
    if args.m is not None and int(args.m) != len(alphas):
        raise InputError(f"--m {args.m} does not match {len(alphas)} alphas")
    return pade.Instance.make(alphas, shifts, int(_need(args, "n")))


def _criterion_input(args) -> criterion.CriterionInput:
    alphas = parse_rat_list(_need(args, "alphas"))
    if args.m is not None and int(args.m) != len(alphas):
        raise InputError(f"--m {args.m} does not match {len(alphas)} alphas")
    place = args.place or criterion.ARCHIMEDEAN
    if place != criterion.ARCHIMEDEAN:
        try:
            place = int(place)
        except ValueError as exc:
            raise InputError(f"place must be 'archimedean' or a prime, got {args.place!r}") from exc
    return criterion.CriterionInput.make(
        alphas, parse_shifts(_need(args, "shifts")), parse_rat(_need(args, "beta")),
        place=place, precision=args.precision, experimental=bool(args.experimental),
    )


# ---------------------------------------------------------------------------
# commands


def cmd_pade_build(args) -> Result:
    system = pade.PadeSystem(_instance(args))
    report = system.to_json(int(args.terms) if args.terms is not None else None)
    inst = system.instance
    return Result(report, f"built {inst.rho_m + 1} denominators and {len(report['Pnum'])} numerators")


def cmd_pade_verify(args) -> Result:
    inst = _instance(args)
    rep = pade.verify_order(inst, raise_on_failure=False)
    if rep.passed:
        summary = f"pass: ord >= {inst.n + 1} on {rep.cells_checked} cells (observed min order {rep.min_order})"
    else:
        summary = f"FAIL: {rep.failures[0]}"
    return Result(rep.to_json(), summary, rep.passed)


def cmd_det_delta(args) -> Result:
    inst = _instance(args)
    delta = determinant.delta_det(inst)
    ok = delta != 0
    report = {"instance": inst.to_json(), "delta": rat_to_str(delta), "nonzero": ok}
    return Result(report, rat_to_str(delta), ok)


def cmd_det_chain(args) -> Result:
    rep = determinant.chain_check(_instance(args))
    summary = ("consistent" if rep.consistent else "MISMATCH") + f": delta={rat_to_str(rep.delta)}"
    return Result(rep.to_json(), summary, rep.consistent)


def cmd_det_hermite(args) -> Result:
    xs = parse_rat_list(_need(args, "x"))
    rs = parse_int_list(_need(args, "r"))
    if len(xs) != len(rs):
        raise InputError("--x and --r need the same length")
    pair = determinant.hermite_det_pair(xs, rs)
    report = {"x": [rat_to_str(x) for x in xs], "r": rs, **pair.to_json()}
    summary = f"direct={rat_to_str(pair.direct)} closed={rat_to_str(pair.closed)} abs_equal={pair.abs_equal}"
    return Result(report, summary, pair.abs_equal)


def cmd_det_m_pair(args) -> Result:
    shifts = parse_shifts(_need(args, "shifts"))
    n = int(_need(args, "n"))
    pair = determinant.det_M_pair(shifts, n)
    report = {"shifts": [{"x": rat_to_str(x), "r": r} for x, r in shifts], "n": n, **pair.to_json()}
    summary = f"direct={rat_to_str(pair.direct)} closed={rat_to_str(pair.closed)} abs_equal={pair.abs_equal}"
    return Result(report, summary, pair.abs_equal)


def cmd_criterion_eval(args) -> Result:
    rep = criterion.compute_V(_criterion_input(args), diagnostics=bool(args.diagnostics))
    return Result(rep.to_json(args.digits), f"V={rep.V.to_str(args.digits)} verdict={rep.verdict}")


def cmd_criterion_measure(args) -> Result:
    rep = criterion.compute_measure(_criterion_input(args), parse_rat(args.epsilon or "1/2"))
    summary = (f"V={rep.V.to_str(15)} mu={rep.mu_exponent.to_str(15)} "
               f"C={rep.C_constant.to_str(15)} verdict={rep.verdict}")
    return Result(rep.to_json(args.digits), summary)


def cmd_criterion_tables(args) -> Result:
    rows = criterion.table_rows(args.precision)
    digits = 12
    report = {
        "precision_bits": args.precision,
        "rows": [
            {"g": r["g"], "p": r["p"], "q": r["q"], "paper_value": r["paper_value"],
             "computed_threshold": r["computed_threshold"].to_json(digits),
             "difference": r["difference"].to_json(digits)}
            for r in rows
        ],
    }
    text = criterion.table_emit(args.precision, digits)
    return Result(report, f"{len(rows)} rows", csv_text=text)


def cmd_eval_lerch(args) -> Result:
    x = parse_rat(_need(args, "x"))
    s = int(_need(args, "s"))
    z = parse_rat(_need(args, "z"))
    value = numeric.eval_lerch(x, s, z, args.precision)
    report = {"x": rat_to_str(x), "s": s, "z": rat_to_str(z), "value": value.to_json(args.digits)}
    return Result(report, value.to_str(args.digits))


def cmd_eval_periodic(args) -> Result:
    spec = numeric.PeriodicSpec(Poly(parse_rat_list(_need(args, "b")), "z"),
                                Poly(parse_rat_list(_need(args, "w")), "z"))
    x = parse_rat(_need(args, "x"))
    s = int(_need(args, "s"))
    beta = parse_rat(_need(args, "beta"))
    pf = numeric.eval_periodic(spec, x, s, beta, args.precision)
    direct = numeric.eval_periodic_series(spec, x, s, beta, args.precision)
    ok = pf.overlaps(direct)
    report = {
        "spec": spec.to_json(), "x": rat_to_str(x), "s": s, "beta": rat_to_str(beta),
        "partial_fractions": pf.to_json(args.digits), "direct_series": direct.to_json(args.digits),
        "routes_agree": ok,
    }
    return Result(report, f"{pf.to_str(args.digits)} routes_agree={ok}", ok)


def cmd_check_remainder_bound(args) -> Result:
    inst = _instance(args)
    rep = numeric.remainder_bound_check(inst, parse_rat(_need(args, "beta")), max(args.precision, 128))
    summary = ("pass" if rep.passed else "FAIL") + f": {len(rep.cells)} cells, min margin {float(rep.min_margin):.6g}"
    return Result(rep.to_json(), summary, rep.passed)


def cmd_check_linear_form(args) -> Result:
    inp = _criterion_input(args)
    rep = numeric.bruteforce_linear_form_min(inp, int(args.cap or 10), args.precision,
                                             parse_rat(args.epsilon or "1/2"))
    data = rep.to_json()
    summary = (f"min |L| = {data['minimum']} at {list(rep.argmin)}; "
               f"{rep.vectors} vectors, {rep.violations} below the bound")
    return Result(data, summary, rep.passed)


COMMANDS: dict[tuple[str, str], tuple[Callable[[argparse.Namespace], Result], str]] = {
    ("pade", "build"): (cmd_pade_build, "build all approximants of an instance"),
    ("pade", "verify"): (cmd_pade_verify, "check degrees and remainder orders exactly"),
    ("det", "delta"): (cmd_det_delta, "the determinant Delta of the approximant matrix"),
    ("det", "chain"): (cmd_det_chain, "compare Delta, c det u and E det w"),
    ("det", "hermite"): (cmd_det_hermite, "confluent Vandermonde determinant, direct and closed"),
    ("det", "m-pair"): (cmd_det_m_pair, "the integral matrix M, direct and closed determinant"),
    ("criterion", "eval"): (cmd_criterion_eval, "evaluate V and the verdict"),
    ("criterion", "measure"): (cmd_criterion_measure, "A, U, the exponent mu and the constant C"),
    ("criterion", "tables"): (cmd_criterion_tables, "threshold tables for the worked example"),
    ("eval", "lerch"): (cmd_eval_lerch, "Phi_s(x, z) with an error bound"),
    ("eval", "periodic"): (cmd_eval_periodic, "f_{b,w,x,s}(beta) by two routes"),
    ("check", "remainder-bound"): (cmd_check_remainder_bound, "numeric remainder versus its upper bound"),
    ("check", "linear-form"): (cmd_check_linear_form, "smallest integer linear form up to a height cap"),
}

# flags: name -> help; all default to None so a config file can fill gaps
FLAGS = {
    "m": "number of points alpha (must match --alphas)",
    "alphas": "comma-separated rationals, e.g. 1,1/2",
    "shifts": "comma-separated x:r pairs, e.g. 0:1,1/2:2",
    "n": "Padé index",
    "beta": "the rational point beta",
    "epsilon": "epsilon in (0, V) for the measure (default 1/2)",
    "cap": "height cap for check linear-form (default 10)",
    "x": "shift (eval) or comma-separated nodes (det hermite)",
    "s": "depth s",
    "z": "argument z with |z| < 1",
    "r": "comma-separated multiplicities (det hermite)",
    "b": "coefficients of b(z), constant term first",
    "w": "coefficients of w(z), constant term first",
    "terms": "number of remainder coefficients in pade build",
    "place": "'archimedean' or a prime (needs --experimental)",
}


def load_schema(group: str, command: str) -> dict:
    """The JSON schema shipped for one subcommand's report."""
    ref = resources.files("lerchpade") / "schemas" / f"{group}-{command}.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (env {PRECISION_ENV}, default {DEFAULT_PRECISION})")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--config", default=None, help="key=value file; flags win on conflict")
    common.add_argument("--digits", type=int, default=None, help="digits printed for real numbers")
    common.add_argument("--experimental", action="store_true", default=None,
                        help="allow finite places in the criterion")
    common.add_argument("--diagnostics", action="store_true", default=None,
                        help="add the denominator-growth diagnostic to criterion eval")
    for name, text in FLAGS.items():
        common.add_argument(f"--{name}", default=None, help=text)

    parser = argparse.ArgumentParser(prog="lerchpade", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)
    subs: dict[str, argparse._SubParsersAction] = {}
    for (group, name), (_, text) in COMMANDS.items():
        if group not in subs:
            subs[group] = groups.add_parser(group).add_subparsers(dest="command", required=True)
        subs[group].add_parser(name, parents=[common], help=text)
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        for key, value in read_config(args.config).items():
            if not hasattr(args, key) or key in ("config", "group", "command"):
                raise InputError(f"unknown config key {key!r}")
            if getattr(args, key) is None:
                if key in ("experimental", "diagnostics"):
                    value = value.lower() in ("1", "true", "yes", "on")
                elif key in ("precision", "digits"):
                    value = int(value)
                setattr(args, key, value)
    if args.precision is None:
        env = os.environ.get(PRECISION_ENV)
        try:
            args.precision = int(env) if env else DEFAULT_PRECISION
        except ValueError as exc:
            raise InputError(f"{PRECISION_ENV} must be an integer") from exc
    if args.precision < 16:
        raise InputError("precision must be at least 16 bits")
    if args.digits is None:
        args.digits = 30
    if args.format is None:
        args.format = "text"
    return args


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten(f"{prefix}.{key}" if prefix else key, sub, rows)
    elif isinstance(value, list):
        for idx, sub in enumerate(value):
            _flatten(f"{prefix}[{idx}]", sub, rows)
    else:
        rows.append((prefix, "" if value is None else value))


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        if result.csv_text is not None:
            return result.csv_text
        rows: list = []
        _flatten("", result.report, rows)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(rows)
        return buf.getvalue()
    if result.csv_text is not None:
        return result.csv_text
    return result.summary + "\n"


def _fail(kind: str, message: str, code: int, details: dict | None = None) -> int:
    payload = {"error": kind, "message": message}
    if details:
        payload["details"] = details
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge_config(args)
        handler = COMMANDS[(args.group, args.command)][0]
        result = handler(args)
    except (pade.OrderVerificationError, determinant.MismatchError) as exc:
        details = getattr(exc, "violation", None) or getattr(exc, "details", None)
        return _fail("verification-failed", str(exc), 1, details)
    except (InputError, ValueError, ZeroDivisionError) as exc:
        return _fail("invalid-input", str(exc), 2)
    text = render(result, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(result.summary)
    else:
        sys.stdout.write(text)
    if not result.ok:
        return _fail("verification-failed", result.summary, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
