"""Command-line front end: ``olk eval`` and ``olk check``.

Exit codes: 0 success, 1 a check suite reported failures, 2 malformed
input (bad spec, unknown suite or functional, violated precondition).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import orlicz
from .checks import SUITES, Context, PreconditionError, run_suite
from .core import INF, StepFn, seq_to_step
from .duality import norming_supremum, orlicz_norm_amemiya
from .envelope import envelope_modular_P, envelope_norm, fundamental_G, fundamental_M, fundamental_M_env
from .modular import luxemburg_norm, modular_Iv, modular_iv, modular_M
from .orlicz import OrliczFn, is_n_function, matuszewska_indices
from .rearrange import decreasing_rearrangement, dist
from .report import dumps, rows_to_csv
from .weights import Weight

FUNCTIONALS = (
    "rearrange", "dist", "modular-M", "norm-luxemburg", "envelope-P", "norm-envelope",
    "orlicz-norm", "fundamental-M", "fundamental-G", "fundamental-env", "conjugate", "indices",
)


class SpecError(ValueError):
    """Malformed spec; the message names the file position or field."""


# ---------------------------------------------------------------------------
# spec loading


def load_spec(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"{path}: cannot read spec: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise SpecError(f"{path}: top level must be a JSON object")
    return spec


def _field(spec: dict, name: str, parse, required: bool = True):
    if name not in spec:
        if required:
            raise SpecError(f"missing field {name!r}")
        return None
    try:
        return parse(spec[name])
    except SpecError:
        raise
    except (ValueError, TypeError, KeyError, AttributeError) as exc:
        raise SpecError(f"field {name!r}: {exc}") from None


def _num(x) -> float:
    if x in ("inf", "Infinity"):
        return INF
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise TypeError(f"expected a number, got {x!r}")
    return float(x)


def _function(obj) -> StepFn:
    """A list is a sequence on unit cells; a dict is a step function."""
    if isinstance(obj, list):
        return seq_to_step([_num(v) for v in obj])
    if isinstance(obj, dict):
        bps = [_num(b) for b in obj["breakpoints"]]
        vals = [_num(v) for v in obj["values"]]
        return StepFn(tuple(bps), tuple(vals))
    raise TypeError("expected a list of values or {breakpoints, values}")


def _weight(obj) -> Weight:
    if isinstance(obj, list):
        return Weight.from_sequence([_num(v) for v in obj])
    if isinstance(obj, dict):
        return Weight.from_json(obj)
    raise TypeError("expected a weight object or a list of values")


def _phi(obj) -> OrliczFn:
    if not isinstance(obj, dict):
        raise TypeError("expected an Orlicz function object")
    return orlicz.from_json(obj)


def _points(obj) -> list:
    return [_num(v) for v in obj] if isinstance(obj, list) else [_num(obj)]


def spec_phi(spec: dict, required: bool = True) -> OrliczFn | None:
    return _field(spec, "phi", _phi, required)


def spec_weight(spec: dict, required: bool = True) -> Weight | None:
    for key in ("weight", "w"):
        if key in spec:
            return _field(spec, key, _weight)
    if required:
        raise SpecError("missing field 'weight'")
    return None


def spec_function(spec: dict, name: str | None = None) -> StepFn:
    if name is not None:
        funcs = _field(spec, "functions", lambda d: d if isinstance(d, dict) else None)
        if not funcs or name not in funcs:
            raise SpecError(f"field 'functions': no function named {name!r}")
        return _field(funcs, name, _function)
    for key in ("f", "x"):
        if key in spec:
            return _field(spec, key, _function)
    funcs = spec.get("functions")
    if isinstance(funcs, dict) and len(funcs) == 1:
        (only,) = funcs
        return _field(funcs, only, _function)
    raise SpecError("missing field 'f' (or 'x', or a single entry of 'functions'; use --function)")


# ---------------------------------------------------------------------------
# eval


def _per_point(pts, fn) -> Any:
    vals = [fn(t) for t in pts]
    return vals[0] if len(vals) == 1 else vals


def evaluate(name: str, spec: dict, function: str | None = None, tol: float = 1e-9) -> dict:
    out: dict = {"functional": name}
    if name == "rearrange":
        out["value"] = decreasing_rearrangement(spec_function(spec, function)).to_json()
    elif name == "dist":
        f = spec_function(spec, function)
        s = _field(spec, "s", _points)
        out["s"], out["value"] = s, _per_point(s, lambda x: float(dist(f, x)))
    elif name == "modular-M":
        phi = spec_phi(spec)
        if "v" in spec:
            # pairing form I_v against an explicit v
            if isinstance(spec.get("x", spec.get("f")), list) and isinstance(spec["v"], list):
                x = _field(spec, "x" if "x" in spec else "f", lambda o: [_num(t) for t in o])
                v = _field(spec, "v", lambda o: [_num(t) for t in o])
                out["value"] = modular_iv(x, v, phi)
            else:
                out["value"] = modular_Iv(spec_function(spec, function), _field(spec, "v", _function), phi)
        else:
            out["value"] = modular_M(spec_function(spec, function), spec_weight(spec), phi)
    elif name == "norm-luxemburg":
        out["value"] = luxemburg_norm(spec_function(spec, function), spec_weight(spec), spec_phi(spec))
    elif name == "envelope-P":
        sol = envelope_modular_P(spec_function(spec, function), spec_weight(spec), spec_phi(spec), tol)
        out.update(sol.to_json())
    elif name == "norm-envelope":
        out["value"] = envelope_norm(spec_function(spec, function), spec_weight(spec), spec_phi(spec), tol)
    elif name == "orlicz-norm":
        f, w = spec_function(spec, function), spec_weight(spec)
        phi_star = _field(spec, "phi_star", _phi, required=False)
        phi = spec_phi(spec, required=phi_star is None)
        if phi_star is None:
            phi_star = phi.conjugate_fn()
        res = orlicz_norm_amemiya(f, w, phi_star)
        out["value"], out["amemiya_k"] = res.value, res.amemiya_k
        if phi is not None and is_n_function(phi):
            att = norming_supremum(f, w, phi)
            out["norming"] = att.to_json()
    elif name in ("fundamental-M", "fundamental-G", "fundamental-env"):
        fn = {"fundamental-M": fundamental_M, "fundamental-G": fundamental_G,
              "fundamental-env": fundamental_M_env}[name]
        w, phi = spec_weight(spec), spec_phi(spec)
        t = _field(spec, "t", _points)
        out["t"], out["value"] = t, _per_point(t, lambda x: fn(x, w, phi))
    elif name == "conjugate":
        phi = spec_phi(spec)
        t = _field(spec, "t", _points)
        out["t"], out["value"] = t, _per_point(t, phi.conjugate)
    elif name == "indices":
        opts = _field(spec, "indices", lambda d: dict(d), required=False) or {}
        target = opts.get("of", "phi")
        if target == "phi":
            h, lo, hi = spec_phi(spec), 1e-6, 1e6
        elif target == "weight":
            h = spec_weight(spec)
            lo = max(h.floor * (1 + 1e-4), 1e-300) if h.floor else 1e-12
            hi = min(float(h.domain_end), 1.0) if h.domain_end != INF else 1.0
        else:
            raise SpecError(f"field 'indices': 'of' must be 'phi' or 'weight', got {target!r}")
        lo = _field(opts, "lo", _num, required=False) or lo
        hi = _field(opts, "hi", _num, required=False) or hi
        n_t = _field(opts, "n_t", int, required=False) or 64
        n_l = _field(opts, "n_lambda", int, required=False) or 64
        alpha, beta = matuszewska_indices(h, lo, hi, n_t=n_t, n_lambda=n_l)
        out.update(alpha=alpha, beta=beta, grid={"lo": lo, "hi": hi, "n_t": n_t, "n_lambda": n_l})
    else:
        raise SpecError(f"unknown functional {name!r}; choose from {', '.join(FUNCTIONALS)}")
    return out


# ---------------------------------------------------------------------------
# check


def check_context(spec: dict | None, tol: float) -> Context:
    if not spec:
        return Context(tol=tol)
    instance = spec.get("instance")
    if instance is None and any(k in spec for k in ("s1", "s2", "t1", "t2")):
        instance = {k: spec[k] for k in ("s1", "s2", "t1", "t2") if k in spec}
    if instance is not None and not isinstance(instance, dict):
        raise SpecError("field 'instance': expected an object")
    return Context(tol=tol, phi=spec_phi(spec, required=False),
                   weight=spec_weight(spec, required=False), instance=instance)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    given = {n for n in (args.suite_pos, args.suite) if n}
    if len(given) > 1 or (given and args.all):
        print("error: give one suite name or --all", file=sys.stderr)
        return 2
    names = list(SUITES) if args.all else list(given)
    if not names:
        print("error: name a suite or pass --all", file=sys.stderr)
        return 2
    for n in names:
        if n not in SUITES:
            print(f"error: unknown suite {n!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
            return 2
    spec = load_spec(args.spec) if args.spec else None
    ctx = check_context(spec, args.tol)
    stamps = not args.no_timestamp
    reports = []
    for n in names:
        try:
            reports.append(run_suite(n, args.trials, args.seed, ctx))
        except PreconditionError as exc:
            print(f"error: precondition violated in suite {n!r}: {exc}", file=sys.stderr)
            return 2
    passed = all(r.ok for r in reports)
    if args.format == "csv":
        rows = [row for r in reports for row in r.rows]
        _emit(rows_to_csv(rows), args.out)
        summary = [r.summary(stamps) for r in reports]
        sys.stderr.write(dumps(summary[0] if len(summary) == 1 else {"passed": passed, "suites": summary}) + "\n")
    else:
        docs = [r.to_json(stamps) for r in reports]
        doc = docs[0] if len(docs) == 1 else {"passed": passed, "suites": docs}
        _emit(dumps(doc) + "\n", args.out)
    return 0 if passed else 1


def cmd_eval(args) -> int:
    if not args.spec:
        print("error: eval needs --spec", file=sys.stderr)
        return 2
    spec = load_spec(args.spec)
    out = evaluate(args.functional, spec, args.function, args.tol)
    _emit(dumps(out) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="olk", description="Orlicz-Lorentz functionals and property checks")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate a functional on a JSON spec")
    ev.add_argument("functional", choices=FUNCTIONALS)
    ev.add_argument("--spec", required=False, help="JSON file with phi, weight and functions")
    ev.add_argument("--function", help="entry of the 'functions' object in the --spec file")
    ev.add_argument("--tol", type=float, default=1e-9, help="solver tolerance")
    ev.add_argument("--out", help="write JSON here instead of stdout")
    ev.set_defaults(handler=cmd_eval)

    ck = sub.add_parser("check", help="run seeded property suites")
    ck.add_argument("suite_pos", nargs="?", metavar="SUITE")
    ck.add_argument("--suite", help="suite name (alternative to the positional)")
    ck.add_argument("--all", action="store_true", help="run every suite")
    ck.add_argument("--trials", type=int, help="trial count (default: per suite)")
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--tol", type=float, default=1e-6)
    ck.add_argument("--spec", help="JSON overriding phi, weight, or the exchange instance")
    ck.add_argument("--out", help="report destination (default stdout)")
    ck.add_argument("--format", choices=("json", "csv"), default="json")
    ck.add_argument("--no-timestamp", action="store_true", help="omit wall time for byte-stable output")
    ck.set_defaults(handler=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # library precondition failures on a well-formed spec
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
