"""Command-line front end.

Commands: ``cfk``, ``surgery``, ``double``, ``endfloer``, ``distinguish``,
``verify``.  JSON output is byte-stable (sorted keys, canonical fraction
strings); tables align gradings descending.  Exit codes: 0 success,
1 domain error, 2 usage or file error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cfk import KnotComplex, hfk_hat, knot_numerics, reduced_basis_form, validate_knot
from .corpus import canonical_json, load_complex
from .endfloer import (
    CH_MINUS,
    CH_PLUS,
    CH_STAR,
    CassonHandle,
    SliceR4Spec,
    distinguish,
    he_slice_r4,
)
from .fualgebra import FUDecomposition, InvalidComplex, format_grading
from .surgery import MissingFlip, surgery_hf
from .verify import format_rows, run_verification
from .whitehead import negative_double_cfk, whitehead_double_cfk


class UsageError(Exception):
    pass


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _decomposition_table(dec: FUDecomposition) -> str:
    towers = {}
    for t in dec.towers:
        towers[t] = towers.get(t, 0) + 1
    reduced = dec.torsion_rank_table()
    gradings = sorted(set(towers) | set(reduced), reverse=True)
    header = f"{'grading':>10}  {'towers':>6}  {'reduced':>7}"
    lines = [header]
    for g in gradings:
        lines.append(
            f"{format_grading(g):>10}  {towers.get(g, 0) or '.':>6}  {reduced.get(g, 0) or '.':>7}"
        )
    if not gradings:
        lines.append(f"{'-':>10}  {'.':>6}  {'.':>7}")
    return "\n".join(lines) + "\n"


def _hfk_table(kc: KnotComplex) -> str:
    table = hfk_hat(kc)
    keys = sorted(table.total, key=lambda k: (-k[1], -k[0]))
    lines = [f"{'maslov':>8}  {'alexander':>9}  {'dim':>4}"]
    for m, s in keys:
        lines.append(f"{format_grading(m):>8}  {s:>9}  {table.total[(m, s)]:>4}")
    return "\n".join(lines) + "\n"


def _load(path: str) -> KnotComplex:
    try:
        return load_complex(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse complex file {path!r}: {exc}") from exc


_HANDLES = {"ch+": CH_PLUS, "ch-": CH_MINUS, "ch*": CH_STAR,
            "undetermined": CassonHandle("undetermined")}


def _parse_handle(value) -> CassonHandle:
    if isinstance(value, str):
        if value in _HANDLES:
            return _HANDLES[value]
        raise UsageError(f"unknown handle {value!r}; use one of {sorted(_HANDLES)}")
    return CassonHandle.from_json(value)


def _parse_slice_spec(data) -> SliceR4Spec:
    knot = data["knot"]
    if isinstance(knot, str):
        kc = _load(knot)
    else:
        kc = KnotComplex.from_json(knot)
    return SliceR4Spec(
        knot=kc,
        handle=_parse_handle(data.get("handle", "ch+")),
        orientation=data.get("orientation", "+"),
        disk_label=data.get("disk_label", "standard"),
    )


def _parse_operand(path: str):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {path!r}: {exc}") from exc
    try:
        if "summands" in data:
            return [_parse_slice_spec(s) for s in data["summands"]]
        return _parse_slice_spec(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed piece description in {path!r}: {exc}") from exc


def _cmd_cfk(args) -> int:
    kc = _load(args.complex)
    validate_knot(kc).require("complex")
    if args.format == "table":
        _emit(_hfk_table(kc), args.out)
        return 0
    payload = {"hfk_hat": {}, "name": kc.name}
    table = hfk_hat(kc)
    payload["hfk_hat"] = {
        f"({format_grading(m)},{s})": d for (m, s), d in sorted(table.total.items())
    }
    if table.reduced is not None:
        payload["hfk_hat_reduced"] = {
            f"({format_grading(m)},{s})": d for (m, s), d in sorted(table.reduced.items())
        }
        payload["numerics"] = knot_numerics(kc)
    _emit(canonical_json(payload), args.out)
    return 0


def _cmd_surgery(args) -> int:
    kc = _load(args.complex)
    result = surgery_hf(kc, args.n)
    if args.format == "table":
        _emit(_decomposition_table(result.decomposition), args.out)
    else:
        _emit(canonical_json(result.to_json()), args.out)
    return 0


def _cmd_double(args) -> int:
    kc = _load(args.complex)
    if args.iterations < 1:
        raise UsageError("--iterations must be at least 1")
    current = kc
    for i in range(args.iterations):
        rb = reduced_basis_form(current)
        build = whitehead_double_cfk if args.sign == "+" else negative_double_cfk
        current = build(rb, name=f"Wh^{i + 1}({kc.name})" if kc.name else f"Wh^{i + 1}")
    _emit(canonical_json(current.to_json()), args.out)
    return 0


def _cmd_endfloer(args) -> int:
    kc = _load(args.knot)
    spec = SliceR4Spec(
        knot=kc,
        handle=_parse_handle(args.handle),
        orientation=args.orientation,
    )
    report = he_slice_r4(spec, levels=args.levels)
    _emit(canonical_json(report.to_json()), args.out)
    return 0


def _cmd_distinguish(args) -> int:
    a = _parse_operand(args.a)
    b = _parse_operand(args.b)
    verdict = distinguish(a, b)
    _emit(canonical_json(verdict.to_json()), args.out)
    return 0


def _cmd_verify(args) -> int:
    rows = run_verification(args.filter)
    if not rows:
        raise UsageError(f"no verification rows match {args.filter!r}")
    _emit(format_rows(rows) + "\n", None)
    return 0 if all(r.passed for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floerforge",
        description="Exact computations with knot complexes over F2[U].",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cfk", help="hat invariants of a knot complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cfk)

    p = sub.add_parser("surgery", help="graded output of integer surgery")
    p.add_argument("--complex", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_surgery)

    p = sub.add_parser("double", help="iterated Whitehead double of a complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--sign", choices=["+", "-"], default="+")
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_double)

    p = sub.add_parser("endfloer", help="end invariant of a slice piece")
    p.add_argument("--knot", required=True)
    p.add_argument("--handle", default="ch+")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--orientation", choices=["+", "-"], default="+")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_endfloer)

    p = sub.add_parser("distinguish", help="compare two pieces under both orientations")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_distinguish)

    p = sub.add_parser("verify", help="run the reproduction suite")
    p.add_argument("--filter", default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidComplex, MissingFlip, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
