"""Command-line interface: ``sgff {ff2,ff4,ff6,check,wtable}``.

Exit codes: 0 success, 1 some rows (or checks) failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .axioms import format_reports, reports_to_json, run_axiom_suite
from .config import CONFIG_ALIASES, FFConfig
from .formfactors import ChargeSignature, FormFactorEvaluator, balanced_signatures
from .wtable import WTable, lines_for_rapidities, load_wtable, required_range

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


_FLAG_FIELDS = {
    "xi": "xi",
    "a_over_beta": "a_over_beta",
    "nn": "NN",
    "na": "Na",
    "ni": "Ni",
    "epsilon": "epsilon",
    "aa": "aa",
    "bb": "bb",
    "shift_floor": "shift_floor",
}


def build_config(args, defaults=None) -> FFConfig:
    data = dict(defaults or {})
    if getattr(args, "config", None):
        data.update(read_config_file(args.config))
    for dest, name in _FLAG_FIELDS.items():
        val = getattr(args, dest, None)
        if val is not None:
            # flags replace any spelling of the same key from the file
            for k in list(data):
                if _canonical(k) == name:
                    del data[k]
            data[name] = val
    if not any(_canonical(k) == "xi" for k in data):
        raise ConfigError("xi is required (--xi or xi=... in --config)")
    try:
        return FFConfig.from_mapping(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _canonical(key):
    return CONFIG_ALIASES.get(str(key).lower(), key)


def _add_solver_flags(p):
    g = p.add_argument_group("solver parameters")
    g.add_argument("--config", help="key=value file (flags override its values)")
    g.add_argument("--xi", type=float)
    g.add_argument("--a-over-beta", dest="a_over_beta", type=float)
    g.add_argument("--nn", type=int, help="regularization order of the kernels")
    g.add_argument("--na", type=int, help="depth of the asymptotic series")
    g.add_argument("--ni", type=int, help="minimum number of quadrature / table nodes")
    g.add_argument("--epsilon", type=float, help="initial step of the residue limit")
    g.add_argument("--aa", type=float, help="lower end of the quadrature window")
    g.add_argument("--bb", type=float, help="upper end of the quadrature window")
    g.add_argument("--shift-floor", dest="shift_floor", type=float)


# ---------------------------------------------------------------------------
# input


class RowError(Exception):
    pass


def _float_or_pi(tok) -> float:
    """``float(tok)``, also accepting multiples of pi such as ``-pi`` or ``2*pi``."""
    body = str(tok).strip().lower().replace(" ", "")
    if not body.endswith("pi"):
        return float(body)
    sign = -1.0 if body.startswith("-") else 1.0
    factor = body[:-2].lstrip("+-").rstrip("*")
    return sign * (float(factor) if factor else 1.0) * math.pi


def _parse_number(tok, lineno):
    try:
        v = _float_or_pi(tok)
    except ValueError as exc:
        raise RowError(f"line {lineno}: cannot parse {tok!r} as a number") from exc
    if not math.isfinite(v):
        raise RowError(f"line {lineno}: non-finite value {tok!r}")
    return v


def _row_from_flat(vals, n, lineno):
    if len(vals) != 2 * n:
        raise RowError(f"line {lineno}: expected {2 * n} numbers (re, im per rapidity), got {len(vals)}")
    return tuple(complex(vals[2 * i], vals[2 * i + 1]) for i in range(n))


def read_rows(text: str, n: int, fmt: str | None = None):
    """Parse rapidity rows; returns ``[(lineno, thetas or RowError)]``."""
    stripped = text.lstrip()
    if fmt == "json" or (fmt is None and stripped.startswith("[")):
        return _read_json_rows(text, n)
    rows = []
    first = True
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), 1):
        if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
            continue
        toks = [t.strip() for t in rec]
        if first:
            first = False
            if all(t and t[0].isalpha() for t in toks):
                continue  # header
        try:
            vals = [_parse_number(t, lineno) for t in toks]
            rows.append((lineno, _row_from_flat(vals, n, lineno)))
        except RowError as exc:
            rows.append((lineno, exc))
    return rows


def _read_json_rows(text, n):
    try:
        doc = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise ConfigError(f"input is not valid JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("rows", [])
    if not isinstance(doc, list):
        raise ConfigError("JSON input must be an array of rows")
    rows = []
    for i, item in enumerate(doc, 1):
        try:
            if isinstance(item, dict):
                item = item.get("thetas", item.get("rapidities"))
            if not isinstance(item, list):
                raise RowError(f"row {i}: expected a list")
            if item and all(isinstance(v, list) for v in item):
                flat = [x for pair in item for x in pair]
            else:
                flat = item
            vals = [_parse_number(str(v), i) for v in flat]
            rows.append((i, _row_from_flat(vals, n, i)))
        except RowError as exc:
            rows.append((i, exc))
    return rows


def _read_input(path):
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read input {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# evaluation


def _eval_row(task):
    idx, lineno, thetas, sigs, cfg, w_eval = task
    out = []
    if isinstance(thetas, Exception):
        for sig in sigs:
            out.append(_row_record(idx, lineno, None, sig, None, "failed", str(thetas), {}))
        return out
    try:
        ev = FormFactorEvaluator(thetas, cfg, w_eval)
    except Exception as exc:
        return [_row_record(idx, lineno, thetas, sig, None, "failed", f"{type(exc).__name__}: {exc}", {})
                for sig in sigs]
    for sig in sigs:
        try:
            res = ev.evaluate(sig)
            if not (math.isfinite(res.value.real) and math.isfinite(res.value.imag)):
                raise ArithmeticError("non-finite form factor")
            out.append(_row_record(idx, lineno, thetas, sig, res.value, "ok", "", res.diagnostics))
        except Exception as exc:
            out.append(_row_record(idx, lineno, thetas, sig, None, "failed", f"{type(exc).__name__}: {exc}", {}))
    return out


def _row_record(idx, lineno, thetas, sig, value, status, error, diag):
    return {
        "row": idx,
        "line": lineno,
        "signature": str(sig),
        "thetas": [[t.real, t.imag] for t in thetas] if thetas is not None else None,
        "value": [value.real, value.imag] if value is not None else None,
        "status": status,
        "error": error,
        "dropped_zero_modes": int(diag.get("dropped_zero_modes", 0)),
        "pole_terms": int(diag.get("pole_terms", 0)),
    }


def _signatures(spec: str, n: int):
    if spec in (None, ""):
        return [ChargeSignature("-" * (n // 2) + "+" * (n // 2))]
    if spec == "all":
        return balanced_signatures(n)
    out = []
    for tok in spec.split(","):
        sig = ChargeSignature(tok.strip())
        if len(sig) != n:
            raise ValueError(f"signature {tok} has length {len(sig)}, expected {n}")
        out.append(sig)
    return out


def _prepare_table(args, cfg, good_rows, manifest):
    """W table for the batch (or ``None`` for pointwise evaluation)."""
    info = {"mode": "direct", "cache": "none"}
    manifest["w_table"] = info
    if args.direct or not good_rows:
        return None
    patterns = {tuple(round(t.imag, 12) for t in row) for row in good_rows}
    if len(patterns) != 1 and not args.cache:
        return None
    lines = lines_for_rapidities(good_rows)
    L = required_range(good_rows, cfg.xi, cfg.shift_floor)
    table = None
    if args.cache and os.path.exists(args.cache):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = load_wtable(args.cache, cfg.xi, cfg.NN, cfg.Ni, lines, L)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        info["cache"] = "hit" if table is not None else "mismatch"
    if table is None:
        table = WTable(cfg.xi, cfg.NN, lines, L, cfg.Ni, cfg.Na)
        if args.cache and not os.path.exists(args.cache):
            table.save(args.cache, {"program": "sgff", "version": __version__, "command": "ff-auto"})
            info["cache"] = "written"
    info["mode"] = "table"
    info["key"] = table.key
    info["nodes_used"] = {repr(c): n for c, n in sorted(table.nodes_used.items())}
    return table


def cmd_ff(args, n: int) -> int:
    t0 = time.perf_counter()
    cfg = build_config(args)
    try:
        sigs = _signatures(args.signature, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = read_rows(_read_input(args.input), n, args.input_format)
    manifest = _manifest(args, cfg, f"ff{n}")
    manifest["signatures"] = [str(s) for s in sigs]
    good = [r for _, r in rows if not isinstance(r, Exception)]
    table = _prepare_table(args, cfg, good, manifest)
    tasks = [(i, ln, r, sigs, cfg, table) for i, (ln, r) in enumerate(rows)]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(_eval_row, tasks))
    else:
        chunks = [_eval_row(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    failed = sum(rec["status"] != "ok" for rec in records)
    manifest["counters"] = {
        "rows": len(rows),
        "records": len(records),
        "failed": failed,
        "dropped_zero_modes": sum(r["dropped_zero_modes"] for r in records),
    }
    if args.timing:
        manifest["elapsed_s"] = time.perf_counter() - t0
    _write(args.output, _format_records(records, n, manifest, args.format))
    return EXIT_PARTIAL if failed else EXIT_OK


def _format_records(records, n, manifest, fmt):
    if fmt == "json":
        doc = {"schema": "sgff.ff-output/1", "manifest": manifest, "rows": records}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    head = ["row", "line", "signature"]
    for i in range(1, n + 1):
        head += [f"re{i}", f"im{i}"]
    head += ["re_F", "im_F", "status", "dropped_zero_modes", "pole_terms", "error"]
    w.writerow(head)
    for r in records:
        th = r["thetas"] or [[math.nan, math.nan]] * n
        val = r["value"] or [math.nan, math.nan]
        w.writerow(
            [r["row"], r["line"], r["signature"]]
            + [repr(x) for pair in th for x in pair]
            + [repr(val[0]), repr(val[1]), r["status"], r["dropped_zero_modes"], r["pole_terms"], r["error"]]
        )
    return buf.getvalue()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _manifest(args, cfg, command):
    return {
        "program": "sgff",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "input": getattr(args, "input", None),
        "output": getattr(args, "output", None),
    }


# ---------------------------------------------------------------------------
# check and wtable


def _parse_tolerances(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--tolerance expects LABEL=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    return out


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    # the free-fermion point is the default suite
    cfg = build_config(args, {"xi": 1.0})
    tols = _parse_tolerances(args.tolerance)
    levels = args.level or [2, 4, 6]
    reports = []
    for lv in levels:
        reports.extend(run_axiom_suite(lv, cfg, tols))
    manifest = _manifest(args, cfg, "check")
    manifest["levels"] = levels
    manifest["tolerances"] = tols
    if args.timing:
        manifest["elapsed_s"] = time.perf_counter() - t0
    if args.json:
        text = reports_to_json(reports, manifest) + "\n"
    else:
        text = format_reports(reports) + "\n"
    _write(args.output, text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_PARTIAL


def _parse_lines(spec):
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            val = _float_or_pi(tok)
        except ValueError as exc:
            raise ConfigError(f"cannot parse line {tok!r}") from exc
        out.append(round(val, 12) + 0.0)
    if not out:
        raise ConfigError("no lines given")
    return sorted(set(out))


def cmd_wtable(args) -> int:
    cfg = build_config(args)
    if not args.output or args.output == "-":
        raise ConfigError("wtable needs --output FILE")
    lines = _parse_lines(args.lines)
    if not args.range > 0:
        raise ConfigError("--range must be positive")
    table = WTable(cfg.xi, cfg.NN, lines, args.range, cfg.Ni, cfg.Na)
    manifest = _manifest(args, cfg, "wtable")
    table.save(args.output, manifest)
    worst = max(table.probe_errors.values())
    print(f"wrote {args.output}: lines {list(table.lines)}, range {table.L}, "
          f"max probe error {worst:.1e}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgff", description="Sine-Gordon soliton form factors of the exponential operator."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for n in (2, 4, 6):
        p = sub.add_parser(f"ff{n}", help=f"{n}-soliton form factors for rows of rapidities")
        _add_solver_flags(p)
        p.add_argument("--input", default="-", help="CSV (re1,im1,...) or JSON rows; '-' for stdin")
        p.add_argument("--input-format", choices=["csv", "json"], default=None)
        p.add_argument("--output", default="-")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--signature", default=None,
                       help="comma-separated signatures such as '--++', or 'all' (default: minus charges first)")
        p.add_argument("--cache", help="W table cache file (read if present, written otherwise)")
        p.add_argument("--direct", action="store_true", help="never use the tabulated W")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="record wall time in the manifest")
        p.set_defaults(func=lambda a, n=n: cmd_ff(a, n))
    p = sub.add_parser("check", help="run the axiom verification suite")
    _add_solver_flags(p)
    p.add_argument("--level", type=int, choices=[2, 4, 6], action="append")
    p.add_argument("--tolerance", action="append", metavar="LABEL=VALUE")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--output", default="-")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("wtable", help="tabulate W on horizontal lines and write a cache file")
    _add_solver_flags(p)
    p.add_argument("--lines", default="0,pi,-pi", help="imaginary parts, e.g. '0,pi,-pi'")
    p.add_argument("--range", type=float, default=60.0, help="half-width of the tabulated range")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_wtable)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
