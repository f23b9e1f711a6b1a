"""Command-line front end.

Exit codes: 0 on success, 2 for usage errors, 3 when a computation raises
one of the package's errors (its class name is printed).
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import circle, mapcore, rays, render, rotsets
from .errors import BlaschkeError

SUBCOMMANDS = ["classify", "critical", "fixed", "rotnum", "tongues", "julia",
               "rays", "biaccess", "rotset", "interval", "words"]


class UsageError(Exception):
    pass


@dataclass
class Invocation:
    subcommand: str
    options: Dict[str, Any]


@dataclass
class RunReport:
    subcommand: str
    wall_time: float
    result: Any = None
    outputs: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    exit_code: int = 0


# -- value parsers -----------------------------------------------------------

def _complex(text):
    try:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}")


def _pair(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _res(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"resolution must be positive, got {text!r}")
    return w, h


def _viewport(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        vals = []
    if len(vals) != 4 or not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise argparse.ArgumentTypeError(f"expected XMIN,XMAX,YMIN,YMAX, got {text!r}")
    return tuple(vals)


def _alpha(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number or 'auto', got {text!r}")


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 3/8, got {text!r}")


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


# -- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)

    def exit(self, status=0, message=None):
        if status:
            raise UsageError((message or "").strip())
        raise SystemExit(status)


DEFAULTS = {
    "json": False, "workers": 1, "x0": 0.0, "n_iter": 2000, "q_max": 4,
    "res": (64, 64), "budget": 500, "basin": "Infinity", "depth": 80,
    "viewport": (-2.0, 2.0, -2.0, 2.0),
}


def _build_parser():
    top = _Parser(prog="blaschke", description="Dynamics of the Blaschke family "
                  "B_a(z) = z^(d+1) ((z - a)/(1 - conj(a) z))^d.")
    sub = top.add_subparsers(dest="subcommand", parser_class=_Parser)

    def new(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="file of key=value lines; explicit flags win")
        p.add_argument("--json", action="store_true", default=None,
                       help="machine JSON on standard output")
        return p

    def params(p):
        p.add_argument("--d", type=_positive)
        p.add_argument("--a", type=_complex, help="complex parameter RE,IM")
        p.add_argument("--r", type=float)
        p.add_argument("--alpha", type=_alpha, help="number in the fundamental domain, or 'auto'")
        p.add_argument("--p", type=int)
        p.add_argument("--q", type=_positive)

    p = new("classify", "region and connectivity verdict")
    params(p)
    p = new("critical", "critical points and critical angles")
    params(p)
    p = new("fixed", "the 2d+2 fixed points")
    params(p)
    p = new("rotnum", "rotation number and rotation interval")
    params(p)
    p.add_argument("--x0", type=float)
    p.add_argument("--n-iter", type=_positive)
    p.add_argument("--q-max", type=int)
    p = new("tongues", "Arnold tongue scan (CSV)")
    p.add_argument("--d", type=_positive)
    p.add_argument("--r-range", type=_pair)
    p.add_argument("--alpha-range", type=_pair)
    p.add_argument("--res", type=_res, help="N_ALPHAxN_R")
    p.add_argument("--q-max", type=int)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out")
    p.add_argument("--json-out")
    p = new("julia", "dynamical plane raster (P6)")
    params(p)
    p.add_argument("--viewport", type=_viewport)
    p.add_argument("--res", type=_res, help="WIDTHxHEIGHT")
    p.add_argument("--budget", type=_positive)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out")
    p = new("rays", "trace a Böttcher ray (CSV)")
    params(p)
    p.add_argument("--basin", choices=["Infinity", "Zero"])
    p.add_argument("--angle", type=_fraction)
    p.add_argument("--depth", type=_positive)
    p.add_argument("--out")
    p = new("biaccess", "verify a bi-accessible circle cycle")
    params(p)
    p.add_argument("--depth", type=_positive)
    p = new("rotset", "cycles of m_n, or Goldberg realisation with --delta")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=_positive)
    p.add_argument("--p", type=int)
    p.add_argument("--delta", help="comma separated rationals")
    p = new("interval", "itinerary interval around the sector cycle")
    p.add_argument("--d", type=_positive)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=_positive)
    p = new("words", "admissible word classification")
    p.add_argument("--d", type=_positive)
    p.add_argument("--word", help="symbols like 0_,2,1 (trailing _ = underlined)")
    p.add_argument("--shift", action="store_true", default=None)
    return top, sub


def _merge_config(ns, subparser, path):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}")
    actions = {a.dest: a for a in subparser._actions}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config line {n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        dest = key.lstrip("-").replace("-", "_")
        act = actions.get(dest)
        if act is None or dest in ("config", "help"):
            raise UsageError(f"--config line {n}: unknown key {key!r}")
        if getattr(ns, dest) is not None:
            continue  # explicit flag wins
        if act.nargs == 0:
            value = val.lower() in ("1", "true", "yes", "on")
        else:
            try:
                value = act.type(val) if act.type else val
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"--config {key}: {exc}")
            if act.choices and value not in act.choices:
                raise UsageError(f"--config {key}: invalid choice {val!r}")
        setattr(ns, dest, value)


def _attach_negative_values(argv):
    # "--viewport -2,2,-2,2" would otherwise read the value as a flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None
                and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_invocation(argv: List[str]) -> Invocation:
    top, sub = _build_parser()
    ns = top.parse_args(_attach_negative_values(list(argv)))
    if ns.subcommand is None:
        raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    if ns.config:
        _merge_config(ns, sub.choices[ns.subcommand], ns.config)
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "config")}
    for k, v in DEFAULTS.items():
        if k in opts and opts[k] is None:
            opts[k] = v
    _validate(ns.subcommand, opts)
    return Invocation(ns.subcommand, opts)


def _need(opts, *names):
    for n in names:
        if opts.get(n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def _validate(cmd, o):
    if cmd in ("classify", "critical", "fixed", "rotnum", "julia", "rays", "biaccess"):
        _need(o, "d")
        if o["a"] is not None and (o["r"] is not None or o["alpha"] is not None):
            raise UsageError("--a excludes --r/--alpha")
        if o["a"] is None:
            _need(o, "r", "alpha")
            if o["r"] < 0:
                raise UsageError("--r must be >= 0")
            if o["alpha"] == "auto":
                _need(o, "p", "q")
                if o["r"] <= 1:
                    raise UsageError("--alpha auto needs --r > 1")
            else:
                half = 1.0 / (4 * o["d"])
                if not -half < o["alpha"] <= half:
                    raise UsageError(f"--alpha must lie in (-{half:g}, {half:g}]")
    if cmd == "biaccess":
        _need(o, "p", "q")
    if cmd == "rotnum" and o["q_max"] < 0:
        raise UsageError("--q-max must be >= 0")
    if cmd == "tongues":
        _need(o, "d", "r_range", "alpha_range")
        if o["r_range"][0] <= 1:
            raise UsageError("--r-range must lie in (1, inf)")
        half = 1.0 / (4 * o["d"])
        if o["alpha_range"][0] < -half or o["alpha_range"][1] > half:
            raise UsageError(f"--alpha-range must lie in [-{half:g}, {half:g}]")
        if o["q_max"] < 0:
            raise UsageError("--q-max must be >= 0")
    if cmd == "julia":
        _need(o, "out")
        if o["budget"] < 100:
            raise UsageError("--budget must be >= 100")
    if cmd == "rays":
        _need(o, "angle")
    if cmd == "rotset":
        _need(o, "n", "q")
        if o["n"] < 2:
            raise UsageError("--n must be >= 2")
        if o["delta"] is not None:
            _need(o, "p")
    if cmd == "interval":
        _need(o, "d", "p", "q")
        if not (0 < o["p"] < o["q"] and math.gcd(o["p"], o["q"]) == 1):
            raise UsageError("--p/--q must be a reduced fraction in (0, 1)")
    if cmd == "words":
        _need(o, "d", "word")


# -- output ------------------------------------------------------------------

def dumps(obj, indent=0) -> str:
    """JSON with keys in insertion order and floats at 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent)
    if isinstance(obj, Fraction):
        return dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, str):
        import json
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [inner + dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _pt(z):
    return None if mapcore.is_infinite(z) else [z.real, z.imag]


def _params(o, report) -> mapcore.MapParams:
    d = o["d"]
    if o["a"] is not None:
        return mapcore.MapParams(d, o["a"])
    alpha = o["alpha"]
    if alpha == "auto":
        alpha = circle.find_superattracting_alpha(d, o["r"], o["p"], o["q"])
        res = circle.superattracting_residual(d, o["r"], alpha, o["p"], o["q"])
        report.warnings.append(f"alpha auto-solved: {alpha:.17g} (residual {res:.3g})")
    return mapcore.MapParams.from_polar(d, o["r"], alpha)


def _param_json(P):
    return {"d": P.d, "a": [P.a.real, P.a.imag], "r": P.r, "alpha": P.alpha}


def _estimate_json(e):
    return {"value": e.value, "lift_value": e.lift_value, "error_bound": e.error_bound,
            "rational_lock": e.rational_lock}


def _cmd_classify(o, rep):
    P = _params(o, rep)
    region = mapcore.classify_region(P)
    conn = mapcore.connectivity_verdict(P)
    return {**_param_json(P), "region": region.value, "degree": P.degree,
            "connectivity": conn.verdict.value,
            "rotation": None if conn.rotation is None else _estimate_json(conn.rotation),
            "notes": conn.notes}


def _cmd_critical(o, rep):
    P = _params(o, rep)
    cs = mapcore.critical_set(P)
    out = {**_param_json(P),
           "fixed_critical": [{"point": _pt(z), "multiplicity": m} for z, m in cs.fixed_critical],
           "free": [_pt(z) for z in cs.free],
           "cocritical": None if cs.cocritical is None else [_pt(z) for z in cs.cocritical]}
    if P.r > 1:
        out["critical_angles"] = circle.critical_angles(circle.CircleLift.from_params(P))
    return out


def _cmd_fixed(o, rep):
    P = _params(o, rep)
    return {**_param_json(P), "fixed_points": [f.to_json() for f in mapcore.fixed_points(P)]}


def _cmd_rotnum(o, rep):
    P = _params(o, rep)
    L = circle.CircleLift.from_params(P)
    est = circle.rotation_number(L, o["x0"], o["n_iter"], o["q_max"])
    iv = circle.rotation_interval(L, n_iter=max(o["n_iter"], 256), q_max=o["q_max"])
    return {**_param_json(P), "estimate": _estimate_json(est),
            "interval": [_estimate_json(iv.lo), _estimate_json(iv.hi)]}


def _cmd_tongues(o, rep):
    n_alpha, n_r = o["res"]
    grid = render.scan_tongues(o["d"], o["r_range"], o["alpha_range"], (n_r, n_alpha),
                               o["q_max"], workers=o["workers"])
    text = grid.to_csv()
    if o["out"]:
        with open(o["out"], "w", newline="") as fh:
            fh.write(text)
        rep.outputs.append(o["out"])
    else:
        sys.stdout.write(text)
    if o["json_out"]:
        with open(o["json_out"], "w") as fh:
            fh.write(grid.to_json() + "\n")
        rep.outputs.append(o["json_out"])
    inconclusive = sum(c.adjacent == "inconclusive" for c in grid.cells)
    if inconclusive:
        rep.warnings.append(f"{inconclusive} cells with inconclusive adjacency")
    locked = sum(c.lock is not None for c in grid.cells)
    return {"cells": len(grid.cells), "locked": locked, "inconclusive": inconclusive}


def _cmd_julia(o, rep):
    P = _params(o, rep)
    w, h = o["res"]
    vp = render.Viewport(*o["viewport"], w, h)
    raster = render.render_dynamical_plane(P, vp, o["budget"], workers=o["workers"])
    render.write_ppm(raster, o["out"])
    rep.outputs.append(o["out"])
    return {**_param_json(P), "counts": raster.counts(),
            "cycles": [{"p": c.p, "q": c.q, "angles": c.angles, "multiplier": c.multiplier}
                       for c in raster.cycles]}


def _cmd_rays(o, rep):
    P = _params(o, rep)
    basin = rays.Basin(o["basin"])
    ray = rays.trace_ray(P, basin, o["angle"], o["depth"])
    if o["out"]:
        with open(o["out"], "w", newline="") as fh:
            fh.write(ray.to_csv())
        rep.outputs.append(o["out"])
    return {**_param_json(P), "basin": basin.value, "angle": ray.angle,
            "status": ray.status.value, "samples": len(ray.points),
            "landing": None if ray.landing is None else _pt(ray.landing)}


def _cmd_biaccess(o, rep):
    P = _params(o, rep)
    report = rays.verify_biaccessible(P, o["p"], o["q"], o["depth"])
    return report.to_json()


def _cmd_rotset(o, rep):
    n, q = o["n"], o["q"]
    if o["delta"] is not None:
        try:
            delta = [Fraction(t) for t in o["delta"].split(",")]
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--delta: cannot parse {o['delta']!r}")
        cyc = rotsets.goldberg_realize(n, o["p"], q, delta)
        cycles = [cyc]
    else:
        cycles = rotsets.enumerate_cycles(n, q)
    if not o["json"]:
        lines = ["points,rotation,deployment"]
        for c in cycles:
            j = c.to_json()
            lines.append(f"{' '.join(j['points'])},{j['rotation']},{' '.join(j['deployment'])}")
        sys.stdout.write("\n".join(lines) + "\n")
    return {"n": n, "q": q, "cycles": [c.to_json() for c in cycles]}


def _cmd_interval(o, rep):
    return rotsets.gen_interval(o["d"], o["p"], o["q"]).to_json()


def _cmd_words(o, rep):
    d = o["d"]
    try:
        w = rotsets.parse_word(o["word"])
    except ValueError:
        raise UsageError(f"--word: cannot parse {o['word']!r}")
    cls = rotsets.word_classify(d, w)
    out = {"d": d, "word": rotsets.format_word(w), "admissible": cls.admissible,
           "in_S": cls.in_S, "in_S0": cls.in_S0, "in_S2": cls.in_S2}
    if o["shift"]:
        out["shift"] = rotsets.format_word(rotsets.word_shift(d, w))
    return out


_DISPATCH = {
    "classify": _cmd_classify, "critical": _cmd_critical, "fixed": _cmd_fixed,
    "rotnum": _cmd_rotnum, "tongues": _cmd_tongues, "julia": _cmd_julia,
    "rays": _cmd_rays, "biaccess": _cmd_biaccess, "rotset": _cmd_rotset,
    "interval": _cmd_interval, "words": _cmd_words,
}


def execute(inv: Invocation) -> RunReport:
    rep = RunReport(inv.subcommand, 0.0)
    t0 = time.perf_counter()
    rep.result = _DISPATCH[inv.subcommand](inv.options, rep)
    rep.wall_time = time.perf_counter() - t0
    return rep


def _human(obj, prefix=""):
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, dict) or (isinstance(v, list) and v and isinstance(v[0], dict)):
                lines.append(f"{prefix}{k}:")
                lines += _human(v, prefix + "  ")
            else:
                lines.append(f"{prefix}{k}: {dumps(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            lines.append(f"{prefix}[{i}]")
            lines += _human(v, prefix + "  ")
    else:
        lines.append(prefix + dumps(obj))
    return lines


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        inv = parse_invocation(argv)
    except UsageError as exc:
        msg = " ".join(str(exc).split())
        print(f"usage error: {msg}", file=sys.stderr)
        return 2
    try:
        rep = execute(inv)
    except UsageError as exc:
        print(f"usage error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except BlaschkeError as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"usage error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    if inv.options.get("json"):
        doc = {"subcommand": rep.subcommand, "result": rep.result,
               "outputs": rep.outputs, "warnings": rep.warnings}
        sys.stdout.write(dumps(doc) + "\n")
    elif inv.subcommand not in ("tongues", "rotset") or rep.outputs:
        out = _human(rep.result)
        out += [f"output: {p}" for p in rep.outputs]
        out += [f"warning: {w}" for w in rep.warnings]
        out.append(f"wall time: {rep.wall_time:.3f} s")
        sys.stdout.write("\n".join(out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
