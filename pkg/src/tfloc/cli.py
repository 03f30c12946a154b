"""``tfloc`` command line.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 degenerate fit.
JSON summaries carry ``"schema": 1``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import deficit_lab as dl
from .errors import DegenerateFit, InputError, NumericalError, TflocError
from .hs_engine import hs_norm_sq_grid, hs_norm_sq_radial
from .hyperbolic import cauchy_kernel, hyp_ball
from .phase_space import Ball, GridSpec, RadialRegion, rasterize, read_region, write_region
from .rearrange import Intervals
from .spectral import spectrum
from .stft import default_grid, gaussian_signal, lieb_check, random_hermite_signal, spectrogram

SCHEMA = 1


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers -----------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    """``"a,b,c"`` or ``"lo:hi:n"`` (``n`` log-spaced points)."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if not (0 < lo < hi and n >= 1):
                raise ValueError
            return [float(v) for v in np.geomspace(lo, hi, n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b,c' or 'lo:hi:n', got {text!r}") from None


def _lin_list(text: str) -> list[float]:
    """``"a,b,c"`` or ``"lo:hi:n"`` (``n`` evenly spaced points)."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b,c' or 'lo:hi:n', got {text!r}") from None


def _intervals(text: str) -> Intervals:
    try:
        pairs = [tuple(float(x) for x in part.split(":")) for part in text.split(",") if part.strip()]
        return Intervals(tuple(pairs))
    except (ValueError, InputError) as exc:
        raise argparse.ArgumentTypeError(f"bad interval list {text!r}: {exc}") from None


def _positive(name, value, upper=None):
    if value is None:
        return
    if not (value > 0 and math.isfinite(value)) or (upper is not None and value > upper):
        rng = f"(0, {upper}]" if upper is not None else "(0, inf)"
        raise InputError(f"--{name} must lie in {rng}, got {value}")


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return dl.dumps_json({"schema": SCHEMA, **obj})


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _region_from_args(args):
    """A RadialRegion (``--ball``) or GridRegion (``--region``)."""
    if getattr(args, "region", None):
        return read_region(args.region)
    if getattr(args, "ball", None) is not None:
        _positive("ball", args.ball)
        return RadialRegion.ball(args.ball, 2 * args.d)
    raise InputError("give --ball R or --region FILE")


# -- commands -----------------------------------------------------------------------------


def cmd_hs(args):
    region = _region_from_args(args)
    if isinstance(region, RadialRegion):
        res = hs_norm_sq_radial(region)
    else:
        res = hs_norm_sq_grid(region, method=args.method)
    out = res.as_dict()
    out["measure"] = region.measure
    _emit(_json(out), args.json)


def cmd_deficit(args):
    if args.eps is not None:
        region = dl.family_eps(args.eps, args.d)
    else:
        region = _region_from_args(args)
    rep = dl.deficit(region)
    _emit(_json(rep.as_dict()), args.json)


def cmd_sweep(args):
    fam = args.family
    if fam == "eps":
        res = dl.sweep_eps(args.eps or _float_list("0.02:0.2:8"), args.d)
    elif fam == "dilate":
        if args.d != 1:
            raise InputError("the dilation family is planar (d = 1)")
        res = dl.sweep_dilate(r_values=args.r or [0.1, 0.15, 0.2, 0.3, 0.4, 0.5])
    elif fam == "dumbbell":
        if args.d != 1:
            raise InputError("the dumbbell family is planar (d = 1)")
        res = dl.sweep_dumbbell(args.r or [2, 3, 4, 6])
    elif fam == "conj2":
        return _sweep_conj2(args)
    else:
        raise InputError(f"unknown family {fam!r}; choose eps, dilate, dumbbell or conj2")
    _write_sweep(res.to_csv(), res.summary(), args)


def _write_sweep(csv_text, summary, args):
    _emit(csv_text, args.csv)
    text = dl.dumps_json(summary)
    if args.json:
        _emit(text, args.json)
    elif args.csv not in (None, "-"):
        sys.stdout.write(text)
    else:
        print(f"fit: slope={summary['slope']!r} residual={summary['residual']!r}", file=sys.stderr)


def _sweep_conj2(args):
    omega = args.intervals or Intervals(((0.0, 1.0), (3.0, 4.0)))
    bs = args.b or _float_list(f"{0.05 * omega.measure}:{0.6 * omega.measure}:6")
    reps = [dl.conjecture2_probe(omega, b, args.delta) for b in bs]
    rows = [(r.b, r.measure, r.lhs_deficit, r.rhs_scale, r.ratio, r.alpha) for r in reps]
    csv_text = _csv(("b", "measure", "lhs_deficit", "rhs_scale", "ratio", "alpha"), rows)
    slope, icpt, resid, used = dl.fit_loglog([r.b for r in reps], [r.lhs_deficit for r in reps])
    ratios = [r.ratio for r in reps]
    summary = {
        "schema": SCHEMA,
        "family": "conj2",
        "x": "b",
        "slope": slope,
        "intercept": icpt,
        "residual": resid,
        "points": len(reps),
        "used_points": used,
        "ratio_min": min(ratios),
        "ratio_max": max(ratios),
        "delta": args.delta,
    }
    _write_sweep(csv_text, summary, args)


def cmd_spectrum(args):
    if args.region:
        region = read_region(args.region)
    elif args.ball is not None:
        _positive("ball", args.ball, 5.0)
        _positive("h", args.h, 1.0)
        spec = GridSpec.centered(args.ball + args.h, args.h)
        region = rasterize(Ball((0.0, 0.0), args.ball), spec)
    else:
        raise InputError("give --ball R or --region FILE")
    res = spectrum(region, cap=args.cap)
    rows = list(enumerate(res.eigenvalues.tolist()))
    _emit(_csv(("index", "eigenvalue"), rows), args.csv)
    if args.json:
        _emit(_json(res.as_dict()), args.json)


def cmd_stft(args):
    _positive("h", args.h, 0.5)
    if args.demo == "gaussian":
        f = gaussian_signal()
    else:
        f = random_hermite_signal(np.random.default_rng(args.seed))
    spec = default_grid(f, args.h)
    if spec.nx > 300 or spec.ny > 300:
        raise InputError(f"spectrogram grid {spec.nx}x{spec.ny} exceeds 300x300; increase --h")
    S = spectrogram(f, spec)
    out = {"signal_norm_sq": f.norm**2, "spectrogram_mass": S.mass, "h": args.h, "demo": args.demo}
    if args.lieb is not None:
        out["lieb"] = lieb_check(f, args.lieb, spec) | {"p": args.lieb}
    if args.csv:
        _emit(S.to_csv(), args.csv)
    _emit(_json(out), args.json if args.csv in (None, "-") or args.json else None)


def cmd_hyper(args):
    _positive("beta", args.beta)
    if args.kernel:
        ts = args.t or _lin_list("0:10:101")
        if any(t < 0 for t in ts):
            raise InputError("kernel arguments must be nonnegative")
        vals = cauchy_kernel(np.asarray(ts), args.beta)
        _emit(_csv(("t", "rho"), zip(ts, np.atleast_1d(vals).tolist())), args.csv)
    elif args.ball is not None:
        _positive("ball", args.ball)
        _emit(_json(hyp_ball(args.ball).as_dict()), args.json)
    else:
        raise InputError("give --kernel or --ball R")


def cmd_region(args):
    _positive("ball", args.ball)
    _positive("h", args.h, 1.0)
    pad = args.margin
    spec = GridSpec.centered(args.ball + pad, args.h)
    write_region(args.out, rasterize(Ball((0.0, 0.0), args.ball), spec))
    _emit(_json({"path": str(args.out), "nx": spec.nx, "ny": spec.ny, "h": spec.h}), None)


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfloc", description="Localization-operator norms, deficits and spectra.")
    p.add_argument("--config", help="JSON file with option values for the chosen command")
    p.add_argument("--seed", type=int, default=42, help="seed for random corpora (default 42)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("hs", help="Hilbert-Schmidt norm of L_Omega")
    s.add_argument("--ball", type=float)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--region")
    s.add_argument("--method", choices=("convolution", "direct", "fft"), default="convolution")
    s.add_argument("--json")
    s.set_defaults(func=cmd_hs)

    s = sub.add_parser("deficit", help="rearrangement deficit of one set")
    s.add_argument("--ball", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--region")
    s.add_argument("--json")
    s.set_defaults(func=cmd_deficit)

    s = sub.add_parser("sweep", help="family sweep with log-log fit")
    s.add_argument("--family", required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--eps", type=_float_list)
    s.add_argument("--r", type=_float_list)
    s.add_argument("--b", type=_float_list)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--intervals", type=_intervals)
    s.add_argument("--csv")
    s.add_argument("--json")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("spectrum", help="eigenvalues of discretized L_Omega")
    s.add_argument("--ball", type=float)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--region")
    s.add_argument("--cap", type=int, default=6000)
    s.add_argument("--csv")
    s.add_argument("--json")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("stft", help="Gaussian STFT demos and Lieb check")
    s.add_argument("--demo", choices=("gaussian", "hermite"), default="gaussian")
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--lieb", type=float)
    s.add_argument("--csv")
    s.add_argument("--json")
    s.set_defaults(func=cmd_stft)

    s = sub.add_parser("hyper", help="Cauchy-wavelet kernel and hyperbolic balls")
    s.add_argument("--kernel", action="store_true")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--t", type=_lin_list)
    s.add_argument("--ball", type=float)
    s.add_argument("--csv")
    s.add_argument("--json")
    s.set_defaults(func=cmd_hyper)

    s = sub.add_parser("region", help="write a rasterized disc as an RGN1 file")
    s.add_argument("--ball", type=float, required=True)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--margin", type=float, default=3.3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_region)
    return p


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def _apply_config(parser, argv, args):
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"config {args.config} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    sp = _subparser(parser, args.command)
    allowed = {a.dest: a for a in sp._actions if a.dest not in ("help", "func")}
    unknown = sorted(set(cfg) - set(allowed) - {"seed"})
    if unknown:
        raise InputError(f"unknown config keys for '{args.command}': {', '.join(unknown)}")
    defaults = {}
    for key, val in cfg.items():
        if key == "seed":
            parser.set_defaults(seed=int(val))
            continue
        act = allowed[key]
        if act.type is not None and isinstance(val, str):
            val = act.type(val)
        elif act.type in (_float_list, _lin_list) and isinstance(val, list):
            val = [float(v) for v in val]
        elif act.type is not None and not isinstance(val, (list, bool)):
            val = act.type(val)
        if act.choices is not None and val not in act.choices:
            raise InputError(f"config value {key}={val!r} not in {list(act.choices)}")
        defaults[key] = val
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return 2
        if args.config:
            args = _apply_config(parser, argv, args)
        if getattr(args, "d", 1) < 1:
            raise InputError("--d must be a positive integer")
        args.func(args)
        return 0
    except DegenerateFit as exc:
        print(f"tfloc: degenerate fit: {exc}", file=sys.stderr)
        return 4
    except (InputError, argparse.ArgumentTypeError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"tfloc: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"tfloc: numerical failure: {exc}", file=sys.stderr)
        return 3
    except TflocError as exc:
        print(f"tfloc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
