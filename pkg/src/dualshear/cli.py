"""Command line entry point ``dualshear``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, load_config
from .io import dump_json, read_coefficients, read_signal, write_bank, write_coefficients, write_signal


def _manifest(cfg: Config, command: str, **extra) -> dict:
    return dict(extra, command=command, config=asdict(cfg), config_hash=cfg.hash(),
                version=__version__)


def _emit(obj, out: str | None) -> None:
    text = dump_json(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fit_grid(cfg: Config, f: np.ndarray) -> Config:
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise SystemExit(f"signal must be square, got shape {f.shape}")
    return replace(cfg, N=int(f.shape[0]))


def cmd_gen_cartoon(args) -> int:
    from .cartoon import default_spec, format_spec, generate, load_spec

    spec = default_spec() if args.spec == "default" else load_spec(args.spec)
    f = generate(spec, args.N)
    text = format_spec(spec)
    meta = {"N": args.N, "spec": text, "spec_hash": hashlib.sha256(text.encode()).hexdigest()}
    write_signal(args.out, f, meta)
    if str(args.out).lower().endswith(".pgm"):
        Path(str(args.out) + ".json").write_text(dump_json(meta))
    return 0


def cmd_analyze(args) -> int:
    from .system import analyze

    f = read_signal(args.img)
    cfg = _fit_grid(load_config(args.config), f)
    sys_ = cfg.system()
    table = analyze(f, sys_)
    write_coefficients(args.coeff_dir, table, _manifest(cfg, "analyze", source=str(args.img),
                                                         count=table.count))
    return 0


def cmd_synth(args) -> int:
    from .system import synthesize_dual

    table, manifest = read_coefficients(args.coeff_dir)
    cfg = Config(**manifest["config"])
    g = synthesize_dual(table, cfg.system())
    write_signal(args.out, g, {"config_hash": cfg.hash(), "source": str(args.coeff_dir)})
    return 0


def cmd_frame_report(args) -> int:
    from .filters import frame_multiplier, partition_identity_residual

    cfg = load_config(args.config)
    sys_ = cfg.system()
    rep = frame_multiplier(sys_.bank)
    res = partition_identity_residual(sys_.bank)
    if args.bank_dir:
        write_bank(args.bank_dir, sys_.bank, rep)
    _emit(_manifest(cfg, "frame-report", A_hat=rep.A_hat, B_hat=rep.B_hat, ratio=rep.ratio,
                    lower_bound_cert=rep.lower_bound_cert, delta_phi=rep.delta_phi,
                    delta_g=rep.delta_g, partition_residual=res,
                    shears=len(sys_.shears), jmax=sys_.bank.jmax), args.out)
    return 0


def cmd_onb_check(args) -> int:
    from .generators import MirrorFilter
    from .grid import FourierGrid
    from .index import ShearParam
    from .onb import gram_check, parseval_ratio

    cfg = load_config(args.config)
    grid = FourierGrid(cfg.N, cfg.coarse_log2)
    cmf = MirrorFilter.daubechies(cfg.K)
    rng = np.random.default_rng(cfg.seed)
    f = rng.standard_normal(grid.shape)
    rows = []
    for value in ("0", "1/2", "1"):
        s = ShearParam.from_value(value)
        if s.j0 > grid.finest_scale:
            continue
        off, diag, count = gram_check(s, grid, cmf, J=min(s.j0 + 1, grid.finest_scale),
                                      M=args.M, P=args.P)
        gap = 1.0 - parseval_ratio(f, s, grid, cmf)
        rows.append({"s": value, "off_diagonal": off, "diagonal": diag, "elements": count,
                     "parseval_gap": gap, "ok": max(off, diag, abs(gap)) <= cfg.gram_tol})
    _emit(_manifest(cfg, "onb-check", results=rows), args.out)
    return 0 if all(r["ok"] for r in rows) else 1


def cmd_nterm(args) -> int:
    from .bench import nterm_curve, rate_fit, tensor_curve

    f = read_signal(args.img)
    cfg = _fit_grid(load_config(args.config), f)
    sys_ = cfg.system()
    budgets = sorted(set(args.budgets))
    curve = nterm_curve(f, budgets, sys_)
    base = tensor_curve(f, budgets, sys_)
    lines = ["N,shearlet_rel_err,tensor_rel_err"]
    lines += [f"{n},{e:.17e},{b:.17e}" for (n, e), (_, b) in zip(curve.points, base.points)]
    text = "\n".join(lines) + "\n"
    fits = {}
    for name, c in (("shearlet", curve), ("tensor", base)):
        try:
            fits[name] = asdict(rate_fit(c))
        except ValueError as exc:
            fits[name] = {"error": str(exc)}
    if args.out:
        Path(args.out).write_text(text)
        Path(str(args.out) + ".json").write_text(dump_json(
            _manifest(cfg, "nterm", source=str(args.img), budgets=budgets, fits=fits,
                      tie_break=curve.meta["tie_break"], norm=curve.meta["norm"])))
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(fits, sort_keys=True) + "\n")
    return 0


def cmd_decay_probe(args) -> int:
    from .bench import decay_probe

    f = read_signal(args.img)
    cfg = _fit_grid(load_config(args.config), f)
    rep = decay_probe(f, cfg.system(), p_range=(0, args.P))
    _emit(_manifest(cfg, "decay-probe", source=str(args.img), **asdict(rep)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualshear", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-cartoon", help="render a cartoon phantom")
    p.add_argument("spec", help="spec file, or 'default'")
    p.add_argument("out", help="output .pgm or raw float64 path")
    p.add_argument("--N", type=int, default=512)
    p.set_defaults(func=cmd_gen_cartoon)

    p = sub.add_parser("analyze", help="write frame coefficients of an image")
    p.add_argument("img")
    p.add_argument("coeff_dir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="dual-frame synthesis from a coefficient directory")
    p.add_argument("coeff_dir")
    p.add_argument("out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("frame-report", help="frame bounds, floors and partition residual")
    p.add_argument("config", nargs="?")
    p.add_argument("--bank-dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_frame_report)

    p = sub.add_parser("onb-check", help="Gram and Parseval checks of the bases Psi_s")
    p.add_argument("config", nargs="?")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--P", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_onb_check)

    p = sub.add_parser("nterm", help="N-term error curve (CSV) and rate fits")
    p.add_argument("img")
    p.add_argument("--budgets", type=int, nargs="+", default=[2 ** e for e in range(6, 15)])
    p.add_argument("--config")
    p.add_argument("--out", help="CSV path; fits go to <out>.json")
    p.set_defaults(func=cmd_nterm)

    p = sub.add_parser("decay-probe", help="coefficient maxima per scale and level")
    p.add_argument("img")
    p.add_argument("--config")
    p.add_argument("--P", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decay_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
