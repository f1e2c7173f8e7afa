"""Command line front end: ``vardecomp synth|decompose|eval``.

Machine-readable JSON goes to stdout only; logs go to stderr.  Exit
codes: 0 success, 1 parameter/validation failure, 2 I/O failure,
3 the decomposition hit its round cap without converging (outputs are
still written in that case).

``synth`` writes the reference components u0/v0/w0/f0 of a phantom
(raw-float plus 8-bit previews) and an echo of the generator spec.
``decompose`` runs one model on an input image and writes u, v (and w
for three-part models) plus a versioned JSON report.  Signed components
are previewed with a +128 display offset, flagged in the report.
``eval`` scores components against references, or runs the residue
amplitude sweep with ``--sweep``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import contourlet as ct
from . import evaluation as ev
from . import image as im
from . import models, tv

log = logging.getLogger("vardecomp")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NO_CONVERGENCE = 3

MODELS = ("rof", "bv-g", "bv-e", "bv-h1", "bv-g-g", "bv-g-e", "bv-g-co")

#: Published benchmark parameter sets, selectable with --paper-preset.
PRESETS = {
    "JG": {"model": "bv-g-g", "lam": 10.0, "mu1": 1000.0, "mu2": 100.0, "window": 3},
    "AC2": {"model": "bv-g-e", "lam": 1.0, "mu": 500.0, "delta": 9.4},
    "Co": {"model": "bv-g-co", "lam": 1.0, "mu": 500.0, "delta": 23.5},
}


class _CLIError(Exception):
    """Argument errors raised by the parser, mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CLIError(message)


def _parse_dirs(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise _CLIError(f"bad --dirs value {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vardecomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write phantom reference components")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--width", type=int, default=256)
    p_synth.add_argument("--height", type=int, default=256)
    p_synth.add_argument("--sigma", type=float, default=20.0)
    p_synth.add_argument("--seed", type=int, default=ev.STANDARD_SEED)

    p_dec = sub.add_parser("decompose", help="run one decomposition model")
    p_dec.add_argument("--model", choices=MODELS)
    p_dec.add_argument("--paper-preset", choices=sorted(PRESETS), dest="preset",
                       help="published benchmark parameter set (implies the model)")
    p_dec.add_argument("--input", required=True, help="input image (PGM or raw-float)")
    p_dec.add_argument("--out", required=True, help="output directory")
    p_dec.add_argument("--lambda", dest="lam", type=float)
    p_dec.add_argument("--mu", type=float)
    p_dec.add_argument("--mu1", type=float)
    p_dec.add_argument("--mu2", type=float)
    p_dec.add_argument("--delta", type=float)
    p_dec.add_argument("--kappa-t", dest="kappa_t", type=float,
                       help="with --sigma, sets delta = 2.35*kappa_t*sigma")
    p_dec.add_argument("--sigma", type=float)
    p_dec.add_argument("--window", type=int)
    p_dec.add_argument("--kappa", type=float, default=1e-2)
    p_dec.add_argument("--tau", type=float, default=0.124)
    p_dec.add_argument("--n-iter", dest="n_iter", type=int, default=20)
    p_dec.add_argument("--proj-tol", dest="proj_tol", type=float, default=1e-4)
    p_dec.add_argument("--epsilon", type=float, default=0.5)
    p_dec.add_argument("--n-step", dest="n_step", type=int, default=50)
    p_dec.add_argument("--levels", type=int, default=3)
    p_dec.add_argument("--dirs", type=_parse_dirs, default=ct.DEFAULT_DIRS,
                       help="orientation counts per level, coarse to fine (e.g. 8,8,4)")
    p_dec.add_argument("--boundary", choices=("neumann", "periodic"), default="neumann")

    p_eval = sub.add_parser("eval", help="score components against references")
    p_eval.add_argument("--dec", help="directory with u/v[/w] raw-float components")
    p_eval.add_argument("--ref", help="directory with u0/v0/w0 references (synth output)")
    p_eval.add_argument("--u"), p_eval.add_argument("--v"), p_eval.add_argument("--w")
    p_eval.add_argument("--out", help="also write the report JSON here")
    p_eval.add_argument("--sweep", action="store_true",
                        help="residue amplitude sweep instead of component scoring")
    p_eval.add_argument("--d", dest="d_path",
                        help="structured reference for the sweep (default: phantom u0+v0)")
    p_eval.add_argument("--sigma", type=float, default=20.0)
    p_eval.add_argument("--seed", type=int, default=ev.STANDARD_SEED)
    p_eval.add_argument("--amplitudes",
                        default=",".join(str(a) for a in ev.SWEEP_AMPLITUDES))
    p_eval.add_argument("--jobs", type=int, default=1)
    p_eval.add_argument("--csv", dest="csv_path", help="write the sweep as CSV")
    return parser


def _write_component(arr, out_dir: Path, name: str, signed: bool) -> dict:
    """Write raw-float plus an 8-bit preview; signed data gets a +128 offset."""
    raw = out_dir / f"{name}.rawf"
    pgm = out_dir / f"{name}.pgm"
    im.write_rawfloat(arr, raw)
    im.write_pgm(arr + im.DISPLAY_OFFSET if signed else arr, pgm)
    return {"rawfloat": raw.name, "preview": pgm.name,
            "display_mapping": "offset128" if signed else "none"}


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_synth(args) -> int:
    if args.width < 16 or args.height < 16:
        raise ValueError("phantom must be at least 16x16")
    spec = ev.standard_phantom_spec(seed=args.seed, sigma=args.sigma)
    if (args.width, args.height) != (256, 256):
        spec = dataclasses.replace(spec, width=args.width, height=args.height,
                                   shapes=(), textures=())
        log.warning("non-default size: shapes/textures omitted, background+noise only")
    phantom = ev.synth_phantom(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "u0": _write_component(phantom.u0, out_dir, "u0", signed=False),
        "v0": _write_component(phantom.v0, out_dir, "v0", signed=True),
        "w0": _write_component(phantom.w0, out_dir, "w0", signed=True),
        "f0": _write_component(phantom.f0, out_dir, "f0", signed=False),
    }
    echo = {
        "schema_version": SCHEMA_VERSION,
        "spec": json.loads(json.dumps(dataclasses.asdict(spec))),
        "files": files,
    }
    (out_dir / "phantom.json").write_text(json.dumps(echo, indent=2))
    log.info("wrote phantom components to %s", out_dir)
    _emit(echo)
    return EXIT_OK


def _require(args, names: list[str], model: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-").replace("lam", "lambda") for n in missing)
        raise ValueError(f"model {model} requires {flags}")


def _resolve_decompose_params(args) -> None:
    if args.preset:
        preset = PRESETS[args.preset]
        if args.model and args.model != preset["model"]:
            raise ValueError(
                f"--model {args.model} conflicts with preset {args.preset} ({preset['model']})"
            )
        args.model = preset["model"]
        for key, value in preset.items():
            if key != "model" and getattr(args, key) is None:
                setattr(args, key, value)
    if not args.model:
        raise ValueError("either --model or --paper-preset is required")
    if args.delta is None and args.kappa_t is not None:
        if args.sigma is None:
            raise ValueError("--kappa-t needs --sigma to derive delta")
        args.delta = models.noise_threshold(args.kappa_t, args.sigma)
    if args.window is None:
        args.window = 3


def cmd_decompose(args) -> int:
    _resolve_decompose_params(args)
    f = im.read_image(args.input)
    cfg = tv.ProjectorConfig(tau=args.tau, n_iter=args.n_iter, tol=args.proj_tol)
    stop = models.StoppingRule(epsilon=args.epsilon, n_step=args.n_step)
    model = args.model
    if model == "rof":
        _require(args, ["lam"], model)
        dec = models.rof(f, args.lam, cfg)
    elif model == "bv-g":
        _require(args, ["lam", "mu"], model)
        dec = models.decompose_bv_g(f, args.lam, args.mu, stop, cfg)
    elif model == "bv-e":
        _require(args, ["lam", "mu"], model)
        dec = models.decompose_bv_e(f, args.lam, args.mu, stop, cfg, args.levels)
    elif model == "bv-h1":
        _require(args, ["lam"], model)
        k_cfg = tv.ProjectorConfig(
            tau=min(args.tau, 0.99 / (8.0 * tv.NEG_LAPLACIAN_NORM)),
            n_iter=args.n_iter, tol=args.proj_tol)
        dec = models.decompose_bv_h1(f, args.lam, k_cfg, args.boundary)
    elif model == "bv-g-g":
        _require(args, ["lam", "mu1", "mu2"], model)
        dec = models.decompose_bv_g_g(
            f, args.lam, args.mu1, args.mu2, args.window, args.kappa, stop, cfg)
    elif model == "bv-g-e":
        _require(args, ["lam", "mu", "delta"], model)
        dec = models.decompose_bv_g_e(
            f, args.lam, args.mu, args.delta, stop, cfg, args.levels)
    else:
        _require(args, ["lam", "mu", "delta"], model)
        if len(args.dirs) != args.levels:
            raise ValueError(f"--dirs length {len(args.dirs)} != --levels {args.levels}")
        dec = models.decompose_bv_g_co(
            f, args.lam, args.mu, args.delta, stop, cfg, args.levels, args.dirs)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    v_part, w_part = dec.additive_parts()
    files = {
        "u": _write_component(dec.u, out_dir, "u", signed=False),
        "v": _write_component(v_part, out_dir, "v", signed=True),
    }
    if w_part is not None:
        files["w"] = _write_component(w_part, out_dir, "w", signed=True)
    report = {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "params": dict(
            dec.params,
            tau=cfg.tau, n_iter=cfg.n_iter, proj_tol=cfg.tol,
            epsilon=stop.epsilon, n_step=stop.n_step,
        ),
        "iterations": dec.iterations,
        "final_delta": dec.final_delta,
        "converged": dec.converged,
        "residual": dec.residual,
        "p_max": None if np.isnan(dec.p_max) else dec.p_max,
        "runtime_s": dec.runtime,
        "input": str(args.input),
        "components": files,
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2))
    _emit(report)
    if not dec.converged:
        log.warning("stopped at the round cap (delta=%.4g > epsilon=%.4g)",
                    dec.final_delta, stop.epsilon)
        return EXIT_NO_CONVERGENCE
    log.info("converged in %d rounds", dec.iterations)
    return EXIT_OK


def _component_paths(args) -> tuple[Path, Path, Path | None]:
    if args.dec:
        base = Path(args.dec)
        u, v = base / "u.rawf", base / "v.rawf"
        w = base / "w.rawf"
        w = w if w.exists() else None
    else:
        if not (args.u and args.v):
            raise ValueError("eval needs --dec or both --u and --v")
        u, v = Path(args.u), Path(args.v)
        w = Path(args.w) if args.w else None
    return u, v, w


def _sweep_table(rows: list[tuple[float, float]]) -> str:
    lines = [f"{'A':>6}  {'residue':>16}"]
    lines += [f"{a:>6.2f}  {metric:>16.2f}" for a, metric in rows]
    return "\n".join(lines)


def cmd_eval(args) -> int:
    if args.sweep:
        amplitudes = [float(tok) for tok in args.amplitudes.split(",") if tok]
        if args.d_path:
            d = im.read_image(args.d_path)
        else:
            phantom = ev.standard_phantom(seed=args.seed, sigma=0.0)
            d = phantom.u0 + phantom.v0
        rows = ev.residue_sweep(d, im.NoiseSpec(args.sigma, args.seed),
                                amplitudes, jobs=max(1, args.jobs))
        log.info("sweep table:\n%s", _sweep_table(rows))
        payload = {
            "schema_version": SCHEMA_VERSION,
            "sweep": [{"amplitude": a, "residue": metric} for a, metric in rows],
            "sigma": args.sigma,
            "seed": args.seed,
        }
        if args.csv_path:
            with open(args.csv_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["amplitude", "residue"])
                writer.writerows(rows)
        if args.out:
            Path(args.out).write_text(json.dumps(payload, indent=2))
        _emit(payload)
        return EXIT_OK

    if not args.ref:
        raise ValueError("eval needs --ref (a synth output directory)")
    ref = Path(args.ref)
    u0 = im.read_rawfloat(ref / "u0.rawf")
    v0 = im.read_rawfloat(ref / "v0.rawf")
    w0 = im.read_rawfloat(ref / "w0.rawf")
    sigma = 0.0 if not w0.any() else float(np.std(w0))
    spec = dataclasses.replace(ev.standard_phantom_spec(), sigma=sigma,
                               width=u0.shape[1], height=u0.shape[0],
                               shapes=(), textures=())
    phantom = ev.Phantom(u0=u0, v0=v0, w0=w0, f0=u0 + v0 + w0, spec=spec)

    u_path, v_path, w_path = _component_paths(args)
    params = {}
    if args.dec and (Path(args.dec) / "report.json").exists():
        params = json.loads((Path(args.dec) / "report.json").read_text()).get("params", {})
    dec = models.Decomposition(
        u=im.read_rawfloat(u_path), v=im.read_rawfloat(v_path),
        w=im.read_rawfloat(w_path) if w_path else None,
        iterations=0, final_delta=0.0, converged=True, residual=0.0,
        runtime=0.0, p_max=float("nan"), params=params)
    report = ev.evaluate(dec, phantom)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "err_u": report.err_u,
        "err_v": report.err_v,
        "residue": report.residue,
        "runtime_s": report.runtime,
        "params": report.params,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2))
    _emit(payload)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "decompose":
            return cmd_decompose(args)
        return cmd_eval(args)
    except (_CLIError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except (im.FormatError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
