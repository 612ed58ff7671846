"""Command-line interface.

Every command accepts ``--config FILE`` with ``key = value`` lines (keys are
the long option names with dashes or underscores); flags given on the
command line override the file.  A run writes ``manifest.cfg`` into its
output directory, and that manifest is itself a valid config file.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .branch import compute_nu2
from .errors import ChiralMagError, FixedPointFailure
from .field import ModelParams, PhysicalParams, fft_workers, nondimensionalize
from .flow import SolverConfig, auto_lambda, classify_pattern, dominant_fraction, run
from .lattice import classify, make_lattice
from .linear import (
    KERNEL_DIM,
    RootSign,
    available_symmetries,
    bifurcation_point,
    build_mode,
    check_resonance,
    constant_mode_degeneracies,
    default_symmetry,
)
from .stability import admissible_region, phase_row, stability_verdict
from .symmetry import Symmetry

log = logging.getLogger("chiralmag")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
DEFAULT_DELTA = 0.01
LATTICE_SHORTCUTS = {"square": (1.0, 90.0), "hexagonal": (1.0, 60.0)}
NOT_ARGS = {"command", "config", "lattice_class"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def _lattice_args(ap):
    g = ap.add_argument_group("lattice")
    g.add_argument("--lattice", choices=sorted(LATTICE_SHORTCUTS), help="shortcut for --tau-abs/--theta")
    g.add_argument("--tau-abs", type=float, help="|tau| >= 1 (default 1)")
    g.add_argument("--theta", type=float, help="lattice angle in degrees (default 90)")


def _model_args(ap, need_lambda=False):
    g = ap.add_argument_group("model")
    g.add_argument("--kappa", type=float, help="DMI strength (required unless --dmi is given)")
    g.add_argument("--beta", type=float, default=0.0)
    g.add_argument("--alpha", type=float, default=1.0)
    if need_lambda:
        g.add_argument("--lam", default="auto", help="float, or auto[:delta] for lambda0 + delta*nu2")
        g.add_argument("--symmetry", help="Sigma1/Sigma2/Sigma3 (default: richest for the lattice)")
    ph = ap.add_argument_group("physical parameters (override --kappa/--lam/--alpha/--beta)")
    for name in ("exchange", "dmi", "landau-a", "landau-b", "anisotropy", "temperature-offset", "length-scale"):
        ph.add_argument(f"--{name}", type=float)


def _solver_args(ap, with_seed=True):
    g = ap.add_argument_group("solver")
    g.add_argument("--n", type=int, default=81, help="odd grid size")
    g.add_argument("--dt", type=float, default=0.1)
    g.add_argument("--fp-tol", type=float, default=1e-8)
    g.add_argument("--grad-tol", type=float, default=1e-7)
    g.add_argument("--max-steps", type=int, default=20_000)
    g.add_argument("--min-steps", type=int, default=0)
    g.add_argument("--rel-tol", type=_optional_float, default=1e-4,
                   help="relative stationarity guard for termination ('none' disables)")
    g.add_argument("--fp-max-iters", type=int, default=200)
    g.add_argument("--init-modulus-max", type=float, default=0.1)
    if with_seed:
        g.add_argument("--seed", type=int, default=0)


def _optional_float(text):
    return None if str(text).strip().lower() in ("none", "off", "") else float(text)


def _float_list(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    text = str(text).strip()
    if ":" in text:
        a, b, c = text.split(":")
        return [float(x) for x in np.linspace(float(a), float(b), int(c))]
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chiralmag", description="Chiral-magnet Ginzburg-Landau toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    parsers = {}

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file (CLI flags win)")
        p.add_argument("--out", default="chiralmag-output", help="output directory")
        parsers[name] = p
        return p

    p = add("bifurcate", "bifurcation point, kernel and nu2 per symmetry")
    _lattice_args(p)
    _model_args(p)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--n", type=int, default=81, help="quadrature grid size")

    p = add("modes", "sample a kernel mode and write it as CSV + image")
    _lattice_args(p)
    _model_args(p)
    p.add_argument("--symmetry")
    p.add_argument("--n", type=int, default=81)
    p.add_argument("--amplitude", type=float, default=1.0)

    p = add("stability", "stability verdict of a bifurcating state")
    _lattice_args(p)
    _model_args(p)
    p.add_argument("--symmetry")

    p = add("simulate", "run the gradient flow from random or checkpointed data")
    _lattice_args(p)
    _model_args(p, need_lambda=True)
    _solver_args(p)
    p.add_argument("--init", help="checkpoint to start from")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)

    p = add("sweep", "gradient flow over a grid of (kappa, beta, lam) points")
    _lattice_args(p)
    p.add_argument("--kappas", required=False)
    p.add_argument("--betas", default="0")
    p.add_argument("--lams", default="auto", help="list of floats, or auto[:delta]")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--symmetry")
    _solver_args(p)
    p.add_argument("--workers", type=int, help="parallel runs (capped by CHIRALMAG_THREADS)")

    p = add("classify", "classify a stored field")
    _lattice_args(p)
    p.add_argument("--field", required=False, help="field CSV or binary checkpoint")

    p = add("phase-diagram", "rasterize the admissible (kappa, beta) region")
    p.add_argument("--kappas", default="0.4:2.0:33")
    p.add_argument("--betas", default="0:8:33")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--workers", type=int)

    ap._chiral_subparsers = parsers
    return ap


def _config_defaults(sub: argparse.ArgumentParser, values: dict) -> dict:
    """Translate config keys to parser dests; unknown keys are an error."""
    actions = {a.dest: a for a in sub._actions}
    out = {}
    for key, raw in values.items():
        if key.startswith("result.") or key in NOT_ARGS:
            continue
        dest = key.replace("-", "_")
        if dest not in actions:
            raise UsageError(f"unknown config key {key!r}")
        action = actions[dest]
        if raw in ("", "none", "None"):
            out[dest] = None
        elif isinstance(action, argparse._StoreTrueAction):
            out[dest] = raw.lower() in ("1", "true", "yes", "on")
        else:
            out[dest] = raw  # string defaults go through the action's type
    return out


def parse_args(argv) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        sub = ap._chiral_subparsers[args.command]
        values = io.read_keyvalue(args.config)
        cmd = values.get("command")
        if cmd and cmd != args.command:
            raise UsageError(f"config is for command {cmd!r}, not {args.command!r}")
        sub.set_defaults(**_config_defaults(sub, values))
        args = ap.parse_args(argv)
    return args


# ---------------------------------------------------------------- resolution


def resolve_lattice(args):
    if getattr(args, "lattice", None):
        tau_abs, theta = LATTICE_SHORTCUTS[args.lattice]
        if args.tau_abs not in (None, tau_abs) or args.theta not in (None, theta):
            raise UsageError("--lattice conflicts with --tau-abs/--theta")
    else:
        tau_abs = 1.0 if args.tau_abs is None else args.tau_abs
        theta = 90.0 if args.theta is None else args.theta
    return make_lattice(tau_abs, math.radians(theta)), tau_abs, theta


def resolve_model(args, lam: float = 0.0) -> ModelParams:
    if getattr(args, "dmi", None) is not None:
        phys = PhysicalParams(
            exchange=_need(args.exchange, "--exchange"),
            dmi=args.dmi,
            landau_a=_need(args.landau_a, "--landau-a"),
            landau_b=_need(args.landau_b, "--landau-b"),
            anisotropy=args.anisotropy or 0.0,
            temperature_offset=args.temperature_offset or 0.0,
            length_scale=1.0 if args.length_scale is None else args.length_scale,
        )
        return nondimensionalize(phys)
    if args.kappa is None:
        raise UsageError("--kappa is required")
    return ModelParams(args.kappa, lam, args.alpha, args.beta)


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required with physical parameters")
    return value


def resolve_symmetry(args, spec) -> Symmetry:
    sym = getattr(args, "symmetry", None)
    return default_symmetry(spec) if not sym else Symmetry.parse(sym)


def parse_lambda(text: str, default_delta: float = DEFAULT_DELTA):
    """Return ``(value, None)`` for a number or ``(None, delta)`` for ``auto[:delta]``."""
    text = str(text).strip()
    if text.lower().startswith("auto"):
        rest = text[4:]
        if not rest:
            return None, default_delta
        if not rest.startswith(":"):
            raise UsageError(f"bad lambda spec {text!r}")
        return None, float(rest[1:])
    return float(text), None


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        n=args.n,
        dt=args.dt,
        fp_tol=args.fp_tol,
        grad_tol=args.grad_tol,
        max_steps=args.max_steps,
        fp_max_iters=args.fp_max_iters,
        seed=args.seed,
        init_modulus_max=args.init_modulus_max,
        min_steps=args.min_steps,
        rel_tol=args.rel_tol,
    )


def _base_manifest(args, spec, tau_abs, theta) -> dict:
    return {"command": args.command, "tau_abs": tau_abs, "theta": theta, "lattice_class": classify(spec).tag.value}


def _emit(out: Path, manifest: dict):
    io.write_manifest(out / "manifest.cfg", manifest)


# ---------------------------------------------------------------- commands


def cmd_bifurcate(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    p = resolve_model(args)
    cls = classify(spec)
    plus = bifurcation_point(p, RootSign.PLUS)
    minus = bifurcation_point(p, RootSign.MINUS)
    resonant = check_resonance(plus, p, spec)
    out = Path(args.out)
    print(f"lattice: {cls.tag.value} (|tau|={tau_abs:g}, theta={theta:g} deg), holohedry {cls.holohedry}")
    print(f"lambda0+ = {plus.lambda0:.12g}   A+ = {plus.amplitude_A:.12g}")
    print(f"lambda0- = {minus.lambda0:.12g}   A- = {minus.amplitude_A:.12g}")
    if plus.lambda0 <= 0:
        print("warning: lambda0+ <= 0, the positivity condition fails; bifurcating states are unstable", file=sys.stderr)
    print(f"resonant: {'yes' if resonant else 'no'}")
    for note in constant_mode_degeneracies(plus):
        print(f"degenerate: {note}")
    print(f"kernel dimension: {KERNEL_DIM[cls.tag]}")
    rows = []
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update(kappa=p.kappa, alpha=p.alpha, beta=p.beta, delta=args.delta, n=args.n)
    for sym in available_symmetries(spec):
        mode = build_mode(plus, spec, sym, args.n)
        nu2 = compute_nu2(mode, p)
        lam_delta = plus.lambda0 + args.delta * nu2
        print(f"{sym.value}: nu2 = {nu2:.12g}   lambda(delta={args.delta:g}) = {lam_delta:.12g}")
        rows.append((sym.value, plus.lambda0, minus.lambda0, plus.amplitude_A, nu2, args.delta, lam_delta, resonant, KERNEL_DIM[cls.tag]))
        manifest[f"result.nu2.{sym.value}"] = nu2
    io.write_csv(
        out / "bifurcate.csv",
        ["symmetry", "lambda0_plus", "lambda0_minus", "A", "nu2", "delta", "lambda_delta", "resonant", "kernel_dim"],
        rows,
    )
    manifest.update({"result.lambda0_plus": plus.lambda0, "result.lambda0_minus": minus.lambda0, "result.resonant": resonant})
    _emit(out, manifest)
    return EXIT_OK


def cmd_modes(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    p = resolve_model(args)
    sym = resolve_symmetry(args, spec)
    mode = build_mode(bifurcation_point(p, RootSign.PLUS), spec, sym, args.n)
    f = args.amplitude * mode.field
    out = Path(args.out)
    io.write_field_csv(out / "mode.csv", f, spec)
    io.write_field_image(out / "mode.ppm", f)
    print(f"{sym.value}: wave vectors {[w.k for w in mode.wave_vectors]}, kernel dimension {mode.point.kernel_dim}")
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update(kappa=p.kappa, alpha=p.alpha, beta=p.beta, symmetry=sym.value, n=args.n, amplitude=args.amplitude)
    _emit(out, manifest)
    return EXIT_OK


def cmd_stability(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    p = resolve_model(args)
    sym = resolve_symmetry(args, spec)
    rep = stability_verdict(p, spec, sym)
    worst = rep.worst_mode if isinstance(rep.worst_mode, str) else f"k={rep.worst_mode.k}"
    print(f"verdict: {rep.verdict.value}")
    print(f"lambda0+ = {rep.lambda0:.12g} (positive: {rep.lambda0_positive})")
    print(f"gap condition: {rep.gap_condition}")
    print(f"min mu >= 0: {rep.mu_min_nonneg} (worst {worst}, mu = {rep.worst_mu:.6g})")
    print(f"threshold beta = {rep.threshold_beta:.12g}")
    print(f"c_tilde = {rep.c_tilde:.12g}   hex witness = {rep.hex_witness:.12g}")
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update(kappa=p.kappa, alpha=p.alpha, beta=p.beta, symmetry=sym.value)
    manifest.update({"result.verdict": rep.verdict.value, "result.c_tilde": rep.c_tilde, "result.lambda0": rep.lambda0})
    _emit(Path(args.out), manifest)
    return EXIT_OK


def _resolved_params(args, spec):
    lam_value, delta = parse_lambda(args.lam, args.delta)
    p = resolve_model(args, 0.0 if lam_value is None else lam_value)
    sym = resolve_symmetry(args, spec)
    if lam_value is None and args.dmi is None:
        p = p.with_lambda(auto_lambda(p, spec, sym, delta))
    return p, sym, delta


def cmd_simulate(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    p, sym, delta = _resolved_params(args, spec)
    cfg = _solver_config(args)
    init = None
    if args.init:
        init, _ = io.read_checkpoint(args.init)
    out = Path(args.out)
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update(
        kappa=p.kappa, lam=p.lam, alpha=p.alpha, beta=p.beta, symmetry=sym.value,
        n=cfg.n, dt=cfg.dt, fp_tol=cfg.fp_tol, grad_tol=cfg.grad_tol, max_steps=cfg.max_steps,
        min_steps=cfg.min_steps, rel_tol=cfg.rel_tol if cfg.rel_tol is not None else "none", fp_max_iters=cfg.fp_max_iters, seed=cfg.seed,
        init_modulus_max=cfg.init_modulus_max, init=args.init or "none",
    )
    try:
        res = run(p, spec, cfg, init)
    except FixedPointFailure as exc:
        part = exc.partial
        if part is not None:
            io.write_energy_trace(out / "energy.csv", part.energy_trace, cfg.dt, part.fp_iters)
            io.write_checkpoint(out / "checkpoint.bin", part.final, p)
        manifest.update({"result.termination": "FixedPointFailure", "result.error": str(exc)})
        _emit(out, manifest)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    io.write_energy_trace(out / "energy.csv", res.energy_trace, cfg.dt, res.fp_iters)
    io.write_field_csv(out / "field.csv", res.final, spec)
    io.write_field_image(out / "field.ppm", res.final)
    io.write_checkpoint(out / "checkpoint.bin", res.final, p)
    frac = dominant_fraction(res.final, spec, res.dominant_modes)
    manifest.update({
        "result.classification": res.classification.value,
        "result.termination": res.termination.value,
        "result.steps": res.steps_taken,
        "result.energy": res.energy_trace[-1][1],
        "result.dominant_modes": ";".join(f"{w.k[0]}:{w.k[1]}:{a:.17g}" for w, a in res.dominant_modes),
        "result.dominant_fraction": frac,
    })
    _emit(out, manifest)
    print(f"lambda = {p.lam:.12g}")
    print(f"{res.termination.value} after {res.steps_taken} steps, E = {res.energy_trace[-1][1]:.12g}")
    print(f"classification: {res.classification.value} ({len(res.dominant_modes)} dominant pairs, {frac:.3f} of non-DC energy)")
    return EXIT_OK


def _sweep_point(task):
    kappa, beta, lam_text, alpha, sym_text, spec, cfg = task
    row = {"kappa": kappa, "beta": beta, "lambda": float("nan"), "classification": "", "termination": "",
           "steps": 0, "energy": float("nan"), "error": ""}
    try:
        lam_value, delta = parse_lambda(lam_text)
        p = ModelParams(kappa, 0.0 if lam_value is None else lam_value, alpha, beta)
        if lam_value is None:
            sym = default_symmetry(spec) if not sym_text else Symmetry.parse(sym_text)
            p = p.with_lambda(auto_lambda(p, spec, sym, delta))
        row["lambda"] = p.lam
        res = run(p, spec, cfg)
        row.update(classification=res.classification.value, termination=res.termination.value,
                   steps=res.steps_taken, energy=res.energy_trace[-1][1])
    except (ChiralMagError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        if isinstance(exc, FixedPointFailure):
            row["termination"] = "FixedPointFailure"
    return row


def _pool_size(requested) -> int:
    cap = fft_workers()
    return max(1, min(cap, requested or cap))


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def cmd_sweep(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    if not args.kappas:
        raise UsageError("--kappas is required")
    cfg = _solver_config(args)
    kappas, betas = _float_list(args.kappas), _float_list(args.betas)
    lams = [s.strip() for s in str(args.lams).split(",")] if not str(args.lams).startswith("auto") else [args.lams]
    tasks = [(k, b, l, args.alpha, args.symmetry, spec, cfg) for k in kappas for b in betas for l in lams]
    rows = _map(_sweep_point, tasks, _pool_size(args.workers))
    out = Path(args.out)
    header = ["kappa", "beta", "lambda", "classification", "termination", "steps", "energy", "error"]
    io.write_csv(out / "sweep.csv", header, [[r[h] for h in header] for r in rows])
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update(
        kappas=args.kappas, betas=args.betas, lams=args.lams, alpha=args.alpha, symmetry=args.symmetry or "",
        n=cfg.n, dt=cfg.dt, fp_tol=cfg.fp_tol, grad_tol=cfg.grad_tol, max_steps=cfg.max_steps,
        min_steps=cfg.min_steps, rel_tol=cfg.rel_tol if cfg.rel_tol is not None else "none", fp_max_iters=cfg.fp_max_iters, seed=cfg.seed, init_modulus_max=cfg.init_modulus_max,
    )
    manifest["result.rows"] = len(rows)
    manifest["result.failures"] = sum(1 for r in rows if r["error"])
    _emit(out, manifest)
    print(f"{len(rows)} points, {manifest['result.failures']} failures -> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    spec, tau_abs, theta = resolve_lattice(args)
    if not args.field:
        raise UsageError("--field is required")
    path = Path(args.field)
    if path.read_bytes()[:4] == io.CHECKPOINT_MAGIC:
        f, _ = io.read_checkpoint(path)
    else:
        f = io.read_field_csv(path)
    kind, dominant = classify_pattern(f, spec)
    frac = dominant_fraction(f, spec, dominant)
    print(f"classification: {kind.value}")
    for w, a in dominant:
        print(f"  k={w.k} |v|={w.norm:.6f} amplitude={a:.6g}")
    manifest = _base_manifest(args, spec, tau_abs, theta)
    manifest.update({"field": str(path), "result.classification": kind.value, "result.dominant_fraction": frac})
    _emit(Path(args.out), manifest)
    return EXIT_OK


def _phase_point(task):
    return phase_row(*task)


def cmd_phase_diagram(args) -> int:
    kappas, betas = _float_list(args.kappas), _float_list(args.betas)
    if any(k <= 0 for k in kappas) or any(b < 0 for b in betas):
        raise UsageError("kappa values must be positive and beta values non-negative")
    tasks = [(k, b, args.alpha) for k in kappas for b in betas]
    rows = _map(_phase_point, tasks, _pool_size(args.workers))
    out = Path(args.out)
    io.write_csv(
        out / "phase_diagram.csv",
        ["kappa", "beta", "lambda0", "c_tilde", "verdict", "admissible"],
        [[r["kappa"], r["beta"], r["lambda0"], r["c_tilde"], r["verdict"], r["admissible"]] for r in rows],
    )
    n_adm = sum(r["admissible"] for r in rows)
    _emit(out, {"command": args.command, "kappas": args.kappas, "betas": args.betas, "alpha": args.alpha,
                "result.points": len(rows), "result.admissible": n_adm})
    print(f"{len(rows)} grid points, {n_adm} admissible -> {out / 'phase_diagram.csv'}")
    return EXIT_OK


COMMANDS = {
    "bifurcate": cmd_bifurcate,
    "modes": cmd_modes,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "phase-diagram": cmd_phase_diagram,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ValueError, OSError) as exc:
        print(f"chiralmag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, cat, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        try:
            return COMMANDS[args.command](args)
        except FixedPointFailure as exc:
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        except (UsageError, ChiralMagError, ValueError) as exc:
            print(f"chiralmag: error: {exc}", file=sys.stderr)
            return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
