"""``gsh`` command line.

Every run writes a JSON report (to ``--report`` or stdout) holding the
resolved configuration, SHA-256 digests of the input files, key scalars and
verdicts.  Exit status: 0 success, 1 validation error, 2 numerical failure
(saturation, exhausted prefixes or unconverged series escalate to 2 with
``--strict``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import hermite, kernel, spaces, structural, weights
from .errors import GSHError, NumericalError, ValidationError
from .fields import CoefficientField, SampledFunction, dump_json, load_field, load_json

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


# -- parsing helpers ---------------------------------------------------------


def parse_range(text: str, positive: bool = False) -> np.ndarray:
    """'a:b:n' -> n evenly spaced points from a to b."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValidationError(f"expected a:b:n, got {text!r}") from None
    if n < 1 or (n > 1 and not b > a):
        raise ValidationError(f"range {text!r} needs n >= 1 and b > a")
    if positive and a <= 0:
        raise ValidationError(f"range {text!r} must be positive")
    return np.linspace(a, b, n)


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise ValidationError(f"sizes must be positive: {text!r}")
    return vals


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None
    if any(not v > 0 for v in vals):
        raise ValidationError(f"values must be positive: {text!r}")
    return vals


def _positive(name: str, value: float) -> float:
    if not value > 0 or not math.isfinite(value):
        raise ValidationError(f"{name} must be a positive finite number")
    return value


def load_sequence(path: str) -> weights.WeightSequence:
    doc = load_json(path)
    if not isinstance(doc, dict) or "family" not in doc:
        raise ValidationError(f"{path}: sequence file needs a 'family'")
    try:
        return weights.make_sequence(doc)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from None


def load_kernel(path: str) -> kernel.KernelCoefficients:
    return kernel.KernelCoefficients.from_json(load_json(path))


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class Run:
    """Collects what goes into the report."""

    def __init__(self, command: str, args: argparse.Namespace, input_keys: Sequence[str]):
        self.command = command
        config = {k: v for k, v in vars(args).items() if k not in ("func", "report")}
        self.report: dict[str, Any] = {"command": command, "config": config, "inputs": {}}
        for key in input_keys:
            path = getattr(args, key, None)
            if path and Path(path).is_file():
                self.report["inputs"][path] = _digest(path)
        self.flags: list[str] = []
        self.results: dict[str, Any] = {}

    def flag(self, message: str) -> None:
        self.flags.append(message)

    def finish(self, args: argparse.Namespace) -> int:
        self.report["results"] = self.results
        self.report["flags"] = self.flags
        for flag in self.flags:
            sys.stderr.write(f"gsh: warning: {flag}\n")
        code = EXIT_NUMERICAL if (args.strict and self.flags) else EXIT_OK
        self.report["status"] = "ok" if code == EXIT_OK else "flagged"
        text = json.dumps(_jsonable(self.report), indent=1) + "\n"
        if args.report:
            Path(args.report).write_text(text)
        elif not getattr(args, "_quiet_report", False):
            sys.stdout.write(text)
        return code


# -- presets -----------------------------------------------------------------


def _preset_function(name: str, dim: int):
    if name == "gaussian":
        return lambda *xs: np.exp(-0.5 * sum(x * x for x in xs))
    if name == "sech":
        return lambda *xs: np.prod([1.0 / np.cosh(x) for x in xs], axis=0)
    if name == "lorentz":
        return lambda *xs: np.prod([1.0 / (1.0 + x * x) for x in xs], axis=0)
    if name.startswith("hermite:"):
        orders = parse_ints_allow_zero(name.split(":", 1)[1])
        if len(orders) != dim:
            raise ValidationError(f"preset {name!r} has {len(orders)} orders for a {dim}-d box")
        return lambda *xs: np.prod([hermite.hermite_eval(n, x) for n, x in zip(orders, xs)], axis=0)
    raise ValidationError(f"unknown preset {name!r} (gaussian, sech, lorentz, hermite:K[,K...])")


def parse_ints_allow_zero(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise ValidationError("orders must be nonnegative")
    return vals


def _bilinear_preset(spec: str, out_box, in_box):
    if spec in ("identity", "fourier") or spec.startswith("heat:"):
        if tuple(out_box) != tuple(in_box):
            raise ValidationError(f"preset {spec!r} needs equal input and output boxes")
        if spec == "identity":
            return kernel.bilinear_from_kernel(kernel.identity_kernel(out_box))
        if spec == "fourier":
            return kernel.bilinear_from_kernel(kernel.fourier_kernel(out_box))
        tau = _positive("heat time", float(spec.split(":", 1)[1]))
        return kernel.bilinear_from_kernel(kernel.heat_kernel(out_box, tau))
    if Path(spec).is_file():
        t = load_kernel(spec)
        if t.out_box != tuple(out_box) or t.in_box != tuple(in_box):
            raise ValidationError("kernel file boxes do not match --boxes")
        return kernel.bilinear_from_kernel(t)
    raise ValidationError(f"unknown bilinear form {spec!r} (identity, fourier, heat:TAU or a kernel file)")


# -- commands ----------------------------------------------------------------


def cmd_seq_check(args) -> int:
    run = Run("seq check", args, ["spec"])
    seq = load_sequence(args.spec)
    conds = [c.strip() for c in args.conditions.split(",") if c.strip()]
    for c in conds:
        if c not in weights.CONDITION_CHECKS:
            raise ValidationError(f"unknown condition {c!r}; choose from {sorted(weights.CONDITION_CHECKS)}")
    for c in conds:
        rep = weights.CONDITION_CHECKS[c](seq)
        run.results[c] = rep.to_dict()
        if rep.verdict == "inconclusive":
            run.flag(f"{c} inconclusive on the checked prefix")
    return run.finish(args)


def cmd_seq_assoc(args) -> int:
    run = Run("seq assoc", args, ["spec"])
    seq = load_sequence(args.spec)
    rhos = parse_range(args.rho_grid, positive=True)
    if args.p_cap < 1:
        raise ValidationError("--p-cap must be positive")
    if not weights.check_m1(seq).holds and not args.full_scan:
        raise ValidationError("sequence is not log-convex on its prefix; rerun with --full-scan")
    lines = []
    saturated = 0
    for rho in rhos:
        val = weights.associated_fn(seq, float(rho), p_cap=args.p_cap, full_scan=args.full_scan)
        saturated += val.saturated
        lines.append(f"{float(rho)!r} {val.value!r}\n")
    table = "".join(lines)
    if args.out:
        Path(args.out).write_text(table)
    else:
        sys.stdout.write(table)
        args._quiet_report = True
    if saturated:
        run.flag(f"{saturated} grid points saturated at p_cap={args.p_cap}")
    run.results = {"points": len(rhos), "saturated": saturated, "table": args.out}
    return run.finish(args)


def cmd_coeff_analyze(args) -> int:
    run = Run("coeff analyze", args, ["input"])
    box = parse_ints(args.box)
    if args.quad is not None and args.quad < max(box):
        raise ValidationError(f"--quad {args.quad} is below the box order {max(box)}")
    if Path(args.input).is_file():
        f = SampledFunction.from_json(load_json(args.input))
    else:
        f = _preset_function(args.input, len(box))
    a = hermite.analyze(f, box, args.quad, kind=args.kind)
    dump_json(a.to_json(), args.out)
    run.results = {"box": list(a.box), "quad": args.quad or max(box) + hermite.QUAD_GUARD,
                   "l2_norm": float(np.linalg.norm(a.data)), "out": args.out}
    return run.finish(args)


def cmd_coeff_synth(args) -> int:
    run = Run("coeff synth", args, ["coeffs"])
    a = load_field(args.coeffs)
    grid = parse_range(args.grid)
    out = hermite.synthesize(a, grid if a.dim == 1 else [grid] * a.dim)
    if args.out:
        dump_json(out.to_json(), args.out)
    else:
        if a.dim != 1:
            raise ValidationError("multi-dimensional synthesis needs --out")
        sys.stdout.write("".join(f"{float(x)!r} {float(v.real)!r} {float(v.imag)!r}\n"
                                 for x, v in zip(grid, np.asarray(out.values, dtype=complex))))
        args._quiet_report = True
    run.results = {"points": int(np.asarray(out.values).size), "max_abs": float(np.max(np.abs(out.values)))}
    return run.finish(args)


def cmd_classify(args) -> int:
    run = Run("classify", args, ["coeffs", "seq"])
    a = load_field(args.coeffs)
    seq = load_sequence(args.seq)
    grid = parse_range(args.theta_grid, positive=True)
    rep = spaces.classify(a, seq, list(grid), kind=args.kind, mode=args.mode, threads=args.threads)
    run.results = rep.to_dict()
    if rep.at_boundary:
        run.flag("theta_star at the edge of the probed grid")
    return run.finish(args)


def cmd_pair(args) -> int:
    run = Run("pair", args, ["dual", "test"])
    value = spaces.parseval_pair(load_field(args.dual), load_field(args.test))
    run.results = {"value": [value.real, value.imag]}
    return run.finish(args)


def _regularize_stats(b, seq, mu, verify):
    div = structural.divisor_field(seq, mu, b.box)
    a = structural.regularize(b, seq, mu)
    stats = {
        "mu": mu,
        "max_terms_used": int(div.terms_used.max()),
        "tail_flags": int(div.tail_flag.sum()),
        "max_log_divisor": float(div.log_value.max()),
    }
    if verify:
        bt = structural.verify_bound(a)
        stats["bound_sup"] = bt.sup_value
        stats["bound_argmax"] = bt.argmax
    return a, stats


def cmd_regularize(args) -> int:
    run = Run("regularize", args, ["dual", "seq"])
    b = load_field(args.dual)
    seq = load_sequence(args.seq)
    _positive("--mu", args.mu)
    if args.verify_bound and b.dim != 1:
        raise ValidationError("--verify-bound needs a 1-d field")
    a, stats = _regularize_stats(b, seq, args.mu, args.verify_bound)
    dump_json(a.to_json(), args.out)
    run.results = stats
    if stats["tail_flags"]:
        run.flag(f"{stats['tail_flags']} divisor entries stopped at the sequence prefix")
    if args.mu_sweep:
        sweep = []
        for mu in parse_floats(args.mu_sweep):
            sweep.append(_regularize_stats(b, seq, mu, args.verify_bound)[1])
        run.results["sweep"] = sweep
    if args.bound_table and args.verify_bound:
        bt = structural.verify_bound(a)
        Path(args.bound_table).write_text("".join(f"{int(n)} {float(s)!r}\n" for n, s in zip(bt.n, bt.s)))
    return run.finish(args)


def cmd_reconstruct(args) -> int:
    run = Run("reconstruct", args, ["f", "test", "seq", "dual"])
    a_f = load_field(args.f)
    phi = load_field(args.test)
    seq = load_sequence(args.seq)
    _positive("--mu", args.mu)
    if args.beta_max is not None and args.beta_max < 0:
        raise ValidationError("--beta-max must be nonnegative")
    b = load_field(args.dual) if args.dual else structural.implied_dual(a_f, seq, args.mu)
    series = structural.oscillator_series_pair(a_f, seq, args.mu, phi, args.beta_max)
    direct = spaces.parseval_pair(b, phi)
    residual = abs(series.value - direct)
    rel = residual / abs(direct) if direct != 0 else residual
    run.results = {
        "series_pair": [series.value.real, series.value.imag],
        "parseval_pair": [direct.real, direct.imag],
        "residual": residual,
        "relative_residual": rel,
        "tail_estimate": series.tail_estimate,
        "terms_used": series.terms_used,
        "converged": series.converged,
    }
    if not series.converged:
        run.flag("oscillator series stopped at beta_max before its tail criterion")
    return run.finish(args)


def _parse_boxes(text: str):
    try:
        out_s, in_s = text.split("/")
    except ValueError:
        raise ValidationError(f"--boxes expects OUT/IN such as 8/8 or 8/4,4, got {text!r}") from None
    return parse_ints(out_s), parse_ints(in_s)


def cmd_kernel_build(args) -> int:
    run = Run("kernel build", args, ["bilinear"])
    out_box, in_box = _parse_boxes(args.boxes)
    if len(out_box) + len(in_box) > 3:
        raise ValidationError("l + s must not exceed 3")
    B = _bilinear_preset(args.bilinear, out_box, in_box)
    t = kernel.kernel_from_bilinear(B, out_box, in_box, threads=args.threads)
    dump_json(t.to_json(), args.out)
    run.results = {"l": t.l, "s": t.s, "entries": int(t.data.size), "out": args.out}
    return run.finish(args)


def cmd_kernel_apply(args) -> int:
    run = Run("kernel apply", args, ["kernel", "input"])
    t = load_kernel(args.kernel)
    out = kernel.apply_operator(t, load_field(args.input))
    if args.out:
        dump_json(out.to_json(), args.out)
        run.results = {"out": args.out, "box": list(out.box)}
    else:
        run.results = {"box": list(out.box), "field": out.to_json()}
    return run.finish(args)


def _random_field(rng, box):
    return CoefficientField(rng.standard_normal(box) + 1j * rng.standard_normal(box))


def cmd_kernel_verify(args) -> int:
    run = Run("kernel verify", args, ["kernel"])
    t = load_kernel(args.kernel)
    if args.trials < 1:
        raise ValidationError("--trials must be positive")
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        phi = _random_field(rng, t.in_box)
        psi = _random_field(rng, t.out_box)
        worst = max(worst, kernel.verify_kernel_identity(t, phi, psi, relative=True))
    uniq = kernel.kernel_uniqueness_probe(t)
    run.results = {"max_relative_residual": worst, "uniqueness_discrepancy": uniq, "trials": args.trials}
    return run.finish(args)


def cmd_kernel_growth(args) -> int:
    run = Run("kernel growth", args, ["kernel", "seq"])
    t = load_kernel(args.kernel)
    seq = load_sequence(args.seq)
    theta, nu = parse_floats(args.theta), parse_floats(args.nu)
    if len(theta) == 1:
        theta = theta * t.l
    if len(nu) == 1:
        nu = nu * t.s
    res = kernel.kernel_growth_check(t, seq, theta, nu)
    run.results = {"passes": res.passes, "C": res.C}
    return run.finish(args)


def demo_checks(box: int = 64) -> list[tuple[str, bool, str]]:
    """End-to-end structural and kernel pipelines on built-in fixtures."""
    out = []
    seq = weights.gevrey(1.0, p_max=1000)
    rng = np.random.default_rng(0)
    env = spaces.envelope(seq, 1.0, (box,))
    b = CoefficientField(np.exp(env), "dual")
    phi = CoefficientField(rng.standard_normal(box) * np.exp(-env))
    for mu in (0.25, 1.0, 4.0):
        a = structural.regularize(b, seq, mu)
        series = structural.oscillator_series_pair(a, seq, mu, phi)
        direct = spaces.parseval_pair(b, phi)
        rel = abs(series.value - direct) / abs(direct)
        out.append((f"structural round trip mu={mu}", rel <= 1e-8 and series.converged, f"rel={rel:.3e}"))
    bt = structural.verify_bound(structural.regularize(b, seq, 1.0))
    out.append(("bound table finite", math.isfinite(bt.sup_value), f"sup={bt.sup_value:.6g} at n={bt.argmax}"))
    cosh = math.exp(structural.divisor(seq, 1.0, 1).log_value)
    out.append(("divisor equals cosh(1)", abs(cosh - math.cosh(1.0)) <= 1e-12, f"{cosh!r}"))
    for l_box, s_box in (((8,), (8,)), ((8,), (8, 8))):
        t = kernel.KernelCoefficients(l_box, s_box, rng.standard_normal((8, int(np.prod(s_box))))
                                      + 1j * rng.standard_normal((8, int(np.prod(s_box)))))
        worst = max(
            kernel.verify_kernel_identity(t, _random_field(rng, s_box), _random_field(rng, l_box), relative=True)
            for _ in range(10)
        )
        out.append((f"kernel identity l={len(l_box)} s={len(s_box)}", worst <= 1e-12, f"rel={worst:.3e}"))
        u = kernel.kernel_uniqueness_probe(t)
        out.append((f"kernel uniqueness l={len(l_box)} s={len(s_box)}", u <= 1e-15, f"{u:.3e}"))
    f = kernel.fourier_kernel((16,))
    f4 = kernel.compose(f, kernel.compose(f, kernel.compose(f, f)))
    out.append(("fourier kernel F^4 = id", bool(np.array_equal(f4.data, np.eye(16))), ""))
    return out


def cmd_demo(args) -> int:
    run = Run("demo", args, [])
    checks = demo_checks(args.box)
    run.results = {name: {"pass": ok, "detail": detail} for name, ok, detail in checks}
    for name, ok, detail in checks:
        sys.stderr.write(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}\n")
    code = run.finish(args)
    return code if all(ok for _, ok, _ in checks) else EXIT_NUMERICAL


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--strict", action="store_true", help="exit 2 when numerical flags are raised")
    common.add_argument("--threads", type=int, default=int(os.environ.get("GSH_THREADS", "1")))
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="gsh", description="Hermite-coefficient tools for Gelfand-Shilov test functions and their duals.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seq = sub.add_parser("seq", help="weight sequences").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    c = seq.add_parser("check", parents=[common])
    c.add_argument("spec")
    c.add_argument("--conditions", default="m1,m2,m3q,m3r,m3b")
    c.set_defaults(func=cmd_seq_check)
    c = seq.add_parser("assoc", parents=[common])
    c.add_argument("spec")
    c.add_argument("--rho-grid", required=True)
    c.add_argument("--p-cap", type=int, default=weights.DEFAULT_P_CAP)
    c.add_argument("--full-scan", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_seq_assoc)

    coeff = sub.add_parser("coeff", help="Hermite coefficients").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    c = coeff.add_parser("analyze", parents=[common])
    c.add_argument("--input", required=True, help="sample file or preset")
    c.add_argument("--box", required=True)
    c.add_argument("--quad", type=int)
    c.add_argument("--kind", choices=("test", "dual"), default="test")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_coeff_analyze)
    c = coeff.add_parser("synth", parents=[common])
    c.add_argument("--coeffs", required=True)
    c.add_argument("--grid", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_coeff_synth)

    c = sub.add_parser("classify", parents=[common])
    c.add_argument("--coeffs", required=True)
    c.add_argument("--seq", required=True)
    c.add_argument("--kind", choices=("test", "dual"), required=True)
    c.add_argument("--mode", choices=("roumieu", "beurling"), default="roumieu")
    c.add_argument("--theta-grid", required=True)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("pair", parents=[common])
    c.add_argument("--dual", required=True)
    c.add_argument("--test", required=True)
    c.set_defaults(func=cmd_pair)

    c = sub.add_parser("regularize", parents=[common])
    c.add_argument("--dual", required=True)
    c.add_argument("--seq", required=True)
    c.add_argument("--mu", type=float, default=1.0)
    c.add_argument("--mu-sweep", help="comma-separated mu values to report alongside")
    c.add_argument("--verify-bound", action="store_true")
    c.add_argument("--bound-table", help="write the n, s_n table here (with --verify-bound)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_regularize)

    c = sub.add_parser("reconstruct", parents=[common])
    c.add_argument("--f", required=True)
    c.add_argument("--test", required=True)
    c.add_argument("--seq", required=True)
    c.add_argument("--mu", type=float, default=1.0)
    c.add_argument("--beta-max", type=int)
    c.add_argument("--dual", help="original dual field; rebuilt from f when omitted")
    c.set_defaults(func=cmd_reconstruct)

    kern = sub.add_parser("kernel", help="kernel coefficients").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    c = kern.add_parser("build", parents=[common])
    c.add_argument("--bilinear", required=True)
    c.add_argument("--boxes", required=True, help="OUT/IN, e.g. 8/8 or 8/4,4")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_kernel_build)
    c = kern.add_parser("apply", parents=[common])
    c.add_argument("--kernel", required=True)
    c.add_argument("--input", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_kernel_apply)
    c = kern.add_parser("verify", parents=[common])
    c.add_argument("--kernel", required=True)
    c.add_argument("--trials", type=int, default=20)
    c.set_defaults(func=cmd_kernel_verify)
    c = kern.add_parser("growth", parents=[common])
    c.add_argument("--kernel", required=True)
    c.add_argument("--seq", required=True)
    c.add_argument("--theta", required=True)
    c.add_argument("--nu", required=True)
    c.set_defaults(func=cmd_kernel_growth)

    c = sub.add_parser("demo", parents=[common])
    c.add_argument("--box", type=int, default=64)
    c.set_defaults(func=cmd_demo)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ValidationError("--threads must be positive")
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"gsh: error: {exc}\n")
        return EXIT_VALIDATION
    except NumericalError as exc:
        sys.stderr.write(f"gsh: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except GSHError as exc:
        sys.stderr.write(f"gsh: {exc}\n")
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
