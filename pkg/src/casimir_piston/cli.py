"""Command-line interface: forces, a/b sweeps, chi of a shape file, diagnostics.

Single results are printed as ``key=value`` lines, each numeric value
followed by ``bound=<b>`` or the tag ``EXACT``.  Sweeps are CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import forces, geometry, optical_paths, spectrum
from .fields import Field

CURVES = {
    "exact": "F_exact_norm",
    "first_correction": "F_corr1_norm",
    "second_correction": "F_corr2_norm",
    "box": "F_box_norm",
}


class CliError(Exception):
    pass


def _num(x: float) -> str:
    return f"{x:.15g}"


def _line(key: str, value, bound=None) -> str:
    if isinstance(value, str):
        return f"{key}={value}"
    if bound is None:
        tag = "EXACT"
    elif math.isfinite(bound):
        tag = f"bound={bound:.3g}"
    else:
        tag = "bound=unknown"
    return f"{key}={_num(value)} {tag}"


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- force ----------------------------------------------------------------------


def _config(args) -> forces.PistonConfig:
    if args.a is None:
        raise CliError("--a is required (separation, a > 0)")
    section = geometry.load_cross_section(args.shape) if args.shape else None
    if section is None and args.b is None:
        raise CliError("give --b (square side) or --shape <file>")
    return forces.PistonConfig(a=args.a, b=args.b, field=args.field, cross_section=section)


def cmd_force(args) -> int:
    cfg = _config(args)
    result = forces.force(cfg, args.method)
    exact_method = result.method in ("lattice", "waveguide", "lattice-box", "waveguide-box")
    lines = [
        _line("field", cfg.field.value),
        _line("method", result.method),
        _line("a", cfg.a),
        _line("area", cfg.area),
        _line("perimeter", cfg.perimeter),
        _line("total", result.total, result.bound),
        _line("per_area", result.per_area, result.bound / cfg.area),
        _line("f_parallel", result.f_parallel),
        _line("normalized", result.normalized, result.normalized_bound),
        _line("term_a4", result.term_a4),
        _line("term_a3", result.term_a3),
        _line("term_a2", result.term_a2),
    ]
    if result.term_const is None:
        lines.append(_line("term_const", "UNKNOWN"))
    else:
        lines.append(_line("term_const", result.term_const, abs(result.term_const) * forces.J_RTOL))
    lines.append(_line("exp_remainder", result.exp_remainder, result.exp_bound) if math.isfinite(result.exp_bound) else _line("exp_remainder", "UNKNOWN"))
    if exact_method:
        lines.append(_line("log_abs_total", result.log_abs_total, result.bound / abs(result.total) if result.total else 0.0))
        lines.append(_line("sign_certified", str(result.sign_certified).lower()))
    for flag in result.flags:
        lines.append(_line("flag", flag))
    _emit(lines, args.out)
    return 0


# -- sweep ----------------------------------------------------------------------


def _sweep_rows(ratio_min: float, ratio_max: float, points: int, log: bool, curves: Sequence[str]):
    if not 0 < ratio_min < ratio_max:
        raise CliError("sweep needs 0 < ratio-min < ratio-max")
    if points < 2:
        raise CliError("sweep needs points >= 2")
    grid = np.geomspace(ratio_min, ratio_max, points) if log else np.linspace(ratio_min, ratio_max, points)
    header = ["a_over_b"] + [CURVES[c] for c in curves]
    if "exact" in curves:
        header.append("F_exact_norm_bound")
    rows = []
    for ratio in grid:
        pt = forces.normalized_curves(float(ratio))
        values = {"exact": pt.exact, "first_correction": pt.corr1, "second_correction": pt.corr2, "box": pt.box}
        row = [float(ratio)] + [values[c] for c in curves]
        if "exact" in curves:
            row.append(pt.exact_bound)
        rows.append(row)
    return header, rows


def cmd_sweep(args) -> int:
    if Field.parse(args.field) is not Field.EM:
        raise CliError("sweep reproduces the EM curves; use --field em")
    curves = [c.strip() for c in args.curves.split(",") if c.strip()]
    unknown = [c for c in curves if c not in CURVES]
    if unknown or not curves:
        raise CliError(f"unknown curves {unknown}; choose from {sorted(CURVES)}")
    curves = [c for c in CURVES if c in curves]
    header, rows = _sweep_rows(args.ratio_min, args.ratio_max, args.points, args.log, curves)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(x) for x in row])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# -- chi --------------------------------------------------------------------------


def cmd_chi(args) -> int:
    path = args.shape or args.path
    if not path:
        raise CliError("give a shape file")
    cs = geometry.load_cross_section(path)
    value = geometry.chi(cs)
    zeta2 = math.pi**2 / 6
    lines = [
        _line("shape", cs.name or Path(path).stem),
        _line("chi", value.chi),
        _line("corner_contribution", value.corner_contribution),
        _line("curvature_contribution", value.curvature_contribution),
        _line("area", cs.area),
        _line("perimeter", cs.perimeter),
        # coefficients of a^-2 in the force
        _line("scalar_a2_coefficient", -zeta2 * value.chi / (4 * math.pi)),
        _line("em_a2_coefficient", zeta2 * (1 - 2 * value.chi) / (4 * math.pi)),
    ]
    for flag in value.flags:
        lines.append(_line("flag", flag))
    _emit(lines, args.out)
    return 0


# -- diagnose ---------------------------------------------------------------------


def _verdict(name: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} {name}: {detail}"


def diagnose_decomposition(dims, cutoff: float, tolerance: float) -> tuple[bool, list[str]]:
    check = spectrum.decomposition_residual(dims, cutoff)
    ok = check.relative < tolerance
    lines = [
        _line("E_em", check.em, check.bound),
        _line("E_dirichlet", check.dirichlet, check.bound),
        _line("E_neumann", check.neumann, check.bound),
        _line("residual", check.residual, 4 * np.finfo(float).eps * check.em),
        _verdict("decomposition", ok, f"relative residual {check.relative:.3e} < {tolerance:g}"),
    ]
    return ok, lines


def diagnose_weyl(dims, lam_min: float, lam_max: float, points: int, tolerance: float) -> tuple[bool, list[str]]:
    grid = np.geomspace(lam_min, lam_max, points)
    fits = {f: spectrum.fit_weyl_coefficients(dims, f, grid) for f in Field}
    lines = []
    for f, fit in fits.items():
        pred = spectrum.weyl_prediction(dims, f)
        lines.append(_line(f"{f.value}.surface_coeff", fit.surface_coeff, fit.stderr[3]))
        lines.append(_line(f"{f.value}.surface_expected", pred[3]))
        lines.append(_line(f"{f.value}.edge_coeff", fit.edge_coeff, fit.stderr[2]))
        lines.append(_line(f"{f.value}.residual", fit.residual))
    d, n, em = fits[Field.DIRICHLET], fits[Field.NEUMANN], fits[Field.EM]
    sign_ok = d.surface_coeff < 0 < n.surface_coeff
    mag = abs(abs(d.surface_coeff) - abs(n.surface_coeff)) / abs(d.surface_coeff)
    em_rel = abs(em.surface_coeff) / abs(d.surface_coeff)
    checks = [
        (sign_ok, "surface-sign", f"Dirichlet {d.surface_coeff:.6g} < 0 < Neumann {n.surface_coeff:.6g}"),
        (mag < tolerance, "surface-magnitude", f"|D| vs |N| differ by {mag:.3e} < {tolerance:g}"),
        (em_rel < tolerance, "em-surface-cancels", f"|EM| / |D| = {em_rel:.3e} < {tolerance:g}"),
    ]
    lines += [_verdict(name, ok, detail) for ok, name, detail in checks]
    return all(ok for ok, *_ in checks), lines


def diagnose_paths(a: float, b: float, field_: str | None, max_path_length: float | None) -> tuple[bool, list[str]]:
    fields = [Field.parse(field_)] if field_ else [Field.DIRICHLET, Field.NEUMANN]
    lines, all_ok = [], True
    for f in fields:
        path = optical_paths.piston_path_force(a, b, eta=f, max_path_length=max_path_length, method="finite-difference")
        cfg = forces.PistonConfig(a=a, b=b, field=f)
        ref = forces.force_em_exact(cfg) if f is Field.EM else forces.force_scalar_asymptotic(cfg)
        allowed = path.bound + ref.bound
        diff = path.total - ref.total
        ok = abs(diff) <= allowed
        all_ok &= ok
        lines += [
            _line(f"{f.value}.path_force", path.total, path.bound),
            _line(f"{f.value}.reference_force", ref.total, ref.bound),
            _verdict(f"{f.value}.paths", ok, f"|difference| {abs(diff):.3e} <= {allowed:.3e}"),
        ]
    return all_ok, lines


def cmd_diagnose(args) -> int:
    def tolerance(default: float) -> float:
        return default if args.tolerance is None else args.tolerance

    if args.check == "decomposition":
        ok, lines = diagnose_decomposition(args.dims, args.cutoff, tolerance(1e-12))
    elif args.check == "weyl-fit":
        mn = min(args.dims)
        lam_min = args.lambda_min if args.lambda_min else 2.5 / mn
        lam_max = args.lambda_max if args.lambda_max else 10.0 / mn
        ok, lines = diagnose_weyl(args.dims, lam_min, lam_max, args.points, tolerance(0.02))
    else:
        ok, lines = diagnose_paths(args.a, args.b, args.field, args.max_path_length)
    _emit(lines, args.out)
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="casimir-piston", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("force", help="force on the piston for one configuration")
    p.add_argument("--field", default="em", choices=[f.value for f in Field])
    p.add_argument("--a", type=float, help="piston separation a > 0")
    p.add_argument("--b", type=float, help="side of the square cross section")
    p.add_argument("--shape", help="cross-section file (JSON)")
    p.add_argument("--method", default="auto", choices=["auto", "exact", "asymptotic", "section", "box"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("sweep", help="normalized EM force curves versus a/b as CSV")
    p.add_argument("--field", default="em", choices=[f.value for f in Field])
    p.add_argument("--ratio-min", type=float, default=0.01)
    p.add_argument("--ratio-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    p.add_argument("--curves", default=",".join(CURVES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("chi", help="chi, area and perimeter of a cross-section file")
    p.add_argument("path", nargs="?")
    p.add_argument("--shape")
    p.add_argument("--out")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("diagnose", help="consistency checks with PASS/FAIL lines")
    p.add_argument("check", choices=["decomposition", "weyl-fit", "validate-paths"])
    p.add_argument("--dims", type=float, nargs=3, default=[1.0, 1.0, 1.0])
    p.add_argument("--lambda", dest="cutoff", type=float, default=40.0)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--field", choices=[f.value for f in Field])
    p.add_argument("--max-path-length", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, spectrum.ResourceBoundError, spectrum.FitConditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
