"""Command line front end: ``acbm validate|classify|connection|conformal SCENE``.

Exit codes: 0 success, 1 validation failure, 2 parse error, 3 a checked
invariance or identity fails beyond tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .classes import InvalidParams, InvalidWeingarten, classify, random_admissible
from .conformal import (
    g0_generator,
    g0_predicate,
    random_element,
    transform_F,
    transform_N_phiphi,
    transform_structure,
    transform_torsion,
    transform_torsion_oracle,
)
from .connections import (
    natural_connection_check,
    phi_canonical_identity_check,
    q0_phiB,
    q_canonical,
    t_canonical,
    torsion_forms,
)
from .fundamental import (
    InadmissibleF,
    associated_forms,
    check_admissible,
    nijenhuis_from_F,
    nijenhuis_phiphi,
    u0_predicate,
)
from .scene import ParseError, Scene, load
from .structure import validate_structure
from .tensors import DEFAULT_TOL, DegenerateMetric, ShapeMismatch, max_abs, raise_with
from .torsion_classes import AmbiguousClass, correspondence_check, detected_torsion_classes

EXIT_OK, EXIT_VALIDATION, EXIT_PARSE, EXIT_INVARIANT = 0, 1, 2, 3

IDENTITY_NAMES = {
    "phi_xi": "phi(xi) = 0",
    "phi_squared": "phi^2 = -Id + eta (x) xi",
    "eta_phi": "eta o phi = 0",
    "eta_xi": "eta(xi) = 1",
    "b_metric": "g(phi x, phi y) = -g(x, y) + eta(x) eta(y)",
    "g_symmetric": "g symmetric",
    "signature": "signature (n, n+1)",
    "symmetric_last_pair": "F(x,y,z) = F(x,z,y)",
    "phi_compatibility": "F(x,y,z) = F(x,phi y,phi z) + eta(y)F(x,xi,z) + eta(z)F(x,y,xi)",
}


class ValidationError(ValueError):
    pass


class CommandResult:
    def __init__(self, report: dict, code: int = EXIT_OK):
        self.report = report
        self.code = code


def tolerance_from_env() -> float:
    raw = os.environ.get("ACBM_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ValidationError(f"ACBM_TOL must be a number, got {raw!r}") from None
    if not tol > 0:
        raise ValidationError("ACBM_TOL must be positive")
    return tol


def _structure_or_fail(scene: Scene, tol: float):
    report = validate_structure(scene.structure, tol)
    if not report.ok:
        names = ", ".join(IDENTITY_NAMES.get(k, k) for k in report.failures)
        raise ValidationError(f"structure violates {names}; residuals {report.residuals}")
    return report


def _F_or_fail(scene: Scene, tol: float) -> np.ndarray:
    if not scene.has_F:
        raise ValidationError("scene supplies no F (need F, weingarten or generator)")
    F = scene.resolve_F()
    adm = check_admissible(F, scene.structure, max(tol, 1e-8))
    if not adm.ok:
        names = ", ".join(IDENTITY_NAMES.get(k, k) for k in adm.failures)
        raise ValidationError(f"F violates {names}; residuals {adm.residuals}")
    return F


def cmd_validate(scene: Scene, tol: float) -> CommandResult:
    s_report = validate_structure(scene.structure, tol)
    report = {"command": "validate", "tol": tol, "structure": s_report.to_dict()}
    code = EXIT_OK
    if not s_report.ok:
        report["violations"] = [IDENTITY_NAMES.get(k, k) for k in s_report.failures]
        report["messages"] = dict(s_report.messages)
        return CommandResult(report, EXIT_VALIDATION)
    if scene.has_F:
        adm = check_admissible(scene.resolve_F(), scene.structure, tol)
        report["F"] = adm.to_dict()
        if not adm.ok:
            report["violations"] = [IDENTITY_NAMES.get(k, k) for k in adm.failures]
            code = EXIT_VALIDATION
    return CommandResult(report, code)


def cmd_classify(scene: Scene, tol: float) -> CommandResult:
    _structure_or_fail(scene, tol)
    F = _F_or_fail(scene, tol)
    rep = classify(F, scene.structure)
    forms = associated_forms(F, scene.structure)
    ok_u0, res_u0 = u0_predicate(F, scene.structure)
    report = {
        "command": "classify",
        "tol": tol,
        **rep.to_dict(),
        "forms": forms.to_dict(),
        "in_U0": ok_u0,
        "N_phiphi_residual": res_u0,
    }
    return CommandResult(report)


def cmd_connection(scene: Scene, tol: float) -> CommandResult:
    s = scene.structure
    _structure_or_fail(scene, tol)
    F = _F_or_fail(scene, tol)
    Q = q_canonical(F, s)
    Q0 = q0_phiB(F, s)
    T = t_canonical(F, s)
    forms = torsion_forms(T, s)
    natural = natural_connection_check(Q, F, s, tol)
    tcan = phi_canonical_identity_check(T, s)
    scale = max(1.0, max_abs(Q, Q0))
    coincide = float(np.max(np.abs(Q - Q0))) / scale
    report = {
        "command": "connection",
        "tol": tol,
        "torsion_max_abs": max_abs(T),
        "torsion_forms": forms.to_dict(),
        "t_xi": float(forms.t @ s.xi),
        "t_star_xi": float(forms.t_star @ s.xi),
        "torsion_classes": detected_torsion_classes(T, s),
        "natural_connection": natural.to_dict(),
        "phi_canonical_identity_residual": tcan,
        "phiB_canonical_difference": coincide,
        "phiB_equals_canonical": coincide < tol,
        "F_class": classify(F, s).label,
    }
    try:
        report["correspondence"] = correspondence_check(F, s).to_dict()
    except AmbiguousClass:
        report["correspondence"] = None
    code = EXIT_OK if natural.ok and tcan < tol else EXIT_INVARIANT
    return CommandResult(report, code)


def conformal_trial(F, s, c, tol: float) -> dict:
    """Transform (s, F) by c and measure every invariance the theory asserts for c."""
    s_bar = transform_structure(s, c)
    F_bar = transform_F(F, s, c)
    v_report = validate_structure(s_bar, tol)
    in_g0, g0_res = g0_predicate(c, s, tol)

    N_vec = raise_with(nijenhuis_phiphi(nijenhuis_from_F(F, s), s), s.ginv)
    N_bar_vec = raise_with(nijenhuis_phiphi(nijenhuis_from_F(F_bar, s_bar), s_bar), s_bar.ginv)
    N_law = raise_with(transform_N_phiphi(F, s, c), s_bar.ginv)
    scale_N = max(1.0, max_abs(N_vec, N_bar_vec))
    n_res = max(float(np.max(np.abs(N_bar_vec - N_vec))), float(np.max(np.abs(N_law - N_vec)))) / scale_N

    T = t_canonical(F, s)
    T_vec = raise_with(T, s.ginv)
    T_bar_vec = transform_torsion_oracle(F, s, c)
    scale_T = max(1.0, max_abs(T_vec, T_bar_vec))
    t_res = float(np.max(np.abs(T_bar_vec - T_vec))) / scale_T
    t_law_res = float(np.max(np.abs(transform_torsion(T, s, c) - T_bar_vec))) / scale_T

    src = classify(F, s)
    dst = classify(F_bar, s_bar)
    u0_src = u0_predicate(F, s)[0]
    u0_dst = u0_predicate(F_bar, s_bar)[0]
    fa, fb = associated_forms(F, s), associated_forms(F_bar, s_bar)
    forms_res = max(
        float(np.max(np.abs(getattr(fa, k) - getattr(fb, k)))) for k in ("theta", "theta_star", "omega")
    ) / max(1.0, max_abs(F))

    checks = {"structure_valid": v_report.ok, "N_invariant": n_res < tol, "T_law": t_law_res < tol}
    if u0_src:
        checks["U0_closed"] = u0_dst
    if in_g0:
        checks["T_invariant"] = t_res < tol
        checks["classes_preserved"] = src.detected == dst.detected
        checks["forms_preserved"] = forms_res < tol
    return {
        "element": c.to_dict(),
        "in_G0": in_g0,
        "G0_residuals": g0_res,
        "transformed_structure": v_report.to_dict(),
        "N_phiphi_residual": n_res,
        "T_residual": t_res,
        "T_law_residual": t_law_res,
        "class_before": src.label,
        "class_after": dst.label,
        "forms_residual": forms_res,
        "checks": checks,
        "ok": all(checks.values()),
    }


def cmd_conformal(scene: Scene, tol: float, check_invariance=False, g0_only=False, trials=0, seed=0) -> CommandResult:
    s = scene.structure
    _structure_or_fail(scene, tol)
    rng = np.random.default_rng(seed)
    F = _F_or_fail(scene, tol) if scene.has_F else random_admissible(s, rng)
    if scene.conformal is None and trials <= 0:
        raise ValidationError("scene has no conformal block and no --trials requested")
    elements = []
    if scene.conformal is not None:
        elements.append(scene.conformal.sized(s.dim))
    for _ in range(trials):
        sub_seed = int(rng.integers(2**32))
        elements.append(g0_generator(s, sub_seed) if g0_only else random_element(s, sub_seed))
    results = [conformal_trial(F, s, c, tol) for c in elements]
    failed = [i for i, r in enumerate(results) if not r["ok"]]
    report = {
        "command": "conformal",
        "tol": tol,
        "seed": seed,
        "F_class": classify(F, s).label,
        "trials": results,
        "max_N_residual": max(r["N_phiphi_residual"] for r in results),
        "max_T_residual_G0": max((r["T_residual"] for r in results if r["in_G0"]), default=None),
        "failed_trials": failed,
    }
    code = EXIT_INVARIANT if check_invariance and failed else EXIT_OK
    return CommandResult(report, code)


def render(report, indent: int = 0) -> str:
    """Plain-text rendering of a nested report."""
    pad = "  " * indent
    lines = []
    for key, value in report.items():
        if isinstance(value, dict) and not value:
            lines.append(f"{pad}{key}: {{}}")
        elif isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for i, item in enumerate(value):
                lines.append(f"{pad}  [{i}]")
                lines.append(render(item, indent + 2))
        elif isinstance(value, float):
            lines.append(f"{pad}{key}: {value:.6g}")
        elif isinstance(value, list) and value and isinstance(value[0], float):
            lines.append(f"{pad}{key}: [{', '.join(f'{x:.6g}' for x in value)}]")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acbm", description="Pointwise almost contact B-metric tensor algebra.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "classify", "connection", "conformal"):
        p = sub.add_parser(name)
        p.add_argument("scene", help="scene file")
        p.add_argument("--out", help="write the structured report as JSON to this path")
        if name == "conformal":
            p.add_argument("--check-invariance", action="store_true", help="exit 3 when an asserted invariance fails")
            p.add_argument("--g0-only", action="store_true", help="draw random trial elements from G0")
            p.add_argument("--trials", type=int, default=0, help="number of random group elements")
            p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv=None) -> tuple[int, dict | None]:
    args = build_parser().parse_args(argv)
    try:
        tol = tolerance_from_env()
        scene = load(args.scene)
        if args.command == "validate":
            result = cmd_validate(scene, tol)
        elif args.command == "classify":
            result = cmd_classify(scene, tol)
        elif args.command == "connection":
            result = cmd_connection(scene, tol)
        else:
            result = cmd_conformal(scene, tol, args.check_invariance, args.g0_only, args.trials, args.seed)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE, None
    except OSError as exc:
        print(f"parse error: cannot read {args.scene}: {exc}", file=sys.stderr)
        return EXIT_PARSE, None
    except (ValidationError, InadmissibleF, InvalidParams, InvalidWeingarten, DegenerateMetric, ShapeMismatch) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    print(render(result.report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result.report, fh, indent=2, default=_json_default)
    return result.code, result.report


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
