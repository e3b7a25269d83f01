"""Torsion classes T_jk and their correspondence with the basic classes F_i.

For the phi-canonical connection, each basic class F_i is characterized by a
closed form (or a set of identities) for its torsion T', and by the torsion
class T_jk that T' falls into.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classes import MEMBER_RTOL, classify, parse_class
from .connections import TorsionForms, t_canonical, torsion_forms
from .structure import Structure
from .tensors import antisym_first_pair, at, cyclic_sum, max_abs, sub, subs

TORSION_CLASSES = ("T11", "T12", "T13", "T14", "T21", "T22", "T31", "T32", "T33", "T34", "T41")


class AmbiguousClass(ValueError):
    """F is not a member of a single basic class."""


def _xi_parts(T: np.ndarray, s: Structure):
    c = at(T, s.xi, 0)  # c[y, z] = T(xi, y, z)
    b = at(T, s.xi, 2)  # b[x, y] = T(x, y, xi)
    return c, b


def _vertical_split(T: np.ndarray, s: Structure) -> tuple[np.ndarray, np.ndarray]:
    """Split into ``eta(z) T(phi^2 x, phi^2 y, xi)`` and
    ``eta(x) T(xi, phi^2 y, phi^2 z) - eta(y) T(xi, phi^2 x, phi^2 z)``."""
    p2, eta = s.phi2, s.eta
    c, b = _xi_parts(T, s)
    part2 = np.einsum("ij,k->ijk", p2.T @ b @ p2, eta)
    cpp = p2.T @ c @ p2
    part3 = np.einsum("i,jk->ijk", eta, cpp) - np.einsum("j,ik->ijk", eta, cpp)
    return part2, part3


def torsion_class_defects(T, s: Structure, c: str) -> list[np.ndarray]:
    T = np.asarray(T, dtype=float)
    phi, xi, eta = s.phi, s.xi, s.eta
    c_xi, b_xi = _xi_parts(T, s)
    if c in ("T11", "T12", "T13", "T14"):
        base = [c_xi, b_xi]
        if c in ("T11", "T12"):
            sign = -1.0 if c == "T11" else 1.0
            return base + [T + subs(T, phi, phi, None), T - sign * subs(T, None, phi, phi)]
        tail = cyclic_sum(T) if c == "T13" else cyclic_sum(sub(T, phi, 0))
        return base + [T - subs(T, phi, phi, None), tail]
    part2, part3 = _vertical_split(T, s)
    if c in ("T21", "T22"):
        sign = -1.0 if c == "T21" else 1.0
        return [T - part2, b_xi - sign * phi.T @ b_xi @ phi]
    if c in ("T31", "T32", "T33", "T34"):
        sym = 1.0 if c in ("T31", "T33") else -1.0
        phi_sign = -1.0 if c in ("T31", "T32") else 1.0
        return [T - part3, c_xi - sym * c_xi.T, c_xi - phi_sign * phi.T @ c_xi @ phi]
    if c == "T41":
        t_hat = at(at(T, xi, 1), xi, 1)
        return [T - np.einsum("k,j,i->ijk", eta, eta, t_hat) + np.einsum("k,i,j->ijk", eta, eta, t_hat)]
    raise ValueError(f"unknown torsion class {c!r}")


def torsion_membership_residual(T, s: Structure, c: str) -> float:
    """Max-abs defect of the torsion-class conditions, normalized by max(1, |T|)."""
    T = np.asarray(T, dtype=float)
    return max(float(np.max(np.abs(d))) for d in torsion_class_defects(T, s, c)) / max(1.0, max_abs(T))


def composite_residual(T, s: Structure, horizontal_part: str, mixed_part: str) -> float:
    """Residual of ``T`` in ``T2x + T3y`` tested part by part after the eta-split."""
    T = np.asarray(T, dtype=float)
    part2, part3 = _vertical_split(T, s)
    scale = max(1.0, max_abs(T))
    rest = float(np.max(np.abs(T - part2 - part3))) / scale
    return max(
        rest,
        torsion_membership_residual(part2, s, horizontal_part) * max(1.0, max_abs(part2)) / scale,
        torsion_membership_residual(part3, s, mixed_part) * max(1.0, max_abs(part3)) / scale,
    )


def closed_form_defects(T, s: Structure, c: str, forms: TorsionForms | None = None) -> list[np.ndarray]:
    """Defects of the torsion characterization of the basic class ``c``."""
    T = np.asarray(T, dtype=float)
    phi, p2, xi, eta, g = s.phi, s.phi2, s.xi, s.eta, s.g
    n = s.n
    forms = forms or torsion_forms(T, s)
    c_xi, b_xi = _xi_parts(T, s)
    g1 = phi.T @ g  # g1[y, z] = g(phi y, z)
    g2 = p2.T @ g  # g2[y, z] = g(phi^2 y, z)

    def split_by_xi(cc):
        return np.einsum("i,jk->ijk", eta, cc) - np.einsum("j,ik->ijk", eta, cc)

    if c == "F1":
        t = forms.t
        A = np.einsum("i,jk->ijk", t @ p2, g2) + np.einsum("i,jk->ijk", t @ phi, g1)
        return [T - antisym_first_pair(A) / (2 * n)]
    if c == "F2":
        return [c_xi, b_xi, T - subs(T, phi, phi, None), forms.t]
    if c == "F3":
        return [c_xi, b_xi, T - subs(T, None, phi, phi)]
    if c == "F4":
        return [T + forms.t_star @ xi / (2 * n) * antisym_first_pair(np.einsum("i,jk->ijk", eta, g1))]
    if c == "F5":
        return [T + forms.t @ xi / (2 * n) * antisym_first_pair(np.einsum("i,jk->ijk", eta, g2))]
    if c == "F6":
        return [T - split_by_xi(c_xi), c_xi - c_xi.T, c_xi + phi.T @ c_xi @ phi]
    if c in ("F7", "F8"):
        sign = 1.0 if c == "F7" else -1.0  # upper sign for F7
        return [
            T - split_by_xi(c_xi) - np.einsum("ij,k->ijk", b_xi, eta),
            c_xi + c_xi.T,
            c_xi + sign * phi.T @ c_xi @ phi,
            c_xi - 0.5 * b_xi,
            c_xi + sign * 0.5 * phi.T @ b_xi @ phi,
        ]
    if c in ("F9", "F10"):
        sym = 1.0 if c == "F9" else -1.0
        return [T - split_by_xi(c_xi), c_xi - sym * c_xi.T, c_xi - phi.T @ c_xi @ phi]
    if c == "F11":
        t_hat = forms.t_hat
        return [T - np.einsum("i,j,k->ijk", t_hat, eta, eta) + np.einsum("j,i,k->ijk", t_hat, eta, eta)]
    raise ValueError(f"unknown basic class {c!r}")


def closed_form_residual(T, s: Structure, c: str) -> float:
    T = np.asarray(T, dtype=float)
    return max(float(np.max(np.abs(d))) for d in closed_form_defects(T, s, c)) / max(1.0, max_abs(T))


# Torsion-class row for each basic class: (torsion classes, t' vanishes?, t'* vanishes?).
# ``None`` means no side condition; a pair of classes is a composite target.
CORRESPONDENCE = {
    "F1": (("T13",), False, None),
    "F2": (("T13",), True, None),
    "F3": (("T12",), None, None),
    "F4": (("T31",), True, False),
    "F5": (("T31",), False, True),
    "F6": (("T31",), True, True),
    "F7": (("T21", "T32"), None, None),
    "F8": (("T22", "T34"), None, None),
    "F9": (("T33",), None, None),
    "F10": (("T34",), None, None),
    "F11": (("T41",), None, None),
}


@dataclass
class CorrespondenceReport:
    f_class: str
    expected: tuple[str, ...]
    residuals: dict[str, float]
    target_residual: float
    t_norm: float
    t_star_norm: float
    side_conditions_ok: bool
    closed_form_residual: float
    flags: list[str] = field(default_factory=list)
    tol: float = 1e-8

    @property
    def ok(self) -> bool:
        return self.target_residual < self.tol and self.side_conditions_ok and self.closed_form_residual < self.tol

    def to_dict(self) -> dict:
        return {
            "class": self.f_class,
            "expected_torsion_class": "+".join(self.expected) or "T=0",
            "target_residual": self.target_residual,
            "torsion_class_residuals": dict(self.residuals),
            "t_norm": self.t_norm,
            "t_star_norm": self.t_star_norm,
            "side_conditions_ok": self.side_conditions_ok,
            "closed_form_residual": self.closed_form_residual,
            "flags": list(self.flags),
            "ok": self.ok,
        }


def detected_torsion_classes(T, s: Structure, tol: float = 1e-8) -> list[str]:
    """Torsion classes whose conditions ``T`` satisfies (not assumed disjoint)."""
    if max_abs(T) == 0.0:
        return []
    return [c for c in TORSION_CLASSES if torsion_membership_residual(T, s, c) < tol]


def correspondence_check(F, s: Structure, tol: float = 1e-8) -> CorrespondenceReport:
    """Compare the phi-canonical torsion of a pure class member with the expected row."""
    report = classify(F, s)
    if len(report.detected) > 1:
        raise AmbiguousClass(f"F lies in {report.label}, not in a single basic class")
    T = t_canonical(F, s)
    forms = torsion_forms(T, s)
    residuals = {c: torsion_membership_residual(T, s, c) for c in TORSION_CLASSES}
    scale = max(1.0, max_abs(T))
    t_norm = float(np.linalg.norm(forms.t)) / scale
    ts_norm = float(np.linalg.norm(forms.t_star)) / scale
    if not report.detected:
        return CorrespondenceReport("F0", (), residuals, max_abs(T), t_norm, ts_norm, True, 0.0, [], tol)
    (fc,) = report.detected
    targets, t_zero, ts_zero = CORRESPONDENCE[fc]
    if len(targets) == 2:
        target = composite_residual(T, s, *targets)
    else:
        target = residuals[targets[0]]
    vanish = MEMBER_RTOL
    side_ok = True
    if t_zero is not None:
        side_ok &= (t_norm < vanish) == t_zero
    if ts_zero is not None:
        side_ok &= (ts_norm < vanish) == ts_zero
    flags = []
    closed = closed_form_residual(T, s, fc)
    return CorrespondenceReport(fc, targets, residuals, target, t_norm, ts_norm, side_ok, closed, flags, tol)


def classes_u0(ids) -> bool:
    return parse_class(ids) <= parse_class("U0")


def sphere_torsion(psi: float, s: Structure) -> np.ndarray:
    """Expected phi-canonical torsion ``{eta(x)(cos psi g(y,phi z) - sin psi g(phi y,phi z))}_[x<->y]``."""
    h = np.cos(psi) * (s.g @ s.phi) - np.sin(psi) * (s.phi.T @ s.g @ s.phi)
    return antisym_first_pair(np.einsum("i,jk->ijk", s.eta, h))
