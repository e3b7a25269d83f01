"""The eleven basic classes F1..F11 of admissible fundamental tensors.

Every class is realized as a linear subspace of R^(d^3):

* constraint classes (F2, F3, F6..F9) are null spaces of their defining
  conditions inside the admissible space;
* formula classes (F1, F4, F5, F10, F11) are images of their parameter maps.

The admissible space is the direct sum of all eleven; ``decompose`` solves one
least-squares system against the concatenated bases.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .fundamental import (
    admissibility_defects,
    associated_forms,
    require_admissible,
)
from .structure import Structure
from .tensors import (
    DEFAULT_TOL,
    at,
    cyclic_sum,
    sub,
    sym_last_pair,
)

BASIC_CLASSES = tuple(f"F{i}" for i in range(1, 12))
FORMULA_CLASSES = ("F1", "F4", "F5", "F10", "F11")
U0 = frozenset({"F1", "F2", "F4", "F5", "F6", "F8", "F9", "F10", "F11"})
SASAKIAN = frozenset({"F4", "F5", "F6"})
SV_CUTOFF = 1e-10
MEMBER_RTOL = 1e-7


class InvalidParams(ValueError):
    pass


class DecompositionFailure(RuntimeError):
    pass


class InvalidWeingarten(ValueError):
    pass


def parse_class(c) -> frozenset[str]:
    """Accept 'F4', 'F4+F5', 'F4⊕F5', 'U0' or an iterable of ids."""
    if isinstance(c, str):
        text = c.replace("⊕", "+").replace(" ", "")
        if text.upper() == "U0":
            return U0
        if text == "F0":
            return frozenset()
        parts = [p for p in text.split("+") if p]
    else:
        parts = list(c)
    out = frozenset(p.strip() for p in parts)
    unknown = out - set(BASIC_CLASSES)
    if unknown:
        raise ValueError(f"unknown class ids {sorted(unknown)}")
    return out


def class_label(ids: Iterable[str]) -> str:
    ids = sorted(set(ids), key=lambda c: int(c[1:]))
    return "F0" if not ids else "+".join(ids)


# Parameter maps of the formula classes.

def f1_from_theta(theta, s: Structure) -> np.ndarray:
    """``(1/2n) {g(x,phi y) theta(phi z) + g(phi x,phi y) theta(phi^2 z)}_(y<->z)``."""
    theta = np.asarray(theta, dtype=float)
    gp = s.g @ s.phi
    gpp = s.phi.T @ s.g @ s.phi
    A = np.einsum("ij,k->ijk", gp, theta @ s.phi) + np.einsum("ij,k->ijk", gpp, theta @ s.phi2)
    return sym_last_pair(A) / (2 * s.n)


def f4_from_scalar(theta_xi: float, s: Structure) -> np.ndarray:
    """``-(theta(xi)/2n) {g(phi x,phi y) eta(z) + g(phi x,phi z) eta(y)}``."""
    gpp = s.phi.T @ s.g @ s.phi
    return -theta_xi / (2 * s.n) * sym_last_pair(np.einsum("ij,k->ijk", gpp, s.eta))


def f5_from_scalar(theta_star_xi: float, s: Structure) -> np.ndarray:
    """``-(theta*(xi)/2n) {g(x,phi y) eta(z) + g(x,phi z) eta(y)}``."""
    gp = s.g @ s.phi
    return -theta_star_xi / (2 * s.n) * sym_last_pair(np.einsum("ij,k->ijk", gp, s.eta))


def f10_from_bilinear(c, s: Structure) -> np.ndarray:
    """``F(x,y,z) = eta(x) c(y,z)`` for a symmetric horizontal c with c(phi.,phi.) = c."""
    return np.einsum("i,jk->ijk", s.eta, np.asarray(c, dtype=float))


def f11_from_omega(omega, s: Structure) -> np.ndarray:
    """``eta(x) {eta(y) omega(z) + eta(z) omega(y)}``."""
    return sym_last_pair(np.einsum("i,j,k->ijk", s.eta, s.eta, np.asarray(omega, dtype=float)))


def phi_compatible_part(B, s: Structure) -> np.ndarray:
    """Project a bilinear form onto the symmetric forms with c(phi., phi.) = c, c(xi, .) = 0."""
    B = np.asarray(B, dtype=float)
    B = 0.5 * (B + B.T)
    return 0.5 * (s.phi.T @ B @ s.phi + s.phi2.T @ B @ s.phi2)


def bilinear_xi_part(F, s: Structure, slot_xi: int = 2) -> np.ndarray:
    """``b(x, y) = F(x, y, xi)``."""
    return at(F, s.xi, slot_xi)


def _split_by_xi(b: np.ndarray, s: Structure) -> np.ndarray:
    """``b(x,y) eta(z) + b(x,z) eta(y)``."""
    return sym_last_pair(np.einsum("ij,k->ijk", b, s.eta))


def class_defects(F: np.ndarray, s: Structure, c: str) -> list[np.ndarray]:
    """Linear defect tensors whose joint vanishing defines membership in the basic class c."""
    phi, xi = s.phi, s.xi
    if c in FORMULA_CLASSES:
        forms = associated_forms(F, s) if c in ("F1", "F4", "F5") else None
        if c == "F1":
            return [F - f1_from_theta(forms.theta, s)]
        if c == "F4":
            return [F - f4_from_scalar(float(forms.theta @ xi), s)]
        if c == "F5":
            return [F - f5_from_scalar(float(forms.theta_star @ xi), s)]
        if c == "F10":
            return [F - np.einsum("i,jk->ijk", s.eta, phi.T @ at(F, xi, 0) @ phi)]
        omega = at(at(F, xi, 0), xi, 0)
        return [F - f11_from_omega(omega, s)]
    horizontal = [at(F, xi, 0), at(F, xi, 1)]
    if c == "F2":
        forms = associated_forms(F, s)
        return horizontal + [cyclic_sum(sub(F, phi, 2)), forms.theta]
    if c == "F3":
        return horizontal + [cyclic_sum(F)]
    b = bilinear_xi_part(F, s)
    split = F - _split_by_xi(b, s)
    bpp = phi.T @ b @ phi
    if c in ("F6", "F7"):
        sign = 1.0 if c == "F6" else -1.0
        forms = associated_forms(F, s)
        return [split, b - sign * b.T, b + bpp, forms.theta, forms.theta_star]
    if c in ("F8", "F9"):
        sign = 1.0 if c == "F8" else -1.0
        return [split, b - sign * b.T, b - bpp]
    raise ValueError(f"unknown basic class {c!r}")


def _unit_tensors(d: int):
    for flat in range(d**3):
        E = np.zeros(d**3)
        E[flat] = 1.0
        yield E.reshape(d, d, d)


def _matrix_of(linear_map, d: int) -> np.ndarray:
    cols = [np.concatenate([np.ravel(t) for t in linear_map(E)]) for E in _unit_tensors(d)]
    return np.array(cols).T


def _null_space(A: np.ndarray, cutoff: float = SV_CUTOFF) -> np.ndarray:
    _, sv, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(sv > cutoff * max(1.0, sv[0] if sv.size else 0.0)))
    return vt[rank:].T


def _range(A: np.ndarray, cutoff: float = SV_CUTOFF) -> np.ndarray:
    u, sv, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(sv > cutoff * max(1.0, sv[0] if sv.size else 0.0)))
    return u[:, :rank]


@dataclass(frozen=True)
class ClassSpaces:
    """Orthonormal bases (columns, flattened d^3 tensors) of the admissible space and each class."""

    dim: int
    admissible: np.ndarray
    bases: dict[str, np.ndarray]

    @property
    def dimensions(self) -> dict[str, int]:
        return {c: b.shape[1] for c, b in self.bases.items()}

    @property
    def stacked(self) -> np.ndarray:
        return np.hstack([self.bases[c] for c in BASIC_CLASSES])


def _formula_basis(c: str, s: Structure) -> np.ndarray:
    d = s.dim
    eye = np.eye(d)
    if c == "F1":
        images = [f1_from_theta(v, s) for v in eye]
    elif c == "F4":
        images = [f4_from_scalar(1.0, s)]
    elif c == "F5":
        images = [f5_from_scalar(1.0, s)]
    elif c == "F11":
        images = [f11_from_omega(v - (v @ s.xi) * s.eta, s) for v in eye]
    else:
        images = []
        for i in range(d):
            for j in range(i, d):
                B = np.zeros((d, d))
                B[i, j] = B[j, i] = 1.0
                images.append(f10_from_bilinear(phi_compatible_part(B, s), s))
    return _range(np.array([im.ravel() for im in images]).T)


def _compute_spaces(s: Structure) -> ClassSpaces:
    d = s.dim
    adm_matrix = _matrix_of(lambda E: admissibility_defects(E, s), d)
    admissible = _null_space(adm_matrix)
    bases = {}
    for c in BASIC_CLASSES:
        if c in FORMULA_CLASSES:
            bases[c] = _formula_basis(c, s)
        else:
            # Defects restricted to the admissible subspace.
            cls = np.array(
                [np.concatenate([np.ravel(t) for t in class_defects(v.reshape(d, d, d), s, c)]) for v in admissible.T]
            ).T
            coeffs = _null_space(cls) if cls.size else np.eye(admissible.shape[1])
            bases[c] = _range(admissible @ coeffs) if coeffs.shape[1] else np.zeros((d**3, 0))
    return ClassSpaces(d, admissible, bases)


_cache: dict[bytes, ClassSpaces] = {}
_lock = threading.Lock()


def class_spaces(s: Structure) -> ClassSpaces:
    """Class bases for ``s``, computed once per structure."""
    spaces = _cache.get(s.key)
    if spaces is None:
        spaces = _compute_spaces(s)
        with _lock:
            _cache.setdefault(s.key, spaces)
            if len(_cache) > 256:
                _cache.pop(next(iter(_cache)))
    return spaces


def decompose(F, s: Structure, tol: float = 1e-8) -> dict[str, np.ndarray]:
    """Split admissible F into its eleven class components."""
    F = require_admissible(F, s)
    spaces = class_spaces(s)
    M = spaces.stacked
    coeffs, *_ = np.linalg.lstsq(M, F.ravel(), rcond=None)
    comps, start = {}, 0
    for c in BASIC_CLASSES:
        k = spaces.bases[c].shape[1]
        comps[c] = (spaces.bases[c] @ coeffs[start : start + k]).reshape(F.shape)
        start += k
    residual = float(np.max(np.abs(sum(comps.values()) - F))) / max(1.0, float(np.max(np.abs(F))))
    if residual > tol:
        raise DecompositionFailure(f"reassembly residual {residual:.3e} exceeds {tol:.1e}")
    return comps


def membership_residual(F, s: Structure, c) -> float:
    """Max-abs defect of the class condition(s), normalized by max(1, |F|).

    A single basic class is tested through its own defining condition; a union
    through the components that ``decompose`` assigns outside it.
    """
    F = require_admissible(F, s)
    ids = parse_class(c)
    scale = max(1.0, float(np.max(np.abs(F))))
    if len(ids) == 1:
        (cid,) = ids
        return max(float(np.max(np.abs(t))) for t in class_defects(F, s, cid)) / scale
    comps = decompose(F, s)
    outside = sum((comps[k] for k in BASIC_CLASSES if k not in ids), np.zeros_like(F))
    return float(np.max(np.abs(outside))) / scale


@dataclass(frozen=True)
class ClassificationReport:
    norms: dict[str, float]
    residuals: dict[str, float]
    detected: frozenset[str]
    reassembly_residual: float

    @property
    def label(self) -> str:
        return class_label(self.detected)

    def to_dict(self) -> dict:
        return {
            "class": self.label,
            "component_norms": dict(self.norms),
            "membership_residuals": dict(self.residuals),
            "reassembly_residual": self.reassembly_residual,
        }


def classify(F, s: Structure, tol: float = MEMBER_RTOL) -> ClassificationReport:
    """Minimal union of basic classes containing F (components above ``tol * |F|``)."""
    F = require_admissible(F, s)
    comps = decompose(F, s)
    total = float(np.linalg.norm(F))
    norms = {c: float(np.linalg.norm(comps[c])) for c in BASIC_CLASSES}
    threshold = tol * max(total, 1e-300)
    detected = frozenset(c for c in BASIC_CLASSES if total > 0 and norms[c] > threshold)
    residuals = {c: membership_residual(F, s, c) for c in BASIC_CLASSES}
    reassembly = float(np.max(np.abs(sum(comps.values()) - F)))
    return ClassificationReport(norms, residuals, detected, reassembly)


def construct_class(c: str, s: Structure, params=None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A member of the basic class ``c`` built from its parameters.

    F1: covector theta with theta(xi) = 0.  F4: theta(xi).  F5: theta*(xi).
    F10: symmetric horizontal bilinear form c with c(phi., phi.) = c.
    F11: covector omega with omega(xi) = 0.
    F2, F3, F6..F9: coefficient vector in the numerically computed class basis.
    """
    if c not in BASIC_CLASSES:
        raise ValueError(f"unknown basic class {c!r}")
    d = s.dim
    if c in ("F4", "F5"):
        value = float(np.asarray(params, dtype=float).reshape(()))
        return (f4_from_scalar if c == "F4" else f5_from_scalar)(value, s)
    if c in ("F1", "F11"):
        v = np.asarray(params, dtype=float)
        if v.shape != (d,):
            raise InvalidParams(f"{c} needs a covector of length {d}")
        if abs(v @ s.xi) > tol * max(1.0, float(np.max(np.abs(v)))):
            raise InvalidParams(f"{c} covector must vanish on xi, got {v @ s.xi:.3e}")
        return (f1_from_theta if c == "F1" else f11_from_omega)(v, s)
    if c == "F10":
        B = np.asarray(params, dtype=float)
        if B.shape != (d, d):
            raise InvalidParams(f"F10 needs a {d}x{d} bilinear form")
        scale = max(1.0, float(np.max(np.abs(B))))
        if float(np.max(np.abs(B - phi_compatible_part(B, s)))) > tol * scale:
            raise InvalidParams("F10 datum must be symmetric, horizontal and phi-invariant")
        return f10_from_bilinear(B, s)
    basis = class_spaces(s).bases[c]
    coeffs = np.asarray(params, dtype=float).ravel()
    if coeffs.shape != (basis.shape[1],):
        raise InvalidParams(f"{c} needs {basis.shape[1]} basis coefficients, got {coeffs.shape}")
    return (basis @ coeffs).reshape(d, d, d)


def random_params(c: str, s: Structure, rng: np.random.Generator):
    """Random nonzero parameters accepted by ``construct_class``."""
    d = s.dim
    if c in ("F4", "F5"):
        return float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
    if c in ("F1", "F11"):
        v = rng.standard_normal(d)
        return v - (v @ s.xi) * s.eta
    if c == "F10":
        return phi_compatible_part(rng.standard_normal((d, d)), s)
    k = class_spaces(s).bases[c].shape[1]
    return rng.standard_normal(k)


def random_member(c, s: Structure, rng: np.random.Generator) -> np.ndarray:
    """Random member of a basic class or of a union of classes."""
    ids = parse_class(c)
    F = np.zeros((s.dim,) * 3)
    for cid in sorted(ids):
        F = F + construct_class(cid, s, random_params(cid, s, rng))
    return F


def random_admissible(s: Structure, rng: np.random.Generator) -> np.ndarray:
    basis = class_spaces(s).admissible
    return (basis @ rng.standard_normal(basis.shape[1])).reshape((s.dim,) * 3)


def weingarten_defects(A, s: Structure) -> dict[str, float]:
    A = np.asarray(A, dtype=float)
    gA = s.g @ A
    return {
        "commutes_with_phi": float(np.max(np.abs(s.phi @ A - A @ s.phi))),
        "kills_xi": float(np.max(np.abs(A @ s.xi))),
        "horizontal_image": float(np.max(np.abs(s.eta @ A))),
        "g_symmetric": float(np.max(np.abs(gA - gA.T))),
    }


def construct_from_weingarten(A, s: Structure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``F(x,y,z) = eta(y) g(Ax,z) + eta(z) g(Ax,y)`` for a compatible shape operator A."""
    A = np.asarray(A, dtype=float)
    if A.shape != (s.dim, s.dim):
        raise InvalidWeingarten(f"A must be {s.dim}x{s.dim}")
    scale = max(1.0, float(np.max(np.abs(A))))
    bad = {k: v for k, v in weingarten_defects(A, s).items() if v > tol * scale}
    if bad:
        raise InvalidWeingarten(f"Weingarten map violates {sorted(bad)}")
    gAx = (s.g @ A).T  # gAx[i, k] = g(A e_i, e_k)
    return np.einsum("j,ik->ijk", s.eta, gAx) + np.einsum("k,ij->ijk", s.eta, gAx)


def sphere_F(psi: float, s: Structure) -> np.ndarray:
    """Sasakian-type point datum ``F4(theta(xi) = 2n cos psi) + F5(theta*(xi) = 2n sin psi)``.

    Models the time-like sphere family with parameter ``psi``.
    """
    n = s.n
    return f4_from_scalar(2 * n * np.cos(psi), s) + f5_from_scalar(2 * n * np.sin(psi), s)
