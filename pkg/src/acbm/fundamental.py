"""The fundamental tensor F(x,y,z) = g((nabla_x phi) y, z), its 1-forms and the Nijenhuis tensor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structure import Structure, ValidationReport
from .tensors import (
    DEFAULT_TOL,
    antisym_first_pair,
    as_tensor3,
    at,
    sub,
    subs,
)

# Basis used by the metric traces defining theta, theta*, t', t'*.
# "horizontal" sums over e_1..e_2n only; "full" also includes xi.  Only the
# horizontal trace gives theta* o phi = -theta o phi^2 for every admissible F.
TRACE_CONVENTION = "horizontal"


class InadmissibleF(ValueError):
    """F violates F(x,y,z) = F(x,z,y) = F(x,phi y,phi z) + eta(y)F(x,xi,z) + eta(z)F(x,y,xi)."""


def admissibility_defects(F: np.ndarray, s: Structure) -> tuple[np.ndarray, np.ndarray]:
    """The two tensors that vanish exactly when F is admissible."""
    sym = F - F.transpose(0, 2, 1)
    rhs = (
        subs(F, None, s.phi, s.phi)
        + np.einsum("j,ik->ijk", s.eta, at(F, s.xi, 1))
        + np.einsum("k,ij->ijk", s.eta, at(F, s.xi, 2))
    )
    return sym, F - rhs


def check_admissible(F, s: Structure, tol: float = DEFAULT_TOL) -> ValidationReport:
    F = as_tensor3(F, s.dim)
    sym, phi_rule = admissibility_defects(F, s)
    scale = max(1.0, float(np.max(np.abs(F))))
    return ValidationReport(
        {
            "symmetric_last_pair": float(np.max(np.abs(sym))) / scale,
            "phi_compatibility": float(np.max(np.abs(phi_rule))) / scale,
        },
        tol,
    )


def require_admissible(F, s: Structure, tol: float = 1e-8) -> np.ndarray:
    F = as_tensor3(F, s.dim)
    report = check_admissible(F, s, tol)
    if not report.ok:
        raise InadmissibleF(f"F is not admissible: residuals {report.residuals}")
    return F


@dataclass(frozen=True)
class AssociatedForms:
    theta: np.ndarray
    theta_star: np.ndarray
    omega: np.ndarray

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("theta", "theta_star", "omega")}


def metric_trace(A: np.ndarray, s: Structure, slots: tuple[int, int], convention: str | None = None) -> np.ndarray:
    """``g^{ij} A(.., e_i, .., e_j, ..)`` over the two given slots.

    With the horizontal convention the xi-xi contribution is removed; in an
    adapted basis it equals ``A(.., xi, .., xi, ..)`` since ``g^{xi xi} = 1``.
    """
    convention = convention or TRACE_CONVENTION
    a, b = slots
    letters = "ijk"
    idx = list(letters)
    idx[a], idx[b] = "p", "q"
    rest = "".join(c for pos, c in enumerate(letters) if pos not in slots)
    tr = np.einsum(f"pq,{''.join(idx)}->{rest}", s.ginv, A)
    if convention == "horizontal":
        tr = tr - at(at(A, s.xi, b), s.xi, a)
    elif convention != "full":
        raise ValueError(f"unknown trace convention {convention!r}")
    return tr


def associated_forms(F, s: Structure, convention: str | None = None) -> AssociatedForms:
    F = require_admissible(F, s)
    theta = metric_trace(F, s, (0, 1), convention)
    theta_star = metric_trace(sub(F, s.phi, 1), s, (0, 1), convention)
    omega = at(at(F, s.xi, 0), s.xi, 0)
    return AssociatedForms(theta, theta_star, omega)


def nijenhuis_from_F(F, s: Structure) -> np.ndarray:
    """``N(x,y,z) = {F(phi x,y,z) - F(x,y,phi z) + F(x,phi y,xi) eta(z)}_[x<->y]``."""
    F = require_admissible(F, s)
    inner = (
        sub(F, s.phi, 0)
        - sub(F, s.phi, 2)
        + np.einsum("ij,k->ijk", at(sub(F, s.phi, 1), s.xi, 2), s.eta)
    )
    return antisym_first_pair(inner)


def nijenhuis_phiphi(N: np.ndarray, s: Structure) -> np.ndarray:
    """``N(phi x, phi y, z)``."""
    return subs(N, s.phi, s.phi, None)


def u0_predicate(F, s: Structure, tol: float = 1e-8) -> tuple[bool, float]:
    """Whether N(phi., phi.) vanishes, i.e. F lies in the class U0."""
    F = require_admissible(F, s)
    scale = max(1.0, float(np.max(np.abs(F))))
    residual = float(np.max(np.abs(nijenhuis_phiphi(nijenhuis_from_F(F, s), s)))) / scale
    return residual < tol, residual


def lemma_identities(N: np.ndarray, s: Structure) -> dict[str, np.ndarray]:
    """Defects of the phi-reflection identities satisfied by every Nijenhuis tensor."""
    p, p2 = s.phi, s.phi2
    a = subs(N, p, p, p)
    b = -subs(N, p2, p2, p)
    c = subs(N, p, p2, p2)
    e = subs(N, p2, p, p)
    f = subs(N, p, p2, p)
    h = -subs(N, p, p, p2)
    return {"ppp=-p2p2p": a - b, "ppp=pp2p2": a - c, "p2pp=pp2p": e - f, "p2pp=-ppp2": e - h}


def nijenhuis_closed_form(F, s: Structure, c: str) -> np.ndarray:
    """N of a pure member of the basic class ``c``, rewritten through F.

    Uses ``g((nabla_x phi) y, z) = F(x,y,z)`` and ``(nabla_x eta) y = F(x, phi y, xi)``.
    """
    F = require_admissible(F, s)
    phi, xi, eta = s.phi, s.xi, s.eta
    nabla_eta = at(sub(F, phi, 1), xi, 2)  # [a, b] = (nabla_a eta)(e_b)
    if c in ("F1", "F2", "F4", "F5", "F6"):
        return np.zeros_like(F)
    if c == "F3":
        return 2.0 * (sub(F, phi, 0) - sub(F, phi, 2))
    if c == "F7":
        return 4.0 * np.einsum("ij,k->ijk", nabla_eta, eta)
    if c in ("F8", "F9"):
        # g(nabla_y xi, z) = (nabla_y eta) z
        return 2.0 * (np.einsum("i,jk->ijk", eta, nabla_eta) - np.einsum("j,ik->ijk", eta, nabla_eta))
    if c == "F10":
        M = at(sub(F, phi, 2), xi, 0)  # [b, c] = F(xi, e_b, phi e_c)
        return -np.einsum("i,jk->ijk", eta, M) + np.einsum("j,ik->ijk", eta, M)
    if c == "F11":
        omega_phi = at(at(F, xi, 0), xi, 0) @ phi
        return np.einsum("i,j,k->ijk", eta, omega_phi, eta) - np.einsum("j,i,k->ijk", eta, omega_phi, eta)
    raise ValueError(f"unknown basic class {c!r}")
