"""Natural connections as difference tensors from the Levi-Civita connection.

A connection D is stored as ``Q(x,y,z) = g(D_x y - nabla_x y, z)``; its torsion
as ``T(x,y,z) = g(T(x,y), z)``.  The Levi-Civita connection itself is Q = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fundamental import metric_trace, nijenhuis_from_F, require_admissible
from .structure import Structure, ValidationReport
from .tensors import (
    DEFAULT_TOL,
    antisym_first_pair,
    antisym_last_pair,
    at,
    max_abs,
    raise_with,
    sub,
    subs,
)


def _f_phi_xi(F: np.ndarray, s: Structure) -> np.ndarray:
    """``M[a, b] = F(e_a, phi e_b, xi)``, i.e. ``(nabla_a eta)(e_b)``."""
    return at(sub(F, s.phi, 1), s.xi, 2)


def q0_phiB(F, s: Structure) -> np.ndarray:
    """``Q0(x,y,z) = 1/2 {F(x,phi y,z) + eta(z)F(x,phi y,xi) - 2 eta(y)F(x,phi z,xi)}``."""
    F = require_admissible(F, s)
    M = _f_phi_xi(F, s)
    return 0.5 * (
        sub(F, s.phi, 1)
        + np.einsum("ij,k->ijk", M, s.eta)
        - 2.0 * np.einsum("j,ik->ijk", s.eta, M)
    )


def t0_phiB(F, s: Structure) -> np.ndarray:
    """``T0(x,y,z) = 1/2 {F(x,phi y,z) + eta(z)F(x,phi y,xi) + 2 eta(x)F(y,phi z,xi)}_[x<->y]``."""
    F = require_admissible(F, s)
    M = _f_phi_xi(F, s)
    inner = sub(F, s.phi, 1) + np.einsum("ij,k->ijk", M, s.eta) + 2.0 * np.einsum("i,jk->ijk", s.eta, M)
    return 0.5 * antisym_first_pair(inner)


def _nijenhuis_correction(N: np.ndarray, s: Structure) -> np.ndarray:
    """``N(phi^2 z, phi^2 y, phi^2 x) + 2 N(phi z, phi y, xi) eta(x)`` indexed by (x, y, z)."""
    first = subs(N, s.phi2, s.phi2, s.phi2).transpose(2, 1, 0)
    M = at(subs(N, s.phi, s.phi, None), s.xi, 2)  # M[a, b] = N(phi e_a, phi e_b, xi)
    return first + 2.0 * np.einsum("i,kj->ijk", s.eta, M)


def q_canonical(F, s: Structure) -> np.ndarray:
    """Difference tensor of the phi-canonical connection."""
    F = require_admissible(F, s)
    return q0_phiB(F, s) - _nijenhuis_correction(nijenhuis_from_F(F, s), s) / 8.0


def t_canonical(F, s: Structure) -> np.ndarray:
    """Torsion of the phi-canonical connection."""
    F = require_admissible(F, s)
    return t0_phiB(F, s) - antisym_first_pair(_nijenhuis_correction(nijenhuis_from_F(F, s), s)) / 8.0


def torsion_of(Q: np.ndarray) -> np.ndarray:
    """``T(x,y,z) = Q(x,y,z) - Q(y,x,z)`` (both connections share the Levi-Civita part)."""
    return antisym_first_pair(Q)


def natural_connection_check(Q, F, s: Structure, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Residuals of ``Q(x,y,phi z) - Q(x,phi y,z) = F(x,y,z)`` and ``Q(x,y,z) = -Q(x,z,y)``."""
    Q = np.asarray(Q, dtype=float)
    F = np.asarray(F, dtype=float)
    scale = max(1.0, max_abs(Q, F))
    phi_rule = sub(Q, s.phi, 2) - sub(Q, s.phi, 1) - F
    metric_rule = Q + Q.transpose(0, 2, 1)
    return ValidationReport(
        {
            "phi_parallel": float(np.max(np.abs(phi_rule))) / scale,
            "metric_parallel": float(np.max(np.abs(metric_rule))) / scale,
        },
        tol,
    )


def phi_canonical_defect(T, s: Structure) -> np.ndarray:
    """The tensor that vanishes exactly when T is the torsion of a phi-canonical connection."""
    T = np.asarray(T, dtype=float)
    phi, xi, eta = s.phi, s.xi, s.eta
    T_xi = at(T, xi, 0)
    inner = (
        T
        - subs(T, None, phi, phi)
        - np.einsum("i,jk->ijk", eta, T_xi - phi.T @ T_xi @ phi)
    )
    mixed = at(T, xi, 1) - at(T, xi, 2)  # T(x,xi,z) - T(x,z,xi)
    hat = at(at(T, xi, 1), xi, 1)  # T(z,xi,xi)
    inner = inner - np.einsum("j,ik->ijk", eta, mixed) + np.einsum("j,i,k->ijk", eta, eta, hat)
    return antisym_last_pair(inner)


def phi_canonical_identity_check(T, s: Structure) -> float:
    T = np.asarray(T, dtype=float)
    return float(np.max(np.abs(phi_canonical_defect(T, s)))) / max(1.0, max_abs(T))


def hayden_Q_from_T(T) -> np.ndarray:
    """``Q(x,y,z) = 1/2 {T(x,y,z) - T(y,z,x) + T(z,x,y)}``."""
    T = np.asarray(T, dtype=float)
    return 0.5 * (T - np.transpose(T, (2, 0, 1)) + np.transpose(T, (1, 2, 0)))


def as_vector_valued(A: np.ndarray, s: Structure) -> np.ndarray:
    """(1,2) form of a (0,3) tensor lowered with the metric of ``s``."""
    return raise_with(A, s.ginv)


@dataclass(frozen=True)
class TorsionForms:
    t: np.ndarray
    t_star: np.ndarray
    t_hat: np.ndarray

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "t_star": self.t_star.tolist(), "t_hat": self.t_hat.tolist()}


def torsion_forms(T, s: Structure, convention: str | None = None) -> TorsionForms:
    """``t(x) = g^ij T(x,e_i,e_j)``, ``t*(x) = g^ij T(x,e_i,phi e_j)``, ``t^(x) = T(x,xi,xi)``."""
    T = np.asarray(T, dtype=float)
    t = metric_trace(T, s, (1, 2), convention)
    t_star = metric_trace(sub(T, s.phi, 2), s, (1, 2), convention)
    t_hat = at(at(T, s.xi, 1), s.xi, 1)
    return TorsionForms(t, t_star, t_hat)
