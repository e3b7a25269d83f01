"""The general contactly conformal group G acting pointwise, and its subgroup G0.

A group element at the point is the data (u, v, w; du, dv, dw).  It maps
(phi, xi, eta, g) to (phi, e^-w xi, e^w eta, g_bar) with

    g_bar(x, y) = alpha g(x, y) + beta g(x, phi y) + (gamma - alpha) eta(x) eta(y),
    alpha = e^2u cos 2v,  beta = e^2u sin 2v,  gamma = e^2w.

Each long transformation law below has a companion ``*_oracle`` computed from
definitions (Koszul formula for the Levi-Civita connections, then the
connection formulas applied on both sides), so the transcriptions can be
checked against independent derivations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import q0_phiB, q_canonical, t_canonical
from .fundamental import nijenhuis_from_F, nijenhuis_phiphi, require_admissible
from .structure import Structure
from .tensors import (
    antisym_first_pair,
    at,
    lower_with_g,
    raise_with,
    sub,
    subs,
    sym_first_pair,
    sym_last_pair,
)


@dataclass(frozen=True)
class ConformalPointData:
    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    du: np.ndarray | None = None
    dv: np.ndarray | None = None
    dw: np.ndarray | None = None

    def __post_init__(self):
        dims = {len(np.ravel(a)) for a in (self.du, self.dv, self.dw) if a is not None}
        if len(dims) > 1:
            raise ValueError("du, dv, dw must have the same length")
        d = dims.pop() if dims else None
        for name in ("du", "dv", "dw"):
            a = getattr(self, name)
            arr = np.zeros(d or 0) if a is None else np.array(a, dtype=float).ravel()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        for name in ("u", "v", "w"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def identity(cls, d: int) -> "ConformalPointData":
        return cls(0.0, 0.0, 0.0, np.zeros(d), np.zeros(d), np.zeros(d))

    def sized(self, d: int) -> "ConformalPointData":
        """Same element with empty differentials expanded to zero covectors."""
        if self.du.shape == (d,):
            return self
        if self.du.size == 0:
            return ConformalPointData(self.u, self.v, self.w, np.zeros(d), np.zeros(d), np.zeros(d))
        raise ValueError(f"differentials have length {self.du.size}, expected {d}")

    @property
    def alpha(self) -> float:
        return float(np.exp(2 * self.u) * np.cos(2 * self.v))

    @property
    def beta(self) -> float:
        return float(np.exp(2 * self.u) * np.sin(2 * self.v))

    @property
    def gamma(self) -> float:
        return float(np.exp(2 * self.w))

    @property
    def dalpha(self) -> np.ndarray:
        e = np.exp(2 * self.u)
        return 2 * e * (np.cos(2 * self.v) * self.du - np.sin(2 * self.v) * self.dv)

    @property
    def dbeta(self) -> np.ndarray:
        e = np.exp(2 * self.u)
        return 2 * e * (np.sin(2 * self.v) * self.du + np.cos(2 * self.v) * self.dv)

    @property
    def dgamma(self) -> np.ndarray:
        return 2 * np.exp(2 * self.w) * self.dw

    def compose(self, other: "ConformalPointData") -> "ConformalPointData":
        """Apply ``self`` first, then ``other``."""
        return ConformalPointData(
            self.u + other.u, self.v + other.v, self.w + other.w,
            self.du + other.du, self.dv + other.dv, self.dw + other.dw,
        )

    def to_dict(self) -> dict:
        return {
            "u": self.u, "v": self.v, "w": self.w,
            "du": self.du.tolist(), "dv": self.dv.tolist(), "dw": self.dw.tolist(),
        }


def gradients(s: Structure, c: ConformalPointData) -> tuple[np.ndarray, np.ndarray]:
    """``p = grad u`` and ``q = grad v`` with respect to g."""
    return s.ginv @ c.du, s.ginv @ c.dv


def transform_structure(s: Structure, c: ConformalPointData) -> Structure:
    c = c.sized(s.dim)
    al, bt, gm = c.alpha, c.beta, c.gamma
    g_bar = al * s.g + bt * (s.g @ s.phi) + (gm - al) * np.outer(s.eta, s.eta)
    g_bar = 0.5 * (g_bar + g_bar.T)
    return Structure(s.phi, np.exp(-c.w) * s.xi, np.exp(c.w) * s.eta, g_bar)


def _covariant_derivative_of_g_bar(F: np.ndarray, s: Structure, c: ConformalPointData) -> np.ndarray:
    """``D[x, y, z] = (nabla_x g_bar)(y, z)`` for the Levi-Civita connection of g."""
    al, bt, gm = c.alpha, c.beta, c.gamma
    nabla_eta = at(sub(F, s.phi, 1), s.xi, 2)  # [x, y] = (nabla_x eta) y
    eta = s.eta
    return (
        np.einsum("i,jk->ijk", c.dalpha, s.g)
        + np.einsum("i,jk->ijk", c.dbeta, s.g @ s.phi)
        + bt * F
        + np.einsum("i,j,k->ijk", c.dgamma - c.dalpha, eta, eta)
        + (gm - al) * (np.einsum("ij,k->ijk", nabla_eta, eta) + np.einsum("ik,j->ijk", nabla_eta, eta))
    )


def levi_civita_difference_oracle(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Vector-valued ``P(x, y) = nabla_bar_x y - nabla_x y`` from the Koszul formula."""
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    D = _covariant_derivative_of_g_bar(F, s, c)
    # lowered[x,y,z] = 1/2 (D[x,y,z] + D[y,x,z] - D[z,x,y])
    lowered = 0.5 * (D + D.transpose(1, 0, 2) - np.transpose(D, (1, 2, 0)))
    s_bar = transform_structure(s, c)
    return raise_with(lowered, s_bar.ginv)


def levi_civita_difference(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """``g(nabla_bar_x y - nabla_x y, z)`` from the closed-form transformation law.

    The displayed law is divided by ``2 (alpha^2 + beta^2)``; the left side is
    lowered with g (not g_bar), as confirmed against the Koszul oracle.
    """
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    phi, p2, xi, eta, g = s.phi, s.phi2, s.xi, s.eta, s.g
    al, bt, gm = c.alpha, c.beta, c.gamma
    r2 = al * al + bt * bt
    da, db, dg = c.dalpha, c.dbeta, c.dgamma
    gp = g @ phi  # g(x, phi y)
    gpp = phi.T @ g @ phi  # g(phi x, phi y)
    Fxi = at(F, xi, 2)  # F(a, b, xi)
    F_xi_first = at(F, xi, 0)  # F(xi, a, b)

    def first_slot_last(M):
        # A(x,y,z) = F(M z, x, y)
        return np.transpose(sub(F, M, 0), (1, 2, 0))

    t = np.zeros_like(F)
    t += -al * bt * (2 * sub(F, p2, 2) - first_slot_last(p2))
    t += -bt * bt * (2 * sub(F, phi, 2) - first_slot_last(phi))
    t += bt / gm * r2 * np.einsum("ij,k->ijk", 2 * Fxi - F_xi_first, eta)
    t += 2 * (al / gm - 1) * r2 * np.einsum("ij,k->ijk", p2.T @ Fxi @ phi, eta)
    # [F(x, phi z, xi) + F(phi^2 z, phi x, xi)] eta(y)
    A = Fxi @ phi + (p2.T @ Fxi @ phi).T
    t += 2 * al * (gm - al) * np.einsum("ik,j->ijk", A, eta)
    B = Fxi @ p2 - (phi.T @ Fxi @ phi).T
    t += -2 * bt * (gm - al) * np.einsum("ik,j->ijk", B, eta)
    t += -2 * np.einsum("i,jk->ijk", al * da + bt * db, gpp) + 2 * np.einsum("i,jk->ijk", al * db - bt * da, gp)
    t += -np.einsum("k,ij->ijk", al * (da @ p2) + bt * (da @ phi), gpp)
    t += np.einsum("k,ij->ijk", al * (db @ p2) + bt * (db @ phi), gp)
    t += np.einsum("k,i,j->ijk", al * (dg @ p2) + bt * (dg @ phi), eta, eta)
    t += r2 / gm * np.einsum("ij,k->ijk", (da @ xi) * gpp - (db @ xi) * gp, eta)
    t += r2 / gm * np.einsum("k,ij->ijk", eta, 2 * np.outer(dg, eta) - (dg @ xi) * np.outer(eta, eta))
    return 0.5 * sym_first_pair(t) / (2 * r2)


def transform_F_oracle(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """``F_bar(x,y,z) = g_bar((nabla_x phi) y + P(x, phi y) - phi P(x, y), z)``."""
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    s_bar = transform_structure(s, c)
    P = levi_civita_difference_oracle(F, s, c)
    nabla_phi = raise_with(F, s.ginv)
    vec = nabla_phi + sub(P, s.phi, 1) - np.einsum("ijb,ab->ija", P, s.phi)
    return lower_with_g(vec, s_bar.g)


def transform_F(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Fundamental tensor of the transformed structure, by the closed-form law."""
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    phi, xi, eta, g = s.phi, s.xi, s.eta, s.g
    al, bt, gm = c.alpha, c.beta, c.gamma
    da, db, dg = c.dalpha, c.dbeta, c.dgamma
    Fxi = at(F, xi, 2)  # F(a, b, xi)
    gpp = phi.T @ g @ phi
    gp = g @ phi
    # F(phi y, z, x) - F(y, phi z, x)
    b_part = np.transpose(sub(F, phi, 0) - sub(F, phi, 1), (2, 0, 1))
    b_part = b_part + np.einsum("ij,k->ijk", Fxi @ phi, eta)
    sym_xi = Fxi + (phi.T @ Fxi @ phi).T  # F(a,b,xi) + F(phi b, phi a, xi)
    gm_part = np.einsum("ij,k->ijk", sym_xi, eta) + np.einsum("jk,i->ijk", sym_xi, eta)
    d_part = (
        -np.einsum("j,ik->ijk", da @ phi + db, gpp)
        - np.einsum("j,ik->ijk", da - db @ phi, gp)
        + np.einsum("i,j,k->ijk", eta, eta, dg @ phi)
    )
    inner = bt * b_part + (gm - al) * gm_part + d_part
    return al * F + 0.5 * sym_last_pair(inner)


def transform_N_phiphi(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """``N_bar(phi x, phi y, z) = alpha N(phi x,phi y,z) + beta N(phi x,phi y,phi z)
    + (gamma - alpha) N(phi x,phi y,xi) eta(z)``."""
    c = c.sized(s.dim)
    Npp = nijenhuis_phiphi(nijenhuis_from_F(F, s), s)
    return c.alpha * Npp + c.beta * sub(Npp, s.phi, 2) + (c.gamma - c.alpha) * np.einsum(
        "ij,k->ijk", at(Npp, s.xi, 2), s.eta
    )


def _connection_change_oracle(F, s: Structure, c: ConformalPointData, q_map) -> np.ndarray:
    """Vector-valued ``D_bar - D`` for the connection family given by ``q_map``."""
    c = c.sized(s.dim)
    s_bar = transform_structure(s, c)
    F_bar = transform_F_oracle(F, s, c)
    P = levi_civita_difference_oracle(F, s, c)
    return P + raise_with(q_map(F_bar, s_bar), s_bar.ginv) - raise_with(q_map(F, s), s.ginv)


def phiB_difference_oracle(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    return _connection_change_oracle(F, s, c, q0_phiB)


def canonical_difference_oracle(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    return _connection_change_oracle(F, s, c, q_canonical)


def phiB_difference(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """``g(nabla0_bar_x y - nabla0_x y, z)`` by the closed-form law."""
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    phi, p2, xi, eta, g = s.phi, s.phi2, s.xi, s.eta, s.g
    N = nijenhuis_from_F(F, s)
    v, u, w = c.v, c.u, c.w
    ew = np.exp(2 * (w - u))
    du, dv, dw = c.du, c.dv, c.dw
    gp = g @ phi
    gpp = phi.T @ g @ phi
    out = np.sin(4 * v) / 8 * subs(N, phi, phi, phi).transpose(2, 1, 0)
    out -= np.sin(2 * v) ** 2 / 4 * subs(N, p2, p2, p2).transpose(2, 1, 0)
    M1 = at(subs(N, p2, phi, None), xi, 2)  # [a, b] = N(phi^2 e_a, phi e_b, xi)
    M2 = at(subs(N, phi, phi, None), xi, 2)
    out -= ew * np.sin(2 * v) / 4 * np.einsum("i,kj->ijk", eta, M1)
    out -= (1 - ew * np.cos(2 * v)) / 4 * np.einsum("i,kj->ijk", eta, M2)
    out += -np.einsum("i,jk->ijk", du, gpp) + np.einsum("i,jk->ijk", dv, gp) + np.einsum("i,j,k->ijk", dw, eta, eta)
    a = du @ p2 - dv @ phi
    b = du @ phi + dv @ p2
    out += 0.5 * np.einsum("j,ik->ijk", a, gpp) - 0.5 * np.einsum("j,ik->ijk", b, gp)
    out += -0.5 * np.einsum("k,ij->ijk", a, gpp) + 0.5 * np.einsum("k,ij->ijk", b, gp)
    return out


def canonical_difference(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Vector-valued ``nabla'_bar_x y - nabla'_x y`` by the closed-form law."""
    F = require_admissible(F, s)
    c = c.sized(s.dim)
    phi, p2, xi, eta = s.phi, s.phi2, s.xi, s.eta
    du, dv, dw = c.du, c.dv, c.dw
    p, q = gradients(s, c)
    gp = s.g @ phi
    gpp = phi.T @ s.g @ phi
    out = (
        -np.einsum("i,aj->ija", du, p2)
        + np.einsum("i,aj->ija", dv, phi)
        + np.einsum("i,j,a->ija", dw, eta, xi)
    )
    a = du @ p2 - dv @ phi
    b = du @ phi + dv @ p2
    half = (
        np.einsum("j,ai->ija", a, p2)
        - np.einsum("j,ai->ija", b, phi)
        - np.einsum("ij,a->ija", gpp, p2 @ p - phi @ q)
        + np.einsum("ij,a->ija", gp, phi @ p + p2 @ q)
    )
    return out + 0.5 * half


def canonical_difference_g0(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Shortened law valid for elements of G0."""
    c = c.sized(s.dim)
    phi, p2, xi, eta = s.phi, s.phi2, s.xi, s.eta
    du, dv, dw = c.du, c.dv, c.dw
    p, q = gradients(s, c)
    gp = s.g @ phi
    gpp = phi.T @ s.g @ phi
    return (
        -np.einsum("i,aj->ija", du, p2)
        + np.einsum("i,aj->ija", dv, phi)
        + (dw @ xi) * np.einsum("i,j,a->ija", eta, eta, xi)
        - np.einsum("j,ai->ija", du, p2)
        + np.einsum("j,ai->ija", dv, phi)
        + np.einsum("ij,a->ija", gpp, p)
        - np.einsum("ij,a->ija", gp, q)
    )


def torsion_change(s: Structure, c: ConformalPointData) -> np.ndarray:
    """Vector-valued ``T'_bar(x,y) - T'(x,y)`` by the closed-form law."""
    c = c.sized(s.dim)
    phi, p2, xi, eta = s.phi, s.phi2, s.xi, s.eta
    du, dv, dw = c.du, c.dv, c.dw
    a = du @ p2 + dv @ phi - 2 * (du @ xi) * eta
    b = du @ phi - dv @ p2 + 2 * (dv @ xi) * eta
    inner = (
        2 * np.einsum("i,j,a->ija", dw, eta, xi)
        + np.einsum("i,aj->ija", a, p2)
        + np.einsum("i,aj->ija", b, phi)
    )
    return 0.5 * antisym_first_pair(inner)


def transform_torsion(T, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Vector-valued torsion of the transformed phi-canonical connection, from T' (lowered with g)."""
    return raise_with(np.asarray(T, dtype=float), s.ginv) + torsion_change(s, c)


def transform_torsion_oracle(F, s: Structure, c: ConformalPointData) -> np.ndarray:
    """Vector-valued ``t_canonical(F_bar)`` on the transformed structure."""
    c = c.sized(s.dim)
    s_bar = transform_structure(s, c)
    return raise_with(t_canonical(transform_F(F, s, c), s_bar), s_bar.ginv)


G0_CONDITIONS = ("du.phi2+dv.phi", "du.phi-dv.phi2", "du(xi)", "dv(xi)", "dw.phi")


def g0_residuals(c: ConformalPointData, s: Structure) -> dict[str, float]:
    c = c.sized(s.dim)
    du, dv, dw = c.du, c.dv, c.dw
    vals = (
        du @ s.phi2 + dv @ s.phi,
        du @ s.phi - dv @ s.phi2,
        du @ s.xi,
        dv @ s.xi,
        dw @ s.phi,
    )
    return {k: float(np.max(np.abs(v))) for k, v in zip(G0_CONDITIONS, vals)}


def g0_predicate(c: ConformalPointData, s: Structure, tol: float = 1e-9) -> tuple[bool, dict[str, float]]:
    res = g0_residuals(c, s)
    return all(r < tol for r in res.values()), res


def g0_generator(s: Structure, seed=None, scale: float = 0.5) -> ConformalPointData:
    """Random element of G0: dv horizontal, du = dv o phi, dw proportional to eta."""
    rng = np.random.default_rng(seed)
    d = s.dim
    dv = rng.standard_normal(d) * scale
    dv = dv @ (-s.phi2)  # dv(xi) = 0; -phi^2 projects onto the horizontal part
    du = dv @ s.phi
    dw = rng.normal() * scale * s.eta
    u, v, w = rng.uniform(-0.5, 0.5, size=3)
    return ConformalPointData(u, v, w, du, dv, dw)


def random_element(s: Structure, seed=None, scale: float = 0.5) -> ConformalPointData:
    """Random element of G with unconstrained differentials."""
    rng = np.random.default_rng(seed)
    d = s.dim
    u, v, w = rng.uniform(-0.5, 0.5, size=3)
    du, dv, dw = (rng.standard_normal(d) * scale for _ in range(3))
    return ConformalPointData(u, v, w, du, dv, dw)
