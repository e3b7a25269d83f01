"""Almost contact B-metric structures at a point: model, validation, generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .tensors import (
    DEFAULT_TOL,
    DegenerateMetric,
    ShapeMismatch,
    dim_from_n,
    frozen,
    metric_inverse,
    n_from_dim,
    signature,
)

MAX_CONDITION = 50.0


@dataclass(frozen=True, eq=False)
class Structure:
    """The quadruple (phi, xi, eta, g) on a (2n+1)-dimensional vector space."""

    phi: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        phi, xi, eta, g = (np.asarray(a, dtype=float) for a in (self.phi, self.xi, self.eta, self.g))
        d = xi.shape[0] if xi.ndim == 1 else -1
        if d < 0 or phi.shape != (d, d) or eta.shape != (d,) or g.shape != (d, d):
            raise ShapeMismatch(
                f"inconsistent shapes: phi {phi.shape}, xi {xi.shape}, eta {eta.shape}, g {g.shape}"
            )
        n_from_dim(d)
        for name, a in (("phi", phi), ("xi", xi), ("eta", eta), ("g", g)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, frozen(a))

    @property
    def dim(self) -> int:
        return self.xi.shape[0]

    @property
    def n(self) -> int:
        return n_from_dim(self.dim)

    @cached_property
    def ginv(self) -> np.ndarray:
        return frozen(metric_inverse(self.g))

    @cached_property
    def phi2(self) -> np.ndarray:
        return frozen(self.phi @ self.phi)

    @cached_property
    def key(self) -> bytes:
        """Hashable identity of the numeric data (used for caching)."""
        return b"".join(a.tobytes() for a in (self.phi, self.xi, self.eta, self.g))

    def replace(self, **kw) -> "Structure":
        data = dict(phi=self.phi, xi=self.xi, eta=self.eta, g=self.g)
        data.update(kw)
        return Structure(**data)


@dataclass(frozen=True)
class ValidationReport:
    """Named residuals; accepted iff every residual is below ``tol``."""

    residuals: dict[str, float]
    tol: float = DEFAULT_TOL
    messages: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r < self.tol for r in self.residuals.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, r in self.residuals.items() if not r < self.tol]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tol": self.tol, "residuals": dict(self.residuals)}


def _res(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def validate_structure(s: Structure, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Residuals of the almost contact and B-metric identities, plus the signature check."""
    d = s.dim
    phi, xi, eta, g = s.phi, s.xi, s.eta, s.g
    scale = max(1.0, _res(phi), _res(g))
    residuals = {
        "phi_xi": _res(phi @ xi) / scale,
        "phi_squared": _res(phi @ phi + np.eye(d) - np.outer(xi, eta)) / scale,
        "eta_phi": _res(eta @ phi) / scale,
        "eta_xi": abs(float(eta @ xi) - 1.0),
        "b_metric": _res(phi.T @ g @ phi + g - np.outer(eta, eta)) / scale**2,
        "g_symmetric": _res(g - g.T) / scale,
    }
    messages = {}
    try:
        neg, pos = signature(g)
    except np.linalg.LinAlgError:
        neg, pos = -1, -1
    expected = (s.n, s.n + 1)
    residuals["signature"] = 0.0 if (neg, pos) == expected else 1.0
    if (neg, pos) != expected:
        messages["signature"] = f"signature (neg, pos) = {(neg, pos)}, expected {expected}"
    return ValidationReport(residuals, tol, messages)


def canonical_structure(n: int) -> Structure:
    """Adapted basis {e_1..e_n, e_{n+1}..e_{2n}, xi} with phi e_i = e_{n+i}."""
    d = dim_from_n(n)
    phi = np.zeros((d, d))
    for i in range(n):
        phi[n + i, i] = 1.0
        phi[i, n + i] = -1.0
    xi = np.zeros(d)
    xi[-1] = 1.0
    g = np.diag([1.0] * n + [-1.0] * n + [1.0])
    return Structure(phi, xi, xi.copy(), g)


def push_forward(s: Structure, P) -> Structure:
    """Express ``s`` in new coordinates ``x' = P x``."""
    P = np.asarray(P, dtype=float)
    Pinv = np.linalg.inv(P)
    return Structure(P @ s.phi @ Pinv, P @ s.xi, s.eta @ Pinv, Pinv.T @ s.g @ Pinv)


def random_basis_change(d: int, rng: np.random.Generator, max_cond: float = 10.0) -> np.ndarray:
    q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
    q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lo = 1.0 / np.sqrt(max_cond)
    sv = rng.uniform(lo, 1.0 / lo, size=d)
    sv[0], sv[-1] = lo, 1.0 / lo
    return q1 @ np.diag(sv) @ q2


def random_structure(n: int, seed=None, max_cond: float = 10.0) -> Structure:
    """Canonical structure push-forwarded through a random basis change.

    ``max_cond`` bounds the condition number of the basis change and must stay below 50.
    """
    if not max_cond < MAX_CONDITION:
        raise ValueError(f"max_cond must be < {MAX_CONDITION}")
    rng = np.random.default_rng(seed)
    P = random_basis_change(dim_from_n(n), rng, max_cond)
    return push_forward(canonical_structure(n), P)


def associated_metric(s: Structure) -> np.ndarray:
    """``g~(x, y) = g(x, phi y) + eta(x) eta(y)``."""
    gt = s.g @ s.phi + np.outer(s.eta, s.eta)
    if abs(np.linalg.det(gt)) < 1e-12:
        raise DegenerateMetric("associated metric is degenerate")
    return gt


def associated_structure(s: Structure) -> Structure:
    return s.replace(g=associated_metric(s))
