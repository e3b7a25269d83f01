"""Acceptance criteria 1-10, one test each.

Every test records a one-line verdict in ``RESULTS``; ``conftest.py`` prints
them after the run, and running this file directly prints them too.
"""

import numpy as np

from acbm.classes import (
    BASIC_CLASSES,
    U0,
    class_spaces,
    classify,
    decompose,
    random_admissible,
    random_member,
    sphere_F,
)
from acbm.conformal import (
    ConformalPointData,
    g0_generator,
    random_element,
    transform_F,
    transform_N_phiphi,
    transform_structure,
    transform_torsion_oracle,
)
from acbm.connections import (
    natural_connection_check,
    phi_canonical_identity_check,
    q0_phiB,
    q_canonical,
    t_canonical,
    torsion_forms,
)
from acbm.fundamental import associated_forms, lemma_identities, nijenhuis_from_F, nijenhuis_phiphi
from acbm.structure import canonical_structure, random_structure, validate_structure
from acbm.tensors import max_abs, raise_with
from acbm.torsion_classes import (
    closed_form_residual,
    correspondence_check,
    detected_torsion_classes,
    sphere_torsion,
)

RESULTS = {}


def verdict(number, ok, detail):
    RESULTS[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    assert ok, RESULTS[number]


def rel(a, b=0.0):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b))) / max(1.0, max_abs(a), max_abs(b))


def test_criterion_1_structure_axioms():
    worst = 0.0
    for n in (1, 2, 3):
        for seed in range(100):
            worst = max(worst, validate_structure(random_structure(n, 1000 * n + seed)).max_residual)
    verdict(1, worst < 1e-9, f"max residual {worst:.2e} over 300 structures")


def test_criterion_2_nijenhuis_identities_and_theta_relation():
    worst = 0.0
    for n in (1, 2):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            s = random_structure(n, 2000 + seed)
            F = random_admissible(s, rng)
            N = nijenhuis_from_F(F, s)
            scale = max(1.0, max_abs(N))
            worst = max(worst, *(max_abs(d) / scale for d in lemma_identities(N, s).values()))
            f = associated_forms(F, s)
            worst = max(worst, max_abs(f.theta_star @ s.phi + f.theta @ s.phi2) / max(1.0, max_abs(F)))
    verdict(2, worst < 1e-8, f"max residual {worst:.2e} over 100 tensors")


def test_criterion_3_u0_membership():
    rng = np.random.default_rng(3)
    worst_in, least_out = 0.0, np.inf
    for n in (1, 2):
        s = random_structure(n, 30 + n)
        for c in BASIC_CLASSES:
            if class_spaces(s).dimensions[c] == 0:
                continue
            for _ in range(5):
                F = random_member(c, s, rng)
                value = max_abs(nijenhuis_phiphi(nijenhuis_from_F(F, s), s)) / max(1.0, max_abs(F))
                if c in U0:
                    worst_in = max(worst_in, value)
                else:
                    least_out = min(least_out, value)
    ok = worst_in < 1e-8 and least_out > 1e-3
    verdict(3, ok, f"U0 max {worst_in:.2e}, F3/F7 min {least_out:.2e}")


def test_criterion_4_canonical_connection():
    worst = 0.0
    for n in (1, 2):
        for seed in range(50):
            rng = np.random.default_rng(400 + seed)
            s = random_structure(n, 4000 + seed)
            F = random_admissible(s, rng)
            worst = max(worst, natural_connection_check(q_canonical(F, s), F, s).max_residual)
            worst = max(worst, phi_canonical_identity_check(t_canonical(F, s), s))
    rng = np.random.default_rng(41)
    s = random_structure(2, 41)
    coincide = max(max_abs(q_canonical(F, s) - q0_phiB(F, s))
                   for F in (random_member(c, s, rng) for c in sorted(U0)))
    differ = min(max_abs(q_canonical(F, s) - q0_phiB(F, s)) for F in (random_member("F3", s, rng) for _ in range(5)))
    ok = worst < 1e-9 and coincide < 1e-12 and differ > 1e-3
    verdict(4, ok, f"checks {worst:.2e}, U0 |Q'-Q0| {coincide:.2e}, F3 |Q'-Q0| {differ:.2e}")


def test_criterion_5_torsion_forms():
    worst = 0.0
    for n in (1, 2, 3):
        for seed in range(20):
            rng = np.random.default_rng(500 + seed)
            s = random_structure(n, 5000 + seed)
            F = random_admissible(s, rng)
            f = associated_forms(F, s)
            t = torsion_forms(t_canonical(F, s), s)
            worst = max(
                worst,
                rel(t.t, 0.5 * (f.theta_star + (f.theta_star @ s.xi) * s.eta)),
                rel(t.t_star, -0.5 * (f.theta + (f.theta @ s.xi) * s.eta)),
                rel(t.t_hat, -f.omega @ s.phi),
            )
    verdict(5, worst < 1e-8, f"max residual {worst:.2e}")


def test_criterion_6_conformal_invariance():
    worst_N = worst_T = 0.0
    for seed in range(50):
        rng = np.random.default_rng(600 + seed)
        s = random_structure(1 + seed % 2, 6000 + seed)
        F = random_admissible(s, rng)
        c = random_element(s, seed)
        t = transform_structure(s, c)
        N = raise_with(nijenhuis_phiphi(nijenhuis_from_F(F, s), s), s.ginv)
        N_law = raise_with(transform_N_phiphi(F, s, c), t.ginv)
        N_direct = raise_with(nijenhuis_phiphi(nijenhuis_from_F(transform_F(F, s, c), t), t), t.ginv)
        worst_N = max(worst_N, rel(N_law, N), rel(N_direct, N))
        c0 = g0_generator(s, seed)
        worst_T = max(worst_T, rel(transform_torsion_oracle(F, s, c0), raise_with(t_canonical(F, s), s.ginv)))
    s = random_structure(2, 66)
    F = random_member("F3", s, np.random.default_rng(66))
    z = np.zeros(s.dim)
    outside = ConformalPointData(0, 0, 0, s.eta, z, z)  # du(xi) = 1
    witness = rel(transform_torsion_oracle(F, s, outside), raise_with(t_canonical(F, s), s.ginv))
    ok = worst_N < 1e-8 and worst_T < 1e-8 and witness > 1e-3
    verdict(6, ok, f"N {worst_N:.2e}, T' under G0 {worst_T:.2e}, non-G0 witness {witness:.2e}")


def test_criterion_7_g0_class_closure():
    s = random_structure(2, 77)
    failing = {}
    for c in BASIC_CLASSES:
        rng = np.random.default_rng(700)
        worst = 0.0
        for _ in range(10):
            F = random_member(c, s, rng)
            for _ in range(5):
                g = g0_generator(s, int(rng.integers(2**31)))
                F_bar = transform_F(F, s, g)
                comps = decompose(F_bar, transform_structure(s, g))
                total = np.linalg.norm(F_bar)
                foreign = max(np.linalg.norm(v) for k, v in comps.items() if k != c) / total
                worst = max(worst, foreign)
        if not worst < 1e-7:
            failing[c] = worst
    detail = "all classes closed" if not failing else "leaks " + ", ".join(f"{k} {v:.2e}" for k, v in failing.items())
    verdict(7, not failing, detail)


def test_criterion_8_torsion_characterization():
    s = random_structure(2, 88)
    rng = np.random.default_rng(800)
    closed_fail, table_fail = {}, {}
    for c in BASIC_CLASSES:
        for _ in range(3):
            F = random_member(c, s, rng)
            r = closed_form_residual(t_canonical(F, s), s, c)
            if not r < 1e-8:
                closed_fail[c] = max(closed_fail.get(c, 0.0), r)
            rep = correspondence_check(F, s)
            if not (rep.f_class == c and rep.target_residual < 1e-8 and rep.side_conditions_ok):
                table_fail[c] = rep.target_residual
    parts = []
    if closed_fail:
        parts.append("closed form off for " + ", ".join(f"{k} {v:.2e}" for k, v in closed_fail.items()))
    if table_fail:
        parts.append("table mismatch for " + ", ".join(table_fail))
    verdict(8, not closed_fail and not table_fail, "; ".join(parts) or "11/11 closed forms and table rows")


def test_criterion_9_sphere_golden():
    n, psi = 2, np.pi / 6
    worst = 0.0
    values = []
    for s in (canonical_structure(n), random_structure(n, 99)):
        T = t_canonical(sphere_F(psi, s), s)
        f = torsion_forms(T, s)
        worst = max(worst, max_abs(T - sphere_torsion(psi, s)))
        t_xi, ts_xi = float(f.t @ s.xi), float(f.t_star @ s.xi)
        values.append((t_xi, ts_xi))
        ok_forms = (
            abs(t_xi - 2.0) < 1e-10
            and abs(ts_xi + 2 * np.sqrt(3)) < 1e-10
            and max_abs(f.t - 2 * n * np.sin(psi) * s.eta) < 1e-10
            and max_abs(f.t_star + 2 * n * np.cos(psi) * s.eta) < 1e-10
            and max_abs(f.t_hat) < 1e-10
            and detected_torsion_classes(T, s) == ["T31"]
        )
        if not ok_forms:
            break
    t_xi, ts_xi = values[0]
    verdict(9, worst < 1e-10 and ok_forms, f"T' closed form {worst:.2e}, t'(xi)={t_xi:.12g}, t'*(xi)={ts_xi:.12g}, T31")


def test_criterion_10_decomposition():
    worst_reassembly = worst_recovery = 0.0
    audit = True
    for n in (1, 2):
        s = random_structure(n, 1000 + n)
        spaces = class_spaces(s)
        audit &= sum(spaces.dimensions.values()) == spaces.admissible.shape[1] == np.linalg.matrix_rank(spaces.stacked)
        rng = np.random.default_rng(10 + n)
        live = [c for c in BASIC_CLASSES if spaces.dimensions[c] > 0]
        for _ in range(5):
            F = random_admissible(s, rng)
            worst_reassembly = max(worst_reassembly, classify(F, s).reassembly_residual / max(1.0, max_abs(F)))
        for i, a in enumerate(live):
            for b in live[i + 1:]:
                Fa, Fb = random_member(a, s, rng), random_member(b, s, rng)
                comps = decompose(Fa + Fb, s)
                worst_recovery = max(worst_recovery, rel(comps[a], Fa), rel(comps[b], Fb))
    ok = audit and worst_reassembly < 1e-8 and worst_recovery < 1e-8
    verdict(10, ok, f"reassembly {worst_reassembly:.2e}, mixture recovery {worst_recovery:.2e}, audit {'ok' if audit else 'failed'}")


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for test in sorted(tests, key=lambda f: int(f.__name__.split("_")[2])):
        try:
            test()
        except AssertionError:
            pass
    for k in sorted(RESULTS):
        print(RESULTS[k])
    sys.exit(0 if all("PASS" in v for v in RESULTS.values()) else 1)
