import numpy as np
import pytest

from acbm.structure import (
    Structure,
    associated_structure,
    canonical_structure,
    push_forward,
    random_structure,
    validate_structure,
)
from acbm.tensors import ShapeMismatch


def test_canonical_structure_is_valid(canonical):
    report = validate_structure(canonical)
    assert report.ok, report.residuals
    assert report.max_residual == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(5))
def test_random_structures_are_valid(n, seed):
    s = random_structure(n, seed)
    assert validate_structure(s).ok


def test_random_structure_is_reproducible():
    a, b = random_structure(2, 9), random_structure(2, 9)
    assert np.array_equal(a.g, b.g) and np.array_equal(a.phi, b.phi)


def test_condition_bound_is_enforced():
    with pytest.raises(ValueError):
        random_structure(1, 0, max_cond=80)


def test_arrays_are_read_only():
    s = canonical_structure(1)
    with pytest.raises(ValueError):
        s.g[0, 0] = 5.0


def test_shape_mismatch():
    s = canonical_structure(1)
    with pytest.raises(ShapeMismatch):
        Structure(s.phi, np.zeros(5), s.eta, s.g)


def test_eta_xi_violation_is_named():
    s = canonical_structure(1)
    bad = s.replace(eta=2 * s.eta)
    report = validate_structure(bad)
    assert "eta_xi" in report.failures


def test_wrong_signature_is_reported():
    s = canonical_structure(1)
    bad = s.replace(g=np.diag([-1.0, 1.0, 1.0]))
    report = validate_structure(bad)
    # diag(-1, 1, 1) still satisfies the B-metric identity
    assert report.residuals["b_metric"] == 0.0
    assert "signature" not in report.failures
    bad = s.replace(g=np.diag([1.0, -1.0, -1.0]))
    assert "signature" in validate_structure(bad).failures


def test_push_forward_preserves_axioms(rng):
    s = canonical_structure(2)
    P = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    assert validate_structure(push_forward(s, P)).ok


def test_associated_metric_is_b_metric(structure):
    t = associated_structure(structure)
    assert validate_structure(t).residuals["b_metric"] < 1e-9
