"""Pointwise tensor algebra for almost contact B-metric structures.

Everything lives at a single point of a (2n+1)-dimensional manifold: a
structure (phi, xi, eta, g), the fundamental tensor F, the Nijenhuis tensor,
the natural connections as difference tensors, and the action of the
contactly conformal group.
"""

from .classes import (
    BASIC_CLASSES,
    ClassificationReport,
    classify,
    construct_class,
    construct_from_weingarten,
    decompose,
    membership_residual,
    random_admissible,
    random_member,
    sphere_F,
)
from .conformal import (
    ConformalPointData,
    canonical_difference,
    g0_generator,
    g0_predicate,
    levi_civita_difference,
    phiB_difference,
    transform_F,
    transform_N_phiphi,
    transform_structure,
    transform_torsion,
)
from .connections import (
    hayden_Q_from_T,
    natural_connection_check,
    phi_canonical_identity_check,
    q0_phiB,
    q_canonical,
    t0_phiB,
    t_canonical,
    torsion_forms,
)
from .fundamental import InadmissibleF, associated_forms, check_admissible, nijenhuis_from_F, u0_predicate
from .structure import Structure, canonical_structure, random_structure, validate_structure
from .torsion_classes import correspondence_check, detected_torsion_classes, sphere_torsion

__version__ = "0.1.0"
