"""Digit-sum discrepancy tools for van der Corput type sequences on [0,1)^d and S^2."""

from .radix import RadixExpansion, complement, digit_sum, expand, m_b
from .points import PointSet, lattice_set
from .seqgen import (GuidedPolicy, PermutationPolicy, canonical_H, check_guidance, check_lemma1,
                     check_lemma2, sbox_point, sbox_prefix, sboxplus_prefix, tail_distance)
from .discrepancy1d import (EmpiricalMeasure1D, check_f_sublinearity, closed_form_lattice_lp,
                            lp_discrepancy, star_discrepancy, verify_perturbed_lattice)
from .sphere import (CenterSpec, cap_discrepancy_estimate, g_projection, healpix_plane_to_sphere,
                     lambert, sphere_prefix)
from .bounds import (HTable, bound_report, fit_h_table, theorem1_eq1, theorem1_eq2, thm2_bound,
                     thm3_bound, thm4_bound, thm5_bound)
from .counting import (binomial_tail, count_exact, count_surrogate, entropy_exponent, exponent_at,
                       verify_lower_bound)

__version__ = "0.1.0"

__all__ = [
    "RadixExpansion",
    "complement",
    "digit_sum",
    "expand",
    "m_b",
    "PointSet",
    "lattice_set",
    "GuidedPolicy",
    "PermutationPolicy",
    "canonical_H",
    "check_guidance",
    "check_lemma1",
    "check_lemma2",
    "sbox_point",
    "sbox_prefix",
    "sboxplus_prefix",
    "tail_distance",
    "EmpiricalMeasure1D",
    "check_f_sublinearity",
    "closed_form_lattice_lp",
    "lp_discrepancy",
    "star_discrepancy",
    "verify_perturbed_lattice",
    "CenterSpec",
    "cap_discrepancy_estimate",
    "g_projection",
    "healpix_plane_to_sphere",
    "lambert",
    "sphere_prefix",
    "HTable",
    "bound_report",
    "fit_h_table",
    "theorem1_eq1",
    "theorem1_eq2",
    "thm2_bound",
    "thm3_bound",
    "thm4_bound",
    "thm5_bound",
    "binomial_tail",
    "count_exact",
    "count_surrogate",
    "entropy_exponent",
    "exponent_at",
    "verify_lower_bound",
]
