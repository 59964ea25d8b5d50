"""End-to-end construction: bounded cocycle on Z -> combined quasimorphism
r_hat -> quasiline -> product-extension structure -> discreteness probe.

This realises the counterexample scheme at desk scale: the probe reports
elements whose translation length on the quasiline domain A is certified
positive but below any prescribed tau0, while tau_A(t) stays pinned near 1.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .extension import CentralExtension, ExactHomogeneous, build_r_hat, zero_cocycle
from .groups import LatticeGroup, word_ball
from .hhg import (
    bigset_report,
    discreteness_probe,
    dump_structure,
    extend_with_quasiline,
    make_z2_epsilon,
    make_z_line,
    structures_isomorphic,
    validate_structure,
)
from .metric import format_fraction
from .quasiline import ExactLinearForm, QuasilineConfig, tau_quasiline_bracket


def _small_witness(ext: CentralExtension, eps: Fraction, C: Fraction, search: int = 2000):
    """Some (g, m) with s_hat in (0, C/2), s_hat((g, m)) = m + eps*g."""
    for g in range(1, search + 1):
        frac_part = eps * g - math.floor(eps * g)
        if 0 < frac_part < C / 2:
            return ((g,), -math.floor(eps * g))
    return None


def build_pipeline_quasiline(eps: Fraction, C: Fraction, n_eval: int = 64):
    """The extension E of Z by the zero cocycle, with the quasiline on
    s_hat = qhat_alpha + (eps*id).phi, cross-checked against its closed
    linear form."""
    base = LatticeGroup(1)
    cocycle = zero_cocycle(base)
    ext = CentralExtension(cocycle)
    p_hat = ExactHomogeneous(lambda g: eps * g[0], f"{eps}*id")
    r_hat = build_r_hat(ext, p_hat, Fraction(1), Fraction(1), n_eval)

    s_form = ExactLinearForm(ext, (eps, Fraction(1)), name="qhat_alpha + eps*p")
    # the abstract combination and the closed form must agree exactly
    for e in word_ball(ext, 4):
        hv_r = r_hat.value(e)
        hv_f = s_form.value(e)
        if hv_r.radius != 0 or hv_r.center != hv_f.center:
            raise AssertionError(f"r_hat disagrees with its closed form at {e!r}")

    cfg = QuasilineConfig(
        group=ext,
        s_hat=s_form,
        C=C,
        D=r_hat.defect_bound,
        C0=Fraction(1),
        g0=ext.t,
        small_witness=_small_witness(ext, eps, C),
    )
    return ext, r_hat, cfg


def run_pipeline(
    eps: Fraction,
    C: Fraction = Fraction(1),
    tau0: Fraction = Fraction(1, 100),
    n_max: int = 128,
    cf_bound: int = 2000,
    box_radius: int = 0,
    seed: int = 0,
) -> dict:
    ext, r_hat, cfg = build_pipeline_quasiline(eps, C)
    structure = extend_with_quasiline(make_z_line(), cfg, ext, tau_check_n=min(n_max, 64))
    validation = validate_structure(structure, seed=seed)
    iso = structures_isomorphic(structure, make_z2_epsilon(eps))
    tau_t = tau_quasiline_bracket(cfg, ext.t, n_max)
    witnesses = discreteness_probe(
        structure, tau0, box_radius=box_radius, cf_bound=cf_bound, n_max=n_max
    )
    big_t = bigset_report(structure, ext.t, horizon=32)

    def frac(x):
        return None if x is None else format_fraction(x)

    return {
        "params": {
            "eps": frac(eps),
            "C": frac(C),
            "tau0": frac(tau0),
            "n_max": n_max,
            "seed": seed,
        },
        "structure": dump_structure(structure),
        "validation": validation,
        "isomorphic_to_z2_epsilon": iso is not None,
        "iso_exact_projection_matches": iso["exact_projection_matches"] if iso else [],
        "tau_A_t": {
            "lower": frac(tau_t.lower),
            "upper": frac(tau_t.upper),
            "width": frac(tau_t.width),
        },
        "big_t_growing": sorted(big_t.growing),
        "witnesses": [
            {
                "element": structure.group.format(w.g),
                "power": w.power_used,
                "domain": w.domain,
                "tau_lower": frac(w.bracket.lower),
                "tau_upper": frac(w.bracket.upper),
            }
            for w in witnesses
        ],
        "witness_count": len(witnesses),
    }
