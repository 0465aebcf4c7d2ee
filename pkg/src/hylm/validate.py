"""Self-contained invariant and property checks behind ``hylm validate``.

Small, fast versions of the guarantees the test suite pins: parity algebra,
transform round trip, divergence/barotropic preservation, the discrete
energy inequality and identity, the hydrostatic diagnostic oracle, the
Taylor-Green decay law, and finiteness/stability of the layered trilinear
quadrature.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import trilinear_check
from .initial import DataSpec, build_initial_data
from .nse import NseParams, run_nse
from .pe import PeParams, diagnose_w, run_pe
from .spectral import (
    Parity,
    ToPhysical,
    ToSpectral,
    VectorField,
    d_z,
    field_from_function,
    make_grid,
    multiply_dealiased,
    parity_error,
    transform,
    zero_field,
)


def _check_transform_round_trip():
    g = make_grid(16, 16, 16)
    f = field_from_function(
        g, lambda x, y, z: np.cos(x) * np.cos(2 * y) * np.cos(np.pi * z),
        Parity.EVEN)
    back = transform(transform(f, ToPhysical), ToSpectral)
    err = float(np.max(np.abs(back.coeffs - f.coeffs)))
    return err <= 1e-12, f"round-trip error {err:.2e}"

def _check_parity_algebra():
    g = make_grid(16, 16, 16)
    even = field_from_function(
        g, lambda x, y, z: np.cos(np.pi * z) + 0.3 * np.cos(2 * np.pi * z),
        Parity.EVEN)
    odd = d_z(even)
    prod = multiply_dealiased(even, odd)
    errs = (parity_error(even), parity_error(odd), parity_error(prod))
    ok = odd.parity is Parity.ODD and prod.parity is Parity.ODD \
        and max(errs) <= 1e-12
    return ok, f"parity errors {max(errs):.2e}"

def _check_hydrostatic_oracle():
    g = make_grid(32, 32, 32)
    v1 = field_from_function(g, lambda x, y, z: np.cos(x) * np.cos(np.pi * z),
                             Parity.EVEN)
    v = VectorField((v1, zero_field(g, Parity.EVEN)))
    w = diagnose_w(v)
    expected = field_from_function(
        g, lambda x, y, z: np.sin(x) * np.sin(np.pi * z) / np.pi, Parity.ODD)
    err = float(np.max(np.abs(w.coeffs - expected.coeffs)))
    return err <= 1e-10, f"diagnostic error {err:.2e}"

def _check_nse_invariants():
    g = make_grid(16, 16, 8)
    spec = DataSpec(kind="random", smoothness_class="H2", seed=3, max_mode=2,
                    h2_target=1.0)
    v0, w0 = build_initial_data(spec, g)
    params = NseParams(eps=0.2, alpha=3.0, t_end=0.1, dt=None, dt_max=2.5e-3)
    res = run_nse(v0, w0, params, n_outputs=6)
    resid = float(np.max(res.ledger.residuals) / res.ledger.E[0])
    ok = res.max_divergence <= 1e-10 and res.max_parity_error <= 1e-10 \
        and resid <= 1e-4
    return ok, (f"divergence {res.max_divergence:.2e}, parity "
                f"{res.max_parity_error:.2e}, energy residual {resid:.2e}")

def _check_pe_taylor_green():
    g = make_grid(16, 16, 8)
    v0, _ = build_initial_data(DataSpec(kind="taylor_green", amplitude=1.0), g)
    res = run_pe(v0, PeParams(t_end=1.0, dt=None, dt_max=5e-3), n_outputs=11)
    norms = np.sqrt(res.ledger_E)
    decay_err = float(np.max(np.abs(
        norms - norms[0] * np.exp(-2 * res.times)) / norms[0]))
    ident = float(np.max(np.abs(res.identity_residuals())))
    ok = decay_err <= 1e-4 and ident <= 1e-4 and res.max_barotropic <= 1e-10
    return ok, (f"decay error {decay_err:.2e}, identity residual "
                f"{ident:.2e}, barotropic {res.max_barotropic:.2e}")

def _check_trilinear():
    g = make_grid(16, 16, 16)
    worst_a, r1, _ = trilinear_check(g, n_samples=40, seed=0)
    worst_b, _, _ = trilinear_check(g, n_samples=40, seed=1)
    spread = abs(worst_a.ratio_first - worst_b.ratio_first) \
        / max(worst_a.ratio_first, worst_b.ratio_first)
    ok = np.all(np.isfinite(r1)) and spread <= 0.2
    return ok, (f"worst ratio {worst_a.ratio_first:.3f}, "
                f"seed spread {100 * spread:.1f}%")


CHECKS = [
    ("transform round trip", _check_transform_round_trip),
    ("parity algebra", _check_parity_algebra),
    ("hydrostatic diagnostic oracle", _check_hydrostatic_oracle),
    ("divergence/parity/energy of a scaled run", _check_nse_invariants),
    ("Taylor-Green decay and energy identity", _check_pe_taylor_green),
    ("trilinear quadrature bounds", _check_trilinear),
]


def run_validation(verbose=False):
    """Run every check; returns a list of (name, ok, detail)."""
    results = []
    for name, fn in CHECKS:
        ok, detail = fn()
        results.append((name, ok, detail))
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    return results
