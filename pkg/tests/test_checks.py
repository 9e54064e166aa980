from pathlib import Path

import numpy as np
import pytest

from genschro.checks import (
    CheckResult,
    PacketSetup,
    continuity_refinement_study,
    energy_consistency_study,
    legendre_errors,
    ratios,
    run_invariant_suite,
    suite_passed,
)
from genschro.config import load_config
from genschro.core import MuProfile, PhysicalConstants, PotentialProfile
from genschro.operators import assemble_hamiltonian, observed_order

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
C = PhysicalConstants()


def test_ratios():
    assert np.allclose(ratios([16, 4, 1]), [4, 4])


def test_check_line():
    assert CheckResult("x", True, 1.0, "ok").line() == "PASS  x: ok"
    assert CheckResult("x", False, 1.0, "bad").line().startswith("FAIL")


def test_levels_halve_dx_and_dt():
    s = PacketSetup(MuProfile.zero(), PotentialProfile.zero(), C, 5.0, 51, 0.02, sigma=0.5)
    (g0, dt0, _), (g1, dt1, st1) = s.level(0), s.level(1)
    assert g1.dx == pytest.approx(g0.dx / 2) and dt1 == dt0 / 2
    assert st1.psi.shape == (101,)


def test_continuity_study_second_order():
    s = PacketSetup(MuProfile.zero(), PotentialProfile.zero(), C, 10.0, 201, 0.02, k0=1.0)
    h, r = continuity_refinement_study(s, 10)
    assert np.all((3.2 <= ratios(r)) & (ratios(r) <= 4.8))


def test_energy_consistency_second_order():
    s = PacketSetup(MuProfile.quadratic_real(0.1), PotentialProfile.harmonic(1.0), C, 10.0, 101, 0.02, x0=1, k0=1)
    h, gaps = energy_consistency_study(s)
    assert 1.7 <= observed_order(h, gaps) <= 2.3


def test_legendre_errors():
    s = PacketSetup(MuProfile.linear_imag(0.2), PotentialProfile.cubic_imag(0.1), C, 5.0, 101, 0.01, sigma=0.5, k0=1)
    grid, _, state = s.level(0)
    H = assemble_hamiltonian(grid, s.mu, s.potential, C)
    corrected, printed = legendre_errors(state, H, s.mu, s.potential, grid, C)
    assert corrected <= 1e-11 and printed > 0.1


def test_suite_on_harmonic_pt():
    results = run_invariant_suite(load_config(CONFIGS / "harmonic_pt.conf"))
    assert suite_passed(results), "\n".join(r.line() for r in results if not r.passed)
    names = {r.name for r in results}
    assert {"pt_coupling", "probability_conservation", "legendre_identity"} <= names


def test_suite_reports_non_pt_failure():
    results = run_invariant_suite(load_config(CONFIGS / "non_pt.conf"))
    failed = {r.name for r in results if not r.passed}
    assert "pt_matrix_commutation" in failed
    assert not suite_passed(results)


def test_spectrum_only_config_skips_dynamics():
    results = run_invariant_suite(load_config(CONFIGS / "harmonic_spectrum.conf"))
    skipped = [r for r in results if r.skipped]
    assert [r.name for r in skipped] == ["continuity_refinement"]
    assert skipped[0].line().startswith("SKIP")
    assert suite_passed(results)
