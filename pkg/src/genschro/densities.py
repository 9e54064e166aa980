"""Pointwise densities and integrated functionals of the two-field theory.

Every density is a sum of an expression in (psi, phi, mu, V) and the same
expression in the conjugated quantities. Both halves are evaluated explicitly and
the imaginary part of the sum, which vanishes analytically, is kept as a residue
so callers can confirm it stays at roundoff level.

Spatial derivatives use second-order central differences (second-order one-sided
at the two end nodes). Time derivatives are always supplied by the caller, usually
from :func:`field_time_derivatives`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .banded import BandedComplexMatrix
from .core import Grid, MuProfile, PhysicalConstants, PotentialProfile, eval_mu, eval_potential, integrate
from .fields import FieldState

DENSITY_NAMES = ("rho", "j", "hdens", "sflux", "pdens")


def ddx(f, grid: Grid) -> np.ndarray:
    return np.gradient(np.asarray(f), grid.dx, edge_order=2)


def _mu_nodes(mu: MuProfile, grid: Grid):
    m0, m1, _ = eval_mu(mu, grid.nodes)
    return 1.0 + m0, m1


def imag_residue(first, second) -> float:
    """max |Im(first + second)| relative to the size of the two halves."""
    scale = float(np.max(np.abs(first) + np.abs(second), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs((first + second).imag))) / scale


def _project(first, second) -> np.ndarray:
    # adding +0.0 turns any -0.0 into +0.0, so exact cancellations compare bitwise to 0
    return (first + second).real + 0.0


# -- conjugate-paired halves ------------------------------------------------------


def _rho_halves(state: FieldState):
    psi, phi = state.psi, state.phi
    return phi * psi, np.conj(phi) * np.conj(psi)


def _current_bracket(psi, phi, a, grid):
    return a * a * (phi * ddx(psi, grid) - psi * ddx(phi, grid))


def _current_halves(state, mu, grid, constants):
    a, _ = _mu_nodes(mu, grid)
    c = constants.hbar / (2j * constants.mass)
    A = _current_bracket(state.psi, state.phi, a, grid)
    B = _current_bracket(np.conj(state.psi), np.conj(state.phi), np.conj(a), grid)
    return c * A, -c * B


def _hamiltonian_line(psi, phi, a, mp, V, grid, constants):
    dpsi, dphi = ddx(psi, grid), ddx(phi, grid)
    kin = a * a * dphi * dpsi + mp * a / 2.0 * (dphi * psi + phi * dpsi) + mp * mp / 4.0 * phi * psi
    return constants.hbar**2 / (4.0 * constants.mass) * kin + 0.5 * V * phi * psi


def _hamiltonian_halves(state, mu, potential, grid, constants):
    a, mp = _mu_nodes(mu, grid)
    V = eval_potential(potential, grid.nodes, state.t)
    first = _hamiltonian_line(state.psi, state.phi, a, mp, V, grid, constants)
    second = _hamiltonian_line(
        np.conj(state.psi), np.conj(state.phi), np.conj(a), np.conj(mp), np.conj(V), grid, constants
    )
    return first, second


def _flux_line(psi, phi, psi_dot, phi_dot, a, mp, grid, constants):
    dpsi, dphi = ddx(psi, grid), ddx(phi, grid)
    bracket = a * a * (psi_dot * dphi + phi_dot * dpsi) + a * mp / 2.0 * (psi_dot * phi + psi * phi_dot)
    return -constants.hbar**2 / (4.0 * constants.mass) * bracket


def _flux_halves(state, psi_dot, phi_dot, mu, grid, constants):
    a, mp = _mu_nodes(mu, grid)
    first = _flux_line(state.psi, state.phi, psi_dot, phi_dot, a, mp, grid, constants)
    second = _flux_line(
        np.conj(state.psi), np.conj(state.phi), np.conj(psi_dot), np.conj(phi_dot),
        np.conj(a), np.conj(mp), grid, constants,
    )
    return first, second


def _momentum_halves(state, grid, constants):
    c = 0.5j * constants.hbar
    first = c * ddx(state.psi, grid) * state.phi
    second = -c * ddx(np.conj(state.psi), grid) * np.conj(state.phi)
    return first, second


# -- public densities -------------------------------------------------------------


def probability_density(state: FieldState) -> np.ndarray:
    """rho = phi psi + phi* psi* = 2 Re(phi psi)."""
    return _project(*_rho_halves(state))


def current_density(
    state: FieldState, mu: MuProfile, grid: Grid, constants: PhysicalConstants | None = None
) -> np.ndarray:
    """j = (hbar/m) Im[(1+mu)^2 (phi psi' - psi phi')]."""
    return _project(*_current_halves(state, mu, grid, constants or PhysicalConstants()))


def hamiltonian_density(
    state: FieldState,
    mu: MuProfile,
    potential: PotentialProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
) -> np.ndarray:
    return _project(*_hamiltonian_halves(state, mu, potential, grid, constants or PhysicalConstants()))


def energy_flux(
    state: FieldState,
    psi_dot,
    phi_dot,
    mu: MuProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
) -> np.ndarray:
    return _project(*_flux_halves(state, psi_dot, phi_dot, mu, grid, constants or PhysicalConstants()))


def momentum_density(state: FieldState, grid: Grid, constants: PhysicalConstants | None = None) -> np.ndarray:
    """P = (i hbar / 2)(psi' phi - psi*' phi*) = -hbar Im(psi' phi)."""
    return _project(*_momentum_halves(state, grid, constants or PhysicalConstants()))


# -- Lagrangian side --------------------------------------------------------------


def field_time_derivatives(state: FieldState, H: BandedComplexMatrix, constants: PhysicalConstants | None = None):
    """(psi_dot, phi_dot) from i hbar psi_dot = H psi and -i hbar phi_dot = H phi."""
    hbar = (constants or PhysicalConstants()).hbar
    return H.matvec(state.psi) / (1j * hbar), -H.matvec(state.phi) / (1j * hbar)


def canonical_momenta(state: FieldState, constants: PhysicalConstants | None = None, printed_sign: bool = False):
    """(pi_psi, pi_phi, pi_psistar, pi_phistar).

    pi_psistar = -(i hbar/2) phi* follows from differentiating the Lagrangian
    density with respect to d(psi*)/dt. ``printed_sign=True`` returns the
    opposite sign instead, which breaks the Legendre identity.
    """
    hbar = (constants or PhysicalConstants()).hbar
    zero = np.zeros_like(state.phi)
    pi_psistar = 0.5j * hbar * np.conj(state.phi)
    if not printed_sign:
        pi_psistar = -pi_psistar
    return 0.5j * hbar * state.phi, zero, pi_psistar, zero.copy()


def lagrangian_density(
    state: FieldState,
    psi_dot,
    phi_dot,
    mu: MuProfile,
    potential: PotentialProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
) -> np.ndarray:
    """Complex pointwise Lagrangian density of the two-field theory.

    ``phi_dot`` does not enter (phi carries no time derivative in the
    Lagrangian); it is accepted so all time-derivative consumers share one signature.
    """
    constants = constants or PhysicalConstants()
    hb = constants.hbar
    a, mp = _mu_nodes(mu, grid)
    V = eval_potential(potential, grid.nodes, state.t)
    psi, phi = state.psi, state.phi
    kin1 = _hamiltonian_line(psi, phi, a, mp, V, grid, constants)
    kin2 = _hamiltonian_line(np.conj(psi), np.conj(phi), np.conj(a), np.conj(mp), np.conj(V), grid, constants)
    line1 = 0.5j * hb * phi * psi_dot - kin1
    line2 = -0.5j * hb * np.conj(phi) * np.conj(psi_dot) - kin2
    return line1 + line2


def legendre_hamiltonian_density(
    state: FieldState,
    psi_dot,
    phi_dot,
    mu: MuProfile,
    potential: PotentialProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
    printed_sign: bool = False,
) -> np.ndarray:
    """sum_sigma pi_sigma * d(f_sigma)/dt - L, as a complex array."""
    pi_psi, pi_phi, pi_psistar, pi_phistar = canonical_momenta(state, constants, printed_sign)
    sum_pi_fdot = (
        pi_psi * psi_dot + pi_phi * phi_dot + pi_psistar * np.conj(psi_dot) + pi_phistar * np.conj(phi_dot)
    )
    return sum_pi_fdot - lagrangian_density(state, psi_dot, phi_dot, mu, potential, grid, constants)


# -- integrated functionals -------------------------------------------------------


def plain_pairing(a, b, grid: Grid):
    """integral of a*b with no conjugation."""
    return integrate(np.asarray(a) * np.asarray(b), grid)


def conjugated_pairing(a, b, grid: Grid):
    """integral of conj(a)*b; only meaningful for the Hermitian reduction."""
    return integrate(np.conj(a) * np.asarray(b), grid)


def energy_halves(state: FieldState, H: BandedComplexMatrix, grid: Grid):
    """(<psi, H phi>, <psi*, H* phi*>) with the plain pairing."""
    first = plain_pairing(state.psi, H.matvec(state.phi), grid)
    second = plain_pairing(np.conj(state.psi), H.conj().matvec(np.conj(state.phi)), grid)
    return first, second


def total_energy(state: FieldState, H: BandedComplexMatrix, grid: Grid) -> complex:
    first, second = energy_halves(state, H, grid)
    return complex(0.5 * (first + second))


@dataclass(frozen=True, eq=False)
class DensitySnapshot:
    t: float
    rho: np.ndarray
    j: np.ndarray
    hdens: np.ndarray
    sflux: np.ndarray
    pdens: np.ndarray
    imag_residue: dict = field(default_factory=dict)

    def max_imag_residue(self) -> float:
        return max(self.imag_residue.values(), default=0.0)


def compute_snapshot(
    state: FieldState,
    H: BandedComplexMatrix,
    mu: MuProfile,
    potential: PotentialProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
) -> DensitySnapshot:
    """All five densities at ``state.t``; time derivatives come from H."""
    constants = constants or PhysicalConstants()
    psi_dot, phi_dot = field_time_derivatives(state, H, constants)
    halves = {
        "rho": _rho_halves(state),
        "j": _current_halves(state, mu, grid, constants),
        "hdens": _hamiltonian_halves(state, mu, potential, grid, constants),
        "sflux": _flux_halves(state, psi_dot, phi_dot, mu, grid, constants),
        "pdens": _momentum_halves(state, grid, constants),
    }
    return DensitySnapshot(
        t=state.t,
        **{name: _project(*pair) for name, pair in halves.items()},
        imag_residue={name: imag_residue(*pair) for name, pair in halves.items()},
    )


def density_residues(state, psi_dot, phi_dot, mu, potential, grid, constants=None) -> dict:
    """Relative imaginary residue of each density for arbitrary supplied time derivatives."""
    constants = constants or PhysicalConstants()
    return {
        "rho": imag_residue(*_rho_halves(state)),
        "j": imag_residue(*_current_halves(state, mu, grid, constants)),
        "hdens": imag_residue(*_hamiltonian_halves(state, mu, potential, grid, constants)),
        "sflux": imag_residue(*_flux_halves(state, psi_dot, phi_dot, mu, grid, constants)),
        "pdens": imag_residue(*_momentum_halves(state, grid, constants)),
    }
