"""Discrete generalized momentum and Hamiltonian operators.

Both operators are tridiagonal with second-order central stencils. The first and
last rows are Dirichlet rows: a unit diagonal and no coupling in either direction,
so boundary values that start at zero stay at zero under any of the propagators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedComplexMatrix
from .core import (
    Grid,
    MuProfile,
    PhysicalConstants,
    PotentialProfile,
    eval_mu,
    eval_potential,
)
from .errors import ConfigurationError, SingularCoefficientError

HAMILTONIAN_FORMS = ("expanded", "divergence")


@dataclass(frozen=True, eq=False)
class CoefficientFields:
    """Coefficients of the kinetic operator sampled on the grid.

    ``c2 = (1+mu)^2``, ``c1 = 2(1+mu)mu'``, ``c0 = (1+mu)mu''/2 + mu'^2/4`` on nodes,
    ``c2_half[k]`` is c2 at x_k + dx/2 (k = 0..N-2), and ``V`` is the potential.
    """

    one_plus_mu: np.ndarray
    mu_prime: np.ndarray
    c2: np.ndarray
    c1: np.ndarray
    c0: np.ndarray
    c2_half: np.ndarray
    V: np.ndarray


def half_nodes(grid: Grid) -> np.ndarray:
    x = grid.nodes
    return 0.5 * (x[:-1] + x[1:])


def coefficient_fields(
    grid: Grid,
    mu: MuProfile,
    potential: PotentialProfile | None = None,
    constants: PhysicalConstants | None = None,
    t: float = 0.0,
) -> CoefficientFields:
    x = grid.nodes
    m0, m1, m2 = eval_mu(mu, x)
    a = 1.0 + m0
    bad = np.flatnonzero(np.abs(a) <= 1e-12)
    if bad.size:
        raise SingularCoefficientError(int(bad[0]), float(x[bad[0]]))
    mh = eval_mu(mu, half_nodes(grid))[0]
    V = eval_potential(potential, x, t) if potential is not None else np.zeros(grid.size, complex)
    return CoefficientFields(
        one_plus_mu=a,
        mu_prime=m1,
        c2=a * a,
        c1=2.0 * a * m1,
        c0=a * m2 / 2.0 + m1 * m1 / 4.0,
        c2_half=(1.0 + mh) ** 2,
        V=V,
    )


def _dirichlet(lower, diag, upper):
    """Replace the first/last rows by identity rows and cut their coupling."""
    diag[0] = diag[-1] = 1.0
    upper[0] = 0.0  # row 0 -> col 1
    lower[-1] = 0.0  # row N-1 -> col N-2
    lower[1] = 0.0  # row 1 -> col 0
    upper[-2] = 0.0  # row N-2 -> col N-1
    return {-1: lower, 0: diag, 1: upper}


def assemble_momentum(
    grid: Grid, mu: MuProfile, constants: PhysicalConstants | None = None
) -> BandedComplexMatrix:
    """p = -i hbar [(1+mu) D1 + mu'/2] with the central first difference D1."""
    constants = constants or PhysicalConstants()
    cf = coefficient_fields(grid, mu)
    hb = constants.hbar
    dx = grid.dx
    upper = -1j * hb * cf.one_plus_mu / (2.0 * dx)
    lower = -upper
    diag = -1j * hb * cf.mu_prime / 2.0
    return BandedComplexMatrix.from_row_diagonals(
        _dirichlet(lower, diag, upper), grid.size, "momentum"
    )


def assemble_hamiltonian(
    grid: Grid,
    mu: MuProfile,
    potential: PotentialProfile | None = None,
    constants: PhysicalConstants | None = None,
    t: float = 0.0,
    form: str = "divergence",
) -> BandedComplexMatrix:
    """Generalized Hamiltonian -hbar^2/(2m)[c2 d2 + c1 d1 + c0] + V.

    ``form="expanded"`` discretizes the three terms separately with central D2 and
    D1. ``form="divergence"`` uses the identity c2 d2 + c1 d1 = d(c2 d .) and
    half-node fluxes; the result is complex symmetric (M == M.T exactly).
    """
    if form not in HAMILTONIAN_FORMS:
        raise ConfigurationError(f"unknown assembly form {form!r}")
    constants = constants or PhysicalConstants()
    cf = coefficient_fields(grid, mu, potential, constants, t)
    pref = constants.hbar**2 / (2.0 * constants.mass)
    dx = grid.dx
    dx2 = dx**2
    n = grid.size
    if form == "expanded":
        second = pref * cf.c2 / dx2
        first = pref * cf.c1 / (2.0 * dx)
        upper = -(second + first)
        lower = -(second - first)
        diag = pref * (2.0 * cf.c2) / dx2 - pref * cf.c0 + cf.V
    else:
        flux = -pref * cf.c2_half / dx2  # coupling between k and k+1
        upper = np.zeros(n, complex)
        lower = np.zeros(n, complex)
        upper[:-1] = flux
        lower[1:] = flux
        csum = np.zeros(n, complex)
        csum[1:-1] = cf.c2_half[:-1] + cf.c2_half[1:]
        diag = pref * csum / dx2 - pref * cf.c0 + cf.V
    return BandedComplexMatrix.from_row_diagonals(_dirichlet(lower, diag, upper), n, form)


def kinetic_via_momentum(grid: Grid, mu: MuProfile, constants: PhysicalConstants | None = None):
    """P @ P / (2m), a pentadiagonal matrix tagged ``composed``."""
    constants = constants or PhysicalConstants()
    P = assemble_momentum(grid, mu, constants)
    return P.compose(P).scaled(1.0 / (2.0 * constants.mass), form_tag="composed")


def default_test_field(x: np.ndarray, half_width: float) -> np.ndarray:
    """Smooth, non-symmetric complex probe used by operator refinement studies."""
    s = x / half_width
    return np.exp(-4.0 * s * s + 2j * s) * (1.0 + 0.5 * s)


def observed_order(spacings, errors) -> float:
    """Least-squares slope of log(error) against log(spacing).

    Returns ``inf`` if every error is exactly zero (nothing left to converge).
    """
    h = np.asarray(spacings, float)
    e = np.asarray(errors, float)
    if np.all(e == 0):
        return float("inf")
    if np.any(e <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def _interior_norm(r: np.ndarray, grid: Grid, margin: int) -> float:
    r = r[margin:-margin]
    return float(np.sqrt(grid.dx * np.sum(np.abs(r) ** 2)))


def kinetic_identity_study(
    grid: Grid,
    mu: MuProfile,
    constants: PhysicalConstants | None = None,
    levels: int = 3,
    margin: int = 3,
    test_field=None,
):
    """Defect of H_kin(expanded) against P@P/(2m) applied to a smooth probe.

    The probe is evaluated on ``levels`` successively halved grids; the defect is
    measured in the discrete L2 norm over rows at least ``margin`` nodes from
    either end. Returns ``(spacings, defects)``.
    """
    constants = constants or PhysicalConstants()
    probe = test_field or (lambda x: default_test_field(x, grid.half_width))
    spacings, defects = [], []
    g = grid
    for _ in range(levels):
        f = probe(g.nodes)
        H = assemble_hamiltonian(g, mu, None, constants, form="expanded")
        P = assemble_momentum(g, mu, constants)
        r = H.matvec(f) - P.matvec(P.matvec(f)) / (2.0 * constants.mass)
        spacings.append(g.dx)
        defects.append(_interior_norm(r, g, margin))
        g = g.refined()
    return np.array(spacings), np.array(defects)


def kinetic_identity_residual(
    grid: Grid, mu: MuProfile, constants: PhysicalConstants | None = None, levels: int = 3
):
    """(finest defect, observed convergence order) of H_kin - p^2/(2m)."""
    h, e = kinetic_identity_study(grid, mu, constants, levels)
    return float(e[-1]), observed_order(h, e)


def form_agreement_study(
    grid: Grid,
    mu: MuProfile,
    potential: PotentialProfile | None = None,
    constants: PhysicalConstants | None = None,
    levels: int = 3,
    margin: int = 3,
):
    """Expanded minus divergence Hamiltonian applied to a smooth probe, per level."""
    spacings, defects = [], []
    g = grid
    for _ in range(levels):
        f = default_test_field(g.nodes, grid.half_width)
        He = assemble_hamiltonian(g, mu, potential, constants, form="expanded")
        Hd = assemble_hamiltonian(g, mu, potential, constants, form="divergence")
        spacings.append(g.dx)
        defects.append(_interior_norm(He.matvec(f) - Hd.matvec(f), g, margin))
        g = g.refined()
    return np.array(spacings), np.array(defects)


def pt_conjugate_matrix_defect(H: BandedComplexMatrix, grid: Grid | None = None) -> float:
    """max |J conj(H) J - H| over all entries."""
    if grid is not None and grid.size != H.size:
        raise ValueError("matrix and grid sizes differ")
    return (H.conj().reflect() - H).max_abs()
