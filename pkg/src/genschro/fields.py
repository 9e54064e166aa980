"""The field pair (psi, phi) and the PT map on a symmetric grid."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import Grid, integrate
from .errors import BoundaryWarning, ConfigurationError

PHI_MODES = ("pt_of_psi", "conjugate", "independent")


@dataclass(frozen=True, eq=False)
class FieldState:
    """Fields psi and phi on the grid at time ``t``.

    The conjugate fields psi*, phi* are never stored; they are taken by complex
    conjugation wherever the density formulas need them.
    """

    t: float
    psi: np.ndarray
    phi: np.ndarray
    phi_mode: str = "independent"

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        phi = np.asarray(self.phi, dtype=complex)
        if psi.shape != phi.shape or psi.ndim != 1:
            raise ValueError("psi and phi must be 1-D arrays of equal length")
        if self.phi_mode not in PHI_MODES:
            raise ConfigurationError(f"unknown phi_mode {self.phi_mode!r}")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)

    def evolved(self, t, psi, phi) -> "FieldState":
        return replace(self, t=t, psi=psi, phi=phi)

    def boundary_amplitude(self, width: int = 4) -> float:
        """Largest |psi| or |phi| over the ``width`` nodes next to each end."""
        edge = np.r_[0 : width + 1, -width - 1 : 0]
        return float(max(np.abs(self.psi[edge]).max(), np.abs(self.phi[edge]).max()))

    def has_dirichlet_boundary(self) -> bool:
        return bool(self.psi[0] == 0 and self.psi[-1] == 0 and self.phi[0] == 0 and self.phi[-1] == 0)


def pt_transform(field) -> np.ndarray:
    """(PT f)_k = conj(f_{N-1-k})."""
    return np.conj(np.asarray(field)[::-1])


def pt_defect(state: FieldState) -> float:
    """max |phi - PT(psi)|."""
    return float(np.max(np.abs(state.phi - pt_transform(state.psi))))


def gaussian_samples(grid: Grid, x0: float, k0: float, sigma: float) -> np.ndarray:
    """Unit-norm Gaussian packet with Dirichlet ends, renormalized on the grid."""
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    x = grid.nodes
    psi = (2.0 * np.pi * sigma**2) ** -0.25 * np.exp(
        -((x - x0) ** 2) / (4.0 * sigma**2) + 1j * k0 * x
    )
    peak = np.abs(psi).max()
    edge = max(abs(psi[0]), abs(psi[-1]))
    if peak == 0 or edge >= 1e-10 * peak:
        warnings.warn(
            f"Gaussian (x0={x0}, sigma={sigma}) has boundary amplitude "
            f"{edge / peak if peak else float('inf'):.2e} of its peak",
            BoundaryWarning,
            stacklevel=3,
        )
    psi[0] = psi[-1] = 0.0
    norm = integrate(np.abs(psi) ** 2, grid)
    if norm <= 0:
        raise ConfigurationError("Gaussian packet has no support on the grid")
    return psi / np.sqrt(norm)


def init_gaussian(
    grid: Grid,
    x0: float = 0.0,
    k0: float = 0.0,
    sigma: float = 1.0,
    phi_mode: str = "pt_of_psi",
    phi_params: dict | None = None,
    t: float = 0.0,
) -> FieldState:
    """Gaussian psi and a phi chosen by ``phi_mode``.

    ``independent`` builds phi as its own Gaussian from ``phi_params``
    (keys x0, k0, sigma; any missing key falls back to psi's value).
    """
    if phi_mode not in PHI_MODES:
        raise ConfigurationError(f"unknown phi_mode {phi_mode!r}")
    psi = gaussian_samples(grid, x0, k0, sigma)
    if phi_mode == "pt_of_psi":
        phi = pt_transform(psi)
    elif phi_mode == "conjugate":
        phi = np.conj(psi)
    else:
        p = {"x0": x0, "k0": k0, "sigma": sigma, **(phi_params or {})}
        phi = gaussian_samples(grid, p["x0"], p["k0"], p["sigma"])
    return FieldState(t, psi, phi, phi_mode)
