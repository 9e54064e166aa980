"""Implicit-midpoint co-propagation of (psi, phi) with conservation monitoring.

psi obeys  i hbar psi_t = H psi  and phi obeys  -i hbar phi_t = H phi, so one step is

    (I + i tau H) psi^{n+1} = (I - i tau H) psi^n
    (I - i tau H) phi^{n+1} = (I + i tau H) phi^n,        tau = dt / (2 hbar).

When H is complex symmetric the bilinear form sum_k phi_k psi_k, and with it the
total probability, is an exact invariant of this pair of recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .banded import BandedComplexMatrix, BandedLU
from .core import Grid, MuProfile, PhysicalConstants, PotentialProfile, integrate
from .densities import DensitySnapshot, compute_snapshot, current_density, probability_density, total_energy
from .errors import DegenerateNormalizationError, EvolutionError, UsageError
from .fields import FieldState, pt_defect, pt_transform
from .operators import assemble_hamiltonian, coefficient_fields


@dataclass(eq=False)
class Propagator:
    """Factorized implicit-midpoint maps for a fixed H and time step.

    ``dt`` may be negative, which runs the scheme backwards in time.
    """

    H: BandedComplexMatrix
    dt: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    grid: Optional[Grid] = None
    mu: Optional[MuProfile] = None
    potential: Optional[PotentialProfile] = None
    form: str = "divergence"

    def __post_init__(self):
        if self.dt == 0 or not math.isfinite(self.dt):
            raise UsageError(f"time step must be finite and nonzero, got {self.dt}")
        tau = self.dt / (2.0 * self.constants.hbar)
        self.plus = self.H.scaled(1j * tau, 1.0)  # I + i tau H
        self.minus = self.H.scaled(-1j * tau, 1.0)  # I - i tau H
        self.plus_lu = BandedLU(self.plus)
        self.minus_lu = BandedLU(self.minus)

    @classmethod
    def assemble(
        cls,
        grid: Grid,
        mu: MuProfile,
        potential: PotentialProfile,
        constants: PhysicalConstants,
        dt: float,
        form: str = "divergence",
        t: float = 0.0,
    ) -> "Propagator":
        t_eval = t + 0.5 * dt if potential.time_dependent else t
        H = assemble_hamiltonian(grid, mu, potential, constants, t_eval, form)
        return cls(H, dt, constants, grid, mu, potential, form)

    @property
    def time_dependent(self) -> bool:
        return self.potential is not None and self.potential.time_dependent

    def at(self, t: float) -> "Propagator":
        """Propagator for the step starting at ``t`` (H rebuilt at the step midpoint)."""
        if not self.time_dependent:
            return self
        return Propagator.assemble(self.grid, self.mu, self.potential, self.constants, self.dt, self.form, t)

    def advance(self, psi, phi):
        psi_new = self.plus_lu.solve(self.minus.matvec(psi))
        phi_new = self.minus_lu.solve(self.plus.matvec(phi))
        return psi_new, phi_new


def step(state: FieldState, propagator: Propagator, enforce_pt: bool = False) -> FieldState:
    if state.psi.shape[0] != propagator.H.size:
        raise UsageError("state and propagator live on different grids")
    prop = propagator.at(state.t)
    psi, phi = prop.advance(state.psi, state.phi)
    psi[0] = psi[-1] = 0.0
    phi[0] = phi[-1] = 0.0
    if enforce_pt:
        phi = pt_transform(psi)
    return state.evolved(state.t + prop.dt, psi, phi)


# -- continuity -------------------------------------------------------------------


def _midpoint(before: FieldState, after: FieldState, grid: Grid):
    if before.psi.shape != after.psi.shape or before.psi.shape[0] != grid.size:
        raise UsageError("states are not on the same grid")
    dt = after.t - before.t
    if dt == 0:
        raise UsageError("states must be at different times")
    mid = FieldState(
        0.5 * (before.t + after.t),
        0.5 * (before.psi + after.psi),
        0.5 * (before.phi + after.phi),
        before.phi_mode,
    )
    return mid, dt


def continuity_residual(
    before: FieldState,
    after: FieldState,
    mu: MuProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
) -> np.ndarray:
    """(rho^{n+1} - rho^n)/dt + central difference of j at the midpoint fields.

    Returns the residual on interior nodes 1..N-2.
    """
    constants = constants or PhysicalConstants()
    mid, dt = _midpoint(before, after, grid)
    drho = (probability_density(after) - probability_density(before)) / dt
    j = current_density(mid, mu, grid, constants)
    return drho[1:-1] + (j[2:] - j[:-2]) / (2.0 * grid.dx)


def compatible_flux(state: FieldState, mu: MuProfile, grid: Grid, constants: PhysicalConstants | None = None):
    """Half-node current J_{k+1/2} matched to the divergence-form Hamiltonian."""
    constants = constants or PhysicalConstants()
    c2h = coefficient_fields(grid, mu).c2_half
    psi, phi = state.psi, state.phi
    cross = phi[:-1] * psi[1:] - psi[:-1] * phi[1:]
    return constants.hbar / constants.mass * np.imag(c2h * cross / grid.dx)


def flux_continuity_residual(
    before: FieldState,
    after: FieldState,
    mu: MuProfile,
    grid: Grid,
    constants: PhysicalConstants | None = None,
):
    """Residual with the compatible half-node flux, plus the scale it should be judged against.

    Returns ``(residual, scale)``; for a divergence-form step the residual is
    roundoff relative to ``scale``.
    """
    constants = constants or PhysicalConstants()
    mid, dt = _midpoint(before, after, grid)
    rho0, rho1 = probability_density(before), probability_density(after)
    J = compatible_flux(mid, mu, grid, constants)
    r = (rho1[1:-1] - rho0[1:-1]) / dt + (J[1:] - J[:-1]) / grid.dx
    scale = max(np.abs(rho0).max(), np.abs(rho1).max()) / abs(dt) + np.abs(J).max() / grid.dx
    return r, float(scale)


# -- run loop ---------------------------------------------------------------------


@dataclass
class EvolutionRecord:
    """Diagnostics at one recorded step.

    ``flux_residual`` is relative to max|rho|/dt + max|J|/dx; ``continuity_residual``
    is the absolute max of the central-difference residual.
    """

    step: int
    t: float
    total_probability: float
    energy: complex
    continuity_residual: float
    flux_residual: float
    pt_defect: float
    min_rho: float
    boundary_amplitude: float


@dataclass
class EvolutionReport:
    records: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def append(self, record: EvolutionRecord):
        if self.records:
            direction = np.sign(record.t - self.records[-1].t)
            if len(self.records) > 1:
                expected = np.sign(self.records[1].t - self.records[0].t)
            else:
                expected = direction
            if direction == 0 or direction != expected:
                raise UsageError("records must be appended monotonically in time")
        self.records.append(record)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def max_pt_defect(self) -> float:
        return float(self.column("pt_defect").max())

    def energy_drift(self) -> float:
        e = self.column("energy")
        return float(np.max(np.abs(e - e[0])) / abs(e[0])) if abs(e[0]) else float("nan")

    def summary(self) -> dict:
        return {
            "probability_drift": probability_drift(self),
            "max_continuity_residual": float(self.column("continuity_residual").max()),
            "max_flux_residual": float(self.column("flux_residual").max()),
            "max_pt_defect": self.max_pt_defect(),
            "energy_drift": self.energy_drift(),
            "min_rho": float(self.column("min_rho").min()),
            "max_boundary_amplitude": float(self.column("boundary_amplitude").max()),
        }


@dataclass
class RunResult:
    report: EvolutionReport
    snapshots: list
    final: FieldState


def probability_drift(report: EvolutionReport) -> float:
    """max_t |P(t) - P(0)| / |P(0)| with P = integral of rho."""
    if not report.records:
        raise UsageError("report has no records")
    p = report.column("total_probability")
    if p[0] == 0:
        raise DegenerateNormalizationError("initial total probability is zero")
    return float(np.max(np.abs(p - p[0])) / abs(p[0]))


def _record(step_index, state, H, mu, grid, constants, cont, flux) -> EvolutionRecord:
    rho = probability_density(state)
    return EvolutionRecord(
        step=step_index,
        t=state.t,
        total_probability=float(integrate(rho, grid)),
        energy=total_energy(state, H, grid),
        continuity_residual=cont,
        flux_residual=flux,
        pt_defect=pt_defect(state),
        min_rho=float(rho.min()),
        boundary_amplitude=state.boundary_amplitude(),
    )


def run(
    initial: FieldState,
    grid: Grid,
    mu: MuProfile,
    potential: PotentialProfile,
    constants: PhysicalConstants,
    dt: float,
    steps: int,
    snapshot_every: int = 10,
    form: str = "divergence",
    enforce_pt: bool = False,
    on_snapshot: Callable[[int, FieldState, DensitySnapshot], None] | None = None,
    collect: bool = True,
    propagator: Propagator | None = None,
) -> RunResult:
    """Step ``steps`` times, recording diagnostics every ``snapshot_every`` steps.

    The initial state and the final state are always recorded. Continuity
    residuals in a record are maxima over all steps since the previous record.
    """
    if steps < 0:
        raise UsageError("steps must be >= 0")
    if snapshot_every < 1:
        raise UsageError("snapshot_every must be >= 1")
    prop = propagator or Propagator.assemble(grid, mu, potential, constants, dt, form, initial.t)
    report = EvolutionReport()
    snapshots = []

    def emit(n, state, H, cont, flux):
        report.append(_record(n, state, H, mu, grid, constants, cont, flux))
        snap = compute_snapshot(state, H, mu, potential, grid, constants)
        if on_snapshot is not None:
            on_snapshot(n, state, snap)
        if collect:
            snapshots.append(snap)

    state = initial
    emit(0, state, prop.at(state.t).H, 0.0, 0.0)
    cont_max = flux_max = 0.0
    for n in range(1, steps + 1):
        new = step(state, prop, enforce_pt)
        if not (np.all(np.isfinite(new.psi)) and np.all(np.isfinite(new.phi))):
            raise EvolutionError(n)
        cont_max = max(cont_max, float(np.abs(continuity_residual(state, new, mu, grid, constants)).max()))
        r, scale = flux_continuity_residual(state, new, mu, grid, constants)
        flux_max = max(flux_max, float(np.abs(r).max()) / scale if scale else 0.0)
        state = new
        if n % snapshot_every == 0 or n == steps:
            emit(n, state, prop.at(state.t).H, cont_max, flux_max)
            cont_max = flux_max = 0.0
    p = report.column("total_probability")
    if p[0] != 0 and np.max(np.abs(p)) > 1e3 * abs(p[0]):
        report.warnings.append("total probability grew by more than 1e3; PT symmetry may be broken")
    return RunResult(report, snapshots, state)
