"""Low-lying eigenpairs of the discrete Hamiltonian and stationarity checks.

Eigenpairs are computed on the interior block (the Dirichlet rows carry a unit
diagonal that is not part of the physical spectrum). ARPACK in shift-invert mode
supplies the candidates, with the inverse applied through the banded LU; each
pair is then polished by inverse iteration at its own eigenvalue.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigs

from .banded import BandedComplexMatrix, BandedLU
from .core import Grid, PhysicalConstants, PotentialProfile, eval_potential, integrate
from .errors import ConvergenceError, DefectiveEigenpairWarning, SolverError, UsageError
from .evolution import Propagator, step
from .fields import FieldState, pt_transform

RESIDUAL_BOUND = 1e-8
DEFECTIVE_CONDITION = 1e8


def reality_tolerance(E) -> float:
    return 1e-6 * max(1.0, abs(complex(E).real))


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Eigenpairs sorted by ascending real part.

    ``eigenvectors[:, n]`` lives on the full grid (zero boundary nodes) and is
    normalized to unit integral of |v|^2. ``flags`` is ``real``, ``pair`` (its
    conjugate is also in the set) or ``unpaired``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    conditions: np.ndarray
    reality_flags: np.ndarray
    flags: tuple = field(default_factory=tuple)
    shift: complex = 0.0

    def __len__(self):
        return len(self.eigenvalues)

    def tolerances(self) -> np.ndarray:
        return np.array([reality_tolerance(E) for E in self.eigenvalues])


def gershgorin_lower_bound(H: BandedComplexMatrix) -> float:
    """Lower bound on Re(E) over the spectrum of ``H``."""
    radius = np.zeros(H.size)
    for d in H.offsets:
        if d:
            radius += np.abs(H.row_diagonal(d))
    return float(np.min(H.diagonal(0).real - radius))


def hermitian_seed_shift(grid: Grid, potential: PotentialProfile, constants: PhysicalConstants | None = None) -> float:
    """Just below the lowest eigenvalue of the mu=0 operator with Re V.

    Used as the default shift for configured spectra.
    """
    constants = constants or PhysicalConstants()
    x = grid.nodes[1:-1]
    pref = constants.hbar**2 / (2.0 * constants.mass * grid.dx**2)
    V = eval_potential(potential, x).real if potential is not None else np.zeros_like(x)
    d = 2.0 * pref + V
    e = -pref * np.ones(x.size - 1)
    if x.size == 1:
        low = float(d[0])
    else:
        low = float(eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0])
    return low - 0.1 * max(1.0, abs(low))


def _left_vector(lu: BandedLU, n: int, rng) -> np.ndarray:
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for _ in range(3):
        w = lu.solve(w, trans=1)
        w /= np.linalg.norm(w)
    return w


def _polish(A: BandedComplexMatrix, E: complex, v: np.ndarray, rng, sweeps: int = 2):
    """Inverse iteration at E; returns (E, v, residual, condition)."""
    n = A.size
    scale = max(1.0, abs(E))
    lu = None
    for offset in (1e-10, 1e-8, 1e-6):
        try:
            lu = BandedLU(A.scaled(1.0, -(E + offset * scale)), max_condition=np.inf)
            break
        except SolverError:
            continue
    if lu is None:
        raise ConvergenceError(f"could not factor the shifted matrix near E={E}", np.inf)
    symmetric = A.is_symmetric()
    for _ in range(sweeps):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        Av = A.matvec(v)
        E = (v @ Av) / (v @ v) if symmetric and abs(v @ v) > 1e-3 else np.vdot(v, Av)
    residual = float(np.linalg.norm(A.matvec(v) - E * v))
    w = v if symmetric else _left_vector(lu, n, rng)
    overlap = abs(w @ v)
    condition = float(np.linalg.norm(w) * np.linalg.norm(v) / overlap) if overlap else np.inf
    return complex(E), v, residual, condition


def _pair_flags(values) -> tuple:
    flags = []
    for i, E in enumerate(values):
        tol = reality_tolerance(E)
        if abs(E.imag) <= tol:
            flags.append("real")
            continue
        partner = any(j != i and abs(F - np.conj(E)) <= tol for j, F in enumerate(values))
        flags.append("pair" if partner else "unpaired")
    return tuple(flags)


def lowest_eigenpairs(
    H: BandedComplexMatrix,
    k: int,
    shift: complex | None = None,
    grid: Grid | None = None,
    seed: int = 0,
    extra: int = 4,
) -> SpectralResult:
    """The ``k`` eigenpairs with the smallest real part near ``shift``.

    ``shift`` defaults to a Gershgorin lower bound, so the eigenvalues closest
    to it are the bottom of the spectrum. Pass ``grid`` to normalize eigenvectors
    in the integral sense; otherwise they have unit Euclidean norm.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise UsageError(f"k must be a positive integer, got {k!r}")
    A = H.interior()
    n = A.size
    if k > n:
        raise UsageError(f"k={k} exceeds the {n} interior unknowns")
    if shift is None:
        shift = gershgorin_lower_bound(A)
    rng = np.random.default_rng(seed)
    m = min(n, k + extra)
    if n <= max(2 * m + 2, 40):
        w, V = np.linalg.eig(A.to_dense())
    else:
        lu = BandedLU(A.scaled(1.0, -shift), max_condition=np.inf)
        op = LinearOperator((n, n), matvec=lu.solve, dtype=complex)
        mat = LinearOperator((n, n), matvec=A.matvec, dtype=complex)
        v0 = rng.standard_normal(n) + 0j
        try:
            w, V = eigs(mat, k=m, sigma=shift, OPinv=op, v0=v0, ncv=min(n, max(2 * m + 1, 20)), maxiter=50 * n)
        except ArpackNoConvergence as exc:
            raise ConvergenceError("shift-invert iteration did not converge", np.inf) from exc
        except ArpackError as exc:
            raise ConvergenceError(f"eigensolver failure: {exc}", np.inf) from exc
    order = np.lexsort((w.imag, w.real))[:k]
    values, vectors, residuals, conditions = [], [], [], []
    for idx in order:
        E, v, res, cond = _polish(A, complex(w[idx]), V[:, idx].astype(complex), rng)
        values.append(E)
        vectors.append(v)
        residuals.append(res)
        conditions.append(cond)
    worst = max(residuals)
    if worst > RESIDUAL_BOUND:
        raise ConvergenceError(f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_BOUND:g}", worst)
    order = np.lexsort((np.imag(values), np.real(values)))
    values = np.array(values)[order]
    full = np.zeros((H.size, k), dtype=complex)
    full[1:-1] = np.array(vectors).T[:, order]
    for c in range(k):
        norm = np.sqrt(integrate(np.abs(full[:, c]) ** 2, grid)) if grid is not None else np.linalg.norm(full[:, c])
        full[:, c] /= norm
    conditions = np.array(conditions)[order]
    for E, c in zip(values, conditions):
        if c > DEFECTIVE_CONDITION:
            warnings.warn(f"eigenvalue {E:.6g} is nearly defective (condition {c:.2e})", DefectiveEigenpairWarning, stacklevel=2)
    return SpectralResult(
        eigenvalues=values,
        eigenvectors=full,
        residuals=np.array(residuals)[order],
        conditions=conditions,
        reality_flags=np.array([abs(E.imag) <= reality_tolerance(E) for E in values]),
        flags=_pair_flags(values),
        shift=complex(shift),
    )


def pt_align(v: np.ndarray):
    """Global phase making ``v`` as close to PT-symmetric as possible.

    Returns ``(aligned, defect)`` with defect = ||u - PT u|| / ||u||.
    """
    v = np.asarray(v, dtype=complex)
    overlap = np.vdot(v, pt_transform(v))
    phase = np.exp(0.5j * np.angle(overlap)) if overlap != 0 else 1.0
    u = phase * v
    norm = np.linalg.norm(u)
    return u, float(np.linalg.norm(u - pt_transform(u)) / norm) if norm else 0.0


def stationarity_check(v: np.ndarray, propagator: Propagator, steps: int, t0: float = 0.0) -> float:
    """Evolve psi = v, phi = v^PT and return the worst phase-aligned deviation from v.

    The deviation is max_k |e^{-i theta} psi_k(t) - v_k| / max|v| with theta the
    best global phase at each step.
    """
    if steps < 0:
        raise UsageError("steps must be >= 0")
    v = np.asarray(v, dtype=complex).copy()
    v[0] = v[-1] = 0.0
    scale = np.abs(v).max()
    if scale == 0:
        raise UsageError("zero vector")
    state = FieldState(t0, v, pt_transform(v), "pt_of_psi")
    worst = 0.0
    vv = np.vdot(v, v)
    for _ in range(steps):
        state = step(state, propagator)
        c = np.vdot(v, state.psi) / vv
        phase = c / abs(c) if c != 0 else 1.0
        worst = max(worst, float(np.abs(state.psi / phase - v).max() / scale))
    return worst
