"""Grid, physical constants, and the analytic mu(x) / V(x, t) profile families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, TableRangeError

MU_KINDS = ("zero", "quadratic_real", "linear_imag", "table")
POTENTIAL_KINDS = ("zero", "harmonic", "cubic_imag", "table", "custom")


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ConfigurationError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ConfigurationError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric lattice on [-L, L] with an odd number of nodes.

    Nodes are built on the left half and mirrored, so ``nodes[N-1-k] == -nodes[k]``
    holds bit-exactly and ``nodes[(N-1)//2] == 0``.
    """

    half_width: float
    points: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ConfigurationError(f"half_width must be positive, got {self.half_width}")
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 3:
            raise ConfigurationError(f"points must be an odd integer >= 3, got {self.points}")
        object.__setattr__(self, "points", int(self.points))
        if self.points % 2 == 0:
            raise ConfigurationError(f"points must be odd, got {self.points}")
        n = int(self.points)
        mid = (n - 1) // 2
        dx = self.dx
        x = np.empty(n)
        x[: mid + 1] = -self.half_width + np.arange(mid + 1) * dx
        x[mid] = 0.0
        x[mid + 1 :] = -x[:mid][::-1]
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    @property
    def size(self) -> int:
        return int(self.points)

    def refined(self, factor: int = 2) -> "Grid":
        """Same interval with spacing divided by ``factor``."""
        return Grid(self.half_width, (self.points - 1) * factor + 1)


def make_grid(half_width: float, points: int) -> Grid:
    """Build a symmetric grid; ``points`` must be odd (and at least 3)."""
    return Grid(float(half_width), points)


def integrate(values, grid: Grid):
    """Composite trapezoidal rule on the grid."""
    f = np.asarray(values)
    if f.shape[-1] != grid.size:
        raise ValueError(f"expected {grid.size} samples, got {f.shape[-1]}")
    return grid.dx * (f.sum(axis=-1) - 0.5 * (f[..., 0] + f[..., -1]))


def check_pt_symmetry(samples) -> float:
    """max_k |f(x_k) - conj(f(-x_k))| using the index reflection k -> N-1-k."""
    f = np.asarray(samples)
    return float(np.max(np.abs(f - np.conj(f[::-1])))) if f.size else 0.0


def fd_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative on integer offsets."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    A = np.vander(offsets, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


def fourth_order_derivatives(values: np.ndarray, h: float):
    """First and second derivatives of uniformly sampled data, 4th order everywhere.

    Interior points use centered 5-point stencils; the two points nearest each end
    use 6-point one-sided stencils.
    """
    f = np.asarray(values)
    n = len(f)
    if n < 6:
        raise ConfigurationError("tabulated profiles need at least 6 samples")
    d1 = np.empty_like(f, dtype=complex)
    d2 = np.empty_like(f, dtype=complex)
    c1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    d1[2:-2] = sum(c1[i] * f[i : n - 4 + i] for i in range(5)) / h
    d2[2:-2] = sum(c2[i] * f[i : n - 4 + i] for i in range(5)) / h**2
    for k in (0, 1):
        offs = np.arange(6) - k
        d1[k] = fd_weights(offs, 1) @ f[:6] / h
        d2[k] = fd_weights(offs, 2) @ f[:6] / h**2
        tail = f[::-1][:6]
        d1[n - 1 - k] = fd_weights(-offs, 1) @ tail / h
        d2[n - 1 - k] = fd_weights(-offs, 2) @ tail / h**2
    return d1, d2


@dataclass(frozen=True, eq=False)
class TabulatedFunction:
    """Complex samples on a uniform table, with 4th-order derivative columns."""

    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    source: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or len(x) < 6:
            raise ConfigurationError("table needs at least 6 rows")
        h = np.diff(x)
        if np.any(h <= 0):
            raise ConfigurationError(f"table x column must be strictly increasing ({self.source})")
        if np.max(np.abs(h - h.mean())) > 1e-8 * abs(h.mean()):
            raise ConfigurationError(f"table x column must be uniformly spaced ({self.source})")
        v = np.asarray(self.values, dtype=complex)
        d1, d2 = fourth_order_derivatives(v, float(h.mean()))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_splines", tuple(CubicSpline(x, c) for c in (v, d1, d2)))

    @classmethod
    def load(cls, path) -> "TabulatedFunction":
        """Read ``x re [im]`` whitespace-separated rows."""
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"table file not found: {path}")
        try:
            data = np.loadtxt(path, ndmin=2)
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse table {path}: {exc}") from None
        if data.shape[1] not in (2, 3):
            raise ConfigurationError(f"table {path} must have 2 or 3 columns")
        im = data[:, 2] if data.shape[1] == 3 else 0.0
        return cls(data[:, 0], data[:, 1] + 1j * im, source=str(path))

    def _check_range(self, x):
        lo, hi = self.x[0], self.x[-1]
        slack = 1e-12 * max(abs(lo), abs(hi), 1.0)
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise TableRangeError(
                f"query outside tabulated range [{lo}, {hi}] of {self.source or 'table'}"
            )

    def __call__(self, x, derivatives: int = 0):
        x = np.asarray(x, dtype=float)
        self._check_range(x)
        out = tuple(np.asarray(s(x), dtype=complex) for s in self._splines[: derivatives + 1])
        return out if derivatives else out[0]


@dataclass(frozen=True)
class MuProfile:
    """Auxiliary function mu(x) of the generalized momentum."""

    kind: str = "zero"
    gamma: Optional[float] = None
    lam: Optional[float] = None
    table: Optional[TabulatedFunction] = None

    def __post_init__(self):
        if self.kind not in MU_KINDS:
            raise ConfigurationError(f"unknown mu kind {self.kind!r}")
        needed = {"quadratic_real": "gamma", "linear_imag": "lam", "table": "table"}.get(self.kind)
        if needed and getattr(self, needed) is None:
            raise ConfigurationError(f"mu kind {self.kind!r} requires parameter {needed!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def quadratic_real(cls, gamma: float):
        return cls("quadratic_real", gamma=float(gamma))

    @classmethod
    def linear_imag(cls, lam: float):
        return cls("linear_imag", lam=float(lam))

    @classmethod
    def from_table(cls, path):
        return cls("table", table=TabulatedFunction.load(path))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


def eval_mu(profile: MuProfile, x):
    """Return (mu, mu', mu'') as complex arrays (or scalars) at ``x``."""
    x = np.asarray(x, dtype=float)
    zero = np.zeros_like(x, dtype=complex)
    if profile.kind == "zero":
        return zero, zero.copy(), zero.copy()
    if profile.kind == "quadratic_real":
        g = profile.gamma
        return zero + g * x * x, zero + 2.0 * g * x, zero + 2.0 * g
    if profile.kind == "linear_imag":
        lam = 1j * profile.lam
        return lam * x + zero, zero + lam, zero.copy()
    return profile.table(x, derivatives=2)


@dataclass(frozen=True)
class PotentialProfile:
    """Potential V(x, t). Built-in kinds are static; ``custom`` wraps a callable."""

    kind: str = "zero"
    omega: Optional[float] = None
    epsilon: Optional[float] = None
    mass: float = 1.0
    table: Optional[TabulatedFunction] = None
    func: Optional[Callable] = field(default=None, compare=False)
    time_dependent: bool = False

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ConfigurationError(f"unknown potential kind {self.kind!r}")
        needed = {"harmonic": "omega", "cubic_imag": "epsilon", "table": "table", "custom": "func"}
        key = needed.get(self.kind)
        if key and getattr(self, key) is None:
            raise ConfigurationError(f"potential kind {self.kind!r} requires parameter {key!r}")
        if self.time_dependent and self.kind != "custom":
            raise ConfigurationError("only the custom potential kind may be time dependent")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def harmonic(cls, omega: float, mass: float = 1.0):
        return cls("harmonic", omega=float(omega), mass=float(mass))

    @classmethod
    def cubic_imag(cls, epsilon: float):
        return cls("cubic_imag", epsilon=float(epsilon))

    @classmethod
    def from_table(cls, path):
        return cls("table", table=TabulatedFunction.load(path))

    @classmethod
    def custom(cls, func: Callable, time_dependent: bool = True):
        """``func(x, t)`` must return complex samples broadcast against ``x``."""
        return cls("custom", func=func, time_dependent=time_dependent)


def eval_potential(profile: PotentialProfile, x, t: float = 0.0):
    x = np.asarray(x, dtype=float)
    zero = np.zeros_like(x, dtype=complex)
    if profile.kind == "zero":
        return zero
    if profile.kind == "harmonic":
        return zero + 0.5 * profile.mass * profile.omega**2 * x * x
    if profile.kind == "cubic_imag":
        return zero + 1j * profile.epsilon * x**3
    if profile.kind == "table":
        return profile.table(x)
    return zero + np.asarray(profile.func(x, t), dtype=complex)
