"""Banded complex matrices and a reusable banded LU factorization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.sparse.linalg import LinearOperator, onenormest

from .errors import SolverError

FORM_TAGS = ("expanded", "divergence", "momentum", "composed", "generic")


@dataclass(frozen=True, eq=False)
class BandedComplexMatrix:
    """Square matrix stored in LAPACK band layout.

    ``ab[upper + i - j, j] == M[i, j]`` for ``-lower <= j - i <= upper``; every
    entry outside the band is zero by construction.
    """

    ab: np.ndarray = field(repr=False)
    lower: int
    upper: int
    form_tag: str = "generic"

    def __post_init__(self):
        ab = np.asarray(self.ab, dtype=complex)
        if ab.ndim != 2 or ab.shape[0] != self.lower + self.upper + 1:
            raise ValueError("band storage has the wrong number of rows")
        if self.form_tag not in FORM_TAGS:
            raise ValueError(f"unknown form tag {self.form_tag!r}")
        ab.setflags(write=False)
        object.__setattr__(self, "ab", ab)

    @classmethod
    def from_row_diagonals(cls, diagonals: dict, n: int, form_tag: str = "generic"):
        """Build from ``{offset: row_values}`` where ``row_values[i] = M[i, i+offset]``.

        Arrays have length ``n``; entries whose column falls outside the matrix are ignored.
        """
        lower = max([-d for d in diagonals if d < 0], default=0)
        upper = max([d for d in diagonals if d > 0], default=0)
        ab = np.zeros((lower + upper + 1, n), dtype=complex)
        for d, row in diagonals.items():
            row = np.broadcast_to(np.asarray(row, dtype=complex), (n,))
            if d >= 0:
                ab[upper - d, d:] = row[: n - d]
            else:
                ab[upper - d, : n + d] = row[-d:]
        return cls(ab, lower, upper, form_tag)

    @property
    def size(self) -> int:
        return self.ab.shape[1]

    @property
    def offsets(self):
        return range(-self.lower, self.upper + 1)

    def row_diagonal(self, d: int) -> np.ndarray:
        """Length-n array with ``out[i] = M[i, i+d]`` (zero where the column is missing)."""
        n = self.size
        out = np.zeros(n, dtype=complex)
        if -self.lower <= d <= self.upper and abs(d) < n:
            band = self.ab[self.upper - d]
            if d >= 0:
                out[: n - d] = band[d:]
            else:
                out[-d:] = band[: n + d]
        return out

    def diagonal(self, d: int = 0) -> np.ndarray:
        n = self.size
        row = self.row_diagonal(d)
        return row[: n - d] if d >= 0 else row[-d:]

    def matvec(self, v) -> np.ndarray:
        """Apply to a vector or to the columns of an (n, m) array."""
        v = np.asarray(v)
        n = self.size
        out = np.zeros(v.shape, dtype=np.result_type(v, complex))
        for d in self.offsets:
            band = self.ab[self.upper - d]
            if d >= 0:
                coef = band[d:]
                if v.ndim == 2:
                    coef = coef[:, None]
                out[: n - d] += coef * v[d:]
            else:
                coef = band[: n + d]
                if v.ndim == 2:
                    coef = coef[:, None]
                out[-d:] += coef * v[: n + d]
        return out

    def to_dense(self) -> np.ndarray:
        n = self.size
        M = np.zeros((n, n), dtype=complex)
        for d in self.offsets:
            if abs(d) < n:
                M += np.diag(self.diagonal(d), d)
        return M

    def transpose(self) -> "BandedComplexMatrix":
        n = self.size
        diags = {}
        for d in self.offsets:
            row = np.zeros(n, dtype=complex)
            vals = self.diagonal(d)
            if d >= 0:
                row[d:] = vals
            else:
                row[: n + d] = vals
            diags[-d] = row
        return BandedComplexMatrix.from_row_diagonals(diags, n, self.form_tag)

    @property
    def T(self):
        return self.transpose()

    def conj(self) -> "BandedComplexMatrix":
        return BandedComplexMatrix(np.conj(self.ab), self.lower, self.upper, self.form_tag)

    def reflect(self) -> "BandedComplexMatrix":
        """J M J, with J the index-reversal permutation."""
        n = self.size
        diags = {}
        for d in range(-self.upper, self.lower + 1):
            # (JMJ)[i, i+d] = M[n-1-i, n-1-i-d], i.e. diagonal -d of M read backwards
            vals = self.diagonal(-d)[::-1]
            out = np.zeros(n, dtype=complex)
            if d >= 0:
                out[: n - d] = vals
            else:
                out[-d:] = vals
            diags[d] = out
        return BandedComplexMatrix.from_row_diagonals(diags, n, self.form_tag)

    def scaled(self, alpha, shift=0.0, form_tag=None) -> "BandedComplexMatrix":
        """shift * I + alpha * M."""
        ab = alpha * self.ab
        ab[self.upper] += shift
        return BandedComplexMatrix(ab, self.lower, self.upper, form_tag or self.form_tag)

    def _combine(self, other, sign):
        n = self.size
        if other.size != n:
            raise ValueError("size mismatch")
        diags = {}
        for d in set(self.offsets) | set(other.offsets):
            diags[d] = self.row_diagonal(d) + sign * other.row_diagonal(d)
        return BandedComplexMatrix.from_row_diagonals(diags, n, "generic")

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def compose(self, other, form_tag: str = "composed") -> "BandedComplexMatrix":
        """Matrix product self @ other, kept in band form."""
        n = self.size
        if other.size != n:
            raise ValueError("size mismatch")
        diags = {}
        for a in self.offsets:
            ra = self.row_diagonal(a)
            for b in other.offsets:
                rb = other.row_diagonal(b)
                shifted = np.zeros(n, dtype=complex)
                # (MN)[i, i+a+b] += M[i, i+a] * N[i+a, i+a+b]
                if a >= 0:
                    shifted[: n - a] = rb[a:]
                else:
                    shifted[-a:] = rb[: n + a]
                diags[a + b] = diags.get(a + b, 0.0) + ra * shifted
        return BandedComplexMatrix.from_row_diagonals(diags, n, form_tag)

    def interior(self) -> "BandedComplexMatrix":
        """Block with the first and last rows and columns removed."""
        return BandedComplexMatrix(self.ab[:, 1:-1].copy(), self.lower, self.upper, self.form_tag)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.ab))) if self.ab.size else 0.0

    def norm1(self) -> float:
        return float(np.max(np.sum(np.abs(self.ab), axis=0)))

    def is_symmetric(self) -> bool:
        """Exact entrywise M == M^T (no conjugation)."""
        if self.lower != self.upper:
            return False
        return all(np.array_equal(self.diagonal(d), self.diagonal(-d)) for d in range(1, self.upper + 1))


class BandedLU:
    """LU factorization with partial pivoting (LAPACK zgbtrf) of a banded matrix."""

    def __init__(self, matrix: BandedComplexMatrix, max_condition: float = 1e14):
        kl, ku = matrix.lower, matrix.upper
        n = matrix.size
        ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
        ab[kl:] = matrix.ab
        lu, piv, info = lapack.zgbtrf(ab, kl, ku)
        if info < 0:
            raise SolverError(f"zgbtrf: illegal argument {-info}")
        self.matrix = matrix
        self.kl, self.ku, self.n = kl, ku, n
        self._lu, self._piv = lu, piv
        if info > 0:
            raise SolverError(f"singular banded factorization (zero pivot at row {info})", np.inf)
        self.condition = self.estimate_condition()
        if not np.isfinite(self.condition) or self.condition > max_condition:
            raise SolverError("ill-conditioned banded factorization", self.condition)

    def solve(self, b, trans: int = 0) -> np.ndarray:
        """Solve A x = b (trans=0), A^T x = b (1) or A^H x = b (2)."""
        b = np.asarray(b, dtype=complex)
        rhs = b.reshape(self.n, -1)
        x, info = lapack.zgbtrs(self._lu, self.kl, self.ku, rhs, self._piv, trans=trans)
        if info != 0:
            raise SolverError(f"zgbtrs failed with info={info}")
        return x.reshape(b.shape)

    def estimate_condition(self) -> float:
        """1-norm condition estimate ||A||_1 * est(||A^-1||_1)."""
        n = self.n
        if n <= 4:
            inv = self.solve(np.eye(n))
            return self.matrix.norm1() * float(np.max(np.sum(np.abs(inv), axis=0)))
        op = LinearOperator(
            (n, n),
            matvec=lambda v: self.solve(v),
            rmatvec=lambda v: self.solve(v, trans=2),
            dtype=complex,
        )
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            # onenormest normalizes sign vectors elementwise; exact zeros trip harmless warnings
            return self.matrix.norm1() * float(onenormest(op))

    def residual(self, x, b) -> float:
        """||A x - b|| / ||b||."""
        b = np.asarray(b)
        nb = np.linalg.norm(b)
        r = np.linalg.norm(self.matrix.matvec(x) - b)
        return float(r / nb) if nb else float(r)
