"""Rotation groups, their indefinite-signature duals, and Lie-algebra bases.

Points are stored as plain numpy matrices tagged with a signature:
``("compact", N)`` for SO(N) and ``("indefinite", m, n)`` for the identity
component of the pseudo-orthogonal group preserving diag(I_m, -I_n).

Bases of the Lie algebra are orthonormal for the trace form
g(X, Y) = -tr(XY) on skew-symmetric (compact) directions and
g(X, Y) = +tr(XY) on the symmetric boost directions of the indefinite form.
This normalization is the one under which the coordinate Laplacian on SO(N)
has eigenvalue -(N - 1)/2 on matrix entries; the calibration tests pin it.

Sampling takes an explicit integer seed and is deterministic, so
verification runs over disjoint seeds can proceed concurrently without any
shared state.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .jets import JetScalar, constant, is_zero, scalar_value, zero_like

POINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BasisVector:
    """Lie-algebra direction: a matrix, its index pair, and its block tag.

    ``form_sign`` is the sign s with which g(X, Y) = s * tr(XY) makes the
    containing basis orthonormal: -1 for skew directions, +1 for symmetric
    boost directions.
    """

    matrix: np.ndarray
    rows: tuple[int, int]
    block: str  # "full", "k", or "m"
    form_sign: int = -1


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """Group element with its signature tag."""

    entries: np.ndarray
    signature: tuple

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def minkowski_form(m: int, n: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(m), -np.ones(n)]))


def validate_group_point(point: GroupPoint, tol: float = POINT_TOL) -> None:
    """Raise if the matrix fails its defining relations to tolerance."""
    x = point.entries
    kind = point.signature[0]
    if kind == "compact":
        defect = np.max(np.abs(x.T @ x - np.eye(x.shape[0])))
    elif kind == "indefinite":
        _, m, n = point.signature
        eta = minkowski_form(m, n)
        defect = np.max(np.abs(x.T @ eta @ x - eta))
    else:
        raise ValueError(f"unknown signature {point.signature!r}")
    if defect > tol:
        raise ValueError(f"matrix violates {kind} relation by {defect:.3e}")
    det = np.linalg.det(x)
    if abs(det - 1.0) > max(tol, 1e-9):
        raise ValueError(f"determinant {det!r} is not 1")


# -- Lie-algebra bases -------------------------------------------------------


def _skew_unit(N: int, r: int, s: int) -> np.ndarray:
    mat = np.zeros((N, N))
    mat[r - 1, s - 1] = 1.0 / np.sqrt(2.0)
    mat[s - 1, r - 1] = -1.0 / np.sqrt(2.0)
    return mat


def _symmetric_unit(N: int, r: int, s: int) -> np.ndarray:
    mat = np.zeros((N, N))
    mat[r - 1, s - 1] = 1.0 / np.sqrt(2.0)
    mat[s - 1, r - 1] = 1.0 / np.sqrt(2.0)
    return mat


def so_basis(N: int) -> list[BasisVector]:
    """Orthonormal basis of so(N): (E_rs - E_sr)/sqrt(2) for r < s."""
    if N < 2:
        raise ValueError("need N >= 2")
    return [
        BasisVector(_skew_unit(N, r, s), (r, s), "full")
        for r in range(1, N + 1)
        for s in range(r + 1, N + 1)
    ]


def k_basis(m: int, n: int) -> list[BasisVector]:
    """Block-diagonal skew directions tangent to SO(m) x SO(n)."""
    N = m + n
    out = [
        BasisVector(_skew_unit(N, r, s), (r, s), "k")
        for r in range(1, m + 1)
        for s in range(r + 1, m + 1)
    ]
    out.extend(
        BasisVector(_skew_unit(N, r, s), (r, s), "k")
        for r in range(m + 1, N + 1)
        for s in range(r + 1, N + 1)
    )
    return out


def m_basis(m: int, n: int, kind: str = "compact") -> list[BasisVector]:
    """Orthonormal complement of the block-diagonal subalgebra.

    Compact: skew off-block directions of so(m+n).  Indefinite: symmetric
    boost directions of the pseudo-orthogonal algebra, orthonormal for
    +tr(XY).
    """
    if m < 1 or n < 1:
        raise ValueError("need m, n >= 1")
    N = m + n
    if kind == "compact":
        make, sign = _skew_unit, -1
    elif kind == "indefinite":
        make, sign = _symmetric_unit, +1
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return [
        BasisVector(make(N, j, a), (j, a), "m", sign)
        for j in range(1, m + 1)
        for a in range(m + 1, N + 1)
    ]


def gram_matrix(basis: Sequence[BasisVector]) -> np.ndarray:
    """Gram matrix under the signed trace form (all vectors must share a sign)."""
    signs = {b.form_sign for b in basis}
    if len(signs) != 1:
        raise ValueError("mixed form signs in one basis")
    sign = signs.pop()
    k = len(basis)
    G = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            G[i, j] = sign * np.trace(basis[i].matrix @ basis[j].matrix)
    return G


# -- sampling -----------------------------------------------------------------


def _haar_orthogonal(N: int, rng: np.random.Generator) -> np.ndarray:
    """Special-orthogonal matrix, Haar-distributed up to the det correction.

    QR of a Gaussian matrix with the R-diagonal sign fix; a det of -1 is
    repaired by negating the first column.
    """
    if N == 1:
        return np.ones((1, 1))
    A = rng.standard_normal((N, N))
    Q, R = np.linalg.qr(A)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    Q = Q * d
    if np.linalg.det(Q) < 0:
        Q = Q.copy()
        Q[:, 0] = -Q[:, 0]
    return Q


def sample_so(N: int, seed: int) -> GroupPoint:
    """Seeded random element of SO(N)."""
    if N < 1:
        raise ValueError("need N >= 1")
    rng = np.random.default_rng(seed)
    point = GroupPoint(_haar_orthogonal(N, rng), ("compact", N))
    validate_group_point(point)
    return point


def sample_block_diagonal(blocks: Sequence[int], seed: int) -> GroupPoint:
    """Seeded block-diagonal element of SO(n1) x ... x SO(nt) inside SO(N)."""
    if not blocks or any(b < 1 for b in blocks):
        raise ValueError("block sizes must be positive")
    rng = np.random.default_rng(seed)
    N = sum(blocks)
    x = np.zeros((N, N))
    start = 0
    for b in blocks:
        x[start : start + b, start : start + b] = _haar_orthogonal(b, rng)
        start += b
    point = GroupPoint(x, ("compact", N))
    validate_group_point(point)
    return point


def sample_so_mn(m: int, n: int, seed: int, radius: float = 0.75) -> GroupPoint:
    """Seeded element of the identity component of the indefinite group.

    Constructed as k . exp(a): k block-diagonal in SO(m) x SO(n) and a a
    random combination of boost directions with coefficients uniform in
    [-radius, radius].  Membership in the identity component is therefore
    by construction.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rng = np.random.default_rng(seed)
    N = m + n
    k = np.zeros((N, N))
    k[:m, :m] = _haar_orthogonal(m, rng)
    k[m:, m:] = _haar_orthogonal(n, rng)
    a = np.zeros((N, N))
    for vec in m_basis(m, n, "indefinite"):
        a += rng.uniform(-radius, radius) * vec.matrix
    point = GroupPoint(k @ expm(a), ("indefinite", m, n))
    validate_group_point(point)
    return point


# -- curves -------------------------------------------------------------------


def _as_matrix(x):
    return x.entries if isinstance(x, GroupPoint) else x


def _as_direction(Z):
    return Z.matrix if isinstance(Z, BasisVector) else Z


def curve_point(x, direction, t):
    """Point x . exp(t Z) along the one-parameter curve in direction Z.

    For a plain number t this uses the scaling-and-squaring matrix
    exponential and returns a numpy matrix.  For a jet t the exponential
    series terminates exactly by nilpotency (after splitting off any
    constant part of t) and the result is a nested tuple of jet entries.
    """
    X = _as_matrix(x)
    Z = _as_direction(direction)
    if isinstance(t, Number):
        tc = complex(t)
        if tc.imag == 0.0:
            return np.asarray(X) @ expm(tc.real * Z)
        return np.asarray(X) @ expm(tc * Z.astype(complex))
    c0 = scalar_value(t)
    base = np.asarray(X, dtype=float)
    if c0 != 0j:
        if abs(c0.imag) > 1e-12:
            raise ValueError("constant part of the curve parameter must be real")
        base = base @ expm(c0.real * Z)
        t = t - c0
    shape = t.shape
    bound = sum(shape)
    mats = [base.astype(complex)]
    powers = []
    tp = t
    i = 1
    while i <= bound and not is_zero(tp):
        mats.append(mats[-1] @ Z / i)
        powers.append(tp)
        tp = tp * t
        i += 1
    N = base.shape[0]
    rows = []
    for r in range(N):
        row = []
        for c in range(N):
            acc = constant(mats[0][r, c], shape)
            for tpow, mat in zip(powers, mats[1:]):
                acc = acc + tpow * complex(mat[r, c])
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


def _sparse_columns(Z: np.ndarray) -> dict[int, list[tuple[int, float]]]:
    cols: dict[int, list[tuple[int, float]]] = {}
    for k, c in zip(*np.nonzero(Z)):
        cols.setdefault(int(c), []).append((int(k), float(Z[k, c])))
    return cols


def _sparse_right_mul(X, cols, scale: float):
    """X @ (scale * Z) for a nested-tuple matrix X and sparse Z columns."""
    N = len(X)
    zero_entry = zero_like(X[0][0])
    rows = []
    for r in range(N):
        Xr = X[r]
        row = []
        for c in range(N):
            hits = cols.get(c)
            if not hits:
                row.append(zero_entry)
                continue
            acc = None
            for k, v in hits:
                term = Xr[k] * (v * scale)
                acc = term if acc is None else acc + term
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


def curve_jets(entries, direction, order: int = 2):
    """Jet-valued matrix of x . exp(eps Z) truncated at the given order.

    Coefficient i of entry (r, c) is (x Z^i / i!)[r, c].  ``entries`` is a
    numpy matrix or a nested tuple of scalars of one common shape; jets are
    stacked with the new curve parameter outermost.
    """
    Z = _as_direction(direction)
    if isinstance(entries, np.ndarray):
        mats = [entries.astype(complex)]
        for i in range(1, order + 1):
            mats.append(mats[-1] @ Z / i)
        N = entries.shape[0]
        return tuple(
            tuple(
                JetScalar(order, tuple(complex(m[r, c]) for m in mats))
                for c in range(N)
            )
            for r in range(N)
        )
    cols = _sparse_columns(Z)
    mats = [entries]
    for i in range(1, order + 1):
        mats.append(_sparse_right_mul(mats[-1], cols, 1.0 / i))
    N = len(entries)
    return tuple(
        tuple(JetScalar(order, tuple(m[r][c] for m in mats)) for c in range(N))
        for r in range(N)
    )
