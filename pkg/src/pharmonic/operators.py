"""Numerical Laplace-Beltrami and conformality operators via jets.

The Laplacian of f at x is computed as the sum over an orthonormal basis
{Z} of second derivatives of f along the curves x . exp(t Z): those curves
are geodesics through x (one-parameter subgroups for the bi-invariant
metric; boost directions of the symmetric pair for the quotient-level
operators), so no connection correction term is needed.  Each second
derivative is twice the order-2 jet coefficient of f evaluated on the
jet-valued curve matrix; first derivatives for the conformality pairing use
order-1 jets.

The iterated Laplacian is computed by literal recursion: the order-p value
needs the order-(p-1) operator evaluated at jet-valued matrices, which
nests one jet level per iteration and stays exact in the truncated algebra.
Cost grows as |basis|^p; fine at the matrix sizes used here.

For a function invariant under right translation by a subgroup K, every
K-tangent direction contributes zero, so the full-basis Laplacian agrees
with the complement-basis Laplacian; the checkers exploit that to verify
quotient-level identities on group samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .expressions import evaluate
from .group import BasisVector, GroupPoint, curve_jets, k_basis, m_basis, so_basis
from .jets import JetScalar, scalar_value
from .reports import CheckRecord, VerificationReport, lower_check, upper_check

DEPTH_CAP = 5


@dataclass(frozen=True)
class OperatorContext:
    """Basis and signature data the operators run against."""

    basis: tuple[BasisVector, ...]
    signature: tuple
    default_tol: float = 1e-9

    def __post_init__(self):
        if not self.basis:
            raise ValueError("operator context needs a nonempty basis")


def _scaled(basis: Sequence[BasisVector], scale: float) -> tuple[BasisVector, ...]:
    if scale == 1.0:
        return tuple(basis)
    return tuple(
        BasisVector(b.matrix * scale, b.rows, b.block, b.form_sign) for b in basis
    )


def full_context(N: int, scale: float = 1.0) -> OperatorContext:
    """All of so(N): the group-level Laplacian."""
    return OperatorContext(_scaled(so_basis(N), scale), ("compact", N))


def quotient_context(m: int, n: int, scale: float = 1.0) -> OperatorContext:
    """Off-block directions only: the quotient-level operators on SO(m+n)."""
    return OperatorContext(_scaled(m_basis(m, n, "compact"), scale), ("compact", m + n))


def dual_context(m: int, n: int, scale: float = 1.0) -> OperatorContext:
    """Boost directions of the indefinite group: the dual quotient operators."""
    return OperatorContext(
        _scaled(m_basis(m, n, "indefinite"), scale), ("indefinite", m, n)
    )


def k_context(m: int, n: int) -> OperatorContext:
    """Block-diagonal directions (for annihilation checks on invariant f)."""
    return OperatorContext(tuple(k_basis(m, n)), ("compact", m + n))


def _as_matrix(x):
    return x.entries if isinstance(x, GroupPoint) else x


def _coeff(value, i: int):
    """Jet coefficient i; a plain number has no curve dependence, so zero."""
    if isinstance(value, JetScalar):
        return value.coefficient(i)
    return 0j


# -- core operators -------------------------------------------------------------


def laplacian(f, x, ctx: OperatorContext):
    """Sum over basis directions of the second derivative of f along x.exp(tZ)."""
    X = _as_matrix(x)
    total = None
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=2)
        term = _coeff(evaluate(f, jm), 2) * 2
        total = term if total is None else total + term
    return total


def gradient_product(f, g, x, ctx: OperatorContext):
    """Complex-bilinear pairing of gradients: sum of Z(f) Z(g) over the basis."""
    X = _as_matrix(x)
    total = None
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=1)
        df = _coeff(evaluate(f, jm), 1)
        dg = df if g is f else _coeff(evaluate(g, jm), 1)
        term = df * dg
        total = term if total is None else total + term
    return total


def iterated_laplacian(f, p: int, x, ctx: OperatorContext, depth_cap: int = DEPTH_CAP):
    """p-fold Laplacian by recursive jet nesting; p = 0 evaluates f."""
    if p < 0:
        raise ValueError("need p >= 0")
    if p > depth_cap:
        raise ValueError(f"iteration depth {p} exceeds cap {depth_cap}")
    return _iterate(f, p, _as_matrix(x), ctx)


def _iterate(f, p: int, X, ctx: OperatorContext):
    if p == 0:
        return evaluate(f, X)
    total = None
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=2)
        term = _coeff(_iterate(f, p - 1, jm, ctx), 2) * 2
        total = term if total is None else total + term
    return total


def directional_second_derivatives(f, x, ctx: OperatorContext) -> list[complex]:
    """Per-direction second derivatives (the summands of the Laplacian)."""
    X = _as_matrix(x)
    out = []
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=2)
        out.append(complex(_coeff(evaluate(f, jm), 2) * 2))
    return out


def fd_laplacian(f, x, ctx: OperatorContext, step: float = 1e-4) -> complex:
    """Central-difference Laplacian, an oracle independent of jet arithmetic."""
    X = np.asarray(_as_matrix(x), dtype=float)
    center = 2.0 * complex(evaluate(f, X))
    total = 0j
    for b in ctx.basis:
        fwd = complex(evaluate(f, X @ expm(step * b.matrix)))
        bwd = complex(evaluate(f, X @ expm(-step * b.matrix)))
        total += (fwd + bwd - center) / step**2
    return total


# -- batch identity residuals ---------------------------------------------------


def _coefficient_planes(jm, index: int) -> np.ndarray:
    N = len(jm)
    return np.array(
        [[jm[r][c].coefficient(index) for c in range(N)] for r in range(N)],
        dtype=complex,
    )


def coordinate_identity_residuals(x, ctx: OperatorContext) -> dict[str, float]:
    """Residual maxima of the closed forms for Laplacian and gradient pairing
    of the matrix-entry coordinates on SO(N).

    Expected: laplacian(x_{ja}) = -(N-1)/2 * x_{ja} and
    pairing(x_{ja}, x_{kb}) = -(x_{jb} x_{ka} - delta_{jk} delta_{ab}) / 2.
    """
    X = np.asarray(_as_matrix(x), dtype=float)
    N = X.shape[0]
    tau = np.zeros((N, N), dtype=complex)
    firsts = []
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=2)
        tau += 2.0 * _coefficient_planes(jm, 2)
        firsts.append(_coefficient_planes(jm, 1))
    D = np.stack(firsts)
    kappa = np.einsum("zja,zkb->jakb", D, D)

    tau_expected = -(N - 1) / 2.0 * X
    eye = np.eye(N)
    kappa_expected = -0.5 * (
        np.einsum("jb,ka->jakb", X, X) - np.einsum("jk,ab->jakb", eye, eye)
    )
    r_tau = np.max(np.abs(tau - tau_expected) / (1.0 + np.abs(tau_expected)))
    r_kappa = np.max(np.abs(kappa - kappa_expected) / (1.0 + np.abs(kappa_expected)))
    return {"tau_coordinate": float(r_tau), "kappa_coordinate": float(r_kappa)}


def projector_identity_residuals(x, m: int, ctx: OperatorContext) -> dict[str, float]:
    """Residual maxima of the closed forms for the projector quadratics.

    With S = x P x^T (P the first-m-columns projector) the expected values
    are laplacian(S_{ja}) = -N S_{ja} + m delta_{ja} and

      pairing(S_{ja}, S_{kb}) = -(S_{jb} S_{ka} + S_{jk} S_{ab})
          + (d_{jk} S_{ab} + d_{ab} S_{jk} + d_{jb} S_{ka} + d_{ka} S_{jb}) / 2.
    """
    X = np.asarray(_as_matrix(x), dtype=float)
    N = X.shape[0]
    S = X[:, :m] @ X[:, :m].T
    tau = np.zeros((N, N), dtype=complex)
    firsts = []
    for b in ctx.basis:
        jm = curve_jets(X, b.matrix, order=2)
        window = [[jm[r][c] for c in range(m)] for r in range(N)]
        planes0 = np.empty((N, N), dtype=complex)
        planes1 = np.empty((N, N), dtype=complex)
        planes2 = np.empty((N, N), dtype=complex)
        for j in range(N):
            for a in range(j, N):
                acc = window[j][0] * window[a][0]
                for t in range(1, m):
                    acc = acc + window[j][t] * window[a][t]
                planes0[j, a] = planes0[a, j] = acc.coefficient(0)
                planes1[j, a] = planes1[a, j] = acc.coefficient(1)
                planes2[j, a] = planes2[a, j] = acc.coefficient(2)
        tau += 2.0 * planes2
        firsts.append(planes1)
    D = np.stack(firsts)
    kappa = np.einsum("zja,zkb->jakb", D, D)

    eye = np.eye(N)
    tau_expected = -N * S + m * eye
    kappa_expected = (
        -(np.einsum("jb,ka->jakb", S, S) + np.einsum("jk,ab->jakb", S, S))
        + 0.5
        * (
            np.einsum("jk,ab->jakb", eye, S)
            + np.einsum("ab,jk->jakb", eye, S)
            + np.einsum("jb,ka->jakb", eye, S)
            + np.einsum("ka,jb->jakb", eye, S)
        )
    )
    r_tau = np.max(np.abs(tau - tau_expected) / (1.0 + np.abs(tau_expected)))
    r_kappa = np.max(np.abs(kappa - kappa_expected) / (1.0 + np.abs(kappa_expected)))
    return {"tau_projector": float(r_tau), "kappa_projector": float(r_kappa)}


# -- checkers --------------------------------------------------------------------


def check_eigenfunction(
    f, lam, mu, points: Sequence, ctx: OperatorContext, tol: float | None = None
) -> VerificationReport:
    """Verify laplacian(f) = lam f and pairing(f, f) = mu f^2 at each point.

    Residuals are normalized by 1 + |f| + |f|^2 to mix absolute and relative
    control across the scales the two identities live on.
    """
    tol = ctx.default_tol if tol is None else tol
    lam, mu = complex(lam), complex(mu)
    records: list[CheckRecord] = []
    for i, pt in enumerate(points):
        v = complex(evaluate(f, _as_matrix(pt)))
        t = complex(laplacian(f, pt, ctx))
        k = complex(gradient_product(f, f, pt, ctx))
        denom = 1.0 + abs(v) + abs(v) ** 2
        records.append(upper_check("tau_eigen", i, abs(t - lam * v) / denom, tol))
        records.append(upper_check("kappa_eigen", i, abs(k - mu * v * v) / denom, tol))
    return VerificationReport(
        "check_eigenfunction",
        {"lam": repr(lam), "mu": repr(mu), "points": len(points), "tol": tol},
        records,
    )


def check_eigenfamily(
    fs: Sequence, lam, mu, points: Sequence, ctx: OperatorContext, tol: float | None = None
) -> VerificationReport:
    """Eigen relations for each member plus pairing(f_i, f_j) = mu f_i f_j
    for every unordered pair."""
    if not fs:
        raise ValueError("need at least one family member")
    tol = ctx.default_tol if tol is None else tol
    lam, mu = complex(lam), complex(mu)
    records: list[CheckRecord] = []
    for idx, f in enumerate(fs):
        member = check_eigenfunction(f, lam, mu, points, ctx, tol)
        for rec in member.checks:
            records.append(
                CheckRecord(
                    f"member{idx}_{rec.check}",
                    rec.point,
                    rec.residual,
                    rec.threshold,
                    rec.passed,
                )
            )
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            for pidx, pt in enumerate(points):
                X = _as_matrix(pt)
                vi = complex(evaluate(fs[i], X))
                vj = complex(evaluate(fs[j], X))
                kij = complex(gradient_product(fs[i], fs[j], pt, ctx))
                denom = 1.0 + abs(vi) + abs(vj) + abs(vi * vj)
                records.append(
                    upper_check(
                        f"kappa_pair_{i}_{j}", pidx, abs(kij - mu * vi * vj) / denom, tol
                    )
                )
    return VerificationReport(
        "check_eigenfamily",
        {"lam": repr(lam), "mu": repr(mu), "members": len(fs), "points": len(points), "tol": tol},
        records,
    )


def check_product_rule(
    f, g, points: Sequence, ctx: OperatorContext, tol: float = 1e-10
) -> VerificationReport:
    """Verify laplacian(f g) = laplacian(f) g + 2 pairing(f, g) + f laplacian(g)."""
    from .expressions import Product

    fg = Product((f, g))
    records: list[CheckRecord] = []
    for i, pt in enumerate(points):
        X = _as_matrix(pt)
        vf = complex(evaluate(f, X))
        vg = complex(evaluate(g, X))
        tf = complex(laplacian(f, pt, ctx))
        tg = complex(laplacian(g, pt, ctx))
        kfg = complex(gradient_product(f, g, pt, ctx))
        tfg = complex(laplacian(fg, pt, ctx))
        rhs = tf * vg + 2.0 * kfg + vf * tg
        denom = 1.0 + abs(tfg) + abs(tf * vg) + abs(kfg) + abs(vf * tg)
        records.append(upper_check("product_rule", i, abs(tfg - rhs) / denom, tol))
    return VerificationReport(
        "check_product_rule", {"points": len(points), "tol": tol}, records
    )


def check_invariance(
    f,
    subgroup_sampler: Callable[[int], GroupPoint],
    points: Sequence,
    trials: int = 5,
    tol: float = 1e-10,
    seed: int = 0,
) -> VerificationReport:
    """Verify f(x k) = f(x) for sampled subgroup elements k.

    Records, per point, the worst normalized change over the trials.
    """
    ks = [subgroup_sampler(seed + 10_000 + j).entries for j in range(trials)]
    records: list[CheckRecord] = []
    for i, pt in enumerate(points):
        X = _as_matrix(pt)
        v = complex(evaluate(f, X))
        worst = 0.0
        for k in ks:
            moved = complex(evaluate(f, X @ k))
            worst = max(worst, abs(moved - v) / (1.0 + abs(v)))
        records.append(upper_check("invariance", i, worst, tol))
    return VerificationReport(
        "check_invariance", {"points": len(points), "trials": trials, "tol": tol}, records
    )


def non_descent_witness(
    f,
    merged_sampler: Callable[[int], GroupPoint],
    points: Sequence,
    trials: int = 20,
    floor: float = 1e-6,
    seed: int = 0,
) -> VerificationReport:
    """Find a merged-subgroup element whose right action visibly moves f.

    Passing means at least one sampled action changed the value by more
    than the floor (a lower-bound check), witnessing that f does not
    descend through the merged quotient.
    """
    records: list[CheckRecord] = []
    best = 0.0
    for i, pt in enumerate(points):
        X = _as_matrix(pt)
        v = complex(evaluate(f, X))
        for j in range(trials):
            k = merged_sampler(seed + 20_000 + i * trials + j).entries
            moved = complex(evaluate(f, X @ k))
            best = max(best, abs(moved - v) / (1.0 + abs(v)))
    records.append(lower_check("non_descent_witness", 0, best, floor))
    return VerificationReport(
        "non_descent_witness",
        {"points": len(points), "trials": trials, "floor": floor},
        records,
    )


class SamplingExhausted(RuntimeError):
    """Enough well-conditioned sample points could not be found."""


def conditioned_sample(
    funcs: Sequence,
    sampler: Callable[[int], GroupPoint],
    count: int,
    seed: int,
    *,
    floor_ratio: float = 0.25,
    abs_floor: float = 1e-6,
    abs_ceil: float = 1e6,
    cut_angle: float = 1e-2,
) -> tuple[list[GroupPoint], int]:
    """Draw points where every listed function is numerically trustworthy.

    A point qualifies when each function value keeps clear of the branch cut
    and its magnitude reaches ``floor_ratio`` times the batch median scale.
    Iterated-Laplacian checks amplify roundoff like a power of the
    derivative-to-value ratio, so the small-magnitude tail is mathematically
    fine but numerically uninformative; rejecting it keeps cancellation noise
    well below the thresholds.  Deterministic for a fixed seed.  Returns the
    accepted points and the total number of draws.
    """
    if count < 1:
        raise ValueError("need count >= 1")

    def smallest_safe_value(point):
        worst = None
        for f in funcs:
            v = complex(scalar_value(evaluate(f, point.entries)))
            mag = abs(v)
            if not (abs_floor <= mag <= abs_ceil):
                return None
            if np.pi - abs(np.angle(v)) < cut_angle:
                return None
            worst = mag if worst is None else min(worst, mag)
        return worst

    batch_size = max(2 * count, 20)
    limit = 60 * count + batch_size
    candidates: list[tuple[GroupPoint, float]] = []
    draws = 0
    while draws < batch_size:
        pt = sampler(seed + draws)
        draws += 1
        mag = smallest_safe_value(pt)
        if mag is not None:
            candidates.append((pt, mag))
    if not candidates:
        raise SamplingExhausted("every candidate point violated the branch window")
    scale = float(np.median([m for _, m in candidates]))
    floor = floor_ratio * scale

    accepted = [pt for pt, mag in candidates if mag >= floor]
    while len(accepted) < count and draws < limit:
        pt = sampler(seed + draws)
        draws += 1
        mag = smallest_safe_value(pt)
        if mag is not None and mag >= floor:
            accepted.append(pt)
    if len(accepted) < count:
        raise SamplingExhausted(
            f"only {len(accepted)}/{count} conditioned samples after {draws} draws"
        )
    return accepted[:count], draws


def eigen_residuals(f, lam, mu, x, ctx: OperatorContext) -> tuple[float, float]:
    """Normalized single-point eigen residuals (laplacian, pairing)."""
    X = _as_matrix(x)
    v = complex(evaluate(f, X))
    t = complex(laplacian(f, x, ctx))
    k = complex(gradient_product(f, f, x, ctx))
    denom = 1.0 + abs(v) + abs(v) ** 2
    return abs(t - complex(lam) * v) / denom, abs(k - complex(mu) * v * v) / denom


def p_harmonic_residuals(f, p: int, x, ctx: OperatorContext) -> tuple[float, float]:
    """Normalized order-p residual and order-(p-1) witness at one point.

    Returns (|L^p f| / (1 + |f| + |L^(p-1) f|), |L^(p-1) f| / (1 + |f|)).
    """
    v = scalar_value(evaluate(f, _as_matrix(x)))
    top = complex(iterated_laplacian(f, p, x, ctx))
    prev = complex(iterated_laplacian(f, p - 1, x, ctx)) if p >= 1 else v
    residual = abs(top) / (1.0 + abs(v) + abs(prev))
    witness = abs(prev) / (1.0 + abs(v))
    return residual, witness
