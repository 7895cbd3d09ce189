"""Command-line verification harness.

Subcommands build the functions under study, run the symbolic and numerical
checks, and emit one JSON report per run.  Runs are deterministic: the same
configuration (seed included) reproduces the same report byte for byte,
apart from the wall-clock field.

Exit codes: 0 all checks passed, 2 a verification check failed, 3 a usage
or configuration error, 4 a numerical-domain failure (sampling near the
branch cut could not be avoided).  The environment variable
GH_VERIFY_TOL_SCALE multiplies every upper-bound threshold, for CI on
heterogeneous hardware.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import expressions as ex
from . import operators as ops
from . import symcalc as sym
from .group import minkowski_form, sample_block_diagonal, sample_so, sample_so_mn
from .jets import BranchCutError
from .reports import (
    REPORT_SCHEMA,
    VerificationReport,
    lower_check,
    upper_check,
)

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_USAGE = 3
EXIT_DOMAIN = 4

PROPERNESS_FLOOR = 1e-3

DEFAULT_TOLS = {
    "calibrate": 1e-9,
    "projector": 1e-9,
    "eigen": 1e-8,
    "matrix": 1e-10,
    "invariance": 1e-10,
}


class UsageError(ValueError):
    """Configuration rejected before any checks ran."""


DomainExhausted = ops.SamplingExhausted


@dataclass
class RunConfig:
    """Echoable configuration of one verification run."""

    command: str
    m: int = 2
    n: int = 2
    blocks: tuple[int, ...] | None = None
    p: int = 2
    seed: int = 7
    samples: int = 20
    radius: float = 0.75
    tol: float | None = None
    tol_scale: float = 1.0
    w: str | None = None
    a_file: str | None = None
    out: str | None = None
    csv: str | None = None
    basis_scale: float = 1.0

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "m": self.m,
            "n": self.n,
            "blocks": list(self.blocks) if self.blocks else None,
            "p": self.p,
            "seed": self.seed,
            "samples": self.samples,
            "radius": self.radius,
            "tol": self.tol,
            "tol_scale": self.tol_scale,
            "w": self.w,
            "a_file": self.a_file,
            "basis_scale": self.basis_scale,
        }


def _validate_common(config: RunConfig) -> None:
    if config.m < 1 or config.n < 1:
        raise UsageError("need m >= 1 and n >= 1")
    if config.p < 1:
        raise UsageError("need p >= 1")
    if config.samples < 1:
        raise UsageError("need at least one sample")
    if config.blocks is not None and any(b < 1 for b in config.blocks):
        raise UsageError("block sizes must be positive")


def _threshold(config: RunConfig, default: float) -> float:
    base = config.tol if config.tol is not None else default
    return base * config.tol_scale


def _tau_p_tol(config: RunConfig) -> float:
    # 1e-7 at p = 2, one decade looser per extra iteration level.
    default = 1e-7 * 10.0 ** max(config.p - 2, 0)
    return _threshold(config, default)


def _coefficient_matrix(config: RunConfig) -> ex.EigenMatrix:
    N = config.m + config.n
    if config.a_file:
        mat = ex.load_matrix(config.a_file)
        if mat.shape != (N, N):
            raise UsageError(f"matrix file has shape {mat.shape}, expected {(N, N)}")
        return ex.EigenMatrix(mat, (config.m, config.n))
    if config.w:
        w = ex.parse_vector(config.w)
    else:
        w = np.arange(1, N, dtype=float)
    if w.size != N - 1:
        raise UsageError(f"w must have length {N - 1}, got {w.size}")
    return ex.rank_one_from_vector(w, (config.m, config.n))


def _sample_conditioned(funcs, sampler, config: RunConfig, notes: list[str]):
    """Draw sample points on which the listed functions are trustworthy.

    Delegates to the scale-relative conditioning filter; notes record how
    many raw draws the accepted batch cost.
    """
    points, draws = ops.conditioned_sample(funcs, sampler, config.samples, config.seed)
    if draws > config.samples:
        notes.append(
            f"drew {draws} candidate points for {config.samples} conditioned samples"
        )
    return points


# -- commands --------------------------------------------------------------------


def cmd_calibrate(config: RunConfig) -> VerificationReport:
    """Closed-form coordinate identities on SO(m+n): the normalization gate."""
    _validate_common(config)
    N = config.m + config.n
    if N < 2:
        raise UsageError("need m + n >= 2")
    tol = _threshold(config, DEFAULT_TOLS["calibrate"])
    ctx = ops.full_context(N, scale=config.basis_scale)
    records = []
    for i in range(config.samples):
        point = sample_so(N, config.seed + i)
        res = ops.coordinate_identity_residuals(point, ctx)
        records.append(upper_check("tau_coordinate", i, res["tau_coordinate"], tol))
        records.append(upper_check("kappa_coordinate", i, res["kappa_coordinate"], tol))
    notes = []
    if config.basis_scale != 1.0:
        notes.append(f"basis deliberately rescaled by {config.basis_scale} (test hook)")
    return VerificationReport("calibrate", config.as_dict(), records, notes)


def cmd_grassmann(config: RunConfig) -> VerificationReport:
    """Structure validation, projector identities, eigen relations, invariance."""
    _validate_common(config)
    m, n = config.m, config.n
    N = m + n
    A = _coefficient_matrix(config)
    notes = []

    matrix_tol = _threshold(config, DEFAULT_TOLS["matrix"])
    validation = ex.validate_eigen_matrix(A, matrix_tol)
    records = [
        upper_check("matrix_symmetry", "A", validation.symmetry, matrix_tol),
        upper_check("matrix_trace", "A", validation.trace, matrix_tol),
        upper_check("matrix_square", "A", validation.square, matrix_tol),
        upper_check("matrix_rank", "A", validation.rank_ratio, matrix_tol),
    ]
    if not validation.passed:
        notes.append("coefficient matrix fails the structure conditions")

    proj_tol = _threshold(config, DEFAULT_TOLS["projector"])
    eigen_tol = _threshold(config, DEFAULT_TOLS["eigen"])
    inv_tol = _threshold(config, DEFAULT_TOLS["invariance"])
    full_ctx = ops.full_context(N)
    quot_ctx = ops.quotient_context(m, n)
    phi = ex.projector_form(A)
    points = [sample_so(N, config.seed + i) for i in range(config.samples)]

    values = [abs(complex(ex.evaluate(phi, pt.entries))) for pt in points]
    records.append(lower_check("function_scale", "all", max(values), 1e-12))
    if max(values) < 1e-12:
        notes.append("function is numerically zero on every sample (degenerate input)")

    for i, pt in enumerate(points):
        res = ops.projector_identity_residuals(pt, m, full_ctx)
        records.append(upper_check("tau_projector", i, res["tau_projector"], proj_tol))
        records.append(upper_check("kappa_projector", i, res["kappa_projector"], proj_tol))

    eigen = ops.check_eigenfunction(phi, -N, -2, points, quot_ctx, eigen_tol)
    records.extend(eigen.checks)

    invariance = ops.check_invariance(
        phi,
        lambda s: sample_block_diagonal((m, n), s),
        points,
        trials=5,
        tol=inv_tol,
        seed=config.seed,
    )
    records.extend(invariance.checks)
    if m == 1:
        notes.append(f"m = 1: eigenvalue -(n+1) = {-(n + 1)} (degree-two harmonics)")
    return VerificationReport("grassmann", config.as_dict(), records, notes)


def cmd_pharmonic(config: RunConfig) -> VerificationReport:
    """Exact p-harmonicity verdicts plus numerical iterated-Laplacian residuals."""
    _validate_common(config)
    m, n = config.m, config.n
    N = m + n
    p = config.p
    if p > ops.DEPTH_CAP:
        raise UsageError(f"p = {p} exceeds the iteration depth cap {ops.DEPTH_CAP}")
    notes = []
    records = []

    params = sym.EigenParams.of(-N, -2)
    if N == 2:
        notes.append("m + n = 2 gives lam = mu: equal-eigenvalue composition in effect")
    for label, c1, c2 in (("c1", 1, 0), ("c2", 0, 1)):
        verdict = sym.verify_p_harmonic(params, p, c1, c2)
        records.append(
            upper_check(f"symbolic_p_harmonic_{label}", 0, 0.0 if verdict.p_harmonic else 1.0, 0.5)
        )
        if label == "c1":
            records.append(
                lower_check("symbolic_proper_c1", 0, 1.0 if verdict.proper else 0.0, 0.5)
            )

    A = _coefficient_matrix(config)
    phi = ex.projector_form(A)
    composed = ex.p_harmonic_expr(phi, -N, -2, p, 1, 1)
    ctx = ops.quotient_context(m, n)
    tau_tol = _tau_p_tol(config)
    floor = PROPERNESS_FLOOR

    points = _sample_conditioned([phi], lambda s: sample_so(N, s), config, notes)
    kept = 0
    for i, pt in enumerate(points):
        try:
            residual, witness = ops.p_harmonic_residuals(composed, p, pt, ctx)
        except BranchCutError:
            notes.append(f"point {i} rejected during iteration (branch cut)")
            continue
        if witness < floor:
            notes.append(f"point {i} resampled: order-(p-1) witness below floor")
            continue
        records.append(upper_check("tau_p_residual", i, residual, tau_tol))
        records.append(lower_check("properness_witness", i, witness, floor))
        kept += 1
    if kept == 0:
        records.append(lower_check("properness_witness", "all", 0.0, floor))
        notes.append("order-(p-1) image vanished on every sample")
    return VerificationReport("pharmonic", config.as_dict(), records, notes)


def cmd_flag(config: RunConfig) -> VerificationReport:
    """Per-block eigen relations, p-harmonicity of the block sum, invariance,
    and (three or more blocks) the non-descent witness."""
    _validate_common(config)
    blocks = config.blocks or (1, 1, 2)
    if len(blocks) < 2:
        raise UsageError("need at least two blocks")
    n = sum(blocks)
    p = config.p
    if p > ops.DEPTH_CAP:
        raise UsageError(f"p = {p} exceeds the iteration depth cap {ops.DEPTH_CAP}")
    spec = ex.default_flag_spec(blocks)
    notes = []
    records = []

    eigen_tol = _threshold(config, DEFAULT_TOLS["eigen"])
    inv_tol = _threshold(config, DEFAULT_TOLS["invariance"])
    tau_tol = _tau_p_tol(config)
    ctx = ops.full_context(n)
    points = [sample_so(n, config.seed + i) for i in range(config.samples)]
    block_forms = [
        ex.projector_form(spec.generators[k], columns=ex.block_columns(blocks, k))
        for k in range(len(blocks))
    ]

    for k, phi_k in enumerate(block_forms):
        fam = ops.check_eigenfamily([phi_k], -n, -2, points, ctx, eigen_tol)
        for rec in fam.checks:
            records.append(
                upper_check(f"block{k}_{rec.check}", rec.point, rec.residual, rec.threshold)
            )

    total = ex.flag_sum_expr(spec, p)
    sampled = _sample_conditioned(block_forms, lambda s: sample_so(n, s), config, notes)
    kept = 0
    for i, pt in enumerate(sampled):
        try:
            residual, witness = ops.p_harmonic_residuals(total, p, pt, ctx)
        except BranchCutError:
            notes.append(f"point {i} rejected during iteration (branch cut)")
            continue
        if witness < PROPERNESS_FLOOR:
            notes.append(f"point {i} resampled: order-(p-1) witness below floor")
            continue
        records.append(upper_check("tau_p_residual", i, residual, tau_tol))
        records.append(lower_check("properness_witness", i, witness, PROPERNESS_FLOOR))
        kept += 1
    if kept == 0:
        records.append(lower_check("properness_witness", "all", 0.0, PROPERNESS_FLOOR))
        notes.append("order-(p-1) image vanished on every sample")

    invariance = ops.check_invariance(
        total,
        lambda s: sample_block_diagonal(blocks, s),
        sampled,
        trials=5,
        tol=inv_tol,
        seed=config.seed,
    )
    records.extend(invariance.checks)

    if len(blocks) >= 3:
        merged = (blocks[0] + blocks[1],) + tuple(blocks[2:])
        witness_report = ops.non_descent_witness(
            total,
            lambda s: sample_block_diagonal(merged, s),
            sampled[:1],
            trials=20,
            floor=1e-6,
            seed=config.seed,
        )
        records.extend(witness_report.checks)
    else:
        notes.append("two blocks: non-descent check skipped (single-window quotient)")
    return VerificationReport("flag", config.as_dict(), records, notes)


def cmd_dual(config: RunConfig) -> VerificationReport:
    """Companion function on the indefinite group: boost-twisted coefficients,
    sign-flipped eigen relations, and p-harmonicity along boost directions."""
    _validate_common(config)
    m, n = config.m, config.n
    N = m + n
    p = config.p
    if p > ops.DEPTH_CAP:
        raise UsageError(f"p = {p} exceeds the iteration depth cap {ops.DEPTH_CAP}")
    notes = []
    records = []

    params = sym.EigenParams.of(N, 2)  # compact eigenvalues negated
    verdict = sym.verify_p_harmonic(params, p, 1, 1)
    records.append(
        upper_check("symbolic_p_harmonic_dual", 0, 0.0 if verdict.p_harmonic else 1.0, 0.5)
    )
    records.append(lower_check("symbolic_proper_dual", 0, 1.0 if verdict.proper else 0.0, 0.5))

    A = _coefficient_matrix(config)
    A_dual = ex.dual_matrix(A, m, n)
    matrix_tol = _threshold(config, DEFAULT_TOLS["matrix"])
    validation = ex.validate_eigen_matrix(A_dual, matrix_tol, form=minkowski_form(m, n))
    records.append(upper_check("matrix_symmetry", "A*", validation.symmetry, matrix_tol))
    records.append(upper_check("matrix_trace", "A*", validation.trace, matrix_tol))
    records.append(upper_check("matrix_square", "A*", validation.square, matrix_tol))
    records.append(upper_check("matrix_rank", "A*", validation.rank_ratio, matrix_tol))

    phi = ex.projector_form(A_dual)
    ctx = ops.dual_context(m, n)
    eigen_tol = _threshold(config, DEFAULT_TOLS["eigen"])
    tau_tol = _tau_p_tol(config)

    points = [sample_so_mn(m, n, config.seed + i, config.radius) for i in range(config.samples)]
    values = [complex(ex.evaluate(phi, pt.entries)) for pt in points]
    spread = float(np.std(np.abs(values)))
    if spread < 1e-12 * (1.0 + float(np.mean(np.abs(values)))):
        notes.append(
            "degenerate samples: function values constant across points "
            "(radius too small to leave the compact subgroup)"
        )

    eigen = ops.check_eigenfunction(phi, N, 2, points, ctx, eigen_tol)
    records.extend(eigen.checks)

    composed = ex.p_harmonic_expr(phi, N, 2, p, 1, 1)
    iter_points = _sample_conditioned(
        [phi], lambda s: sample_so_mn(m, n, s, config.radius), config, notes
    )
    kept = 0
    for i, pt in enumerate(iter_points):
        try:
            residual, witness = ops.p_harmonic_residuals(composed, p, pt, ctx)
        except BranchCutError:
            notes.append(f"point {i} rejected during iteration (branch cut)")
            continue
        if witness < PROPERNESS_FLOOR:
            notes.append(f"point {i} resampled: order-(p-1) witness below floor")
            continue
        records.append(upper_check("tau_p_residual", i, residual, tau_tol))
        records.append(lower_check("properness_witness", i, witness, PROPERNESS_FLOOR))
        kept += 1
    if kept == 0 and config.radius > 0:
        records.append(lower_check("properness_witness", "all", 0.0, PROPERNESS_FLOOR))
        notes.append("order-(p-1) image vanished on every sample")
    return VerificationReport("dual", config.as_dict(), records, notes)


COMMANDS = {
    "calibrate": cmd_calibrate,
    "grassmann": cmd_grassmann,
    "pharmonic": cmd_pharmonic,
    "flag": cmd_flag,
    "dual": cmd_dual,
}


# -- argument handling -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pharmonic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cp = sub.add_parser(name)
        cp.add_argument("--m", type=int, default=2)
        cp.add_argument("--n", type=int, default=2)
        cp.add_argument("--blocks", type=str, default=None, help="comma-separated block sizes")
        cp.add_argument("--p", type=int, default=2)
        cp.add_argument("--seed", type=int, default=7)
        cp.add_argument("--samples", type=int, default=20)
        cp.add_argument("--radius", type=float, default=0.75)
        cp.add_argument("--tol", type=float, default=None, help="override every threshold")
        cp.add_argument("--w", type=str, default=None, help="comma-separated re:im cells")
        cp.add_argument("--A", dest="a_file", type=str, default=None, help="CSV/JSON matrix file")
        cp.add_argument("--out", type=str, default=None, help="write the JSON report here")
        cp.add_argument("--csv", type=str, default=None, help="also dump residuals as CSV")
        cp.add_argument("--basis-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    sub.add_parser("report-schema")
    return parser


def _config_from_args(args) -> RunConfig:
    blocks = None
    if args.blocks:
        try:
            blocks = tuple(int(b) for b in args.blocks.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --blocks value: {exc}") from exc
    scale_text = os.environ.get("GH_VERIFY_TOL_SCALE", "1.0")
    try:
        tol_scale = float(scale_text)
    except ValueError as exc:
        raise UsageError(f"bad GH_VERIFY_TOL_SCALE value {scale_text!r}") from exc
    return RunConfig(
        command=args.command,
        m=args.m,
        n=args.n,
        blocks=blocks,
        p=args.p,
        seed=args.seed,
        samples=args.samples,
        radius=args.radius,
        tol=args.tol,
        tol_scale=tol_scale,
        w=args.w,
        a_file=args.a_file,
        out=args.out,
        csv=args.csv,
        basis_scale=args.basis_scale,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "report-schema":
        print(json.dumps(REPORT_SCHEMA, indent=2, sort_keys=True))
        return EXIT_PASS

    start = time.perf_counter()
    try:
        config = _config_from_args(args)
        report = COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainExhausted as exc:
        print(f"numerical domain failure: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    report.timing_seconds = time.perf_counter() - start

    text = report.to_json()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text + "\n")
    if config.csv:
        with open(config.csv, "w") as fh:
            fh.write(report.to_csv())
    print(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
