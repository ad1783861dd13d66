"""Command-line front end.

Every subcommand writes exactly one JSON document to stdout; diagnostics and
errors go to stderr.  Exit status is 0 on success, 1 for unreadable or
invalid input, 2 for numerical or precondition failures.

Matrix files are JSON objects ``{"n": 2, "real": [[...]], "imag": [[...]]}``
(``imag`` optional).  Datasets are headerless CSV, one sample per row.
Vectors (means, evaluation points) are JSON arrays or a single CSV row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import degenerate_gaussian as dg
from . import pseudo_calculus as pc
from .exceptions import DimensionMismatch, EmptyDataset, InputError, PseudoDetError
from .matrix_core import (
    DEFAULT_MINOR_CAP,
    MINOR_CAP_ENV,
    HermitianMatrix,
    analyse,
    build_hermitian,
)


def _open_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_matrix(path: str, policy: str = "reject") -> HermitianMatrix:
    doc = json.loads(_open_text(path))
    if not isinstance(doc, dict) or "real" not in doc:
        raise InputError(f"{path}: expected an object with a 'real' array")
    real = np.asarray(doc["real"], dtype=float)
    M = real
    if doc.get("imag") is not None:
        imag = np.asarray(doc["imag"], dtype=float)
        if imag.shape != real.shape:
            raise InputError(f"{path}: 'imag' has shape {imag.shape}, 'real' {real.shape}")
        M = real + 1j * imag
    n = doc.get("n", real.shape[0] if real.ndim else 0)
    if real.ndim != 2 or real.shape != (n, n):
        raise InputError(f"{path}: declared n={n} but 'real' has shape {real.shape}")
    return build_hermitian(M, policy)


def read_dataset(path: str) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(_open_text(path))), 1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if len(rows[-1]) != len(rows[0]):
            raise InputError(
                f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}"
            )
    if not rows:
        raise EmptyDataset(f"{path}: dataset is empty")
    return np.array(rows, dtype=float)


def read_vector(path: str) -> np.ndarray:
    text = _open_text(path).strip()
    if text.startswith("[") or text.startswith("{"):
        doc = json.loads(text)
        if isinstance(doc, dict):
            doc = doc.get("values")
        v = np.asarray(doc, dtype=float)
        if v.ndim != 1:
            raise InputError(f"{path}: expected a flat array")
        return v
    X = read_dataset(path)
    if X.shape[0] != 1:
        raise InputError(f"{path}: expected a single row, got {X.shape[0]}")
    return X[0]


def format_float(x: float) -> str:
    """Shortest round-trip repr, with integral values written without ``.0``."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _jsonable(x):
    if isinstance(x, HermitianMatrix):
        x = x.data
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            if x.ndim == 2:
                return {"n": x.shape[0], "real": _jsonable(x.real), "imag": _jsonable(x.imag)}
            return {"real": _jsonable(x.real), "imag": _jsonable(x.imag)}
        return [_jsonable(v) for v in x.tolist()] if x.ndim else _jsonable(x.item())
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _matrix_out(M: np.ndarray):
    if np.iscomplexobj(M):
        return _jsonable(M)
    return {"n": M.shape[0], "real": _jsonable(M)}


def _envelope(args, result: dict, diagnostics: dict | None = None) -> dict:
    inputs = {
        k: v for k, v in vars(args).items() if k not in ("func", "json_indent") and v is not None
    }
    return {
        "command": args.command,
        "inputs": inputs,
        "result": result,
        "diagnostics": diagnostics or {},
    }


def _penrose(A: np.ndarray, Ap: np.ndarray) -> dict:
    AAp, ApA = A @ Ap, Ap @ A
    return {
        "AApA_minus_A": float(np.linalg.norm(AAp @ A - A)),
        "ApAAp_minus_Ap": float(np.linalg.norm(ApA @ Ap - Ap)),
        "AAp_hermitian": float(np.linalg.norm(AAp - AAp.conj().T)),
        "ApA_hermitian": float(np.linalg.norm(ApA - ApA.conj().T)),
    }


def cmd_pdet(args):
    A, _, profile = analyse(read_matrix(args.input, args.policy), args.rel_tol)
    result = {"rank": profile.rank, "method": args.method}
    if args.method == "spectral":
        result["value"] = pc.pdet(A, profile).value
    elif args.method == "minor":
        result["value"] = pc.pdet_minor(A, profile)
    else:
        deltas = list(pc.DEFAULT_DELTAS)
        est = pc.pdet_limit(A, deltas, rank=profile.rank)
        result["value"] = float(est[-1])
        result["estimates"] = [{"delta": d, "value": float(v)} for d, v in zip(deltas, est)]
    return _envelope(args, result, {"rank": profile.rank, "tolerance": profile.tolerance})


def cmd_pinv(args):
    A, _, profile = analyse(read_matrix(args.input, args.policy), args.rel_tol)
    if args.method == "berg":
        Ap = pc.pinv_berg(A, profile)
    else:
        Ap = pc.pinv(A, profile)
    diag = {"rank": profile.rank, "tolerance": profile.tolerance, "penrose": _penrose(A.data, Ap)}
    return _envelope(args, {"pinv": _matrix_out(Ap), "method": args.method}, diag)


def cmd_grad(args):
    A, _, profile = analyse(read_matrix(args.input, args.policy), args.rel_tol)
    b = pc.canonical_gradient(A, profile)
    rep = pc.check_class_equations(A, b.can, rel_tol=args.rel_tol)
    result = {"det": b.det, "pinv": _matrix_out(b.pinv), "can": _matrix_out(b.can)}
    diag = {
        "rank": profile.rank,
        "tolerance": profile.tolerance,
        "class_residual1": rep.residual1,
        "class_residual2": rep.residual2,
    }
    return _envelope(args, result, diag)


def cmd_check(args):
    A = read_matrix(args.input, args.policy)
    B = read_matrix(args.direction, args.policy)
    if A.n != B.n:
        raise DimensionMismatch(f"A is {A.n} x {A.n}, direction is {B.n} x {B.n}")
    analytic = pc.directional_derivative(A, B, args.rel_tol)
    probe = pc.DirectionalProbe(B, args.tau)
    fd = pc.fd_directional_derivative(probe, A, forward=args.forward, rel_tol=args.rel_tol)
    abs_err = abs(analytic - fd)
    result = {
        "analytic": analytic,
        "finite_difference": fd,
        "abs_err": abs_err,
        "rel_err": abs_err / abs(analytic) if analytic else abs_err,
        "kernel_match": True,
    }
    return _envelope(args, result, {"tau": args.tau, "scheme": "forward" if args.forward else "central"})


def cmd_mle(args):
    X = read_dataset(args.data)
    n = X.shape[1]
    if args.mean_zero:
        mu = np.zeros(n)
    elif args.sample_mean:
        mu = X.mean(axis=0)
    else:
        mu = read_vector(args.mean)
    if mu.shape[0] != n:
        raise DimensionMismatch(f"mean has dimension {mu.shape[0]}, data has {n}")
    P = None
    if args.projector:
        P = read_matrix(args.projector, args.policy).data
        if np.iscomplexobj(P):
            raise InputError("projector must be real")
    sigma = dg.mle_covariance(X, mu, P)
    R = dg.residual_matrix(X, mu)
    N = X.shape[0]
    pg = dg.projected_gradient_norm(sigma, R, N, args.rel_tol)
    result = {
        "sigma_hat": _matrix_out(sigma),
        "R": _matrix_out(R),
        "N": N,
        "mode": "kernel_free" if P is None else "fixed_range",
        "projected_gradient_norm": pg,
    }
    _, _, profile = analyse(sigma, args.rel_tol)
    return _envelope(args, result, {"rank": profile.rank, "tolerance": profile.tolerance})


def cmd_density(args):
    cov = read_matrix(args.cov, args.policy)
    mu = read_vector(args.mean)
    x = read_vector(args.x)
    if x.shape[0] != cov.n:
        raise DimensionMismatch(f"x has dimension {x.shape[0]}, covariance is {cov.n} x {cov.n}")
    model = dg.GaussianModel(mu, cov, args.rel_tol)
    ld = dg.log_density(x, model)
    result = {
        "log_density": ld.value,
        "density": math.exp(ld.value),
        "on_support": ld.on_support,
        "rank": model.rank,
    }
    return _envelope(args, result)


def cmd_sample(args):
    cov = read_matrix(args.cov, args.policy)
    mu = read_vector(args.mean)
    model = dg.GaussianModel(mu, cov, args.rel_tol)
    X = dg.sample_degenerate(model, args.count, args.seed)
    text = "".join(",".join(format_float(v) for v in row) + "\n" for row in X)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return _envelope(args, {"count": args.count, "rank": model.rank, "output": args.output or "-"})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--rel-tol",
        type=float,
        default=None,
        help="relative eigenvalue cutoff for numerical rank (default 1e-12 * n)",
    )
    common.add_argument(
        "--symmetrize",
        dest="policy",
        action="store_const",
        const="symmetrize",
        default="reject",
        help="replace input matrices by (M + M*)/2 instead of rejecting non-Hermitian input",
    )
    common.add_argument("--json-indent", type=int, default=None, help="indent JSON output")

    parser = argparse.ArgumentParser(
        prog="pseudodet",
        description="Pseudo determinants, pseudo inverses and degenerate Gaussians.",
        epilog=f"The minor-enumeration cap (default {DEFAULT_MINOR_CAP}) is read from "
        f"${MINOR_CAP_ENV}.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdet", parents=[common], help="pseudo determinant")
    p.add_argument("input")
    p.add_argument("--method", choices=["spectral", "limit", "minor"], default="spectral")
    p.set_defaults(func=cmd_pdet)

    p = sub.add_parser("pinv", parents=[common], help="Moore-Penrose pseudo inverse")
    p.add_argument("input")
    p.add_argument("--method", choices=["spectral", "berg"], default="spectral")
    p.set_defaults(func=cmd_pinv)

    p = sub.add_parser("grad", parents=[common], help="canonical gradient Det(A) A^+")
    p.add_argument("input")
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("check", parents=[common], help="analytic vs finite-difference derivative")
    p.add_argument("input")
    p.add_argument("direction")
    p.add_argument("--tau", type=float, default=1e-5)
    p.add_argument("--forward", action="store_true", help="forward instead of central differences")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mle", parents=[common], help="covariance MLE for known mean")
    p.add_argument("data", help="CSV dataset, '-' for stdin")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--mean")
    g.add_argument("--mean-zero", action="store_true")
    g.add_argument("--sample-mean", action="store_true", help="plug in the sample mean")
    p.add_argument("--projector", help="matrix file with a fixed range projector")
    p.set_defaults(func=cmd_mle)

    p = sub.add_parser("density", parents=[common], help="degenerate Gaussian density")
    p.add_argument("x")
    p.add_argument("--mean", required=True)
    p.add_argument("--cov", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser(
        "sample",
        parents=[common],
        help="draw samples as CSV (stdout, envelope on stderr; or --output FILE)",
    )
    p.add_argument("--cov", required=True)
    p.add_argument("--mean", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        envelope = args.func(args)
    except PseudoDetError as exc:
        print(f"pseudodet {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"pseudodet {args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"pseudodet {args.command}: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(_jsonable(envelope), indent=args.json_indent, allow_nan=False)
    stream = sys.stderr if args.command == "sample" and not args.output else sys.stdout
    print(text, file=stream)
    return 0


if __name__ == "__main__":
    sys.exit(main())
