"""Command-line entry point; every subcommand reads a JSON job and writes a JSON report."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from .chains import bases, bilinear_matrix_h, intersection_matrix_h
from .cocycles import frame, frame_pairing_matrix
from .connection import (KINDS, check_integrability, eigenvalue_residual, pfaffian_system,
                         residue_matrices)
from .monodromy import (all_circuit_matrices, circuit_matrix, classify_representation,
                        continuation_residuals, parse_pairs)
from .numerics import QuadratureError, euler_integral, fd_series, verify_tpr
from .parameters import (DomainError, InputError, PointConfiguration, aligned_configuration,
                         classify, configuration, from_abc, from_alpha, parse_scalar,
                         widest_spacing)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3

DET_TOL = 1e-10
DEFAULT_TOL = {"tpr": 1e-6, "euler": 1e-8, "monodromy": 1e-6, "integrability": 1e-10}


def encode(obj: Any) -> Any:
    """JSON-safe form: complex as [re, im], rationals as 'p/q', arrays as nested lists."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _params(job: dict):
    if "alpha" in job:
        return from_alpha(job["alpha"])
    if {"a", "b", "c"} <= job.keys():
        return from_abc(job["a"], job["b"], job["c"])
    raise InputError("job needs 'alpha' or all of 'a', 'b', 'c'")


def _point(job: dict, cls, at: str | None) -> PointConfiguration:
    if at:
        try:
            vals = [parse_scalar(float(v)) for v in at.split(",")]
        except ValueError as exc:
            raise InputError(f"bad --at value {at!r}") from exc
        x = configuration(vals)
    elif "x" in job:
        x = configuration(job["x"])
    else:
        spacing = job.get("spacing")
        if spacing == "widest":
            spacing = widest_spacing(cls)
        return aligned_configuration(cls, spacing)
    if x.m != cls.m:
        raise InputError(f"expected {cls.m} points, got {x.m}")
    return x


def _classification_doc(cls) -> dict:
    return {"m": cls.m, "iZc": cls.iZc, "iN0": cls.iN0, "iNeg": cls.iNeg, "D": cls.iN0,
            "r": cls.r, "s": cls.s, "integral": cls.integral, "case": cls.case,
            "ordered": cls.ordered, "lambda": cls.lam, "warnings": cls.warnings}


def cmd_classify(job, args):
    cls = classify(_params(job))
    rep = classify_representation(cls)
    doc = _classification_doc(cls)
    doc["representation"] = {"reducible": rep.reducible, "trivial": rep.trivial,
                             "witnesses": [{"kind": w.kind, "site": w.site, "basis": w.basis,
                                            "defect": w.defect} for w in rep.witnesses]}
    return doc, None


def cmd_basis(job, args):
    cls = classify(_params(job))
    b = bases(cls)
    doc = {"gamma": [g.to_json() for g in b.gamma], "delta": [d.to_json() for d in b.delta]}
    try:
        x = _point(job, cls, args.at)
    except DomainError:
        return doc, None
    fr = frame(cls, x)
    doc.update(x=x.x, phi=[f.to_json() for f in fr.phi], psi=[f.to_json() for f in fr.psi])
    return doc, None


def cmd_ih(job, args):
    cls = classify(_params(job))
    H = intersection_matrix_h(cls)
    res = float(np.max(np.abs(H - bilinear_matrix_h(cls))))
    return {"H": H, "bilinear_residual": res, "rank": int(np.linalg.matrix_rank(H))}, res <= args.tol_or(1e-12)


def cmd_ic(job, args):
    cls = classify(_params(job))
    x = _point(job, cls, args.at)
    C = frame_pairing_matrix(cls, x)
    return {"x": x.x, "C": C, "rank": int(np.linalg.matrix_rank(C))}, None


def cmd_pfaffian(job, args):
    pv = _params(job)
    cls = classify(pv)
    system = pfaffian_system(pv, args.kind)
    doc = {"kind": args.kind, "P": system.P,
           "residues": {f"{i},{j}": M for (i, j), M in residue_matrices(pv).R.items()}}
    if args.at or "x" in job:
        x = _point(job, cls, args.at)
        doc["x"] = x.x
        doc["connection"] = system.connection_at(x)
    return doc, None


def cmd_monodromy(job, args):
    cls = classify(_params(job))
    H = intersection_matrix_h(cls)
    pairs = parse_pairs(args.pairs, cls.m)
    mats = all_circuit_matrices(cls, H) if args.pairs == "all" else [circuit_matrix(p, q, cls, H) for p, q in pairs]
    out = [{"p": c.p, "q": c.q, "M": c.M, "y": c.y, "z": c.z, "det": c.det, "degenerate": c.degenerate}
           for c in mats]
    return out, None


def cmd_eval(job, args):
    pv = _params(job)
    a, b, c = pv.abc()
    if "x" not in job:
        raise InputError("eval needs 'x'")
    x = [complex(parse_scalar(v)) for v in job["x"]]
    if len(x) != pv.m:
        raise InputError(f"expected {pv.m} points, got {len(x)}")
    if any(abs(v) >= 1 for v in x):
        raise DomainError("the series needs |x_i| < 1")
    doc = {"series": fd_series(a, b, c, x)}
    if 0 < a.real < c.real:
        doc["integral"] = euler_integral(a, b, c, x)
        doc["residual"] = abs(doc["integral"] - doc["series"])
    return doc, None


def _verify_tpr(job, args, tol):
    cls = classify(_params(job))
    x = _point(job, cls, args.at)
    rep = verify_tpr(cls, x)
    return {"residual": rep.residual, "scaled_residual": rep.scaled_residual, "H": rep.H, "C": rep.C, "Phi": rep.periods.Phi,
            "Psi": rep.periods.Psi, "x": x.x}, rep.residual, True


def _verify_euler(job, args, tol):
    pv = _params(job)
    a, b, c = pv.abc()
    if "x" not in job:
        raise InputError("verify euler needs 'x'")
    x = [complex(parse_scalar(v)) for v in job["x"]]
    s, i = fd_series(a, b, c, x), euler_integral(a, b, c, x)
    return {"series": s, "integral": i}, abs(s - i), True


def _verify_monodromy(job, args, tol):
    cls = classify(_params(job))
    pairs = parse_pairs(args.pairs, cls.m)
    checks = continuation_residuals(cls, pairs=pairs)
    H = intersection_matrix_h(cls)
    lam = cls.lam
    dets = [abs(circuit_matrix(p, q, cls, H).det - lam[p] * lam[q]) for p, q in pairs]
    rows = [{"p": c.p, "q": c.q, "ode_residual": c.residual, "det_residual": d}
            for c, d in zip(checks, dets)]
    det_ok = max(dets, default=0.0) <= DET_TOL
    return {"generators": rows, "det_tolerance": DET_TOL, "det_pass": det_ok}, \
        max((c.residual for c in checks), default=0.0), det_ok


def _verify_integrability(job, args, tol):
    pv = _params(job)
    system = pfaffian_system(pv, args.kind)
    flat = check_integrability(system, seed=args.seed)
    return {"integrability": flat, "eigenvalues": eigenvalue_residual(system.residues)}, \
        max(flat, eigenvalue_residual(system.residues)), True


VERIFIERS = {"tpr": _verify_tpr, "euler": _verify_euler, "monodromy": _verify_monodromy,
             "integrability": _verify_integrability}


def cmd_verify(job, args):
    tol = args.tol if args.tol is not None else DEFAULT_TOL[args.check]
    doc, residual, extra_ok = VERIFIERS[args.check](job, args, tol)
    doc.update(residual=residual, tolerance=tol, check=args.check)
    return doc, residual <= tol and extra_ok


COMMANDS = {"classify": cmd_classify, "basis": cmd_basis, "ih": cmd_ih, "ic": cmd_ic,
            "pfaffian": cmd_pfaffian, "monodromy": cmd_monodromy, "verify": cmd_verify,
            "eval": cmd_eval}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", default="-", help="JSON job file, '-' for stdin")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="tolerance for pass/fail")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--at", help="comma-separated x_1,...,x_m")
    common.add_argument("--kind", choices=KINDS, default="xi")
    common.add_argument("--pairs", default="all", help="'all' or 'p,q[;p,q...]'")

    parser = argparse.ArgumentParser(prog="lauricella", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("check", choices=sorted(VERIFIERS))
    return parser


def _read_job(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    try:
        job = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(job, dict):
        raise InputError("job must be a JSON object")
    return job


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(encode(doc), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    args.tol_or = lambda default: args.tol if args.tol is not None else default
    base = {"command": args.command, "version": __version__, "seed": args.seed}
    job: dict = {}
    try:
        job = _read_job(args.input)
        base["input"] = job
        result, passed = COMMANDS[args.command](job, args)
    except (InputError, TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, DomainError):
            _emit({**base, "error": {"type": "domain", "message": str(exc)}}, args.output)
            return EXIT_DOMAIN
        _emit({**base, "error": {"type": "input", "message": str(exc)}}, args.output)
        return EXIT_INPUT
    except QuadratureError as exc:
        _emit({**base, "error": {"type": "numerics", "message": str(exc)}}, args.output)
        return EXIT_DOMAIN
    doc = {**base, "result": result}
    if passed is not None:
        doc["pass"] = bool(passed)
    _emit(doc, args.output)
    return EXIT_OK if passed in (None, True) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
