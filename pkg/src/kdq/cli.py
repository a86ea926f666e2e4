"""``kdq`` command-line entry point.

Exit status: 0 on success, 1 on a domain error (JSON error object on stderr),
2 on an I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import channels, classicality, kd, measures, mubs, oracle, witness
from .core import ConsistencyError, DensityOperator, InvariantError, KDQError, as_density
from .io import (
    ParseError,
    basis_to_json,
    complex_array_to_json,
    density_to_json,
    dist_to_json,
    dist_values_from_json,
    dumps,
    ket_to_json,
    load_json,
    observable_from_json,
    partition_from_json,
    state_from_json,
    write_text,
)

SCAN_KINDS = ("bound", "nonpositive", "classical-noncommuting", "thm1", "jensen", "amplification", "oracle")


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be > 0, got {text}")
    return x


def _indices(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-zero", type=_positive, default=None, help="zero threshold (default 1e-9)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("-o", "--output", default="-", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="kdq", description="Kirkwood-Dirac quasiprobability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="KD distribution of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--basis", action="append", required=True)
    p.add_argument("--coarse", nargs="+", metavar="PARTITION", help="one partition (last basis) or two (A, F)")

    p = sub.add_parser("check", parents=[common], help="classicality verdict and theorem checks")
    p.add_argument("--state", required=True)
    p.add_argument("--basis", action="append", required=True)
    p.add_argument("--coarse", nargs=2, metavar=("A_PART", "F_PART"))

    p = sub.add_parser("measures", parents=[common], help="nonclassicality measures of a distribution")
    p.add_argument("--dist", required=True)

    p = sub.add_parser("mub", parents=[common], help="emit a family of mutually unbiased bases")
    p.add_argument("--family", choices=("fourier", "pauli", "real4"), required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--out-dir", default=None, help="write one basis_<n>.json per basis instead of a single document")

    p = sub.add_parser("witness", parents=[common], help="closed-form witness eigenpairs")
    p.add_argument("--kind", choices=[k.value for k in witness.WitnessKind], required=True)
    p.add_argument("--a", required=True, help="ket JSON for |a>")
    p.add_argument("--f", required=True, help="ket JSON for |f> (H, G) or basis JSON (R, S)")
    p.add_argument("--block", type=_indices, default=None, help="basis indices spanning F_k (R, S)")
    p.add_argument("--target", type=float, default=None, help="also emit a state with this half-expectation")

    p = sub.add_parser("sweep", parents=[common], help="measures under depolarization")
    p.add_argument("--state", required=True)
    p.add_argument("--basis", action="append", required=True)
    p.add_argument("--p", default="0:1:0.01", help="start:stop:step or comma list")

    p = sub.add_parser("condition", parents=[common], help="condition on a postselected outcome of the last basis")
    p.add_argument("--state", required=True)
    p.add_argument("--basis", action="append", required=True)
    p.add_argument("--select", type=_indices, required=True, help="comma-separated outcome indices")

    p = sub.add_parser("scan", parents=[common], help="seeded falsification scans")
    p.add_argument("--what", choices=SCAN_KINDS, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--inject", action="store_true", help="bound scan: add a saturating instance")
    p.add_argument("--mixed", action="store_true", help="bound scan: sample mixed states")

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild the state from a two-basis table")
    p.add_argument("--basis", action="append", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist", help="distribution JSON (needs --state when overlaps vanish)")
    src.add_argument("--from-state", dest="from_state", help="compute the table from this state first")
    p.add_argument("--state", default=None, help="state supplying zero-overlap entries")
    return parser


def _load_bases(paths: Sequence[str]):
    return [observable_from_json(load_json(p)) for p in paths]


def _emit(args, obj) -> None:
    write_text(args.output, dumps(obj))


def _require_json(args, command: str) -> None:
    if args.format == "csv":
        raise KDQError(f"CSV output is only available for sweep and scan, not {command}")


def cmd_compute(args) -> None:
    _require_json(args, "compute")
    state = state_from_json(load_json(args.state))
    obs = _load_bases(args.basis)
    bases = [o.basis for o in obs]
    if args.coarse:
        parts = [partition_from_json(load_json(p)) for p in args.coarse]
        if len(parts) == 1:
            parts = [None, parts[0]]
        elif len(parts) != 2:
            raise KDQError("--coarse takes one or two partition files")
        dist = kd.kd_from_partitions(state, bases, parts)
    elif len(bases) == 2:
        dist = kd.compute_kd(state, *bases)
    else:
        dist = kd.compute_extended_kd(state, bases)
    _emit(args, dist_to_json(dist))


def cmd_check(args) -> None:
    _require_json(args, "check")
    state = state_from_json(load_json(args.state))
    obs = _load_bases(args.basis)
    if len(obs) != 2:
        raise KDQError("check takes exactly two bases")
    A, F = obs
    tol = args.tol_zero
    rho = as_density(state)
    if args.coarse:
        pa, pf = (partition_from_json(load_json(p)) for p in args.coarse)
    else:
        pa, pf = A.partition(), F.partition()
    coarse = not (pa.is_trivial and pf.is_trivial)
    dist = kd.coarse_grain(rho, pa, pf, A.basis, F.basis) if coarse else kd.compute_kd(rho, A.basis, F.basis)
    out: dict = {"verdict": classicality.classify(dist, tol).as_dict()}
    if rho.is_pure():
        if coarse:
            counts = classicality.coarse_support_counts(rho, pa, pf, A.basis, F.basis, tol)
            out["counts"] = counts.as_dict()
            out["thm1"] = classicality.coarse_thm_check(counts)
            try:
                out["corollary1"] = classicality.corollary2_check(dist, pa, pf, tol)
            except KDQError as exc:
                out["corollary1"] = None
                out["corollary1_note"] = str(exc)
        else:
            counts = classicality.support_counts(rho, A.basis, F.basis, tol)
            out["counts"] = counts.as_dict()
            out["thm1"] = classicality.thm1_sufficient_nonclassical(counts)
            out["corollary1"] = classicality.corollary1_check(dist, tol)
    else:
        out["counts"] = None
        out["thm1"] = None
        out["corollary1"] = None
    out["commutators"] = classicality.commutation_report(rho, A, F).as_dict()
    _emit(args, out)


def cmd_measures(args) -> None:
    _require_json(args, "measures")
    values, meta = dist_values_from_json(load_json(args.dist))
    d = None if meta["conditioned"] else meta["dim"]
    _emit(args, measures.nonclassicality_measures(values, d).as_dict())


def cmd_mub(args) -> None:
    _require_json(args, "mub")
    fam = mubs.family_by_name(args.family, args.dim)
    docs = [basis_to_json(b, eigenvalues=range(b.dim)) for b in fam.bases]
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for n, doc in enumerate(docs, start=1):
            (out / f"basis_{n}.json").write_text(dumps(doc))
        return
    _emit(args, {"family": args.family, "dim": fam.dim, "real": fam.real_flag, "bases": docs})


def cmd_witness(args) -> None:
    _require_json(args, "witness")
    a = state_from_json(load_json(args.a))
    kind = witness.WitnessKind(args.kind)
    if isinstance(a, DensityOperator):
        a = a.to_ket()
    if kind in (witness.WitnessKind.H, witness.WitnessKind.G):
        f = state_from_json(load_json(args.f))
        if isinstance(f, DensityOperator):
            f = f.to_ket()
        wp = witness.witness_by_kind(kind, a, f)
    else:
        if args.block is None:
            raise KDQError("R and S witnesses need --block")
        basis = observable_from_json(load_json(args.f)).basis
        v = basis.matrix[:, args.block]
        wp = witness.witness_by_kind(kind, a, v @ v.conj().T)
    out = {
        "kind": kind.value,
        "operator": complex_array_to_json(wp.operator),
        "eigenvalues": list(wp.nonzero_eigenvalues),
        "eigenvectors": [ket_to_json(v) for v in wp.eigenvectors],
    }
    if args.target is not None:
        out["tailored_state"] = ket_to_json(witness.tailor_state(wp, args.target))
    _emit(args, out)


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def cmd_sweep(args) -> None:
    state = state_from_json(load_json(args.state))
    obs = _load_bases(args.basis)
    if len(obs) != 2:
        raise KDQError("sweep takes exactly two bases")
    ps = channels.parse_p_range(args.p)
    sweep = channels.depolarization_sweep(state, obs[0].basis, obs[1].basis, ps)
    if args.format == "json":
        _emit(args, {
            "rows": [dict(zip(("p", "total", "negativity", "imaginarity"), r)) for r in sweep.rows()],
            "negativity_threshold": sweep.negativity_threshold,
        })
        return
    write_text(args.output, _csv(sweep.rows(), ("p", "total", "negativity", "imaginarity")))


def cmd_condition(args) -> None:
    _require_json(args, "condition")
    state = state_from_json(load_json(args.state))
    bases = [o.basis for o in _load_bases(args.basis)]
    dist = kd.compute_extended_kd(state, bases)
    cond = kd.condition_on(dist, kd.PostselectionOutcome(tuple(args.select)), args.tol_zero)
    _emit(args, dist_to_json(cond))


def _run_scan(args) -> oracle.ScanResult:
    d, k, n, seed = args.dim, args.k, args.samples, args.seed
    if args.what == "bound":
        return oracle.bound_scan(d, k, n, seed, inject=args.inject, mixed=args.mixed)
    if args.what == "nonpositive":
        return oracle.nonpositive_set_search(d, n, seed)
    if args.what == "thm1":
        return oracle.thm1_soundness_scan(d, n, seed)
    if args.what == "jensen":
        return oracle.jensen_scan(d, n, seed)
    if args.what == "oracle":
        return oracle.oracle_agreement(d, k, n, seed)
    if args.what == "amplification":
        inst = oracle.amplification_search(d, n, seed)
        return oracle.ScanResult(
            n,
            inst.max_abs_conditional,
            0,
            seed,
            {"d": d, "outcome": list(inst.outcome), "postselection_probability": inst.postselection_probability},
        )
    found = oracle.classical_noncommuting_search(d, n, seed)
    return oracle.ScanResult(n, float(len(found)), 0, seed, {"d": d, "found": len(found), "labels": [f.label for f in found[:10]]})


def cmd_scan(args) -> None:
    result = _run_scan(args)
    if args.format == "csv":
        row = {k: v for k, v in result.as_dict().items() if k != "details"}
        row.update({k: v for k, v in result.details.items() if not isinstance(v, (list, dict))})
        write_text(args.output, _csv([list(row.values())], list(row.keys())))
        return
    _emit(args, result.as_dict())


def cmd_reconstruct(args) -> None:
    _require_json(args, "reconstruct")
    obs = _load_bases(args.basis)
    if len(obs) != 2:
        raise KDQError("reconstruct takes exactly two bases (first and last)")
    A, B = (o.basis for o in obs)
    state = None
    if args.state:
        state = as_density(state_from_json(load_json(args.state)))
    if args.from_state:
        state = as_density(state_from_json(load_json(args.from_state)))
        table = kd.compute_kd(state, A, B).values
    else:
        values, meta = dist_values_from_json(load_json(args.dist))
        if meta["conditioned"]:
            raise KDQError("a conditioned distribution does not represent a state")
        if values.ndim > 2:
            values = values.sum(axis=tuple(range(1, values.ndim - 1)))
        table = values
    rho, mask = kd.reconstruct_from_table(table, A, B, state, tol=args.tol_zero)
    out = {
        "state": density_to_json(rho),
        "convention_entries": [[int(i), int(j)] for i, j in zip(*np.nonzero(mask))],
    }
    if state is not None:
        out["max_error"] = float(np.max(np.abs(rho.matrix - state.matrix)))
    _emit(args, out)


COMMANDS = {
    "compute": cmd_compute,
    "check": cmd_check,
    "measures": cmd_measures,
    "mub": cmd_mub,
    "witness": cmd_witness,
    "sweep": cmd_sweep,
    "condition": cmd_condition,
    "scan": cmd_scan,
    "reconstruct": cmd_reconstruct,
}


def _error(kind: str, exc: BaseException) -> str:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, InvariantError):
        doc["invariant"] = exc.invariant
    return json.dumps(doc)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ParseError, OSError, json.JSONDecodeError) as exc:
        print(_error("io", exc), file=sys.stderr)
        return 2
    except (KDQError, ConsistencyError) as exc:
        print(_error("domain", exc), file=sys.stderr)
        return 1
    except (ValueError, TypeError, KeyError) as exc:
        # malformed field contents that slipped past the structural checks
        print(_error("io", exc), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
