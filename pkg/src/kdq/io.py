"""JSON encoding of states, bases, partitions and distributions.

A complex scalar is ``[re, im]``; matrices are row-major nested lists of those.
Floats are written with 17 significant digits so output is byte-stable.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .core import DensityOperator, EigenspacePartition, Ket, Observable, OrthonormalBasis
from .kd import KDDistribution


class ParseError(ValueError):
    """Malformed input document (exit status 2 at the CLI)."""


def _c(z: complex) -> list[float]:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def _z(pair: Any) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ParseError(f"complex scalar must be [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def complex_array_to_json(a: np.ndarray) -> Any:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return _c(a)
    return [complex_array_to_json(x) for x in a]


def complex_array_from_json(obj: Any) -> np.ndarray:
    def walk(x):
        if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
            return _z(x)
        if isinstance(x, list):
            return [walk(v) for v in x]
        raise ParseError(f"expected nested arrays of [re, im], got {x!r}")

    return np.array(walk(obj), dtype=complex)


def ket_to_json(psi: Ket) -> dict:
    return {"dim": psi.dim, "amplitudes": complex_array_to_json(psi.amplitudes)}


def density_to_json(rho: DensityOperator) -> dict:
    return {"dim": rho.dim, "matrix": complex_array_to_json(rho.matrix)}


def basis_to_json(basis: OrthonormalBasis, eigenvalues=None) -> dict:
    doc = {"dim": basis.dim, "vectors": [ket_to_json(v) for v in basis.vectors]}
    if eigenvalues is not None:
        doc["eigenvalues"] = [float(x) for x in eigenvalues]
    return doc


def partition_to_json(part: EigenspacePartition) -> dict:
    return {"dim": part.dim, "blocks": [list(b) for b in part.blocks], "labels": list(part.labels)}


def _require(doc: Any, *keys: str) -> None:
    if not isinstance(doc, dict):
        raise ParseError(f"expected a JSON object, got {type(doc).__name__}")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"missing keys {missing}")


def _check_dim(doc: dict, n: int) -> None:
    if int(doc["dim"]) != n:
        raise ParseError(f"declared dim {doc['dim']} does not match data length {n}")


def ket_from_json(doc: Any) -> Ket:
    _require(doc, "dim", "amplitudes")
    amps = complex_array_from_json(doc["amplitudes"])
    _check_dim(doc, amps.size)
    return Ket(amps)


def density_from_json(doc: Any) -> DensityOperator:
    _require(doc, "dim", "matrix")
    m = complex_array_from_json(doc["matrix"])
    _check_dim(doc, m.shape[0])
    return DensityOperator(m)


def state_from_json(doc: Any) -> Ket | DensityOperator:
    """A state document is either a ket (``amplitudes``) or a density matrix (``matrix``)."""
    if isinstance(doc, dict) and "amplitudes" in doc:
        return ket_from_json(doc)
    return density_from_json(doc)


def basis_from_json(doc: Any) -> OrthonormalBasis:
    _require(doc, "dim", "vectors")
    kets = [ket_from_json(v) for v in doc["vectors"]]
    _check_dim(doc, len(kets))
    return OrthonormalBasis.from_kets(kets)


def observable_from_json(doc: Any) -> Observable:
    """Basis document with optional ``eigenvalues``; defaults to 0..d-1 (nondegenerate)."""
    basis = basis_from_json(doc)
    if "eigenvalues" in doc:
        return Observable(basis, tuple(doc["eigenvalues"]))
    return Observable.nondegenerate(basis)


def partition_from_json(doc: Any) -> EigenspacePartition:
    _require(doc, "dim", "blocks")
    return EigenspacePartition(int(doc["dim"]), tuple(tuple(b) for b in doc["blocks"]), tuple(doc.get("labels", ())))


def dist_to_json(dist: KDDistribution) -> dict:
    return {
        "k": dist.k,
        "shape": list(dist.shape),
        "dim": dist.dim,
        "values": complex_array_to_json(dist.values),
        "conditioned": dist.conditioned,
        "postselection_probability": dist.postselection_probability,
    }


def dist_values_from_json(doc: Any) -> tuple[np.ndarray, dict]:
    """Values tensor plus metadata (k, dim, conditioned, postselection_probability)."""
    _require(doc, "k", "shape", "values")
    vals = complex_array_from_json(doc["values"])
    if list(vals.shape) != list(doc["shape"]) or vals.ndim != int(doc["k"]):
        raise ParseError(f"values shape {vals.shape} does not match declared shape {doc['shape']}")
    dim = doc.get("dim")
    if dim is None and len(set(vals.shape)) == 1:
        dim = vals.shape[0]
    meta = {
        "k": int(doc["k"]),
        "dim": None if dim is None else int(dim),
        "conditioned": bool(doc.get("conditioned", False)),
        "postselection_probability": doc.get("postselection_probability"),
    }
    return vals, meta


def _format(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x!r} cannot be serialized")
        if x == 0.0:
            return "0.0"
        s = format(x, ".17g")
        if "e" not in s and "." not in s:
            s += ".0"
        return s
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_format(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_format(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Deterministic JSON text; floats carry 17 significant digits."""
    return _format(obj) + "\n"


def load_json(path: str | Path) -> Any:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def write_text(path: str | Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text)
