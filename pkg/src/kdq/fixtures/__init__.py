"""Bundled inputs and golden tables for the four worked examples.

Tables are stored with rows indexing the F basis and columns the A basis; the
loader transposes them to the library's (A, F) axis order.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..core import Ket, Observable, OrthonormalBasis

NAMES = ("ex1", "ex2", "ex3", "ex4")


@dataclass(frozen=True, eq=False)
class Example:
    name: str
    psi: Ket
    obs_A: Observable
    obs_F: Observable
    table: np.ndarray  # axis 0 = A, axis 1 = F

    @property
    def A(self) -> OrthonormalBasis:
        return self.obs_A.basis

    @property
    def F(self) -> OrthonormalBasis:
        return self.obs_F.basis


def fixture_path(filename: str) -> Path:
    return Path(str(resources.files(__package__).joinpath(filename)))


def example_paths(name: str) -> dict[str, Path]:
    return {part: fixture_path(f"{name}_{part}.json") for part in ("state", "basis_a", "basis_f", "table")}


def load_example(name: str) -> Example:
    from ..io import complex_array_from_json, ket_from_json, load_json, observable_from_json

    paths = example_paths(name)
    table = complex_array_from_json(load_json(paths["table"])["values"]).T
    return Example(
        name,
        ket_from_json(load_json(paths["state"])),
        observable_from_json(load_json(paths["basis_a"])),
        observable_from_json(load_json(paths["basis_f"])),
        table,
    )
