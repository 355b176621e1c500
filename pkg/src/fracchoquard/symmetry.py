"""Projections onto symmetric subspaces of grid fields.

Rotations are not grid maps, so "radial" is realised exactly as averaging
over classes of grid points with equal squared radius (an integer in units of
``h^2/4``). This contains every grid reflection and axis
permutation and leaves sampled radial profiles unchanged.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleSpec
from .spectral import Field, Grid


class SymmetryKind(str, enum.Enum):
    RADIAL = "Radial"
    BLOCK_RADIAL = "BlockRadial"
    ODD_SWAP = "OddSwap"


@dataclass(frozen=True)
class SymmetrySpec:
    kind: SymmetryKind
    m: int = 0

    @classmethod
    def parse(cls, text: str) -> "SymmetrySpec":
        """Parse ``radial``, ``block-radial:M`` or ``odd-swap:M``."""
        name, _, arg = text.strip().partition(":")
        key = name.strip().lower().replace("-", "").replace("_", "")
        kinds = {"radial": SymmetryKind.RADIAL, "blockradial": SymmetryKind.BLOCK_RADIAL,
                 "oddswap": SymmetryKind.ODD_SWAP}
        if key not in kinds:
            raise IncompatibleSpec(f"unknown symmetry {text!r}")
        kind = kinds[key]
        if kind == SymmetryKind.RADIAL:
            return cls(kind)
        try:
            return cls(kind, int(arg))
        except ValueError:
            raise IncompatibleSpec(f"symmetry {text!r} needs a block size, e.g. {name}:2") from None

    def __str__(self):
        return self.kind.value if self.kind == SymmetryKind.RADIAL else f"{self.kind.value}({self.m})"

    def check(self, dim: int) -> None:
        if self.kind == SymmetryKind.RADIAL:
            return
        if self.m < 1 or 2 * self.m > dim:
            raise IncompatibleSpec(f"{self} needs 1 <= m <= N/2 (N = {dim})")

    def is_demonstration(self, dim: int) -> bool:
        """True when the nonradial existence hypotheses (2 <= m, m != (N-1)/2) fail."""
        if self.kind != SymmetryKind.ODD_SWAP:
            return False
        return not (2 <= self.m <= dim / 2 and 2 * self.m != dim - 1)


@functools.lru_cache(maxsize=16)
def _classes(grid: Grid, blocks: tuple[tuple[int, int], ...]):
    offsets = grid.half_cell_offsets()
    span = grid.dim * grid.n**2 + 1
    label = np.zeros(grid.shape, dtype=np.int64)
    for lo, hi in blocks:
        r2 = sum((offsets[i] ** 2).astype(np.int64) for i in range(lo, hi))
        label = label * span + r2
    _, inverse, counts = np.unique(label.ravel(), return_inverse=True, return_counts=True)
    return inverse, counts


def _blocks(spec: SymmetrySpec, dim: int):
    if spec.kind == SymmetryKind.RADIAL:
        return ((0, dim),)
    m = spec.m
    blocks = [(0, m), (m, 2 * m)]
    if 2 * m < dim:
        blocks.append((2 * m, dim))
    return tuple(blocks)


def class_average(values: np.ndarray, grid: Grid, blocks) -> np.ndarray:
    inverse, counts = _classes(grid, blocks)
    sums = np.bincount(inverse, weights=values.ravel())
    return (sums / counts)[inverse].reshape(grid.shape)


def _swap(values: np.ndarray, m: int) -> np.ndarray:
    dim = values.ndim
    order = list(range(m, 2 * m)) + list(range(0, m)) + list(range(2 * m, dim))
    return np.transpose(values, order)


def project(values: np.ndarray, grid: Grid, spec: SymmetrySpec) -> np.ndarray:
    out = class_average(values, grid, _blocks(spec, grid.dim))
    if spec.kind == SymmetryKind.ODD_SWAP:
        out = 0.5 * (out - _swap(out, spec.m))
    return out


def symmetrize(u: Field, spec: SymmetrySpec) -> Field:
    """Orthogonal projection of ``u`` onto the fixed-point set of ``spec``."""
    spec.check(u.grid.dim)
    return Field(u.grid, project(u.values, u.grid, spec))


def radialize(u: Field) -> Field:
    return symmetrize(u, SymmetrySpec(SymmetryKind.RADIAL))


def recenter(u: Field) -> Field:
    """Circularly shift the field so its largest value sits on one of the
    ``2^N`` nodes adjacent to the origin (no shift if it already does)."""
    n = u.grid.n
    peak = np.unravel_index(int(np.argmax(u.values)), u.grid.shape)
    shift = tuple(0 if k in (n // 2 - 1, n // 2) else (n // 2 - k) for k in peak)
    if not any(shift):
        return u
    return Field(u.grid, np.roll(u.values, shift, axis=tuple(range(u.grid.dim))))


def sign_normalize(u: Field) -> Field:
    if -np.min(u.values) > np.max(u.values):
        return -u
    return u
