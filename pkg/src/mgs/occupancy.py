"""2D/3D occupancy grids and the plain-text map format.

Map files::

    dims 8 4
    cell_size 1.0
    ........
    ..##....
    ..##....
    ........

Rows are y (top line is y=0), characters are x.  3D maps list one block of
rows per z layer, separated by a blank line.  ``.`` is free, ``#`` occupied.
"""
from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import round_half_away


class MapFormatError(ValueError):
    pass


class OccupancyGrid:
    """Boolean occupancy over ``dims`` cells indexed ``[x, y(, z)]``.

    Cell ``c`` is centred at ``origin + c * cell_size``.
    """

    def __init__(self, occupied, cell_size: float = 1.0, origin=None, inflation_radius: float = 0.0):
        occ = np.asarray(occupied, dtype=bool)
        if occ.ndim not in (2, 3):
            raise ValueError("occupancy grids are 2D or 3D")
        self.occupied = occ
        self.occupied.setflags(write=False)
        self.dims = tuple(int(d) for d in occ.shape)
        self.cell_size = float(cell_size)
        self.origin = tuple(float(o) for o in (origin if origin is not None else (0.0,) * occ.ndim))
        self.inflation_radius = float(inflation_radius)
        self._inflated = None

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def __eq__(self, other):
        return (isinstance(other, OccupancyGrid) and self.dims == other.dims
                and self.cell_size == other.cell_size and self.origin == other.origin
                and bool(np.array_equal(self.occupied, other.occupied)))

    def in_bounds(self, cell) -> bool:
        return all(0 <= c < d for c, d in zip(cell, self.dims))

    def center_of(self, cell) -> tuple:
        return tuple(o + c * self.cell_size for o, c in zip(self.origin, cell))

    def cell_of(self, point) -> tuple:
        return tuple(round_half_away((p - o) / self.cell_size) for p, o in zip(point, self.origin))

    def with_inflation(self, radius: float) -> "OccupancyGrid":
        return OccupancyGrid(self.occupied, self.cell_size, self.origin, radius)

    @property
    def inflated(self) -> np.ndarray:
        """Occupancy dilated by ``inflation_radius`` (a superset of ``occupied``)."""
        if self._inflated is None:
            r = int(math.floor(self.inflation_radius / self.cell_size + 1e-9))
            if r <= 0:
                self._inflated = self.occupied
            else:
                axes = [np.arange(-r, r + 1)] * self.ndim
                mesh = np.meshgrid(*axes, indexing="ij")
                ball = sum(m.astype(float) ** 2 for m in mesh) <= r * r + 1e-9
                self._inflated = ndimage.binary_dilation(self.occupied, structure=ball)
                self._inflated.setflags(write=False)
        return self._inflated

    def is_free(self, cell, inflated: bool = False) -> bool:
        if not self.in_bounds(cell):
            return False
        grid = self.inflated if inflated else self.occupied
        return not grid[tuple(cell)]

    def free_cells(self, inflated: bool = False) -> list:
        grid = self.inflated if inflated else self.occupied
        return [tuple(int(v) for v in c) for c in np.argwhere(~grid)]

    def neighbor_offsets(self) -> list:
        """8-connected (2D) or 26-connected (3D) offsets in lexicographic order."""
        return [d for d in itertools.product((-1, 0, 1), repeat=self.ndim) if any(d)]

    # -- text format ---------------------------------------------------

    def to_text(self) -> str:
        lines = ["dims " + " ".join(str(d) for d in self.dims), f"cell_size {self.cell_size!r}"]
        if self.ndim == 2:
            lines += _rows(self.occupied)
        else:
            for z in range(self.dims[2]):
                if z:
                    lines.append("")
                lines += _rows(self.occupied[:, :, z])
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "OccupancyGrid":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) < 2 or not lines[0].startswith("dims ") or not lines[1].startswith("cell_size "):
            raise MapFormatError("map must start with 'dims ...' and 'cell_size ...' lines")
        try:
            dims = [int(v) for v in lines[0].split()[1:]]
            cell_size = float(lines[1].split()[1])
        except (ValueError, IndexError) as exc:
            raise MapFormatError(f"bad header: {exc}") from None
        if len(dims) not in (2, 3) or min(dims) <= 0:
            raise MapFormatError(f"bad dims {dims}")
        body = lines[2:]
        if len(dims) == 2:
            occ = _parse_block(body, dims[0], dims[1])
        else:
            w, h, depth = dims
            if len(body) != depth * h + (depth - 1):
                raise MapFormatError("3D map has wrong number of lines")
            layers = []
            for z in range(depth):
                block = body[z * (h + 1): z * (h + 1) + h]
                if z < depth - 1 and body[z * (h + 1) + h] != "":
                    raise MapFormatError("3D layers must be separated by a blank line")
                layers.append(_parse_block(block, w, h))
            occ = np.stack(layers, axis=2)
        return cls(occ, cell_size)

    def save(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "OccupancyGrid":
        return cls.from_text(Path(path).read_text())


def _rows(occ2d) -> list:
    w, h = occ2d.shape
    return ["".join("#" if occ2d[x, y] else "." for x in range(w)) for y in range(h)]


def _parse_block(rows, w, h) -> np.ndarray:
    if len(rows) != h:
        raise MapFormatError(f"expected {h} rows, found {len(rows)}")
    occ = np.zeros((w, h), dtype=bool)
    for y, row in enumerate(rows):
        if len(row) != w:
            raise MapFormatError(f"row {y} has {len(row)} characters, expected {w}")
        for x, ch in enumerate(row):
            if ch == "#":
                occ[x, y] = True
            elif ch != ".":
                raise MapFormatError(f"unexpected character {ch!r} at ({x}, {y})")
    return occ
