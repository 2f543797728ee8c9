"""Text and PPM pictures of 2D grid searches: expansions, paths, roots."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..occupancy import OccupancyGrid

FREE = (255, 255, 255)
OCCUPIED = (30, 30, 30)
ANCHOR = (150, 190, 255)
CONNECT = (255, 200, 140)
PATH = (200, 30, 30)
ROOT = (40, 160, 40)
START = (20, 20, 220)
GOAL = (230, 140, 0)


def _expanded_by(result) -> dict:
    """cell -> id of the first subgraph that expanded it (1 when no trace was recorded)."""
    out = {}
    for item in result.trace:
        gid, key = item if isinstance(item[0], int) and isinstance(item[1], tuple) else (1, item)
        out.setdefault(tuple(key), gid)
    for key in result.expansion_counts:
        out.setdefault(tuple(key), 1)
    return out


def search_layers(grid: OccupancyGrid, result, roots=(), start=None, goal=None) -> dict:
    """Per-cell layer names: occupied / anchor / connect / path / root / start / goal."""
    cells = {}
    for key, gid in _expanded_by(result).items():
        cells[key] = "anchor" if gid == 1 else "connect"
    for cfg in result.path:
        c = grid.cell_of(cfg[:2])
        if grid.in_bounds(c):
            cells[c] = "path"
    for r in roots:
        cells[grid.cell_of(r[:2])] = "root"
    if start is not None:
        cells[grid.cell_of(start[:2])] = "start"
    if goal is not None:
        cells[grid.cell_of(goal[:2])] = "goal"
    return cells


_CHARS = {"anchor": "o", "connect": "x", "path": "*", "root": "R", "start": "S", "goal": "G"}
_COLORS = {"anchor": ANCHOR, "connect": CONNECT, "path": PATH, "root": ROOT, "start": START, "goal": GOAL}


def search_text(grid: OccupancyGrid, result, roots=(), start=None, goal=None) -> str:
    w, h = grid.dims[:2]
    rows = [["#" if grid.occupied[x, y] else "." for x in range(w)] for y in range(h)]
    for (x, y), layer in search_layers(grid, result, roots, start, goal).items():
        rows[y][x] = _CHARS[layer]
    return "\n".join("".join(r) for r in rows) + "\n"


def search_image(grid: OccupancyGrid, result, roots=(), start=None, goal=None) -> np.ndarray:
    """(height, width, 3) uint8 image, y down."""
    occ = grid.occupied.T
    img = np.empty(occ.shape + (3,), dtype=np.uint8)
    img[:] = FREE
    img[occ] = OCCUPIED
    for (x, y), layer in search_layers(grid, result, roots, start, goal).items():
        img[y, x] = _COLORS[layer]
    return img


def write_ppm(path, img: np.ndarray, scale: int = 4):
    img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    h, w = img.shape[:2]
    with open(Path(path), "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def attractor_image(grid: OccupancyGrid, attractors=(), start=None, goal=None) -> np.ndarray:
    occ = grid.occupied.T
    img = np.empty(occ.shape + (3,), dtype=np.uint8)
    img[:] = FREE
    img[grid.inflated.T & ~occ] = (170, 170, 170)
    img[occ] = OCCUPIED
    for x, y in attractors:
        img[y, x] = ROOT
    if start is not None:
        img[start[1], start[0]] = START
    if goal is not None:
        img[goal[1], goal[0]] = GOAL
    return img
