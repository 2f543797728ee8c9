"""Map generators for tests and suites."""
from __future__ import annotations

import numpy as np

from ..occupancy import OccupancyGrid


def random_grid(width: int, height: int, density: float, rng, keep_free=()) -> OccupancyGrid:
    occ = rng.random((width, height)) < density
    for cell in keep_free:
        occ[tuple(cell)] = False
    return OccupancyGrid(occ)


def serpentine_rooms(width: int, height: int, walls: int, door: int, rng=None, jitter: int = 0,
                     clutter: float = 0.0) -> OccupancyGrid:
    """Vertical walls splitting the map into rooms, doors alternating bottom/top.

    With ``rng``, wall positions move by up to ``jitter`` cells, door sizes
    vary by one cell and ``clutter`` is the density of random single-cell
    obstacles inside rooms.
    """
    occ = np.zeros((width, height), dtype=bool)
    span = width / (walls + 1)
    for i in range(1, walls + 1):
        x = int(round(i * span))
        if rng is not None and jitter:
            x += int(rng.integers(-jitter, jitter + 1))
        x = min(max(x, 2), width - 3)
        d = door + (int(rng.integers(-1, 2)) if rng is not None else 0)
        d = max(1, d)
        occ[x, :] = True
        if i % 2:
            occ[x, height - 1 - d: height - 1] = False
        else:
            occ[x, 1: 1 + d] = False
    if rng is not None and clutter > 0:
        noise = rng.random((width, height)) < clutter
        noise[:, :2] = noise[:, -2:] = False
        occ |= noise
    return OccupancyGrid(occ)
