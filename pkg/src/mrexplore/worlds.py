"""Built-in ground-truth worlds, constructed deterministically in code.

A config may reference these as `builtin:<name>` instead of a PGM path.
"""

from __future__ import annotations

import numpy as np

from .grid import FREE, OCCUPIED, GroundTruthMap


def _desk() -> GroundTruthMap:
    """200x200-cell office floor at 0.1 m/cell (20 m x 20 m): four wall-split
    zones with door gaps plus scattered furniture blocks."""
    cells = np.full((200, 200), FREE, dtype=np.int8)
    cells[:2, :] = OCCUPIED
    cells[-2:, :] = OCCUPIED
    cells[:, :2] = OCCUPIED
    cells[:, -2:] = OCCUPIED

    # horizontal wall with two doors
    cells[98:100, 2:198] = OCCUPIED
    cells[98:100, 30:40] = FREE
    cells[98:100, 150:162] = FREE
    # vertical wall below, one door
    cells[2:98, 98:100] = OCCUPIED
    cells[44:54, 98:100] = FREE
    # vertical wall above, two doors
    cells[100:198, 138:140] = OCCUPIED
    cells[116:126, 138:140] = FREE
    cells[168:178, 138:140] = FREE

    # furniture
    for r0, c0, h, w in (
        (20, 20, 10, 10),
        (60, 60, 8, 14),
        (24, 150, 12, 8),
        (150, 30, 10, 12),
        (120, 70, 8, 8),
        (160, 160, 12, 12),
        (40, 120, 8, 10),
    ):
        cells[r0:r0 + h, c0:c0 + w] = OCCUPIED

    return GroundTruthMap(0.1, 0.0, 0.0, 200, 200, cells)


def _two_wings() -> GroundTruthMap:
    """Two open wings joined by a central corridor; used to observe goal
    spreading with two robots starting in the middle."""
    cells = np.full((40, 80), FREE, dtype=np.int8)
    cells[:1, :] = OCCUPIED
    cells[-1:, :] = OCCUPIED
    cells[:, :1] = OCCUPIED
    cells[:, -1:] = OCCUPIED
    # corridor walls: wings at x<30 and x>=50, gap rows 17..23
    cells[1:17, 30:32] = OCCUPIED
    cells[23:39, 30:32] = OCCUPIED
    cells[1:17, 48:50] = OCCUPIED
    cells[23:39, 48:50] = OCCUPIED
    return GroundTruthMap(0.25, 0.0, 0.0, 80, 40, cells)


def _open20() -> GroundTruthMap:
    """Open 20x20-cell arena with a boundary wall."""
    cells = np.full((20, 20), FREE, dtype=np.int8)
    cells[:1, :] = OCCUPIED
    cells[-1:, :] = OCCUPIED
    cells[:, :1] = OCCUPIED
    cells[:, -1:] = OCCUPIED
    return GroundTruthMap(1.0, 0.0, 0.0, 20, 20, cells)


_BUILDERS = {
    "desk": _desk,
    "two_wings": _two_wings,
    "open20": _open20,
}

_DEFAULT_STARTS = {
    "desk": [(5.0, 5.0, 0.0), (15.0, 5.0, 1.6), (5.0, 15.0, 3.2), (15.0, 15.0, 4.8)],
    "two_wings": [(10.0, 5.0, 0.0), (10.0, 4.0, 3.14)],
    "open20": [(10.5, 10.5, 0.0), (5.5, 5.5, 0.0)],
}


def builtin_names() -> list[str]:
    return sorted(_BUILDERS)


def make_world(name: str) -> GroundTruthMap:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin world {name!r}; have {builtin_names()}")


def default_starts(name: str, count: int) -> list[tuple[float, float, float]]:
    starts = _DEFAULT_STARTS.get(name)
    if starts is None or count > len(starts):
        raise ValueError(f"no default start poses for {count} robots on {name!r}")
    return starts[:count]
