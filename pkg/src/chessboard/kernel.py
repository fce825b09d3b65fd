"""Exact chessboard kernel on the 1+1 lattice.

Every path from the origin with a fixed first-step direction contributes
``a**R`` (``a`` = corner weight, ``R`` = number of corners) to the cell
``(site, final direction)`` it ends in.  The contributions are kept in four
real accumulators split by ``R mod 4``; the real and imaginary parts of the
kernel are differences of those accumulators.

Two independent routes build the same :class:`KernelTable`:
:func:`kernel_table` (slice recursion, O(t^2)) and
:func:`enumerate_kernel` (explicit walk over every path, O(2^t)).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import IO, Iterator

import numpy as np

from .paths import DIRECTIONS, PLUS, Site, check_direction

ENUMERATION_LIMIT = 20
CSV_FIELDS = ("t", "x", "end_dir", "w0", "w1", "w2", "w3", "phi_r", "phi_i", "g")


class Convention(str, enum.Enum):
    FEYNMAN = "feynman"  # K = sum N(R) (i a)^R
    GERSCH = "gersch"  # i replaced by -i

    @property
    def imag_sign(self) -> int:
        return 1 if self is Convention.FEYNMAN else -1


class GuardError(ValueError):
    """An enumeration-based operation was asked for more than it allows."""


@dataclass(frozen=True)
class KernelParams:
    t_max: int
    corner_weight: float
    convention: Convention = Convention.FEYNMAN

    def __post_init__(self):
        if int(self.t_max) != self.t_max or self.t_max < 1:
            raise ValueError(f"t_max must be a positive integer, got {self.t_max!r}")
        if not self.corner_weight >= 0 or not np.isfinite(self.corner_weight):
            raise ValueError(f"corner_weight must be finite and >= 0, got {self.corner_weight!r}")
        object.__setattr__(self, "convention", Convention(self.convention))


@dataclass(frozen=True)
class KernelCell:
    w: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


ZERO_CELL = KernelCell()


def phi_components(cell: KernelCell) -> tuple[float, float]:
    w0, w1, w2, w3 = cell.w
    return w0 - w2, w1 - w3


def signed_kernel(cell: KernelCell) -> float:
    """Colour-signed sum: blue (R mod 4 in {0, 1}) counts +, red counts -."""
    w0, w1, w2, w3 = cell.w
    return (w0 - w2) + (w1 - w3)


def _end_index(direction: int) -> int:
    return 0 if direction == PLUS else 1


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel accumulators for one start direction.

    ``w[t, x + t_max, e, r]`` holds the weight of paths ending at ``(x, t)``
    with final direction index ``e`` (0 for +1, 1 for -1) and ``R mod 4 == r``.
    ``reach`` marks the cells that some path actually lands in.
    """

    params: KernelParams
    start: int
    w: np.ndarray
    reach: np.ndarray

    @property
    def t_max(self) -> int:
        return self.params.t_max

    def cell(self, site: Site, end: int) -> KernelCell:
        x, t = site
        e = _end_index(check_direction(end))
        if not 1 <= t <= self.t_max or abs(x) > self.t_max:
            return ZERO_CELL
        xi = x + self.t_max
        if not self.reach[t, xi, e]:
            return ZERO_CELL
        return KernelCell(tuple(float(v) for v in self.w[t, xi, e]))

    def cells(self, t: int | None = None) -> Iterator[tuple[Site, int, KernelCell]]:
        """Reachable cells sorted by (t, x, end_dir)."""
        ts = range(1, self.t_max + 1) if t is None else [t]
        for tt in ts:
            for xi in range(2 * self.t_max + 1):
                for end in sorted(DIRECTIONS):
                    e = _end_index(end)
                    if self.reach[tt, xi, e]:
                        yield (
                            Site(xi - self.t_max, tt),
                            end,
                            KernelCell(tuple(float(v) for v in self.w[tt, xi, e])),
                        )

    def signed_slice(self, t: int) -> np.ndarray:
        """Signed kernel at slice ``t`` as an array indexed ``[x + t_max, e]``."""
        w = self.w[t]
        return (w[..., 0] - w[..., 2]) + (w[..., 1] - w[..., 3])

    def unsigned_slice(self, t: int) -> np.ndarray:
        return self.w[t].sum(axis=-1)

    def mirrored(self) -> KernelTable:
        """The table for the opposite start direction, via x -> -x, end -> -end."""
        return KernelTable(
            self.params,
            -self.start,
            self.w[:, ::-1, ::-1, :].copy(),
            self.reach[:, ::-1, ::-1].copy(),
        )

    def max_abs_diff(self, other: KernelTable) -> float:
        if self.start != other.start or self.t_max != other.t_max:
            raise ValueError("tables differ in start direction or extent")
        if not np.array_equal(self.reach, other.reach):
            return float("inf")
        return float(np.max(np.abs(self.w - other.w)))


def _empty(t_max: int) -> tuple[np.ndarray, np.ndarray]:
    shape = (t_max + 1, 2 * t_max + 1, 2)
    return np.zeros(shape + (4,)), np.zeros(shape, dtype=bool)


def _shifted(src: np.ndarray, step: int) -> np.ndarray:
    out = np.zeros_like(src)
    if step > 0:
        out[1:] = src[:-1]
    else:
        out[:-1] = src[1:]
    return out


def kernel_table(params: KernelParams, start: int = PLUS) -> KernelTable:
    """Build the kernel by slice recursion over (x, final direction, R mod 4).

    A straight step carries the accumulators unchanged; a turn multiplies by
    the corner weight and moves each accumulator to the next residue.
    """
    start = check_direction(start)
    T, a = params.t_max, params.corner_weight
    w, reach = _empty(T)
    w[1, start + T, _end_index(start), 0] = 1.0
    reach[1, start + T, _end_index(start)] = True
    for t in range(1, T):
        for end in DIRECTIONS:
            e, f = _end_index(end), _end_index(-end)
            src, src_reach = w[t, :, e], reach[t, :, e]
            w[t + 1, :, e] += _shifted(src, end)
            w[t + 1, :, f] += a * np.roll(_shifted(src, -end), 1, axis=-1)
            reach[t + 1, :, e] |= _shifted(src_reach, end)
            reach[t + 1, :, f] |= _shifted(src_reach, -end)
    return KernelTable(params, start, w, reach)


def enumerate_kernel(params: KernelParams, start: int = PLUS) -> KernelTable:
    """Build the kernel by walking every path of every length up to ``t_max``.

    Each distinct path is visited once (depth-first over the step tree) and
    its own weight ``a**R`` is added at its endpoint.  No recursion identity
    is assumed, so this serves as the oracle for :func:`kernel_table`.
    """
    start = check_direction(start)
    T, a = params.t_max, params.corner_weight
    if T > ENUMERATION_LIMIT:
        raise GuardError(f"enumeration limited to t_max <= {ENUMERATION_LIMIT}, got {T}")
    w, reach = _empty(T)
    stack = [(1, start, start, 0)]  # (t, x, last step, corners)
    while stack:
        t, x, last, R = stack.pop()
        e = _end_index(last)
        w[t, x + T, e, R % 4] += a**R
        reach[t, x + T, e] = True
        if t < T:
            for step in DIRECTIONS:
                stack.append((t + 1, x + step, step, R + (step != last)))
    return KernelTable(params, start, w, reach)


def complex_kernel(table: KernelTable, site: Site, end: int) -> complex:
    phi_r, phi_i = phi_components(table.cell(site, end))
    return complex(phi_r, table.params.convention.imag_sign * phi_i)


def count_paths(
    x: int, t: int, end: int, start: int, R: int, backend: str = "dp"
) -> int:
    """Number of ``t``-step paths with given start/end directions and ``R`` corners ending at ``x``."""
    check_direction(end)
    check_direction(start)
    if t < 1:
        raise ValueError("t must be positive")
    if R < 0 or R > t - 1 or abs(x) > t or (x - t) % 2:
        return 0
    if backend == "enumerate":
        return _count_by_enumeration(x, t, end, start, R)
    if backend != "dp":
        raise ValueError(f"unknown backend {backend!r}")
    return int(path_counts(t, start)[x + t, _end_index(end), R])


@lru_cache(maxsize=32)
def path_counts(t: int, start: int) -> np.ndarray:
    """Exact path counts ``N[x + t, e, R]`` for all ``t``-step paths with the given first step."""
    dp = np.zeros((2 * t + 1, 2, t), dtype=object)
    dp[start + t, _end_index(start), 0] = 1
    for _ in range(1, t):
        new = np.zeros_like(dp)
        for d in DIRECTIONS:
            e, f = _end_index(d), _end_index(-d)
            new[:, e] += _shifted(dp[:, e], d)
            turned = _shifted(dp[:, e], -d)
            new[:, f, 1:] += turned[:, :-1]
        dp = new
    dp.flags.writeable = False
    return dp


def _count_by_enumeration(x: int, t: int, end: int, start: int, R: int) -> int:
    if t > ENUMERATION_LIMIT:
        raise GuardError(f"enumeration limited to t <= {ENUMERATION_LIMIT}, got {t}")
    total = 0
    for tail in product(DIRECTIONS, repeat=t - 1):
        steps = (start,) + tail
        if steps[-1] != end or sum(steps) != x:
            continue
        if sum(1 for p, q in zip(steps, steps[1:]) if p != q) == R:
            total += 1
    return total


def table_rows(table: KernelTable, t: int | None = None) -> list[dict]:
    rows = []
    for site, end, cell in table.cells(t):
        phi_r, phi_i = phi_components(cell)
        rows.append(
            {
                "t": site.t,
                "x": site.x,
                "end_dir": end,
                "w0": cell.w[0],
                "w1": cell.w[1],
                "w2": cell.w[2],
                "w3": cell.w[3],
                "phi_r": phi_r,
                "phi_i": phi_i,
                "g": signed_kernel(cell),
            }
        )
    return rows


def _fmt(key: str, v) -> str:
    if key == "end_dir":
        return f"{v:+d}"
    return format(v, ".17g") if isinstance(v, float) else str(v)


def write_table_csv(table: KernelTable, fh: IO[str], t: int | None = None) -> None:
    """Write cells as ``t,x,end_dir,w0,w1,w2,w3,phi_r,phi_i,g``; one slice or all."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in table_rows(table, t):
        writer.writerow([_fmt(k, row[k]) for k in CSV_FIELDS])
