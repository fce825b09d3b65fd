"""Chessboard lattice paths and their leg (run-length) view.

A path is a sequence of unit space steps ``+1``/``-1``, one per unit time
step, starting at the origin. Lattice units throughout: spacing 1, c = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Iterator, NamedTuple, Sequence

PLUS = 1
MINUS = -1
DIRECTIONS = (PLUS, MINUS)


class Site(NamedTuple):
    x: int
    t: int


class Leg(NamedTuple):
    """A maximal run of steps in one direction."""

    direction: int
    length: int

    def __neg__(self) -> Leg:
        return Leg(-self.direction, self.length)


def check_direction(value: int) -> int:
    if value not in DIRECTIONS:
        raise ValueError(f"direction must be +1 or -1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class Path:
    steps: tuple[int, ...]

    def __init__(self, steps: Iterable[int]):
        steps = tuple(check_direction(s) for s in steps)
        if not steps:
            raise ValueError("a path needs at least one step")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def parse(cls, text: str) -> Path:
        """Parse the ``+``/``-`` string encoding, e.g. ``"++-"``."""
        table = {"+": PLUS, "-": MINUS}
        try:
            return cls(table[c] for c in text)
        except KeyError as err:
            raise ValueError(f"bad path character {err.args[0]!r} in {text!r}") from None

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[int]:
        return iter(self.steps)

    def __getitem__(self, k):
        return self.steps[k]

    @property
    def end(self) -> Site:
        return Site(sum(self.steps), len(self.steps))


def corner_count(path: Path) -> int:
    s = path.steps
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def to_legs(path: Path) -> tuple[Leg, ...]:
    return tuple(Leg(d, sum(1 for _ in run)) for d, run in groupby(path.steps))


def from_legs(legs: Sequence[Leg | tuple[int, int]]) -> Path:
    if not legs:
        raise ValueError("empty leg sequence")
    steps: list[int] = []
    prev = 0
    for direction, length in legs:
        check_direction(direction)
        if length < 1:
            raise ValueError(f"leg length must be positive, got {length}")
        if direction == prev:
            raise ValueError("adjacent legs must alternate direction")
        steps.extend([direction] * length)
        prev = direction
    return Path(steps)


def positions(path: Path) -> list[Site]:
    x = 0
    out = [Site(0, 0)]
    for t, s in enumerate(path.steps, start=1):
        x += s
        out.append(Site(x, t))
    return out


def in_light_cone(site: Site) -> bool:
    x, t = site
    return abs(x) <= t and (x - t) % 2 == 0
