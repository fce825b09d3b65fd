"""Orthogonal twins and entwined space-time loops.

A path with an odd number of corners is paired with its orthogonal twin by
swapping its legs two at a time; paths with an even number of corners are
first extended by a mirrored copy of their last leg.  The pair meets after
every leg pair, and the entwined loop climbs blue sections of either path
up to the last meeting, then climbs back down the red sections.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .paths import Leg, Path, Site, corner_count, from_legs, positions, to_legs


class Channel(str, enum.Enum):
    A = "A"  # the (extended) sampled path
    B = "B"  # its orthogonal twin


def extend_even(path: Path) -> Path:
    """Append a reversed copy of the last leg when the corner count is even."""
    if corner_count(path) % 2:
        return path
    last = to_legs(path)[-1]
    return Path(path.steps + (-last.direction,) * last.length)


def orthogonal_twin(path: Path) -> Path:
    legs = to_legs(path)
    R = len(legs) - 1
    if R == 0:
        (l1,) = legs
        twin = [-l1, l1]
    elif R % 2:
        twin = _swap_pairs(legs)
    else:
        # the last original leg pairs with its own mirror image
        twin = _swap_pairs(legs[:-1]) + [-legs[-1], legs[-1]]
    return from_legs(twin)


def _swap_pairs(legs) -> list[Leg]:
    out = []
    for i in range(0, len(legs), 2):
        out += [legs[i + 1], legs[i]]
    return out


def meeting_times(path: Path) -> list[int]:
    """Times at which an (extended) path meets its twin: after legs 2, 4, ..."""
    legs = to_legs(extend_even(path))
    times, t = [], 0
    for i, leg in enumerate(legs, start=1):
        t += leg.length
        if i % 2 == 0:
            times.append(t)
    return times


def meeting_points(a: Path, b: Path) -> list[Site]:
    a_ext = extend_even(a)
    if b != orthogonal_twin(a):
        raise ValueError(f"{b} is not the orthogonal twin of {a}")
    pa, pb = positions(a_ext), positions(b)
    out = []
    for t in meeting_times(a_ext):
        if pa[t] != pb[t]:
            raise ValueError(f"twins fail to meet at t={t}")
        out.append(pa[t])
    return out


def feynman_color(path: Path, step: int) -> int:
    """Colour of the 1-based ``step``: +1 (blue) or -1 (red).

    The colour flips every second corner counted before the step.
    """
    if not 1 <= step <= len(path):
        raise IndexError(f"step {step} outside 1..{len(path)}")
    s = path.steps
    prior = sum(1 for k in range(1, step) if s[k] != s[k - 1])
    return 1 if prior % 4 < 2 else -1


class Move(NamedTuple):
    channel: Channel
    space_dir: int  # x displacement along the traversal
    time_dir: int  # +1 upward in t, -1 downward


@dataclass(frozen=True)
class EntwinedLoop:
    moves: tuple[Move, ...]

    def __len__(self) -> int:
        return len(self.moves)

    def trace(self) -> list[Site]:
        x = t = 0
        sites = [Site(0, 0)]
        for m in self.moves:
            x += m.space_dir
            t += m.time_dir
            sites.append(Site(x, t))
        return sites

    def segments(self) -> Iterator[tuple[Move, Site, Site]]:
        sites = self.trace()
        for k, m in enumerate(self.moves):
            yield m, sites[k], sites[k + 1]

    def bonds(self, channel: Channel) -> dict[int, int]:
        """Map upper time of each bond in ``channel`` to its step direction."""
        out = {}
        for m, s0, s1 in self.segments():
            if m.channel != channel:
                continue
            lo, hi = (s0, s1) if s1.t > s0.t else (s1, s0)
            if hi.t in out:
                raise ValueError(f"channel {channel.value} covers t={hi.t} twice")
            out[hi.t] = hi.x - lo.x
        return out

    def channel_path(self, channel: Channel) -> Path:
        bonds = self.bonds(channel)
        return Path(bonds[t] for t in sorted(bonds))


def entwine(path: Path) -> EntwinedLoop:
    """Build the closed loop traversing ``path`` (extended) and its twin."""
    paths = {Channel.A: extend_even(path), Channel.B: orthogonal_twin(path)}
    bounds = [0] + meeting_times(path)
    sections = list(zip(bounds, bounds[1:]))
    up = [Channel.A, Channel.B]

    moves = []
    for j, (t0, t1) in enumerate(sections):
        ch = up[j % 2]
        moves += [Move(ch, s, 1) for s in paths[ch].steps[t0:t1]]
    for j in reversed(range(len(sections))):
        t0, t1 = sections[j]
        ch = up[(j + 1) % 2]
        moves += [Move(ch, -s, -1) for s in reversed(paths[ch].steps[t0:t1])]
    return EntwinedLoop(tuple(moves))
