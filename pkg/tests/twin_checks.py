"""Structural checks on a path, its twin and their entwined loop."""

from collections import Counter
from math import ceil

from chessboard.paths import corner_count, positions, to_legs
from chessboard.twins import Channel, entwine, extend_even, feynman_color, meeting_points, orthogonal_twin


def check_all(p):
    ext = extend_even(p)
    twin = orthogonal_twin(p)
    R, R_ext = corner_count(p), corner_count(ext)
    ext_legs, twin_legs = to_legs(ext), to_legs(twin)

    # leg permutation: pairs swapped, lengths preserved
    assert R_ext % 2 == 1
    assert Counter(l.length for l in twin_legs) == Counter(l.length for l in ext_legs)
    for i in range(0, len(ext_legs), 2):
        assert (twin_legs[i], twin_legs[i + 1]) == (ext_legs[i + 1], ext_legs[i])
    assert twin[0] == -p[0]

    assert twin.end == ext.end
    assert corner_count(twin) == (R if R % 2 else R + 1)
    if R % 2:
        assert orthogonal_twin(twin) == p

    # meetings after every leg pair, and only there among pair boundaries
    meets = meeting_points(p, twin)
    assert len(meets) == ceil((R_ext + 1) / 2)
    assert meets[-1] == ext.end
    pa, pb = positions(ext), positions(twin)
    for s in meets:
        assert pa[s.t] == pb[s.t] == s

    loop = entwine(p)
    sites = loop.trace()
    assert sites[0] == sites[-1] == (0, 0)
    assert len(loop) == 2 * len(ext)
    assert all(s.t >= 0 for s in sites)
    dirs = [m.time_dir for m in loop.moves]
    assert dirs == sorted(dirs, reverse=True)  # all ascent, then all descent
    for m, a, b in loop.segments():
        assert b.x - a.x == m.space_dir and b.t - a.t == m.time_dir

    # each bond of both paths exactly once
    assert loop.channel_path(Channel.A) == ext
    assert loop.channel_path(Channel.B) == twin

    # traversal direction in time is the chessboard colour
    for m, a, b in loop.segments():
        step = max(a.t, b.t)
        if m.channel is Channel.A:
            assert m.time_dir == feynman_color(ext, step)
        else:
            assert m.time_dir == -feynman_color(twin, step)

    up = Counter(min(a.t, b.t) for m, a, b in loop.segments() if m.time_dir > 0)
    down = Counter(min(a.t, b.t) for m, a, b in loop.segments() if m.time_dir < 0)
    assert up == down  # net crossing of every slice is zero
