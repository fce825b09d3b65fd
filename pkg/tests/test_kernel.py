import io
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chessboard.kernel import (
    Convention,
    GuardError,
    KernelCell,
    KernelParams,
    complex_kernel,
    count_paths,
    enumerate_kernel,
    kernel_table,
    phi_components,
    signed_kernel,
    write_table_csv,
)
from chessboard.paths import Site

BUILDERS = [kernel_table, enumerate_kernel]

# t_max=3, start=+, a=0.5: the four 3-step paths ++ +, ++-, +-+, +--
T3_HALF = {
    ((3, 3), 1): (1.0, 0.0, 0.0, 0.0),
    ((1, 3), 1): (0.0, 0.0, 0.25, 0.0),
    ((1, 3), -1): (0.0, 0.5, 0.0, 0.0),
    ((-1, 3), -1): (0.0, 0.5, 0.0, 0.0),
}


@pytest.mark.parametrize("build", BUILDERS)
def test_single_step_table(build):
    table = build(KernelParams(1, 0.7), 1)
    cells = list(table.cells())
    assert cells == [(Site(1, 1), 1, KernelCell((1.0, 0.0, 0.0, 0.0)))]


@pytest.mark.parametrize("build", BUILDERS)
def test_three_step_table(build):
    table = build(KernelParams(3, 0.5), 1)
    got = {(tuple(s), e): c.w for s, e, c in table.cells(3)}
    assert got == T3_HALF


@pytest.mark.parametrize("build", BUILDERS)
def test_two_step_table_unit_weight(build):
    table = build(KernelParams(2, 1.0), 1)
    got = {(tuple(s), e): c.w for s, e, c in table.cells(2)}
    assert got == {((2, 2), 1): (1.0, 0, 0, 0), ((0, 2), -1): (0, 1.0, 0, 0)}


@pytest.mark.parametrize("build", BUILDERS)
def test_zero_weight_kills_turning_paths(build):
    table = build(KernelParams(3, 0.0), 1)
    nonzero = [(s, e) for s, e, c in table.cells(3) if any(c.w)]
    assert nonzero == [(Site(3, 3), 1)]
    assert table.cell(Site(3, 3), 1).w == (1.0, 0, 0, 0)


def test_enumeration_guard():
    with pytest.raises(GuardError):
        enumerate_kernel(KernelParams(21, 0.5))


@pytest.mark.parametrize("t_max", [1, 5, 10])
@pytest.mark.parametrize("a", [0.0, 0.3, 2.0])
@pytest.mark.parametrize("start", [1, -1])
def test_dp_matches_enumeration(t_max, a, start):
    p = KernelParams(t_max, a)
    assert kernel_table(p, start).max_abs_diff(enumerate_kernel(p, start)) <= 1e-12


def test_absent_cells_read_as_zero():
    table = kernel_table(KernelParams(3, 0.5), 1)
    assert table.cell(Site(5, 3), 1).w == (0, 0, 0, 0)
    assert table.cell(Site(2, 3), 1).w == (0, 0, 0, 0)
    assert table.cell(Site(-3, 3), -1).w == (0, 0, 0, 0)  # unreachable from start=+
    assert complex_kernel(table, Site(0, 9), 1) == 0


@pytest.mark.parametrize(
    "w, phi",
    [((1, 0, 0, 0), (1, 0)), ((0, 0.5, 0.25, 0), (-0.25, 0.5)), ((0, 0, 0, 0), (0, 0))],
)
def test_phi_components(w, phi):
    assert phi_components(KernelCell(w)) == phi


@pytest.mark.parametrize("w, g", [((1, 0, 0, 0), 1), ((0, 0.5, 0.25, 0), 0.25)])
def test_signed_kernel(w, g):
    assert signed_kernel(KernelCell(w)) == g


def test_signed_kernel_is_phi_sum():
    rng = random.Random(11)
    for _ in range(10_000):
        cell = KernelCell(tuple(rng.uniform(0, 10) for _ in range(4)))
        phi_r, phi_i = phi_components(cell)
        assert signed_kernel(cell) == pytest.approx(phi_r + phi_i, abs=1e-12)


def test_complex_kernel_conventions():
    feyn = kernel_table(KernelParams(3, 0.5, Convention.FEYNMAN), 1)
    gersch = kernel_table(KernelParams(3, 0.5, Convention.GERSCH), 1)
    assert complex_kernel(kernel_table(KernelParams(1, 0.5), 1), Site(1, 1), 1) == 1 + 0j
    assert complex_kernel(feyn, Site(1, 3), 1) == -0.25 + 0j
    assert complex_kernel(feyn, Site(1, 3), -1) == 0.5j
    assert complex_kernel(gersch, Site(1, 3), -1) == -0.5j


@pytest.mark.parametrize(
    "args, expected",
    [
        ((3, 3, 1, 1, 0), 1),
        ((1, 3, 1, 1, 2), 1),
        ((1, 3, 1, 1, 1), 0),
        ((1, 3, -1, 1, 1), 1),
        ((2, 3, 1, 1, 0), 0),
        ((1, 3, 1, 1, 5), 0),
    ],
)
@pytest.mark.parametrize("backend", ["dp", "enumerate"])
def test_count_paths(args, expected, backend):
    assert count_paths(*args, backend=backend) == expected


def test_count_paths_backends_agree():
    for t in range(1, 11):
        for x in range(-t, t + 1, 2):
            for end in (1, -1):
                for start in (1, -1):
                    for R in range(t):
                        assert count_paths(x, t, end, start, R) == count_paths(
                            x, t, end, start, R, backend="enumerate"
                        )


def test_count_paths_large_t_is_exact():
    # all paths with first step +: 2**(t-1) in total
    t = 80
    total = sum(
        count_paths(x, t, e, 1, R)
        for x in range(-t, t + 1, 2)
        for e in (1, -1)
        for R in range(t)
    )
    assert total == 2 ** (t - 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.sampled_from([0.0, 0.25, 0.5, 1.0, 1.7]))
def test_counts_rebuild_table(t_max, a):
    table = kernel_table(KernelParams(t_max, a), 1)
    t = t_max
    for site, end, cell in table.cells(t):
        rebuilt = [0.0] * 4
        for R in range(t):
            rebuilt[R % 4] += count_paths(site.x, t, end, 1, R) * a**R
        assert np.allclose(rebuilt, cell.w, rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(0, 3), st.sampled_from([1, -1]))
def test_table_invariants(t_max, a, start):
    table = kernel_table(KernelParams(t_max, a), start)
    assert (table.w >= 0).all()
    for t in range(1, t_max + 1):
        assert table.w[t].sum() == pytest.approx((1 + a) ** (t - 1), rel=1e-12)
    for site, end, cell in table.cells():
        if end == start:
            assert cell.w[1] == cell.w[3] == 0
        else:
            assert cell.w[0] == cell.w[2] == 0
        assert abs(site.x) <= site.t and (site.x - site.t) % 2 == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.floats(0, 3))
def test_mirror_symmetry(t_max, a):
    plus = kernel_table(KernelParams(t_max, a), 1)
    minus = kernel_table(KernelParams(t_max, a), -1)
    for site, end, cell in minus.cells():
        assert plus.cell(Site(-site.x, site.t), -end) == cell
    assert plus.mirrored().max_abs_diff(minus) == 0


def test_csv_slice_export():
    buf = io.StringIO()
    write_table_csv(kernel_table(KernelParams(3, 0.5), 1), buf, 3)
    assert buf.getvalue().splitlines() == [
        "t,x,end_dir,w0,w1,w2,w3,phi_r,phi_i,g",
        "3,-1,-1,0,0.5,0,0,0,0.5,0.5",
        "3,1,-1,0,0.5,0,0,0,0.5,0.5",
        "3,1,+1,0,0,0.25,0,-0.25,0,-0.25",
        "3,3,+1,1,0,0,0,1,0,1",
    ]


def test_csv_uses_17_significant_digits():
    buf = io.StringIO()
    write_table_csv(kernel_table(KernelParams(2, 1 / 3), 1), buf, 2)
    row = buf.getvalue().splitlines()[1].split(",")
    assert row[4] == format(1 / 3, ".17g") == "0.33333333333333331"


def test_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0, 0.5)
    with pytest.raises(ValueError):
        KernelParams(3, -0.1)
    with pytest.raises(ValueError):
        KernelParams(3, float("nan"))
    assert KernelParams(3, 0.5, "gersch").convention is Convention.GERSCH
