import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anisolevy.mesh import (
    FaceField,
    GridError,
    GridFunction,
    adjoint_div,
    build_grid,
    dumps_json,
    face_inner,
    forward_diff,
    friedrichs_constant,
    from_record,
    inner,
    lp_norm,
    read_binary,
    seminorm,
    to_record,
    write_binary,
)

# magnitudes below ~1e-150 square to zero in double precision; keep clear of that
finite = st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100))


def grid_and_values(d_max=2):
    @st.composite
    def build(draw):
        d = draw(st.integers(1, d_max))
        n = draw(st.integers(2, 12 if d == 2 else 40))
        g = build_grid(d, n)
        return g, draw(arrays(float, g.shape, elements=finite)), draw(arrays(float, g.shape, elements=finite))

    return build()


def test_spacing():
    assert build_grid(1, 3).h_per_axis == (0.25,)
    assert build_grid(2, 31).h_per_axis == (1 / 32, 1 / 32)
    for n in (2, 7, 100):
        h = build_grid(1, n).h_per_axis[0]
        assert Fraction(h).limit_denominator(10**6) * (n + 1) == 1


@pytest.mark.parametrize("d,n", [(1, 1), (3, 4), (0, 4), (2, (4, 1))])
def test_bad_grid(d, n):
    with pytest.raises(GridError):
        build_grid(d, n)


def test_forward_diff_linear_function():
    g = build_grid(1, 3)
    h = g.h_per_axis[0]
    u = GridFunction(g, np.array([h, 2 * h, 3 * h]))
    np.testing.assert_allclose(forward_diff(u, 0).values, [1.0, 1.0, 1.0, -3.0], rtol=1e-15)


def test_forward_diff_zero_and_axis_errors():
    g = build_grid(2, 4)
    assert not np.any(forward_diff(g.zeros(), 1).values)
    with pytest.raises(GridError):
        forward_diff(g.zeros(), 2)


def test_forward_diff_first_order():
    errs = []
    for n in (63, 127):
        g = build_grid(1, n)
        u = g.sample(lambda x: np.sin(np.pi * x))
        (xf,) = g.face_coords(0)
        errs.append(np.max(np.abs(forward_diff(u, 0).values - np.pi * np.cos(np.pi * xf))))
        assert errs[-1] <= 5.0 * g.h_per_axis[0]
    assert errs[1] < errs[0]


def test_adjoint_div_examples():
    g = build_grid(1, 2)
    np.testing.assert_array_equal(adjoint_div(FaceField(g, 0, np.ones(3)), 0).values, [0.0, 0.0])
    g2 = build_grid(2, 5)
    assert not np.any(adjoint_div(FaceField(g2, 1, np.zeros(g2.face_shape(1))), 1).values)
    with pytest.raises(GridError):
        FaceField(g, 0, np.ones(2))


@given(grid_and_values(), st.data())
def test_summation_by_parts(gv, data):
    g, u_vals, _ = gv
    axis = data.draw(st.integers(0, g.d - 1))
    flux = FaceField(g, axis, data.draw(arrays(float, g.face_shape(axis), elements=finite)))
    u = GridFunction(g, u_vals)
    lhs = inner(adjoint_div(flux, axis), u)
    rhs = -face_inner(flux, forward_diff(u, axis))
    scale = max(1.0, np.sum(np.abs(flux.values)) * np.max(np.abs(u_vals), initial=0) / g.h_per_axis[axis] * g.cell_volume)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(grid_and_values(), finite, finite)
def test_forward_diff_linear(gv, a, b):
    g, x, y = gv
    u, v = GridFunction(g, x), GridFunction(g, y)
    lhs = forward_diff(u * a + v * b, 0).values
    rhs = a * forward_diff(u, 0).values + b * forward_diff(v, 0).values
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + np.max(np.abs(rhs))))


def test_lp_norm_examples():
    g = build_grid(1, 3)
    assert lp_norm(g.zeros(), 2) == 0.0
    assert lp_norm(GridFunction(g, np.ones(3)), 2) == pytest.approx(np.sqrt(0.75), rel=1e-15)
    with pytest.raises(ValueError):
        lp_norm(g.zeros(), 0.5)


@given(grid_and_values(), finite, st.floats(1.0, 8.0))
def test_lp_norm_homogeneous_and_monotone(gv, c, p):
    g, x, y = gv
    u = GridFunction(g, x)
    assert lp_norm(u * c, p) == pytest.approx(abs(c) * lp_norm(u, p), rel=1e-10, abs=1e-300)
    small = GridFunction(g, np.minimum(np.abs(x), np.abs(y)))
    big = GridFunction(g, np.maximum(np.abs(x), np.abs(y)))
    assert lp_norm(small, p) <= lp_norm(big, p) * (1 + 1e-12)


def test_seminorm_spike():
    g = build_grid(1, 3)
    u = GridFunction(g, np.array([0.0, 1.0, 0.0]))
    # faces (0, 4, -4, 0); face volume h = 1/4
    assert seminorm(u, 0, 2.0) == pytest.approx(np.sqrt(8.0), rel=1e-15)
    assert seminorm(g.zeros(), 0, 3.0) == 0.0
    with pytest.raises(ValueError):
        seminorm(u, 0, 1.5)


@given(grid_and_values(), st.floats(2.0, 6.0))
def test_seminorm_triangle(gv, p):
    g, x, y = gv
    u, v = GridFunction(g, x), GridFunction(g, y)
    for i in range(g.d):
        assert seminorm(u + v, i, p) <= (seminorm(u, i, p) + seminorm(v, i, p)) * (1 + 1e-12) + 1e-12


@given(grid_and_values())
def test_inner_product(gv):
    g, x, y = gv
    u, v = GridFunction(g, x), GridFunction(g, y)
    assert inner(u, g.zeros()) == 0.0
    assert inner(u, v) == pytest.approx(inner(v, u), rel=1e-12, abs=1e-12)
    assert inner(u, u) == pytest.approx(lp_norm(u, 2) ** 2, rel=1e-12, abs=1e-300)
    assert inner(u, u) >= 0 and (inner(u, u) > 0) == bool(np.any(x))
    assert abs(inner(u, v)) <= lp_norm(u, 2) * lp_norm(v, 2) * (1 + 1e-12) + 1e-300


def test_grid_mismatch():
    with pytest.raises(GridError):
        inner(build_grid(1, 4).zeros(), build_grid(1, 5).zeros())


def test_values_finite_and_immutable():
    g = build_grid(1, 3)
    with pytest.raises(GridError):
        GridFunction(g, np.array([0.0, np.nan, 1.0]))
    u = GridFunction(g, np.ones(3))
    with pytest.raises(ValueError):
        u.values[0] = 2.0


@pytest.mark.parametrize("d,n", [(1, 15), (2, 7)])
def test_friedrichs_constant_stable(d, n, rng):
    ratios = []
    for m in (n, 2 * n + 1):
        g = build_grid(d, m)
        C = friedrichs_constant(g)
        for _ in range(50):
            u = GridFunction(g, rng.standard_normal(g.shape))
            assert lp_norm(u, 2) <= C * sum(seminorm(u, i, 2.0) for i in range(d)) * (1 + 1e-12)
        ratios.append(C)
    assert max(ratios) / min(ratios) < 1.2


@pytest.mark.parametrize("d,n", [(1, 5), (2, (3, 4))])
def test_serialization_roundtrip(d, n, rng):
    g = build_grid(d, n)
    u = GridFunction(g, rng.standard_normal(g.shape))
    back = from_record(json.loads(dumps_json(u)))
    assert back.grid == g and np.array_equal(back.values, u.values)
    assert to_record(u)["values"] == u.values.ravel().tolist()
    buf = io.BytesIO()
    write_binary(u, buf)
    write_binary(u * 2.0, buf)
    buf.seek(0)
    a, b = read_binary(buf), read_binary(buf)
    assert np.array_equal(a.values, u.values) and np.array_equal(b.values, 2 * u.values)
    assert read_binary(buf) is None
