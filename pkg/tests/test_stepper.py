import io
import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisolevy.mesh import GridFunction, build_grid, lp_norm, read_binary, seminorm
from anisolevy.model import ModelSpec
from anisolevy.noise import sample_path
from anisolevy.operators import apply_A_dual, random_grid_function
from anisolevy.stepper import (
    NewtonDivergence,
    NonFiniteState,
    SolverConfig,
    integrate,
    interlacing_crosscheck,
    newton_solve,
    step,
)

from conftest import bump, noise_free, path_with_jumps


def test_solver_config_validation():
    for bad in (dict(newton_tol=0.0), dict(damping=1.0), dict(damping=0.0), dict(max_iters=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_zero_is_fixed_point(aniso1d):
    spec = noise_free(aniso1d)
    g = build_grid(1, 16)
    path = sample_path(spec, 0.2, 10, seed=0)
    assert not np.any(step(g.zeros(), 0, path, spec).values)
    tr = integrate(g.zeros(), path, spec)
    assert not np.any(tr.states)


def test_heat_eigen_step():
    spec = noise_free(ModelSpec(d=1, p=(2.0,), p0=2.0, zeta=(0.0,)))
    g = build_grid(1, 31)
    h = g.h_per_axis[0]
    u0 = bump(g)
    path = sample_path(spec, 0.01, 1, seed=0)
    lam = 2.0 / h**2 * (1.0 - np.cos(np.pi * h))
    np.testing.assert_allclose(step(u0, 0, path, spec).values, u0.values / (1 + 0.01 * lam), rtol=1e-12)


def test_large_jump_rule(aniso1d):
    path = path_with_jumps(aniso1d, 1)
    k = int(path.large_jump_nodes[0])
    g = build_grid(1, 16)
    tr = integrate(bump(g), path, aniso1d)
    # the state right after the jump equals the pre-jump solve plus g(u) z
    no_jump = replace(path, large_marks=np.full(len(path.times), np.nan))
    before = step(tr.state(k - 1), k - 1, no_jump, aniso1d).values
    np.testing.assert_array_equal(tr.states[k], before + aniso1d.gamma.g(before) * path.large_marks[k])
    assert tr.jump[k] and tr.jump.sum() == 1


def test_newton_basics(rng):
    g = build_grid(1, 20)
    rhs = random_grid_function(g, rng, amplitude=1.0)
    spec4 = noise_free(ModelSpec(d=1, p=(4.0,), p0=4.0, zeta=(0.0,)))
    assert np.array_equal(newton_solve(rhs, 0.0, spec4).values, rhs.values)
    with pytest.raises(ValueError):
        newton_solve(rhs, -1.0, spec4)
    from anisolevy.stepper import _System

    lin = noise_free(ModelSpec(d=1, p=(2.0,), p0=2.0, zeta=(0.0,)))
    _, iters, res = _System(g, lin, SolverConfig()).newton(rhs.values, 1e-2)
    assert iters == 1 and res <= 1e-10 * (1 + lp_norm(rhs, 2))


@given(st.integers(0, 2**31), st.sampled_from([1e-4, 1e-3, 1e-2]))
def test_newton_unique(seed, dt):
    spec = noise_free(ModelSpec(d=1, p=(4.0,), p0=4.0, zeta=(0.0,)))
    g = build_grid(1, 24)
    rhs = random_grid_function(g, np.random.default_rng(seed))
    cfg = SolverConfig()
    a = newton_solve(rhs, dt, spec, cfg)
    b = newton_solve(rhs, dt, spec, cfg, guess=g.zeros())
    assert lp_norm(a - b, 2) <= 10 * cfg.newton_tol * (1 + lp_norm(rhs, 2))
    resid = a - apply_A_dual(a, spec) * dt - rhs
    assert lp_norm(resid, 2) <= cfg.newton_tol * (1 + lp_norm(rhs, 2))


def test_newton_2d(aniso2d, rng):
    g = build_grid(2, 10)
    rhs = random_grid_function(g, rng, amplitude=2.0)
    u = newton_solve(rhs, 1e-3, aniso2d)
    assert lp_norm(u - apply_A_dual(u, aniso2d) * 1e-3 - rhs, 2) <= 1e-10 * (1 + lp_norm(rhs, 2))


def test_newton_failure_reports_history(rng):
    spec = noise_free(ModelSpec(d=1, p=(4.0,), p0=4.0, zeta=(0.0,)))
    rhs = random_grid_function(build_grid(1, 24), rng, amplitude=10.0)
    with pytest.raises(NewtonDivergence) as err:
        newton_solve(rhs, 1.0, spec, SolverConfig(max_iters=1))
    assert len(err.value.history) >= 1


def test_explicit_blowup_detected(aniso1d):
    g = build_grid(1, 64)
    path = sample_path(aniso1d, 5.0, 10, seed=0)
    with pytest.raises(NonFiniteState) as err:
        integrate(bump(g), path, aniso1d, SolverConfig(explicit=True))
    assert err.value.step is not None and err.value.history


def test_deterministic(aniso2d):
    g = build_grid(2, 8)
    path = sample_path(aniso2d, 0.1, 10, seed=3)
    a = integrate(bump(g), path, aniso2d)
    b = integrate(bump(g), sample_path(aniso2d, 0.1, 10, seed=3), aniso2d)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)


def test_heat_oracle_error_bound():
    from anisolevy.estimates import heat_oracle_error

    for n, steps in ((15, 20), (31, 40), (63, 80)):
        h, dt = 1 / (n + 1), 0.1 / steps
        assert heat_oracle_error(n, steps) <= 2.0 * (dt + h**2)


@pytest.mark.parametrize("name", ["aniso1d", "aniso2d", "quasi"])
def test_dissipative_and_energy(request, name):
    spec = noise_free(request.getfixturevalue(name))
    g = build_grid(spec.d, 12 if spec.d == 2 else 48)
    u0 = bump(g) * 3.0
    tr = integrate(u0, sample_path(spec, 0.1, 25, seed=0), spec)
    if spec.scenario == "anisotropic":
        assert np.all(np.diff(tr.l2) <= 1e-12 * tr.l2[0])
        dt = np.diff(tr.times)
        balance = tr.l2[-1] ** 2 - tr.l2[0] ** 2 + 2 * np.sum(dt * tr.energy[1:])
        assert balance <= 1e-10
    assert np.all(np.isfinite(tr.states))
    assert np.array_equal(tr.states[0], u0.values)


@pytest.mark.parametrize("jumps", [0, 1, 5])
def test_interlacing(aniso1d, jumps):
    spec = replace(aniso1d, nu=replace(aniso1d.nu, lambda_large=10.0))
    path = path_with_jumps(spec, jumps, T=0.5, n_steps=50)
    out = interlacing_crosscheck(bump(build_grid(1, 32)), path, spec)
    assert out["n_jumps"] == jumps and out["pass"]
    if jumps == 0:
        assert out["discrepancy"] == 0.0


def test_trajectory_exports(aniso1d):
    g = build_grid(1, 8)
    tr = integrate(bump(g), sample_path(aniso1d, 0.1, 6, seed=1), aniso1d)
    buf = io.StringIO()
    tr.export_jsonl(buf, spec_hash="abc")
    recs = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert len(recs) == len(tr.times) and all(r["spec_hash"] == "abc" for r in recs)
    assert recs[3]["energy"] == pytest.approx(seminorm(tr.state(3), 0, 3.0) ** 3)
    raw = io.BytesIO()
    tr.dump_states(raw, every=2)
    raw.seek(0)
    frames = []
    while (u := read_binary(raw)) is not None:
        frames.append(u.values)
    np.testing.assert_array_equal(np.array(frames), tr.states[::2])
