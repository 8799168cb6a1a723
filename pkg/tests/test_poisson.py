import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonlie.liealg import LieAlgebraError, build_algebra
from poissonlie.poisson import (
    CHART_KINDS,
    SmoothMap,
    _Ad_matrix,
    build_chart,
    closed_form_bivector,
    cross_block_operator,
    exp_jacobians,
    groupoid_iso_check,
    jacobiator_norm,
    linear_map,
    momentum_generation_residual,
    poisson_map_residual,
)
from poissonlie.rmatrix import constant_r

from conftest import random_group

NU, THETA = 0.35, 0.3


def make(kind, alg, rng, **kw):
    if alg.kind == "su_compact":
        return build_chart(kind, alg, theta=THETA, base_point=random_group(alg, rng), **kw)
    return build_chart(kind, alg, nu=NU, base_point=random_group(alg, rng), **kw)


def point(chart, rng, r=0.3):
    s = THETA if chart.algebra.kind == "su_compact" else 2 * NU
    return np.concatenate([rng.uniform(-r, r, b.size) * (s if b.name.startswith("omega") else 1)
                           for b in chart.blocks])


SPLIT = ["sklyanin", "sts_log", "heisenberg", "wznw_groupoid", "canonical_groupoid"]
COMPACT = ["sklyanin", "wznw_groupoid", "compact_heisenberg", "compact_groupoid"]


def test_seven_kinds():
    assert set(SPLIT) | set(COMPACT) == set(CHART_KINDS) and len(CHART_KINDS) == 7


@pytest.mark.parametrize("kind", SPLIT)
def test_split_charts_antisymmetric_and_jacobi(sl2, rng, kind):
    chart = make(kind, sl2, rng)
    x = point(chart, rng)
    P = chart.bivector(x)
    assert np.abs(P + P.T).max() < 1e-14
    assert jacobiator_norm(chart, x) < 1e-6


@pytest.mark.parametrize("kind", COMPACT)
def test_compact_charts_antisymmetric_and_jacobi(su2, rng, kind):
    chart = make(kind, su2, rng)
    x = point(chart, rng)
    P = chart.bivector(x)
    assert np.abs(P + P.T).max() < 1e-14
    assert jacobiator_norm(chart, x) < 1e-6


@pytest.mark.parametrize("kind", ["wznw_groupoid"])
def test_sl3_groupoid_jacobi(sl3, rng, kind):
    chart = make(kind, sl3, rng)
    assert jacobiator_norm(chart, point(chart, rng)) < 1e-6


def test_perturbed_K_breaks_jacobi(sl2, su2, rng):
    vals = []
    for _ in range(5):
        c = make("wznw_groupoid", sl2, rng, K_scale=1.1)
        vals.append(jacobiator_norm(c, point(c, rng)))
    assert np.mean(vals) > 1e-3
    vals = []
    for _ in range(5):
        c = make("compact_groupoid", su2, rng, K_scale=-1.0)
        vals.append(jacobiator_norm(c, point(c, rng)))
    assert np.mean(vals) > 1e-3


def test_bivectors_vanish_at_origin_of_momentum(sl2, su2):
    assert np.abs(build_chart("sts_log", sl2, nu=NU).bivector(np.zeros(3))).max() == 0
    ch = build_chart("compact_heisenberg", su2, theta=THETA).restrict("omega")
    assert np.abs(ch.bivector(np.zeros(3))).max() == 0


def test_monodromy_block_closed_form(sl3, rng):
    chart = make("wznw_groupoid", sl3, rng)
    x = point(chart, rng)
    Rop = constant_r(sl3, scale=2 * NU).operator
    assert np.abs(chart.block(x, "m") - closed_form_bivector(sl3, x[16:], Rop, 1, NU)).max() < 1e-13


def test_double_blocks_closed_form(sl2, rng):
    R = constant_r(sl2).operator
    w = rng.uniform(-0.2, 0.2, 3)
    sts = build_chart("sts_log", sl2, nu=NU)
    assert np.abs(sts.bivector(w) - closed_form_bivector(sl2, w, R, 2 * NU, 0.5)).max() < 1e-13
    g0 = random_group(sl2, rng)
    heis = build_chart("heisenberg", sl2, nu=NU, base_point=g0)
    x = np.r_[rng.uniform(-0.3, 0.3, 3), w]
    JR, _ = exp_jacobians(sl2, x[:3], _Ad_matrix(sl2, np.linalg.inv(g0)))
    V = np.linalg.inv(JR) @ heis.block(x, "g", "omega") @ sl2.bilinear_form
    assert np.abs(V - cross_block_operator(sl2, w, R, 2 * NU, 0.5)).max() < 1e-13


def test_monodromy_map_to_double(sl2, rng):
    src = make("wznw_groupoid", sl2, rng).restrict("m")
    tgt = build_chart("sts_log", sl2, nu=NU)
    m = rng.uniform(-0.3, 0.3, 3)
    assert np.abs(poisson_map_residual(linear_map(src, tgt, 2 * NU * np.eye(3)), m)).max() < 1e-13
    assert np.linalg.norm(poisson_map_residual(linear_map(src, tgt, NU * np.eye(3)), m)) > 1e-2


def test_smooth_map_fd_jacobian(sl2, rng):
    src = make("wznw_groupoid", sl2, rng).restrict("m")
    tgt = build_chart("sts_log", sl2, nu=NU)
    phi = SmoothMap(src, tgt, lambda x: 2 * NU * x)
    m = rng.uniform(-0.3, 0.3, 3)
    assert np.abs(poisson_map_residual(phi, m)).max() < 1e-9


def test_groupoid_isomorphism(sl2, rng):
    g0 = random_group(sl2, rng)
    x = rng.uniform(-0.3, 0.3, 9)
    assert groupoid_iso_check(NU, sl2, x, g0)["residual"] < 1e-12
    assert groupoid_iso_check(NU, sl2, x, g0, K_sign=-1)["residual"] > 1e-3
    assert groupoid_iso_check(NU, sl2, x, g0, exponent=NU)["residual"] > 1e-2


@pytest.mark.parametrize("which", ["g", "Omega"])
def test_momentum_generation(sl3, rng, which):
    chart = make("heisenberg", sl3, rng)
    x = point(chart, rng)
    T = rng.uniform(-1, 1, 8)
    assert np.abs(momentum_generation_residual(chart, x, T, which)).max() < 1e-12
    with pytest.raises(ValueError):
        momentum_generation_residual(chart, x, T, "m")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.3, 0.3), min_size=3, max_size=3))
def test_abelian_limit(m):
    alg = build_algebra("sl_split", 1)
    chart = build_chart("wznw_groupoid", alg, nu=0.0, r_data=constant_r(alg, scale=0.0)).restrict("m")
    m = np.array(m)
    G = alg.bilinear_form
    lhs = G @ chart.bivector(m) @ G
    rhs = -np.einsum("abc,cd,d->ab", alg.structure_constants, G, m)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_chart_errors(sl2, su2):
    with pytest.raises(ValueError):
        build_chart("torus", sl2, nu=NU)
    with pytest.raises(LieAlgebraError):
        build_chart("compact_heisenberg", sl2, theta=THETA)
    with pytest.raises(LieAlgebraError):
        build_chart("heisenberg", su2, nu=NU)
    with pytest.raises(ValueError):
        build_chart("sts_log", sl2, nu=NU).bivector(np.zeros(4))


def test_describe(sl2):
    d = build_chart("canonical_groupoid", sl2, nu=NU).describe()
    assert d["dimension"] == 9 and [b["name"] for b in d["blocks"]] == ["omega_tilde", "g", "omega"]
