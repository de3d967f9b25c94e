import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagsoliton.immersions import (
    KINDS, ConeParams, Immersion, LambdaParams, ParityCase, catalog_kinds_for, from_identifier,
    self_similar_constant,
)

coprime = st.tuples(st.integers(2, 9), st.integers(1, 8)).filter(
    lambda pq: pq[0] > pq[1] and np.gcd(*pq) == 1)


def z(x):
    x = np.asarray(x)
    return x[..., 0::2] + 1j * x[..., 1::2]


def test_cone_params_validation():
    with pytest.raises(ValueError):
        ConeParams(4, 2)
    with pytest.raises(ValueError):
        ConeParams(1, 2)
    with pytest.raises(ValueError):
        ConeParams(2, 0)
    assert ConeParams(3, 1).parity_case == ParityCase.BOTH_ODD
    assert ConeParams(3, 2).parity_case == ParityCase.P_ODD_Q_EVEN
    assert ConeParams(2, 1).parity_case == ParityCase.P_EVEN_Q_ODD


def test_time_domains():
    p = ConeParams(2, 1)
    with pytest.raises(ValueError):
        Immersion("shrinker_St", p, time=1.0)
    with pytest.raises(ValueError):
        Immersion("expander_Et", p, time=-1.0)
    with pytest.raises(ValueError):
        Immersion("V_t_case2", p, time=-1.0)
    with pytest.raises(ValueError):
        Immersion("limit_S0", p, time=1.0)
    with pytest.raises(ValueError):
        Immersion("cone_pp", p, time=1.0)
    with pytest.raises(ValueError):
        Immersion("no_such_kind", p)


def test_lambda_params_validation():
    with pytest.raises(ValueError):
        LambdaParams((1.0, 0.0))
    with pytest.raises(ValueError):
        LambdaParams((1.0,))


@pytest.mark.parametrize("pq, c", [((2, 1), 1.0), ((3, 2), 3.0), ((3, 1), 0.75)])
def test_self_similar_constant(pq, c):
    assert self_similar_constant(ConeParams(*pq)) == c


def test_evaluate_examples():
    p = ConeParams(2, 1)
    assert np.allclose(Immersion("shrinker_S", p).evaluate([0.0, 0.0]), [1, 0, 0, 0], atol=1e-15)
    assert np.allclose(z(Immersion("gamma_pq", p).evaluate([0.0])), [np.sqrt(1 / 3), 1j * np.sqrt(2 / 3)])
    assert np.allclose(z(Immersion("limit_S0", p).evaluate([-1.0, 0.0])), [1, -1j * np.sqrt(2)])


def test_jet_examples():
    jet = Immersion("shrinker_S", ConeParams(2, 1)).evaluate_jet(np.array([[0.0, 0.0]]))
    assert np.allclose(jet.grad[0, :, 0], [0, 0, 0, np.sqrt(2)], atol=1e-15)
    assert np.allclose(jet.grad[0, :, 1], [0, 2, 0, 0], atol=1e-15)


def test_closed_form_examples():
    p = ConeParams(2, 1)
    ref = Immersion("shrinker_St", p, time=-1.0).closed_form_reference(np.array([[0.0, 0.3]]))
    assert ref.norm_sq[0] == pytest.approx(1.0)
    ref = Immersion("limit_S0", p).closed_form_reference(np.array([[1.0, 0.3]]))
    assert ref.h_norm_sq[0] == pytest.approx(1 / 6)
    assert ref.area_density[0] == pytest.approx(3 * np.sqrt(2))


def test_domain_errors():
    with pytest.raises(ValueError):
        Immersion("cone_pp", ConeParams(2, 1)).evaluate([-0.5, 0.0])
    with pytest.raises(ValueError):
        Immersion("shrinker_S", ConeParams(2, 1)).evaluate([0.5])
    lam = Immersion("lambda_family", LambdaParams((1.0, 1.0, -1.0), level=2.0))
    with pytest.raises(ValueError):
        lam.lambda_point([1.0, 1.0, 1.0], 0.0)


def _fd_check(imm, pts, h=1e-5):
    jet = imm.evaluate_jet(pts)
    for a in range(pts.shape[-1]):
        e = np.zeros(pts.shape[-1])
        e[a] = h
        fd = (imm.evaluate(pts + e) - imm.evaluate(pts - e)) / (2 * h)
        scale = np.maximum(np.linalg.norm(fd, axis=-1), 1.0)
        assert np.all(np.linalg.norm(jet.grad[..., a] - fd, axis=-1) / scale < 1e-6)


@pytest.mark.parametrize("kind", [k for k in KINDS if not k.startswith("lambda")])
def test_jet_vs_finite_differences(kind):
    params = ConeParams(3, 2)
    imm = next(i for i in catalog_kinds_for(params) if i.kind == kind)
    rng = np.random.default_rng(1)
    if kind == "gamma_pq":
        pts = rng.uniform(0, 2 * np.pi, (20, 1))
    else:
        u = rng.uniform(0.1, 1.5, 20) * (1 if imm.u_min is not None else rng.choice([-1, 1], 20))
        pts = np.stack([u, rng.uniform(0, 2 * np.pi, 20)], axis=-1)
    _fd_check(imm, pts)


def test_lambda_jet_vs_finite_differences():
    imm = Immersion("lambda_family", LambdaParams((1.0, -2.0, 3.0), level=1.0))
    rng = np.random.default_rng(2)
    pts = np.column_stack([rng.uniform(-0.2, 0.2, (15, 2)), rng.uniform(0, 6, 15)])
    _fd_check(imm, pts)


@given(coprime, st.floats(-2, 2), st.floats(0, 2 * np.pi))
def test_time_scaling_matches_unscaled(pq, mu, th):
    params = ConeParams(*pq)
    c = self_similar_constant(params)
    x = np.array([mu, th])
    assert np.allclose(Immersion("shrinker_St", params, time=-c).evaluate(x),
                       Immersion("shrinker_S", params).evaluate(x), atol=1e-14, rtol=1e-14)
    assert np.allclose(Immersion("expander_Et", params, time=c).evaluate(x),
                       Immersion("expander_E", params).evaluate(x), atol=1e-14, rtol=1e-14)


@given(coprime, st.floats(-3, 3), st.floats(0, 2 * np.pi))
def test_shrinker_level_set(pq, mu, th):
    p, q = pq
    w = z(Immersion("shrinker_S", ConeParams(p, q)).evaluate([mu, th]))
    assert abs(p * abs(w[0]) ** 2 - q * abs(w[1]) ** 2 - p * q) < 1e-12 * np.cosh(mu) ** 2 * p * q


@given(coprime, st.floats(0, 2 * np.pi))
def test_gamma_on_unit_sphere(pq, th):
    x = Immersion("gamma_pq", ConeParams(*pq)).evaluate([th])
    assert abs(np.sum(x**2) - 1) < 1e-14


@pytest.mark.parametrize("kind, t", [("V_t_case2", 1.0), ("V_t_case3", -1.0)])
def test_crease_continuity(kind, t):
    imm = Immersion(kind, ConeParams(3, 2) if kind == "V_t_case2" else ConeParams(2, 1), time=t)
    th = 0.7
    left, right = imm.evaluate([-1e-12, th]), imm.evaluate([1e-12, th])
    assert np.linalg.norm(left - right) < 1e-10
    dl = imm.evaluate_jet(np.array([[-1e-9, th]])).grad[0, :, 0]
    dr = imm.evaluate_jet(np.array([[1e-9, th]])).grad[0, :, 0]
    assert np.linalg.norm(dl - dr) > 0.1


def test_special_lagrangian_member_angle_constant():
    imm = Immersion("lambda_family", LambdaParams((1.0, 2.0, -3.0)))
    assert imm.beta_slope == 0
    with pytest.raises(ValueError):
        imm.soliton_coefficient


def test_catalog_and_identifiers():
    kinds = {i.kind for i in catalog_kinds_for(ConeParams(5, 2))}
    assert kinds == set(KINDS) - {"lambda_family", "lambda_family_t"}
    imm = from_identifier("limit_V0_case2", 3, 2)
    assert imm.kind == "limit_V0_case2" and imm.params == ConeParams(3, 2)
    lam = from_identifier("lambda_family_t", lambdas=(2.0, 1.0), time=-0.5)
    assert lam.level == pytest.approx(3.0)


def test_radial_intervals_cover_support():
    imm = Immersion("shrinker_St", ConeParams(3, 2), time=-1.0)
    for lo, hi in imm.radial_intervals(0.0, 2.5):
        for u in (lo, hi):
            assert imm.norm_sq_of_u(u) <= 2.5**2 + 1e-9
