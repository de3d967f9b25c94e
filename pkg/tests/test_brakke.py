import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from lagsoliton import brakke
from lagsoliton.brakke import (
    annular_bump, boundary_cancellation, boundary_first_variation, classify_divergence, degree2_fields,
    first_variation, flow_check, limit_match, link_bump, mass, mass_time_derivative, off_image_bump,
    q1_witness_field, radial_bump, reduced_model, shifted_bump, surface_integrals, theorem_families,
    truncated_area, truncated_curvature_integral,
)
from lagsoliton.immersions import ConeParams, Immersion

P21, P32, P31 = ConeParams(2, 1), ConeParams(3, 2), ConeParams(3, 1)


# -- test functions -------------------------------------------------------------


@given(st.floats(0.2, 3), st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_bump_is_c1_nonnegative_and_supported(radius, center, x):
    phi = shifted_bump(center, radius)
    x = np.asarray(x)
    assert phi.value(x) >= 0
    if np.linalg.norm(x - center) >= radius:
        assert phi.value(x) == 0 and np.all(phi.gradient(x) == 0)
    h = 1e-6
    fd = [(phi.value(x + h * e) - phi.value(x - h * e)) / (2 * h) for e in np.eye(4)]
    assert np.allclose(phi.gradient(x), fd, atol=1e-5)


def test_annular_bump_vanishes_at_origin():
    phi = annular_bump(1.0, 0.5)
    assert phi.value_at_origin == 0
    with pytest.raises(ValueError):
        annular_bump(0.5, 1.0)
    with pytest.raises(ValueError):
        brakke.TestFunction("radial_bump", 1.0, (1.0, 0, 0, 0))


# -- mass and first variation ----------------------------------------------------


def test_truncated_area_vs_antiderivative():
    p, q, R = 2, 1, 2.0
    imm = Immersion("shrinker_St", P21, time=-1.0)
    m = np.arcsinh(np.sqrt((R * R - q) / (p + q)))      # q cosh^2 + p sinh^2 = R^2
    F = lambda u: ((p + q) / 4) * np.sinh(2 * u) + ((p - q) / 2) * u
    exact = np.sqrt(p * q) * 2 * np.pi * (F(m) - F(-m))
    got = truncated_area(imm, R).value
    assert abs(got / exact - 1) < 1e-8
    # constant-density closed form for the curvature addend
    h2 = truncated_curvature_integral(imm, R).value
    assert abs(h2 / ((p - q) ** 2 / np.sqrt(p * q) * 2 * np.pi * 2 * m) - 1) < 1e-8
    assert h2 >= 0


def test_limit_mass_vs_one_dimensional_integral():
    imm = Immersion("limit_S0", P21)
    phi = radial_bump(1.0)
    exact = 2 * np.pi * 2 * quad(lambda y: (1 - 3 * y * y) ** 2 * y * np.sqrt(2) * 3, 0, 1 / np.sqrt(3))[0]
    assert abs(mass(imm, phi).value / exact - 1) < 1e-8


def test_limit_first_variation_vs_one_dimensional_integral():
    imm = Immersion("limit_S0", P21)
    phi = annular_bump(1.0, 0.5)
    psi = lambda y: phi.value(np.array([np.sqrt(3) * y, 0, 0, 0]))
    curv = 2 * np.pi * 2 * quad(lambda y: psi(y) / (np.sqrt(2) * y), 0.5 / np.sqrt(3), 1.5 / np.sqrt(3))[0]
    fv = first_variation(imm, phi)
    assert abs(fv.curvature_term / -curv - 1) < 1e-8
    # the position vector is tangent to a cone, so a radial Dphi pairs to zero with h
    assert abs(fv.gradient_term) < 1e-12


def test_empty_support():
    for kind, t in [("shrinker_St", -1.0), ("V_t_case2", 1.0), ("limit_S0", None)]:
        imm = Immersion(kind, P32, time=t)
        r = surface_integrals(imm, shifted_bump((40.0, 0, 0, 0), 1.0))
        assert r.empty and r.mass == 0
        assert mass(imm, off_image_bump(P32)).value < 1e-14


def test_first_variation_divergent_on_limit():
    fv = first_variation(Immersion("limit_E0", P31), radial_bump(0.5))
    assert fv.divergent and fv.value == float("-inf")


def test_density_identity_pointwise():
    for kind, t in [("shrinker_St", -0.5), ("expander_Et", 1.0), ("V_t_case3", -1.0)]:
        r = surface_integrals(Immersion(kind, P21, time=t), radial_bump(2.0))
        assert r.density_identity < 1e-10


def test_support_identity():
    imm = Immersion("expander_Et", P32, time=1.0)
    for phi in (radial_bump(2.0), annular_bump(2.5, 1.0), link_bump(P32, 2.0, 1.5)):
        a = surface_integrals(imm, phi)
        b = surface_integrals(imm, phi, pad=3.0)
        # the enlarged range moves the profile's C^1 edge inside a panel, so
        # agreement is judged against the reported error estimates
        assert abs(a.mass - b.mass) <= a.errors["mass"] + b.errors["mass"] + 1e-12 * (1 + abs(a.mass))
    # and phi vanishes identically on the added parameter range
    phi = radial_bump(2.0)
    (lo, hi), = [iv for iv in brakke._u_intervals(imm, phi, 1.0, 0.0) if iv[1] > 0]
    u = np.linspace(hi, 3 * hi, 200)[1:]
    th = np.linspace(0, 2 * np.pi, 64)
    U, T = np.meshgrid(u, th)
    assert np.all(phi.value(imm.evaluate(np.stack([U.ravel(), T.ravel()], axis=-1))) == 0)


def test_quadrature_order_doubling():
    imm = Immersion("shrinker_St", P32, time=-1.0)
    for phi in (radial_bump(3.0), annular_bump(2.0, 1.5)):
        a = surface_integrals(imm, phi, order=16)
        b = surface_integrals(imm, phi, order=32)
        for key in ("mass", "h2", "dphi_h"):
            va, vb = getattr(a, key), getattr(b, key)
            assert abs(va - vb) <= a.errors[key] + b.errors[key] + 1e-13 * (1 + abs(va))


@given(st.floats(0.5, 4.0), st.floats(0.1, 3.0))
def test_curvature_integral_nonnegative(radius, t):
    assert truncated_curvature_integral(Immersion("expander_Et", P21, time=t), radius, tol=1e-8).value >= 0


# -- time derivative and limits -------------------------------------------------------


def test_mass_derivative_refuses_tiny_t():
    with pytest.raises(ValueError):
        mass_time_derivative(Immersion("shrinker_St", P21, time=-1e-7), radial_bump(1.0))


@pytest.mark.parametrize("kind, params, t", [
    ("shrinker_St", P21, -1.0), ("expander_Et", P32, 1.0), ("V_t_case2", P32, 1.0),
])
def test_smooth_flow_identity_examples(kind, params, t):
    fc = flow_check(Immersion(kind, params, time=t), annular_bump(1.0, 0.5))
    assert fc.residual < 1e-5 * (1 + abs(fc.first_variation))


def test_limit_match_refuses_and_divergence_refuses():
    imm = Immersion("shrinker_St", P21, time=-1.0)
    with pytest.raises(ValueError):
        limit_match(imm, radial_bump(0.5))
    with pytest.raises(ValueError):
        classify_divergence(imm, annular_bump(1.0, 0.5))


def test_limit_match_examples():
    r = limit_match(Immersion("shrinker_St", P21, time=-1.0), annular_bump(1.0, 0.5))
    assert r.passed and r.side == "0-"
    r = limit_match(Immersion("V_t_case2", P32, time=1.0), annular_bump(1.0, 0.5))
    assert r.passed and r.side == "0+"


def test_both_odd_targets_agree():
    phi = annular_bump(1.0, 0.5)
    left = first_variation(Immersion("limit_S0", P31), phi).value
    right = first_variation(Immersion("limit_E0", P31), phi).value
    assert abs(left - right) < 1e-8


def test_reduced_model_log_growth():
    eps = 1e-3 * 2.0 ** -np.arange(12)
    vals = reduced_model(0.5, eps)
    slope = np.polyfit(np.log(1 / eps), vals, 1)[0]
    assert abs(slope - 1) < 1e-3
    assert np.allclose(vals, 2 * np.arcsinh(0.5 / np.sqrt(eps)))


def test_divergence_example():
    fit = classify_divergence(Immersion("shrinker_St", P21, time=-1.0), radial_bump(0.5))
    assert fit.divergence_class == "minus_infinity"
    assert fit.slope > 3 * fit.slope_stderr
    assert fit.relative_mismatch < 0.1


# -- boundary terms ----------------------------------------------------------------------


@pytest.mark.parametrize("p, q, expected", [(3, 2, 0), (5, 3, 0), (2, 1, 1)])
def test_boundary_cancellation_examples(p, q, expected):
    assert abs(boundary_cancellation(p, q) - expected) < 1e-14


def test_boundary_cancellation_requires_coprime():
    with pytest.raises(ValueError):
        boundary_cancellation(4, 2)


@given(st.integers(2, 12).flatmap(lambda q: st.tuples(st.integers(q + 1, 40), st.just(q))).filter(
    lambda pq: np.gcd(*pq) == 1))
def test_cancellation_property(pq):
    assert abs(boundary_cancellation(*pq)) < 1e-12


def test_boundary_terms():
    const = degree2_fields()[0][1]
    for t in (-1.0, 1.0):
        kind = "shrinker_St" if t < 0 else "expander_Et"
        assert abs(boundary_first_variation(Immersion(kind, P32, time=t, half_domain=True), const)) < 1e-12
    for _, W in degree2_fields():
        assert abs(boundary_first_variation(Immersion("expander_Et", ConeParams(5, 3), time=1.0, half_domain=True), W)) < 1e-10
    q1 = Immersion("expander_Et", P21, time=1.0, half_domain=True)
    assert abs(boundary_first_variation(q1, q1_witness_field(2))) > 1.0
    with pytest.raises(ValueError):
        boundary_first_variation(Immersion("expander_Et", P21, time=1.0), const)


def test_theorem_families():
    with pytest.raises(ValueError, match="q > 1"):
        theorem_families("1.2", P21)
    assert [f.kind for f in theorem_families("1.1", P31)] == ["shrinker_St", "expander_Et"]
    assert [f.kind for f in theorem_families("1.1", P32)] == ["shrinker_St", "V_t_case2"]
    assert [f.kind for f in theorem_families("1.1", P21)] == ["V_t_case3", "expander_Et"]
    assert all(f.half_domain for f in theorem_families("1.2", P32))


def test_flow_suite_bumps_avoid_tangent_slices():
    from lagsoliton.suites import FLOW_FAMILIES, flow_test_functions, sweep_pairs
    for p, q in sweep_pairs():
        params = ConeParams(p, q)
        edges = flow_test_functions(params)[1].window()
        for kind, sign in FLOW_FAMILIES:
            for t in (0.25, 1.0, 4.0):
                r0 = Immersion(kind, params, time=sign * t).min_norm
                # finite-difference steps move r0 by about 1%
                assert min(abs(r0 - e) for e in edges) > 0.05 * r0
