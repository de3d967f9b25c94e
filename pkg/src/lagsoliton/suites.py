"""Named verification suites.  Each returns a :class:`SuiteReport` whose cells
hold the individual checks; the CLI and the acceptance tests share them."""

from math import gcd

import numpy as np

from . import brakke, cones
from .complex_space import circular_distance, symplectic_form
from .controls import EXP_MU_SURFACE, GRADIENT_GRAPH, fd_angle_laplacian, graph_angle_laplacian
from .immersions import ConeParams, Immersion, LambdaParams, catalog_kinds_for
from .lagrangian_calculus import (
    hamiltonian_stationarity_residual, induced_metric, lagrangian_angle, lagrangian_residual,
    mean_curvature, mean_curvature_sff, self_similarity_residual,
)
from .report_io import Cell, Check, SuiteReport

DEFAULT_TOLERANCES = {
    "lagrangian": 1e-12,
    "concordance": 1e-10,
    "angle": 1e-10,
    "soliton": 1e-9,
    "stationarity": 1e-9,
    "control": 1e-3,
    "flow": 1e-5,
    "limit": 1e-3,
    "boundary": 1e-10,
    "cancellation": 1e-12,
    "coincident": 1e-3,
    "distinct": 0.05,
    "reparam": 1e-12,
    "model": 0.1,
}

DEFAULT_LAMBDAS = ((1.0, 1.0), (2.0, 1.0), (1.0, 2.0, -3.0), (1.0, -2.0, 3.0, 1.0), (2.0, -1.0))


def sweep_pairs(p_max=5):
    """All coprime (p, q) with 1 <= q < p <= p_max."""
    return [(p, q) for p in range(2, p_max + 1) for q in range(1, p) if gcd(p, q) == 1]


def _tol(tolerances, key):
    return (tolerances or {}).get(key, DEFAULT_TOLERANCES[key])


def _max(x):
    return float(np.max(x)) if np.size(x) else 0.0


def parameter_grid(imm, n):
    """n x n grid (n^2 for curves) avoiding u = 0 and the chart edge."""
    s = (np.arange(n) + 0.37) / n
    theta = 2 * np.pi * (np.arange(n) + 0.21) / n
    if imm.kind == "gamma_pq":
        return (2 * np.pi * (np.arange(n * n) + 0.21) / (n * n))[:, None]
    if imm.kind.startswith("lambda"):
        lam = np.abs(np.asarray(imm.params.lambdas))
        m = max(2, min(n, int(round(400 ** (1 / imm.domain_dim)))))
        a = 0.5 * np.sqrt(abs(imm.level) / np.sum(lam))
        axes = [a * (2 * (np.arange(m) + 0.37) / m - 1)] * (imm.domain_dim - 1) + [2 * np.pi * (np.arange(m) + 0.21) / m]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, imm.domain_dim)
    u = 1.5 * s if imm.u_min is not None else 1.5 * (2 * s - 1)
    U, T = np.meshgrid(u, theta, indexing="ij")
    return np.stack([U.ravel(), T.ravel()], axis=-1)


def _rel(a, b):
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


# -- immersion geometry --------------------------------------------------------


def immersion_cell(imm, n, tolerances=None):
    pts = parameter_grid(imm, n)
    jet = imm.evaluate_jet(pts)
    ref = imm.closed_form_reference(pts)
    g, dens = induced_metric(jet)
    norm = np.sum(jet.value**2, axis=-1)
    checks = []
    tol_c = _tol(tolerances, "concordance")
    tag = f"{imm.kind}" + (" half" if imm.half_domain else "")
    if imm.kind == "gamma_pq":
        H = mean_curvature_sff(jet, g)
        legendre = np.abs(symplectic_form(jet.value, jet.grad[..., 0]))
        checks += [
            Check("Legendrian residual", _max(legendre), _tol(tolerances, "lagrangian"),
                  _max(legendre) < _tol(tolerances, "lagrangian")),
            Check("|F|^2 closed form", _max(_rel(norm, ref.norm_sq)), tol_c, _max(_rel(norm, ref.norm_sq)) < tol_c),
            Check("speed closed form", _max(_rel(dens, ref.area_density)), tol_c,
                  _max(_rel(dens, ref.area_density)) < tol_c),
            Check("|curvature|^2 closed form", _max(_rel(np.sum(H * H, -1), ref.h_norm_sq)), tol_c,
                  _max(_rel(np.sum(H * H, -1), ref.h_norm_sq)) < tol_c),
        ]
        return Cell(f"p{imm.params.p}q{imm.params.q}/{tag}", checks, {"points": len(pts)})
    lag = lagrangian_residual(jet)
    checks.append(Check("Lagrangian residual", _max(lag), _tol(tolerances, "lagrangian"),
                        _max(lag) < _tol(tolerances, "lagrangian")))
    H = mean_curvature(jet, g, imm.beta_gradient(pts))
    h2 = np.sum(H * H, axis=-1)
    scale = np.max(np.abs(ref.metric), axis=(-1, -2)) if ref.metric is not None else None
    pairs = [("|F|^2", norm, ref.norm_sq), ("area density", dens, ref.area_density), ("|H|^2", h2, ref.h_norm_sq)]
    for name, got, want in pairs:
        err = _max(_rel(got, want))
        checks.append(Check(f"{name} closed form", err, tol_c, err < tol_c))
    if ref.metric is not None:
        for (a, b), name in (((0, 0), "g11"), ((1, 1), "g22"), ((0, 1), "g12")):
            err = _max(np.abs(g[..., a, b] - ref.metric[..., a, b]) / scale)
            checks.append(Check(f"{name} closed form", err, tol_c, err < tol_c))
        p, q = imm.params.p, imm.params.q
        const = (p - q) ** 2 / np.sqrt(p * q)
        want = const / np.abs(pts[:, 0]) if (imm.is_conical or imm.is_limit) else const
        err = _max(_rel(h2 * dens, want))
        checks.append(Check("|h|^2 density identity", err, tol_c, err < tol_c))
    beta, _ = lagrangian_angle(jet, g)
    err = _max(np.abs(circular_distance(beta, ref.beta)))
    checks.append(Check("Lagrangian angle closed form (mod 2 pi)", err, _tol(tolerances, "angle"),
                        err < _tol(tolerances, "angle")))
    sff = mean_curvature_sff(jet, g)
    err = _max(np.linalg.norm(sff - H, axis=-1) / np.maximum(np.linalg.norm(H, axis=-1), 1.0))
    checks.append(Check("J grad(beta) equals the trace of the second fundamental form", err, tol_c, err < tol_c))
    key = f"p{imm.params.p}q{imm.params.q}/{tag}" if isinstance(imm.params, ConeParams) else f"lambda{imm.params.lambdas}/{tag}"
    return Cell(key, checks, {"points": len(pts), "time": imm.time})


def angle_slope_cell(imm, n=64, tolerances=None):
    """beta(theta) - beta(theta_0) = slope (theta - theta_0) mod 2 pi along one theta-line."""
    base = parameter_grid(imm, 4)[1]
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    pts = np.repeat(base[None, :], n, axis=0)
    pts[:, -1] = th
    beta, _ = lagrangian_angle(imm.evaluate_jet(pts))
    err = _max(np.abs(circular_distance(beta - beta[0], imm.beta_slope * (th - th[0]))))
    key = f"{imm.kind}" + (f" p{imm.params.p}q{imm.params.q}" if isinstance(imm.params, ConeParams) else f" {imm.params.lambdas}")
    return Cell(f"angle slope/{key}", [Check("angle slope", err, _tol(tolerances, "angle"), err < _tol(tolerances, "angle"))],
                {"slope": imm.beta_slope})


def verify_immersion(pairs, grid=20, tolerances=None):
    rep = SuiteReport("verify-immersion", {"pairs": [list(p) for p in pairs], "grid": grid,
                                           "tolerances": _merged(tolerances)})
    for p, q in pairs:
        params = ConeParams(p, q)
        imms = catalog_kinds_for(params) + [
            Immersion("shrinker_St", params, time=-1.0, half_domain=True),
            Immersion("expander_Et", params, time=1.0, half_domain=True),
        ]
        for imm in imms:
            rep.cells.append(immersion_cell(imm, grid, tolerances))
        for kind in ("shrinker_S", "expander_E"):
            rep.cells.append(angle_slope_cell(Immersion(kind, params), tolerances=tolerances))
    return rep


# -- solitons and Hamiltonian stationarity -------------------------------------


def soliton_cell(imm, n, tolerances=None):
    pts = parameter_grid(imm, n)
    checks = []
    if not imm.kind.startswith("lambda") or imm.params.total != 0:
        r = self_similarity_residual(imm, pts)
        checks.append(Check(f"F_perp = {imm.soliton_coefficient:.6g} H", _max(r), _tol(tolerances, "soliton"),
                            _max(r) < _tol(tolerances, "soliton")))
    d = hamiltonian_stationarity_residual(imm, pts)
    checks.append(Check("|Delta beta|", _max(d), _tol(tolerances, "stationarity"),
                        _max(d) < _tol(tolerances, "stationarity")))
    name = f"p{imm.params.p}q{imm.params.q}" if isinstance(imm.params, ConeParams) else f"lambda{imm.params.lambdas}"
    return Cell(f"{name}/{imm.kind}" + (f" t={imm.time:g}" if imm.time is not None else ""), checks,
                {"kappa": imm.soliton_coefficient if checks[0].name.startswith("F_perp") else None})


def stationarity_controls(tolerances=None):
    """Gradient-graph control (Delta beta != 0) and the exp-mu surface for the record."""
    u = np.linspace(-1.5, 1.5, 13) + 0.05
    pts = np.stack([u, np.full_like(u, 0.3)], axis=-1)
    jet_val = hamiltonian_stationarity_residual(GRADIENT_GRAPH, pts)
    fd = fd_angle_laplacian(GRADIENT_GRAPH, pts)
    exact = graph_angle_laplacian(u)
    tol = _tol(tolerances, "control")
    checks = [
        Check("max |Delta beta| on the control exceeds", _max(jet_val), tol, _max(jet_val) > tol, comparison=">"),
        Check("jet Delta beta vs closed form", _max(np.abs(jet_val - np.abs(exact))), 1e-12,
              _max(np.abs(jet_val - np.abs(exact))) < 1e-12),
        Check("finite-difference oracle vs closed form", _max(np.abs(fd - exact)), 1e-5,
              _max(np.abs(fd - exact)) < 1e-5),
    ]
    exp_fd = fd_angle_laplacian(EXP_MU_SURFACE, pts)
    lag = lagrangian_residual(EXP_MU_SURFACE.evaluate_jet(pts))
    data = {"exp_mu_surface": {"max_fd_laplacian": _max(np.abs(exp_fd)), "lagrangian_residual": _max(lag),
                               "note": "flat metric and affine angle: Delta beta vanishes, not usable as a control"}}
    return Cell("controls/gradient graph u^3/6", checks, data)


def verify_soliton(pairs, grid=20, tolerances=None, lambdas=None):
    rep = SuiteReport("verify-soliton", {"pairs": [list(p) for p in pairs], "grid": grid,
                                         "tolerances": _merged(tolerances)})
    for p, q in pairs:
        for imm in catalog_kinds_for(ConeParams(p, q)):
            if imm.kind != "gamma_pq":
                rep.cells.append(soliton_cell(imm, grid, tolerances))
    for lam in lambdas or ():
        rep.cells.append(soliton_cell(Immersion("lambda_family", LambdaParams(tuple(lam))), grid, tolerances))
    rep.cells.append(stationarity_controls(tolerances))
    return rep


# -- lambda family ----------------------------------------------------------------


def lambda_cells(lam, level=1.0, grid=20, tolerances=None):
    params = LambdaParams(tuple(lam), level=level)
    imm = Immersion("lambda_family", params)
    pts = parameter_grid(imm, grid)
    jet = imm.evaluate_jet(pts)
    g, dens = induced_metric(jet)
    ref = imm.closed_form_reference(pts)
    tol_c = _tol(tolerances, "concordance")
    lag = _max(lagrangian_residual(jet))
    checks = [Check("Lagrangian residual", lag, _tol(tolerances, "lagrangian"), lag < _tol(tolerances, "lagrangian"))]
    for name, got, want in (("|F|^2", np.sum(jet.value**2, -1), ref.norm_sq), ("area density", dens, ref.area_density)):
        err = _max(_rel(got, want))
        checks.append(Check(f"{name} closed form", err, tol_c, err < tol_c))
    H = mean_curvature(jet, g, imm.beta_gradient(pts))
    if params.total == 0:
        checks.append(Check("|H| (special Lagrangian member)", _max(np.linalg.norm(H, axis=-1)), _tol(tolerances, "angle"),
                            _max(np.linalg.norm(H, axis=-1)) < _tol(tolerances, "angle")))
    else:
        err = _max(_rel(np.sum(H * H, -1), ref.h_norm_sq))
        checks.append(Check("|H|^2 closed form", err, tol_c, err < tol_c))
    cells = [Cell(f"lambda{params.lambdas} C={level:g}/geometry", checks, {"sum": params.total}),
             angle_slope_cell(imm, tolerances=tolerances),
             soliton_cell(imm, grid, tolerances)]
    if params.total != 0:
        t = -0.5 * level / params.total
        timp = Immersion("lambda_family_t", LambdaParams(tuple(lam), level=-2 * t * params.total), time=t)
        cells.append(soliton_cell(timp, grid, tolerances))
    return cells


def lambda_suite(lambdas_list, level=1.0, grid=20, tolerances=None):
    rep = SuiteReport("lambda", {"lambdas": [list(x) for x in lambdas_list], "level": level, "grid": grid,
                                 "tolerances": _merged(tolerances)})
    for lam in lambdas_list:
        rep.cells.extend(lambda_cells(lam, level, grid, tolerances))
    return rep


# -- Brakke flow ---------------------------------------------------------------------


def flow_test_functions(params):
    """Origin bump, annular bump and a shifted bump near the cone link at radius 2.

    The annular edges (0.76 and 3.1) stay at least 6% away from the minimum
    norms sqrt(|t| p / c), sqrt(|t| q / c) of every sweep slice at the
    default times: a support edge tangent to a slice leaves the mass only C^2
    in t there, which the finite-difference derivative cannot resolve.
    """
    link = brakke.link_bump(params, at_radius=2.0, radius=1.5)
    return [brakke.radial_bump(3.0), brakke.annular_bump(1.93, 1.17),
            brakke.shifted_bump(link.center, 1.5, label="link r=2 R=1.5")]


FLOW_FAMILIES = (("shrinker_St", -1.0), ("expander_Et", 1.0), ("V_t_case2", 1.0), ("V_t_case3", -1.0))


def brakke_suite(pairs, times=(0.25, 1.0, 4.0), tolerances=None):
    """Smooth-flow identity d/dt mass = first variation on all four families."""
    rep = SuiteReport("brakke", {"pairs": [list(p) for p in pairs], "times": list(times),
                                 "tolerances": _merged(tolerances)})
    rows = []
    for p, q in pairs:
        params = ConeParams(p, q)
        for phi in flow_test_functions(params):
            for kind, sign in FLOW_FAMILIES:
                checks, data = [], []
                for t in times:
                    fc = brakke.flow_check(Immersion(kind, params, time=sign * t), phi, _tol(tolerances, "flow"))
                    checks.append(Check(f"|dM/dt - delta| t={fc.time:g}", fc.residual, fc.tolerance,
                                        fc.residual < fc.tolerance))
                    if np.isfinite(fc.density_identity):
                        checks.append(Check(f"|h|^2 density identity t={fc.time:g}", fc.density_identity,
                                            _tol(tolerances, "concordance"),
                                            fc.density_identity < _tol(tolerances, "concordance")))
                    data.append(fc)
                    rows.append([f"p{p}q{q}", kind, phi.label, fc.time, fc.mass, fc.first_variation,
                                 fc.mass_derivative_fd])
                rep.cells.append(Cell(f"p{p}q{q}/{kind}/{phi.label}", checks, {"flow": data}))
    rep.series.append(("flow", ["pair", "family", "test_function", "t", "mass", "first_variation",
                                "mass_derivative_fd"], rows))
    return rep


def theorem_report(theorem, p, q, t0=1.0, levels=10, tolerances=None, flow_times=(1.0,)):
    params = ConeParams(p, q)
    rep = SuiteReport(f"theorem-{theorem}", {"theorem": theorem, "p": p, "q": q, "t0": t0, "levels": levels,
                                             "flow_times": list(flow_times), "tolerances": _merged(tolerances)})
    reports = brakke.theorem_suite(theorem, params, t0=t0, levels=levels, flow_times=flow_times)
    rep.cells.extend(reports)
    minus, plus = brakke.theorem_families(theorem, params)
    checks, data = [], {}
    if theorem == "1.1":
        ident = cones.IDENTITY_FOR_CASE[params.parity_case]
        r = cones.reparametrization_residual(ident, params)
        checks.append(Check(f"limit reparametrization {ident}", r, _tol(tolerances, "reparam"),
                            r < _tol(tolerances, "reparam")))
        d = cones.image_distance(brakke.limit_of(minus), brakke.limit_of(plus), samples=1024)
        checks.append(Check("t = 0 limits from both sides have the same image", d, _tol(tolerances, "coincident"),
                            d < _tol(tolerances, "coincident")))
        pair = cones.asymptotic_cone_pair(plus if params.parity_case.value == "p_odd_q_even" else minus, params)
        data["asymptotic_cones"] = [str(c) for c in pair]
        data["second_cone_reading"] = "the partner cone of the asymptotic pair for this parity case"
    else:
        s = abs(brakke.boundary_cancellation(p, q))
        checks.append(Check("roots-of-unity sum", s, _tol(tolerances, "cancellation"),
                            s < _tol(tolerances, "cancellation")))
    rep.cells.append(Cell(f"thm{theorem}/p{p}q{q}/limits", checks, data))
    for r in reports:
        for side in ("left_limit", "right_limit"):
            fit = getattr(r, side)
            name = f"{r.test_function['label']}_{fit.kind}_{side}".replace(" ", "_").replace("=", "")
            rows = [[t, v] for t, v in zip(fit.times, fit.values)]
            rep.series.append((name, ["t", "value"], rows))
    return rep


# -- cones -----------------------------------------------------------------------


def cone_cells(p, q, samples=2048, seed=0, tolerances=None):
    params = ConeParams(p, q)
    part = cones.identify_coincidences(params)
    kinds = {s: Immersion(cones._KIND_OF[s], params) for s in cones.SIGN_LABELS}
    checks = []
    for i, a in enumerate(cones.SIGN_LABELS):
        for b in cones.SIGN_LABELS[i + 1:]:
            d = cones.image_distance(kinds[a], kinds[b], 1.0, samples, seed)
            if any(a in c and b in c for c in part):
                tol = _tol(tolerances, "coincident")
                checks.append(Check(f"C{a} = C{b} (section distance)", d, tol, d < tol))
                w = cones.theta_shift_witness(a, b, params, seed=seed)
                checks.append(Check(f"theta + pi maps C{a} onto C{b}", w, _tol(tolerances, "reparam"),
                                    w < _tol(tolerances, "reparam")))
            else:
                tol = _tol(tolerances, "distinct")
                checks.append(Check(f"C{a} != C{b} (section distance)", d, tol, d > tol, comparison=">"))
    ident = cones.IDENTITY_FOR_CASE[params.parity_case]
    r = cones.reparametrization_residual(ident, params, seed=seed)
    checks.append(Check(f"reparametrization {ident}", r, _tol(tolerances, "reparam"), r < _tol(tolerances, "reparam")))
    cells = [Cell(f"p{p}q{q}/coincidences", checks,
                  {"parity_case": params.parity_case.value, "partition": [list(c) for c in part]})]
    fams = ["shrinker_St", "expander_Et"]
    fams += {"p_odd_q_even": ["V_t_case2"], "p_even_q_odd": ["V_t_case3"]}.get(params.parity_case.value, [])
    for fam in fams:
        pair = cones.asymptotic_cone_pair(fam, params)
        w = cones.convergence_witness(fam, params, samples=min(samples, 1024), seed=seed)
        cells.append(Cell(f"p{p}q{q}/asymptotic/{fam}", [
            Check("slice distance below 10 sqrt(eps)", max(d / t for d, t in zip(w.distances, w.thresholds)), 1.0,
                  all(d < t for d, t in zip(w.distances, w.thresholds))),
            Check("slice distance decreases monotonically", float(w.monotone), 1.0, w.monotone, comparison="=="),
        ], {"pair": [str(c) for c in pair], "canonical": [str(c.canonical) for c in pair],
            "times": w.times, "distances": w.distances}))
    return cells


def cones_suite(p, q, samples=2048, seed=0, tolerances=None):
    rep = SuiteReport("cones", {"p": p, "q": q, "samples": samples, "seed": seed, "tolerances": _merged(tolerances)})
    rep.cells.extend(cone_cells(p, q, samples, seed, tolerances))
    return rep


def cancellation_cell(q_max=12, tolerances=None):
    checks = []
    for q in range(1, q_max + 1):
        for p in range(q + 1, q + 2 * q + 2):
            if gcd(p, q) != 1:
                continue
            s = abs(brakke.boundary_cancellation(p, q))
            if q == 1:
                checks.append(Check(f"|sum| = 1 for (p, q) = ({p}, 1)", abs(s - 1), 1e-15, abs(s - 1) < 1e-15))
            else:
                tol = _tol(tolerances, "cancellation")
                checks.append(Check(f"|sum| for (p, q) = ({p}, {q})", s, tol, s < tol))
    return Cell("roots of unity", checks)


def sweep_suite(pairs=None, grid=20, samples=512, seed=0, tolerances=None):
    pairs = sweep_pairs() if pairs is None else pairs
    rep = SuiteReport("sweep", {"pairs": [list(p) for p in pairs], "grid": grid, "samples": samples, "seed": seed,
                                "tolerances": _merged(tolerances)})
    for sub in (verify_immersion(pairs, grid, tolerances), verify_soliton(pairs, grid, tolerances)):
        for c in sub.cells:
            c.key = f"{sub.suite}/{c.key}"
            rep.cells.append(c)
    for p, q in pairs:
        for c in cone_cells(p, q, samples, seed, tolerances):
            c.key = f"cones/{c.key}"
            rep.cells.append(c)
    rep.cells.append(cancellation_cell(tolerances=tolerances))
    return rep


def _merged(tolerances):
    out = dict(DEFAULT_TOLERANCES)
    out.update(tolerances or {})
    return out
