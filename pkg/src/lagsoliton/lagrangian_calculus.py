"""Induced metric, Lagrangian angle, mean curvature and soliton residuals.

Everything works on batched :class:`~lagsoliton.jets.JetPoint` objects:
tangent vectors are the columns of ``jet.grad`` and all outputs carry the
jet's batch shape.
"""

from dataclasses import dataclass

import numpy as np

from .complex_space import apply_J, complex_determinant_of_frame, symplectic_form

DEGENERATE_DET = 1e-20


class DegenerateMetricError(ValueError):
    """Raised when a jet is evaluated on the singular locus."""


@dataclass
class GeometryAtPoint:
    metric: np.ndarray
    metric_inv: np.ndarray
    area_density: np.ndarray
    lagrangian_residual: np.ndarray
    beta: np.ndarray
    grad_beta: np.ndarray
    H: np.ndarray
    F_perp: np.ndarray
    beta_laplacian: np.ndarray


def induced_metric(jet):
    """g_ab = <dF/du^a, dF/du^b> and the area density sqrt(det g)."""
    frame = jet.grad
    g = np.einsum("...ia,...ib->...ab", frame, frame)
    det = np.linalg.det(g)
    if np.any(det < DEGENERATE_DET):
        raise DegenerateMetricError("degenerate induced metric (singular locus?)")
    return g, np.sqrt(det)


def lagrangian_residual(jet):
    """max_{a<b} |omega(dF_a, dF_b)|; zero exactly on Lagrangian immersions."""
    frame = jet.grad
    k = frame.shape[-1]
    out = np.zeros(frame.shape[:-2])
    for a in range(k):
        for b in range(a + 1, k):
            out = np.maximum(out, np.abs(symplectic_form(frame[..., a], frame[..., b])))
    return out


def orthonormal_frame(jet, metric=None):
    """Gram-Schmidt of (dF_1, ..., dF_k) in that order."""
    g = induced_metric(jet)[0] if metric is None else metric
    L = np.linalg.cholesky(g)
    # E = A L^{-T}: same flag as Gram-Schmidt, positive diagonal
    Linv_T = np.swapaxes(np.linalg.inv(L), -1, -2)
    return jet.grad @ Linv_T


def lagrangian_angle(jet, metric=None, tol=1e-8, check=True):
    """Phase of dz^1 ^ ... ^ dz^n on the oriented orthonormal frame.

    Returns (beta, modulus).  With ``check`` a modulus away from 1 raises,
    since then the frame is not Lagrangian.
    """
    e = orthonormal_frame(jet, metric)
    modulus, beta = complex_determinant_of_frame(e)
    if check and np.any(np.abs(modulus - 1.0) > tol):
        worst = float(np.max(np.abs(modulus - 1.0)))
        raise ValueError(f"holomorphic volume modulus deviates from 1 by {worst:.3e}: not Lagrangian")
    return beta, modulus


def tangent_from_gradient(jet, metric, coord_grad):
    """Ambient vector of the intrinsic gradient g^{ab} d_b f d_a F."""
    ginv = np.linalg.inv(metric)
    comps = np.einsum("...ab,...b->...a", ginv, coord_grad)
    return np.einsum("...ia,...a->...i", jet.grad, comps)


def mean_curvature(jet, metric, beta_grad):
    """H = J grad(beta) from the coordinate gradient of beta."""
    return apply_J(tangent_from_gradient(jet, metric, beta_grad))


def tangential_part(jet, metric, v):
    ginv = np.linalg.inv(metric)
    coeff = np.einsum("...ia,...i->...a", jet.grad, v)
    return np.einsum("...ia,...ab,...b->...i", jet.grad, ginv, coeff)


def mean_curvature_sff(jet, metric):
    """Trace of the second fundamental form g^{ab} (d_a d_b F)^perp.

    Independent of the Lagrangian angle; needs a second-order jet.
    """
    if jet.hess is None:
        raise ValueError("second fundamental form needs a second-order jet")
    ginv = np.linalg.inv(metric)
    trace = np.einsum("...ab,...iab->...i", ginv, jet.hess)
    return trace - tangential_part(jet, metric, trace)


def normal_projection(position, jet, metric):
    """F_perp = F - g^{ab} <F, dF_a> dF_b."""
    position = np.asarray(position)
    return position - tangential_part(jet, metric, position)


def normal_projection_jframe(position, jet, metric):
    """F_perp expanded in the normal frame J dF_a (valid on Lagrangians)."""
    ginv = np.linalg.inv(metric)
    jframe = np.stack([apply_J(jet.grad[..., a]) for a in range(jet.k)], axis=-1)
    coeff = np.einsum("...ia,...i->...a", jframe, np.asarray(position))
    return np.einsum("...ia,...ab,...b->...i", jframe, ginv, coeff)


def metric_derivative(jet):
    """d_c g_ab = <d_c d_a F, d_b F> + <d_a F, d_c d_b F>, indexed [..., c, a, b]."""
    if jet.hess is None:
        raise ValueError("metric derivatives need a second-order jet")
    t = np.einsum("...ica,...ib->...cab", jet.hess, jet.grad)
    return t + np.swapaxes(t, -1, -2)


def laplace_beltrami(jet, metric, coord_grad, coord_hess=None):
    """Delta_g f = (1/sqrt g) d_a (sqrt g g^{ab} d_b f) from jets of F and f."""
    ginv = np.linalg.inv(metric)
    dg = metric_derivative(jet)
    # d_c g^{ab} = -g^{ae} d_c g_ef g^{fb};  d_c log sqrt g = 1/2 tr(g^{-1} d_c g)
    dginv = -np.einsum("...ae,...cef,...fb->...cab", ginv, dg, ginv)
    dlog = 0.5 * np.einsum("...ab,...cba->...c", ginv, dg)
    v = np.einsum("...ab,...b->...a", ginv, coord_grad)
    out = np.einsum("...a,...a->...", dlog, v) + np.einsum("...aab,...b->...", dginv, coord_grad)
    if coord_hess is not None:
        out = out + np.einsum("...ab,...ab->...", ginv, coord_hess)
    return out


def _as_points(imm, points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    return points


def geometry_at(imm, points):
    """Full :class:`GeometryAtPoint` record for catalog immersions (batched)."""
    points = _as_points(imm, points)
    jet = imm.evaluate_jet(points)
    g, dens = induced_metric(jet)
    bgrad = imm.beta_gradient(points)
    beta, _ = lagrangian_angle(jet, g)
    H = mean_curvature(jet, g, bgrad)
    return GeometryAtPoint(
        metric=g,
        metric_inv=np.linalg.inv(g),
        area_density=dens,
        lagrangian_residual=lagrangian_residual(jet),
        beta=beta,
        grad_beta=bgrad,
        H=H,
        F_perp=normal_projection(jet.value, jet, g),
        beta_laplacian=laplace_beltrami(jet, g, bgrad),
    )


def self_similarity_residual(imm, points, kappa=None):
    """|F_perp - kappa H| / max(|F_perp|, |H|, 1e-30), kappa from the kind.

    Shrinker S has kappa = -2c, expander E kappa = +2c, the time slices
    kappa = 2t, the lambda family kappa = -C / sum(lambda).
    """
    points = _as_points(imm, points)
    kappa = imm.soliton_coefficient if kappa is None else kappa
    jet = imm.evaluate_jet(points)
    g, _ = induced_metric(jet)
    H = mean_curvature(jet, g, imm.beta_gradient(points))
    fp = normal_projection(jet.value, jet, g)
    num = np.linalg.norm(fp - kappa * H, axis=-1)
    den = np.maximum(np.maximum(np.linalg.norm(fp, axis=-1), np.linalg.norm(H, axis=-1)), 1e-30)
    return num / den


def hamiltonian_stationarity_residual(imm, points):
    """|Delta_g beta| using the closed-form angle and the jet metric.

    The catalog angles are linear in the parameters; surfaces with a curved
    angle provide ``beta_hessian``.
    """
    points = _as_points(imm, points)
    jet = imm.evaluate_jet(points)
    g, _ = induced_metric(jet)
    hess = imm.beta_hessian(points) if hasattr(imm, "beta_hessian") else None
    return np.abs(laplace_beltrami(jet, g, imm.beta_gradient(points), hess))


def surface_fields(imm, points, order=1):
    """Position, area density and mean curvature vector at parameter points.

    First-order jets suffice for these; used by the quadrature layer.
    """
    jet = imm.evaluate_jet(points, order=order)
    g, dens = induced_metric(jet)
    H = mean_curvature(jet, g, imm.beta_gradient(points))
    return jet.value, dens, H
