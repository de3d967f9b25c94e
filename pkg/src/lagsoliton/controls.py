"""Control surfaces outside the catalog, and a finite-difference angle oracle.

The controls share the evaluation interface of catalog immersions
(``evaluate``, ``evaluate_jet``, ``beta_gradient``) so the calculus layer
runs on them unchanged.
"""

from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import Jet2, JetPoint
from .lagrangian_calculus import induced_metric, lagrangian_angle


@dataclass(frozen=True)
class ParametricSurface:
    """A surface in C^2 given by complex component formulas in (u, v).

    ``components(u, v)`` must work on jets and on arrays; ``angle_gradient``
    optionally gives the coordinate gradient of a known Lagrangian angle.
    """

    name: str
    components: object
    angle_gradient: object = None
    angle_hessian: object = None
    domain_dim: int = 2
    ambient_dim: int = 2

    def evaluate(self, params):
        params = np.asarray(params, dtype=float)
        z = np.stack([np.asarray(c, dtype=complex) * np.ones(params.shape[:-1])
                      for c in self.components(params[..., 0], params[..., 1])], axis=-1)
        out = np.empty(z.shape[:-1] + (4,))
        out[..., 0::2], out[..., 1::2] = z.real, z.imag
        return out

    def evaluate_jet(self, params, order=2):
        params = np.asarray(params, dtype=float)
        u = Jet2.variable(params[..., 0], 0, 2, order)
        v = Jet2.variable(params[..., 1], 1, 2, order)
        comps = [c if isinstance(c, Jet2) else Jet2.constant(np.broadcast_to(c, u.value.shape) + 0j, 2, order)
                 for c in self.components(u, v)]
        return JetPoint.from_complex([c * (1.0 + 0j) for c in comps])

    def beta_gradient(self, params):
        if self.angle_gradient is None:
            raise ValueError(f"{self.name} has no closed-form angle; use fd_angle_laplacian")
        return self.angle_gradient(np.asarray(params, dtype=float))

    def beta_hessian(self, params):
        if self.angle_hessian is None:
            return None
        return self.angle_hessian(np.asarray(params, dtype=float))


def _exp(x):
    return jets.exp(x) if isinstance(x, Jet2) else np.exp(x)


def _cos(x):
    return jets.cos(x) if isinstance(x, Jet2) else np.cos(x)


def _sin(x):
    return jets.sin(x) if isinstance(x, Jet2) else np.sin(x)


def _graph_angle_gradient(params):
    u = params[..., 0]
    g = np.zeros(params.shape)
    g[..., 0] = 1.0 / (1.0 + u * u)
    return g


def _graph_angle_hessian(params):
    u = params[..., 0]
    h = np.zeros(params.shape + (2,))
    h[..., 0, 0] = -2.0 * u / (1.0 + u * u) ** 2
    return h


# Gradient graph of f = u^3 / 6: Lagrangian, beta = arctan(u),
# metric diag(1 + u^2, 1), Delta beta = -3u / (1 + u^2)^3.
GRADIENT_GRAPH = ParametricSurface(
    "gradient_graph_u3", lambda u, v: (u + 0.5j * u * u, v * (1.0 + 0j)),
    _graph_angle_gradient, _graph_angle_hessian)

# (e^{i mu}, mu + i theta): flat metric and affine angle, so Delta beta = 0.
EXP_MU_SURFACE = ParametricSurface("exp_mu", lambda u, v: (_exp(1j * u), u + 1j * v))

# Not Lagrangian: omega(d_mu, d_theta) = -sin(mu) cos(mu).
NON_LAGRANGIAN = ParametricSurface("cos_sin", lambda u, v: (_cos(u) * _exp(1j * v), _sin(u) * (1.0 + 0j)))


def graph_angle_laplacian(u):
    """Closed form of Delta beta on :data:`GRADIENT_GRAPH`."""
    u = np.asarray(u, dtype=float)
    return -3.0 * u / (1.0 + u * u) ** 3


def angle_field(surface, points):
    """Phase of the holomorphic volume on the orthonormal frame (no Lagrangian check)."""
    jet = surface.evaluate_jet(points, order=1)
    return lagrangian_angle(jet, check=False)[0]


def _wrapped(a):
    return np.angle(np.exp(1j * a))


def fd_angle_laplacian(surface, points, h=1e-3):
    """Laplace-Beltrami of the numerically computed angle by nested central differences.

    The flux sqrt(g) g^{ab} d_b beta is formed at half-step points from
    angle differences (wrapped to (-pi, pi]) and differenced once more.
    """
    points = np.asarray(points, dtype=float)
    e = np.eye(2)

    def flux(x, a):
        grad = np.stack([_wrapped(angle_field(surface, x + 0.5 * h * e[b]) - angle_field(surface, x - 0.5 * h * e[b])) / h
                         for b in range(2)], axis=-1)
        g, dens = induced_metric(surface.evaluate_jet(x, order=1))
        ginv = np.linalg.inv(g)
        return dens * np.einsum("...b,...b->...", ginv[..., a, :], grad)

    div = sum((flux(points + 0.5 * h * e[a], a) - flux(points - 0.5 * h * e[a], a)) / h for a in range(2))
    _, dens = induced_metric(surface.evaluate_jet(points, order=1))
    return div / dens
