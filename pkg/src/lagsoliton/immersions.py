"""Catalog of the parametrized Lagrangian surfaces, cones and limit varifolds.

Every catalog entry is an :class:`Immersion`: a kind identifier plus its
parameters.  The same formula code drives plain evaluation (numpy arrays) and
jet evaluation (:class:`~lagsoliton.jets.Jet2`), so exact derivatives always
describe exactly the evaluated map.

Parameter conventions (last axis of ``params``):

* ``gamma_pq``: ``(theta,)``
* two-parameter kinds: ``(u, theta)`` with ``u = mu`` for the smooth
  surfaces and ``u = y`` for cones and limit varifolds
* ``lambda_family*``: the chart coordinates ``x_i`` (``i != j``) followed by
  ``theta``; ``x_j`` is solved from the level constraint.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from math import gcd

import numpy as np

from . import jets
from .jets import Jet2, JetPoint

TWO_PI = 2 * np.pi

KINDS = (
    "gamma_pq",
    "cone_pp", "cone_pm", "cone_mp", "cone_mm",
    "shrinker_S", "expander_E",
    "shrinker_St", "expander_Et",
    "V_t_case2", "V_t_case3",
    "limit_S0", "limit_E0", "limit_V0_case2", "limit_V0_case3",
    "lambda_family", "lambda_family_t",
)

CONE_SIGNS = {"cone_pp": (1, 1), "cone_pm": (1, -1), "cone_mp": (-1, 1), "cone_mm": (-1, -1)}

_SHRINKER_TYPE = {"shrinker_S", "shrinker_St", "V_t_case3"}
_EXPANDER_TYPE = {"expander_E", "expander_Et", "V_t_case2"}
_TIMED = {"shrinker_St", "expander_Et", "V_t_case2", "V_t_case3", "lambda_family_t"}
_LIMITS = {"limit_S0", "limit_E0", "limit_V0_case2", "limit_V0_case3"}
_LAMBDA = {"lambda_family", "lambda_family_t"}


class ParityCase(str, Enum):
    BOTH_ODD = "both_odd"
    P_ODD_Q_EVEN = "p_odd_q_even"
    P_EVEN_Q_ODD = "p_even_q_odd"


@dataclass(frozen=True)
class ConeParams:
    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q:
            raise ValueError("p and q must be integers")
        if self.q < 1 or self.p <= self.q:
            raise ValueError(f"need p > q >= 1, got p={self.p}, q={self.q}")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"p={self.p} and q={self.q} are not coprime")

    @property
    def parity_case(self):
        if self.p % 2 and self.q % 2:
            return ParityCase.BOTH_ODD
        if self.p % 2:
            return ParityCase.P_ODD_Q_EVEN
        return ParityCase.P_EVEN_Q_ODD


@dataclass(frozen=True)
class LambdaParams:
    """Weights of the n-dimensional family, level constant and chart choice.

    The chart solves ``x_j = sign * sqrt((C - sum_{i != j} l_i x_i^2) / l_j)``
    with ``j = chart_index``.  By default j is the last index whose weight has
    the sign of C, so that the origin of the chart lies on the level set.
    """

    lambdas: tuple
    level: float = 1.0
    angle_offset: float = 0.0
    chart_index: int = None
    chart_sign: int = 1

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if len(lam) < 2:
            raise ValueError("the lambda family needs n >= 2 weights")
        if any(x == 0 for x in lam):
            raise ValueError("every lambda_i must be nonzero")
        if self.chart_sign not in (1, -1):
            raise ValueError("chart_sign must be +1 or -1")
        j = self.chart_index
        if j is None:
            same_sign = [i for i, x in enumerate(lam) if x * self.level > 0]
            j = same_sign[-1] if same_sign else len(lam) - 1
        object.__setattr__(self, "chart_index", j % len(lam))

    @property
    def n(self):
        return len(self.lambdas)

    @property
    def total(self):
        return sum(self.lambdas)


def self_similar_constant(params):
    """c = pq / (2 (p - q)) for the shrinker S and expander E."""
    return params.p * params.q / (2.0 * (params.p - params.q))


@dataclass
class GeometryReference:
    norm_sq: np.ndarray
    h_norm_sq: np.ndarray
    area_density: np.ndarray
    beta: np.ndarray
    metric: np.ndarray = None


# backend dispatch so one formula serves arrays and jets
def _exp(x):
    return jets.exp(x) if isinstance(x, Jet2) else np.exp(x)


def _sinh(x):
    return jets.sinh(x) if isinstance(x, Jet2) else np.sinh(x)


def _cosh(x):
    return jets.cosh(x) if isinstance(x, Jet2) else np.cosh(x)


def _abs(x):
    # smooth away from 0, where every caller stays
    return jets.sqrt(x * x) if isinstance(x, Jet2) else np.abs(x)


def _sqrt(x):
    return jets.sqrt(x) if isinstance(x, Jet2) else np.sqrt(x)


def _where(mask, a, b):
    if isinstance(a, Jet2):
        return jets.where(mask, a, b)
    return np.where(mask, a, b)


def _value(x):
    return x.value if isinstance(x, Jet2) else np.asarray(x)


@dataclass(frozen=True)
class Immersion:
    """A catalog entry.  Immutable; evaluation is pure."""

    kind: str
    params: object
    time: float = None
    half_domain: bool = False
    multiplicity: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in _LAMBDA:
            if not isinstance(self.params, LambdaParams):
                raise TypeError(f"{self.kind} needs LambdaParams")
        elif not isinstance(self.params, ConeParams):
            raise TypeError(f"{self.kind} needs ConeParams")
        t = self.time
        if self.kind in _TIMED:
            if t is None or t == 0:
                raise ValueError(f"{self.kind} needs a nonzero time")
            if self.kind in ("shrinker_St", "V_t_case3") and t >= 0:
                raise ValueError(f"{self.kind} is defined for t < 0, got t={t}")
            if self.kind in ("expander_Et", "V_t_case2") and t <= 0:
                raise ValueError(f"{self.kind} is defined for t > 0, got t={t}")
        elif t is not None:
            raise ValueError(f"{self.kind} is time-free")
        if self.half_domain and self.kind not in ("shrinker_S", "expander_E", "shrinker_St", "expander_Et"):
            raise ValueError("half_domain applies to S, E, S_t and E_t only")

    # -- metadata -----------------------------------------------------------

    @property
    def domain_dim(self):
        if self.kind == "gamma_pq":
            return 1
        if self.kind in _LAMBDA:
            return self.params.n
        return 2

    @property
    def ambient_dim(self):
        return self.params.n if self.kind in _LAMBDA else 2

    @property
    def is_conical(self):
        return self.kind in CONE_SIGNS

    @property
    def is_limit(self):
        return self.kind in _LIMITS

    @property
    def scale(self):
        """Dilation factor sqrt(|t| / c) of the time-indexed kinds (1 otherwise)."""
        if self.kind in _TIMED and self.kind not in _LAMBDA:
            return float(np.sqrt(abs(self.time) / self.c))
        return 1.0

    @property
    def c(self):
        return self_similar_constant(self.params)

    @property
    def level(self):
        # the chart choice of LambdaParams follows params.level; for the
        # time slices pass a level of the sign of -t * sum(lambda)
        if self.kind == "lambda_family_t":
            return -2.0 * self.time * self.params.total
        return self.params.level

    @property
    def u_min(self):
        """Lower bound of the first parameter (None = unbounded)."""
        if self.half_domain or self.is_conical:
            return 0.0
        return None

    @property
    def singular_at_zero(self):
        """Whether u = 0 lies on the singular locus (crease, vertex or limit singularity)."""
        return self.is_conical or self.is_limit or self.kind in ("V_t_case2", "V_t_case3")

    @property
    def symmetry_order(self):
        """How many theta values share each point of the u = 0 circle.

        On expander-type kinds the circle is (0, i sqrt(p) e^{-iq theta}) and is
        covered q times; on shrinker-type kinds it is covered p times.
        """
        if self.kind in _EXPANDER_TYPE:
            return self.params.q
        if self.kind in _SHRINKER_TYPE:
            return self.params.p
        return 1

    def at_time(self, t):
        return replace(self, time=t)

    @property
    def beta_slope(self):
        if self.kind == "gamma_pq":
            raise ValueError("the Lagrangian angle is defined for n-dimensional Lagrangians only")
        if self.kind in _LAMBDA:
            return self.params.total
        return float(self.params.p - self.params.q)

    @property
    def soliton_coefficient(self):
        """kappa with F_perp = kappa * H (cones and limits are scale invariant: 0)."""
        if self.kind == "shrinker_S":
            return -2.0 * self.c
        if self.kind == "expander_E":
            return 2.0 * self.c
        if self.kind in _TIMED and self.kind not in _LAMBDA:
            return 2.0 * self.time
        if self.kind in _LAMBDA:
            total = self.params.total
            if total == 0:
                raise ValueError("special Lagrangian member (sum of lambdas = 0) is not a soliton")
            return -self.level / total
        if self.is_conical or self.is_limit:
            return 0.0
        raise ValueError(f"{self.kind} is not self-similar")

    # -- evaluation ---------------------------------------------------------

    def _split(self, params):
        params = np.asarray(params, dtype=float)
        if params.shape[-1] != self.domain_dim:
            raise ValueError(f"{self.kind} takes {self.domain_dim} parameters, got {params.shape[-1]}")
        return params

    def _check_domain(self, params, strict_smooth=False):
        if self.kind == "gamma_pq" or self.kind in _LAMBDA:
            return
        u = params[..., 0]
        if self.u_min is not None and np.any(u < self.u_min):
            raise ValueError(f"{self.kind}: first parameter must be >= 0")
        if strict_smooth and self.singular_at_zero and np.any(u == 0):
            raise ValueError(f"{self.kind}: u = 0 is on the singular locus")

    def evaluate(self, params):
        """Point(s) of C^n in interleaved real coordinates, shape (..., 2n)."""
        params = self._split(params)
        self._check_domain(params)
        comps = self._components([params[..., i] for i in range(self.domain_dim)])
        z = np.stack([np.asarray(c, dtype=complex) * np.ones(params.shape[:-1]) for c in comps], axis=-1)
        out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
        out[..., 0::2] = z.real
        out[..., 1::2] = z.imag
        return out

    def evaluate_jet(self, params, order=2):
        """Exact jet of the immersion; raises on the singular locus."""
        params = self._split(params)
        self._check_domain(params, strict_smooth=True)
        k = self.domain_dim
        seeds = [Jet2.variable(params[..., i], i, k, order) for i in range(k)]
        comps = self._components(seeds)
        return JetPoint.from_complex(comps)

    def _components(self, args):
        kind = self.kind
        if kind in _LAMBDA:
            return self._lambda_components(args)
        p, q = self.params.p, self.params.q
        sq, sp = np.sqrt(q), np.sqrt(p)
        if kind == "gamma_pq":
            (th,) = args
            return (np.sqrt(q / (p + q)) * _exp(1j * p * th), 1j * np.sqrt(p / (p + q)) * _exp(-1j * q * th))
        u, th = args
        s = self.scale
        if kind in ("shrinker_S", "shrinker_St"):
            return _s_map(u, th, p, q, s)
        if kind in ("expander_E", "expander_Et"):
            return _e_map(u, th, p, q, s)
        if kind in CONE_SIGNS:
            s1, s2 = CONE_SIGNS[kind]
            return (s1 * sq * u * _exp(1j * p * th), s2 * 1j * sp * u * _exp(-1j * q * th))
        if kind == "limit_S0":
            return _s0_map(u, th, p, q)
        if kind == "limit_E0":
            return _e0_map(u, th, p, q)
        neg = _value(u) < 0
        if kind == "V_t_case2":
            return _branch(neg, _e_map(u, th, p, q, s), _e_map(u, th + np.pi / q, p, q, s))
        if kind == "V_t_case3":
            return _branch(neg, _s_map(u, th, p, q, s), _s_map(u, th + np.pi / p, p, q, s))
        if kind == "limit_V0_case2":
            return _branch(neg, _e0_map(u, th, p, q), _e0_map(u, th + np.pi / q, p, q))
        if kind == "limit_V0_case3":
            return _branch(neg, _s0_map(u, th, p, q), _s0_map(u, th + np.pi / p, p, q))
        raise AssertionError(kind)

    def _lambda_components(self, args):
        lp = self.params
        j = lp.chart_index
        th = args[-1]
        free = list(args[:-1])
        lam = lp.lambdas
        others = [i for i in range(lp.n) if i != j]
        rest = self.level
        for i, x in zip(others, free):
            rest = rest - lam[i] * x * x
        radicand = rest / lam[j]
        if np.any(_value(radicand) < 0):
            raise ValueError("chart point off the level set (no real solution for the chart coordinate)")
        xs = dict(zip(others, free))
        xs[j] = lp.chart_sign * _sqrt(radicand)
        return tuple(xs[i] * _exp(1j * lam[i] * th) for i in range(lp.n))

    def lambda_point(self, x, theta, tol=1e-12):
        """Evaluate from a full real vector x on the level set sum l_i x_i^2 = C."""
        if self.kind not in _LAMBDA:
            raise ValueError("lambda_point is only defined for the lambda family")
        x = np.asarray(x, dtype=float)
        lam = np.asarray(self.params.lambdas)
        resid = np.sum(lam * x * x, axis=-1) - self.level
        if np.any(np.abs(resid) > tol * max(1.0, abs(self.level))):
            raise ValueError(f"point violates the level constraint by {np.max(np.abs(resid)):.3e}")
        z = x * np.exp(1j * lam * np.asarray(theta)[..., None])
        out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
        out[..., 0::2], out[..., 1::2] = z.real, z.imag
        return out

    def chart_params(self, x, theta):
        """Chart coordinates of a full level-set vector x (drops x_j)."""
        x = np.asarray(x, dtype=float)
        j = self.params.chart_index
        free = np.delete(x, j, axis=-1)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), free.shape[:-1])
        return np.concatenate([free, theta[..., None]], axis=-1)

    # -- closed forms -----------------------------------------------------

    def beta_gradient(self, params):
        """Coordinate gradient of the closed-form Lagrangian angle."""
        params = self._split(params)
        g = np.zeros(params.shape)
        g[..., -1] = self.beta_slope
        return g

    def closed_form_reference(self, params):
        params = self._split(params)
        kind = self.kind
        if kind in _LAMBDA:
            return self._lambda_reference(params)
        p, q = self.params.p, self.params.q
        if kind == "gamma_pq":
            shape = params.shape[:-1]
            return GeometryReference(
                norm_sq=np.ones(shape),
                h_norm_sq=np.full(shape, (p * p - p * q + q * q) / (p * q)),
                area_density=np.full(shape, np.sqrt(p * q)),
                beta=np.full(shape, np.nan),
            )
        u, th = params[..., 0], params[..., 1]
        slope = float(p - q)
        beta = slope * th + self._beta_offset(u)
        rpq = np.sqrt(p * q)
        if kind in _SHRINKER_TYPE or kind in _EXPANDER_TYPE:
            eps = self.scale ** 2
            ch2, sh2 = np.cosh(u) ** 2, np.sinh(u) ** 2
            if kind in _SHRINKER_TYPE:
                norm, metric = q * ch2 + p * sh2, p * ch2 + q * sh2
            else:
                norm, metric = p * ch2 + q * sh2, q * ch2 + p * sh2
            return GeometryReference(
                norm_sq=eps * norm,
                h_norm_sq=(p - q) ** 2 / (p * q) / metric / eps,
                area_density=eps * rpq * metric,
                beta=beta,
                metric=_diag_metric(eps * metric, eps * p * q * metric),
            )
        y2 = u * u
        with np.errstate(divide="ignore"):
            h2 = (p - q) ** 2 / (p * q * (p + q)) / y2
        return GeometryReference(
            norm_sq=y2 * (p + q),
            h_norm_sq=h2,
            area_density=np.abs(u) * rpq * (p + q),
            beta=beta,
            metric=_diag_metric(np.full(u.shape, float(p + q)), p * q * (p + q) * y2),
        )

    def _beta_offset(self, u):
        """Additive constant of the angle, per branch, with frame order (d_u, d_theta)."""
        p, q = self.params.p, self.params.q
        slope = p - q
        kind = self.kind
        if kind in ("cone_pm", "cone_mp"):
            return np.full(np.shape(u), np.pi)
        if kind in ("V_t_case2", "limit_V0_case2"):
            return np.where(u < 0, slope * np.pi / q, 0.0)
        if kind in ("V_t_case3", "limit_V0_case3"):
            return np.where(u < 0, slope * np.pi / p, 0.0)
        return np.zeros(np.shape(u))

    def _lambda_reference(self, params):
        lp = self.params
        lam = np.asarray(lp.lambdas)
        j = lp.chart_index
        free = params[..., :-1]
        th = params[..., -1]
        lam_free = np.delete(lam, j)
        rest = self.level - np.sum(lam_free * free * free, axis=-1)
        xj = lp.chart_sign * np.sqrt(rest / lam[j])
        x = np.insert(free, j, 0.0, axis=-1)
        x[..., j] = xj
        w = np.sum(lam * lam * x * x, axis=-1)
        return GeometryReference(
            norm_sq=np.sum(x * x, axis=-1),
            h_norm_sq=lp.total ** 2 / w,
            area_density=w / np.abs(lam[j] * xj),
            beta=lp.total * th + lp.angle_offset,
        )

    # -- radial structure ---------------------------------------------------

    def _radial_model(self):
        """|F|^2 = A + B f(u) with f = sinh^2 (smooth kinds) or u^2 (cones, limits)."""
        if self.kind == "gamma_pq" or self.kind in _LAMBDA:
            raise ValueError(f"{self.kind} has no radial parametrization")
        p, q = self.params.p, self.params.q
        if self.kind in _SHRINKER_TYPE:
            e = self.scale ** 2
            return e * q, e * (p + q), "sinh"
        if self.kind in _EXPANDER_TYPE:
            e = self.scale ** 2
            return e * p, e * (p + q), "sinh"
        return 0.0, float(p + q), "square"

    def norm_sq_of_u(self, u):
        a, b, f = self._radial_model()
        u = np.asarray(u, dtype=float)
        return a + b * (np.sinh(u) ** 2 if f == "sinh" else u * u)

    def _u_of_norm(self, r):
        a, b, f = self._radial_model()
        val = (r * r - a) / b
        if val < 0:
            return None
        return float(np.arcsinh(np.sqrt(val))) if f == "sinh" else float(np.sqrt(val))

    @property
    def min_norm(self):
        return float(np.sqrt(self._radial_model()[0]))

    def radial_intervals(self, rmin, rmax):
        """Parameter intervals in u on which rmin <= |F| <= rmax, split at u = 0."""
        if rmax <= rmin or rmax < self.min_norm:
            return []
        u_hi = self._u_of_norm(rmax)
        u_lo = self._u_of_norm(rmin) if rmin > self.min_norm else 0.0
        if u_lo is None:
            u_lo = 0.0
        # rmax equal to the minimum norm up to rounding: support is a null set
        if u_hi is None or u_hi <= u_lo:
            return []
        out = []
        if self.u_min is None:
            out.append((-u_hi, -u_lo))
        out.append((u_lo, u_hi))
        return out

    def radial_parameters(self, radius):
        """Values of u where |F| = radius (one per branch)."""
        u = self._u_of_norm(radius)
        if u is None:
            return []
        if self.u_min is None and u > 0:
            return [u, -u]
        return [u]


def _diag_metric(g11, g22):
    g = np.zeros(np.shape(g11) + (2, 2))
    g[..., 0, 0], g[..., 1, 1] = g11, g22
    return g


def _s_map(u, th, p, q, s=1.0):
    return (s * np.sqrt(q) * _cosh(u) * _exp(1j * p * th), 1j * s * np.sqrt(p) * _sinh(u) * _exp(-1j * q * th))


def _e_map(u, th, p, q, s=1.0):
    return (s * np.sqrt(q) * _sinh(u) * _exp(1j * p * th), 1j * s * np.sqrt(p) * _cosh(u) * _exp(-1j * q * th))


def _s0_map(u, th, p, q):
    return (np.sqrt(q) * _abs(u) * _exp(1j * p * th), 1j * np.sqrt(p) * u * _exp(-1j * q * th))


def _e0_map(u, th, p, q):
    return (np.sqrt(q) * u * _exp(1j * p * th), 1j * np.sqrt(p) * _abs(u) * _exp(-1j * q * th))


def _branch(neg, pos_comps, neg_comps):
    """u >= 0 uses pos_comps; u < 0 uses -neg_comps (the e^{i arg u} factor)."""
    return tuple(_where(neg, -b, a) for a, b in zip(pos_comps, neg_comps))


def catalog_kinds_for(params):
    """The (p, q) catalog with representative times, for sweeps."""
    out = [
        Immersion("gamma_pq", params),
        *(Immersion(k, params) for k in CONE_SIGNS),
        Immersion("shrinker_S", params),
        Immersion("expander_E", params),
        Immersion("shrinker_St", params, time=-1.0),
        Immersion("expander_Et", params, time=1.0),
        Immersion("V_t_case2", params, time=1.0),
        Immersion("V_t_case3", params, time=-1.0),
        *(Immersion(k, params) for k in sorted(_LIMITS)),
    ]
    return out


def from_identifier(kind, p=None, q=None, time=None, lambdas=None, level=1.0, half_domain=False):
    """Build an immersion from its stable string identifier (CLI/report use)."""
    if kind in _LAMBDA:
        return Immersion(kind, LambdaParams(tuple(lambdas), level=level), time=time)
    return Immersion(kind, ConeParams(p, q), time=time, half_domain=half_domain)
