"""Coincidences among the four cones C_{+-+-}, sphere-section distances and
the reparametrizations relating the t = 0 limits."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .immersions import CONE_SIGNS, ConeParams, Immersion, ParityCase

SIGN_LABELS = ("++", "+-", "-+", "--")
_KIND_OF = {"++": "cone_pp", "+-": "cone_pm", "-+": "cone_mp", "--": "cone_mm"}

_PARTITIONS = {
    ParityCase.BOTH_ODD: (("++", "--"), ("+-", "-+")),
    ParityCase.P_ODD_Q_EVEN: (("++", "-+"), ("+-", "--")),
    ParityCase.P_EVEN_Q_ODD: (("++", "+-"), ("-+", "--")),
}

_ASYMPTOTIC = {
    "shrinker_St": ("++", "+-"),
    "expander_Et": ("++", "-+"),
    "V_t_case2": ("++", "+-"),
    "V_t_case3": ("++", "-+"),
}


def identify_coincidences(params):
    """Partition of the four sign patterns into classes of equal cones."""
    return _PARTITIONS[params.parity_case]


@dataclass(frozen=True)
class ConeId:
    signs: str
    params: ConeParams

    def __post_init__(self):
        if self.signs not in SIGN_LABELS:
            raise ValueError(f"signs must be one of {SIGN_LABELS}")

    @property
    def immersion(self):
        return Immersion(_KIND_OF[self.signs], self.params)

    @property
    def canonical(self):
        """First member of its coincidence class (in ++, +-, -+, -- order)."""
        for cls in identify_coincidences(self.params):
            if self.signs in cls:
                return ConeId(min(cls, key=SIGN_LABELS.index), self.params)
        raise AssertionError(self.signs)

    def __str__(self):
        return f"C{self.signs}"


def theta_shift_image(signs, params):
    """Sign pattern of C_signs(y, theta + pi): ((-1)^p s1, (-1)^q s2)."""
    s1, s2 = CONE_SIGNS[_KIND_OF[signs]]
    s1 *= (-1) ** params.p
    s2 *= (-1) ** params.q
    return next(k for k, v in _KIND_OF.items() if CONE_SIGNS[v] == (s1, s2))


def theta_shift_witness(a, b, params, samples=256, seed=0):
    """max |C_a(y, theta + pi) - C_b(y, theta)| on quasi-random samples."""
    pts = _halton(samples, 2, seed)
    y, th = 2.0 * pts[:, 0], 2 * np.pi * pts[:, 1]
    A = Immersion(_KIND_OF[a], params).evaluate(np.stack([y, th + np.pi], axis=-1))
    B = Immersion(_KIND_OF[b], params).evaluate(np.stack([y, th], axis=-1))
    return float(np.max(np.linalg.norm(A - B, axis=-1)))


def _halton(n, d, seed):
    return qmc.Halton(d=d, scramble=True, seed=seed).random(n)


# -- sphere sections -------------------------------------------------------


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def section_curves(imms, radius):
    """(immersion, u) pairs whose theta-curves make up the image on |x| = radius."""
    curves = []
    for imm in _as_list(imms):
        if imm.kind == "gamma_pq" or imm.kind.startswith("lambda"):
            raise ValueError(f"{imm.kind} has no sphere sections in this parametrization")
        for u in imm.radial_parameters(radius):
            if imm.u_min is not None and u < imm.u_min:
                continue
            curves.append((imm, u))
    return curves


def _sample_section(curves, samples, seed):
    pts = _halton(samples, 2, seed)
    which = np.minimum((pts[:, 1] * len(curves)).astype(int), len(curves) - 1)
    theta = 2 * np.pi * pts[:, 0]
    X = np.empty((samples, 2 * curves[0][0].ambient_dim))
    for k, (imm, u) in enumerate(curves):
        sel = which == k
        X[sel] = imm.evaluate(np.stack([np.full(sel.sum(), u), theta[sel]], axis=-1))
    return X, which, theta


def _refine(curves, which, theta, targets, steps=12):
    """Newton on theta for the distance from each target to its curve."""
    th = theta.copy()
    out = np.empty(len(targets))
    for k, (imm, u) in enumerate(curves):
        sel = np.nonzero(which == k)[0]
        if sel.size == 0:
            continue
        t = th[sel]
        x = targets[sel]
        for _ in range(steps):
            jet = imm.evaluate_jet(np.stack([np.full(t.size, u), t], axis=-1))
            r = jet.value - x
            c1, c2 = jet.grad[..., 1], jet.hess[..., 1, 1]
            f = np.sum(r * c1, axis=-1)
            fp = np.sum(c1 * c1, axis=-1) + np.sum(r * c2, axis=-1)
            step = np.where(fp > 0, f / np.where(fp > 0, fp, 1.0), 0.0)
            t = t - np.clip(step, -0.1, 0.1)
        out[sel] = np.linalg.norm(imm.evaluate(np.stack([np.full(t.size, u), t], axis=-1)) - x, axis=-1)
    return out


def _directed(XA, curves_b, XB, which_b, theta_b, block=1024):
    nearest = np.empty(len(XA), dtype=int)
    best = np.empty(len(XA))
    for s in range(0, len(XA), block):
        d2 = np.sum((XA[s:s + block, None, :] - XB[None, :, :]) ** 2, axis=-1)
        nearest[s:s + block] = np.argmin(d2, axis=1)
        best[s:s + block] = np.sqrt(d2[np.arange(d2.shape[0]), nearest[s:s + block]])
    refined = _refine(curves_b, which_b[nearest], theta_b[nearest], XA)
    return float(np.max(np.minimum(best, refined)))


def image_distance(a, b, section_radius=1.0, samples=2048, seed=0):
    """Symmetric Hausdorff distance of the images on |x| = section_radius,
    divided by section_radius.

    Each side is sampled at ``samples`` scrambled-Halton points; every
    nearest sample found by brute force is then refined by Newton steps along
    the other curve, so the estimate is not limited by the sample spacing.
    ``a`` and ``b`` may be single immersions or lists (unions).
    """
    if not section_radius > 0:
        raise ValueError("section_radius must be positive")
    ca, cb = section_curves(a, section_radius), section_curves(b, section_radius)
    if not ca or not cb:
        raise ValueError("empty sphere section")
    XA, wa, ta = _sample_section(ca, samples, seed)
    XB, wb, tb = _sample_section(cb, samples, seed + 1)
    d = max(_directed(XA, cb, XB, wb, tb), _directed(XB, ca, XA, wa, ta))
    return d / section_radius


# -- asymptotic cones -------------------------------------------------------


def asymptotic_cone_pair(family, params):
    """The two cones a flow family approaches as t -> 0 (raw sign patterns)."""
    kind = family.kind if isinstance(family, Immersion) else family
    try:
        a, b = _ASYMPTOTIC[kind]
    except KeyError:
        raise ValueError(f"no asymptotic cone pair for {kind!r}") from None
    return ConeId(a, params), ConeId(b, params)


@dataclass
class ConvergenceWitness:
    family: str
    times: list
    distances: list
    thresholds: list
    monotone: bool
    passed: bool


def convergence_witness(family, params, eps=0.01, levels=4, samples=1024, seed=0):
    """Unit-sphere distance of the t = +-eps 2^-k slices to the claimed cones."""
    kind = family.kind if isinstance(family, Immersion) else family
    sign = -1.0 if kind in ("shrinker_St", "V_t_case3") else 1.0
    cones = [c.immersion for c in asymptotic_cone_pair(kind, params)]
    times, dists, thr = [], [], []
    for k in range(levels):
        e = eps * 2.0**-k
        imm = Immersion(kind, params, time=sign * e)
        times.append(sign * e)
        dists.append(image_distance(imm, cones, 1.0, samples, seed))
        thr.append(10.0 * np.sqrt(e))
    monotone = all(d2 < d1 for d1, d2 in zip(dists, dists[1:]))
    return ConvergenceWitness(kind, times, dists, thr, monotone,
                              monotone and all(d < t for d, t in zip(dists, thr)))


# -- reparametrizations -------------------------------------------------------


def _grid(samples, seed, y_max=2.0):
    pts = _halton(samples, 2, seed)
    y = y_max * (2 * pts[:, 0] - 1)
    y = np.where(y == 0, 1e-3, y)
    return y, 2 * np.pi * pts[:, 1]


def reparametrization_residual(identity, params, samples=512, seed=0):
    """max pointwise residual of one of the limit reparametrizations.

    ``cov``:  E0(y, theta) = S0(y, theta + arg y)
    ``cov2``: V0 case 2 (y, theta) = S0(y, theta + arg(y) / q)
    ``cov3``: V0 case 3 (y, theta) = E0(y, theta + arg(y) / p)
    Each holds in its own parity case (both odd, p odd q even, p even q odd).
    """
    y, th = _grid(samples, seed)
    arg = np.where(y < 0, np.pi, 0.0)
    if identity == "cov":
        lhs, rhs, shift = "limit_E0", "limit_S0", arg
    elif identity == "cov2":
        lhs, rhs, shift = "limit_V0_case2", "limit_S0", arg / params.q
    elif identity == "cov3":
        lhs, rhs, shift = "limit_V0_case3", "limit_E0", arg / params.p
    else:
        raise ValueError(f"unknown identity {identity!r}; expected cov, cov2 or cov3")
    L = Immersion(lhs, params).evaluate(np.stack([y, th], axis=-1))
    R = Immersion(rhs, params).evaluate(np.stack([y, th + shift], axis=-1))
    return float(np.max(np.linalg.norm(L - R, axis=-1)))


IDENTITY_FOR_CASE = {
    ParityCase.BOTH_ODD: "cov",
    ParityCase.P_ODD_Q_EVEN: "cov2",
    ParityCase.P_EVEN_Q_ODD: "cov3",
}
