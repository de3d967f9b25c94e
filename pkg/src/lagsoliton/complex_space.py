"""C^n stored as R^{2n} with interleaved coordinates (x1, y1, ..., xn, yn).

All functions accept arrays with arbitrary leading batch dimensions; the last
axis holds the 2n real coordinates.
"""

import numpy as np


def _check(v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] == 0 or v.shape[-1] % 2:
        raise ValueError(f"expected an even number (2n >= 2) of coordinates, got shape {v.shape}")
    return v


def _check_pair(u, v):
    u, v = _check(u), _check(v)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return u, v


def to_complex(v):
    """Interleaved real coordinates -> complex array with n entries on the last axis."""
    v = _check(v)
    return v[..., 0::2] + 1j * v[..., 1::2]


def from_complex(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def apply_J(v):
    """Complex structure: (a, b) -> (-b, a) in every complex slot."""
    v = _check(v)
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def euclidean_inner(u, v):
    u, v = _check_pair(u, v)
    return np.sum(u * v, axis=-1)


def symplectic_form(u, v):
    """omega(u, v) = sum_i dx^i ^ dy^i (u, v)."""
    u, v = _check_pair(u, v)
    return np.sum(u[..., 0::2] * v[..., 1::2] - u[..., 1::2] * v[..., 0::2], axis=-1)


def complex_determinant_of_frame(frame):
    """Evaluate dz^1 ^ ... ^ dz^n on n tangent vectors.

    ``frame`` has shape (..., 2n, n); column a is the a-th vector.  Returns
    (modulus, phase) with phase in (-pi, pi]; a vanishing determinant gives
    (0, 0).
    """
    frame = np.asarray(frame, dtype=float)
    n2, k = frame.shape[-2:]
    if n2 != 2 * k:
        raise ValueError(f"need n vectors in C^n, got {k} vectors in R^{n2}")
    z = frame[..., 0::2, :] + 1j * frame[..., 1::2, :]
    det = np.linalg.det(z)
    modulus = np.abs(det)
    phase = np.where(modulus > 0, np.angle(det), 0.0)
    phase = np.where(phase <= -np.pi, phase + 2 * np.pi, phase)
    return modulus, phase


def circular_distance(a, b):
    """Distance between angles on the circle R / 2 pi Z, in [0, pi]."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)
