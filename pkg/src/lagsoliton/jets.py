"""Forward-mode second-order jets over a k-dimensional parameter domain.

A :class:`Jet2` carries a value together with its gradient and Hessian with
respect to the domain parameters.  Values may be batched (any leading shape)
and may be complex, which lets immersions be written directly with
``exp(1j * p * theta)``.  Setting ``hess=None`` gives a cheaper first-order
jet; any operation involving a first-order operand produces a first-order
result.

Layout: ``value.shape == B``, ``grad.shape == B + (k,)``,
``hess.shape == B + (k, k)``.
"""

import numpy as np


class Jet2:
    __slots__ = ("value", "grad", "hess")
    # make ndarray (op) Jet2 dispatch to the reflected jet operators
    __array_ufunc__ = None

    def __init__(self, value, grad, hess=None):
        self.value = np.asarray(value)
        self.grad = np.asarray(grad)
        self.hess = None if hess is None else np.asarray(hess)

    # -- construction -----------------------------------------------------

    @classmethod
    def variable(cls, values, index, k, order=2):
        """Seed the ``index``-th domain coordinate with the given values."""
        values = np.asarray(values, dtype=float)
        grad = np.zeros(values.shape + (k,))
        grad[..., index] = 1.0
        hess = np.zeros(values.shape + (k, k)) if order == 2 else None
        return cls(values, grad, hess)

    @classmethod
    def constant(cls, value, k, order=2):
        value = np.asarray(value)
        grad = np.zeros(value.shape + (k,), dtype=value.dtype if np.iscomplexobj(value) else float)
        hess = np.zeros(value.shape + (k, k), dtype=grad.dtype) if order == 2 else None
        return cls(value, grad, hess)

    @property
    def k(self):
        return self.grad.shape[-1]

    @property
    def order(self):
        return 1 if self.hess is None else 2

    @property
    def real(self):
        return Jet2(self.value.real, self.grad.real, None if self.hess is None else self.hess.real)

    @property
    def imag(self):
        return Jet2(self.value.imag, self.grad.imag, None if self.hess is None else self.hess.imag)

    def __repr__(self):
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.k != self.k:
                raise ValueError(f"domain dimension mismatch: {self.k} vs {other.k}")
            return other
        return None

    def __neg__(self):
        return Jet2(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet2(self.value + other, self.grad, self.hess)
        hess = None if self.hess is None or o.hess is None else self.hess + o.hess
        return Jet2(self.value + o.value, self.grad + o.grad, hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            c = np.asarray(other)
            hess = None if self.hess is None else self.hess * c[..., None, None]
            return Jet2(self.value * c, self.grad * c[..., None], hess)
        a, b = self, o
        grad = a.grad * b.value[..., None] + b.grad * a.value[..., None]
        hess = None
        if a.hess is not None and b.hess is not None:
            cross = a.grad[..., :, None] * b.grad[..., None, :]
            # group symmetric parts so the result is symmetric bit for bit
            hess = ((a.hess * b.value[..., None, None] + b.hess * a.value[..., None, None])
                    + (cross + np.swapaxes(cross, -1, -2)))
        return Jet2(a.value * b.value, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self):
        if np.any(self.value == 0):
            raise ZeroDivisionError("jet division by a zero value")
        inv = 1.0 / self.value
        return _chain(self, inv, -inv**2, 2.0 * inv**3)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            c = np.asarray(other)
            if np.any(c == 0):
                raise ZeroDivisionError("jet division by zero")
            return self * (1.0 / c)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet2.constant(np.ones_like(self.value), self.k, self.order)
        for _ in range(n):
            out = out * self
        return out


def _chain(a, f0, f1, f2):
    """Compose a scalar function with known f, f', f'' (already evaluated at a.value)."""
    grad = a.grad * f1[..., None]
    hess = None
    if a.hess is not None:
        hess = a.hess * f1[..., None, None] + f2[..., None, None] * (a.grad[..., :, None] * a.grad[..., None, :])
    return Jet2(f0, grad, hess)


def sin(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return _chain(a, s, c, -s)


def cos(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return _chain(a, c, -s, -c)


def sinh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return _chain(a, s, c, s)


def cosh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return _chain(a, c, s, c)


def exp(a):
    e = np.exp(a.value)
    return _chain(a, e, e, e)


def sqrt(a):
    if np.iscomplexobj(a.value) or np.any(a.value <= 0):
        raise ValueError("jet sqrt requires a strictly positive real value")
    r = np.sqrt(a.value)
    return _chain(a, r, 0.5 / r, -0.25 / (r * a.value))


ELEMENTARY = {"sin": sin, "cos": cos, "sinh": sinh, "cosh": cosh, "exp": exp, "sqrt": sqrt}


def jet_arithmetic(a, b, op):
    """Functional form of the four arithmetic operations ('+', '-', '*', '/')."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op in ("*", "x"):
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def jet_elementary(a, f):
    try:
        return ELEMENTARY[f](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None


def where(mask, a, b):
    """Branch selection on jets, broadcasting ``mask`` over the batch shape."""
    mask = np.asarray(mask)
    hess = None
    if a.hess is not None and b.hess is not None:
        hess = np.where(mask[..., None, None], a.hess, b.hess)
    return Jet2(np.where(mask, a.value, b.value), np.where(mask[..., None], a.grad, b.grad), hess)


class JetPoint:
    """2-jet of a map into C^n = R^{2n}, coordinates interleaved.

    ``value`` (B, 2n), ``grad`` (B, 2n, k) and ``hess`` (B, 2n, k, k) or None.
    Column ``grad[..., :, a]`` is the tangent vector dF/du^a.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess=None):
        self.value, self.grad, self.hess = value, grad, hess

    @classmethod
    def from_complex(cls, components):
        """Interleave a list of n complex-valued Jet2 into 2n real channels."""
        value = np.stack([x for c in components for x in (c.value.real, c.value.imag)], axis=-1)
        grad = np.stack([x for c in components for x in (c.grad.real, c.grad.imag)], axis=-2)
        hess = None
        if all(c.hess is not None for c in components):
            hess = np.stack([x for c in components for x in (c.hess.real, c.hess.imag)], axis=-3)
        return cls(value, grad, hess)

    @property
    def k(self):
        return self.grad.shape[-1]

    @property
    def frame(self):
        return self.grad

    def entry(self, i):
        """The Jet2 of the i-th real ambient coordinate."""
        return Jet2(self.value[..., i], self.grad[..., i, :], None if self.hess is None else self.hess[..., i, :, :])
