"""Array-valued dual numbers for forward-mode differentiation.

A :class:`Dual` holds a value array of shape ``S`` and tangents of shape
``S + (P,)``: ``P`` independent directional derivatives are carried side by
side, which amounts to ``P`` forward passes evaluated at once.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual", "sqrt", "dsum", "stack", "value"]


class Dual:
    __slots__ = ("val", "eps")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, val, eps):
        self.val = np.asarray(val, dtype=np.float64)
        self.eps = np.asarray(eps, dtype=np.float64)
        if self.eps.shape[:-1] != self.val.shape:
            raise ValueError(f"tangent shape {self.eps.shape} does not extend value shape {self.val.shape}")

    @classmethod
    def constant(cls, val, n_tangents: int) -> "Dual":
        val = np.asarray(val, dtype=np.float64)
        return cls(val, np.zeros(val.shape + (n_tangents,)))

    @property
    def shape(self):
        return self.val.shape

    def _lift(self, other):
        if isinstance(other, Dual):
            return other.val, other.eps
        other = np.asarray(other, dtype=np.float64)
        return other, None

    def __add__(self, other):
        v, e = self._lift(other)
        if e is None:
            return Dual(self.val + v, np.broadcast_to(self.eps, np.broadcast_shapes(self.val.shape, v.shape) + self.eps.shape[-1:]))
        return Dual(self.val + v, self.eps + e)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        v, e = self._lift(other)
        eps = self.eps * v[..., None]
        if e is not None:
            eps = eps + e * self.val[..., None]
        return Dual(self.val * v, eps)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, e = self._lift(other)
        val = self.val / v
        eps = self.eps / v[..., None]
        if e is not None:
            eps = eps - e * (val / v)[..., None]
        return Dual(val, eps)

    def __rtruediv__(self, other):
        v, _ = self._lift(other)
        val = v / self.val
        return Dual(val, -self.eps * (val / self.val)[..., None])

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            return Dual(self.val[idx], self.eps[idx + (slice(None),)])
        return Dual(self.val[idx], self.eps[idx])

    def __repr__(self) -> str:
        return f"Dual(val={self.val!r}, eps.shape={self.eps.shape})"


def value(x):
    return x.val if isinstance(x, Dual) else x


def sqrt(x):
    if isinstance(x, Dual):
        r = np.sqrt(x.val)
        return Dual(r, x.eps / (2.0 * r)[..., None])
    return np.sqrt(x)


def dsum(x, axis: int = -1, keepdims: bool = False):
    if isinstance(x, Dual):
        ax = axis % x.val.ndim
        return Dual(x.val.sum(axis=ax, keepdims=keepdims), x.eps.sum(axis=ax, keepdims=keepdims))
    return np.sum(x, axis=axis, keepdims=keepdims)


def stack(xs, axis: int = -1):
    """Stack along a value axis (``axis`` must be -1 or non-negative)."""
    if any(isinstance(x, Dual) for x in xs):
        n = next(x.eps.shape[-1] for x in xs if isinstance(x, Dual))
        ds = [x if isinstance(x, Dual) else Dual.constant(x, n) for x in xs]
        ndim = ds[0].val.ndim + 1
        ax = axis % ndim
        return Dual(np.stack([d.val for d in ds], axis=ax), np.stack([d.eps for d in ds], axis=ax))
    return np.stack(xs, axis=axis)
