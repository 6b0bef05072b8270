"""Equal-angle intermediate vector of three vectors, and its cosine.

For three vectors ``a, b, c`` find ``v`` with ``cos(v, a) = cos(v, b) =
cos(v, c)`` and ``|v| = l``. Equating the cosines pairwise gives two
homogeneous linear equations in ``v``::

    (|b|/|a| * a - b) . v = 0
    (|c|/|b| * b - c) . v = 0

so ``v`` spans the null space of the 2x3 coefficient matrix. In R^3 with
linearly independent rows that null space is the line through the cross
product of the rows. Inputs of higher dimension are solved inside
``span{a, b, c}``, where the problem is exactly the 3-D one.

The sign of ``v`` is chosen so that the shared cosine is non-negative, making
:func:`multi_cosine` a similarity in ``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dual
from .dual import Dual, dsum, stack

__all__ = [
    "ZeroVectorInput",
    "DegenerateGradient",
    "EquiangularSolution",
    "SimilarityGradient",
    "FULL",
    "SPAN_DEFICIENT",
    "ALL_PARALLEL",
    "solve_equiangular_r3",
    "solve_equiangular_span",
    "solve_batch",
    "multi_cosine",
    "multi_cosine_batch",
    "multi_cosine_grad",
    "multi_cosine_grad_batch",
]

FULL, SPAN_DEFICIENT, ALL_PARALLEL = "full", "span_deficient", "all_parallel"
_FLAG_NAMES = (FULL, SPAN_DEFICIENT, ALL_PARALLEL)

ZERO_NORM = 1e-12
RANK_TOL = 1e-10


class ZeroVectorInput(ValueError):
    pass


class DegenerateGradient(ArithmeticError):
    def __init__(self, message: str, indices=()):
        super().__init__(message)
        self.indices = list(indices)


@dataclass
class EquiangularSolution:
    v: np.ndarray
    cosine: float
    rank_flag: str
    sign_choice: int


@dataclass
class SimilarityGradient:
    d_a: np.ndarray
    d_b: np.ndarray
    d_c: np.ndarray


def _dot(x, y):
    return dsum(x * y, axis=-1, keepdims=True)


def _norm(x):
    return dual.sqrt(_dot(x, x))


def _cross(A, B):
    a1, a2, a3 = A[..., 0], A[..., 1], A[..., 2]
    b1, b2, b3 = B[..., 0], B[..., 1], B[..., 2]
    return stack([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1)


def _null_direction(a, b, c):
    """Cross product of the two equal-cosine rows, for 3-vectors (batched)."""
    na, nb, nc = _norm(a), _norm(b), _norm(c)
    A = (nb / na) * a - b
    B = (nc / nb) * b - c
    return _cross(A, B), A, B


def _frame(a, b, c):
    """Gram-Schmidt frame of span{a, b, c} and the residual norms of b and c.

    Returns ``(q1, q2, q3, n2, n3)``; frames are only meaningful for rows
    where ``n2`` and ``n3`` exceed the rank tolerance.
    """
    q1 = a / _norm(a)
    ub = b / _norm(b)
    uc = c / _norm(c)
    r2 = ub - _dot(ub, q1) * q1
    n2 = _norm(r2)
    q2 = r2 / n2
    r3 = uc - _dot(uc, q1) * q1 - _dot(uc, q2) * q2
    n3 = _norm(r3)
    q3 = r3 / n3
    return q1, q2, q3, n2, n3


def _generic_span(a, b, c, l):
    """Full-rank path: reduce to frame coordinates, cross product, map back.

    Works on ndarrays and on :class:`Dual` inputs alike.
    """
    q1, q2, q3, n2, n3 = _frame(a, b, c)

    def coords(x):
        return stack([_dot(x, q1)[..., 0], _dot(x, q2)[..., 0], _dot(x, q3)[..., 0]], axis=-1)

    ca, cb, cc = coords(a), coords(b), coords(c)
    C, _, _ = _null_direction(ca, cb, cc)
    sign = np.where(dual.value(_dot(C, ca)) < 0.0, -1.0, 1.0)
    C = C * sign
    v_frame = C * (l / _norm(C))
    v = v_frame[..., 0:1] * q1 + v_frame[..., 1:2] * q2 + v_frame[..., 2:3] * q3
    cos = _dot(v, a)[..., 0] / (l * _norm(a)[..., 0])
    return v, cos, sign[..., 0], dual.value(n2)[..., 0], dual.value(n3)[..., 0]


def _complete(basis: list[np.ndarray], dim: int) -> np.ndarray:
    """Unit vector orthogonal to ``basis``: the standard basis vector with the
    largest residual, orthonormalized. Deterministic."""
    best, best_norm = None, -1.0
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        for q in basis:
            e = e - (e @ q) * q
        n = np.linalg.norm(e)
        if n > best_norm + 1e-12:
            best, best_norm = e, n
    return best / best_norm


def _solve_degenerate(a: np.ndarray, b: np.ndarray, c: np.ndarray, l: float):
    """Rank-deficient triples: fewer than three independent directions."""
    units = [x / np.linalg.norm(x) for x in (a, b, c)]
    distinct: list[np.ndarray] = []
    for u in units:
        if not any(np.linalg.norm(u - w) <= RANK_TOL for w in distinct):
            distinct.append(u)
    dim = a.shape[0]
    if len(distinct) == 1:
        return l * units[0], 1.0, ALL_PARALLEL, 1
    if len(distinct) == 2:
        u, w = distinct
        s = u + w
        if np.linalg.norm(s) > RANK_TOL:
            direction = s / np.linalg.norm(s)
        else:
            # antipodal pair: only directions orthogonal to it are equiangular
            direction = _complete([u], dim)
    else:
        # three distinct coplanar directions: only the plane normal works
        q1 = distinct[0]
        r = distinct[1] - (distinct[1] @ q1) * q1
        q2 = r / np.linalg.norm(r)
        direction = _complete([q1, q2], dim)
    sign = -1 if direction @ units[0] < 0.0 else 1
    v = sign * l * direction
    cos = float(v @ units[0] / l)
    return v, cos, SPAN_DEFICIENT, sign


def _check(a, b, c):
    a, b, c = (np.atleast_2d(np.asarray(x, dtype=np.float64)) for x in (a, b, c))
    if not (a.shape == b.shape == c.shape):
        raise ValueError(f"shape mismatch: {a.shape}, {b.shape}, {c.shape}")
    for name, x in (("a", a), ("b", b), ("c", c)):
        bad = np.flatnonzero(np.linalg.norm(x, axis=-1) < ZERO_NORM)
        if bad.size:
            raise ZeroVectorInput(f"input {name} has (near-)zero norm at row {int(bad[0])}")
    return a, b, c


def solve_batch(a, b, c, l: float = 1.0):
    """Vectorized solve over rows of ``(T, d)`` arrays, ``d >= 3``.

    Returns ``(v, cosine, flags, signs)`` with flags as strings.
    """
    if l <= 0:
        raise ValueError("l must be positive")
    a, b, c = _check(a, b, c)
    if a.shape[1] < 3:
        raise ValueError("vectors must have dimension >= 3")
    with np.errstate(divide="ignore", invalid="ignore"):
        v, cos, sign, n2, n3 = _generic_span(a, b, c, l)
    flags = np.zeros(len(a), dtype=np.int8)
    degenerate = (n2 <= RANK_TOL) | (n3 <= RANK_TOL) | ~np.isfinite(cos)
    for i in np.flatnonzero(degenerate):
        vi, ci, flag, si = _solve_degenerate(a[i], b[i], c[i], l)
        v[i], cos[i], sign[i] = vi, ci, si
        flags[i] = _FLAG_NAMES.index(flag)
    return v, cos, [_FLAG_NAMES[f] for f in flags], sign.astype(int)


def solve_equiangular_span(a, b, c, l: float = 1.0) -> EquiangularSolution:
    """Equal-angle vector of length ``l`` inside ``span{a, b, c}``."""
    v, cos, flags, signs = solve_batch(a, b, c, l)
    return EquiangularSolution(v[0], float(cos[0]), flags[0], int(signs[0]))


def solve_equiangular_r3(a, b, c, l: float = 1.0) -> EquiangularSolution:
    """Direct 3-D solve: null space of the 2x3 equal-cosine system by cross product."""
    if l <= 0:
        raise ValueError("l must be positive")
    a, b, c = _check(a, b, c)
    if a.shape != (1, 3):
        raise ValueError("solve_equiangular_r3 takes three 3-vectors")
    a, b, c = a[0], b[0], c[0]
    C, A, B = _null_direction(a, b, c)
    nC = np.linalg.norm(C)
    if nC <= RANK_TOL * np.linalg.norm(A) * np.linalg.norm(B) or nC == 0.0:
        v, cos, flag, sign = _solve_degenerate(a, b, c, l)
        return EquiangularSolution(v, cos, flag, sign)
    sign = -1 if C @ a < 0.0 else 1
    v = sign * l * C / nC
    cos = float(v @ a / (l * np.linalg.norm(a)))
    units = np.stack([x / np.linalg.norm(x) for x in (a, b, c)])
    flag = FULL if abs(np.linalg.det(units)) > RANK_TOL else SPAN_DEFICIENT
    return EquiangularSolution(v, cos, flag, sign)


def multi_cosine_batch(a, b, c) -> np.ndarray:
    return solve_batch(a, b, c, 1.0)[1]


def multi_cosine(a, b, c) -> float:
    """Shared cosine between the equal-angle vector and each input, in [0, 1]."""
    return float(multi_cosine_batch(a, b, c)[0])


def multi_cosine_grad_batch(a, b, c, directions: str = "span"):
    """Gradients of the multi-cosine for each row triple, via dual numbers.

    ``directions="coordinates"`` seeds one tangent per input coordinate
    (``3d`` tangents). ``directions="span"`` seeds only the nine directions
    ``q_j`` of each input along the frame of ``span{a, b, c}``: the cosine is
    invariant under reflections fixing the span, so its gradient lies in the
    span and those nine directional derivatives determine it exactly.

    Raises :class:`DegenerateGradient` when any triple is not full rank.
    """
    a, b, c = _check(a, b, c)
    T, d = a.shape
    _, _, flags, _ = solve_batch(a, b, c, 1.0)
    bad = [i for i, f in enumerate(flags) if f != FULL]
    if bad:
        raise DegenerateGradient(
            f"{len(bad)} triple(s) are rank deficient; gradient undefined", bad
        )
    if directions == "coordinates":
        eye = np.broadcast_to(np.eye(d), (T, d, d))
        zero = np.zeros((T, d, d))
        da = Dual(a, np.concatenate([eye, zero, zero], axis=-1))
        db = Dual(b, np.concatenate([zero, eye, zero], axis=-1))
        dc = Dual(c, np.concatenate([zero, zero, eye], axis=-1))
        _, cos, _, _, _ = _generic_span(da, db, dc, 1.0)
        g = cos.eps
        return g[:, :d], g[:, d:2 * d], g[:, 2 * d:]
    if directions == "span":
        q1, q2, q3, _, _ = _frame(a, b, c)
        Q = np.stack([q1, q2, q3], axis=-1)  # (T, d, 3)
        zero = np.zeros((T, d, 3))
        da = Dual(a, np.concatenate([Q, zero, zero], axis=-1))
        db = Dual(b, np.concatenate([zero, Q, zero], axis=-1))
        dc = Dual(c, np.concatenate([zero, zero, Q], axis=-1))
        _, cos, _, _, _ = _generic_span(da, db, dc, 1.0)
        g = cos.eps  # (T, 9) directional derivatives
        back = lambda k: np.einsum("tdj,tj->td", Q, g[:, 3 * k:3 * k + 3])  # noqa: E731
        return back(0), back(1), back(2)
    raise ValueError(f"unknown directions mode {directions!r}")


def multi_cosine_grad(a, b, c, directions: str = "coordinates") -> SimilarityGradient:
    ga, gb, gc = multi_cosine_grad_batch(a, b, c, directions)
    return SimilarityGradient(ga[0], gb[0], gc[0])
