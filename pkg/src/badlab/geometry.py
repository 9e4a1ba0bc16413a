"""Affine subspaces, their lifts, and exact sup-norm distances.

An affine subspace of R^d is stored as a rational base point plus
independent rational directions.  Its lift is the linear span in R^(d+1)
generated by (1, point) and (0, direction_i); approximation properties of
the affine object become lattice statements about this span.

Distances are always in the sup norm.  The general case is an exact
simplex solve; spans of a single vector take a closed-form pair formula,
and repeated membership tests against one span go through its dual
functionals (the vertices of the orthogonal L1-ball section), which turn
"distance <= eps" into finitely many exact half-space tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .exactlp import (
    HPoly,
    in_row_span,
    lp_min,
    matrix_rank,
    nullspace_basis,
    solve_square,
    vec_dot,
)
from .exactnum import Rat, as_rat, rat, rat_abs, rat_floor

Vec = Tuple[Rat, ...]


def vec(*coords) -> Vec:
    return tuple(as_rat(c) for c in coords)


def as_vec(coords: Sequence) -> Vec:
    return tuple(as_rat(c) for c in coords)


def sup_norm(v: Sequence) -> Rat:
    out = rat(0)
    for c in v:
        a = rat_abs(as_rat(c))
        if a > out:
            out = a
    return out


def nearest_int_dist(x) -> Rat:
    """Distance from a rational to the nearest integer; ties give 1/2."""
    x = as_rat(x)
    n = rat_floor(x + rat(1, 2))
    return rat_abs(x - n)


def vec_sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(as_rat(x) - as_rat(y) for x, y in zip(a, b))


def vec_add(a: Sequence, b: Sequence) -> Vec:
    return tuple(as_rat(x) + as_rat(y) for x, y in zip(a, b))


def vec_scale(a: Sequence, s) -> Vec:
    s = as_rat(s)
    return tuple(as_rat(x) * s for x in a)


def canon_sign(v: Sequence) -> Vec:
    """Flip sign so the first nonzero coordinate is positive."""
    w = as_vec(v)
    for c in w:
        if c != 0:
            return w if c > 0 else tuple(-x for x in w)
    return w


@dataclass(frozen=True)
class AffineSubspace:
    """point + span(directions) inside R^d, everything rational."""

    point: Vec
    directions: Tuple[Vec, ...]

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec(self.point))
        object.__setattr__(
            self, "directions", tuple(as_vec(d) for d in self.directions)
        )
        d = len(self.point)
        for v in self.directions:
            if len(v) != d:
                raise ValueError("direction dimension mismatch")
        if self.directions and matrix_rank([list(v) for v in self.directions]) != len(
            self.directions
        ):
            raise ValueError("directions must be linearly independent")
        if len(self.directions) > d:
            raise ValueError("more directions than the ambient dimension")

    @property
    def ambient(self) -> int:
        return len(self.point)

    @property
    def dim(self) -> int:
        return len(self.directions)

    def describe(self) -> str:
        parts = ["point=" + ",".join(str(c) for c in self.point)]
        for i, v in enumerate(self.directions):
            parts.append(f"dir{i}=" + ",".join(str(c) for c in v))
        return "; ".join(parts)


@dataclass(frozen=True)
class LiftedSpan:
    """Linear span of rational basis rows in R^(d+1).

    An empty basis is the zero subspace, whose distance is the sup norm
    itself.  Lifts of affine subspaces always carry (1, point) first and
    (0, direction) rows after it.
    """

    basis: Tuple[Vec, ...]
    ambient: int

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(as_vec(b) for b in self.basis))
        for b in self.basis:
            if len(b) != self.ambient:
                raise ValueError("basis dimension mismatch")
        if self.basis and matrix_rank([list(b) for b in self.basis]) != len(
            self.basis
        ):
            raise ValueError("basis rows must be independent")
        if len(self.basis) > self.ambient:
            raise ValueError("basis larger than the ambient dimension")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        if not self.basis:
            return all(as_rat(c) == 0 for c in v)
        return in_row_span([list(b) for b in self.basis], list(as_vec(v)))

    def is_subspace_of(self, other: "LiftedSpan") -> bool:
        return all(other.contains(b) for b in self.basis)


def lift(sub: AffineSubspace) -> LiftedSpan:
    """Span of (1, point) and (0, direction_i) in R^(d+1)."""
    rows = [(rat(1),) + sub.point]
    for v in sub.directions:
        rows.append((rat(0),) + v)
    return LiftedSpan(tuple(tuple(r) for r in rows), sub.ambient + 1)


def cheb_distance(z: Sequence, span: LiftedSpan) -> Tuple[Rat, Vec]:
    """Exact sup-norm distance from z to the span, with optimal coefficients.

    Solved as the linear program min r over span coefficients t:
    |z_i - (t . basis)_i| <= r for every coordinate.  Returns (distance,
    t*); for the zero span t* is empty and the distance is sup_norm(z).
    """
    zv = as_vec(z)
    if len(zv) != span.ambient:
        raise ValueError("point dimension mismatch")
    m = span.dim
    if m == 0:
        return sup_norm(zv), ()
    a_ub = []
    b_ub = []
    for i in range(span.ambient):
        col = [span.basis[k][i] for k in range(m)]
        a_ub.append([-c for c in col] + [rat(-1)])
        b_ub.append(-zv[i])
        a_ub.append(list(col) + [rat(-1)])
        b_ub.append(zv[i])
    c = [rat(0)] * m + [rat(1)]
    val, x = lp_min(c, a_ub, b_ub)
    return val, tuple(x[:m])


def line_distance(z: Sequence, a: Sequence) -> Rat:
    """min_t sup_i |z_i - t a_i| for a nonzero direction a, closed form.

    Equals max over coordinate pairs of |z_j a_k - z_k a_j|/(|a_j|+|a_k|);
    agrees with the simplex route and is what inner loops use for
    one-dimensional spans.
    """
    zv, av = as_vec(z), as_vec(a)
    best = rat(0)
    n = len(zv)
    for j in range(n):
        for k in range(j + 1, n):
            denom = rat_abs(av[j]) + rat_abs(av[k])
            if denom == 0:
                continue
            val = rat_abs(zv[j] * av[k] - zv[k] * av[j]) / denom
            if val > best:
                best = val
    return best


def dual_functionals(span: LiftedSpan) -> List[Vec]:
    """Vertices u of {u orthogonal to span, ||u||_1 <= 1}.

    By duality the sup-norm distance to the span is max_u |u . z| over
    these finitely many rational functionals, so membership in a slab is
    a batch of exact inequalities.  Intended for small ambient dimension
    (the vertex enumeration is exponential in it).
    """
    n = span.ambient
    if span.dim == 0:
        null = [[rat(1) if j == i else rat(0) for j in range(n)] for i in range(n)]
    else:
        null = nullspace_basis([list(b) for b in span.basis])
    m = len(null)
    if m == 0:
        return []
    # u = N s; the L1 ball |u|_1 <= 1 becomes sign-pattern rows over s
    poly = HPoly(m)
    for signs in itertools.product((1, -1), repeat=n):
        row = [
            sum(as_rat(signs[i]) * null[k][i] for i in range(n)) for k in range(m)
        ]
        poly.add(row, 1)
    poly.dedupe()
    out = []
    seen = set()
    for s in poly.vertices():
        u = tuple(
            sum(s[k] * null[k][i] for k in range(m)) for i in range(n)
        )
        cu = canon_sign(u)
        if any(c != 0 for c in cu) and cu not in seen:
            seen.add(cu)
            out.append(cu)
    return sorted(out)


def distance_via_functionals(z: Sequence, functionals: Sequence[Vec]) -> Rat:
    zv = as_vec(z)
    best = rat(0)
    for u in functionals:
        v = rat_abs(vec_dot(u, zv))
        if v > best:
            best = v
    return best


def adapted_basis(
    inner: LiftedSpan, outer: LiftedSpan, ambient: int
) -> List[List[Rat]]:
    """Basis of R^ambient listing inner rows, then outer, then fill-ins.

    Used to set up covering grids aligned with a nested pair of spans.
    Requires inner to be a subspace of outer.
    """
    if not inner.is_subspace_of(outer):
        raise ValueError("inner span must lie inside the outer span")
    rows = [list(b) for b in inner.basis]
    rk = len(rows)
    for b in outer.basis:
        cand = rows + [list(b)]
        if matrix_rank(cand) > rk:
            rows = cand
            rk += 1
    from .exactlp import extend_to_basis

    return extend_to_basis(rows, ambient)


def solve_in_basis(basis_rows: List[List[Rat]], v: Sequence) -> List[Rat]:
    """Coordinates of v in the given basis of R^n (rows)."""
    n = len(basis_rows)
    a = [[basis_rows[k][i] for k in range(n)] for i in range(n)]
    sol = solve_square(a, list(as_vec(v)))
    if sol is None:
        raise ValueError("not a basis")
    return sol
