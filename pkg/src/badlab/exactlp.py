"""Exact rational linear algebra, simplex, and polyhedra utilities.

Everything here is over the exact rational carrier: Gaussian elimination,
a two-phase tableau simplex with Bland's rule (small dense problems only,
which is all the slab geometry needs), Fourier-Motzkin projection, and
brute-force vertex enumeration for low-dimensional polytopes.  These are
the primitives behind sup-norm distances, slab enumeration and the
measure charts; none of them ever touch floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .exactnum import Rat, as_rat, rat, rat_abs, rat_ceil, rat_floor, rat_sign

Vec = Tuple[Rat, ...]


class InfeasibleError(Exception):
    pass


class UnboundedError(Exception):
    pass


# ---------------------------------------------------------------------
# dense exact linear algebra


def vec_dot(a: Sequence, b: Sequence) -> Rat:
    s = rat(0)
    for x, y in zip(a, b):
        s += x * y
    return s


def rref(rows: List[List[Rat]]) -> Tuple[List[List[Rat]], List[int]]:
    """Reduced row echelon form; returns (matrix, pivot column indices)."""
    m = [list(map(as_rat, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def matrix_rank(rows: List[Sequence]) -> int:
    _, piv = rref([list(r) for r in rows])
    return len(piv)


def solve_square(a: List[List[Rat]], b: List[Rat]) -> Optional[List[Rat]]:
    """Solution of a x = b for square a, or None when singular."""
    n = len(a)
    aug = [list(a[i]) + [b[i]] for i in range(n)]
    m, piv = rref(aug)
    if piv == list(range(n)):
        return [m[i][n] for i in range(n)]
    return None


def nullspace_basis(rows: List[Sequence]) -> List[List[Rat]]:
    """Basis of {u : rows @ u = 0} (u in the row length dimension)."""
    if not rows:
        return []
    n = len(rows[0])
    m, piv = rref([list(r) for r in rows])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for fc in free:
        v = [rat(0)] * n
        v[fc] = rat(1)
        for ri, pc in enumerate(piv):
            v[pc] = -m[ri][fc]
        basis.append(v)
    return basis


def in_row_span(rows: List[Sequence], v: Sequence) -> bool:
    base = [list(r) for r in rows]
    return matrix_rank(base + [list(v)]) == matrix_rank(base)


def det_exact(a: List[List[Rat]]) -> Rat:
    """Determinant by exact Gaussian elimination."""
    n = len(a)
    m = [list(map(as_rat, row)) for row in a]
    det = rat(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return rat(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def gram_det(rows: List[List[Rat]]) -> Rat:
    g = [[vec_dot(a, b) for b in rows] for a in rows]
    return det_exact(g)


def extend_to_basis(rows: List[List[Rat]], ambient: int) -> List[List[Rat]]:
    """Extend independent rows to a basis of R^ambient with unit vectors.

    Among the eligible unit vectors the one maximizing the Gram
    determinant is taken at each step.  Rank alone is not enough here:
    exact data that is only independent through tiny truncation residues
    would otherwise produce a basis with absurd coordinate functionals.
    """
    out = [list(r) for r in rows]
    assert matrix_rank(out) == len(out) if out else True, "rows must be independent"
    while len(out) < ambient:
        best = None
        best_meas = None
        for j in range(ambient):
            e = [rat(0)] * ambient
            e[j] = rat(1)
            meas = gram_det(out + [e])
            if meas == 0:
                continue
            if best_meas is None or meas > best_meas:
                best, best_meas = e, meas
        if best is None:
            raise ValueError("cannot extend to a basis")
        out.append(best)
    return out


def invert_matrix(a: List[List[Rat]]) -> List[List[Rat]]:
    n = len(a)
    aug = [list(a[i]) + [rat(1) if j == i else rat(0) for j in range(n)] for i in range(n)]
    m, piv = rref(aug)
    if piv != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in m]


# ---------------------------------------------------------------------
# two-phase simplex, Bland's rule


def _pivot(tab: List[List[Rat]], basis: List[int], pr: int, pc: int) -> None:
    prow = tab[pr]
    inv = 1 / prow[pc]
    tab[pr] = [v * inv for v in prow]
    prow = tab[pr]
    for i, row in enumerate(tab):
        if i != pr and row[pc] != 0:
            f = row[pc]
            tab[i] = [a - f * b for a, b in zip(row, prow)]
    basis[pr] = pc


def _cost_eliminate(cost: List[Rat], row: List[Rat], f: Rat) -> None:
    if f == 0:
        return
    for j in range(len(cost)):
        cost[j] -= f * row[j]


def _run_simplex(tab, basis, cost) -> None:
    """Minimize cost (a full row of reduced costs updated in place)."""
    ncols = len(cost) - 1
    while True:
        pc = None
        for j in range(ncols):
            if cost[j] < 0:
                pc = j
                break
        if pc is None:
            return
        pr = None
        best = None
        for i, row in enumerate(tab):
            if row[pc] > 0:
                ratio = row[-1] / row[pc]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[pr]
                ):
                    best = ratio
                    pr = i
        if pr is None:
            raise UnboundedError("objective unbounded below")
        _pivot(tab, basis, pr, pc)
        _cost_eliminate(cost, tab[pr], cost[pc])


def lp_min(
    c: Sequence, a_ub: List[Sequence], b_ub: Sequence
) -> Tuple[Rat, List[Rat]]:
    """min c.x over {A x <= b} with free x; exact two-phase simplex.

    Returns (value, argmin).  Raises InfeasibleError / UnboundedError.
    """
    m = len(a_ub)
    n = len(c)
    c = [as_rat(v) for v in c]
    if m == 0:
        if any(v != 0 for v in c):
            raise UnboundedError("no constraints")
        return rat(0), [rat(0)] * n
    # variables: u (n), v (n), slacks (m), artificials (m)
    ncols = 2 * n + 2 * m
    tab: List[List[Rat]] = []
    for i in range(m):
        row = [as_rat(v) for v in a_ub[i]]
        rhs = as_rat(b_ub[i])
        neg = rhs < 0
        sgn = rat(-1) if neg else rat(1)
        r = [sgn * v for v in row] + [-sgn * v for v in row]
        slack = [rat(0)] * m
        slack[i] = sgn
        art = [rat(0)] * m
        art[i] = rat(1)
        tab.append(r + slack + art + [sgn * rhs])
    basis = [2 * n + m + i for i in range(m)]

    # phase 1: minimize sum of artificials
    cost = [rat(0)] * (ncols + 1)
    for j in range(2 * n + m, 2 * n + 2 * m):
        cost[j] = rat(1)
    for i in range(m):
        # make reduced costs of the basic artificials zero
        _cost_eliminate(cost, tab[i], rat(1))
    _run_simplex(tab, basis, cost)
    if -cost[-1] != 0:
        raise InfeasibleError("phase 1 optimum nonzero")
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= 2 * n + m:
            pc = next(
                (j for j in range(2 * n + m) if tab[i][j] != 0),
                None,
            )
            if pc is not None:
                _pivot(tab, basis, i, pc)
    keep = [i for i in range(len(tab)) if basis[i] < 2 * n + m]
    tab = [tab[i] for i in keep]
    basis = [basis[i] for i in keep]
    # drop artificial columns
    tab = [row[: 2 * n + m] + [row[-1]] for row in tab]
    ncols = 2 * n + m

    # phase 2
    cost = [rat(0)] * (ncols + 1)
    for j in range(n):
        cost[j] = c[j]
        cost[n + j] = -c[j]
    for i, bj in enumerate(basis):
        _cost_eliminate(cost, tab[i], cost[bj])
    _run_simplex(tab, basis, cost)
    x = [rat(0)] * (2 * n + m)
    for i, bj in enumerate(basis):
        x[bj] = tab[i][-1]
    sol = [x[j] - x[n + j] for j in range(n)]
    return vec_dot(c, sol), sol


def lp_max(c, a_ub, b_ub) -> Tuple[Rat, List[Rat]]:
    v, x = lp_min([-as_rat(t) for t in c], a_ub, b_ub)
    return -v, x


# ---------------------------------------------------------------------
# H-polyhedra


def _normalize_row(coeffs: Tuple[Rat, ...], rhs: Rat):
    scale = None
    for v in coeffs:
        if v != 0:
            scale = rat_abs(v)
            break
    if scale is None:
        return None, rhs  # constant row
    inv = 1 / scale
    return tuple(v * inv for v in coeffs), rhs * inv


@dataclass
class HPoly:
    """Finite system of inequalities coeffs . x <= rhs over nvars."""

    nvars: int
    rows: List[Tuple[Tuple[Rat, ...], Rat]] = field(default_factory=list)
    infeasible_const: bool = False

    def add(self, coeffs: Sequence, rhs) -> None:
        coeffs = tuple(as_rat(v) for v in coeffs)
        rhs = as_rat(rhs)
        assert len(coeffs) == self.nvars
        norm, nr = _normalize_row(coeffs, rhs)
        if norm is None:
            if nr < 0:
                self.infeasible_const = True
            return
        self.rows.append((norm, nr))

    def dedupe(self) -> None:
        best = {}
        for coeffs, rhs in self.rows:
            cur = best.get(coeffs)
            if cur is None or rhs < cur:
                best[coeffs] = rhs
        self.rows = sorted(best.items())

    def contains(self, point: Sequence) -> bool:
        if self.infeasible_const:
            return False
        p = [as_rat(v) for v in point]
        for coeffs, rhs in self.rows:
            if vec_dot(coeffs, p) > rhs:
                return False
        return True

    def minimize(self, c: Sequence) -> Tuple[Rat, List[Rat]]:
        if self.infeasible_const:
            raise InfeasibleError("constant row infeasible")
        a = [list(r[0]) for r in self.rows]
        b = [r[1] for r in self.rows]
        return lp_min(list(c), a, b)

    def maximize(self, c: Sequence) -> Tuple[Rat, List[Rat]]:
        if self.infeasible_const:
            raise InfeasibleError("constant row infeasible")
        a = [list(r[0]) for r in self.rows]
        b = [r[1] for r in self.rows]
        return lp_max(list(c), a, b)

    def eliminate(self, k: int) -> "HPoly":
        """Fourier-Motzkin projection dropping variable k."""
        out = HPoly(self.nvars - 1)
        out.infeasible_const = self.infeasible_const
        zero, pos, neg = [], [], []
        for coeffs, rhs in self.rows:
            ck = coeffs[k]
            rest = coeffs[:k] + coeffs[k + 1 :]
            if ck == 0:
                zero.append((rest, rhs))
            elif ck > 0:
                pos.append((rest, rhs, ck))
            else:
                neg.append((rest, rhs, -ck))
        for rest, rhs in zero:
            out.add(rest, rhs)
        for prest, prhs, pc in pos:
            for nrest, nrhs, nc in neg:
                coeffs = tuple(a / pc + b / nc for a, b in zip(prest, nrest))
                out.add(coeffs, prhs / pc + nrhs / nc)
        out.dedupe()
        return out

    def vertices(self) -> List[Vec]:
        """All vertices by basis enumeration; intended for nvars <= 4."""
        if self.infeasible_const:
            return []
        n = self.nvars
        seen = set()
        out = []
        for combo in itertools.combinations(range(len(self.rows)), n):
            a = [list(self.rows[i][0]) for i in combo]
            b = [self.rows[i][1] for i in combo]
            sol = solve_square(a, b)
            if sol is None:
                continue
            key = tuple(sol)
            if key in seen:
                continue
            if self.contains(sol):
                seen.add(key)
                out.append(key)
        return sorted(out)

    def volume(self) -> Rat:
        """Exact volume for nvars <= 2 via vertex enumeration."""
        vs = self.vertices()
        if not vs:
            return rat(0)
        if self.nvars == 1:
            xs = [v[0] for v in vs]
            return max(xs) - min(xs)
        if self.nvars == 2:
            return _hull_area(vs)
        raise NotImplementedError("exact volume implemented for dimension <= 2")


def _hull_area(points: List[Vec]) -> Rat:
    """Area of the convex hull of exact 2-d points (monotone chain)."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return rat(0)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Vec] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Vec] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    area2 = rat(0)
    for i in range(len(hull)):
        x1, y1 = hull[i]
        x2, y2 = hull[(i + 1) % len(hull)]
        area2 += x1 * y2 - x2 * y1
    return rat_abs(area2) / 2


# ---------------------------------------------------------------------
# integer point enumeration through projection chains


def projection_chain(poly: HPoly) -> List[HPoly]:
    """chain[k] constrains variables x_0..x_{k-1}; chain[nvars] = poly."""
    chain = [None] * (poly.nvars + 1)
    chain[poly.nvars] = poly
    cur = poly
    for k in range(poly.nvars - 1, -1, -1):
        cur = cur.eliminate(k)
        chain[k] = cur
    return chain


def _level_bounds(level: HPoly, prefix: List[Rat], k: int):
    lo = None
    hi = None
    for coeffs, rhs in level.rows:
        ck = coeffs[k]
        if ck == 0:
            continue
        acc = rhs
        for j in range(k):
            acc -= coeffs[j] * prefix[j]
        bound = acc / ck
        if ck > 0:
            if hi is None or bound < hi:
                hi = bound
        else:
            if lo is None or bound > lo:
                lo = bound
    return lo, hi


def enumerate_integer_points(
    poly: HPoly,
    chain: Optional[List[HPoly]] = None,
    prefix_lo: Optional[int] = None,
    prefix_hi: Optional[int] = None,
):
    """Yield integer points of the polyhedron in lexicographic order.

    Every variable must be bounded both ways (the chain supplies interval
    bounds per level); unbounded directions raise UnboundedError.  The
    optional prefix window restricts the first coordinate, which is how
    enumeration splits across workers.
    """
    if poly.infeasible_const:
        return
    if chain is None:
        chain = projection_chain(poly)
    if chain[0].infeasible_const:
        return
    n = poly.nvars
    prefix: List[Rat] = []

    def rec(k: int):
        lo, hi = _level_bounds(chain[k + 1], prefix, k)
        if lo is None or hi is None:
            raise UnboundedError(f"variable {k} unbounded in enumeration")
        ilo, ihi = rat_ceil(lo), rat_floor(hi)
        if k == 0:
            if prefix_lo is not None:
                ilo = max(ilo, prefix_lo)
            if prefix_hi is not None:
                ihi = min(ihi, prefix_hi)
        for v in range(ilo, ihi + 1):
            prefix.append(rat(v))
            if k == n - 1:
                yield tuple(int(p) for p in prefix)
            else:
                yield from rec(k + 1)
            prefix.pop()

    yield from rec(0)
