"""Exact rational arithmetic and certified interval evaluation.

Two layers live here.  The first is a thin facade over an exact rational
carrier: gmpy2.mpq when available (GMP-backed, fast at large bit sizes),
fractions.Fraction otherwise.  Everything downstream goes through `rat` /
`as_rat` so the carrier is swappable.

The second layer is HPInterval, a closed interval with dyadic endpoints
computed through mpmath's low-level directed-rounding primitives.  It is
used whenever a quantity (log T, T^(1/2), ...) is irrational: the interval
certifiably contains the true value, and comparisons against rationals are
decided by doubling the working precision until the interval separates
from the query point or a hard cap is reached.  An undecided comparison
raises; nothing is silently rounded.
"""

from __future__ import annotations

import os
from typing import Callable, Optional, Union

from mpmath.libmp import (
    from_int,
    from_rational,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_exp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_pow_int,
    mpf_sub,
    round_ceiling,
    round_floor,
)

try:
    import gmpy2

    Rat = gmpy2.mpq
    _mpz = gmpy2.mpz
    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as Rat

    _mpz = int
    HAVE_GMPY2 = False

RatLike = Union[Rat, int]

DEFAULT_MAX_BITS = 256
_START_BITS = 64


class UndecidableComparison(Exception):
    """Interval refinement hit the precision cap without separating."""


class PrecisionError(Exception):
    """A certified evaluation could not reach the requested width."""


def rat(p, q=1) -> Rat:
    """Exact rational p/q."""
    return Rat(p, q)


def as_rat(x) -> Rat:
    if isinstance(x, Rat):
        return x
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass an exact rational")
    return Rat(x)


def num(x: Rat) -> int:
    return int(x.numerator)


def den(x: Rat) -> int:
    return int(x.denominator)


def rat_floor(x: RatLike) -> int:
    if isinstance(x, int):
        return x
    return num(x) // den(x)


def rat_ceil(x: RatLike) -> int:
    if isinstance(x, int):
        return x
    return -((-num(x)) // den(x))


def rat_sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def rat_abs(x: Rat) -> Rat:
    return -x if x < 0 else x


def rat_min(values):
    it = iter(values)
    best = next(it)
    for v in it:
        if v < best:
            best = v
    return best


def rat_max(values):
    it = iter(values)
    best = next(it)
    for v in it:
        if v > best:
            best = v
    return best


def is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def parse_rat(text: str) -> Rat:
    """Parse "p", "p/q" or "p/2^k" literals.  Floats are rejected."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    if any(c in s for c in ".eE") and not s.lstrip("+-").isdigit():
        # allow digits only; "1e3" and "0.5" are both refused
        if "/" not in s or "." in s:
            raise ValueError(f"not an exact rational literal: {text!r}")
    if "/" in s:
        p_s, q_s = s.split("/", 1)
        p = int(p_s)
        q_s = q_s.strip()
        if q_s.startswith("2^"):
            q = 1 << int(q_s[2:])
        else:
            q = int(q_s)
        if q <= 0:
            raise ValueError(f"nonpositive denominator in {text!r}")
        return Rat(p, q)
    return Rat(int(s))


def format_rat(x: RatLike) -> str:
    """Lossless text form: "p", "p/q", or "p/2^k" for wide dyadics."""
    x = as_rat(x)
    d = den(x)
    if d == 1:
        return str(num(x))
    if is_pow2(d) and d >= (1 << 16):
        return f"{num(x)}/2^{d.bit_length() - 1}"
    return f"{num(x)}/{d}"


def exact_kth_root(n: int, k: int) -> Optional[int]:
    """Integer k-th root of n >= 0 if n is a perfect k-th power, else None."""
    if n < 0 or k <= 0:
        raise ValueError("need n >= 0, k >= 1")
    if n in (0, 1) or k == 1:
        return n if k >= 1 else None
    if HAVE_GMPY2:
        r, exact = gmpy2.iroot(_mpz(n), k)
        return int(r) if exact else None
    lo, hi = 0, 1
    while hi**k < n:
        hi <<= 1
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def rat_pow(x: Rat, e: int) -> Rat:
    """x**e for integer e (negative allowed, x != 0 then)."""
    if e >= 0:
        return Rat(num(x) ** e, den(x) ** e)
    if x == 0:
        raise ZeroDivisionError("0 to a negative power")
    return Rat(den(x) ** (-e), num(x) ** (-e))


def rat_root(x: Rat, k: int) -> Optional[Rat]:
    """Exact x^(1/k) for x >= 0 if rational, else None."""
    if x < 0:
        raise ValueError("negative radicand")
    rn = exact_kth_root(num(x), k)
    if rn is None:
        return None
    rd = exact_kth_root(den(x), k)
    if rd is None:
        return None
    return Rat(rn, rd)


def rat_pow_rat(x: Rat, e: Rat) -> Optional[Rat]:
    """Exact x**e for rational e when the result is rational, else None."""
    e = as_rat(e)
    p, q = num(e), den(e)
    root = rat_root(x, q) if q > 1 else x
    if root is None:
        return None
    return rat_pow(root, p)


def rat_cmp_power(x: RatLike, y: RatLike, p: int, q: int) -> int:
    """Exact ordering of x against y**(p/q), via cross powers.

    Requires x > 0, y > 0 and q >= 1.  Returns -1, 0 or 1.  The comparison
    x ? y^(p/q) is equivalent to x^q ? y^p, which is a pure integer
    comparison after clearing denominators; no rounding is involved.
    """
    x = as_rat(x)
    y = as_rat(y)
    if x <= 0 or y <= 0:
        raise ValueError("rat_cmp_power needs positive operands")
    if q < 1:
        raise ValueError("root index q must be >= 1")
    lhs = rat_pow(x, q)
    rhs = rat_pow(y, p)
    if lhs < rhs:
        return -1
    if lhs > rhs:
        return 1
    return 0


ORDER_WORDS = {-1: "less", 0: "equal", 1: "greater"}


def max_precision_bits() -> int:
    """Refinement cap, overridable via BADLAB_PRECISION_BITS."""
    raw = os.environ.get("BADLAB_PRECISION_BITS")
    if raw is None:
        return DEFAULT_MAX_BITS
    bits = int(raw)
    if bits < _START_BITS:
        raise ValueError("BADLAB_PRECISION_BITS must be >= 64")
    return bits


def _to_rat(t) -> Rat:
    # mpf tuples are dyadic: (sign, man, exp, bc)
    sign, man, exp, _ = t
    if man == 0:
        if exp == 0:
            return Rat(0)
        raise OverflowError("nonfinite endpoint")
    man = int(man)
    exp = int(exp)
    v = Rat(man << exp) if exp >= 0 else Rat(man, 1 << (-exp))
    return -v if sign else v


class HPInterval:
    """Closed interval [lo, hi] with exact dyadic endpoints.

    All arithmetic rounds outward at `prec` bits, so the result interval
    always contains the exact value of the expression.  Endpoints are kept
    as raw mpf tuples; `lo`/`hi` expose them as exact rationals.
    """

    __slots__ = ("_lo", "_hi", "prec")

    def __init__(self, lo_mpf, hi_mpf, prec: int):
        self._lo = lo_mpf
        self._hi = hi_mpf
        self.prec = prec
        if mpf_cmp(lo_mpf, hi_mpf) > 0:
            raise ValueError("inverted interval")

    @staticmethod
    def from_rat(x: RatLike, prec: int) -> "HPInterval":
        x = as_rat(x)
        p, q = num(x), den(x)
        return HPInterval(
            from_rational(p, q, prec, round_floor),
            from_rational(p, q, prec, round_ceiling),
            prec,
        )

    @staticmethod
    def from_int_value(n: int, prec: int) -> "HPInterval":
        t = from_int(n)
        return HPInterval(t, t, prec)

    @property
    def lo(self) -> Rat:
        return _to_rat(self._lo)

    @property
    def hi(self) -> Rat:
        return _to_rat(self._hi)

    def width(self) -> Rat:
        return self.hi - self.lo

    def __repr__(self):
        return f"HPInterval[{float(self.lo)}, {float(self.hi)}]@{self.prec}"

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "HPInterval") -> "HPInterval":
        p = min(self.prec, other.prec)
        return HPInterval(
            mpf_add(self._lo, other._lo, p, round_floor),
            mpf_add(self._hi, other._hi, p, round_ceiling),
            p,
        )

    def __sub__(self, other: "HPInterval") -> "HPInterval":
        p = min(self.prec, other.prec)
        return HPInterval(
            mpf_sub(self._lo, other._hi, p, round_floor),
            mpf_sub(self._hi, other._lo, p, round_ceiling),
            p,
        )

    def __neg__(self) -> "HPInterval":
        return HPInterval(mpf_neg(self._hi), mpf_neg(self._lo), self.prec)

    def __mul__(self, other: "HPInterval") -> "HPInterval":
        p = min(self.prec, other.prec)
        cands_lo = []
        cands_hi = []
        for a in (self._lo, self._hi):
            for b in (other._lo, other._hi):
                cands_lo.append(mpf_mul(a, b, p, round_floor))
                cands_hi.append(mpf_mul(a, b, p, round_ceiling))
        lo = cands_lo[0]
        for c in cands_lo[1:]:
            if mpf_cmp(c, lo) < 0:
                lo = c
        hi = cands_hi[0]
        for c in cands_hi[1:]:
            if mpf_cmp(c, hi) > 0:
                hi = c
        return HPInterval(lo, hi, p)

    def inverse(self) -> "HPInterval":
        if self.contains_zero():
            raise ZeroDivisionError("interval straddles zero")
        p = self.prec
        one = from_int(1)
        return HPInterval(
            mpf_div(one, self._hi, p, round_floor),
            mpf_div(one, self._lo, p, round_ceiling),
            p,
        )

    def __truediv__(self, other: "HPInterval") -> "HPInterval":
        return self * other.inverse()

    def log(self) -> "HPInterval":
        if self.sign_lo() <= 0:
            raise ValueError("log needs a strictly positive interval")
        p = self.prec
        return HPInterval(
            mpf_log(self._lo, p, round_floor),
            mpf_log(self._hi, p, round_ceiling),
            p,
        )

    def exp(self) -> "HPInterval":
        p = self.prec
        return HPInterval(
            mpf_exp(self._lo, p, round_floor),
            mpf_exp(self._hi, p, round_ceiling),
            p,
        )

    def pow_int(self, e: int) -> "HPInterval":
        p = self.prec
        if e == 0:
            one = from_int(1)
            return HPInterval(one, one, p)
        if e < 0:
            return self.inverse().pow_int(-e)
        if self.sign_lo() >= 0:
            return HPInterval(
                mpf_pow_int(self._lo, e, p, round_floor),
                mpf_pow_int(self._hi, e, p, round_ceiling),
                p,
            )
        # mixed-sign base: fall back to repeated multiplication
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def pow_rat(self, e: Rat) -> "HPInterval":
        """self**e for rational e via exp(e log self); base must be > 0."""
        e = as_rat(e)
        if den(e) == 1:
            return self.pow_int(num(e))
        ei = HPInterval.from_rat(e, self.prec)
        return (self.log() * ei).exp()

    # -- queries ------------------------------------------------------

    def sign_lo(self) -> int:
        s, man, _, _ = self._lo
        if man == 0:
            return 0
        return -1 if s else 1

    def contains_zero(self) -> bool:
        slo, mlo = self._lo[0], self._lo[1]
        shi, mhi = self._hi[0], self._hi[1]
        lo_pos = mlo != 0 and not slo
        hi_neg = mhi != 0 and shi
        return not (lo_pos or hi_neg)

    def contains(self, x: RatLike) -> bool:
        x = as_rat(x)
        return self.lo <= x <= self.hi

    def cmp_rat(self, x: RatLike) -> Optional[int]:
        """Ordering of the exact value vs x: -1/1 when separated, else None."""
        x = as_rat(x)
        if self.hi < x:
            return -1
        if self.lo > x:
            return 1
        return None

    def intersect(self, other: "HPInterval") -> "HPInterval":
        lo = self._lo if mpf_cmp(self._lo, other._lo) >= 0 else other._lo
        hi = self._hi if mpf_cmp(self._hi, other._hi) <= 0 else other._hi
        return HPInterval(lo, hi, max(self.prec, other.prec))


def refine_cmp(
    x: RatLike,
    evaluator: Callable[[int], HPInterval],
    max_bits: Optional[int] = None,
    exact: Optional[Rat] = None,
) -> int:
    """Ordering of x against a certified quantity.

    `evaluator(bits)` must return an HPInterval containing the quantity.
    When `exact` is given the comparison is a plain rational compare.  The
    interval route doubles precision up to the cap and intersects refined
    intervals with earlier ones (all contain the value, so this is sound
    and keeps refinement monotone).  Equality is only reachable on the
    exact path; an interval that never separates raises.
    """
    x = as_rat(x)
    if exact is not None:
        return rat_sign(x - exact)
    cap = max_bits if max_bits is not None else max_precision_bits()
    bits = _START_BITS
    acc = None
    while True:
        iv = evaluator(bits)
        acc = iv if acc is None else acc.intersect(iv)
        c = acc.cmp_rat(x)
        if c is not None:
            # acc orders the quantity vs x; flip to x vs quantity
            return -c
        if bits >= cap:
            raise UndecidableComparison(
                f"comparison of {format_rat(x)} undecided at {cap} bits "
                f"(interval [{float(acc.lo)}, {float(acc.hi)}])"
            )
        bits = min(bits * 2, cap)


def refine_to_width(
    evaluator: Callable[[int], HPInterval],
    target_width: Rat,
    max_bits: Optional[int] = None,
) -> HPInterval:
    """Interval of width <= target_width, or PrecisionError at the cap."""
    cap = max_bits if max_bits is not None else max_precision_bits()
    bits = _START_BITS
    acc = None
    while True:
        iv = evaluator(bits)
        acc = iv if acc is None else acc.intersect(iv)
        if acc.width() <= target_width:
            return acc
        if bits >= cap:
            raise PrecisionError(
                f"width {float(acc.width())} above target at {cap} bits"
            )
        bits = min(bits * 2, cap)
