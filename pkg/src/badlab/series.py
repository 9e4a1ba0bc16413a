"""Scale factors, measure increments, and convergence bookkeeping.

mu_term and lambda_term are the two factors of the comparison series
Sigma mu_T * lambda_T.  Both come back exact when the rate values are
rational and as certified intervals otherwise.  The convergence verdict
itself never rests on floats: for power/power-log rates the term is
exactly of order T^p (log T)^q with rational p and q, and the series
converges iff p < -1, or p = -1 and q < -1.  Numeric partial sums are
attached as evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

from .exactnum import HPInterval, Rat, as_rat, rat, rat_ceil, rat_pow, rat_pow_rat
from .rates import RateFunction, eval_exact, interval_eval, float_eval
from .lattice import pi_count, zeta_layer

Value = Union[Rat, HPInterval]


def _rate_value(f: RateFunction, T, bits: int) -> Value:
    ev = eval_exact(f, T)
    if ev is not None:
        return ev
    return interval_eval(f, T, bits)


def _pow(v: Value, e: Rat, bits: int) -> Value:
    e = as_rat(e)
    if isinstance(v, HPInterval):
        return v.pow_rat(e)
    if e.denominator == 1:
        return rat_pow(v, int(e))
    exact = rat_pow_rat(v, e)
    if exact is not None:
        return exact
    return HPInterval.from_rat(v, bits).pow_rat(e)


def mu_term(T: int, R, psi: RateFunction, a: int, b: int, bits: int = 96) -> Value:
    """(T / psi(RT))^(a-b), the covering scale at height T."""
    if not a > b >= 0:
        raise ValueError("need a > b >= 0")
    R = as_rat(R)
    v = _rate_value(psi, R * T, bits)
    if isinstance(v, HPInterval):
        base = HPInterval.from_int_value(T, bits) / v
    else:
        base = rat(T) / v
    return _pow(base, rat(a - b), bits)


def lambda_term(T: int, R, phi: RateFunction, a: int, bits: int = 96) -> Value:
    """(phi(RT)/T)^a - (phi(R(T+1))/(T+1))^a, certified positive.

    Positivity is structural: phi is non-increasing and 1/T strictly
    decreasing, so with an interval result the precision is raised until
    zero is excluded.
    """
    if a < 1:
        raise ValueError("need a >= 1")
    R = as_rat(R)
    cur = bits
    while True:
        left = _rate_value(phi, R * T, cur)
        right = _rate_value(phi, R * (T + 1), cur)
        if isinstance(left, HPInterval) or isinstance(right, HPInterval):
            li = left if isinstance(left, HPInterval) else HPInterval.from_rat(left, cur)
            ri = right if isinstance(right, HPInterval) else HPInterval.from_rat(right, cur)
            out = (li / HPInterval.from_int_value(T, cur)).pow_rat(rat(a)) - (
                ri / HPInterval.from_int_value(T + 1, cur)
            ).pow_rat(rat(a))
            if out.sign_lo() > 0:
                return out
            cur *= 2
            if cur > 4096:
                raise ArithmeticError("could not separate lambda from zero")
            continue
        out = rat_pow(left / T, a) - rat_pow(right / (T + 1), a)
        assert out > 0
        return out


def term_value(T: int, R, psi, phi, a: int, b: int, bits: int = 96) -> Value:
    m = mu_term(T, R, psi, a, b, bits)
    l = lambda_term(T, R, phi, a, bits)
    if isinstance(m, HPInterval) or isinstance(l, HPInterval):
        mi = m if isinstance(m, HPInterval) else HPInterval.from_rat(m, bits)
        li = l if isinstance(l, HPInterval) else HPInterval.from_rat(l, bits)
        return mi * li
    return m * l


@dataclass(frozen=True)
class SeriesTerm:
    T: int
    mu: Value
    lam: Value
    zeta: Optional[int] = None
    pi_count: Optional[int] = None
    nu: Optional[int] = None


@dataclass(frozen=True)
class PartialSums:
    """S_1..S_N of Sigma mu_T lambda_T with the accumulated width."""

    terms: List[SeriesTerm]
    sums: List[Value]
    exact: bool
    final_width: Rat

    @property
    def last(self) -> Value:
        return self.sums[-1]


def partial_sum(
    N: int, R, psi: RateFunction, phi: RateFunction, a: int, b: int,
    bits: int = 96,
) -> PartialSums:
    """Sums start at the first T with R*T inside both rate domains."""
    if N < 1:
        raise ValueError("N must be >= 1")
    R_r = as_rat(R)
    ds = max(psi.domain_start, phi.domain_start)
    start = max(1, rat_ceil(ds / R_r))
    if start > N:
        raise ValueError(f"N={N} lies below the rates' domain start {start}")
    terms: List[SeriesTerm] = []
    sums: List[Value] = []
    acc: Value = rat(0)
    exact = True
    for T in range(start, N + 1):
        m = mu_term(T, R, psi, a, b, bits)
        l = lambda_term(T, R, phi, a, bits)
        if isinstance(m, HPInterval) or isinstance(l, HPInterval) or not exact:
            exact = False
            mi = m if isinstance(m, HPInterval) else HPInterval.from_rat(m, bits)
            li = l if isinstance(l, HPInterval) else HPInterval.from_rat(l, bits)
            inc = mi * li
            acc_iv = acc if isinstance(acc, HPInterval) else HPInterval.from_rat(acc, bits)
            acc = acc_iv + inc
        else:
            acc = acc + m * l
        terms.append(SeriesTerm(T=T, mu=m, lam=l))
        sums.append(acc)
    width = rat(0) if exact else acc.width()
    return PartialSums(terms=terms, sums=sums, exact=exact, final_width=width)


# ---------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class ExponentReport:
    """Exact order of the term: mu_T lambda_T = Theta(T^p (log T)^q)."""

    p: Rat
    q: Rat
    verdict: str  # converging | diverging

    @property
    def converges(self) -> bool:
        return self.verdict == "converging"


def exponent_analysis(psi: RateFunction, phi: RateFunction, a: int, b: int) -> ExponentReport:
    p = (1 + psi.alpha) * (a - b) - a * (1 + phi.alpha) - 1
    q = psi.delta * (a - b) - a * phi.delta
    if p < -1 or (p == -1 and q < -1):
        verdict = "converging"
    else:
        verdict = "diverging"
    return ExponentReport(p=p, q=q, verdict=verdict)


def _float_sum(lo: int, hi: int, R, psi, phi, a: int, b: int) -> float:
    """Float evidence for S over T in [lo, hi); never drives a verdict."""
    Rf = float(R)
    cp, ap, dp = float(psi.c), float(psi.alpha), float(psi.delta)
    cf, af, df = float(phi.c), float(phi.alpha), float(phi.delta)
    log, s = math.log, 0.0

    def phi_over(T: int) -> float:
        t = Rf * T
        v = cf * t ** (-af)
        if df:
            v *= log(t) ** (-df)
        return v / T

    prev = phi_over(lo) ** a
    for T in range(lo, hi):
        t = Rf * T
        pv = cp * t ** (-ap)
        if dp:
            pv *= log(t) ** (-dp)
        nxt = phi_over(T + 1) ** a
        s += (T / pv) ** (a - b) * (prev - nxt)
        prev = nxt
    return s


@dataclass(frozen=True)
class DiagnosticReport:
    verdict: str  # converging | diverging | inconclusive
    exponent: Optional[ExponentReport]
    increments: List[float]
    increment_verdict: str
    note: str = ""

    @property
    def converges(self) -> bool:
        return self.verdict == "converging"


def convergence_diagnostic(
    psi: RateFunction,
    phi: RateFunction,
    a: int,
    b: int,
    R=1,
    N: int = 10**3,
    doubling_rounds: int = 3,
) -> DiagnosticReport:
    """Classify Sigma mu_T lambda_T.

    The exact exponent test decides the power/power-log family outright;
    tail increments S_{2^k N} - S_{2^(k-1) N} are computed as numeric
    evidence and any tension with the exact verdict is noted.
    """
    if N < 10**3:
        raise ValueError("diagnostic wants N >= 1000")
    start = max(2, math.ceil(float(psi.domain_start) / float(R)),
                math.ceil(float(phi.domain_start) / float(R)))
    increments = [_float_sum(start, N, R, psi, phi, a, b)]
    lo = N
    for _ in range(doubling_rounds):
        hi = 2 * lo
        increments.append(_float_sum(lo, hi, R, psi, phi, a, b))
        lo = hi
    tail = increments[1:]
    ratios = [tail[i + 1] / tail[i] for i in range(len(tail) - 1) if tail[i] > 0]
    if ratios and max(ratios) < rat(9, 10):
        inc_verdict = "converging"
    elif ratios and min(ratios) > rat(98, 100):
        inc_verdict = "diverging"
    else:
        inc_verdict = "inconclusive"
    exp = exponent_analysis(psi, phi, a, b)
    note = ""
    if inc_verdict not in (exp.verdict, "inconclusive"):
        note = (
            "increment heuristic said %s; exact exponent test (p=%s, q=%s) wins"
            % (inc_verdict, exp.p, exp.q)
        )
    return DiagnosticReport(
        verdict=exp.verdict,
        exponent=exp,
        increments=increments,
        increment_verdict=inc_verdict,
        note=note,
    )


# ---------------------------------------------------------------------
# counting-bound ratios


@dataclass(frozen=True)
class PackingRow:
    T: int
    zeta: int
    zeta_cum: int
    pi: int
    mu_hi: Rat
    ratio_pi: Rat
    ratio_cum: Rat


@dataclass(frozen=True)
class PackingScan:
    rows: List[PackingRow]
    overall_median: Rat
    top_quartile_median: Rat
    red_flag: bool


def _median(vals: Sequence[Rat]) -> Rat:
    s = sorted(vals)
    n = len(s)
    if n % 2 == 1:
        return s[n // 2]
    return (s[n // 2 - 1] + s[n // 2]) / 2


def packing_ratio_scan(
    target,
    psi: RateFunction,
    phi: RateFunction,
    R,
    a: int,
    b: int,
    T_values: Sequence[int],
    certificate=None,
    gamma=None,
    jobs: int = 1,
) -> PackingScan:
    """Per-T table of pi_count/mu and cumulative-zeta/mu.

    A growth trend (top-quartile median above twice the overall median of
    the pi ratio) raises the red flag but is reported, not rejected.  When
    a certificate and gamma are supplied they must cover R*max(T).
    """
    Ts = sorted(set(int(t) for t in T_values))
    if not Ts:
        raise ValueError("empty T range")
    if certificate is not None:
        if gamma is None:
            raise ValueError("gamma required alongside a certificate")
        if not certificate.covers(gamma, R, max(Ts)):
            raise ValueError("certificate does not cover the scan range")
    rows: List[PackingRow] = []
    cum = 0
    for T in Ts:
        z, _ = zeta_layer(target, phi, R, T, jobs=jobs)
        cum += z
        p = pi_count(target, phi, R, T, jobs=jobs)
        m = mu_term(T, R, psi, a, b)
        m_hi = m.hi if isinstance(m, HPInterval) else m
        rows.append(
            PackingRow(
                T=T,
                zeta=z,
                zeta_cum=cum,
                pi=p,
                mu_hi=m_hi,
                ratio_pi=rat(p) / m_hi,
                ratio_cum=rat(cum) / m_hi,
            )
        )
    ratios = [r.ratio_pi for r in rows]
    overall = _median(ratios)
    qlen = max(1, len(rows) // 4)
    top = _median(ratios[-qlen:])
    return PackingScan(
        rows=rows,
        overall_median=overall,
        top_quartile_median=top,
        red_flag=top > 2 * overall,
    )


# ---------------------------------------------------------------------
# structural invariants, checkable per instance


def mu_strictly_increasing(
    psi: RateFunction, a: int, b: int, R, T_max: int,
    spot_checks: Sequence[int] = (),
) -> bool:
    """T/psi(RT) is a product of increasing positive factors, so mu is
    strictly increasing for any admissible rate; the spot checks confirm
    selected adjacent pairs with exact or interval comparisons."""
    if not a > b >= 0:
        raise ValueError("need a > b >= 0")
    if psi.alpha < 0 or psi.delta < 0:
        return False
    R = as_rat(R)
    for T in spot_checks:
        if not 1 <= T < T_max or R * T < psi.domain_start:
            continue
        if not _mu_less(psi, a, b, R, T, T + 1):
            return False
    return True


def _mu_less(psi, a: int, b: int, R, T1: int, T2: int) -> bool:
    m1 = mu_term(T1, R, psi, a, b)
    m2 = mu_term(T2, R, psi, a, b)
    if not isinstance(m1, HPInterval) and not isinstance(m2, HPInterval):
        return m1 < m2
    bits = 96
    while bits <= 4096:
        i1 = mu_term(T1, R, psi, a, b, bits)
        i2 = mu_term(T2, R, psi, a, b, bits)
        i1 = i1 if isinstance(i1, HPInterval) else HPInterval.from_rat(i1, bits)
        i2 = i2 if isinstance(i2, HPInterval) else HPInterval.from_rat(i2, bits)
        if i1.hi < i2.lo:
            return True
        if i2.hi < i1.lo:
            return False
        bits *= 2
    raise ArithmeticError("mu comparison undecided at precision cap")


def lambda_all_positive(
    phi: RateFunction, a: int, R, T_values: Sequence[int]
) -> bool:
    """Spot checks below the rate's domain start are skipped."""
    R = as_rat(R)
    for T in T_values:
        if R * T < phi.domain_start:
            continue
        l = lambda_term(T, R, phi, a)
        if isinstance(l, HPInterval):
            if l.sign_lo() <= 0:
                return False
        elif l <= 0:
            return False
    return True
