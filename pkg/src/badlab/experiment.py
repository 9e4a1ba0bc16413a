"""Monte Carlo harness for the almost-every-point statement.

Samples live on the source subspace A, drawn from an exact dyadic grid
by a counter-based generator (Philox4x64-10) so that per-sample streams
depend only on (seed, sample index), never on scheduling.  Membership in
the shrinking target sets is decided exactly: layer points come from the
lattice enumerator and the per-candidate minimax over the ray parameter
is the exact line distance.

Everything written to samples.csv, tails.csv, and report.json is a pure
function of the config; wall-clock timing goes to run_manifest.json,
which is the one output file allowed to differ between identical runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .badness import BadnessCertificate, VectorBadnessResult, vector_badness
from .exactlp import HPoly, lp_max, lp_min
from .exactnum import HPInterval, Rat, as_rat, format_rat, rat, rat_floor
from .geometry import (
    AffineSubspace,
    LiftedSpan,
    Vec,
    as_vec,
    cheb_distance,
    lift,
    line_distance,
    sup_norm,
    vec_add,
    vec_scale,
)
from .lattice import zeta_layer
from .rates import (
    RateFunction,
    admissible_pair,
    eval_exact,
    interval_eval,
)
from .series import convergence_diagnostic, exponent_analysis

_MASK64 = (1 << 64) - 1
_PHILOX_M0 = 0xD2E7470EE14C6C93
_PHILOX_M1 = 0xCA5A826395121157
_WEYL_0 = 0x9E3779B97F4A7C15
_WEYL_1 = 0xBB67AE8584CAA73B

RNG_NAME = "philox4x64-10"


def _philox_block(c0: int, c1: int, c2: int, c3: int, k0: int, k1: int):
    """One 10-round Philox4x64 permutation of the 256-bit counter."""
    for r in range(10):
        if r:
            k0 = (k0 + _WEYL_0) & _MASK64
            k1 = (k1 + _WEYL_1) & _MASK64
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            ((p1 >> 64) ^ c1 ^ k0) & _MASK64,
            p1 & _MASK64,
            ((p0 >> 64) ^ c3 ^ k1) & _MASK64,
            p0 & _MASK64,
        )
    return c0, c1, c2, c3


class PhiloxStream:
    """uint64 stream for one sample: counter starts at index * 2^128."""

    def __init__(self, seed: int, index: int):
        if not 0 <= seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        self._k0 = seed
        self._k1 = 0
        self._c = index << 128
        self._buf: List[int] = []

    def next64(self) -> int:
        if not self._buf:
            self._c += 1  # counter advances before the permutation
            c = self._c
            words = _philox_block(
                c & _MASK64,
                (c >> 64) & _MASK64,
                (c >> 128) & _MASK64,
                (c >> 192) & _MASK64,
                self._k0,
                self._k1,
            )
            self._buf = list(words)
        return self._buf.pop(0)

    def below(self, n: int) -> int:
        """Unbiased draw from [0, n) by 128-bit rejection."""
        if n <= 0:
            raise ValueError("need n > 0")
        span = 1 << 128
        limit = span - span % n
        while True:
            v = (self.next64() << 64) | self.next64()
            if v < limit:
                return v % n


# ---------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    A: AffineSubspace
    B: AffineSubspace
    psi: RateFunction
    phi: RateFunction
    R: Rat
    certificate: BadnessCertificate
    sample_count: int
    X: int
    T_range: Tuple[int, int]
    seed: int
    thresholds: Tuple[Rat, ...] = ()
    jobs: int = 1

    def __post_init__(self):
        R = as_rat(self.R)
        object.__setattr__(self, "R", R)
        if R < 1:
            raise ValueError("R must be >= 1")
        if self.A.ambient != self.B.ambient:
            raise ValueError("A and B live in different ambient spaces")
        if not self.B.dim < self.A.dim:
            raise ValueError("need dim B < dim A")
        lifted_A = lift(self.A)
        lifted_B = lift(self.B)
        for row in lifted_B.basis:
            if not lifted_A.contains(row):
                raise ValueError("B is not contained in A")
        rep = admissible_pair(self.psi, self.phi)
        if not rep.ok:
            raise ValueError("rates not admissible: " + rep.note)
        lo, hi = self.T_range
        if not 1 <= lo <= hi:
            raise ValueError("bad T range")
        cert = self.certificate
        if cert is None:
            raise ValueError("a badness certificate for (B, psi) is required")
        if tuple(cert.target.basis) != tuple(lifted_B.basis):
            raise ValueError("certificate targets a different subspace")
        if cert.rate != self.psi:
            raise ValueError("certificate was issued for a different rate")
        if cert.height < R * hi:
            raise ValueError("certificate height does not cover R*max(T)")
        if self.sample_count < 0 or self.X < 1:
            raise ValueError("bad sample_count or X")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if not self.thresholds:
            object.__setattr__(
                self,
                "thresholds",
                tuple(rat(1, 4**k) for k in range(1, 6)),
            )
        object.__setattr__(self, "lifted_A", lifted_A)
        object.__setattr__(self, "lifted_B", lifted_B)

    @property
    def a_dim(self) -> int:
        return self.A.dim

    @property
    def b_dim(self) -> int:
        return self.B.dim

    def describe(self) -> dict:
        return {
            "ambient": self.A.ambient,
            "A_point": [format_rat(c) for c in self.A.point],
            "A_directions": [
                [format_rat(c) for c in row] for row in self.A.directions
            ],
            "B_point": [format_rat(c) for c in self.B.point],
            "B_directions": [
                [format_rat(c) for c in row] for row in self.B.directions
            ],
            "psi": self.psi.describe(),
            "phi": self.phi.describe(),
            "R": format_rat(self.R),
            "certificate": self.certificate.to_json_dict(),
            "sample_count": self.sample_count,
            "X": self.X,
            "T_range": list(self.T_range),
            "seed": self.seed,
            "rng": RNG_NAME,
            "thresholds": [format_rat(t) for t in self.thresholds],
        }


# ---------------------------------------------------------------------
# sampling


class RejectionError(RuntimeError):
    pass


def _parameter_box(config: ExperimentConfig) -> List[Tuple[Rat, Rat]]:
    """Per-parameter bounds of {t : sup_norm(point + t*dirs) <= R}.

    The box is grown outward to a dyadic grid: lower corners snap down
    to multiples of 2^-64 and widths round up to integers, so every grid
    point lo + k/2^64 is an exact 64-fractional-bit dyadic.
    """
    A, R = config.A, config.R
    a = A.dim
    rows = []
    rhs = []
    for j in range(A.ambient):
        coeff = [A.directions[i][j] for i in range(a)]
        rows.append(coeff)
        rhs.append(R - A.point[j])
        rows.append([-c for c in coeff])
        rhs.append(R + A.point[j])
    box = []
    two64 = 1 << 64
    for i in range(a):
        c = [rat(0)] * a
        c[i] = rat(1)
        lo, _ = lp_min(c, rows, rhs)
        hi, _ = lp_max(c, rows, rhs)
        lo_snap = rat(rat_floor(lo * two64), two64)
        width = hi - lo_snap
        w_int = rat_floor(width)
        if w_int < width:
            w_int += 1
        box.append((lo_snap, lo_snap + w_int))
    return box


def sample_on_A(config: ExperimentConfig, n: int) -> List[Vec]:
    """n exact points w on A with sup_norm(w) <= R, grid-uniform.

    Each sample index owns its own Philox stream; rejection retries stay
    inside that stream, so sample i never depends on how many attempts
    sample j needed.
    """
    if n == 0:
        return []
    box = _parameter_box(config)
    A = config.A
    out: List[Vec] = []
    two64 = 1 << 64
    for index in range(n):
        stream = PhiloxStream(config.seed, index)
        for attempt in range(1000):
            t = []
            ok = True
            for lo, hi in box:
                cells = int(hi - lo) * two64
                t.append(lo + rat(stream.below(cells), two64))
            w = list(A.point)
            for ti, direction in zip(t, A.directions):
                w = vec_add(w, vec_scale(direction, ti))
            if sup_norm(w) <= config.R:
                out.append(as_vec(w))
                break
        else:
            raise RejectionError(
                f"sample {index}: 1000 straight rejections; the ball "
                "barely meets A in this chart"
            )
    return out


# ---------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class MemberWitness:
    z: Tuple[int, ...]
    t: Rat


class _LayerCache:
    """Z_T layers and thickness bounds, shared across samples."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._layers: Dict[int, List[Tuple[int, ...]]] = {}

    def layer(self, T: int) -> List[Tuple[int, ...]]:
        if T not in self._layers:
            _, pts = zeta_layer(
                self.config.lifted_A, self.config.phi,
                self.config.R, T, jobs=self.config.jobs,
            )
            self._layers[T] = pts
        return self._layers[T]


def _cmp_dist_phi(dist: Rat, phi: RateFunction, arg: Rat) -> int:
    """Ordering of an exact distance against phi(arg)."""
    ev = eval_exact(phi, arg)
    if ev is not None:
        d = dist - ev
        return -1 if d < 0 else (0 if d == 0 else 1)
    from .exactnum import refine_cmp

    return refine_cmp(dist, lambda bits: interval_eval(phi, arg, bits))


def u_t_member(
    w: Sequence, T: int, config: ExperimentConfig,
    cache: Optional[_LayerCache] = None,
) -> Tuple[bool, Optional[MemberWitness]]:
    """Does some layer point z admit t with sup_norm(t*(1,w) - z) <= phi(RT)?

    The minimum over t is the exact distance from z to the ray span, so
    the decision per candidate is a single certified comparison.
    """
    wv = as_vec(w)
    if sup_norm(wv) > config.R:
        raise ValueError("w outside the R ball")
    cache = cache or _LayerCache(config)
    lifted_w = (rat(1),) + wv
    arg = config.R * T
    for z in cache.layer(T):
        d = line_distance(z, lifted_w)
        if _cmp_dist_phi(d, config.phi, arg) <= 0:
            span = LiftedSpan((lifted_w,), config.A.ambient + 1)
            _, tvec = cheb_distance(z, span)
            return True, MemberWitness(z=tuple(int(v) for v in z), t=tvec[0])
    return False, None


# ---------------------------------------------------------------------
# measure estimates


@dataclass(frozen=True)
class MeasureEstimate:
    T: int
    zeta: int
    upper_lo: Rat
    upper_hi: Rat
    hit_count: int
    n_samples: int
    chart_measure: Rat

    @property
    def fraction(self) -> Rat:
        return rat(self.hit_count, self.n_samples)

    @property
    def mc_value(self) -> Rat:
        return self.fraction * self.chart_measure

    def half_width(self) -> float:
        import math

        f = float(self.fraction)
        return math.sqrt(f * (1 - f) / self.n_samples) * float(self.chart_measure)

    def within_bound(self, sigmas: int = 3) -> bool:
        return float(self.mc_value) <= float(self.upper_hi) + sigmas * self.half_width()


def chart_ball_measure(config: ExperimentConfig) -> Rat:
    """Exact parameter-space measure of {w on A : sup_norm(w) <= R}."""
    A, R = config.A, config.R
    a = A.dim
    poly = HPoly(a)
    for j in range(A.ambient):
        coeff = [A.directions[i][j] for i in range(a)]
        poly.add(coeff, R - A.point[j])
        poly.add([-c for c in coeff], R + A.point[j])
    return poly.volume()


def _upper_bound(config: ExperimentConfig, T: int, zeta: int) -> Tuple[Rat, Rat]:
    """Certified enclosure of zeta * (2*phi(RT)/T)^a."""
    a = config.a_dim
    arg = config.R * T
    ev = eval_exact(config.phi, arg)
    if ev is not None:
        from .exactnum import rat_pow

        v = zeta * rat_pow(2 * ev / T, a)
        return v, v
    bits = 96
    iv = interval_eval(config.phi, arg, bits)
    iv = (iv + iv) / HPInterval.from_int_value(T, bits)
    iv = iv.pow_int(a) * HPInterval.from_int_value(zeta, bits)
    return iv.lo, iv.hi


def measure_estimate(
    T: int,
    config: ExperimentConfig,
    samples: Sequence[Sequence],
    hits: Optional[Sequence[bool]] = None,
    cache: Optional[_LayerCache] = None,
) -> MeasureEstimate:
    if len(samples) < 100:
        raise ValueError("measure estimates want n >= 100")
    cache = cache or _LayerCache(config)
    layer = cache.layer(T)
    if hits is None:
        hits = [u_t_member(w, T, config, cache)[0] for w in samples]
    lo, hi = _upper_bound(config, T, len(layer))
    return MeasureEstimate(
        T=T,
        zeta=len(layer),
        upper_lo=lo,
        upper_hi=hi,
        hit_count=sum(1 for h in hits if h),
        n_samples=len(samples),
        chart_measure=chart_ball_measure(config),
    )


# ---------------------------------------------------------------------
# the full pipeline


@dataclass(frozen=True)
class SampleResult:
    index: int
    w: Vec
    gamma_phi: Rat  # certified lower end when phi values are irrational
    argmin_q: int
    min_dist: Rat
    u_t_hits: Tuple[int, ...]
    is_zero: bool


@dataclass
class TheoremReport:
    config: ExperimentConfig
    samples: List[SampleResult]
    estimates: List[MeasureEstimate]
    tails: List[Tuple[int, Rat]]
    threshold_fractions: List[Tuple[Rat, Rat]]
    gamma_quantiles: Dict[str, Rat]
    zero_count: int
    diagnostic_verdict: str
    exponent_p: Rat
    exponent_q: Rat
    bound_violations: List[int] = field(default_factory=list)
    infinite_looking: int = 0

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.describe(),
            "diagnostic": {
                "verdict": self.diagnostic_verdict,
                "p": format_rat(self.exponent_p),
                "q": format_rat(self.exponent_q),
            },
            "samples": len(self.samples),
            "zero_count": self.zero_count,
            "gamma_quantiles": {
                k: format_rat(v) for k, v in self.gamma_quantiles.items()
            },
            "threshold_fractions": [
                [format_rat(t), format_rat(f)] for t, f in self.threshold_fractions
            ],
            "bound_violations": self.bound_violations,
            "infinite_looking_members": self.infinite_looking,
            "tail_first": None
            if not self.tails
            else [self.tails[0][0], format_rat(self.tails[0][1])],
            "tail_last": None
            if not self.tails
            else [self.tails[-1][0], format_rat(self.tails[-1][1])],
        }


class DivergingSeriesError(RuntimeError):
    """The comparison series must converge before the pipeline runs."""


def _gamma_of(res: VectorBadnessResult) -> Rat:
    return res.gamma_bounds[0]


def _quantiles(vals: List[Rat]) -> Dict[str, Rat]:
    s = sorted(vals)
    n = len(s)

    def at(fr: Rat) -> Rat:
        idx = rat_floor(fr * (n - 1))
        return s[idx]

    return {
        "min": s[0],
        "q25": at(rat(1, 4)),
        "median": at(rat(1, 2)),
        "q75": at(rat(3, 4)),
        "max": s[-1],
    }


def run_theorem1(config: ExperimentConfig) -> TheoremReport:
    diag = convergence_diagnostic(
        config.psi, config.phi, config.a_dim, config.b_dim, config.R,
        N=max(10**3, config.T_range[1]),
    )
    if not diag.converges:
        raise DivergingSeriesError(
            "comparison series diverges (p=%s, q=%s); the almost-every "
            "statement needs a convergent series"
            % (diag.exponent.p, diag.exponent.q)
        )
    samples = sample_on_A(config, config.sample_count)
    cache = _LayerCache(config)
    lo_T, hi_T = config.T_range
    Ts = list(range(lo_T, hi_T + 1))
    results: List[SampleResult] = []
    hit_table: Dict[int, List[bool]] = {T: [] for T in Ts}
    for idx, w in enumerate(samples):
        vb = vector_badness(w, config.phi, config.X)
        hits = []
        for T in Ts:
            member, _ = u_t_member(w, T, config, cache)
            hit_table[T].append(member)
            if member:
                hits.append(T)
        results.append(
            SampleResult(
                index=idx,
                w=w,
                gamma_phi=_gamma_of(vb),
                argmin_q=vb.argmin_q,
                min_dist=vb.min_dist,
                u_t_hits=tuple(hits),
                is_zero=vb.is_zero,
            )
        )
    estimates = []
    violations = []
    if samples and len(samples) >= 100:
        for T in Ts:
            est = measure_estimate(T, config, samples, hits=hit_table[T], cache=cache)
            estimates.append(est)
            if not est.within_bound():
                violations.append(T)
    uppers = {e.T: e.upper_hi for e in estimates}
    if not uppers:
        for T in Ts:
            uppers[T] = _upper_bound(config, T, len(cache.layer(T)))[1]
    tail = rat(0)
    tails_rev: List[Tuple[int, Rat]] = []
    for T in reversed(Ts):
        tail += rat_min_one(uppers[T])
        tails_rev.append((T, tail))
    tails = list(reversed(tails_rev))
    gammas = [r.gamma_phi for r in results]
    thr_fracs = []
    nsamp = len(results)
    for t in config.thresholds:
        exceeding = sum(1 for g in gammas if g > t)
        thr_fracs.append((t, rat(exceeding, max(nsamp, 1))))
    mid = (lo_T + hi_T) // 2
    infinite_looking = sum(
        1 for r in results if sum(1 for h in r.u_t_hits if h >= mid) >= 2
    )
    exp = exponent_analysis(config.psi, config.phi, config.a_dim, config.b_dim)
    return TheoremReport(
        config=config,
        samples=results,
        estimates=estimates,
        tails=tails,
        threshold_fractions=thr_fracs,
        gamma_quantiles=_quantiles(gammas) if gammas else {},
        zero_count=sum(1 for r in results if r.is_zero),
        diagnostic_verdict=diag.verdict,
        exponent_p=exp.p,
        exponent_q=exp.q,
        bound_violations=violations,
        infinite_looking=infinite_looking,
    )


def rat_min_one(x: Rat) -> Rat:
    return x if x < 1 else rat(1)


# ---------------------------------------------------------------------
# serialization


def write_outputs(report: TheoremReport, out_dir: str, timing_s: Optional[float] = None) -> None:
    """samples.csv, tails.csv, report.json (deterministic) and
    run_manifest.json (timing, not compared between runs)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    import csv

    with open(os.path.join(out_dir, "samples.csv"), "w", newline="\n") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["index", "w", "gamma_phi", "argmin_q", "min_dist", "hits"])
        for r in report.samples:
            wr.writerow(
                [
                    r.index,
                    " ".join(format_rat(c) for c in r.w),
                    format_rat(r.gamma_phi),
                    r.argmin_q,
                    format_rat(r.min_dist),
                    ";".join(str(t) for t in r.u_t_hits),
                ]
            )
    with open(os.path.join(out_dir, "tails.csv"), "w", newline="\n") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["T0", "tail_bound"])
        for T0, bound in report.tails:
            wr.writerow([T0, format_rat(bound)])
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = {"timing_seconds": timing_s, "rng": RNG_NAME}
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
