"""Command-line front end.

Config files are flat key = value text.  Rational quantities use "p/q" or
"p/2^k" literals, or a preset name (golden, sqrt2, cbrt2, cbrt4); float
literals are rejected because they would silently poison the exact
comparisons downstream.  Example:

    ambient = 2
    A_point = cbrt2, cbrt4
    A_dir_0 = 1, cbrt2
    B_point = cbrt2, cbrt4
    psi = powerlaw c=1 alpha=1/2
    phi = powerlog c=1 alpha=1/2 delta=2 T0=2
    R = 2
    gamma = 1/5
    seed = 42
    samples = 100
    X = 100000
    T_min = 2
    T_max = 256
    cert_height = 512

Exit codes: 0 completed, 1 invariant violation detected, 2 invalid
config or usage.  BADLAB_PRECISION_BITS caps interval refinement.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import click

from . import __version__
from .badness import (
    BadnessCertificate,
    ZeroHit,
    subspace_badness,
    vector_badness,
)
from .exactnum import Rat, as_rat, format_rat, parse_rat, rat, rat_ceil
from .experiment import (
    DivergingSeriesError,
    ExperimentConfig,
    RejectionError,
    run_theorem1,
    write_outputs,
)
from .geometry import AffineSubspace, lift
from .lattice import (
    badness_slab,
    approach_slab,
    enumerate_slab,
    half_dilation_check,
    verify_omega_trivial,
    zeta_layer,
)
from .presets import PRESETS
from .rates import RateFunction, admissible_pair, rate_from_text
from .series import partial_sum, packing_ratio_scan


def _parse_scalar(text: str) -> Rat:
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]
    if "." in text:
        raise ValueError(
            f"float literal {text!r} not accepted; use p/q or a preset name"
        )
    return parse_rat(text)


def _parse_vector(text: str) -> Tuple[Rat, ...]:
    items = [p for p in (s.strip() for s in text.split(",")) if p]
    return tuple(_parse_scalar(p) for p in items)


@dataclass
class RawConfig:
    """Parsed key-value file, structurally checked but not yet certified."""

    A: AffineSubspace
    B: AffineSubspace
    psi: RateFunction
    phi: RateFunction
    R: Rat
    gamma: Optional[Rat]
    seed: int
    samples: int
    X: int
    T_min: int
    T_max: int
    cert_height: int
    thresholds: Tuple[Rat, ...]

    def experiment(self, jobs: int = 1) -> ExperimentConfig:
        cert = subspace_badness(lift(self.B), self.psi, self.cert_height)
        if isinstance(cert, ZeroHit):
            raise ValueError(
                "B contains the integer point "
                f"{cert.witness}; it cannot be psi-badly approximable "
                '(hypothesis "Let B be a psi-badly approximable affine subspace")'
            )
        return ExperimentConfig(
            A=self.A,
            B=self.B,
            psi=self.psi,
            phi=self.phi,
            R=self.R,
            certificate=cert,
            sample_count=self.samples,
            X=self.X,
            T_range=(self.T_min, self.T_max),
            seed=self.seed,
            thresholds=self.thresholds,
            jobs=jobs,
        )


def _read_pairs(path: str) -> Dict[str, str]:
    pairs: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            k, v = line.split("=", 1)
            pairs[k.strip()] = v.strip()
    return pairs


def parse_config(path: str) -> RawConfig:
    """Load and validate a config, naming the hypothesis any error breaks."""
    pairs = _read_pairs(path)

    def need(key: str) -> str:
        if key not in pairs:
            raise ValueError(f"missing config key {key!r}")
        return pairs[key]

    ambient = int(need("ambient"))
    a_point = _parse_vector(need("A_point"))
    a_dirs = []
    i = 0
    while f"A_dir_{i}" in pairs:
        a_dirs.append(_parse_vector(pairs[f"A_dir_{i}"]))
        i += 1
    b_point = _parse_vector(need("B_point"))
    b_dirs = []
    i = 0
    while f"B_dir_{i}" in pairs:
        b_dirs.append(_parse_vector(pairs[f"B_dir_{i}"]))
        i += 1
    for v in (a_point, b_point, *a_dirs, *b_dirs):
        if len(v) != ambient:
            raise ValueError("coordinate arity does not match ambient")
    A = AffineSubspace(point=a_point, directions=tuple(a_dirs))
    B = AffineSubspace(point=b_point, directions=tuple(b_dirs))
    if not B.dim < A.dim:
        raise ValueError(
            'need dim B < dim A (hypothesis "0 <= b = dim B < a = dim A")'
        )
    psi = rate_from_text(need("psi"))
    phi = rate_from_text(need("phi"))
    rep = admissible_pair(psi, phi)
    if not rep.ok:
        raise ValueError(
            f'rates inadmissible at T={rep.witness_T} '
            '(hypothesis "phi(T) <= psi(T)"): ' + rep.note
        )
    R = _parse_scalar(need("R"))
    gamma = _parse_scalar(pairs["gamma"]) if "gamma" in pairs else None
    thresholds = (
        _parse_vector(pairs["thresholds"]) if "thresholds" in pairs else ()
    )
    T_min = int(pairs.get("T_min", "2"))
    T_max = int(pairs.get("T_max", "256"))
    return RawConfig(
        A=A,
        B=B,
        psi=psi,
        phi=phi,
        R=R,
        gamma=gamma,
        seed=int(pairs.get("seed", "0")),
        samples=int(pairs.get("samples", "100")),
        X=int(pairs.get("X", "100000")),
        T_min=T_min,
        T_max=T_max,
        cert_height=int(pairs.get("cert_height", "0"))
        or int(rat(T_max) * R) + 1,
        thresholds=thresholds,
    )


def config_hash(echo: dict) -> str:
    blob = json.dumps(echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def config_from_echo(echo: dict) -> ExperimentConfig:
    """Rebuild a config from a report.json echo; hashes must agree."""
    A = AffineSubspace(
        point=tuple(parse_rat(s) for s in echo["A_point"]),
        directions=tuple(
            tuple(parse_rat(s) for s in row) for row in echo["A_directions"]
        ),
    )
    B = AffineSubspace(
        point=tuple(parse_rat(s) for s in echo["B_point"]),
        directions=tuple(
            tuple(parse_rat(s) for s in row) for row in echo["B_directions"]
        ),
    )
    psi = rate_from_text(echo["psi"])
    phi = rate_from_text(echo["phi"])
    c = echo["certificate"]
    cert = BadnessCertificate(
        target=lift(B),
        rate=psi,
        height=int(c["height"]),
        witness=tuple(int(v) for v in c["witness"]),
        witness_dist=parse_rat(c["witness_dist"]),
        witness_norm=int(c["witness_norm"]),
        gamma_lower=parse_rat(c["gamma_lower"]),
        gamma_exact=None
        if c["gamma_exact"] is None
        else parse_rat(c["gamma_exact"]),
    )
    return ExperimentConfig(
        A=A,
        B=B,
        psi=psi,
        phi=phi,
        R=parse_rat(echo["R"]),
        certificate=cert,
        sample_count=int(echo["sample_count"]),
        X=int(echo["X"]),
        T_range=tuple(echo["T_range"]),
        seed=int(echo["seed"]),
        thresholds=tuple(parse_rat(s) for s in echo["thresholds"]),
    )


def _write_manifest(
    out_dir: str, command: str, params: dict, started: float,
    cfg_hash: Optional[str] = None, seed: Optional[int] = None,
) -> None:
    import os

    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "tool_version": __version__,
        "command": command,
        "config_hash": cfg_hash,
        "seed": seed,
        "started_at": started,
        "finished_at": time.time(),
        "params": params,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fail_config(err: Exception) -> None:
    click.echo(f"config error: {err}", err=True)
    sys.exit(2)


@click.group()
@click.version_option(__version__, prog_name="badlab")
def main() -> None:
    """Exact experiments around badly approximable subspaces."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--height", type=int, default=None,
              help="scan height for the subspace certificate")
@click.option("--vector", "vector_text", default=None,
              help="comma-separated rationals; switch to the vector scan")
@click.option("--x-max", "x_max", type=int, default=None,
              help="q range top for the vector scan")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1)
def badness(config_path, height, vector_text, x_max, out_dir, jobs):
    """Certify the badness infimum of B, or scan a single vector."""
    started = time.time()
    try:
        raw = parse_config(config_path)
    except (ValueError, OSError) as err:
        _fail_config(err)
    if vector_text is not None:
        try:
            w = _parse_vector(vector_text)
        except ValueError as err:
            _fail_config(err)
        res = vector_badness(w, raw.psi, x_max or raw.X)
        payload = res.to_json_dict()
    else:
        out = subspace_badness(lift(raw.B), raw.psi, height or raw.cert_height,
                               jobs=jobs)
        if isinstance(out, ZeroHit):
            payload = {"kind": "zero_hit", "witness": list(out.witness),
                       "shell": out.shell}
        else:
            payload = out.to_json_dict()
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    if out_dir:
        import os

        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "badness.json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(out_dir, "badness",
                        {"config": config_path, "height": height,
                         "vector": vector_text, "x_max": x_max},
                        started, seed=raw.seed)
    sys.exit(1 if payload.get("kind") == "zero_hit" else 0)


@main.command("enumerate")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--T", "T", required=True, type=int)
@click.option("--set", "which", type=click.Choice(["omega", "pi", "zeta"]),
              default="omega", show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1)
def enumerate_cmd(config_path, T, which, out_dir, jobs):
    """List integer points of a slab or layer at scale T."""
    started = time.time()
    try:
        raw = parse_config(config_path)
        if which == "omega":
            if raw.gamma is None:
                raise ValueError("omega enumeration needs a gamma key")
            spec = badness_slab(lift(raw.B), raw.gamma, raw.psi, raw.R, T)
            pts = enumerate_slab(spec, jobs=jobs)
        elif which == "pi":
            spec = approach_slab(lift(raw.A), raw.phi, raw.R, T)
            pts = enumerate_slab(spec, jobs=jobs)
        else:
            _, pts = zeta_layer(lift(raw.A), raw.phi, raw.R, T, jobs=jobs)
    except (ValueError, OSError) as err:
        _fail_config(err)
    click.echo(f"{which} T={T}: {len(pts)} points")
    if out_dir:
        import os

        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "points.csv")
        with open(path, "w", newline="\n") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow([f"z{i}" for i in range(raw.A.ambient + 1)])
            for p in pts:
                wr.writerow(list(p))
        _write_manifest(out_dir, "enumerate",
                        {"config": config_path, "T": T, "set": which},
                        started, seed=raw.seed)
    sys.exit(0)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--N", "N", required=True, type=int)
@click.option("--counts-to", "counts_to", type=int, default=0,
              help="fill zeta/pi/ratio columns for T up to this bound")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1)
def series(config_path, N, counts_to, out_dir, jobs):
    """Emit the comparison series table up to N."""
    started = time.time()
    try:
        raw = parse_config(config_path)
    except (ValueError, OSError) as err:
        _fail_config(err)
    a, b = raw.A.dim, raw.B.dim
    ps = partial_sum(N, raw.R, raw.psi, raw.phi, a, b)
    scan = None
    if counts_to:
        first = max(1, rat_ceil(raw.phi.domain_start / as_rat(raw.R)))
        scan = packing_ratio_scan(
            lift(raw.A), raw.psi, raw.phi, raw.R, a, b,
            T_values=range(first, counts_to + 1), jobs=jobs,
        )
    rows = _series_rows(ps, scan)
    click.echo(f"S_{N} = {rows[-1][4]}")
    if out_dir:
        import os

        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "series.csv"), "w", newline="\n") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["T", "mu", "lambda", "term", "partial_sum",
                         "zeta", "pi_count", "ratio_int", "ratio_cumzeta"])
            wr.writerows(rows)
        _write_manifest(out_dir, "series",
                        {"config": config_path, "N": N, "counts_to": counts_to},
                        started, seed=raw.seed)
    sys.exit(0)


def _series_rows(ps, scan) -> List[list]:
    from .exactnum import HPInterval

    def fmt(v) -> str:
        if isinstance(v, HPInterval):
            return format_rat(v.hi)
        return format_rat(v)

    by_T = {}
    if scan is not None:
        by_T = {r.T: r for r in scan.rows}
    rows = []
    for term, s in zip(ps.terms, ps.sums):
        mu, lam = term.mu, term.lam
        if isinstance(mu, HPInterval) or isinstance(lam, HPInterval):
            mi = mu if isinstance(mu, HPInterval) else HPInterval.from_rat(mu, 96)
            li = lam if isinstance(lam, HPInterval) else HPInterval.from_rat(lam, 96)
            tv = (mi * li).hi
        else:
            tv = mu * lam
        extra = ["", "", "", ""]
        r = by_T.get(term.T)
        if r is not None:
            extra = [r.zeta, r.pi, format_rat(r.ratio_pi), format_rat(r.ratio_cum)]
        rows.append([term.T, fmt(mu), fmt(lam), format_rat(tv), fmt(s)] + extra)
    return rows


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=1)
def montecarlo(config_path, out_dir, jobs):
    """Sample A and test the almost-every conclusion quantitatively."""
    started = time.time()
    try:
        raw = parse_config(config_path)
        cfg = raw.experiment(jobs=jobs)
    except (ValueError, OSError) as err:
        _fail_config(err)
    try:
        report = run_theorem1(cfg)
    except DivergingSeriesError as err:
        click.echo(f"refused: {err}", err=True)
        sys.exit(2)
    except RejectionError as err:
        click.echo(f"sampling failed: {err}", err=True)
        sys.exit(1)
    elapsed = time.time() - started
    write_outputs(report, out_dir, timing_s=elapsed)
    _write_manifest(out_dir, "montecarlo", {"config": config_path},
                    started, cfg_hash=config_hash(cfg.describe()),
                    seed=cfg.seed)
    ok = not report.bound_violations
    click.echo(
        f"samples={len(report.samples)} zero_hits={report.zero_count} "
        f"violations={report.bound_violations} -> {out_dir}"
    )
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--T", "T", required=True, type=int)
@click.option("--translates", type=int, default=20, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--jobs", type=int, default=1)
def verify(config_path, T, translates, out_dir, jobs):
    """Check slab triviality for every scale up to T, then the packing step."""
    started = time.time()
    try:
        raw = parse_config(config_path)
        if raw.gamma is None:
            raise ValueError("verify needs a gamma key in the config")
    except (ValueError, OSError) as err:
        _fail_config(err)
    span = lift(raw.B)
    for t in range(1, T + 1):
        rep = verify_omega_trivial(span, raw.gamma, raw.psi, raw.R, t, jobs=jobs)
        if not rep.ok:
            click.echo(
                f"triviality FAILED at T={t}: counterexample {rep.counterexample}"
            )
            sys.exit(1)
    half = half_dilation_check(span, raw.gamma, raw.psi, raw.R, T,
                               translates=translates, seed=raw.seed)
    if not half.ok:
        v = half.violations[0]
        click.echo(f"packing FAILED at T={T}: translate {v.translate}")
        sys.exit(1)
    click.echo(
        f"trivial for all T <= {T}; {half.translates_checked} half-slab "
        f"translates hold <= {half.max_points} point each"
    )
    if out_dir:
        _write_manifest(out_dir, "verify",
                        {"config": config_path, "T": T,
                         "translates": translates},
                        started, seed=raw.seed)
    sys.exit(0)


if __name__ == "__main__":
    main()
