"""Shared fixtures: the two reference instances used across the suite.

The golden line (d=1) and the cubic pair line (d=2) are the workhorses;
their badness certificates take a couple of seconds each to scan, so
they are built once per session.
"""

import time

import pytest

from badlab.badness import BadnessCertificate, subspace_badness
from badlab.exactnum import rat
from badlab.experiment import ExperimentConfig
from badlab.geometry import AffineSubspace, LiftedSpan
from badlab.presets import preset_value
from badlab.rates import PowerLaw, PowerLog

GOLDEN = preset_value("golden")
CBRT2 = preset_value("cbrt2")
CBRT4 = preset_value("cbrt4")


@pytest.fixture(scope="session")
def unit_psi():
    return PowerLaw(rat(1), rat(1))


@pytest.fixture(scope="session")
def golden_span():
    # lifted span of the point {golden} in R^1
    return LiftedSpan(basis=((rat(1), GOLDEN),), ambient=2)


@pytest.fixture(scope="session")
def golden_cert(golden_span, unit_psi) -> BadnessCertificate:
    cert = subspace_badness(golden_span, unit_psi, height=1000)
    assert isinstance(cert, BadnessCertificate)
    return cert


@pytest.fixture(scope="session")
def golden_config(golden_cert, unit_psi) -> ExperimentConfig:
    # d=1, A = R^1, B = {golden}, psi = phi = 1/T
    A = AffineSubspace(point=(rat(0),), directions=((rat(1),),))
    B = AffineSubspace(point=(GOLDEN,), directions=())
    return ExperimentConfig(
        A=A,
        B=B,
        psi=unit_psi,
        phi=unit_psi,
        R=rat(1),
        certificate=golden_cert,
        sample_count=100,
        X=10**4,
        T_range=(2, 100),
        seed=42,
    )


@pytest.fixture(scope="session")
def cubic_A():
    return AffineSubspace(point=(CBRT2, CBRT4), directions=((rat(1), CBRT2),))


@pytest.fixture(scope="session")
def cubic_B():
    return AffineSubspace(point=(CBRT2, CBRT4), directions=())


@pytest.fixture(scope="session")
def cubic_psi():
    return PowerLaw(rat(1), rat(1, 2))


@pytest.fixture(scope="session")
def cubic_phi():
    return PowerLog(rat(1), rat(1, 2), rat(2), rat(2))


@pytest.fixture(scope="session")
def cubic_cert(cubic_B, cubic_psi) -> BadnessCertificate:
    from badlab.geometry import lift

    cert = subspace_badness(lift(cubic_B), cubic_psi, height=512)
    assert isinstance(cert, BadnessCertificate)
    return cert


@pytest.fixture(scope="session")
def cubic_config(cubic_A, cubic_B, cubic_psi, cubic_phi, cubic_cert) -> ExperimentConfig:
    return ExperimentConfig(
        A=cubic_A,
        B=cubic_B,
        psi=cubic_psi,
        phi=cubic_phi,
        R=rat(2),
        certificate=cubic_cert,
        sample_count=100,
        X=10**5,
        T_range=(2, 256),
        seed=42,
    )


@pytest.fixture(scope="session")
def cubic_run(cubic_config):
    """(report, wall seconds) for the reference end-to-end run."""
    from badlab.experiment import run_theorem1

    t0 = time.monotonic()
    report = run_theorem1(cubic_config)
    return report, time.monotonic() - t0


@pytest.fixture(scope="session")
def cubic_report(cubic_run):
    return cubic_run[0]
