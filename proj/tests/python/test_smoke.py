import math
import os
from pathlib import Path

import pytest

import crplus

DATA = Path(os.environ.get("CRPLUS_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def table1():
    return crplus.read_portfolio(str(DATA / "table1_eu22.csv"))


@pytest.fixture(scope="module")
def model(table1):
    sectored = crplus.assign_sectors(table1, "crop-livestock")
    banded = crplus.band_exposures(sectored, 1.0)
    dist = crplus.loss_dist_sector(banded, crplus.auto_grid_size(banded))
    return sectored, banded, dist


def test_dataset(table1):
    assert len(table1) == 22
    assert table1.total_exposure == pytest.approx(78568.10)
    ids = [f.obligor_id for f in crplus.validate_portfolio(table1)]
    assert ids == ["ELL", "HUN", "UKI"]


def test_distribution(model):
    _, banded, dist = model
    assert dist.pmf.sum() == pytest.approx(1.0, abs=1e-9)
    mean, variance = crplus.moments(dist)
    assert mean == pytest.approx(banded.expected_loss, rel=1e-6)
    assert variance > 0
    q = [crplus.exceedance_quantile(dist, eps) for eps in crplus.DEFAULT_LEVELS]
    assert q == sorted(q)


def test_backends_agree(model):
    _, banded, dist = model
    fft = crplus.loss_dist_fft(banded, len(dist))
    assert crplus.total_variation(dist, fft) < 1e-8


def test_report(table1, model):
    _, banded, dist = model
    report = crplus.build_report(table1, banded, dist)
    assert len(report["quantiles"]) == 7
    total = crplus.risk_contributions(banded, dist, [0.01])
    var = crplus.exceedance_quantile(dist, 0.01)
    parts = sum(v[1][0] for k, v in total.items() if k != "TOTAL")
    assert math.isclose(parts, var, rel_tol=1e-9)


def test_simulate_is_seeded(model):
    sectored, banded, _ = model
    a, _ = crplus.simulate(sectored, banded, n_draws=2000, seed=5)
    b, _ = crplus.simulate(sectored, banded, n_draws=2000, seed=5)
    assert a == b


def test_errors(table1):
    with pytest.raises(crplus.InputError):
        crplus.parse_portfolio("id,name\n")
    with pytest.raises(crplus.InputError):
        crplus.band_exposures(crplus.assign_sectors(table1), 0.0)
    with pytest.raises(crplus.ModelError):
        crplus.exceedance_quantile(crplus.LossDistribution(1.0, [0.5, 0.1]), 0.1)
