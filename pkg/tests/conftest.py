import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rainclaims.ingest import aggregate_weekly, parse_daily_csv
from rainclaims.synth import SynthConfig, generate_synthetic


@pytest.fixture(scope="session")
def small_series():
    """60-week synthetic control series with mild noise."""
    return generate_synthetic(SynthConfig(weeks=60, seed=42))


@pytest.fixture(scope="session")
def noiseless_series():
    """Series where claims follow the generating function exactly and loss is
    claims times a constant severity."""
    return generate_synthetic(
        SynthConfig(weeks=60, seed=7, noise_level=0.0, severity_sigma=0.0)
    )


def make_daily_csv(tmp_path, name, config: SynthConfig, include_targets=True) -> Path:
    from rainclaims.synth import write_daily_csv

    path = tmp_path / name
    with open(path, "w", encoding="utf-8") as fh:
        write_daily_csv(config, fh, include_targets=include_targets)
    return path
