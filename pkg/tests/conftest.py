import numpy as np
import pytest

from apmbench.calibration import SyntheticJudge
from apmbench.catalog import default_catalog
from apmbench.gateway import SyntheticBackend, build_gateway


def make_synthetic_gateway(cache_dir, m=4, noise_sd=1.0, gain=2.0, bias=0.0, **kw):
    catalog = default_catalog().subset(m, m)
    judge = SyntheticJudge(np.full(m, float(bias)), noise_sd=noise_sd, compliance_gain=gain)
    backend = SyntheticBackend(catalog, judge, **kw)
    return build_gateway({}, cache_dir=cache_dir, synthetic=backend, catalog=catalog, max_workers=4)


@pytest.fixture
def gateway(tmp_path):
    return make_synthetic_gateway(tmp_path / "cache")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("]")[0].split()[-1])):
            terminalreporter.write_line(line)
