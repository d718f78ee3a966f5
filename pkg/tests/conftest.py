import numpy as np
import pytest

from poprefine.preprocess import RawRecord

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_record(**kw):
    base = dict(uid=1, pid=10, category="food", subcategory="food/1", concept="cake",
                path_alias="alias", is_public=True, media_status="ready", title="hello world",
                media_type="photo", all_tags="a b c", post_date=1_500_000_000,
                latitude=1.5, geo_accuracy=16.0, longitude=-2.5, label=3.0)
    base.update(kw)
    return RawRecord(**base)


@pytest.fixture
def record():
    return make_record()
