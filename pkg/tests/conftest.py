from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bespoke_dt.dataset import from_arrays, quantize, split_train_test
from bespoke_dt.sources import load_dataset
from bespoke_dt.trainer import Leaf, Split

from oracles import make_tree

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def seeds_ds():
    return split_train_test(quantize(load_dataset("seeds"), 4), 0)


@pytest.fixture(scope="session")
def balance_ds():
    return split_train_test(quantize(load_dataset("balance-scale"), 4), 0)


@pytest.fixture(scope="session", params=["seeds", "balance-scale"])
def fixture_ds(request):
    return split_train_test(quantize(load_dataset(request.param), 4), 0)


@st.composite
def small_datasets(draw, max_features=3, max_samples=40, max_classes=3, bits=4):
    """Random integer datasets on the ``bits`` grid, all samples tagged train."""
    n_feat = draw(st.integers(1, max_features))
    n = draw(st.integers(2, max_samples))
    k = draw(st.integers(2, max_classes))
    top = (1 << bits) - 1
    X = draw(st.lists(st.lists(st.integers(0, top), min_size=n_feat, max_size=n_feat), min_size=n, max_size=n))
    y = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    ds = from_arrays(X, y, bits=bits)
    if ds.num_classes < k:
        ds.classes = [str(i) for i in range(k)]
    return ds


@st.composite
def random_trees(draw, n_features=2, max_depth=4, num_classes=3, bits=4):
    top = (1 << bits) - 1

    def node(depth):
        if depth == 0 or draw(st.booleans()):
            return Leaf(draw(st.integers(0, num_classes - 1)))
        f = draw(st.integers(0, n_features - 1))
        c = draw(st.integers(1, top))
        return Split(f, c, node(depth - 1), node(depth - 1))

    return make_tree(node(max_depth), n_features=n_features, bits=bits, num_classes=num_classes)


def all_samples(ds):
    return np.asarray(ds.features)


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, status: str, detail: str) -> None:
    line = f"criterion {number} [{status}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
