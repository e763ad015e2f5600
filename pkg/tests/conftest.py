import numpy as np
import pytest
from hypothesis import strategies as st

from pptp_tree.instance import GeneratorParams, generate_instance, instance_from_parents

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def star():
    # junction depot with three customers: (prize, prob, edge) = (6,.5,4), (5,.5,6), (12,.25,10)
    return instance_from_parents(
        [None, 0, 0, 0], [0, 4, 6, 10], [None, 6, 5, 12], [None, 0.5, 0.5, 0.25], name="star3"
    )


@pytest.fixture
def path2():
    # depot - a (dist 4, prize 6) - b (dist 10, prize 5), both prob .5
    return instance_from_parents([None, 0, 1], [0, 4, 6], [None, 6, 5], [None, 0.5, 0.5], name="path2")


def random_instance(seed: int, n_customers: int, n_junctions: int = 0, **kw):
    shapes = ("random", "caterpillar", "balanced", "path", "star")
    rng = np.random.default_rng(seed)
    n = 1 + n_customers + n_junctions
    params = GeneratorParams(
        max_children=int(rng.integers(1, 5)),
        junction_fraction=n_junctions / (n - 1) if n > 1 else 0.0,
        shape=kw.pop("shape", shapes[seed % len(shapes)]),
        **kw,
    )
    return generate_instance(n, seed, params)


def tie_heavy_instance(seed: int, max_nodes: int = 12):
    """Small integer-valued tree: zero edges, prob 1 and prize == distance are common."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_nodes + 1))
    parents = [None] + [int(rng.integers(0, v)) for v in range(1, n)]
    costs = [0.0] + [float(rng.choice([0, 1, 2, 4])) for _ in range(1, n)]
    prizes = [None if v == 0 or rng.random() < 0.2 else float(rng.choice([1, 2, 3, 4, 6])) for v in range(n)]
    probs = [None if p is None else float(rng.choice([0.25, 0.5, 1.0])) for p in prizes]
    return instance_from_parents(parents, costs, prizes, probs, name=f"ties-{seed}")


@st.composite
def small_trees(draw, max_nodes: int = 9, junctions: bool = True):
    n = draw(st.integers(1, max_nodes))
    parents = [None] + [draw(st.integers(0, v - 1)) for v in range(1, n)]
    costs = [0.0] + [draw(st.floats(0, 8, allow_nan=False)) for _ in range(1, n)]
    prizes, probs = [], []
    for v in range(n):
        if v == 0 or (junctions and draw(st.booleans()) and draw(st.booleans())):
            prizes.append(None)
            probs.append(None)
        else:
            prizes.append(draw(st.floats(0.01, 12)))
            probs.append(draw(st.floats(0.01, 1.0)))
    return instance_from_parents(parents, costs, prizes, probs)
