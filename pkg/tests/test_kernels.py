import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from commevo import backend
from commevo.kernels import NUMBA_KERNELS, NUMPY_KERNELS

FAST, SLOW = NUMBA_KERNELS, NUMPY_KERNELS


@pytest.mark.parametrize("seed", range(20))
def test_gini_split_parity_is_exact(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 200))
    xs = np.sort(rng.integers(0, 15, size=n).astype(float))
    ys = rng.integers(0, 4, size=n)
    for min_leaf in (1, 2, 5):
        assert FAST["best_gini_split"](xs, ys, 4, min_leaf) == SLOW["best_gini_split"](xs, ys, 4, min_leaf)


def test_gini_split_without_boundary():
    xs, ys = np.ones(5), np.array([0, 1, 0, 1, 0])
    for kernels in (FAST, SLOW):
        assert kernels["best_gini_split"](xs, ys, 2, 1)[1] == -1


def test_gini_split_picks_the_clean_cut():
    xs = np.arange(6.0)
    ys = np.array([0, 0, 0, 1, 1, 1])
    score, i = SLOW["best_gini_split"](xs, ys, 2, 1)
    assert i == 2 and score == 6.0


@pytest.mark.parametrize("seed", range(10))
def test_social_position_parity_and_fixed_point(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    w = rng.integers(0, 4, size=(n, n)).astype(float) * (rng.random((n, n)) < 0.3)
    np.fill_diagonal(w, 0.0)
    a, it_a, _ = FAST["social_position"](w, 0.85, 1e-12, 1000)
    b, it_b, _ = SLOW["social_position"](w, 0.85, 1e-12, 1000)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)
    assert abs(it_a - it_b) <= 1
    assert np.allclose(b, oracles.social_position(w), atol=1e-9)


def test_social_position_of_isolated_nodes():
    sp, it, residual = SLOW["social_position"](np.zeros((3, 3)), 0.85, 1e-8, 100)
    assert np.allclose(sp, 0.15) and it == 2 and residual == 0.0


@pytest.mark.parametrize("n_cat", [0, 3])
def test_mixed_distance_parity(n_cat):
    rng = np.random.default_rng(n_cat)
    qn, tn = rng.normal(size=(40, 5)), rng.normal(size=(300, 5))
    qc, tc = rng.integers(0, 3, size=(40, n_cat)), rng.integers(0, 3, size=(300, n_cat))
    a = FAST["mixed_distances"](qn, tn, qc, tc)
    b = SLOW["mixed_distances"](qn, tn, qc, tc)
    assert np.allclose(a, b, rtol=1e-12)
    want = np.sqrt(((qn[7] - tn[11]) ** 2).sum()) + (qc[7] != tc[11]).sum()
    assert b[7, 11] == pytest.approx(want)


SNIPPET = """
from commevo import backend
from commevo.classification import cross_validate
from commevo.synth import sequence_dataset
data = sequence_dataset(800, seed=3)
print(backend())
for clf, extra in (("tree", {}), ("forest", {"trees": 5}), ("knn", {})):
    print(cross_validate(data, clf, k=4, seed=1, **extra).to_text())
"""


def _run(**env):
    done = subprocess.run(
        [sys.executable, "-c", SNIPPET],
        capture_output=True,
        text=True,
        env=dict(os.environ, **env),
        check=True,
    )
    return done.stdout.split("\n", 1)


def test_env_flag_switches_backend_without_changing_results():
    fast_name, fast_out = _run(COMMEVO_DISABLE_NUMBA="0", NUMBA_DISABLE_JIT="0")
    slow_name, slow_out = _run(COMMEVO_DISABLE_NUMBA="1")
    assert (fast_name, slow_name) == ("numba", "numpy")
    assert fast_out == slow_out


def test_backend_reports_current_path():
    assert backend() in {"numba", "numpy"}
