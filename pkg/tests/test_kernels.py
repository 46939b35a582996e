import os
import subprocess
import sys

import numpy as np
import pytest

from singlet_selftest import kernels
from singlet_selftest import _fallback


def random_coo(rng, n, nvar, density=0.3):
    ptr, rows, cols, vals, ids = [0], [], [], [], []
    for v in range(nvar):
        m = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
        m = m + m.T
        r, c = np.nonzero(m)
        rows += list(r)
        cols += list(c)
        vals += list(m[r, c])
        ids.append(v)
        ptr.append(len(rows))
    as64 = lambda x: np.asarray(x, dtype=np.int64)
    return as64(ptr), as64(rows), as64(cols), np.asarray(vals, dtype=float), as64(ids)


def dense_schur(ptr, rows, cols, vals, ids, X, Sinv):
    n = X.shape[0]
    mats = []
    for k in range(len(ids)):
        m = np.zeros((n, n))
        sl = slice(ptr[k], ptr[k + 1])
        np.add.at(m, (rows[sl], cols[sl]), vals[sl])
        mats.append(m)
    return np.array([[np.trace(a @ X @ b @ Sinv) for b in mats] for a in mats])


@pytest.mark.parametrize("impl", sorted(kernels.IMPLEMENTATIONS))
def test_schur_block_matches_dense(impl):
    mod = kernels.IMPLEMENTATIONS[impl]
    rng = np.random.default_rng(1)
    n, nvar = 9, 7
    data = random_coo(rng, n, nvar)
    g = rng.standard_normal((n, n))
    X = g @ g.T + np.eye(n)
    h = rng.standard_normal((n, n))
    Sinv = np.linalg.inv(h @ h.T + np.eye(n))
    M = np.zeros((nvar, nvar))
    mod.schur_block(*data, X, Sinv, M)
    assert np.allclose(M, dense_schur(*data, X, Sinv), atol=1e-10)


@pytest.mark.parametrize("impl", sorted(kernels.IMPLEMENTATIONS))
def test_xor_grid_matches_formula(impl):
    f = np.array([[0.3, -1.2], [0.7, 2.0]])
    out = np.asarray(kernels.IMPLEMENTATIONS[impl].xor_grid(f, 32))
    ang = 2 * np.pi * np.arange(32) / 32
    i, j, k = 5, 17, 29
    want = f[0, 0] * np.cos(-ang[j]) + f[0, 1] * np.cos(-ang[k]) + f[1, 0] * np.cos(ang[i] - ang[j]) + f[1, 1] * np.cos(ang[i] - ang[k])
    assert out.shape == (32, 32, 32)
    assert out[i, j, k] == pytest.approx(want, abs=1e-12)


def test_compiled_agrees_with_fallback():
    if "compiled" not in kernels.IMPLEMENTATIONS:
        pytest.skip("compiled extension not built")
    comp = kernels.IMPLEMENTATIONS["compiled"]
    f = np.array([[1.1, -0.4], [0.2, 0.9]])
    assert np.allclose(comp.xor_grid(f, 40), _fallback.xor_grid(f, 40), atol=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, SELFTEST_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from singlet_selftest import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
