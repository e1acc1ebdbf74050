import os
import subprocess
import sys

import numpy as np
import pytest

from gaudin_opers import kernels
from gaudin_opers.rootdata import load_cartan


def _args(rng, m, label="B2", sites=4):
    A = load_cartan(label)
    w = rng.normal(size=m) + 1j * rng.normal(size=m)
    colors = rng.integers(0, A.rank, size=m).astype(np.int64)
    z = 3 * (rng.normal(size=sites) + 1j * rng.normal(size=sites))
    pair = rng.integers(0, 3, size=(sites, A.rank)).astype(np.float64)
    return w, colors, z, pair, A.entries.astype(np.float64)


@pytest.mark.parametrize("m", [0, 1, 2, 7, 30])
def test_loop_and_numpy_kernels_agree(rng, m):
    args = _args(rng, m)
    assert np.allclose(kernels.bae_residual_numpy(*args), kernels.bae_residual_loops(*args), atol=1e-12)
    assert np.allclose(kernels.bae_jacobian_numpy(*args), kernels.bae_jacobian_loops(*args), atol=1e-12)
    assert np.isclose(kernels.min_separation_numpy(args[0], args[2]),
                      kernels.min_separation_loops(args[0], args[2]))


def test_jacobian_matches_finite_differences(rng):
    for _ in range(100):
        args = list(_args(rng, 4, label="A2"))
        J = kernels.bae_jacobian(*args)
        h = 1e-6
        for k in range(4):
            e = np.zeros(4, complex)
            e[k] = h
            fd = (kernels.bae_residual(args[0] + e, *args[1:]) - kernels.bae_residual(args[0] - e, *args[1:])) / (2 * h)
            assert np.allclose(J[:, k], fd, rtol=1e-5, atol=1e-5 * np.abs(J).max())


def test_backend_flag_selects_numpy():
    env = dict(os.environ, GAUDIN_OPERS_DISABLE_NUMBA="1")
    code = ("from gaudin_opers import kernels, bethe, rootdata;"
            "p = bethe.BetheProblem(rootdata.load_cartan('A1'), ((0, [1]), (1, [1]), (4, [1])), (1,));"
            "s = bethe.multi_start_solve(p, 64);"
            "print(kernels.BACKEND, ' '.join(repr(float(x.roots[0].real)) for x in s))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, *roots = out.stdout.split()
    assert backend == "numpy"
    assert np.allclose(sorted(float(r) for r in roots), [0.46481624, 2.86851709], atol=1e-8)
