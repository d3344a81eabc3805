import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biaccess import _fallback, kernels
from biaccess.plane import FIXTURES, _targets, start_radius
from biaccess.symbolic import sample_numerators, sampling_modulus

compiled = kernels._compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

PORTRAITS = [(1, 2), (1, 3), (1, 7), (3, 7), (1, 9)]


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_env_forces_fallback():
    env = dict(os.environ, BIACCESS_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "import biaccess.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )  # fmt: skip
    assert out.stdout.strip() == "python"


@needs_compiled
@pytest.mark.parametrize("p, q", PORTRAITS)
@pytest.mark.parametrize("depth", [8, 20, 40])
def test_batch_parity(p, q, depth):
    m = sampling_modulus(depth)
    ks = sample_numerators(300, m, 11)
    for name in ("biaccess_batch", "spine_batch"):
        fast = np.asarray(getattr(compiled, name)(np.asarray(ks, dtype=np.int64), m, p, q, depth))
        fast = fast.copy()
        # overflow sentinels are recomputed by the dispatcher
        slow = getattr(_fallback, name)(ks, m, p, q, depth)
        mask = fast != 3
        assert np.array_equal(fast[mask], slow[mask])
        assert np.array_equal(getattr(kernels, name)(ks, m, p, q, depth), slow)


@settings(max_examples=60)
@given(st.integers(1, 2**20), st.sampled_from(PORTRAITS), st.integers(2, 24))
def test_dispatch_matches_exact(k, portrait, depth):
    m = 2**21 + 7
    p, q = portrait
    for name, one in (("biaccess_batch", _fallback.biaccess_verdict), ("spine_batch", _fallback.spine_verdict)):
        assert getattr(kernels, name)([k], m, p, q, depth)[0] == one(k, m, p, q, depth)


def test_large_modulus_uses_python_ints():
    m = 2**130 + 51
    out = kernels.biaccess_batch([12345, 2**129], m, 1, 3, 10)
    assert list(out) == [_fallback.biaccess_verdict(k, m, 1, 3, 10) for k in (12345, 2**129)]


@needs_compiled
@pytest.mark.parametrize("c", [0j, -1 + 0j, -2 + 0j, 1j, FIXTURES["rabbit"].c])
def test_ray_newton_parity(c):
    from fractions import Fraction

    pots = [np.log(start_radius(c)) / 2 ** (k / 4) for k in range(1, 80)]
    tg = _targets(Fraction(3, 11), pots)
    z0 = start_radius(c) * np.exp(2j * np.pi * 3 / 11)
    a, ok_a = _fallback.ray_newton(c, z0, tg)
    n = np.ascontiguousarray([t[0] for t in tg], dtype=np.int64)
    lw = np.ascontiguousarray([t[1] for t in tg], dtype=np.float64)
    aw = np.ascontiguousarray([t[2] for t in tg], dtype=np.float64)
    b, count = compiled.ray_newton(c, z0, n, lw, aw, 60)
    assert ok_a == (count == len(tg))
    assert np.allclose(a, np.asarray(b)[: len(a)], atol=1e-12)


@needs_compiled
def test_raster_parity():
    args = (-1 + 0j, -2.0, 2.0, -1.5, 1.5, 40, 30, 200)
    assert np.array_equal(np.asarray(compiled.escape_raster(*args)), _fallback.escape_raster(*args))


@needs_compiled
def test_basin_parity():
    zs = np.array([0.1, 0.3 + 0.2j, 1.0 + 0.05j, 2.5, -1 + 0.01j], dtype=np.complex128)
    cyc = np.array([0, -1], dtype=np.complex128)
    fast = np.asarray(compiled.basin_attracted(-1 + 0j, zs, cyc, 1e-3, 500)).astype(bool)
    assert np.array_equal(fast, _fallback.basin_attracted(-1, zs, cyc, 1e-3, 500))


def test_escape_raster_shape_and_values():
    img = kernels.escape_raster(0, -2, 2, -2, 2, 16, 16, 50)
    assert img.shape == (16, 16)
    assert img[8, 8] == -1 and img[0, 0] >= 0
