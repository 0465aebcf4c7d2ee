import numpy as np
import pytest
import scipy.fft as sfft

from hylm.spectral import Field, Space, ToSpectral, make_grid, transform


@pytest.fixture
def grid16():
    return make_grid(16, 16, 16)


def random_band_limited(grid, parity, seed, max_mode=None):
    """Random real band-limited field with the given z-parity.

    Built from physical white noise: FFT, cut above max_mode per direction,
    parity-project, so conjugate symmetry holds by construction.
    """
    if max_mode is None:
        max_mode = min(grid.nx, grid.ny, grid.nz) // 3
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    c = sfft.fftn(noise, norm="forward")
    for axis, n in enumerate(grid.shape):
        modes = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        sl = [None, None, None]
        sl[axis] = slice(None)
        c = c * (modes[tuple(sl)] <= max_mode)
    sign = parity.sign
    rev = np.roll(c[:, :, ::-1], 1, axis=2)
    c = 0.5 * (c + sign * rev)
    return Field(grid, c, parity, Space.SPECTRAL)


def to_phys(f):
    from hylm.spectral import ToPhysical

    return transform(f, ToPhysical).coeffs
