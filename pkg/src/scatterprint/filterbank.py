"""Frequency-domain Morlet filter bank and FFT-based circular convolution.

The bank holds one complex band-pass filter per (scale, orientation) pair plus
a single Gaussian low-pass, all stored as frequency-domain arrays matching the
target image geometry.  A band-pass filter at scale index ``j`` is a Gabor
wavelet with Gaussian width ``0.8 * 2**j`` and peak frequency ``3*pi/4 / 2**j``
rotated to its orientation, with a multiple of its own envelope subtracted so
the spatial sum (DC response) is exactly zero.  The low-pass is a Gaussian at
the coarsest scale, normalized to unit spatial sum so averaging preserves
constants.

Filters are built by sampling the continuous waveform on the pixel grid and
summing wrapped copies (spatial periodization), then taking the 2-D FFT.
Convolution is therefore circular: multiply spectra pointwise and invert.  The
spatial samples of a stored filter are recoverable as ``ifft2(filt)``, which is
what the brute-force convolution oracle in the tests works from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import write_pgm
from .errors import ValidationError

__all__ = ["MorletParams", "FilterBank", "build_filter_bank", "convolve", "dump_filters"]


@dataclass(frozen=True)
class MorletParams:
    """Constants of the wavelet construction, kept in one record so experiments
    can vary them together.

    ``envelope_factor * 2**j`` is the Gaussian width at scale index ``j``;
    ``center_frequency / 2**j`` is the peak frequency, so frequency halves per
    scale.  ``slant`` is the envelope aspect ratio (the envelope is ``1/slant``
    times wider across the oscillation than along it), which gives the filters
    their angular selectivity.  The low-pass width ``lowpass_factor * 2**n_scales``
    is tied to the coarsest scale; it is exposed here as a tunable.
    """

    envelope_factor: float = 0.8
    center_frequency: float = 0.75 * math.pi
    slant: float = 0.5
    lowpass_factor: float = 0.8


@dataclass(frozen=True)
class FilterBank:
    """Immutable set of frequency-domain filters for one image geometry.

    ``bandpass`` maps ``(scale, orientation)`` with ``scale < n_scales`` and
    ``orientation < n_orientations`` to a complex (height, width) spectrum;
    ``lowpass`` is the real spectrum of the averaging filter.
    """

    n_scales: int
    n_orientations: int
    width: int
    height: int
    bandpass: dict
    lowpass: np.ndarray
    params: MorletParams = field(default_factory=MorletParams)


def _periodized_gabor(height, width, sigma, theta, xi, slant):
    """Sample a Gabor waveform on the grid, summing wrapped copies so the
    result is a genuine period of the infinite sum."""
    widest = sigma / min(slant, 1.0)
    reps_y = max(1, math.ceil(6.0 * widest / height))
    reps_x = max(1, math.ceil(6.0 * widest / width))
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    inv_along = 1.0 / (2.0 * sigma * sigma)
    inv_across = (slant * slant) / (2.0 * sigma * sigma)
    base_y = np.arange(height, dtype=np.float64)[:, None]
    base_x = np.arange(width, dtype=np.float64)[None, :]
    total = np.zeros((height, width), dtype=np.complex128)
    for ry in range(-reps_y, reps_y + 1):
        y = base_y + ry * height
        for rx in range(-reps_x, reps_x + 1):
            x = base_x + rx * width
            along = cos_t * x + sin_t * y
            across = -sin_t * x + cos_t * y
            total += np.exp(
                -(inv_along * along * along + inv_across * across * across)
                + 1j * xi * along
            )
    return total / (2.0 * math.pi * sigma * sigma / slant)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def build_filter_bank(
    n_scales: int,
    n_orientations: int,
    width: int,
    height: int,
    params: MorletParams | None = None,
) -> FilterBank:
    """Build the bank of ``n_scales * n_orientations`` band-pass filters plus
    one low-pass, sized to a (height, width) image.

    Orientation ``t`` points along the angle ``t*pi/n_orientations``.  Both
    image dimensions must be at least ``2**n_scales`` so the coarsest filter's
    support fits.
    """
    if n_scales < 1 or n_orientations < 1:
        raise ValidationError("need at least one scale and one orientation")
    support = 2 ** n_scales
    if width < support or height < support:
        raise ValidationError(
            f"image {width}x{height} is smaller than the coarsest filter support {support}"
        )
    params = params or MorletParams()
    bandpass = {}
    for j in range(n_scales):
        sigma = params.envelope_factor * 2.0 ** j
        xi = params.center_frequency / 2.0 ** j
        for t in range(n_orientations):
            theta = math.pi * t / n_orientations
            wave = _periodized_gabor(height, width, sigma, theta, xi, params.slant)
            envelope = _periodized_gabor(height, width, sigma, theta, 0.0, params.slant).real
            dc = wave.sum() / envelope.sum()
            bandpass[(j, t)] = _freeze(np.fft.fft2(wave - dc * envelope))
    sigma_low = params.lowpass_factor * 2.0 ** n_scales
    lowpass_spatial = _periodized_gabor(height, width, sigma_low, 0.0, 0.0, 1.0).real
    lowpass_spatial /= lowpass_spatial.sum()
    lowpass = _freeze(np.fft.fft2(lowpass_spatial).real)
    return FilterBank(n_scales, n_orientations, width, height, bandpass, lowpass, params)


def convolve(array, filt) -> np.ndarray:
    """Circular convolution of a spatial array with a frequency-domain filter:
    forward FFT, pointwise product, inverse FFT.  Returns a complex array."""
    arr = np.asarray(array)
    if arr.shape != filt.shape:
        raise ValidationError(f"array shape {arr.shape} does not match filter {filt.shape}")
    return np.fft.ifft2(np.fft.fft2(arr) * filt)


def dump_filters(bank: FilterBank, directory) -> list[Path]:
    """Write each filter's centered spatial magnitude as a PGM for inspection."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    def _save(name, spectrum):
        spatial = np.fft.fftshift(np.abs(np.fft.ifft2(spectrum)))
        peak = spatial.max()
        if peak > 0:
            spatial = spatial / peak
        out = directory / name
        write_pgm(out, spatial)
        written.append(out)

    for (j, t), spectrum in bank.bandpass.items():
        _save(f"bandpass_s{j}_o{t}.pgm", spectrum)
    _save("lowpass.pgm", bank.lowpass)
    return written
