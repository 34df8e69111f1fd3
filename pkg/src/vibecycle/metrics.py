"""Similarity indicators for real/generated record pairs.

Time-domain indicators are a moment-based Frechet distance over raw samples
and a likeliness score built on distance-based separability; frequency-domain
indicators are circular cross-correlation computed through the FFT and the
one-sided power spectrum. Lower Frechet distance and higher likeliness /
cross-correlation mean the two signals are more alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.spatial.distance
import scipy.stats

from .errors import DataError
from .signal_data import VibrationRecord, segment_matrix

# Bins whose power is within this relative tolerance of the maximum count as
# tied, and the lowest tied frequency wins; exact float equality would make
# the declared tie-break unreachable in practice.
_TIE_RTOL = 1e-9


def fid(x: VibrationRecord, g: VibrationRecord, mode: str = "univariate") -> float:
    """Frechet distance between the sample distributions of two records.

    The default univariate form treats every sample as a draw from a scalar
    distribution, collapsing the trace term to a squared std difference:
    ``(mean_x - mean_g)**2 + (std_x - std_g)**2``. The multivariate form
    treats each 1024-sample segment as one observation and uses the full
    covariance-matrix expression with a matrix square root.
    """
    if mode == "univariate":
        mu_x = float(np.mean(x.samples))
        mu_g = float(np.mean(g.samples))
        sd_x = float(np.std(x.samples))
        sd_g = float(np.std(g.samples))
        return (mu_x - mu_g) ** 2 + (sd_x - sd_g) ** 2
    if mode == "multivariate":
        return _fid_multivariate(segment_matrix(x), segment_matrix(g))
    raise DataError(f"unknown fid mode {mode!r}")


def _fid_multivariate(obs_x: np.ndarray, obs_g: np.ndarray) -> float:
    if obs_x.shape[0] < 2 or obs_g.shape[0] < 2:
        raise DataError("multivariate mode needs at least 2 segments per record")
    mu_x = obs_x.mean(axis=0)
    mu_g = obs_g.mean(axis=0)
    cov_x = np.cov(obs_x, rowvar=False)
    cov_g = np.cov(obs_g, rowvar=False)
    sqrt_prod = scipy.linalg.sqrtm(cov_x @ cov_g)
    if np.iscomplexobj(sqrt_prod):
        # Imaginary leakage from near-singular covariances is numerical noise.
        sqrt_prod = sqrt_prod.real
    value = float(
        np.sum((mu_x - mu_g) ** 2)
        + np.trace(cov_x) + np.trace(cov_g) - 2.0 * np.trace(sqrt_prod)
    )
    return max(value, 0.0)


@dataclass(frozen=True)
class XCrossResult:
    """Circular cross-correlation sequence with its raw and normalized peaks."""

    sequence: np.ndarray
    peak_raw: float
    peak_normalized: float


def xcross(x: VibrationRecord, y: VibrationRecord) -> XCrossResult:
    """Circular cross-correlation via forward FFT, conjugate product, inverse FFT.

    ``sequence[k] = sum_n x[n] * y[(n - k) mod N]``. The raw peak is the
    maximum over all lags; the normalized peak divides by
    ``sqrt(sum(x^2) * sum(y^2))`` and lies in [-1, 1].
    """
    return xcross_arrays(x.samples, y.samples)


def xcross_arrays(x: np.ndarray, y: np.ndarray) -> XCrossResult:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise DataError("empty input")
    energy = float(np.sum(x * x)) * float(np.sum(y * y))
    if energy <= 0.0:
        raise DataError("zero-energy input; normalized cross-correlation undefined")
    seq = np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(y))).real
    peak_raw = float(np.max(seq))
    return XCrossResult(
        sequence=seq,
        peak_raw=peak_raw,
        peak_normalized=peak_raw / math.sqrt(energy),
    )


def likeliness_score(x_set: np.ndarray, y_set: np.ndarray) -> float:
    """One minus the distance-based separability of two point sets.

    Separability is the mean of the two-sample Kolmogorov-Smirnov statistics
    comparing each set's intra-class pairwise distance distribution against
    the between-class distance distribution (the construction of the
    distance-based separability index). Identical distributions score near 1,
    well-separated clusters near 0.
    """
    x_set = np.asarray(x_set, dtype=np.float64)
    y_set = np.asarray(y_set, dtype=np.float64)
    if x_set.ndim != 2 or y_set.ndim != 2:
        raise DataError("point sets must be 2-D arrays of shape (n_points, dim)")
    if x_set.shape[0] < 2 or y_set.shape[0] < 2:
        raise DataError("each point set needs at least 2 vectors")
    if x_set.shape[1] != y_set.shape[1]:
        raise DataError(
            f"dimension mismatch: {x_set.shape[1]} vs {y_set.shape[1]}"
        )
    icd_x = scipy.spatial.distance.pdist(x_set)
    icd_y = scipy.spatial.distance.pdist(y_set)
    bcd = scipy.spatial.distance.cdist(x_set, y_set).ravel()
    ks_x = scipy.stats.ks_2samp(icd_x, bcd).statistic
    ks_y = scipy.stats.ks_2samp(icd_y, bcd).statistic
    dsi = 0.5 * (ks_x + ks_y)
    return 1.0 - float(dsi)


def likeliness_score_records(x: VibrationRecord, g: VibrationRecord) -> float:
    """Likeliness score over the two records' segment sets."""
    return likeliness_score(segment_matrix(x), segment_matrix(g))


def fft_power(record: VibrationRecord) -> tuple[np.ndarray, np.ndarray]:
    """One-sided magnitude-squared spectrum of the full record, no windowing.

    Frequencies run from 0 to the Nyquist rate with spacing
    ``sample_rate / n_samples``. Power is ``|X_j|^2 / n``, so summing with
    two-sided accounting (doubling every bin except DC and, for even n,
    Nyquist) reproduces ``sum(x^2)`` exactly up to rounding.
    """
    return fft_power_arrays(record.samples, record.sample_rate_hz)


def fft_power_arrays(samples: np.ndarray, sample_rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.size
    if n == 0:
        raise DataError("empty input")
    spectrum = np.fft.rfft(samples)
    power = (spectrum.real**2 + spectrum.imag**2) / n
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    return freqs, power


def dominant_frequency(record: VibrationRecord) -> float:
    """Frequency of the maximum power bin, excluding DC.

    Bins tied with the maximum (within a tiny relative tolerance) resolve to
    the lowest frequency.
    """
    freqs, power = fft_power(record)
    return dominant_frequency_arrays(freqs, power)


def dominant_frequency_arrays(freqs: np.ndarray, power: np.ndarray) -> float:
    if power.size < 2:
        raise DataError("spectrum too short to exclude the DC bin")
    tail = power[1:]
    peak = float(np.max(tail))
    if peak <= 0.0:
        return float(freqs[1])
    tied = np.nonzero(tail >= peak * (1.0 - _TIE_RTOL))[0]
    return float(freqs[1 + tied[0]])


@dataclass(frozen=True)
class MetricReport:
    """All indicators for one real/fake record pair, plus both power spectra."""

    fid: float
    ls: float
    xcross_peak_raw: float
    xcross_peak_normalized: float
    spectrum_real: tuple[np.ndarray, np.ndarray]
    spectrum_fake: tuple[np.ndarray, np.ndarray]

    def __post_init__(self) -> None:
        if self.fid < 0:
            raise DataError(f"fid must be nonnegative, got {self.fid}")
        if not 0.0 <= self.ls <= 1.0:
            raise DataError(f"likeliness score must be in [0, 1], got {self.ls}")
        if abs(self.xcross_peak_normalized) > 1.0 + 1e-9:
            raise DataError(
                f"normalized cross-correlation peak out of range: {self.xcross_peak_normalized}"
            )

    def scalar_dict(self) -> dict:
        return {
            "fid": self.fid,
            "ls": self.ls,
            "xcross_peak_raw": self.xcross_peak_raw,
            "xcross_peak_normalized": self.xcross_peak_normalized,
        }


def evaluate_pair(
    real: VibrationRecord, fake: VibrationRecord, fid_mode: str = "univariate"
) -> MetricReport:
    """Compute the full indicator set for a real record and its translation."""
    if real.n_samples != fake.n_samples:
        raise DataError(
            f"length mismatch: real has {real.n_samples} samples, fake has {fake.n_samples}"
        )
    xc = xcross(real, fake)
    return MetricReport(
        fid=fid(real, fake, mode=fid_mode),
        ls=likeliness_score_records(real, fake),
        xcross_peak_raw=xc.peak_raw,
        xcross_peak_normalized=xc.peak_normalized,
        spectrum_real=fft_power(real),
        spectrum_fake=fft_power(fake),
    )


def export_spectrum(path, freqs: np.ndarray, power: np.ndarray) -> None:
    """Write a spectrum as two-column text (frequency_hz, power) for plotting."""
    np.savetxt(path, np.column_stack([freqs, power]), header="frequency_hz power")
