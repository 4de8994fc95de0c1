"""Homodyne time-series synthesis and joint spectral analysis.

Mimics the gated measurement chain of the experiment: a sinusoidal phase
drive is switched on inside a gate window of each acquisition cycle, the
per-channel noise floor carries the cross-channel covariance of the network,
and band powers around the drive frequency are compared between the gated
(signal) and idle (noise) portions.

The dB-below-SQL reference is the ideal lossless coherent single-pass run
with the same photon budget, synthesized through the identical pipeline so
that the spectral calibration cancels in the ratio.

Trace file layout (little endian): magic "MZTR", version u32, d u32,
sample_rate f64, duration f64, gate 2*f64, seed u64, then channel-major f64
samples.  Cycle length and drive frequency travel in a JSON sidecar.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AnalysisError, RegularizationError
from .network import NetworkConfig, noise_matrix, response_matrix, sql_reference_config

__all__ = [
    "TraceParams",
    "TraceSet",
    "synthesize",
    "segment_band_powers",
    "band_power",
    "JointNoiseResult",
    "joint_noise_analysis",
    "write_trace",
    "read_trace",
]

MAGIC = b"MZTR"
VERSION = 1

# experimental timing defaults: 80 ms cycle, drive gated 30-50 ms, 4 MHz tone
DEFAULT_SAMPLE_RATE = 50e6
DEFAULT_CYCLE = 80e-3
DEFAULT_GATE = (30e-3, 50e-3)
DEFAULT_DRIVE = 4e6

# Hann band-power calibration: a unit-variance white channel reads
# rbw/(sample_rate/2) in linear units (0 dB reference after normalization),
# and a sinusoid of amplitude A at a bin center reads A^2/3 (the factor 2/3
# vs A^2/2 is the Hann equivalent-noise-bandwidth of 1.5 bins).
SINE_POWER_FACTOR = 3.0


@dataclass(frozen=True)
class TraceParams:
    sample_rate: float = DEFAULT_SAMPLE_RATE
    cycle: float = DEFAULT_CYCLE
    gate: tuple = DEFAULT_GATE
    n_cycles: int = 1
    drive_freq: float = DEFAULT_DRIVE

    def __post_init__(self):
        object.__setattr__(self, "gate", tuple(float(g) for g in self.gate))
        if self.sample_rate < 5.0 * self.drive_freq:
            raise ValueError("sample_rate must be >= 5x the drive frequency")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        t_on, t_off = self.gate
        if not 0.0 <= t_on < t_off <= self.cycle:
            raise ValueError("gate window must fit inside one cycle")


@dataclass
class TraceSet:
    d: int
    sample_rate: float
    duration: float
    samples: np.ndarray      # shape (d, n_samples)
    gate: tuple              # per-cycle (t_on, t_off), seconds
    drive_freq: float
    seed: int
    cycle: float

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def n_cycles(self) -> int:
        return int(round(self.duration / self.cycle))


def _channel_rng(seed: int, channel: int) -> np.random.Generator:
    # per-channel counter-based streams: parallel synthesis can never
    # change the output
    return np.random.Generator(np.random.Philox(key=np.uint64(seed), counter=[0, 0, 0, channel]))


def _noise_factor(gamma: np.ndarray) -> np.ndarray:
    sym = 0.5 * (gamma + gamma.T)
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(sym)
        if vals.min() < -1e-10 * max(vals.max(), 1.0):
            raise RegularizationError(
                f"noise matrix has negative eigenvalue {vals.min():.3e}"
            )
        return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))


def synthesize(config: NetworkConfig, delta_thetas, params: TraceParams,
               seed: int) -> TraceSet:
    """Gaussian noise floor with the network's cross-covariance plus a gated
    sinusoidal phase drive of per-channel amplitude C_jj * delta_theta_j.

    delta_thetas are phase amplitudes in radians (scalar or one per channel).
    Deterministic for a given seed.
    """
    d = config.d
    delta = np.broadcast_to(np.asarray(delta_thetas, dtype=float), (d,))
    n_per_cycle = int(round(params.cycle * params.sample_rate))
    n_total = n_per_cycle * params.n_cycles
    factor = _noise_factor(noise_matrix(config))

    z = np.empty((d, n_total))
    for j in range(d):
        z[j] = _channel_rng(seed, j).standard_normal(n_total)
    samples = factor @ z

    amps = np.diag(response_matrix(config)) * delta
    if np.any(amps != 0.0):
        t = np.arange(n_total) / params.sample_rate
        tone = np.sin(2.0 * math.pi * params.drive_freq * t)
        in_cycle = t % params.cycle
        gate_mask = (in_cycle >= params.gate[0]) & (in_cycle < params.gate[1])
        samples += np.outer(amps, tone * gate_mask)

    return TraceSet(
        d=d,
        sample_rate=params.sample_rate,
        duration=n_total / params.sample_rate,
        samples=samples,
        gate=params.gate,
        drive_freq=params.drive_freq,
        seed=int(seed),
        cycle=params.cycle,
    )


def _hann(length: int) -> np.ndarray:
    # periodic Hann: sum w = L/2 and sum w^2 = 3L/8 exactly
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * math.pi * n / length))


def segment_band_powers(series, sample_rate, center, rbw):
    """Per-segment linear band power at `center` from Hann periodograms of
    length round(sample_rate/rbw).  Calibrated so unit-variance white noise
    averages to rbw/(sample_rate/2)."""
    series = np.asarray(series, dtype=float)
    length = int(round(sample_rate / rbw))
    if rbw > sample_rate / 4.0:
        raise AnalysisError("rbw must be <= sample_rate/4")
    if center + rbw / 2.0 >= sample_rate / 2.0:
        raise AnalysisError("band extends past Nyquist")
    if series.size < length:
        raise AnalysisError("analysis window longer than the trace")
    n_segments = series.size // length
    segments = series[: n_segments * length].reshape(n_segments, length)
    window = _hann(length)
    spectra = np.fft.rfft(segments * window, axis=1)
    bin_index = int(round(center / sample_rate * length))
    # one-sided PSD at the bin, times rbw
    psd = 2.0 * np.abs(spectra[:, bin_index]) ** 2 / (sample_rate * np.sum(window**2))
    return psd * rbw


def band_power(trace: TraceSet, channel, center, rbw, vbw):
    """Time-resolved band power (dB) of one channel: Hann periodogram
    segments smoothed by a first-order low-pass of time constant 1/(2 pi vbw).

    Returns (segment center times, smoothed power in dB)."""
    powers = segment_band_powers(trace.samples[channel], trace.sample_rate,
                                 center, rbw)
    dt = 1.0 / rbw
    tau = 1.0 / (2.0 * math.pi * vbw)
    alpha = 1.0 - math.exp(-dt / tau)
    smooth = np.empty_like(powers)
    acc = powers[0]
    for i, p in enumerate(powers):
        acc += alpha * (p - acc)
        smooth[i] = acc
    times = (np.arange(powers.size) + 0.5) * dt
    return times, 10.0 * np.log10(smooth)


def _window_segment_powers(series, sample_rate, cycle, window, center, rbw,
                           invert=False):
    """Mean linear band power over the full analysis segments lying inside
    (or, with invert, outside) the per-cycle window."""
    length = int(round(sample_rate / rbw))
    n_per_cycle = int(round(cycle * sample_rate))
    lo = int(math.ceil(window[0] * sample_rate))
    hi = int(math.floor(window[1] * sample_rate))
    powers = []
    n_cycles = series.size // n_per_cycle
    for c in range(n_cycles):
        base = c * n_per_cycle
        if invert:
            spans = [(0, lo), (hi, n_per_cycle)]
        else:
            spans = [(lo, hi)]
        for a, b in spans:
            chunk = series[base + a: base + b]
            if chunk.size >= length:
                powers.append(
                    segment_band_powers(chunk, sample_rate, center, rbw)
                )
    if not powers:
        raise AnalysisError("no complete analysis segment in the window")
    return float(np.concatenate(powers).mean())


@dataclass
class JointNoiseResult:
    db_below_sql: float
    snr_db: float
    delta_theta_hat: float
    noise_power: float       # linear, joint estimator units
    signal_power: float
    reference_power: float


def joint_noise_analysis(traces: TraceSet, nu, config: NetworkConfig,
                         rbw=100e3, reference: TraceSet | None = None) -> JointNoiseResult:
    """Joint processing of the channel traces for the weighted phase sum.

    Forms the estimator y[n] = sum_j nu_j x_j[n] / C_jj (phase units),
    measures the drive-band power in the gated (signal) and idle (noise)
    windows, and references the idle noise to the ideal shot-noise run.
    """
    nu = np.asarray(nu, dtype=float)
    c_diag = np.diag(response_matrix(config))
    if np.any((c_diag == 0) & (nu != 0)):
        raise AnalysisError("weighted channel without phase response")
    weights = np.where(c_diag != 0, nu / np.where(c_diag == 0, 1.0, c_diag), 0.0)
    joint = weights @ traces.samples

    if reference is None:
        ref_cfg = sql_reference_config(config)
        params = TraceParams(
            sample_rate=traces.sample_rate,
            cycle=traces.cycle,
            gate=traces.gate,
            n_cycles=traces.n_cycles,
            drive_freq=traces.drive_freq,
        )
        reference = synthesize(ref_cfg, 0.0, params,
                               seed=(traces.seed ^ 0x9E3779B97F4A7C15) & (2**64 - 1))
    ref_c = np.diag(response_matrix(sql_reference_config(config)))
    ref_weights = np.where(ref_c != 0, nu / np.where(ref_c == 0, 1.0, ref_c), 0.0)
    ref_joint = ref_weights @ reference.samples

    center = traces.drive_freq
    signal = _window_segment_powers(joint, traces.sample_rate, traces.cycle,
                                    traces.gate, center, rbw)
    noise = _window_segment_powers(joint, traces.sample_rate, traces.cycle,
                                   traces.gate, center, rbw, invert=True)
    ref_noise = _window_segment_powers(ref_joint, reference.sample_rate,
                                       reference.cycle, reference.gate,
                                       center, rbw, invert=True)
    tone = max(signal - noise, 0.0)
    amp = math.sqrt(SINE_POWER_FACTOR * tone)
    return JointNoiseResult(
        db_below_sql=10.0 * math.log10(ref_noise / noise),
        snr_db=10.0 * math.log10(signal / noise),
        delta_theta_hat=amp / float(np.sum(np.abs(nu))),
        noise_power=noise,
        signal_power=signal,
        reference_power=ref_noise,
    )


# ---------------------------------------------------------------------------
# trace files

_HEADER = struct.Struct("<4sII d d d d Q")


def write_trace(path, traces: TraceSet, sidecar=True):
    path = Path(path)
    header = _HEADER.pack(
        MAGIC, VERSION, traces.d, traces.sample_rate, traces.duration,
        traces.gate[0], traces.gate[1], traces.seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(traces.samples, dtype="<f8").tobytes())
    if sidecar:
        meta = {
            "cycle": traces.cycle,
            "drive_freq": traces.drive_freq,
            "n_cycles": traces.n_cycles,
        }
        Path(str(path) + ".meta.json").write_text(
            json.dumps(meta, sort_keys=True) + "\n"
        )
    return path


def read_trace(path) -> TraceSet:
    path = Path(path)
    raw = path.read_bytes()
    try:
        magic, version, d, sample_rate, duration, g0, g1, seed = _HEADER.unpack_from(raw)
    except struct.error as exc:
        raise AnalysisError(f"truncated trace header in {path}") from exc
    if magic != MAGIC:
        raise AnalysisError(f"not a trace file: bad magic {magic!r}")
    if version != VERSION:
        raise AnalysisError(f"unsupported trace version {version}")
    payload = raw[_HEADER.size:]
    if len(payload) % 8:
        raise AnalysisError(f"truncated trace payload in {path}")
    samples = np.frombuffer(payload, dtype="<f8")
    if d < 1 or samples.size < d or samples.size % d:
        raise AnalysisError(f"trace payload inconsistent with {d} channels")
    n = samples.size // d
    samples = samples.reshape(d, n).copy()
    meta_path = Path(str(path) + ".meta.json")
    cycle, drive = duration, DEFAULT_DRIVE
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        cycle = float(meta.get("cycle", cycle))
        drive = float(meta.get("drive_freq", drive))
    return TraceSet(
        d=d,
        sample_rate=sample_rate,
        duration=duration,
        samples=samples,
        gate=(g0, g1),
        drive_freq=drive,
        seed=seed,
        cycle=cycle,
    )
