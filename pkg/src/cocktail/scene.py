"""Deterministic acoustic and visual world simulation for a desk-scale binaural head.

The simulator renders what a two-microphone head would record from a set of
seated speakers (interaural time difference via a Woodworth spherical head,
a frequency-independent interaural level difference, and an elevation-dependent
spectral notch), together with the visual side of the scene: a coarse face map
over the field of view and a slow "mouth area" series per speaker.

All randomness is derived from explicit seeds through per-block seed sequences
keyed on absolute sample indices, so rendering is bit-reproducible and
streaming-consistent: rendering ``[0, 2 s)`` in twenty 0.1 s chunks produces
the same source waveforms as one 2 s call.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.io import wavfile
from scipy.signal import iirnotch, lfilter

from .errors import DomainError, InputError

SAMPLE_RATE = 48000
HEAD_RADIUS_M = 0.0875
SPEED_OF_SOUND_M_S = 343.0

PAN_LIMIT_DEG = 80.0
TILT_LIMIT_DEG = 30.0
STEP_DEG = 5.0

FOV_AZIMUTH_DEG = 30.0
FOV_ELEVATION_DEG = 20.0
GRID_W = 32
GRID_H = 24

MOUTH_RATE_HZ = 10

ILD_HALF_DB = 1.5  # per-ear gain; the full left/right difference is twice this
NOTCH_CENTER_HZ = 7500.0  # notch frequency at zero relative elevation
NOTCH_HZ_PER_DEG = 50.0  # 6 kHz at -30 deg ... 9 kHz at +30 deg
NOTCH_Q = 3.0

ACTIONS = ("none", "left", "up", "down", "right")

_BLOCK = 4800  # seeding granularity for random streams (0.1 s at 48 kHz)
_DELAY_MARGIN = 64  # samples of context kept around a render window for delays
_FILTER_MARGIN = 256  # warm-up samples discarded ahead of the notch filter
_STREAM_CARRIER = 1
_STREAM_NOISE = 2
_STREAM_JITTER = 3


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeechSource:
    """Seeded generative process for one speaker's speech waveform.

    ``am-noise`` sources are white noise multiplied by a positive band-limited
    modulator (a seeded sum of cosines in ``modulation_band``); the modulator
    doubles as the ground-truth speech envelope. ``wav`` sources loop a mono
    waveform file.
    """

    kind: str = "am-noise"
    seed: int = 0
    modulation_band: tuple[float, float] = (0.5, 8.0)
    wav_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("am-noise", "wav"):
            raise DomainError(f"unknown speech source kind: {self.kind!r}")
        lo, hi = self.modulation_band
        if not (0.5 <= lo < hi <= 16.0):
            raise DomainError(
                f"modulation band {self.modulation_band} outside the (0.5, 16) Hz syllabic range"
            )
        if self.kind == "wav" and not self.wav_path:
            raise DomainError("wav speech source requires wav_path")


@dataclass(frozen=True)
class SpeakerSpec:
    """A seated speaker: world direction, speech process, and mouth geometry."""

    id: int
    azimuth_world: float
    elevation_world: float
    speech: SpeechSource = field(default_factory=SpeechSource)
    mouth_gain: float = 1.0
    mouth_baseline: float = 0.5

    def __post_init__(self):
        if self.id < 0:
            raise DomainError(f"speaker id must be nonnegative, got {self.id}")
        if not -90.0 <= self.azimuth_world <= 90.0:
            raise DomainError(f"azimuth_world {self.azimuth_world} outside [-90, 90]")
        if not -30.0 <= self.elevation_world <= 30.0:
            raise DomainError(f"elevation_world {self.elevation_world} outside [-30, 30]")
        if self.mouth_gain <= 0:
            raise DomainError("mouth_gain must be > 0")
        if self.mouth_baseline < 0:
            raise DomainError("mouth_baseline must be >= 0")


@dataclass(frozen=True)
class TurnSchedule:
    """Who speaks when: sorted, non-overlapping ``(start_s, end_s, speaker_id)``.

    ``speaker_id`` of ``None`` marks silence. Segments must tile the schedule
    span contiguously.
    """

    segments: tuple[tuple[float, float, int | None], ...]

    def __post_init__(self):
        segs = tuple((float(s), float(e), i) for s, e, i in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise DomainError("schedule needs at least one segment")
        prev_end = None
        for start, end, _ in segs:
            if end <= start:
                raise DomainError(f"empty or inverted segment ({start}, {end})")
            if prev_end is not None and abs(start - prev_end) > 1e-9:
                raise DomainError("schedule segments must be contiguous and sorted")
            prev_end = end

    @property
    def duration(self):
        return self.segments[-1][1] - self.segments[0][0]

    def active_at(self, t):
        """Speaker id active at time ``t``, or ``None`` during silence."""
        for start, end, sid in self.segments:
            if start <= t < end:
                return sid
        return None


@dataclass(frozen=True)
class Scene:
    """Complete scene description: speakers, turn-taking, and noise floor."""

    speakers: tuple[SpeakerSpec, ...]
    schedule: TurnSchedule
    noise_level: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "speakers", tuple(self.speakers))
        if self.noise_level < 0:
            raise DomainError("noise_level must be >= 0")
        ids = [s.id for s in self.speakers]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate speaker ids")
        known = set(ids)
        for _, _, sid in self.schedule.segments:
            if sid is not None and sid not in known:
                raise DomainError(f"schedule references unknown speaker id {sid}")

    def speaker(self, sid):
        for s in self.speakers:
            if s.id == sid:
                return s
        raise DomainError(f"no speaker with id {sid}")


@dataclass(frozen=True)
class HeadPose:
    """Head pan/tilt in degrees, clamped to the motor limits on construction."""

    pan: float
    tilt: float

    def __post_init__(self):
        object.__setattr__(self, "pan", float(np.clip(self.pan, -PAN_LIMIT_DEG, PAN_LIMIT_DEG)))
        object.__setattr__(self, "tilt", float(np.clip(self.tilt, -TILT_LIMIT_DEG, TILT_LIMIT_DEG)))


@dataclass(frozen=True)
class BinauralClip:
    """Two-channel sample buffer at 48 kHz starting at ``start_time`` seconds."""

    left: np.ndarray
    right: np.ndarray
    rate: int = SAMPLE_RATE
    start_time: float = 0.0

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float64)
        right = np.asarray(self.right, dtype=np.float64)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if self.rate != SAMPLE_RATE:
            raise DomainError(f"clip rate must be {SAMPLE_RATE}, got {self.rate}")
        if left.shape != right.shape or left.ndim != 1:
            raise DomainError("left/right must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise DomainError("clip contains non-finite samples")

    def __len__(self):
        return len(self.left)

    @property
    def duration(self):
        return len(self.left) / self.rate


@dataclass(frozen=True)
class VisualObservation:
    """One glance through the camera: face map, face positions, mouth areas.

    ``face_map`` is an ``(GRID_H, GRID_W)`` array over the +/-30 deg x +/-20 deg
    field of view with a single 1.0 cell per visible face. ``mouth_area_by_face``
    holds the noiseless instantaneous mouth area of each visible face (the
    sampled measurement path with jitter is :func:`mouth_area_signal`).
    """

    face_map: np.ndarray
    visible_faces: tuple[tuple[int, int, int], ...]
    mouth_area_by_face: dict


# ---------------------------------------------------------------------------
# Seeded random streams (block-partitioned for streaming consistency)
# ---------------------------------------------------------------------------


def _stream(key, n0, n1, draw):
    """Samples ``[n0, n1)`` of an absolute-indexed random stream.

    ``draw(rng)`` produces one block of ``_BLOCK`` samples (last axis). Blocks
    are seeded independently with ``SeedSequence(key + (block,))`` so any
    window of the stream can be reproduced without generating its prefix.
    Negative indices (before the start of time) yield zeros.
    """

    total = n1 - n0
    pad0 = min(max(0, -n0), total)
    n0 = max(n0, 0)
    if n1 <= n0:
        probe = draw(np.random.default_rng(0))
        return np.zeros(probe.shape[:-1] + (total,))
    b0, b1 = n0 // _BLOCK, -(-n1 // _BLOCK)
    parts = [
        draw(np.random.default_rng(np.random.SeedSequence(key + (b,))))
        for b in range(b0, b1)
    ]
    chunk = np.concatenate(parts, axis=-1)[..., n0 - b0 * _BLOCK : n1 - b0 * _BLOCK]
    if pad0:
        chunk = np.concatenate([np.zeros(chunk.shape[:-1] + (pad0,)), chunk], axis=-1)
    return chunk


_WAV_CACHE = {}


def _wav_samples(path):
    if path not in _WAV_CACHE:
        rate, data = wavfile.read(path)
        if rate != SAMPLE_RATE:
            raise InputError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate}")
        data = np.asarray(data, dtype=np.float64)
        if data.ndim > 1:
            data = data.mean(axis=1)
        peak = np.max(np.abs(data))
        _WAV_CACHE[path] = data / peak if peak > 0 else data
    return _WAV_CACHE[path]


@lru_cache(maxsize=256)
def _modulator_params(source):
    """Frequencies, amplitudes, and phases of the cosine-sum modulator."""
    rng = np.random.default_rng(np.random.SeedSequence([int(source.seed), 0xA11]))
    k = 8
    lo, hi = source.modulation_band
    freqs = rng.uniform(lo, hi, k)
    amps = rng.uniform(0.5, 1.0, k)
    phases = rng.uniform(0.0, 2.0 * np.pi, k)
    return freqs, amps, phases


def source_envelope(source, times):
    """Ground-truth speech envelope of a source at the given times (seconds).

    For ``am-noise`` sources this is the positive modulator itself, a value in
    ``[0.05, 0.95]``; for ``wav`` sources it is the coarse magnitude envelope
    of the file, looped.
    """

    times = np.asarray(times, dtype=np.float64)
    if source.kind == "am-noise":
        freqs, amps, phases = _modulator_params(source)
        ridge = np.sum(
            amps[:, None] * np.cos(2.0 * np.pi * freqs[:, None] * times[None, :] + phases[:, None]),
            axis=0,
        )
        return 0.05 + 0.9 * (1.0 + ridge / np.sum(amps)) / 2.0
    data = _wav_samples(source.wav_path)
    block = SAMPLE_RATE // MOUTH_RATE_HZ
    n_blocks = max(1, len(data) // block)
    coarse = np.abs(data[: n_blocks * block]).reshape(n_blocks, block).mean(axis=1)
    idx = (times * MOUTH_RATE_HZ).astype(int) % n_blocks
    return coarse[idx]


def _source_samples(source, render_seed, speaker_id, n0, n1):
    """Raw speech waveform samples ``[n0, n1)`` for one speaker."""
    if source.kind == "am-noise":
        carrier = _stream(
            (int(render_seed), _STREAM_CARRIER, int(speaker_id)),
            n0,
            n1,
            lambda rng: rng.uniform(-1.0, 1.0, _BLOCK),
        )
        t = np.arange(n0, n1) / SAMPLE_RATE
        return source_envelope(source, t) * carrier
    data = _wav_samples(source.wav_path)
    idx = np.arange(n0, n1)
    out = data[idx % len(data)]
    out[idx < 0] = 0.0
    return out


# ---------------------------------------------------------------------------
# Acoustics
# ---------------------------------------------------------------------------


def itd_for_azimuth(azimuth_rel):
    """Interaural time difference (seconds) for a relative azimuth in degrees.

    Uses the Woodworth spherical-head model ``(a/c) * (sin(theta) + theta)``
    with head radius 0.0875 m and c = 343 m/s. Positive azimuth (source to the
    right) delays the left channel, giving a positive ITD.
    """

    if not -90.0 <= azimuth_rel <= 90.0:
        raise DomainError(f"azimuth {azimuth_rel} outside [-90, 90]")
    theta = math.radians(azimuth_rel)
    return (HEAD_RADIUS_M / SPEED_OF_SOUND_M_S) * (math.sin(theta) + theta)


def fold_azimuth(azimuth_rel):
    """Mirror a head-relative azimuth into the frontal [-90, 90] range.

    A two-microphone head cannot distinguish front from back, so sources that
    drift behind the interaural axis are rendered at their frontal mirror
    image (e.g. 120 deg renders as 60 deg).
    """

    if azimuth_rel > 90.0:
        return 180.0 - azimuth_rel
    if azimuth_rel < -90.0:
        return -180.0 - azimuth_rel
    return azimuth_rel


def _fractional_delay_gather(extended, ext_start, out_start, out_len, delay):
    """``y[n] = x[n - delay]`` for ``n`` in ``[out_start, out_start + out_len)``.

    ``extended`` holds samples ``[ext_start, ...)`` of the source, with enough
    margin on both sides for the delay; linear interpolation between adjacent
    samples realizes fractional delays.
    """

    pos = np.arange(out_start, out_start + out_len) - delay - ext_start
    base = np.floor(pos).astype(np.intp)
    frac = pos - base
    return (1.0 - frac) * extended[base] + frac * extended[base + 1]


@lru_cache(maxsize=512)
def _notch_coeffs(freq_hz):
    """Design (and cache) the elevation notch; poses repeat on a 5 deg lattice."""
    return iirnotch(freq_hz, NOTCH_Q, fs=SAMPLE_RATE)


def render_binaural(scene, pose, t0, duration, seed):
    """Render what the two microphones record over ``[t0, t0 + duration)``.

    Each active speaker's waveform is delayed per :func:`itd_for_azimuth` of
    its pose-relative azimuth, split across ears by a +/-1.5 dB x sin(azimuth)
    level difference, notch-filtered at an elevation-dependent frequency, and
    summed; seeded white noise at ``noise_level`` RMS is added to both
    channels. Deterministic for fixed arguments.
    """

    if duration <= 0:
        raise DomainError("duration must be > 0")
    if t0 < 0:
        raise DomainError("t0 must be >= 0")
    n0 = int(round(t0 * SAMPLE_RATE))
    n = int(round(duration * SAMPLE_RATE))
    out = np.zeros((2, n))

    for start, end, sid in scene.schedule.segments:
        if sid is None:
            continue
        seg0 = int(round(start * SAMPLE_RATE))
        seg1 = int(round(end * SAMPLE_RATE))
        i0, i1 = max(n0, seg0), min(n0 + n, seg1)
        if i1 <= i0:
            continue
        speaker = scene.speaker(sid)
        rel_az = fold_azimuth(speaker.azimuth_world - pose.pan)
        rel_el = speaker.elevation_world - pose.tilt

        delay = itd_for_azimuth(rel_az) * SAMPLE_RATE
        ext0 = i0 - _FILTER_MARGIN - _DELAY_MARGIN
        ext1 = i1 + _DELAY_MARGIN
        sig = _source_samples(speaker.speech, seed, sid, ext0, ext1)
        idx = np.arange(ext0, ext1)
        sig[(idx < seg0) | (idx >= seg1)] = 0.0  # speaker only sounds during its turn

        y0 = i0 - _FILTER_MARGIN
        left = _fractional_delay_gather(sig, ext0, y0, i1 - y0, max(delay, 0.0))
        right = _fractional_delay_gather(sig, ext0, y0, i1 - y0, max(-delay, 0.0))

        half_db = ILD_HALF_DB * math.sin(math.radians(rel_az))
        ears = np.stack([left * 10.0 ** (-half_db / 20.0), right * 10.0 ** (half_db / 20.0)])

        b, a = _notch_coeffs(NOTCH_CENTER_HZ + NOTCH_HZ_PER_DEG * rel_el)
        ears = lfilter(b, a, ears, axis=-1)

        out[:, i0 - n0 : i1 - n0] += ears[:, _FILTER_MARGIN:]

    if scene.noise_level > 0:
        out += scene.noise_level * _stream(
            (int(seed), _STREAM_NOISE),
            n0,
            n0 + n,
            lambda rng: rng.normal(0.0, 1.0, (2, _BLOCK)),
        )
    return BinauralClip(out[0], out[1], SAMPLE_RATE, t0)


# ---------------------------------------------------------------------------
# Vision and kinematics
# ---------------------------------------------------------------------------


def _grid_position(rel_az, rel_el):
    gx = round((rel_az + FOV_AZIMUTH_DEG) / (2 * FOV_AZIMUTH_DEG) * (GRID_W - 1))
    gy = round((rel_el + FOV_ELEVATION_DEG) / (2 * FOV_ELEVATION_DEG) * (GRID_H - 1))
    return int(gx), int(gy)


def observe_visual(scene, pose, t):
    """Project the scene's faces into the head's field of view at time ``t``.

    A speaker is visible iff its pose-relative azimuth is within +/-30 deg and
    its relative elevation within +/-20 deg; each visible face paints a single
    1.0 cell at the linear mapping of its relative angles onto the 32x24 grid.
    """

    face_map = np.zeros((GRID_H, GRID_W))
    visible = []
    areas = {}
    active = scene.schedule.active_at(t)
    for speaker in scene.speakers:
        rel_az = speaker.azimuth_world - pose.pan
        rel_el = speaker.elevation_world - pose.tilt
        if abs(rel_az) > FOV_AZIMUTH_DEG or abs(rel_el) > FOV_ELEVATION_DEG:
            continue
        gx, gy = _grid_position(rel_az, rel_el)
        face_map[gy, gx] = 1.0
        visible.append((speaker.id, gx, gy))
        env = float(source_envelope(speaker.speech, [t])[0]) if speaker.id == active else 0.0
        areas[speaker.id] = speaker.mouth_baseline + speaker.mouth_gain * env
    return VisualObservation(face_map, tuple(visible), areas)


def mouth_area_signal(speaker, schedule, t0, duration, rate=MOUTH_RATE_HZ, seed=0, jitter=True):
    """Sampled mouth-area measurement for one speaker at ``rate`` Hz.

    While the speaker is active the area follows
    ``baseline + gain * envelope(t)``; while silent it sits at the baseline.
    Seeded zero-mean jitter with standard deviation ``0.05 * gain`` models
    measurement noise. Samples are taken at block centers
    ``t0 + (k + 0.5) / rate`` so they align with block-mean resampled audio
    envelopes.
    """

    if duration <= 0:
        raise DomainError("duration must be > 0")
    if rate != MOUTH_RATE_HZ:
        raise DomainError(f"mouth rate is fixed at {MOUTH_RATE_HZ} Hz")
    n = int(round(duration * rate))
    times = t0 + (np.arange(n) + 0.5) / rate
    env = source_envelope(speaker.speech, times)
    active = np.zeros(n, dtype=bool)
    for start, end, sid in schedule.segments:
        if sid == speaker.id:
            active |= (times >= start) & (times < end)
    areas = speaker.mouth_baseline + speaker.mouth_gain * env * active
    if jitter:
        # Jitter uses its own 10-sample blocks at the mouth rate so that
        # per-step calls reproduce the same stream as one long call.
        k0 = int(round(t0 * rate))
        noise = _mouth_jitter(seed, speaker.id, k0, k0 + n)
        areas = areas + 0.05 * speaker.mouth_gain * noise
    return times, areas


_JITTER_BLOCK = 10


def _mouth_jitter(seed, speaker_id, k0, k1):
    """Absolute-indexed unit-normal jitter stream at the mouth rate."""
    b0, b1 = k0 // _JITTER_BLOCK, -(-k1 // _JITTER_BLOCK)
    parts = [
        np.random.default_rng(
            np.random.SeedSequence((int(seed), _STREAM_JITTER, int(speaker_id), b))
        ).normal(0.0, 1.0, _JITTER_BLOCK)
        for b in range(b0, b1)
    ]
    return np.concatenate(parts)[k0 - b0 * _JITTER_BLOCK : k1 - b0 * _JITTER_BLOCK]


def step_head(pose, action):
    """Apply one head action (5 degree step) and clamp to the motor limits."""
    if action not in ACTIONS:
        raise DomainError(f"unknown action {action!r}")
    pan, tilt = pose.pan, pose.tilt
    if action == "left":
        pan -= STEP_DEG
    elif action == "right":
        pan += STEP_DEG
    elif action == "up":
        tilt += STEP_DEG
    elif action == "down":
        tilt -= STEP_DEG
    return HeadPose(pan, tilt)


# ---------------------------------------------------------------------------
# Scene configuration and file I/O
# ---------------------------------------------------------------------------


def scene_from_dict(doc):
    """Build a :class:`Scene` from a parsed JSON document.

    Returns ``(scene, seed)`` where ``seed`` is the document's optional
    ``"seed"`` entry (``None`` if absent).
    """

    try:
        speakers = []
        for spk in doc["speakers"]:
            speech_doc = spk.get("speech", {})
            speech = SpeechSource(
                kind=speech_doc.get("kind", "am-noise"),
                seed=int(speech_doc.get("seed", spk["id"])),
                modulation_band=tuple(speech_doc.get("modulation_band", (0.5, 8.0))),
                wav_path=speech_doc.get("wav_path"),
            )
            speakers.append(
                SpeakerSpec(
                    id=int(spk["id"]),
                    azimuth_world=float(spk["azimuth_deg"]),
                    elevation_world=float(spk.get("elevation_deg", 0.0)),
                    speech=speech,
                    mouth_gain=float(spk.get("mouth_gain", 1.0)),
                    mouth_baseline=float(spk.get("mouth_baseline", 0.5)),
                )
            )
        segments = tuple(
            (float(s), float(e), (None if i is None else int(i)))
            for s, e, i in doc["schedule"]
        )
        scene = Scene(
            speakers=tuple(speakers),
            schedule=TurnSchedule(segments),
            noise_level=float(doc.get("noise_level", 0.0)),
        )
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"bad scene document: {exc}") from exc
    seed = doc.get("seed")
    return scene, (None if seed is None else int(seed))


def load_scene(path):
    """Read a scene configuration JSON file; returns ``(scene, seed)``."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scene config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return scene_from_dict(doc)


def write_wav(path, clip):
    """Write a clip as 16-bit PCM stereo WAV at 48 kHz."""
    stereo = np.stack([clip.left, clip.right], axis=1)
    pcm = np.clip(stereo, -1.0, 1.0)
    wavfile.write(path, SAMPLE_RATE, (pcm * 32767.0).astype(np.int16))


def read_wav(path):
    """Read a 16-bit PCM stereo WAV at 48 kHz into a :class:`BinauralClip`."""
    try:
        rate, data = wavfile.read(path)
    except OSError as exc:
        raise InputError(f"cannot read WAV {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path} is not a readable WAV file: {exc}") from exc
    if rate != SAMPLE_RATE:
        raise InputError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate}")
    if data.ndim != 2 or data.shape[1] != 2:
        raise InputError(f"{path}: expected 2 channels")
    scaled = data.astype(np.float64) / 32767.0
    return BinauralClip(scaled[:, 0], scaled[:, 1], SAMPLE_RATE, 0.0)


def write_mouth_csv(path, times, areas):
    """Write a mouth-area series as CSV with header ``time_s,area``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "area"])
        for t, a in zip(times, areas):
            writer.writerow([repr(float(t)), repr(float(a))])


def read_mouth_csv(path):
    """Read a ``time_s,area`` CSV; returns ``(times, areas)`` arrays."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read mouth CSV {path}: {exc}") from exc
    if not rows or rows[0] != ["time_s", "area"]:
        raise InputError(f"{path}: expected header 'time_s,area'")
    try:
        data = np.array([[float(t), float(a)] for t, a in rows[1:]])
    except ValueError as exc:
        raise InputError(f"{path}: bad numeric row: {exc}") from exc
    if len(data) == 0:
        raise InputError(f"{path}: no data rows")
    return data[:, 0], data[:, 1]
