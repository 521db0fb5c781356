"""Tabular Q-learning head control: orient toward the active speaker.

The agent lives in a loop of listen, look, move.  Its observation is heavily
discretized into 250 states:

* 5 auditory location terms (the fuzzy classification of the azimuth
  posterior's peak, head-relative),
* 10 visual buckets (which cell of a 3x3 partition of the camera grid holds
  the face, or "no face"),
* 5 pan buckets (coarse proprioception of the current pan angle).

Five actions move the head in 5-degree steps or keep it still.  The reward
is the audio-visual objective ``r_face + r_corr`` from
:mod:`cocktail.avsync`: one point for holding a face in view plus the
significant positive correlation between that face's mouth area and the
binaural envelope.  An episode models a single attention event: it succeeds
when the head stays within the fixation tolerance of the active speaker for
three consecutive steps, and it ends in failure the moment an acquired
fixation is broken.  Without that rule the reward admits a degenerate
optimum: oscillating across the tolerance boundary collects the face reward
on alternate steps forever, which under discounting outvalues finishing the
episode.  Ending the event on the first break makes holding strictly
better, so the learned policy fixates and stays.  On success, the
episode's evidence captures (see :mod:`cocktail.dataset`) can be labeled
from the final pose alone.

Everything is deterministic given the seeds: scenes, rendering, exploration
and the simulator's noise streams all derive from explicit integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import frontend
from .avsync import analytic_envelope, correlate_min_p, resample_envelope, reward
from .dataset import EVIDENCE_WINDOW_SAMPLES, EvidenceBuffer, RingBuffer
from .errors import DomainError, FormatError, InputError
from .fuzzy import classify, term_index
from .scene import (
    ACTIONS,
    GRID_H,
    GRID_W,
    MOUTH_RATE_HZ,
    PAN_LIMIT_DEG,
    SAMPLE_RATE,
    HeadPose,
    Scene,
    SpeakerSpec,
    SpeechSource,
    TurnSchedule,
    mouth_area_signal,
    observe_visual,
    render_binaural,
    step_head,
)

#: Discrete state space: 5 locations x 10 face buckets x 5 pan buckets.
N_LOCATIONS = 5
N_FACE_BUCKETS = 10
N_PAN_BUCKETS = 5
N_STATES = N_LOCATIONS * N_FACE_BUCKETS * N_PAN_BUCKETS
N_ACTIONS = len(ACTIONS)

LEARNING_RATE = 0.1
DISCOUNT = 0.9
EPSILON_START = 0.5
EPSILON_FINAL = 0.05

#: Fixation: both relative angles within this tolerance...
FIXATION_TOLERANCE_DEG = 10.0
#: ...for this many consecutive post-action poses.
FIXATION_HOLD_STEPS = 3

MAX_EPISODE_STEPS = 60
FAST_MAX_EPISODE_STEPS = 40

#: Audio rendered at the initial pose before the first step, so the ring
#: buffer is full and the posterior is warmed up when the episode starts.
PREROLL_S = 2.0

#: Background noise level for sampled training/evaluation scenes.
SCENE_NOISE_LEVEL = 0.01

#: Schedule length for sampled scenes; comfortably longer than any episode.
SCENE_DURATION_S = 40.0


@dataclass(frozen=True)
class AgentConfig:
    """Episode timing/resolution knobs.

    ``fast`` trades fidelity for speed: coarser time steps, fewer gammatone
    bands, frame-length analysis hops, and a shorter correlation window
    (5 s instead of 10 s at the 10 Hz mouth rate).  The state space, reward
    and termination rules are identical in both modes.
    """

    fast: bool = False

    @property
    def step_s(self) -> float:
        return 0.1 if self.fast else 0.5

    @property
    def num_bands(self) -> int:
        return 8 if self.fast else frontend.NUM_BANDS

    @property
    def frame_s(self) -> float:
        return 0.1 if self.fast else frontend.FRAME_S

    @property
    def hop_s(self) -> float:
        return frontend.HOP_S

    @property
    def corr_window_n(self) -> int:
        return 50 if self.fast else 100

    @property
    def max_steps(self) -> int:
        return FAST_MAX_EPISODE_STEPS if self.fast else MAX_EPISODE_STEPS


# ---------------------------------------------------------------------------
# State encoding


def face_bucket(face) -> int:
    """Bucket a face grid position into a 3x3 partition; 9 means no face."""
    if face is None:
        return 9
    gx, gy = face
    if not (0 <= gx < GRID_W and 0 <= gy < GRID_H):
        raise DomainError(f"face cell ({gx}, {gy}) outside the camera grid")
    return (gy * 3 // GRID_H) * 3 + (gx * 3 // GRID_W)


def pan_bucket(pan_deg: float) -> int:
    """Coarse pan proprioception: five 32-degree buckets over [-80, 80]."""
    if not -PAN_LIMIT_DEG <= pan_deg <= PAN_LIMIT_DEG:
        raise DomainError(f"pan {pan_deg} outside +/-{PAN_LIMIT_DEG}")
    return min(N_PAN_BUCKETS - 1, int((pan_deg + PAN_LIMIT_DEG) // 32))


def encode_state(loc_index: int, face, pan_deg: float) -> int:
    """Flatten (location term, face bucket, pan bucket) into one state id."""
    if not 0 <= loc_index < N_LOCATIONS:
        raise DomainError(f"location index {loc_index} outside 0..{N_LOCATIONS - 1}")
    return (
        loc_index * N_FACE_BUCKETS * N_PAN_BUCKETS
        + face_bucket(face) * N_PAN_BUCKETS
        + pan_bucket(pan_deg)
    )


# ---------------------------------------------------------------------------
# Q table and policy


@dataclass
class QTable:
    """Action values plus per-(state, action) visit counts.

    ``values`` is the 250 x 5 table of Q estimates; ``visit_counts`` records
    how many learning updates each entry has received, which makes coverage
    of the state space inspectable after training.
    """

    values: np.ndarray
    visit_counts: np.ndarray


def new_qtable() -> QTable:
    return QTable(
        values=np.zeros((N_STATES, N_ACTIONS)),
        visit_counts=np.zeros((N_STATES, N_ACTIONS), dtype=np.int64),
    )


def _validate_qtable(qtable) -> QTable:
    if not isinstance(qtable, QTable):
        raise DomainError(f"expected a QTable, got {type(qtable).__name__}")
    if qtable.values.shape != (N_STATES, N_ACTIONS):
        raise DomainError(
            f"qtable values shape {qtable.values.shape} != ({N_STATES}, {N_ACTIONS})"
        )
    if qtable.visit_counts.shape != (N_STATES, N_ACTIONS):
        raise DomainError(
            f"qtable counts shape {qtable.visit_counts.shape}"
            f" != ({N_STATES}, {N_ACTIONS})"
        )
    if not np.all(np.isfinite(qtable.values)):
        raise DomainError("qtable contains non-finite values")
    if np.any(qtable.visit_counts < 0):
        raise DomainError("qtable visit counts must be nonnegative")
    return qtable


def select_action(q_row: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action choice; greedy ties break to the lowest index."""
    row = np.asarray(q_row, dtype=np.float64)
    if row.shape != (N_ACTIONS,):
        raise DomainError(f"q_row must have {N_ACTIONS} entries, got {row.shape}")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(N_ACTIONS))
    return int(np.argmax(row))


def q_update(
    qtable: QTable,
    state: int,
    action: int,
    reward_value: float,
    next_state: int,
    terminal: bool,
    learning_rate: float = LEARNING_RATE,
    discount: float = DISCOUNT,
) -> float:
    """One Q-learning backup; returns the updated entry.

    ``Q[s, a] += lr * (r + discount * max_a' Q[s', a'] * [not terminal] - Q[s, a])``

    The entry's visit count is incremented alongside the value update.
    """
    q = qtable.values
    target = reward_value
    if not terminal:
        target += discount * float(np.max(q[next_state]))
    q[state, action] += learning_rate * (target - q[state, action])
    qtable.visit_counts[state, action] += 1
    return float(q[state, action])


def epsilon_at(
    episode: int,
    total: int,
    start: float = EPSILON_START,
    final: float = EPSILON_FINAL,
) -> float:
    """Linear exploration anneal from ``start`` to ``final`` over training."""
    if total <= 1:
        return final
    frac = min(1.0, max(0.0, episode / (total - 1)))
    return start + (final - start) * frac


def is_fixated(
    pose: HeadPose,
    azimuth_world: float,
    elevation_world: float,
    tolerance: float = FIXATION_TOLERANCE_DEG,
) -> bool:
    """Is the head pointing at the source? Both angles within tolerance."""
    return (
        abs(azimuth_world - pose.pan) <= tolerance
        and abs(elevation_world - pose.tilt) <= tolerance
    )


# ---------------------------------------------------------------------------
# Episode runner


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one attention episode.

    ``trajectory`` holds one ``(state, action, reward, next_state)`` tuple
    per step, so its length always equals ``steps``.
    """

    success: bool
    steps: int
    total_reward: float
    final_pose: HeadPose
    captures: tuple
    trajectory: tuple


def run_episode(
    scene: Scene,
    init_pose: HeadPose,
    qtable: QTable,
    *,
    config: AgentConfig | None = None,
    rng: np.random.Generator | None = None,
    epsilon: float = 0.0,
    learn: bool = False,
    render_seed: int = 0,
) -> EpisodeResult:
    """Run one fixation episode; optionally update ``qtable`` in place.

    The loop alternates observe / act / listen: the agent encodes its state
    from the current posterior, visuals and pan; possibly snapshots evidence
    (the audio in the ring was rendered at the pre-action pose, keeping
    captures pose-consistent); picks an action; renders the next
    ``config.step_s`` of audio at the new pose; and scores the step with the
    audio-visual reward.  Success is three consecutive fixated steps;
    breaking an acquired fixation ends the episode in failure (one
    attention event per episode, so boundary oscillation cannot outvalue
    holding).
    """
    if config is None:
        config = AgentConfig()
    if rng is None:
        rng = np.random.default_rng(0)
    if len(scene.speakers) != 1:
        raise DomainError("run_episode requires a single-speaker scene")
    _validate_qtable(qtable)
    speaker = scene.speakers[0]
    fs = SAMPLE_RATE

    bank = frontend.make_gammatone_bank(num_bands=config.num_bands)
    stream = frontend.GammatoneStream(bank, channels=2)
    frame_n = int(round(config.frame_s * fs))
    hop_n = int(round(config.hop_s * fs))
    band_l = np.zeros((config.num_bands, 0))
    band_r = np.zeros((config.num_bands, 0))

    posterior = frontend.uniform_posterior()
    ring = RingBuffer(EVIDENCE_WINDOW_SAMPLES)
    evidence = EvidenceBuffer()
    env_l = np.zeros(0)
    env_r = np.zeros(0)
    mouth = np.zeros(0)
    pose = init_pose

    def ingest(t0: float, duration: float, analyze_tail_s: float | None = None):
        """Render, buffer, and analyze ``[t0, t0 + duration)`` at `pose`."""
        nonlocal band_l, band_r, env_l, env_r, mouth, posterior
        clip = render_binaural(scene, pose, t0, duration, seed=render_seed)
        ring.push(clip.left, clip.right)
        stereo = np.stack([clip.left, clip.right])
        env_pair = analytic_envelope(stereo)
        env_l = np.concatenate(
            [env_l, resample_envelope(env_pair[0], fs, MOUTH_RATE_HZ)]
        )
        env_r = np.concatenate(
            [env_r, resample_envelope(env_pair[1], fs, MOUTH_RATE_HZ)]
        )
        _, areas = mouth_area_signal(
            speaker, scene.schedule, t0, duration, seed=render_seed
        )
        mouth = np.concatenate([mouth, areas])
        if analyze_tail_s is not None:
            stereo = stereo[:, -int(round(analyze_tail_s * fs)) :]
        bands = stream.process(stereo)
        band_l = np.concatenate([band_l, bands[:, 0, :]], axis=1)
        band_r = np.concatenate([band_r, bands[:, 1, :]], axis=1)
        while band_l.shape[1] >= frame_n:
            salience = frontend.beamform_salience(
                band_l[:, :frame_n],
                band_r[:, :frame_n],
                frame_s=config.frame_s,
                hop_s=config.frame_s,
            )
            posterior = frontend.update_posterior(posterior, salience[0])
            band_l = band_l[:, hop_n:]
            band_r = band_r[:, hop_n:]

    def observe(t: float) -> int:
        loc = term_index(classify(frontend.estimate_location(posterior)))
        face = None
        for sid, gx, gy in observe_visual(scene, pose, t).visible_faces:
            if sid == speaker.id:
                face = (gx, gy)
        return encode_state(loc, face, pose.pan)

    # Pre-roll at the initial pose.  The whole stretch feeds the ring and
    # envelope buffers; only the final evidence-window span runs through the
    # (costly) frontend to warm up the posterior.
    ingest(0.0, PREROLL_S, analyze_tail_s=min(PREROLL_S, 0.5))

    total_reward = 0.0
    hold = 0
    steps = 0
    success = False
    trajectory = []
    state = observe(PREROLL_S)
    for k in range(config.max_steps):
        t = PREROLL_S + k * config.step_s
        evidence.maybe_capture(t, posterior, ring, pose)
        action = select_action(qtable.values[state], epsilon, rng)
        pose = step_head(pose, ACTIONS[action])
        ingest(t, config.step_s)
        fixated = is_fixated(pose, speaker.azimuth_world, speaker.elevation_world)
        broken = hold > 0 and not fixated
        hold = hold + 1 if fixated else 0
        corr = None
        if fixated and mouth.size >= config.corr_window_n:
            w = config.corr_window_n
            corr = correlate_min_p(env_l[-w:], env_r[-w:], mouth[-w:], window_n=w)[0]
        step_reward = reward(fixated, corr)
        total_reward += step_reward.total
        steps = k + 1
        success = hold >= FIXATION_HOLD_STEPS
        terminal = success or broken or steps >= config.max_steps
        next_state = observe(t + config.step_s)
        if learn:
            q_update(qtable, state, action, step_reward.total, next_state, terminal)
        trajectory.append((state, ACTIONS[action], step_reward.total, next_state))
        state = next_state
        if success or broken:
            break
    return EpisodeResult(
        success=success,
        steps=steps,
        total_reward=total_reward,
        final_pose=pose,
        captures=tuple(evidence.captures),
        trajectory=tuple(trajectory),
    )


# ---------------------------------------------------------------------------
# Scene sampling, training, evaluation


def _sampled_scene(rng, offset_steps, duration, noise_level):
    init_pan = 5.0 * int(rng.integers(-4, 5))
    init_tilt = 5.0 * int(rng.integers(-2, 3))
    azimuth = float(np.clip(init_pan + 5.0 * offset_steps, -90.0, 90.0))
    elevation = float(np.clip(init_tilt + 5.0 * int(rng.integers(-3, 4)), -30.0, 30.0))
    speaker = SpeakerSpec(
        id=1,
        azimuth_world=azimuth,
        elevation_world=elevation,
        speech=SpeechSource(seed=int(rng.integers(1, 2**31))),
    )
    scene = Scene(
        speakers=(speaker,),
        schedule=TurnSchedule(((0.0, duration, 1),)),
        noise_level=noise_level,
    )
    return scene, HeadPose(init_pan, init_tilt)


def sample_training_scene(
    rng: np.random.Generator,
    duration: float = SCENE_DURATION_S,
    noise_level: float = SCENE_NOISE_LEVEL,
):
    """A single-speaker scene on the 5-degree lattice around the start pose.

    Azimuth offsets span 0..60 degrees either side; elevation offsets stay
    within 15 degrees so the face is vertically inside the field of view
    whenever the pan is right.
    """
    return _sampled_scene(rng, int(rng.integers(-12, 13)), duration, noise_level)


def sample_eval_scene(
    rng: np.random.Generator,
    duration: float = SCENE_DURATION_S,
    noise_level: float = SCENE_NOISE_LEVEL,
):
    """Like :func:`sample_training_scene` but offsets are at least 15 degrees,
    so an undirected random walk rarely stumbles into fixation."""
    magnitude = int(rng.integers(3, 13))
    sign = 1 if rng.random() < 0.5 else -1
    return _sampled_scene(rng, sign * magnitude, duration, noise_level)


@dataclass(frozen=True)
class TrainStats:
    episodes: int
    successes: int
    final_success_rate: float


@dataclass(frozen=True)
class EvalStats:
    episodes: int
    success_rate: float
    median_steps: float
    steps: tuple


def _episode_render_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index) % (2**31)


def train(
    num_episodes: int,
    seed: int = 0,
    config: AgentConfig | None = None,
    callback=None,
) -> tuple[QTable, TrainStats]:
    """Train a fresh Q table on sampled scenes with annealed exploration."""
    if num_episodes <= 0:
        raise DomainError(f"num_episodes must be positive, got {num_episodes}")
    if config is None:
        config = AgentConfig()
    qtable = new_qtable()
    outcomes = []
    for i in range(num_episodes):
        scene, pose0 = sample_training_scene(np.random.default_rng([seed, i, 0]))
        result = run_episode(
            scene,
            pose0,
            qtable,
            config=config,
            rng=np.random.default_rng([seed, i, 1]),
            epsilon=epsilon_at(i, num_episodes),
            learn=True,
            render_seed=_episode_render_seed(seed, i),
        )
        outcomes.append(result.success)
        if callback is not None:
            callback(i, result)
    tail = outcomes[-100:]
    stats = TrainStats(
        episodes=num_episodes,
        successes=int(np.sum(outcomes)),
        final_success_rate=float(np.mean(tail)) if tail else 0.0,
    )
    return qtable, stats


def evaluate(
    qtable: QTable,
    num_episodes: int,
    seed: int = 0,
    config: AgentConfig | None = None,
    policy: str = "greedy",
    sampler=sample_eval_scene,
) -> EvalStats:
    """Evaluate a policy on a seeded scene set (no learning).

    ``policy`` is ``"greedy"`` (epsilon 0) or ``"random"`` (epsilon 1).  The
    scene sequence depends only on ``seed``, so both policies can be scored
    on identical episodes.
    """
    if policy not in ("greedy", "random"):
        raise DomainError(f"policy must be 'greedy' or 'random', got {policy!r}")
    if num_episodes <= 0:
        raise DomainError(f"num_episodes must be positive, got {num_episodes}")
    if config is None:
        config = AgentConfig()
    epsilon = 0.0 if policy == "greedy" else 1.0
    steps = []
    successes = []
    for i in range(num_episodes):
        scene, pose0 = sampler(np.random.default_rng([seed, i, 0]))
        result = run_episode(
            scene,
            pose0,
            qtable,
            config=config,
            rng=np.random.default_rng([seed, i, 1]),
            epsilon=epsilon,
            learn=False,
            render_seed=_episode_render_seed(seed, i),
        )
        steps.append(result.steps)
        successes.append(result.success)
    return EvalStats(
        episodes=num_episodes,
        success_rate=float(np.mean(successes)),
        median_steps=float(np.median(steps)),
        steps=tuple(steps),
    )


# ---------------------------------------------------------------------------
# Persistence


def save_qtable(path, qtable: QTable) -> None:
    """Save a Q table (values and visit counts) to ``path`` as a .npz file.

    The file handle is opened explicitly so the exact filename is used.
    """
    qt = _validate_qtable(qtable)
    with open(path, "wb") as fh:
        np.savez(fh, values=qt.values, visit_counts=qt.visit_counts)


def load_qtable(path) -> QTable:
    """Load and validate a Q table written by :func:`save_qtable`."""
    try:
        with open(path, "rb") as fh:
            archive = np.load(fh)
            data = {name: archive[name] for name in archive.files}
    except FileNotFoundError:
        raise InputError(f"no such Q-table file: {path}") from None
    except (ValueError, OSError) as exc:
        raise FormatError(f"not a valid Q-table file: {path}") from exc
    missing = {"values", "visit_counts"} - set(data)
    if missing:
        raise FormatError(f"Q-table file missing arrays: {sorted(missing)}")
    try:
        return _validate_qtable(
            QTable(values=data["values"], visit_counts=data["visit_counts"])
        )
    except DomainError as exc:
        raise FormatError(str(exc)) from exc
