"""Tests for the scene simulator: acoustics, vision, kinematics, and I/O."""

import math

import numpy as np
import pytest

from cocktail import scene as sc
from cocktail.errors import DomainError, InputError

# Frozen oracle: (0.0875 / 343) * (1 + pi/2) evaluated independently.
ORACLE_ITD_90_S = 6.558154e-4


def single_speaker_scene(az, el=0.0, duration=10.0, noise=0.0, speech_seed=7, **spk):
    speaker = sc.SpeakerSpec(
        id=1, azimuth_world=az, elevation_world=el,
        speech=sc.SpeechSource(seed=speech_seed), **spk,
    )
    return sc.Scene(
        speakers=(speaker,),
        schedule=sc.TurnSchedule(((0.0, duration, 1),)),
        noise_level=noise,
    )


# ---------------------------------------------------------------------------
# itd_for_azimuth
# ---------------------------------------------------------------------------


def test_itd_zero_at_center():
    assert sc.itd_for_azimuth(0.0) == 0.0


def test_itd_90_matches_frozen_oracle():
    assert abs(sc.itd_for_azimuth(90.0) - ORACLE_ITD_90_S) < 1e-8
    assert round(sc.itd_for_azimuth(90.0) * sc.SAMPLE_RATE) == 31


def test_itd_odd_symmetry():
    for az in np.linspace(0.0, 90.0, 19):
        assert sc.itd_for_azimuth(-az) == -sc.itd_for_azimuth(az)


def test_itd_monotone_in_azimuth():
    vals = [sc.itd_for_azimuth(a) for a in range(-90, 91, 5)]
    assert np.all(np.diff(vals) > 0)


def test_itd_rejects_out_of_range():
    with pytest.raises(DomainError):
        sc.itd_for_azimuth(91.0)
    with pytest.raises(DomainError):
        sc.itd_for_azimuth(-90.5)


def test_fold_azimuth_mirrors_rear_sources():
    assert sc.fold_azimuth(120.0) == 60.0
    assert sc.fold_azimuth(-120.0) == -60.0
    assert sc.fold_azimuth(45.0) == 45.0


# ---------------------------------------------------------------------------
# render_binaural
# ---------------------------------------------------------------------------


def test_render_center_source_identical_channels():
    scene = single_speaker_scene(0.0)
    clip = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.5, seed=3)
    assert np.array_equal(clip.left, clip.right)
    assert np.max(np.abs(clip.left)) > 0


def test_render_90deg_crosscorrelation_peak_at_31_samples():
    scene = single_speaker_scene(90.0)
    clip = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.5, seed=3)
    # Brute-force cross-correlation over all integer lags.
    lags = np.arange(-40, 41)
    cc = [np.dot(clip.left[40 + k : 20000 + k], clip.right[40:20000]) for k in lags]
    assert lags[int(np.argmax(cc))] == 31


def test_render_empty_schedule_silence():
    scene = sc.Scene(
        speakers=(), schedule=sc.TurnSchedule(((0.0, 5.0, None),)), noise_level=0.0
    )
    clip = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.5, seed=1)
    assert np.all(clip.left == 0) and np.all(clip.right == 0)


def test_render_deterministic():
    scene = single_speaker_scene(30.0, el=10.0, noise=0.05)
    a = sc.render_binaural(scene, sc.HeadPose(5, -5), 0.3, 0.4, seed=11)
    b = sc.render_binaural(scene, sc.HeadPose(5, -5), 0.3, 0.4, seed=11)
    assert np.array_equal(a.left, b.left) and np.array_equal(a.right, b.right)


def test_render_streaming_consistency():
    """Chunked rendering reproduces one long render of the same interval."""
    scene = single_speaker_scene(40.0, el=-10.0, noise=0.02)
    pose = sc.HeadPose(10, 5)
    whole = sc.render_binaural(scene, pose, 0.0, 0.4, seed=5)
    chunks = [sc.render_binaural(scene, pose, 0.1 * i, 0.1, seed=5) for i in range(4)]
    left = np.concatenate([c.left for c in chunks])
    right = np.concatenate([c.right for c in chunks])
    np.testing.assert_allclose(left, whole.left, atol=1e-10)
    np.testing.assert_allclose(right, whole.right, atol=1e-10)


def test_render_mirror_symmetry():
    """Swapping channels of a +theta render equals the -theta render exactly."""
    for az, el in [(30.0, 10.0), (75.0, -20.0)]:
        plus = sc.render_binaural(single_speaker_scene(az, el=el), sc.HeadPose(0, 0), 0.0, 0.3, seed=9)
        minus = sc.render_binaural(single_speaker_scene(-az, el=el), sc.HeadPose(0, 0), 0.0, 0.3, seed=9)
        assert np.array_equal(plus.right, minus.left)
        assert np.array_equal(plus.left, minus.right)


def test_render_ild_louder_on_source_side():
    scene = single_speaker_scene(60.0)
    clip = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.5, seed=3)
    assert np.sum(clip.right**2) > np.sum(clip.left**2)


def test_render_elevation_notch_moves_with_elevation():
    """The rendered spectrum dips at 7.5 kHz + 50 Hz/deg of relative elevation."""
    for el in (-20.0, 0.0, 20.0):
        scene = single_speaker_scene(0.0, el=el)
        clip = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 1.0, seed=4)
        spec = np.abs(np.fft.rfft(clip.left)) ** 2
        freqs = np.fft.rfftfreq(len(clip.left), 1.0 / sc.SAMPLE_RATE)
        band = (freqs > 6000) & (freqs < 9000)
        dip = freqs[band][np.argmin(spec[band])]
        assert abs(dip - (7500.0 + 50.0 * el)) < 150.0


def test_render_rear_source_folds_to_frontal_mirror():
    # Source at world azimuth 80 with pan -40 sits at relative 120 -> renders as 60.
    scene = single_speaker_scene(80.0)
    rear = sc.render_binaural(scene, sc.HeadPose(-40, 0), 0.0, 0.3, seed=6)
    lags = np.arange(-40, 41)
    cc = [np.dot(rear.left[40 + k : 12000 + k], rear.right[40:12000]) for k in lags]
    expect = round(sc.itd_for_azimuth(60.0) * sc.SAMPLE_RATE)
    assert abs(lags[int(np.argmax(cc))] - expect) <= 1


def test_render_rejects_bad_duration():
    scene = single_speaker_scene(0.0)
    with pytest.raises(DomainError):
        sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.0, seed=1)


# ---------------------------------------------------------------------------
# observe_visual
# ---------------------------------------------------------------------------


def test_observe_center_face_at_grid_16_12():
    scene = single_speaker_scene(0.0)
    obs = sc.observe_visual(scene, sc.HeadPose(0, 0), 1.0)
    assert obs.visible_faces == ((1, 16, 12),)
    assert obs.face_map[12, 16] == 1.0
    assert obs.face_map.sum() == 1.0


def test_observe_45deg_outside_fov():
    scene = single_speaker_scene(45.0)
    obs = sc.observe_visual(scene, sc.HeadPose(0, 0), 1.0)
    assert obs.visible_faces == ()
    assert not obs.face_map.any()
    assert obs.mouth_area_by_face == {}


def test_observe_15deg_maps_to_gx_23():
    # round((15 + 30) / 60 * 31) = 23
    scene = single_speaker_scene(15.0)
    obs = sc.observe_visual(scene, sc.HeadPose(0, 0), 1.0)
    assert obs.visible_faces[0][1] == 23


def test_observe_fov_exclusion_all_poses():
    scene = single_speaker_scene(20.0, el=5.0)
    for pan in range(-80, 81, 10):
        for tilt in range(-30, 31, 10):
            obs = sc.observe_visual(scene, sc.HeadPose(pan, tilt), 0.5)
            outside = abs(20.0 - pan) > 30 or abs(5.0 - tilt) > 20
            assert (len(obs.visible_faces) == 0) == outside


def test_observe_cells_in_unit_range():
    scene = single_speaker_scene(-12.0, el=14.0)
    obs = sc.observe_visual(scene, sc.HeadPose(0, 0), 0.0)
    assert obs.face_map.min() >= 0.0 and obs.face_map.max() <= 1.0


# ---------------------------------------------------------------------------
# mouth_area_signal
# ---------------------------------------------------------------------------


def test_mouth_silent_speaker_constant_baseline():
    spk = sc.SpeakerSpec(id=2, azimuth_world=0, elevation_world=0, mouth_baseline=0.4)
    schedule = sc.TurnSchedule(((0.0, 10.0, None),))
    _, areas = sc.mouth_area_signal(spk, schedule, 0.0, 10.0, jitter=False)
    assert np.all(areas == 0.4)


def test_mouth_active_speaker_tracks_modulator_exactly():
    scene = single_speaker_scene(0.0)
    spk = scene.speakers[0]
    times, areas = sc.mouth_area_signal(spk, scene.schedule, 0.0, 10.0, jitter=False)
    env = sc.source_envelope(spk.speech, times)
    np.testing.assert_allclose(areas, spk.mouth_baseline + spk.mouth_gain * env)
    r = np.corrcoef(areas, env)[0, 1]
    assert abs(r - 1.0) < 1e-12


def test_mouth_10s_at_10hz_gives_100_samples():
    scene = single_speaker_scene(0.0)
    times, areas = sc.mouth_area_signal(scene.speakers[0], scene.schedule, 0.0, 10.0)
    assert len(times) == 100 and len(areas) == 100


def test_mouth_jitter_scale_and_determinism():
    scene = single_speaker_scene(0.0, mouth_gain=2.0)
    spk = scene.speakers[0]
    _, a1 = sc.mouth_area_signal(spk, scene.schedule, 0.0, 1000.0, seed=5)
    _, a2 = sc.mouth_area_signal(spk, scene.schedule, 0.0, 1000.0, seed=5)
    assert np.array_equal(a1, a2)
    _, clean = sc.mouth_area_signal(spk, scene.schedule, 0.0, 1000.0, jitter=False)
    resid = a1 - clean
    assert abs(np.std(resid) - 0.05 * spk.mouth_gain) < 0.01


def test_mouth_streaming_consistency():
    scene = single_speaker_scene(0.0)
    spk = scene.speakers[0]
    _, whole = sc.mouth_area_signal(spk, scene.schedule, 0.0, 2.0, seed=3)
    parts = [sc.mouth_area_signal(spk, scene.schedule, 0.5 * i, 0.5, seed=3)[1] for i in range(4)]
    assert np.array_equal(np.concatenate(parts), whole)


def test_envelope_in_band():
    src = sc.SpeechSource(seed=11)
    t = np.linspace(0, 100, 10000)
    env = sc.source_envelope(src, t)
    assert env.min() >= 0.05 - 1e-12 and env.max() <= 0.95 + 1e-12


# ---------------------------------------------------------------------------
# step_head
# ---------------------------------------------------------------------------


def test_step_head_left_from_origin():
    assert sc.step_head(sc.HeadPose(0, 0), "left") == sc.HeadPose(-5, 0)


def test_step_head_clamps_at_pan_limit():
    assert sc.step_head(sc.HeadPose(80, 0), "right") == sc.HeadPose(80, 0)


def test_step_head_none_is_identity():
    for pose in [sc.HeadPose(0, 0), sc.HeadPose(-80, 30), sc.HeadPose(35, -15)]:
        assert sc.step_head(pose, "none") == pose


def test_step_head_random_walk_stays_clamped():
    rng = np.random.default_rng(0)
    pose = sc.HeadPose(0, 0)
    for _ in range(500):
        pose = sc.step_head(pose, sc.ACTIONS[rng.integers(5)])
        assert -80 <= pose.pan <= 80 and -30 <= pose.tilt <= 30


def test_step_head_rejects_unknown_action():
    with pytest.raises(DomainError):
        sc.step_head(sc.HeadPose(0, 0), "backflip")


# ---------------------------------------------------------------------------
# Validation and I/O
# ---------------------------------------------------------------------------


def test_speaker_validation():
    with pytest.raises(DomainError):
        sc.SpeakerSpec(id=1, azimuth_world=100, elevation_world=0)
    with pytest.raises(DomainError):
        sc.SpeakerSpec(id=1, azimuth_world=0, elevation_world=40)
    with pytest.raises(DomainError):
        sc.SpeakerSpec(id=1, azimuth_world=0, elevation_world=0, mouth_gain=0)


def test_schedule_validation():
    with pytest.raises(DomainError):
        sc.TurnSchedule(((0.0, 1.0, 1), (2.0, 3.0, 1)))  # gap
    with pytest.raises(DomainError):
        sc.TurnSchedule(((1.0, 1.0, 1),))  # empty segment


def test_speech_source_validation():
    with pytest.raises(DomainError):
        sc.SpeechSource(modulation_band=(0.1, 8.0))
    with pytest.raises(DomainError):
        sc.SpeechSource(kind="mystery")


def test_scene_from_dict_and_errors():
    doc = {
        "seed": 17,
        "noise_level": 0.02,
        "speakers": [
            {"id": 1, "azimuth_deg": 30, "elevation_deg": 5, "speech": {"seed": 3}},
            {"id": 2, "azimuth_deg": -30},
        ],
        "schedule": [[0, 10, 1], [10, 20, 2], [20, 21, None]],
    }
    scene, seed = sc.scene_from_dict(doc)
    assert seed == 17
    assert len(scene.speakers) == 2
    assert scene.schedule.active_at(15.0) == 2
    assert scene.schedule.active_at(20.5) is None
    with pytest.raises(InputError):
        sc.scene_from_dict({"speakers": "nope"})


def test_wav_round_trip(tmp_path):
    scene = single_speaker_scene(20.0)
    raw = sc.render_binaural(scene, sc.HeadPose(0, 0), 0.0, 0.25, seed=2)
    clip = sc.BinauralClip(0.5 * raw.left, 0.5 * raw.right)  # keep within full scale
    path = tmp_path / "clip.wav"
    sc.write_wav(path, clip)
    back = sc.read_wav(path)
    assert len(back) == len(clip)
    np.testing.assert_allclose(back.left, clip.left, atol=1.0 / 32767)
    np.testing.assert_allclose(back.right, clip.right, atol=1.0 / 32767)


def test_mouth_csv_round_trip(tmp_path):
    scene = single_speaker_scene(0.0)
    times, areas = sc.mouth_area_signal(scene.speakers[0], scene.schedule, 0.0, 3.0, seed=1)
    path = tmp_path / "mouth.csv"
    sc.write_mouth_csv(path, times, areas)
    t2, a2 = sc.read_mouth_csv(path)
    assert np.array_equal(t2, times) and np.array_equal(a2, areas)


def test_read_wav_missing_file(tmp_path):
    with pytest.raises(InputError):
        sc.read_wav(tmp_path / "absent.wav")
