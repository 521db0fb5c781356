"""Detect which of two people is talking from correlation evidence alone.

Two speakers on opposite sides take ten-second turns for one minute.  In
each analysis window the heard envelope is correlated against both mouth
tracks; whoever shows a significant positive correlation — the smaller
p-value winning if both do — is called the active speaker.  The script
prints the call for each window next to the ground truth from the schedule.

Run:  python demos/03_turn_taking.py
"""

from cocktail.cli import turn_taking_rows
from cocktail.scene import Scene, SpeakerSpec, SpeechSource, TurnSchedule


def main():
    duration = 60.0
    window_s = 10.0
    first = SpeakerSpec(id=1, azimuth_world=-30.0, elevation_world=0.0,
                        speech=SpeechSource(seed=101))
    second = SpeakerSpec(id=2, azimuth_world=30.0, elevation_world=0.0,
                         speech=SpeechSource(seed=202))
    segments = tuple(
        (10.0 * k, 10.0 * (k + 1), 1 if k % 2 == 0 else 2) for k in range(6)
    )
    scene = Scene(speakers=(first, second), schedule=TurnSchedule(segments),
                  noise_level=0.01)

    print(f"rendering {duration:.0f} s of alternating {window_s:.0f} s turns ...")
    rows = turn_taking_rows(scene, duration, seed=3, window_s=window_s)

    print("\n  window   spk1 r    spk2 r    predicted   truth")
    correct = 0
    for w, res1, res2, predicted, true in rows:
        r1 = f"{res1.r:+.3f}" if res1 is not None else "  --  "
        r2 = f"{res2.r:+.3f}" if res2 is not None else "  --  "
        mark = "ok" if predicted == true else "MISS"
        correct += predicted == true
        print(f"  {w:>6}   {r1}    {r2}    {predicted!s:>9}   {true!s:>5}   {mark}")
    print(f"\ncorrect in {correct}/{len(rows)} windows")


if __name__ == "__main__":
    main()
