"""Harvest self-labeled localization records from fixation episodes.

While the trained head controller chases speakers, the evidence buffer
quietly snapshots binaural features whenever the azimuth posterior shows a
confident peak.  If the episode then ends with gaze settled on the speaker,
the head's own final pose labels the snapshot: the direction of the sound
relative to where the head was looking when the snapshot was taken.  No
ground-truth angles are used — the labels come from proprioception.

The script loads the Q-table written by demo 05 (or trains a quick one),
runs 150 harvest episodes, and reports how close the self-supervised labels
land to the simulator's ground truth.

Run:  python demos/06_build_dataset.py   (about half a minute after demo 05)
"""

from pathlib import Path

from cocktail import agent, dataset


def main():
    out = Path("demo_out")
    out.mkdir(exist_ok=True)
    qtable_path = out / "qtable.npz"
    if qtable_path.exists():
        print(f"loading policy from {qtable_path}")
        qtable = agent.load_qtable(qtable_path)
    else:
        print("no saved policy found; training a quick 600-episode one ...")
        qtable, _ = agent.train(600, seed=11, config=agent.AgentConfig(fast=True))

    episodes = 150
    print(f"harvesting from {episodes} episodes ...")
    records, stats = dataset.build_dataset(
        qtable, episodes, seed=5, config=agent.AgentConfig(fast=True)
    )

    print(f"\nepisodes run        : {stats['episodes']}")
    print(f"successful episodes : {stats['successes']}")
    print(f"records harvested   : {stats['records']}")
    print(f"worst azimuth label error   : {stats['max_azimuth_label_error_deg']:.1f} deg")
    print(f"worst elevation label error : {stats['max_elevation_label_error_deg']:.1f} deg")
    print("(labels are only as sharp as the fixation tolerance, "
          "so errors up to 10 deg are expected)")

    data_path = out / "dataset.jsonl"
    dataset.write_dataset(data_path, records, meta={"seed": 5, "episodes": episodes})
    print(f"wrote {data_path}")


if __name__ == "__main__":
    main()
