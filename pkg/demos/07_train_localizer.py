"""Train the neural localizer on self-labeled records and score it.

The final stage of the loop: the records harvested in demo 06 — binaural
features labeled by the head's own poses, never by the simulator — train a
small two-headed MLP that classifies azimuth and elevation in 5-degree
bins.  The script fits the network with plain momentum SGD, prints the loss
curve, and evaluates on the held-out validation fold.

With only the ~100 records demo 06 produces the network already localizes
most held-out snapshots; the full `cocktail pipeline` harvest (thousands of
records) reaches over 90% azimuth accuracy.

Run:  python demos/07_train_localizer.py   (a few seconds after demo 06)
"""

from pathlib import Path

from cocktail import dataset, localizer


def main():
    data_path = Path("demo_out") / "dataset.jsonl"
    if not data_path.exists():
        raise SystemExit(
            f"{data_path} not found - run demos/06_build_dataset.py first"
        )
    records, meta = dataset.read_dataset(data_path)
    print(f"loaded {len(records)} records (meta: {meta})")

    model, stats = localizer.train_localizer(records, seed=0, epochs=30)

    print("\n  epoch   mean loss")
    history = stats["loss_history"]
    for epoch in range(0, len(history), 5):
        print(f"  {epoch:>5}   {history[epoch]:.3f}")
    print(f"  {len(history) - 1:>5}   {history[-1]:.3f}")

    print(f"\ntrain/val split      : {stats['train_size']}/{stats['val_size']}")
    print(f"val azimuth within 10 deg   : {stats['val_azimuth_within_10_deg']:.0%}")
    print(f"val elevation within 10 deg : {stats['val_elevation_within_10_deg']:.0%}")
    print(f"val azimuth MAE             : {stats['val_azimuth_mae_deg']:.1f} deg")
    print(f"val elevation MAE           : {stats['val_elevation_mae_deg']:.1f} deg")

    # Show a few individual predictions against the stored labels.
    sample = records[:5]
    azimuths, elevations = localizer.predict_angles(
        model, [rec.features for rec in sample]
    )
    print("\n  label az/el      predicted az/el")
    for rec, az, el in zip(sample, azimuths, elevations):
        print(f"  {rec.azimuth_deg:+6.0f}/{rec.elevation_deg:+4.0f}"
              f"        {az:+6.0f}/{el:+4.0f}")


if __name__ == "__main__":
    main()
