"""Regenerate the CSV fixtures bundled with the package.

iris.csv is the classic UCI iris table, exported from scikit-learn.

zoo.csv and sonar.csv are deterministic stand-ins: this environment has no
network access to the UCI repository, so we synthesize tables with the same
shape, class balance, and comparable classification difficulty as the
originals (101x16 with 7 classes; 208x60 with 2 classes). See
src/moimpute/data/PROVENANCE.md. Difficulty was checked against the error
rates commonly reported for the real tables, not tuned to any test.

Run from the repository root:  python scripts/make_fixtures.py
"""

import csv
from pathlib import Path

import numpy as np
from sklearn.datasets import load_iris

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "moimpute" / "data"

ZOO_FEATURES = [
    "hair", "feathers", "eggs", "milk", "airborne", "aquatic", "predator",
    "toothed", "backbone", "breathes", "venomous", "fins", "legs", "tail",
    "domestic", "catsize",
]

# Per-class probability of each boolean trait plus a legs distribution,
# loosely following the animal-taxonomy semantics of the original table.
ZOO_CLASSES = [
    # name, count, trait probabilities (15 booleans), legs values, legs probs
    ("mammal", 41,
     [.95, .0, .02, 1., .05, .15, .55, .95, 1., 1., .02, .05, .85, .1, .6],
     [0, 2, 4], [.05, .25, .70]),
    ("bird", 20,
     [.0, 1., 1., .0, .8, .3, .5, .0, 1., 1., .0, .0, 1., .05, .15],
     [2], [1.0]),
    ("reptile", 5,
     [.0, .0, .9, .0, .0, .4, .8, .8, 1., 1., .4, .0, .6, .0, .2],
     [0, 4], [.4, .6]),
    ("fish", 13,
     [.0, .0, 1., .0, .0, 1., .6, .9, 1., .0, .1, 1., .95, .0, .2],
     [0], [1.0]),
    ("amphibian", 4,
     [.0, .0, 1., .0, .0, .9, .7, .9, 1., 1., .2, .0, .8, .0, .0],
     [4], [1.0]),
    ("insect", 8,
     [.4, .0, 1., .0, .7, .1, .3, .0, .0, 1., .15, .0, .1, .0, .1],
     [6], [1.0]),
    ("invertebrate", 10,
     [.1, .0, .9, .0, .0, .7, .8, .1, .0, .4, .2, .0, .2, .0, .1],
     [0, 5, 6, 8], [.5, .1, .2, .2]),
]


def write_iris() -> None:
    bunch = load_iris()
    names = [n.replace(" (cm)", "").replace(" ", "_") for n in bunch.feature_names]
    with open(OUT_DIR / "iris.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["class"])
        for row, target in zip(bunch.data, bunch.target):
            writer.writerow([f"{v:.1f}" for v in row] + [bunch.target_names[target]])


def write_zoo(seed: int = 20240601) -> None:
    rng = np.random.default_rng(seed)
    rows = []
    for name, count, probs, legs_vals, legs_probs in ZOO_CLASSES:
        for _ in range(count):
            traits = (rng.random(15) < np.asarray(probs)).astype(int)
            legs = rng.choice(legs_vals, p=legs_probs)
            booleans = ["true" if t else "false" for t in traits]
            # legs sits between "fins" and "tail" in the trait list
            rows.append(booleans[:12] + [str(int(legs))] + booleans[12:] + [name])
    rng.shuffle(rows)
    with open(OUT_DIR / "zoo.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ZOO_FEATURES + ["class"])
        writer.writerows(rows)


def write_sonar(seed: int = 20240602) -> None:
    """Two-class spectra: 60 energy bands, smooth class templates, heavy overlap."""
    rng = np.random.default_rng(seed)
    bands = np.arange(60)

    def template(peaks):
        curve = np.zeros(60)
        for center, width, height in peaks:
            curve += height * np.exp(-0.5 * ((bands - center) / width) ** 2)
        return curve

    rock = template([(12, 6, 0.55), (30, 9, 0.35), (47, 5, 0.25)])
    mine = template([(14, 6, 0.55), (32, 9, 0.38), (45, 5, 0.28)])

    def sample(mean_curve, count):
        out = np.empty((count, 60))
        for i in range(count):
            drift = np.cumsum(rng.normal(0.0, 0.045, size=60))
            drift -= drift.mean()
            scale = rng.uniform(0.62, 1.38)
            shift = rng.integers(-4, 5)
            curve = np.roll(mean_curve, shift) * scale + drift
            curve += rng.normal(0.0, 0.05, size=60)
            out[i] = np.clip(curve + 0.15, 0.0, 1.0)
        return out

    X = np.vstack([sample(rock, 97), sample(mine, 111)])
    y = np.array(["rock"] * 97 + ["mine"] * 111)
    order = rng.permutation(len(y))
    with open(OUT_DIR / "sonar.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"band_{i + 1:02d}" for i in range(60)] + ["class"])
        for i in order:
            writer.writerow([f"{v:.4f}" for v in X[i]] + [y[i]])


if __name__ == "__main__":
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_iris()
    write_zoo()
    write_sonar()
    print(f"fixtures written to {OUT_DIR}")
