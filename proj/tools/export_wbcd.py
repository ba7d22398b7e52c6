#!/usr/bin/env python3
"""Write the Wisconsin Diagnostic Breast Cancer table to data/wbcd.csv.

The copy bundled with scikit-learn is used so no network access is needed.
Label column `diagnosis`: 0 = malignant, 1 = benign.
"""
import csv
import pathlib
import sys

from sklearn.datasets import load_breast_cancer


def main(out: pathlib.Path) -> None:
    bunch = load_breast_cancer()
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        names = [n.replace(" ", "_") for n in bunch.feature_names]
        writer.writerow(names + ["diagnosis"])
        for row, label in zip(bunch.data, bunch.target):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


if __name__ == "__main__":
    root = pathlib.Path(__file__).resolve().parent.parent
    main(pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else root / "data" / "wbcd.csv")
