#!/usr/bin/env python3
"""Fetch the public benchmark datasets used by the quantitative tests.

Downloads three UCI tables, normalizes them to the package CSV schema
(header row, numeric feature columns, one label column, '?' or empty cells
for missing values), and writes them under data/:

    data/vertebral_column.csv    310 rows, 6 features, labels AB/NO
    data/diagnostic2.csv         699 rows, 9 features, labels benign/malignant
    data/mammographic_mass.csv   961 rows, 5 features, labels benign/malignant

The fourth quantitative dataset (the 569-sample diagnostic table) ships with
scikit-learn, so the tests load it directly; --with-diagnostic1 materializes
it as data/diagnostic1.csv for CLI experiments.

Needs network access to archive.ics.uci.edu.
"""

import argparse
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def _download(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def fetch_vertebral_column() -> None:
    raw = _download(f"{UCI}/00212/vertebral_column_data.zip")
    with zipfile.ZipFile(io.BytesIO(raw)) as zf:
        text = zf.read("column_2C.dat").decode("utf-8")
    lines = ["f0,f1,f2,f3,f4,f5,class"]
    for line in text.strip().splitlines():
        parts = line.split()
        lines.append(",".join(parts[:6] + [parts[6]]))
    (DATA_DIR / "vertebral_column.csv").write_text("\n".join(lines) + "\n")


def fetch_diagnostic2() -> None:
    text = _download(f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data").decode("utf-8")
    header = ["clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
              "marginal_adhesion", "epithelial_cell_size", "bare_nuclei",
              "bland_chromatin", "normal_nucleoli", "mitoses", "class"]
    lines = [",".join(header)]
    for line in text.strip().splitlines():
        parts = line.split(",")
        if len(parts) != 11:
            continue
        features = parts[1:10]  # drop the sample-code column
        label = "benign" if parts[10] == "2" else "malignant"
        lines.append(",".join(features + [label]))
    (DATA_DIR / "diagnostic2.csv").write_text("\n".join(lines) + "\n")


def fetch_mammographic_mass() -> None:
    text = _download(f"{UCI}/mammographic-masses/mammographic_masses.data").decode("utf-8")
    header = ["birads", "age", "shape", "margin", "density", "severity"]
    lines = [",".join(header)]
    for line in text.strip().splitlines():
        parts = line.split(",")
        if len(parts) != 6:
            continue
        label = "benign" if parts[5] == "0" else "malignant"
        lines.append(",".join(parts[:5] + [label]))
    (DATA_DIR / "mammographic_mass.csv").write_text("\n".join(lines) + "\n")


def write_diagnostic1() -> None:
    import numpy as np
    from sklearn.datasets import load_breast_cancer

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from opfbalance import Dataset, write_csv

    raw = load_breast_cancer()
    ds = Dataset(raw.data, (raw.target == 0).astype(int), np.arange(raw.data.shape[0]),
                 feature_names=tuple(n.replace(" ", "_") for n in raw.feature_names),
                 label_name="diagnosis", label_values=("benign", "malignant"))
    write_csv(ds, DATA_DIR / "diagnostic1.csv")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--with-diagnostic1", action="store_true",
                        help="also export the scikit-learn bundled table (no network needed)")
    args = parser.parse_args()

    DATA_DIR.mkdir(exist_ok=True)
    if args.with_diagnostic1:
        write_diagnostic1()
        print(f"wrote {DATA_DIR / 'diagnostic1.csv'}")

    failures = []
    for fetch in (fetch_vertebral_column, fetch_diagnostic2, fetch_mammographic_mass):
        try:
            fetch()
        except Exception as exc:
            failures.append(f"{fetch.__name__}: {exc}")
    if failures:
        print("some downloads failed (network required):", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    print(f"done; files in {DATA_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
