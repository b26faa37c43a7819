#!/usr/bin/env python3
"""Build the benchmark CSVs in data/ from raw UCI files shipped inside PyPI wheels.

Usage:
    pip download --no-deps -d wheels kenchi==0.10.0 imbalanced-databases==0.1.1 keel-ds==0.2.5
    python3 scripts/prepare_datasets.py wheels data

Each output CSV has a header, the feature columns in source order, and a
trailing `label` column (1 = outlier). Datasets whose source wheel is missing
are skipped with a message. Annthyroid and the 6870-row Pendigits subsample
have no offline source here; drop CSVs with those names into data/ by hand.
"""

import csv
import glob
import gzip
import os
import sys
import zipfile


def wheel(wheels, prefix):
    found = sorted(glob.glob(os.path.join(wheels, prefix + "*.whl")))
    return zipfile.ZipFile(found[-1]) if found else None


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    n_out = sum(r[-1] for r in rows)
    print(f"{path}: {len(rows)} rows, {len(header) - 1} columns, {n_out} outliers")


def pima(wheels, out):
    z = wheel(wheels, "kenchi")
    if z is None:
        return print("pima: kenchi wheel not found, skipped")
    text = gzip.decompress(z.read("kenchi/datasets/data/pima.csv.gz")).decode()
    lines = [l for l in text.replace("\r", "").split("\n") if l.strip()]
    header = lines[0].split(",")[:-1] + ["label"]
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append(cells[:-1] + [int(cells[-1])])
    write(os.path.join(out, "pima.csv"), header, rows)


def satellite(wheels, out):
    # Statlog landsat, train then test; the three smallest classes
    # (2 cotton crop, 4 damp grey soil, 5 vegetation stubble) are the outliers.
    z = wheel(wheels, "imbalanced_databases")
    if z is None:
        return print("satellite: imbalanced_databases wheel not found, skipped")
    rows = []
    for part in ("sat.trn.txt", "sat.tst.txt"):
        for line in z.read(f"imbalanced_databases/data/satimage/{part}").decode().splitlines():
            cells = line.split()
            if cells:
                rows.append(cells[:-1] + [int(cells[-1] in ("2", "4", "5"))])
    header = [f"x{j}" for j in range(36)] + ["label"]
    write(os.path.join(out, "satellite.csv"), header, rows)


def spambase(wheels, out):
    # KEEL copy of UCI spambase (4597 of the 4601 rows), spam = outlier.
    z = wheel(wheels, "keel_ds")
    if z is None:
        return print("spambase: keel_ds wheel not found, skipped")
    rows = []
    for line in z.read("keel_ds/data/balanced/raw/spambase.dat").decode().splitlines():
        cells = [c.strip() for c in line.split(",")]
        if len(cells) > 1 and not cells[0].startswith("@"):
            rows.append(cells[:-1] + [int(cells[-1] == "1")])
    header = [f"x{j}" for j in range(len(rows[0]) - 1)] + ["label"]
    write(os.path.join(out, "spambase.csv"), header, rows)


def main():
    wheels, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    for build in (pima, satellite, spambase):
        build(wheels, out)


if __name__ == "__main__":
    main()
