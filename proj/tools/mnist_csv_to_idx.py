#!/usr/bin/env python3
# Copyright 2026 The EQV Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts a CSV MNIST dump (784 pixel columns then a label column) to IDX.

The bundled data/ files were produced from the 5000-image MNIST subset that
ships inside the mlxtend wheel (mlxtend/data/data/mnist_5k.csv.gz):

    pip download --no-deps mlxtend -d /tmp/whl
    python3 tools/mnist_csv_to_idx.py --wheel /tmp/whl/mlxtend-*.whl \
        --out data/mnist5k

Outputs <out>-images-idx3-ubyte.gz and <out>-labels-idx1-ubyte.gz.
"""

import argparse
import gzip
import io
import struct
import zipfile

WHEEL_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(args):
    if args.wheel:
        with zipfile.ZipFile(args.wheel) as z:
            raw = z.read(WHEEL_MEMBER)
    else:
        with open(args.csv, "rb") as f:
            raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    for line in io.StringIO(raw.decode("ascii")):
        line = line.strip()
        if line:
            yield [int(v) for v in line.split(",")]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="CSV or CSV.gz file")
    src.add_argument("--wheel", help="mlxtend wheel containing mnist_5k")
    parser.add_argument("--out", required=True, help="output path prefix")
    args = parser.parse_args()

    pixels = bytearray()
    labels = bytearray()
    for row in read_rows(args):
        if len(row) != 785:
            raise SystemExit(f"expected 785 columns, got {len(row)}")
        pixels.extend(row[:784])
        labels.append(row[784])
    count = len(labels)

    # mtime=0 keeps the gzip output byte-stable across runs.
    with gzip.GzipFile(args.out + "-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, count, 28, 28))
        f.write(pixels)
    with gzip.GzipFile(args.out + "-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, count))
        f.write(labels)
    print(f"wrote {count} images")


if __name__ == "__main__":
    main()
