#!/usr/bin/env python3
# Copyright 2026 The pushpull Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds a small MNIST train/test pair in IDX format.

The official MNIST archives are the preferred input for the harness. When
they cannot be downloaded, this script converts the ~10k MNIST digits that
ship inside the `mnist` npm package (cazala/mnist, v1.1.0) into IDX files:

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-subset

Per class, the first TRAIN_PER_CLASS digits go to the train split and the
rest to the test split. Both splits are shuffled with a fixed seed.
"""

import json
import random
import struct
import sys
from pathlib import Path

TRAIN_PER_CLASS = 600
SEED = 20190617


def write_idx(out_dir, prefix, samples):
    images = out_dir / f"{prefix}-images-idx3-ubyte"
    labels = out_dir / f"{prefix}-labels-idx1-ubyte"
    with open(images, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(bytes(pixels))
    with open(labels, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))
    print(f"{prefix}: {len(samples)} images -> {images}")


def main(argv):
    if len(argv) != 3:
        print(__doc__)
        return 2
    digits_dir, out_dir = Path(argv[1]), Path(argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)

    train, test = [], []
    for label in range(10):
        flat = json.loads((digits_dir / f"{label}.json").read_text())["data"]
        count = len(flat) // 784
        for i in range(count):
            # Values are byte/255 rounded to 3 decimals; the inverse is exact.
            pixels = [int(round(v * 255)) for v in flat[i * 784:(i + 1) * 784]]
            (train if i < TRAIN_PER_CLASS else test).append((pixels, label))

    rng = random.Random(SEED)
    rng.shuffle(train)
    rng.shuffle(test)
    write_idx(out_dir, "train", train)
    write_idx(out_dir, "t10k", test)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
