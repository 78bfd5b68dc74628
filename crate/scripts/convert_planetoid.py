#!/usr/bin/env python3
"""Convert Planetoid citation datasets (ind.<name>.*) to the text formats
the `cola` CLI reads: an edge list (`src dst` per line, 0-indexed), a dense
CSV attribute matrix, both gzipped.

Usage:
    python3 scripts/convert_planetoid.py <raw_dir> <name> <out_dir>

where <raw_dir> contains ind.<name>.{x,y,tx,ty,allx,ally,graph} and
ind.<name>.test.index, e.g. as fetched by scripts/fetch_datasets.sh.
"""

import gzip
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def parse_index_file(path: Path):
    return [int(line.strip()) for line in open(path)]


def load_planetoid(raw_dir: Path, name: str):
    objects = []
    for suffix in ["x", "y", "tx", "ty", "allx", "ally", "graph"]:
        with open(raw_dir / f"ind.{name}.{suffix}", "rb") as f:
            objects.append(pickle.load(f, encoding="latin1"))
    x, y, tx, ty, allx, ally, graph = objects
    test_idx_reorder = parse_index_file(raw_dir / f"ind.{name}.test.index")
    test_idx_range = np.sort(test_idx_reorder)

    if name == "citeseer":
        # Isolated test nodes: pad the test features/labels over the full
        # test index range with zero rows.
        full_range = range(min(test_idx_reorder), max(test_idx_reorder) + 1)
        tx_extended = sp.lil_matrix((len(full_range), x.shape[1]))
        tx_extended[test_idx_range - min(test_idx_range), :] = tx
        tx = tx_extended
        ty_extended = np.zeros((len(full_range), ty.shape[1]))
        ty_extended[test_idx_range - min(test_idx_range), :] = ty
        ty = ty_extended

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx_reorder, :] = features[test_idx_range, :]
    features = np.asarray(features.todense(), dtype=np.float64)

    n = features.shape[0]
    edges = set()
    self_loops = 0
    for u, neighbors in graph.items():
        for v in neighbors:
            if u == v:
                self_loops += 1
                continue
            if u >= n or v >= n:
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            edges.add((min(u, v), max(u, v)))
    return features, sorted(edges), self_loops


def format_value(v: float) -> str:
    if v == 0.0:
        return "0"
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def main():
    if len(sys.argv) != 4:
        print(__doc__, file=sys.stderr)
        sys.exit(2)
    raw_dir, name, out_dir = Path(sys.argv[1]), sys.argv[2], Path(sys.argv[3])
    out_dir.mkdir(parents=True, exist_ok=True)

    features, edges, self_loops = load_planetoid(raw_dir, name)
    n, f = features.shape
    print(f"{name}: n={n} f={f} undirected_edges={len(edges)} self_loop_refs_dropped={self_loops}")

    with gzip.open(out_dir / f"{name}.edges.gz", "wt") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")

    with gzip.open(out_dir / f"{name}.attrs.gz", "wt") as fh:
        for row in features:
            fh.write(",".join(format_value(float(v)) for v in row))
            fh.write("\n")


if __name__ == "__main__":
    main()
