"""Shared helpers: a tiny multi-site CSV corpus for the ingest/CLI tests."""

import json

import numpy as np
import pytest

SITE_SCHEMA = [
    {"name": "f0", "kind": "numeric"},
    {"name": "f1", "kind": "numeric"},
    {"name": "grp", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "outcome", "kind": "label", "categories": ["0", "1"],
     "positive": ["1"]},
]


def write_sites(root, n_sites=2, rows=44, seed=11, missing_every=0):
    """Write a schema plus ``n_sites`` CSVs under root.

    Labels split each site exactly in half on a noisy linear score, so both
    classes always have rows/2 members and stratified splits stay legal.
    ``missing_every > 0`` blanks every k-th f0 cell with the "?" token.
    Returns (schema_path, [csv paths]).
    """
    rng = np.random.default_rng(seed)
    schema_path = root / "schema.json"
    schema_path.write_text(json.dumps(SITE_SCHEMA, indent=1))
    paths = []
    for s in range(n_sites):
        f0 = rng.normal(size=rows)
        f1 = rng.normal(size=rows)
        grp = rng.choice(["a", "b", "c"], size=rows)
        score = f0 - 0.6 * f1 + 0.3 * rng.normal(size=rows)
        label = (score > np.median(score)).astype(int)
        path = root / f"site{s}.csv"
        with open(path, "w") as fh:
            fh.write("f0,f1,grp,outcome\n")
            for i in range(rows):
                cell0 = ("?" if missing_every and i % missing_every == 0
                         else f"{f0[i]:.6f}")
                fh.write(f"{cell0},{f1[i]:.6f},{grp[i]},{label[i]}\n")
        paths.append(path)
    return schema_path, paths


@pytest.fixture()
def site_dir(tmp_path):
    return write_sites(tmp_path)
