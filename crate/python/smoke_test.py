"""Quick check of the Python bindings.

Build and install the extension first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/ppr-*.whl

Then run from the repository root (the `ppr` binary must be built too):

    cargo build --bin ppr
    python python/smoke_test.py
"""

import json
import math
import os
import subprocess
import sys
import tempfile

import ppr

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PPR_BIN = os.environ.get("PPR_BIN", os.path.join(ROOT, "target", "debug", "ppr"))


def check(cond, what):
    if not cond:
        print("FAIL", what)
        sys.exit(1)
    print("ok  ", what)


grid = ppr.config_grid()
check(len(grid) == 430, "grid has 430 configs")

w = ppr.compute_weights([2.0, 4.0, 6.0])
check(abs(sum(w) - 1.0) < 1e-12 and w[0] > w[1] > w[2], "weights favour low error")

names = ppr.feature_names()
fv = ppr.instance_features(1, 1, 2, multiplier=50, seed=3)
check(len(names) == ppr.N_FEATURES == len(fv) == 56, "56 named features")
check(all(math.isfinite(v) for v in fv), "features are finite")
check(fv == ppr.instance_features(1, 1, 2, multiplier=50, seed=3), "features are deterministic")

pts = [[i / 10.0, (i * 7 % 11) / 11.0] for i in range(60)]
lin = ppr.compute_features(pts, [1.0 + x + 2.0 * y for x, y in pts])
check(abs(lin[names.index("ela_meta.lin_simple.adj_r2")] - 1.0) < 1e-8, "linear fit is exact")

try:
    ppr.compute_weights([])
    check(False, "empty weights rejected")
except ValueError:
    check(True, "empty weights rejected")

with tempfile.TemporaryDirectory() as tmp:
    feats = os.path.join(tmp, "features.csv")
    perf = os.path.join(tmp, "performance.csv")
    common = ["--dim", "2", "--problems", "1-4", "--instances", "1-5"]
    subprocess.run([PPR_BIN, "features", *common, "--multiplier", "50", "--out", feats], check=True)
    subprocess.run([PPR_BIN, "performance", *common, "--budgets", "100", "--out", perf], check=True)

    model = ppr.Model.train(feats, perf, "random-search", 100, training_instances=[1, 2, 3, 4])
    check(model.classes == [1, 2, 3, 4], "model covers the trained classes")
    members = model.members(1)
    check(len(members) == 3 and abs(sum(m[2] for m in members) - 1.0) < 1e-12, "three weighted members")

    path = os.path.join(tmp, "model.json")
    model.save(path)
    again = ppr.Model.load(path)
    check(again.to_json() == model.to_json(), "manifest round-trips")

    value, cls = model.predict(fv)
    check(math.isfinite(value) and cls in model.classes, "prediction is finite with a known class")
    check(model.predict_for_class(fv, cls) == value, "known-class path agrees")

    report = json.loads(ppr.evaluate(feats, perf, "random-search", 100, folds=5))
    check(len(report["problems"]) == 4, "evaluation covers every problem")
    check(all(len(cells) == 5 for cells in report["problems"].values()), "five scenarios per problem")

print("python smoke test passed")
