"""Smoke test for the quota_py extension.

Build with `cargo build --release -p apportion-py`, then run this script.
It copies libquota_py.so (from $QUOTA_PY_LIB, else target/release or
target/debug) to a temporary quota_py.so and imports it. An interpreter
that already provides quota_py as a built-in module uses that instead.
"""

import importlib.util
import math
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[3]


def find_library():
    if "QUOTA_PY_LIB" in os.environ:
        return pathlib.Path(os.environ["QUOTA_PY_LIB"])
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libquota_py.so"
        if lib.exists():
            return lib
    sys.exit("libquota_py.so not found; run `cargo build --release -p apportion-py` first")


def load():
    if "quota_py" in sys.builtin_module_names:
        import quota_py

        return quota_py
    lib = find_library()
    dest = pathlib.Path(tempfile.mkdtemp()) / "quota_py.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("quota_py", dest)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    q = load()

    a = q.apportion("mod-jefferson", [1, 100, 1990], 10)
    assert a.seats == [1, 1, 8], a
    r = q.classify_violation("mod-jefferson", [1, 100, 1990], 10)
    assert (r.status, r.states, r.cause) == ("lower", [2], "caused-by-nonzero"), r
    assert q.criteria_test("mod-jefferson", [1990, 1, 100], 10)

    try:
        q.apportion("webster", [1, 3], 2)
    except q.TieError:
        pass
    else:
        raise AssertionError("expected a tie")

    assert abs(q.exact_probability("mod-jefferson", 10).value - 1 / 9) < 1e-15
    assert round(q.exact_probability("adams", 20).value, 3) == 0.385
    assert abs(q.limit_probability("hh").value - (math.log(2) - 0.5)) < 1e-15
    hh5 = q.integral_probability("hh", 5)
    assert abs(hh5.value - 0.131) < 1e-3, hh5

    v = q.violatory_set("mod-jefferson", 10)
    assert abs(1.5 * v.total_length - 1 / 9) < 1e-12
    assert 0.3 in v and 0.0 not in v
    assert q.is_ultimately_violatory("mod-jefferson", 10, 0.3)
    t = q.threshold_set("mod-jefferson", 0.3, 10)
    assert t.ultimately_violatory and t.y_max is None

    assert abs(q.tau_of([1, 2, 5]) - 2 / 15) < 1e-12

    est = q.estimate_violation_prob("hh", 5, sampler="exp-iid", n=20000, seed=42)
    assert est.contains(hh5.value), est
    again = q.estimate_violation_prob("hh", 5, sampler="exp-iid", n=20000, seed=42)
    assert again.p_hat == est.p_hat

    _, scaled, ok = q.tau_uniformity_check("wedge", 20000)
    assert ok, scaled

    print("quota_py smoke test passed:", est)


if __name__ == "__main__":
    main()
