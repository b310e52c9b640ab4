#!/usr/bin/env python3
"""Smoke test for the moatforge_py extension module.

Build the extension first:

    cargo build -p moatforge-py --release

then run this script with any python3. It locates the built cdylib, copies it
next to a temp directory under the importable name, and exercises the main
entry points against known-exact values.
"""

import fractions
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libmoatforge_py.so",
        ROOT / "target" / "debug" / "libmoatforge_py.so",
        ROOT / "target" / "release" / "libmoatforge_py.dylib",
        ROOT / "target" / "debug" / "libmoatforge_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p moatforge-py --release")
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="moatforge_py_"))
    shutil.copy(built, tmp / "moatforge_py.so")
    sys.path.insert(0, str(tmp))
    import moatforge_py

    return moatforge_py


def frac(s):
    return fractions.Fraction(s)


def main():
    mf = load_module()

    # Instance round trip.
    tri = mf.generate("subdiv-triangle")
    assert tri.vertex_count == 6 and tri.edge_count == 6
    assert tri.terminals == [1, 2, 3] and tri.root == 3
    again = mf.parse(tri.render(), format="native")
    assert again.render() == tri.render()
    assert tri.terminal_mst_cost() == "4"

    # Dual growth fixtures.
    run = mf.grow(tri, delta="1")
    assert run["halted"] is False
    assert frac(run["z"]["entries"][0]["value"]) > 0
    total = sum(frac(e["value"]) for e in run["z"]["entries"])
    assert total == 2, total

    gap = mf.generate("gap-gadget")
    run = mf.grow(gap, delta="7/8")
    assert run["halted"] is False
    total = sum(frac(e["value"]) for e in run["z"]["entries"])
    assert total * frac("15/8") == frac("15/2")
    run = mf.grow(gap, delta="9/10")
    assert run["halted"] is True and len(run["captures"]) > 0

    # Oracles.
    opt, tree = mf.dreyfus_wagner(gap)
    assert opt == "8" and len(tree) >= 2
    assert mf.lp_value(gap, relaxation="bcr") == "15/2"
    assert mf.lp_value(mf.generate("cycle", n=6, k=6), relaxation="ucr") == "3"

    # End-to-end solve and the ratio bound.
    bound = frac(mf.ratio_bound("0.00858", "0.0774"))
    assert bound < frac("19988/10000")
    for kwargs in ({"family": "spider", "k": 3, "q": 30}, {"family": "bipartite-fan", "k": 2, "q": 10}):
        inst = mf.generate(**kwargs)
        report = mf.solve(inst)
        assert report["status"] == "OK", report
        assert frac(report["ratio"]) <= frac("19988/10000")

    print("moatforge_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
