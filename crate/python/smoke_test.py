"""Smoke test for the Python bindings.

Builds the extension with cargo, loads it under the name `cspembed` and
exercises graphs, expanders, embedding, solving and the compiler.

    python3 python/smoke_test.py
"""

import importlib.util
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "cspembed-py"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libcspembed_py.so"
    tmp = pathlib.Path(tempfile.mkdtemp())
    so = tmp / "cspembed.so"
    shutil.copy(lib, so)
    spec = importlib.util.spec_from_file_location("cspembed", so)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    ce = load()

    g = ce.Graph.octahedron()
    assert (g.n, len(g.edges)) == (6, 12)
    assert g.is_connected() and not g.is_bipartite()

    h = ce.bipartite_expander(16, seed=1)
    assert len(h["graph"]["edges"]) == 24
    assert h["certificate"]["lower_bound"] > 0

    emb = ce.embed(ce.Graph.random_regular(12, 3, seed=2), 8, seed=3)
    assert emb["depth"]["depth"] <= emb["depth"]["bound"]

    gamma = ce.CspInstance.coloring(g, 3)
    assert gamma.count() == 6
    sigma = gamma.solve()
    assert gamma.is_satisfied(sigma)

    compiled = ce.Compiled(gamma, 6, seed=0)
    phi = compiled.phi
    assert phi.graph.n == 6 and all(phi.graph.degree(x) == 3 for x in range(6))
    assert phi.count() == 6
    tilde = compiled.encode(sigma)
    assert phi.is_satisfied(tilde)
    assert compiled.decode(tilde) == sigma
    assert compiled.metrics()["host_is_cubic"]

    k5 = ce.CspInstance.coloring(ce.Graph.complete(5), 3)
    assert k5.solve() is None
    assert ce.Compiled(k5, 6).phi.solve() is None

    r = ce.CspInstance.random(5, 0.7, 3, 0.6, seed=9)
    again = ce.CspInstance.from_json(r.to_json())
    assert json.loads(again.to_json()) == json.loads(r.to_json())
    assert ce.Compiled(r, 6, seed=1).phi.count() == r.count()

    try:
        ce.CspInstance.coloring(ce.Graph.cycle(9), 3).count(node_budget=3)
    except RuntimeError:
        pass
    else:
        raise AssertionError("node budget not enforced")

    try:
        ce.Graph(3, [(0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("self-loop accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    sys.exit(main())
