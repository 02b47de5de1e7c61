"""Smoke test for the mcca_py extension module.

Build the extension and put it on the path, then run this script:

    cargo build --release -p mcca-python --features extension-module
    cp target/release/libmcca_py.so crates/python/python/mcca_py.so
    python3 crates/python/python/smoke_test.py
"""

import math
import os
import tempfile

import mcca_py


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    # perfectly correlated pair
    x = [[0.3], [-1.2], [2.0], [0.7], [-0.4]]
    y = [[3 * r[0]] for r in x]
    model = mcca_py.Model.fit([x, y])
    assert close(model.rho_analytic[0], 1.0, 1e-12), model.rho_analytic
    assert model.dims == [1, 1]
    assert model.method == "two-step"

    # hand-checked ISC
    assert mcca_py.isc([[1, 2, 3], [1, 3, 2]]) == (2.0, 4.0, 0.5)

    # planted components, both routes
    sets, latents = mcca_py.synth(42, [4, 4, 4], 2000, 2, 10.0)
    assert len(sets) == 3 and len(sets[0]) == 2000 and len(latents[0]) == 2
    two = mcca_py.Model.fit(sets)
    one = mcca_py.Model.fit(sets, method="one-step")
    for a, b in zip(two.eigenvalues, one.eigenvalues):
        assert close(a, b, 1e-7 * abs(a)), (a, b)
    rho = two.rho_analytic
    assert rho[1] - rho[2] > 0.3, rho

    # projections reproduce the stored correlations
    proj = two.transform(sets)
    for n in range(two.n_components):
        _, _, r = mcca_py.isc([[row[n] for row in s] for s in proj])
        assert close(r, two.rho_empirical[n], 1e-9)
    assert two.stationarity_residual(sets, 0) < 1e-8

    # serialization
    again = mcca_py.Model.from_json(two.to_json())
    assert again.eigenvalues == two.eigenvalues
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.json")
        two.save(path)
        assert mcca_py.Model.load(path).projections == two.projections

    values, vectors = mcca_py.sym_eig([[2.0, 1.0], [1.0, 2.0]])
    assert close(values[0], 3.0, 1e-14) and close(values[1], 1.0, 1e-14)
    assert close(abs(vectors[0][0]), 1 / math.sqrt(2), 1e-14)

    # errors surface as ValueError subclasses
    try:
        mcca_py.Model.fit([[[1.0], [1.0], [1.0]], [[1.0], [2.0], [3.0]]])
    except mcca_py.DegenerateError:
        pass
    else:
        raise AssertionError("constant set accepted")
    try:
        mcca_py.synth(1, [2, 2], 10, 3)
    except ValueError as e:
        assert "exceeds" in str(e)
    else:
        raise AssertionError("bad spec accepted")

    print("mcca_py smoke test passed:", two)


if __name__ == "__main__":
    main()
