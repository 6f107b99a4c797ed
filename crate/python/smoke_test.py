"""Smoke test for the flatsec_py extension.

Build and install with `maturin build --release` in crates/python followed by
`pip install` of the wheel, or `maturin develop`.
"""

import math

import flatsec_py as fs


def main():
    rows = fs.constants(6)
    assert [round(r["beta_m"], 5) for r in rows][:2] == [0.99220, 0.44342]
    assert round(rows[5]["beta_prime_m"], 5) == 0.01024

    z = fs.ProjectivePoint([1, 0])
    w = fs.ProjectivePoint([1, 1])
    assert abs(z.distance(w) - math.pi / 4) < 1e-12

    model = fs.KernelModel(1, 10)
    assert abs(model.normalized(z, w) - math.cos(math.pi / 4) ** 10) < 1e-12
    assert abs(model.diag * fs.fs_volume(1) - 11) < 1e-10

    coeffs = model.coherent_state([1, 0])
    sup, _ = fs.sup_norm(1, 10, coeffs)
    assert abs(sup - math.sqrt(model.diag)) < 1e-9

    config = {
        "k": [40],
        "a": 1.85,
        "gamma": 1.1,
        "eta": 0.95,
        "delta": 1e-3,
        "layout": {"kind": "icosahedral"},
        "dedup_factor": 0.9,
        "fk_samples": 200,
    }
    manifest = fs.run(config)
    row = manifest["rows"][0]
    assert manifest["outcome"] != "hard", manifest["outcome"]
    assert row["ortho_defect"] < 1e-8
    assert row["max_sup"] <= row["chain_bound"]
    assert fs.compare(manifest, manifest) == {"drifts": [], "permuted": []}

    family = fs.flat_family(40, config)
    assert len(family) == row["n"]
    assert len(family[0]) == len(fs.monomials(1, 40))

    recs = fs.emit_polys(config)
    assert recs[0]["eigen"]["residual"] < 1e-4

    print("flatsec_py %s smoke test ok: k=40 n=%d max sup %.4f" % (fs.__version__, row["n"], row["max_sup"]))


if __name__ == "__main__":
    main()
