#!/usr/bin/env python3
"""Smoke test for the poisson_coh extension module.

Builds nothing itself: it looks for the compiled cdylib under
``target/release`` (preferred) or ``target/debug``, copies it next to a
temporary directory under the import name ``poisson_coh``, and exercises
the main surface.

Run from the repository root:

    cargo build --release -p poisson-coh-py
    python3 python/smoke_test.py
"""

import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib() -> pathlib.Path:
    names = ["libpoisson_coh_py.so", "libpoisson_coh_py.dylib", "poisson_coh_py.dll"]
    for profile in ("release", "debug"):
        for name in names:
            p = ROOT / "target" / profile / name
            if p.exists():
                return p
    sys.exit(
        "compiled module not found; run `cargo build --release -p poisson-coh-py` first"
    )


def import_module():
    src = locate_cdylib()
    tmp = tempfile.mkdtemp(prefix="poisson_coh_py_")
    suffix = ".so" if src.suffix != ".dll" else ".pyd"
    shutil.copy2(src, pathlib.Path(tmp) / f"poisson_coh{suffix}")
    sys.path.insert(0, tmp)
    import poisson_coh

    return poisson_coh


def main() -> None:
    pc = import_module()
    print(f"poisson_coh {pc.__version__} loaded; examples: {pc.examples()}")

    # symplectic plane: brackets, Hamiltonian fields, LP dimensions
    s2 = pc.Structure.example("symplectic2")
    assert s2.bracket("x", "y") == "1"
    assert s2.bracket("x^2", "y") == "2*x"
    assert s2.jacobi_counterexample() is None
    assert s2.hamiltonian_field("x") == ["0", "1"]
    assert s2.hp_dimension(1, 0, extended=False) == 3
    assert s2.derham_dimension(1, 0) == 3
    assert s2.hp_dimension(2, 0) == 0
    assert s2.chain_map_residual_is_zero([0], "x*y")
    hom, inferred = s2.weight_audit()
    assert hom and inferred == 2

    # sl(2)*: the Casimir spans extended HP⁰ in weight 4
    sl2 = pc.Structure.example("sl2star")
    assert sl2.bracket("e", "f") == "h"
    assert sl2.bracket("h", "e*f") == "0"
    assert sl2.hamiltonian_field("h^2 + 4*e*f") == ["0", "0", "0"]
    assert sl2.hp_dimension(0, 4) == 1
    assert sl2.hp_dimension(1, 4) == 0
    assert sl2.hp_dimension(2, 4) == 0

    # the A1 cone: one deformation class, realized in weight -6
    cone = pc.Structure.example("a1cone")
    assert cone.bracket("h", "h") == "0"
    dim, stable = cone.total_hp(2, -6, trunc=6)
    assert (dim, stable) == (1, True)
    assert cone.deformation_classes(-6, trunc=6) == 1
    assert cone.deformation_classes(-4, trunc=6) == 0

    # a Jacobi violation is reported with its triple
    bad = pc.Structure.from_json(
        '{"name":"bad","variables":["x","y","z"],"weights":[1,1,1],'
        '"l":2,"bivector":{"0,1":"1","0,2":"x"}}',
        defer_jacobi=True,
    )
    assert bad.jacobi_counterexample() == ["x", "y", "z"]

    # a deformation that fails (**)
    s4 = pc.Structure.example("symplectic4")
    ok, detail = s4.verify_deformation('{"psi_bivector": {"0,2": "x1"}}', trunc=4)
    assert not ok and "Jacobi compatibility" in detail, detail

    print("smoke test passed")


if __name__ == "__main__":
    main()
