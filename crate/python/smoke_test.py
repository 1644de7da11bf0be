"""Smoke test for the denslift extension module.

Build first with python/build_extension.sh, then run from this directory.
"""

import json

import denslift as dl


def main():
    lam = dl.Operator("L")
    assert str(lam.adjoint()) == "1 - L"

    delta = dl.Operator("a D1 D1 + b D1 + c")
    lifted = dl.second_order_lift(delta, "1/3")
    assert lifted.adjoint() == lifted
    assert lifted.restrict("1/3") == delta

    roundtrip = dl.Operator.from_json(lifted.to_json())
    assert roundtrip == lifted
    assert json.loads(lifted.to_json())["schema"] == "denslift/1"

    third = dl.Operator("a D1 D1 D1")
    dist = dl.distinguished_lift(third, "symbolic", "generic")
    assert dist.adjoint() == -dist

    sym = dl.full_symbol(delta, "1/3")
    assert dl.quantize(sym, 1, "1/3") == delta

    assert dl.schwarzian_cocycle_check(delta, "1/3")
    assert dl.check_adx_variation_identity(dl.Operator("S[1,2] D1 D2 + T[1] D1", dim=2))
    assert len(dl.sdiff_kernel(3)) == 4
    assert dl.divfree_tensor_lift_check(2, 2)
    assert not dl.divfree_tensor_lift_check(2, 2, divergenceless=False)

    try:
        dl.second_order_lift(delta, "1/2")
    except ValueError as e:
        assert "exceptional weight 1/2" in str(e)
    else:
        raise AssertionError("expected an exceptional weight error")

    print("smoke test passed")


if __name__ == "__main__":
    main()
