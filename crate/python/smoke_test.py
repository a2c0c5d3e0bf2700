"""Quick check of the Python bindings.

    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/sigroute-*.whl
    python python/smoke_test.py
"""

import sigroute

SKEWED = '{"pi1": [0, 0, 0, 1], "pi2": [0, 0.9, 0, 0, 0, 0.1]}'


def main():
    pi1 = sigroute.Pmf.point(3)
    pi2 = sigroute.Pmf([0, 0.9, 0, 0, 0, 0.1])
    assert pi2.support == (1, 5)
    assert abs(pi2.mean - 1.4) < 1e-12

    params = sigroute.Params(0.1, 0.5)
    info = sigroute.CommonInfo(pi1, pi2, params)
    assert info.threshold == 3.0
    assert info.decide("ghat", 1, 3)
    assert not info.decide("ghat", 2, 2)
    nxt = info.advance("ghat", False, False)
    assert nxt.t == 1
    lb, ub = nxt.bounds
    assert ub - lb <= info.bounds[1] - info.bounds[0] + 1

    for conv, jh, jt in [("exclusive", 8.48, 8.28), ("independent", 8.26, 8.08)]:
        rh = sigroute.exact_cost("ghat", 0.1, 0.5, 2, init=SKEWED, cost="zero/square", convention=conv)
        rt = sigroute.exact_cost("gtilde", 0.1, 0.5, 2, init=SKEWED, cost="zero/square", convention=conv)
        assert abs(rh["cost"] - jh) < 1e-9 and abs(rt["cost"] - jt) < 1e-9, (conv, rh, rt)

    opt = sigroute.centralized_cost(0.3, 0.5, 3, init="eq:1")
    ghat = sigroute.exact_cost("ghat", 0.3, 0.5, 3, init="eq:1")["cost"]
    assert abs(opt - ghat) < 1e-9

    st = sigroute.steady(0.1, 0.5)
    assert abs(st["j_g0"] - 0.45) < 1e-9 and st["j_ghat"] <= st["j_g0"]

    run = sigroute.simulate(0.3, 0.5, horizon=200, replications=100, seed=1)
    assert run["passed"] and run["replications"] == 100

    rows = sigroute.trace(0.3, 0.5, horizon=20, init=SKEWED)
    assert len(rows) == 20 and {"x1", "x2", "u1", "u2"} <= rows[0].keys()

    rep = sigroute.coupling(0.3, 0.5, horizon=30, replications=500, cost="square", init=SKEWED)
    assert rep["steps_checked"] == 15000

    try:
        sigroute.Params(1.5, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid rate accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
