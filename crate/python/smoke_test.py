"""Smoke test for the nnpca extension module.

Build and install first:

    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import json
import math

import nnpca


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    m = nnpca.DiscreteMeasure.two_point(0.3)
    assert close(m.second_moment(), 1.0, 1e-12)
    assert close(m.sparsity(), 0.3, 1e-15)
    assert nnpca.DiscreteMeasure.parse(str(m)).atoms == m.atoms

    # x F(x) + G(x) = sqrt(D(x))
    for x in (0.0, 0.5, 2.0):
        lhs = x * nnpca.eff(m, x) + nnpca.gee(m, x)
        assert close(lhs, math.sqrt(nnpca.dee(m, x)), 1e-12)
    assert close(nnpca.eff_eps_closed(0.3, 0.7), nnpca.eff(m, 0.7), 1e-12)

    t = nnpca.solve_t(m, 1 / math.sqrt(2))
    check = nnpca.eff(m, t)
    assert 0.52 <= check <= 0.54, check

    pred = nnpca.se_sym(nnpca.DiscreteMeasure.two_point(0.1), 1.0, 30)
    assert len(pred["tau_seq"]) == 30
    rec = nnpca.se_rec(nnpca.DiscreteMeasure.two_point(0.1), 1.0, 0.5)
    assert close(rec["s_star"], 0.6023052472798480, 1e-9)

    assert nnpca.worst_eps_sym(0.5)["regime"] == "below_threshold"
    w = nnpca.worst_eps_sym(1.2)
    assert w["regime"] == "above_threshold" and 0 < w["overlap_floor"] < 1

    n = 400
    v0 = nnpca.two_point_signal(n, 0.1)
    inst = nnpca.gen_sym(n, 1.5, v0, 3)
    res = inst.amp(t_max=30)
    assert len(res["trace"]) == 31
    assert all(x >= 0 for x in res["v_hat"])
    assert close(sum(x * x for x in res["v_hat"]), 1.0, 1e-12)
    same = nnpca.amp_sym(inst.matrix(), v0, 30)
    assert same["v_hat"] == res["v_hat"]
    lam, _, _, _ = inst.power_iteration()
    assert lam > 2.0

    u0 = nnpca.uniform_sphere(n, 3)
    r = nnpca.gen_rec(n, 200, 1.2, u0, nnpca.two_point_signal(200, 0.2), 3).amp(t_max=20)
    assert r["trace"][-1]["overlap_u"] is not None

    try:
        nnpca.DiscreteMeasure([(1.0, 0.5)])
    except ValueError:
        pass
    else:
        raise AssertionError("weights not summing to one were accepted")

    out = nnpca.run_experiment("worstcase", {"beta": "0.5,1", "no_timestamp": "true"})
    lines = [json.loads(l) for l in out.splitlines()]
    assert [l["regime"] for l in lines] == ["below_threshold", "above_threshold"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
