"""Smoke test for the lbexperts extension module.

Build and install first:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import json
import math

import lbexperts


def main():
    # the correction factor hits its endpoints
    assert lbexperts.correction_factor(0.3, 0.0) == 0.0
    assert lbexperts.correction_factor(0.3, 1.0) == 1.0

    eta = lbexperts.tune_eta(2 * 2 * 1000, 2)
    assert abs(eta - math.sqrt(4 * math.log(2) / 4000)) < 1e-15

    beta, q_used = lbexperts.tune_beta(1000.0, 4, 0.05, "hp_i")
    assert abs(beta - math.sqrt(2 / 1000 * math.log(7 / 0.05))) < 1e-12
    assert q_used == 1000.0

    q = json.loads(lbexperts.bound_quantities([0.0, 0.2], [0.1, 0.3], 2))
    assert abs(q["Q"] - 0.46) < 1e-12

    spec = {"kind": "bandit", "num_experts": 3, "horizon": 20,
            "loss_model": {"model": "uniform_iid"}, "seed": 5}
    inst = json.loads(lbexperts.generate_instance(json.dumps(spec)))
    assert inst["num_experts"] == 3

    # with zero bounds the lower-bound learner reproduces Exp3 exactly
    a = lbexperts.Learner("exp3lb", 3, 0.2, seed=1)
    b = lbexperts.Learner("exp3", 3, 0.2, seed=1)
    for t in range(20):
        i, j = a.sample(), b.sample()
        assert i == j
        loss = 0.1 * (t % 4)
        a.observe_lower_bounds(i, loss, [0.0] * 3)
        b.observe_lower_bounds(j, loss, [0.0] * 3)
        assert a.distribution() == b.distribution()

    config = {
        "scenario": {"kind": "bandit", "num_experts": 2, "horizon": 1000,
                     "loss_model": {"model": "uniform_iid"}},
        "learner": {"algorithm": "exp3lb", "eta_preset": "bandit"},
        "replicates": 100,
        "seed": 7,
    }
    out = json.loads(lbexperts.estimate(json.dumps(config)))
    report = out["report"]
    assert abs(report["theoretical_bound"] - 52.66) < 0.01
    assert report["bound_check"]["pass"]
    assert len(out["curve"]) == 1000

    try:
        lbexperts.Learner("exp3lb", 0, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("zero experts accepted")

    print("smoke test ok: mean regret %.3f, bound %.2f"
          % (report["mean_pseudo_regret"], report["theoretical_bound"]))


if __name__ == "__main__":
    main()
