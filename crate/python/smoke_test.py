"""Smoke test for the groverlab Python module."""
import math

import groverlab


def main():
    plan = groverlab.SearchPlan("D4D4M4", 4)
    p = plan.success_probability()
    assert abs(p - 0.908447265625) < 1e-12, p
    assert plan.oracle_count == 2 and plan.num_stages == 1

    hybrid = groverlab.SearchPlan("D3M2|D2M2", 4)
    assert hybrid.num_stages == 2
    assert abs(hybrid.success_for_target("1011") - hybrid.success_probability()) < 1e-12

    sv = groverlab.StateVector.uniform(3)
    sv.flip_sign("101")
    sv.diffuse([0, 1, 2])
    assert abs(sv.probabilities()[0b101] - 0.78125) < 1e-12

    vigo = groverlab.Backend("vigo")
    assert vigo.num_qubits == 5
    depth, cx = groverlab.lower_stage(groverlab.SearchPlan("D3M3", 3), "101", vigo)
    assert depth > 0 and cx > 0

    counts = groverlab.run_shots(groverlab.SearchPlan("D3M3", 3), "101", vigo, shots=2000, seed=1, noiseless=True)
    assert sum(counts.values()) == 2000
    assert abs(counts.get("101", 0) / 2000 - 0.78125) < 0.05

    rec = groverlab.run_plan(groverlab.SearchPlan("D2M2", 3), vigo, trials=3, shots=512, seed=2)
    assert rec["circuit_name"] == "D2M2" and 0.0 < rec["degraded_ratio"] <= 1.2

    xs = [10.0 * i for i in range(12)]
    pts = [(x, 0.8 / (1 + math.exp(0.3 * (x - 30))) + 0.05) for x in xs]
    a, b, c, d, r2 = groverlab.fit_logistic(pts)
    assert r2 > 0.999 and abs(c - 30) < 1e-3

    ranking = groverlab.optimize(3, vigo, max_oracles=1, max_stages=1)
    assert ranking[0][2] <= min(r[2] for r in ranking)
    assert groverlab.expected_depth([10.0, 20.0], 0.5) == 60.0
    assert groverlab.optimal_iterations(4)[0] == 3

    try:
        groverlab.SearchPlan("D4Q4", 4)
    except ValueError as e:
        assert "position" in str(e)
    else:
        raise AssertionError("bad plan accepted")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
