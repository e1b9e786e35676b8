"""Quick end-to-end check of the Python bindings."""

import json
import math

import lowt


def main():
    table = lowt.GreenTable(3, 0.0, 14)
    g00 = table.origin_value()
    assert abs(g00 - 0.252731009858663) < 1e-12, g00
    assert table.resolvent_residual() < 1e-12
    assert table.get([1, 0, 0]) == table.get([0, 0, -1])
    assert abs(lowt.watson_constant(3) - g00) < 2e-9

    # E[φ0^4] = 3 G(0,0)^2
    assert abs(lowt.gaussian_moment(table, [[0, 0, 0]] * 4) - 3 * g00**2) < 1e-14
    # Cov(∇φ, ∇φ) on the same bond equals 2 (G(0) - G(e))
    bond = ([0, 0, 0], 0)
    want = 2 * (g00 - table.get([1, 0, 0]))
    assert abs(lowt.connected_correlation(table, [[bond], [bond]]) - want) < 1e-14

    for n in (2, 3):
        ex = lowt.Expansion(table, n, 2, radius=12)
        engine = ex.coefficients()
        closed = lowt.closed_form_second_order(table, n, 12)
        for (a, da), (b, db) in zip(engine, closed):
            assert abs(a - b) <= da + db + 1e-14, (a, b)
        assert abs(engine[1][0] + (n - 1) / 2 * g00) < 1e-12

    phi2 = json.dumps([{"site": [0, 0, 0], "component": 1, "power": 2}])
    coeffs = lowt.Expansion(table, 3, 1, radius=6).coefficients(phi2)
    assert coeffs[0][0] == 0.0 and coeffs[1][0] > 0.0

    run = lowt.simulate(3, 3, 4, 0.3, 400, seed=7)
    m = {e["name"]: e for e in run["estimates"]}["m_abs"]
    series = lowt.torus_series(3, 4, 3)
    assert math.isclose(m["value"], series[0] + series[1] * 0.3, abs_tol=0.05), m

    print("python smoke test passed: G(0,0) =", g00, "a =", [round(a, 6) for a, _ in engine])


if __name__ == "__main__":
    main()
