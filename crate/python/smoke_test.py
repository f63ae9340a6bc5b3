"""Smoke test for the compiled `lgf` extension module."""

import math

import lgf


def main() -> None:
    strong = lgf.LatticeConfig(1.0, 4.0)
    ev = strong.evaluate(0, 0, 1e-12)
    assert ev.method == "series", ev
    assert ev.certificate <= 1e-12

    cfg = lgf.LatticeConfig.from_c(0.5, 0.3)
    assert math.isclose(cfg.c2, 0.09)
    table = cfg.tabulate(20, 10, 1e-10)
    assert table.shape == (11, 21)
    assert table.method == "fft_batch"
    # The table, the point evaluator and the plain trapezoid rule agree.
    for n, m in [(0, 0), (3, 7), (20, 10)]:
        point = cfg.evaluate(n, m, 1e-12).value
        assert abs(table.get(n, m) - point) < 2e-10
        assert abs(cfg.trapezoid(n, m, 400) - point) < 1e-12
    assert table.get(-3, -7) == table.get(3, 7)

    # L_c B = delta at the origin.
    rows = table.rows
    origin = cfg.c2 * rows[0][0] + cfg.alpha1 * 2 * (rows[0][0] - rows[0][1]) + 2 * (rows[0][0] - rows[1][0])
    assert abs(origin - 1.0) < 1e-8

    assert cfg.n_quad_points(1e-14) >= cfg.n_opt_scan(1e-14)
    assert lgf.LatticeConfig.from_c(1.0, 0.1).n_quad_points(1e-14) == 369

    walk = lgf.WalkParams.family(0.3)
    rho = walk.return_probability([(0, 0), (1, 0), (2, 1)])
    assert rho[0] == 1.0 and 0 < rho[2] < rho[1] < 1
    est, se = walk.simulate(1, 0, 100_000, seed=1)
    assert abs(est - rho[1]) < 5 * se

    g = lgf.lgf3d(1, 0, 2, (0.05, 0.1, 0.2), 8)
    assert math.isfinite(g)
    slope, levels = lgf.convergence(2.0, [8, 16])
    assert len(levels) == 2 and levels[1][1] < levels[0][1]

    try:
        lgf.LatticeConfig(1.5, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha1 > 1 must be rejected")

    print(f"lgf {lgf.__version__} smoke test passed")


if __name__ == "__main__":
    main()
