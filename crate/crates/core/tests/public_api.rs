use lgf_core::apps::periodic3d::{lgf3d_periodic, Periodic3DConfig};
use lgf_core::oracles::{oracle_2d_quadrature_table, residual_check, suggested_grid};
use lgf_core::{
    evaluate, select_method, tabulate, LatticeConfig, LatticePoint, LgfError, Method, Request, Tolerance,
};

fn tol(eps: f64) -> Tolerance {
    Tolerance::new(eps).unwrap()
}

#[test]
fn dispatch_paths_agree_with_independent_oracle() {
    for (alpha, c) in [(1.0, 2.0), (0.5, 0.3), (0.7, 0.02)] {
        let cfg = LatticeConfig::from_c(alpha, c).unwrap();
        let eps = 1e-10;
        let table = tabulate(&cfg, tol(eps), 6, 6).unwrap();
        let oracle = oracle_2d_quadrature_table(&cfg, 6, 6, suggested_grid(&cfg, 6, 1e-13)).unwrap();
        for m in 0..=6 {
            for n in 0..=6 {
                let p = LatticePoint::new(n, m);
                let t = table.get(p).unwrap();
                let e = evaluate(&cfg, p, tol(eps)).value;
                let o = oracle[m as usize][n as usize];
                assert!((t - o).abs() <= 2.0 * eps, "{alpha} {c} ({n},{m}) table");
                assert!((e - o).abs() <= 2.0 * eps, "{alpha} {c} ({n},{m}) point");
            }
        }
    }
}

#[test]
fn method_selection_follows_screening_strength() {
    let strong = LatticeConfig::from_c(1.0, 3.0).unwrap();
    let weak = LatticeConfig::from_c(1.0, 0.01).unwrap();
    let point = Request::Point(LatticePoint::new(3, 4));
    assert_eq!(select_method(&strong, tol(1e-10), point).method, Method::Series);
    assert_eq!(select_method(&weak, tol(1e-10), point).method, Method::Quad1D);
    let row = Request::Row { m: 2, len: 100 };
    assert_eq!(select_method(&weak, tol(1e-10), row).method, Method::FftBatch);
}

#[test]
fn tables_satisfy_the_stencil_equation() {
    let cfg = LatticeConfig::from_c(0.4, 0.05).unwrap();
    let table = tabulate(&cfg, tol(1e-11), 40, 30).unwrap();
    let report = residual_check(&table, &cfg).unwrap();
    assert!(report.max_interior_residual < 1e-9);
    assert!(report.origin_residual_minus_one < 1e-9);
}

#[test]
fn queries_are_symmetric_and_swap_invariant() {
    let cfg = LatticeConfig::from_c(0.6, 0.2).unwrap();
    let a = evaluate(&cfg, LatticePoint::new(-5, 3), tol(1e-12)).value;
    let b = evaluate(&cfg, LatticePoint::new(5, -3), tol(1e-12)).value;
    assert_eq!(a, b);
}

#[test]
fn rejects_invalid_inputs() {
    assert!(matches!(LatticeConfig::new(1.5, 1.0), Err(LgfError::InvalidAnisotropy(_))));
    assert!(LatticeConfig::new(1.0, 0.0).is_err());
    assert!(Tolerance::new(1e-16).is_err());
    assert!(Periodic3DConfig::new(1.0, 1.0, 1.0, 3).is_err());
}

#[test]
fn periodic_kernel_is_even_in_every_direction() {
    let cfg3d = Periodic3DConfig::new(0.05, 0.1, 0.2, 8).unwrap();
    let g = |p| lgf3d_periodic(p, &cfg3d, tol(1e-11)).unwrap();
    let base = g((2, 1, 3));
    assert!((g((-2, 1, 3)) - base).abs() < 1e-12);
    assert!((g((2, -1, -3)) - base).abs() < 1e-12);
    assert!((g((2, 1, 3 + 8)) - base).abs() < 1e-12);
}
