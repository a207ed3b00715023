use std::f64::consts::PI;

use emi_core::analytic::presets;
use emi_core::analytic::{ExactFields, MmsFamily, MmsSolution};
use emi_core::cartesian::{build_grid, poisson_unit_cube, BoundaryData, CartesianSolver};
use emi_core::split::{integrate_final, lie_trotter_step, SplitProblem, TimeGrid};

fn exp3() -> MmsSolution {
    MmsSolution::new(presets::exp3_family()).unwrap()
}

#[test]
fn audit_recovers_geometry() {
    let l = presets::exp3_family().geometry;
    let g = build_grid(&l, 0.0625).unwrap();
    let a = g.audit();
    for k in 0..4 {
        // Each cube loses the two faces it shares with neighbours.
        assert!((a.membrane_area[k] - 4.0).abs() < 1e-12);
        assert!((a.cell_volume[k] - 1.0).abs() < 1e-12);
    }
    assert_eq!(a.gap_area.len(), 4);
    assert!(a.gap_area.values().all(|&x| (x - 1.0).abs() < 1e-12));
    let box_volume = 4.75 * 4.75 * 1.75;
    assert!((a.extracellular_volume - (box_volume - 4.0)).abs() < 1e-9);
    let box_area = 2.0 * (4.75 * 4.75 + 2.0 * 4.75 * 1.75);
    assert!((a.boundary_area - box_area).abs() < 1e-9);
}

#[test]
fn poisson_is_second_order() {
    let u = |p: [f64; 3]| (PI * p[0]).sin() * (PI * p[1]).sin() * (PI * p[2]).sin() + p[0];
    let f = |p: [f64; 3]| 3.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin() * (PI * p[2]).sin();
    let err = |n: usize| {
        let (centers, vals) = poisson_unit_cube(n, 1.0, f, u).unwrap();
        let h3 = (1.0 / n as f64).powi(3);
        centers.iter().zip(&vals).map(|(&c, &v)| (v - u(c)).powi(2) * h3).sum::<f64>().sqrt()
    };
    let (e8, e16) = (err(8), err(16));
    let order = (e8 / e16).log2();
    assert!((order - 2.0).abs() < 0.25, "order {order}");
}

#[test]
fn quadratic_poisson_sign_and_order() {
    let u = |p: [f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let err = |n: usize| {
        let (centers, vals) = poisson_unit_cube(n, 1.0, |_| -6.0, u).unwrap();
        centers.iter().zip(&vals).map(|(&c, &v)| (v - u(c)).abs()).fold(0.0, f64::max)
    };
    let (e8, e16) = (err(8), err(16));
    assert!(e16 < 1e-2, "max error {e16}");
    let order = (e8 / e16).log2();
    assert!(order > 1.7, "order {order}");
    // Flipping the source sign must break agreement.
    let (centers, vals) = poisson_unit_cube(16, 1.0, |_| 6.0, u).unwrap();
    let flipped = centers.iter().zip(&vals).map(|(&c, &v)| (v - u(c)).abs()).fold(0.0, f64::max);
    assert!(flipped > 0.1);
}

#[test]
fn assembled_operator_is_symmetric() {
    let mut s = CartesianSolver::new(exp3(), 0.125, BoundaryData::Zero).unwrap();
    let init = s.initial_state(0.0);
    let (a, b) = s.assemble(&init, 0.1, 0.1).unwrap();
    assert_eq!(a.n(), s.grid().n_unknowns());
    assert_eq!(b.len(), a.n());
    assert!(a.is_symmetric(1e-14));
    assert!(a.diagonal().iter().all(|&d| d > 0.0));
}

#[test]
fn boundary_options_coincide_on_exp3() {
    let s = exp3();
    let g = build_grid(s.lattice(), 0.125).unwrap();
    for f in &g.boundary {
        assert!(s.u_app(f.center, 0.3).abs() < 1e-12);
    }
}

#[test]
fn resting_sheet_stays_at_rest() {
    let family = MmsFamily {
        amplitudes: vec![0.0; 4],
        b: 0.0,
        ..presets::exp3_family()
    };
    let mut s = CartesianSolver::new(MmsSolution::new(family).unwrap(), 0.125, BoundaryData::Zero).unwrap();
    let mut state = s.initial_state(0.0);
    lie_trotter_step(&mut s, &mut state, 0.0, 0.1).unwrap();
    assert!(state.u.iter().chain(&state.v).chain(&state.w).all(|x| x.abs() < 1e-14));
}

#[test]
fn one_step_currents_and_jumps_are_consistent() {
    let mut s = CartesianSolver::new(exp3(), 0.125, BoundaryData::Zero).unwrap();
    let mut state = s.initial_state(0.0);
    let before = state.v.clone();
    s.relax(&mut state, 0.0, 0.05);
    let relaxed = state.v.clone();
    s.diffuse(&mut state, 0.0, 0.05).unwrap();
    let c = s.grid().lattice().n_cells();
    assert_eq!(c, 4);
    // C dv = dt I_m with C = 1.
    for ((v, r), j) in state.v.iter().zip(&relaxed).zip(&state.i_m) {
        assert!((v - r - 0.05 * j).abs() < 1e-12);
    }
    assert_ne!(before, state.v);
    let (v_rec, w_rec) = s.reconstructed_jumps(&state);
    for (a, b) in v_rec.iter().zip(&state.v) {
        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
    }
    for (a, b) in w_rec.iter().zip(&state.w) {
        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
    }
    assert!(state.balance <= 1e-9);
}

#[test]
fn coarse_run_converges_in_space() {
    let run = |h: f64, n_f: usize| {
        let mut s = CartesianSolver::new(exp3(), h, BoundaryData::Zero).unwrap();
        let init = s.initial_state(0.0);
        let grid = TimeGrid::new(0.0, 0.2, n_f).unwrap();
        let mut worst: f64 = 0.0;
        let state = integrate_final(&mut s, init, &grid, |_, _, st| worst = worst.max(st.balance)).unwrap();
        assert!(worst <= 1e-9);
        s.errors(&state, 0.2)
    };
    let coarse = run(0.125, 2);
    let fine = run(0.0625, 4);
    for ((name, ec), (_, ef)) in coarse.iter().zip(&fine) {
        assert!(ef < ec, "{name}: {ec} -> {ef}");
    }
}
