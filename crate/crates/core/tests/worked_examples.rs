//! Worked instances of every operation, checked against independent
//! evaluations (explicit formulas, density-matrix simulation, brute-force
//! eigenvalue scans) rather than the code paths under test.

mod common;

use approx::assert_abs_diff_eq;
use common::paper_2d_spec;
use hhl_lab_core::hhl::{self, LinearSystem, Stage};
use hhl_lab_core::resources::{self, StateMeasures};
use hhl_lab_core::tensor::{self, SubsystemDims};
use hhl_lab_core::Error;

const C: f64 = 0.736;

/// β₁ = (b₀ − b₁)/√2, β₂ = (b₀ + b₁)/√2 for the 2x2 example.
fn betas_2d(b0: f64, b1: f64) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [(b0 - b1) * s, (b0 + b1) * s]
}

/// `a_i = β_i² C²/λ_i²`, `b_i = β_i² √(1 − C²/λ_i²) C/λ_i`, summed.
fn rho_r_entries(betas: &[f64], lambdas: &[f64], c: f64) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for (beta, l) in betas.iter().zip(lambdas) {
        let r = c / l;
        a += beta * beta * r * r;
        b += beta * beta * (1.0 - r * r).sqrt() * r;
    }
    (a, b)
}

fn top_eigenvalue(rho: &hhl_lab_core::CMatrix) -> f64 {
    *tensor::hermitian_eigenvalues(rho).unwrap().last().unwrap()
}

#[test]
fn schmidt_spectrum_of_lambda_cut() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let s = tensor::schmidt_squared(psi2.amplitudes(), psi2.dims(), &[hhl::LAMBDA]).unwrap();
    let [b1, b2] = betas_2d(0.6, 0.8);
    assert_abs_diff_eq!(s[0], b2 * b2, epsilon = 1e-12);
    assert_abs_diff_eq!(s[1], b1 * b1, epsilon = 1e-12);
    assert_abs_diff_eq!(s[0], 0.98, epsilon = 1e-12);
    assert_abs_diff_eq!(s[1], 0.02, epsilon = 1e-12);
}

#[test]
fn reduced_states_of_psi2() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let [b1, b2] = betas_2d(0.6, 0.8);

    let rho_l = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::LAMBDA]).unwrap();
    let expected = tensor::real_matrix(&[&[b1 * b1, 0.0], &[0.0, b2 * b2]]);
    assert!((&rho_l - expected).norm() < 1e-12);

    let (a, b) = rho_r_entries(&[b1, b2], &[1.0, 2.0], C);
    let rho_r = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::R]).unwrap();
    let expected = tensor::real_matrix(&[&[1.0 - a, b], &[b, a]]);
    assert!((&rho_r - &expected).norm() < 1e-12);
    assert!((resources::rho_r_closed_form(&spec) - &expected).norm() < 1e-12);
    let frozen = tensor::real_matrix(&[&[0.85645, 0.34530], &[0.34530, 0.14355]]);
    assert!(tensor::max_abs_diff(&rho_r, &frozen) < 1e-5);
}

#[test]
fn purity_of_lambda_marginal() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let rho_l = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::LAMBDA]).unwrap();
    let [b1, b2] = betas_2d(0.6, 0.8);
    let oracle = 1.0 - 2.0 * b1 * b1 * b2 * b2;
    assert_abs_diff_eq!(tensor::purity(&rho_l), oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, 0.9608, epsilon = 1e-12);
}

#[test]
fn partial_transpose_leaves_ur_marginal_invariant() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let rho_ur = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::U, hhl::R]).unwrap();
    let dims = SubsystemDims::new(vec![2, 2]).unwrap();
    let pt = tensor::partial_transpose(&rho_ur, &dims, tensor::Party::Second).unwrap();
    assert!(tensor::max_abs_diff(&pt, &rho_ur) < 1e-12);
    assert_eq!(resources::log_negativity(&rho_ur, &dims).unwrap(), 0.0);
}

#[test]
fn three_dimensional_betas() {
    let b = tensor::real_vector(&[1.0, 0.0, 0.0]);
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-3d").unwrap(), b).unwrap();
    let spec = hhl::spectral_decompose(&sys, 1.0, None).unwrap();
    for (got, want) in spec.lambdas.iter().zip([1.0, 2.0, 3.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
    // β₁ = (b₀+b₁+b₂)/√3, β₂ = (b₁−b₂)/√2, |β₃| = |−2b₀+b₁+b₂|/√6; the sign of
    // β₃ follows the eigenvector phase convention (largest entry positive).
    assert_abs_diff_eq!(spec.betas[0].re, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    assert!(spec.betas[1].norm() < 1e-12);
    assert_abs_diff_eq!(spec.betas[2].norm(), 2.0 / 6f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(spec.betas[2].re, 2.0 / 6f64.sqrt(), epsilon = 1e-12);
    assert!(spec.vectors[2][0].re > 0.0);
}

#[test]
fn success_probability_from_density_matrix_simulation() {
    let spec = paper_2d_spec(0.36, C);
    let psi3 = hhl::build_state(&spec, Stage::Psi3).unwrap();
    // full density matrix, then trace out Λ and U the long way
    let rho = tensor::projector(psi3.amplitudes());
    let rho_r = tensor::partial_trace(&rho, psi3.dims(), &[hhl::R]).unwrap();
    let p1 = rho_r[(1, 1)].re;
    let sol = hhl::solution(&spec);
    assert_abs_diff_eq!(sol.sp, p1, epsilon = 1e-12);
    assert_abs_diff_eq!(p1, 0.14354944, epsilon = 1e-8);
}

#[test]
fn success_probability_three_dimensional() {
    let b = tensor::real_vector(&[1.0, 0.0, 0.0]);
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-3d").unwrap(), b).unwrap();
    let spec = hhl::spectral_decompose(&sys, 1.0, None).unwrap();
    // brute-force Σ β_i² C²/λ_i² with β² = (1/3, 0, 2/3)
    let oracle: f64 = [(1.0 / 3.0, 1.0), (0.0, 2.0), (2.0 / 3.0, 3.0)]
        .iter()
        .map(|(w, l)| w / (l * l))
        .sum();
    assert_abs_diff_eq!(hhl::solution(&spec).sp, oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, 0.407407, epsilon = 1e-6);
}

#[test]
fn eigenvector_rhs_solution() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spec = paper_2d_spec(0.5, C);
    let sol = hhl::solution(&spec);
    assert_abs_diff_eq!(sol.sp, C * C / 4.0, epsilon = 1e-12);
    let b = tensor::real_vector(&[h, h]);
    assert_abs_diff_eq!(sol.x_state.dotc(&b).norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn ggm_of_psi2_against_reduced_spectra() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    // oracle: min over the three single-party marginals of 1 − top eigenvalue
    let oracle = [hhl::LAMBDA, hhl::U, hhl::R]
        .iter()
        .map(|&p| 1.0 - top_eigenvalue(&tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[p]).unwrap()))
        .fold(f64::INFINITY, f64::min);
    let r_cut = 1.0
        - top_eigenvalue(&tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::R]).unwrap());
    assert_abs_diff_eq!(oracle, r_cut, epsilon = 1e-15);
    assert_abs_diff_eq!(resources::ggm(&psi2), oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, 0.0037264931, epsilon = 1e-9);
}

#[test]
fn ggm_vanishes_at_balanced_rhs_and_for_ghz_is_half() {
    let spec = paper_2d_spec(0.5, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    assert!(resources::ggm(&psi2) < 1e-12);
}

#[test]
fn log_negativity_of_lambda_u_marginal() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let rho = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::LAMBDA, hhl::U]).unwrap();
    let dims = SubsystemDims::new(vec![2, 2]).unwrap();
    let numeric = resources::negativity(&rho, &dims).unwrap();
    let closed = resources::negativity_closed_form(&spec).unwrap();
    assert_abs_diff_eq!(numeric, closed, epsilon = 1e-12);
    assert_abs_diff_eq!(closed, 0.1260452048, epsilon = 1e-9);
    assert_abs_diff_eq!(
        resources::log_negativity(&rho, &dims).unwrap(),
        0.3243387386,
        epsilon = 1e-9
    );
}

#[test]
fn negativity_closed_form_three_dimensional() {
    let b = tensor::real_vector(&[1.0, 0.0, 0.0]);
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-3d").unwrap(), b).unwrap();
    let spec = hhl::spectral_decompose(&sys, 1.0, None).unwrap();
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let rho = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::LAMBDA, hhl::U]).unwrap();
    let pt = tensor::partial_transpose(&rho, &SubsystemDims::new(vec![3, 3]).unwrap(), tensor::Party::Second)
        .unwrap();
    let oracle: f64 = tensor::hermitian_eigenvalues(&pt)
        .unwrap()
        .iter()
        .filter(|&&v| v < 0.0)
        .map(|v| -v)
        .sum();
    let closed = resources::negativity_closed_form(&spec).unwrap();
    assert_abs_diff_eq!(closed, oracle, epsilon = 1e-12);
    // only the (1, 3) pair survives: |β₁β₃|(0 + 1/3)
    assert_abs_diff_eq!(closed, (1.0 / 3f64.sqrt()) * (2.0 / 6f64.sqrt()) / 3.0, epsilon = 1e-12);
}

#[test]
fn negativity_closed_form_trivial_and_degenerate() {
    let spec = paper_2d_spec(0.5, C);
    assert!(resources::negativity_closed_form(&spec).unwrap() < 1e-15);

    let b = tensor::real_vector(&[0.6, 0.0, 0.8]);
    let sys = hhl::system_with_spectrum(&[1.0, 1.0, 2.0], b).unwrap();
    let spec = hhl::spectral_decompose(&sys, C, None).unwrap();
    assert!(matches!(
        resources::negativity_closed_form(&spec),
        Err(Error::DegeneracyWarning)
    ));
}

#[test]
fn coherence_of_readout_qubit() {
    let spec = paper_2d_spec(0.36, C);
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    let rho_r = tensor::reduce_state(psi2.amplitudes(), psi2.dims(), &[hhl::R]).unwrap();
    let numeric = resources::l1_coherence(&rho_r);
    let [b1, b2] = betas_2d(0.6, 0.8);
    let (_, b) = rho_r_entries(&[b1, b2], &[1.0, 2.0], C);
    assert_abs_diff_eq!(numeric, 2.0 * b, epsilon = 1e-12);
    assert_abs_diff_eq!(resources::coherence_r_closed_form(&spec), numeric, epsilon = 1e-12);
    assert_abs_diff_eq!(numeric, 0.6905950823, epsilon = 1e-9);

    // b₀² = 1/2: only β₂ = 1 survives
    let half = paper_2d_spec(0.5, C);
    let single = 2.0 * (1.0 - C * C / 4.0).sqrt() * (C / 2.0);
    assert_abs_diff_eq!(resources::coherence_r_closed_form(&half), single, epsilon = 1e-12);
    assert_abs_diff_eq!(single, 0.6843517815, epsilon = 1e-9);
}

#[test]
fn coherence_vanishes_when_rotation_is_complete() {
    // b = u₂ and C = λ₂ is impossible (C ≤ λ_min), so use a one-dimensional
    // system where C = λ.
    let sys = LinearSystem::new(tensor::real_matrix(&[&[3.0]]), tensor::real_vector(&[1.0])).unwrap();
    let spec = hhl::spectral_decompose(&sys, 3.0, None).unwrap();
    assert!(resources::coherence_r_closed_form(&spec).abs() < 1e-15);
    let rho = resources::rho_r_closed_form(&spec);
    assert!((rho - tensor::real_matrix(&[&[0.0, 0.0], &[0.0, 1.0]])).norm() < 1e-15);
}

#[test]
fn rho_r_closed_form_is_a_density_matrix() {
    for b0_sq in [0.0, 0.1, 0.36, 0.5, 0.9, 1.0] {
        let rho = resources::rho_r_closed_form(&paper_2d_spec(b0_sq, C));
        let det = (rho[(0, 0)] * rho[(1, 1)] - rho[(0, 1)] * rho[(1, 0)]).re;
        assert!(det >= -1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn micro_ggm_cases() {
    // 5 = 101 and 7 = 111 share bits 2 and 0
    let b = tensor::real_vector(&[0.6, 0.8]);
    let sys = hhl::system_with_spectrum(&[5.0, 7.0], b.clone()).unwrap();
    let spec = hhl::spectral_decompose(&sys, hhl::CircuitConstant::Auto, None).unwrap();
    assert!(resources::micro_ggm(&spec).unwrap() < 1e-10);
    assert_eq!(resources::common_bits(&spec).unwrap(), vec![(2, 1), (0, 1)]);
    // the coarse Λ:U:R partition still sees genuine tripartite entanglement
    let psi2 = hhl::build_state(&spec, Stage::Psi2).unwrap();
    assert!(resources::ggm(&psi2) > 1e-6);

    // 1 = 01 and 2 = 10 share nothing: scan every bipartition by hand
    let sys = hhl::system_with_spectrum(&[1.0, 2.0], b).unwrap();
    let spec = hhl::spectral_decompose(&sys, C, None).unwrap();
    let (psi, dims) = resources::micro_state(&spec).unwrap();
    assert_eq!(dims.as_slice(), &[2, 2, 2, 2]);
    let mut best = 0.0f64;
    for mask in 1u32..15 {
        let side: Vec<usize> = (0..4).filter(|p| mask & (1 << p) != 0).collect();
        let rho = tensor::reduce_state(&psi, &dims, &side).unwrap();
        best = best.max(top_eigenvalue(&rho));
    }
    let micro = resources::micro_ggm(&spec).unwrap();
    assert_abs_diff_eq!(micro, 1.0 - best, epsilon = 1e-12);
    assert!(micro > 1e-6);
    assert!(resources::common_bits(&spec).unwrap().is_empty());

    let sys = LinearSystem::new(tensor::real_matrix(&[&[2.0]]), tensor::real_vector(&[1.0])).unwrap();
    let spec = hhl::spectral_decompose(&sys, hhl::CircuitConstant::Auto, None).unwrap();
    assert!(resources::micro_ggm(&spec).unwrap() < 1e-12);
}

#[test]
fn micro_ggm_size_guard() {
    let sys = LinearSystem::new(tensor::real_matrix(&[&[1.0]]), tensor::real_vector(&[1.0])).unwrap();
    let spec = hhl::spectral_decompose(&sys, hhl::CircuitConstant::Auto, Some(13)).unwrap();
    assert!(matches!(resources::micro_ggm(&spec), Err(Error::SizeError(_))));
}

#[test]
fn report_stage_one_and_three() {
    let spec = paper_2d_spec(0.36, C);
    let r1 = resources::report(&spec, Stage::Psi1).unwrap();
    assert!(r1.measures.ggm < 1e-12);
    assert!(r1.measures.ln.lambda_u > 0.1);
    let r3 = resources::report(&spec, Stage::Psi3).unwrap();
    assert!(r3.measures.ggm < 1e-12);
    assert!(r3.measures.ln.u_r > 0.01);

    let trivial = resources::report(&paper_2d_spec(0.5, C), Stage::Psi2).unwrap();
    assert!(trivial.trivial);
    let m = trivial.measures;
    assert!(m.ggm < 1e-12);
    for v in m.ln.values() {
        assert!(v < 1e-12, "{v}");
    }
}

#[test]
fn report_scalars_line_up_with_names() {
    let spec = paper_2d_spec(0.36, C);
    let r = resources::report(&spec, Stage::Psi2).unwrap();
    let m: StateMeasures = r.measures;
    assert_eq!(r.get("ggm"), Some(m.ggm));
    assert_eq!(r.get("ln_lambdau"), Some(m.ln.lambda_u));
    assert_eq!(r.get("coherence_r"), Some(m.coherence_r));
    assert_eq!(r.get("kappa"), Some(r.kappa));
    assert_eq!(r.get("nope"), None);
}
