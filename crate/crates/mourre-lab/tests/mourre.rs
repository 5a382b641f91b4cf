use std::f64::consts::PI;

use mourre_lab::dynamics::random_banded_unitary;
use mourre_lab::experiment::ggt_conjugate;
use mourre_lab::lattice::{laurent_op, position_op, LatticeOperator};
use mourre_lab::linalg::{self, spectral_norm, CMat, CVec, C64};
use mourre_lab::mourre::{
    default_tau_grid, identity_check_weighted, mourre_constant, qf_identity_residual, regularity_probe, sandwich,
    virial_residual,
};
use mourre_lab::spectra::{arc_filter, jacobi_eig, polar_factor, unitary_eig, JacobiOptions};
use mourre_lab::symbol::{derived_symbols, ggt_symbol, Symbol};
use mourre_lab::{Boundary, LatticeBox, PhaseArc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn ggt_pair(n: usize) -> (LatticeOperator, LatticeOperator) {
    let p = LatticeBox::line(n, Boundary::Periodic).unwrap();
    let u = laurent_op(&p, &ggt_symbol(2.0).unwrap()).unwrap();
    let a = ggt_conjugate(&p.with_boundary(Boundary::Open), 2.0).unwrap();
    (u, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadratic_form_identity_holds(seed in any::<u64>()) {
        let lbox = LatticeBox::line(21, Boundary::Open).unwrap();
        let u = random_banded_unitary(&lbox, seed).unwrap();
        let a = position_op(&lbox, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (phi, psi) = (random_vector(21, &mut rng), random_vector(21, &mut rng));
        prop_assert!(qf_identity_residual(&u, &a, &phi, &psi).unwrap() < 1e-10);
    }

    #[test]
    fn shrinking_the_arc_tightens_the_constants(mid in 2.3f64..3.9, w in 0.2f64..0.8, s in 0.05f64..0.9) {
        let f = ggt_symbol(2.0).unwrap();
        let g = derived_symbols(&f).unwrap().grad_sq;
        let arc = PhaseArc::new(mid - w / 2.0, mid + w / 2.0).unwrap();
        let inner = arc.shrunk(s * w / 2.0).unwrap();
        let (c, cc) = mourre_constant(&f, &arc, &g, 2048).unwrap();
        let (ci, cci) = mourre_constant(&f, &inner, &g, 2048).unwrap();
        prop_assert!(ci >= c && cci <= cc);
    }

    #[test]
    fn weighted_identity_for_real_weights(c0 in 0.1f64..2.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let g = Symbol::from_coeffs(1, [
            (vec![0], C64::new(c0, 0.0)),
            (vec![1], C64::new(c1, c2)),
            (vec![-1], C64::new(c1, -c2)),
        ]).unwrap();
        let lbox = LatticeBox::line(121, Boundary::Open).unwrap();
        let rep = identity_check_weighted(&ggt_symbol(2.0).unwrap(), &[g], &lbox, 40).unwrap();
        prop_assert!(rep.residual < 1e-10, "{}", rep.residual);
    }
}

#[test]
fn sandwich_is_hermitian_and_matches_the_commutator_form() {
    let (u, a) = ggt_pair(61);
    let s = sandwich(&u, &a).unwrap();
    assert!(s.commutator_form_residual < 1e-12);
    assert!(s.hermitian_defect < 1e-10);
    assert!(s.op.flags().hermitian);
}

#[test]
fn sandwich_refuses_non_unitary_input() {
    let lbox = LatticeBox::line(11, Boundary::Open).unwrap();
    let x = position_op(&lbox, 0).unwrap();
    assert!(sandwich(&x, &x).is_err());
}

#[test]
fn unit_weight_identity_is_the_derivative() {
    let lbox = LatticeBox::line(121, Boundary::Open).unwrap();
    let one = Symbol::constant(1, C64::new(1.0, 0.0));
    let rep = identity_check_weighted(&ggt_symbol(3.0).unwrap(), &[one], &lbox, 40).unwrap();
    assert!(rep.residual < 1e-10, "{}", rep.residual);
    assert_eq!(rep.window_sites, 41);
}

#[test]
fn ggt_arc_constant_at_the_midpoint() {
    // |f_2'(π)|² = 4/9 and the phase π has a second preimage at θ = 0 with |f_2'(0)|² = 4.
    let f = ggt_symbol(2.0).unwrap();
    let g = derived_symbols(&f).unwrap().grad_sq;
    let arc = PhaseArc::new(PI - 0.01, PI + 0.01).unwrap();
    let (c, cc) = mourre_constant(&f, &arc, &g, 1 << 14).unwrap();
    assert!((c - 4.0 / 9.0).abs() < 1e-2, "{c}");
    assert!((cc - 4.0).abs() < 1e-2, "{cc}");
}

#[test]
fn virial_vanishes_on_localized_eigenvectors() {
    let lbox = LatticeBox::line(41, Boundary::Open).unwrap();
    let u = random_banded_unitary(&lbox, 7).unwrap();
    let a = position_op(&lbox, 0).unwrap();
    let s = unitary_eig(&u).unwrap();
    for k in 0..s.len() {
        let r = virial_residual(&u, &a, &s.vector(k), s.values[k]).unwrap();
        assert!(r < 1e-8, "{k}: {r}");
    }
    assert!(virial_residual(&u, &a, &lbox.basis(&[0]).unwrap(), 0.0).is_err());
}

#[test]
fn local_perturbation_changes_the_compression_by_few_modes() {
    let n = 127;
    let (u, a) = ggt_pair(n);
    let p = u.lbox().clone();
    let mut m = CMat::identity(n, n);
    let c = p.origin() as i64;
    for (i, j, z) in [(0i64, 0i64, C64::new(0.3, 0.1)), (0, 1, C64::new(-0.2, 0.25)), (1, -1, C64::new(0.1, -0.3))] {
        m[((c + i) as usize, (c + j) as usize)] += z;
    }
    let w = polar_factor(&m).unwrap();
    let v = LatticeOperator::new(p.clone(), linalg::matmul(u.matrix(), &w)).unwrap().claim_unitary().unwrap();
    let arc = PhaseArc::new(PI - 0.3, PI + 0.3).unwrap();
    let compress = |x: &LatticeOperator| {
        let fl = arc_filter(&unitary_eig(x).unwrap(), &arc, 0.29).unwrap();
        let b = sandwich(x, &a).unwrap().op;
        let ph = fl.op.matrix();
        linalg::matmul(ph, &linalg::matmul(b.matrix(), ph))
    };
    let d = compress(&u) - compress(&v);
    let keep = p.with_boundary(Boundary::Open).interior(40);
    let dw = linalg::submatrix(&((&d + d.adjoint()) * C64::new(0.5, 0.0)), &keep, &keep);
    let (vals, _) = jacobi_eig(&dw, JacobiOptions::default()).unwrap();
    let count = vals.iter().filter(|x| x.abs() > 1e-6).count();
    // Three perturbed sites; allow ten modes per site.
    assert!(count > 0 && count <= 30, "{count}");
}

#[test]
fn regularity_integrand_is_lipschitz_in_tau() {
    let (u, a) = ggt_pair(41);
    let b = sandwich(&u, &a).unwrap().op;
    let bound = spectral_norm(&linalg::commutator(a.matrix(), b.matrix()));
    let table = regularity_probe(&b, &a, 0, &default_tau_grid()).unwrap();
    for row in &table.rows {
        assert!(row.integrand <= row.tau * bound * (1.0 + 1e-9), "{row:?}");
    }
    assert!(table.partial_integral.is_finite());
    assert!(regularity_probe(&b, &a, 2, &[0.5]).is_err());
    assert!(regularity_probe(&b, &a, 0, &[0.0]).is_err());
}
