use std::f64::consts::PI;

use mourre_lab::experiment::{default_profile, ggt_conjugate};
use mourre_lab::ggt::build_ggt;
use mourre_lab::linalg::matmul;
use mourre_lab::mourre::mourre_constant;
use mourre_lab::par::{execution, set_execution, Execution};
use mourre_lab::spectra::{lap_probe, radial_ladder, unitary_eig_uncached, UnitaryEigOptions};
use mourre_lab::symbol::{derived_symbols, ggt_symbol};
use mourre_lab::{Boundary, LatticeBox, PhaseArc};

#[test]
fn both_paths_agree_bit_for_bit() {
    let p = LatticeBox::line(63, Boundary::Periodic).unwrap();
    let u = build_ggt(&p, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap();
    let a = ggt_conjugate(&p.with_boundary(Boundary::Open), 2.0).unwrap();
    let f = ggt_symbol(2.0).unwrap();
    let g = derived_symbols(&f).unwrap().grad_sq;
    let arc = PhaseArc::new(2.6, 3.6).unwrap();
    let run = |mode| {
        set_execution(mode);
        let m = matmul(u.matrix(), a.matrix());
        let s = unitary_eig_uncached(&u, UnitaryEigOptions::default()).unwrap();
        let lap: Vec<f64> = lap_probe(&u, &a, &[PI - 0.4], &radial_ladder(4)).unwrap().iter().map(|r| r.norm).collect();
        let c = mourre_constant(&f, &arc, &g, 1024).unwrap();
        (m, s.values.clone(), lap, c)
    };
    let seq = run(Execution::Sequential);
    assert_eq!(execution(), Execution::Sequential);
    let par = run(Execution::Parallel);
    assert_eq!(seq.0, par.0);
    assert_eq!(seq.1, par.1);
    assert_eq!(seq.2, par.2);
    assert_eq!(seq.3, par.3);
}
