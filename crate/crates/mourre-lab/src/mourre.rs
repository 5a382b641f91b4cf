//! Commutators, the conjugate-operator identities on interior windows,
//! Mourre constants from symbols and compressed-commutator positivity.

use crate::arc::PhaseArc;
use crate::error::{Error, Result};
use crate::lattice::{check_space, conjugate_op, laurent_op, Boundary, LatticeBox, LatticeOperator};
use crate::linalg::{self, CMat, CVec, C64, I};
use crate::par;
use crate::spectra::{hermitian_eig, jacobi_eig, ArcFilter, JacobiOptions};
use crate::symbol::{derived_symbols, torus_grid, weighted_gradient, Symbol, DEFAULT_TAIL_TOL};

/// `[A, B] = AB − BA`.
pub fn commutator(a: &LatticeOperator, b: &LatticeOperator) -> Result<LatticeOperator> {
    check_space(a.lbox(), b.lbox())?;
    LatticeOperator::new(a.lbox().clone(), linalg::commutator(a.matrix(), b.matrix()))
}

/// `U*AU − A`, with the residual of `U*AU − A = U*[A, U]`.
#[derive(Debug, Clone)]
pub struct Sandwich {
    pub op: LatticeOperator,
    pub commutator_form_residual: f64,
    pub hermitian_defect: f64,
}

pub fn sandwich(u: &LatticeOperator, a: &LatticeOperator) -> Result<Sandwich> {
    check_space(u.lbox(), a.lbox())?;
    if !u.flags().unitary {
        return Err(Error::NotUnitary(linalg::unitary_defect(u.matrix())));
    }
    if !a.flags().hermitian {
        return Err(Error::NotHermitian(linalg::hermitian_defect(a.matrix())));
    }
    let ua = u.matrix().adjoint();
    let au = linalg::matmul(a.matrix(), u.matrix());
    let b = linalg::matmul(&ua, &au) - a.matrix();
    let via = linalg::matmul(&ua, &(au - linalg::matmul(u.matrix(), a.matrix())));
    let commutator_form_residual = linalg::max_abs_diff(&b, &via);
    let hermitian_defect = linalg::hermitian_defect(&b);
    let sym = (&b + b.adjoint()) * C64::new(0.5, 0.0);
    let op = LatticeOperator::new(u.lbox().clone(), sym)?.claim_hermitian()?;
    Ok(Sandwich { op, commutator_form_residual, hermitian_defect })
}

/// Largest `‖Mψ‖` over unit vectors supported at distance `≥ margin` from the edge.
pub fn windowed_norm(m: &CMat, lbox: &LatticeBox, margin: usize) -> f64 {
    let cols = lbox.interior(margin);
    linalg::spectral_norm(&linalg::select_columns(m, &cols))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub residual: f64,
    pub margin: usize,
    pub window_sites: usize,
}

/// `[A_{if∇f̄}, L_f] − L_{f|∇f|²}` on interior vectors.
pub fn identity_check_laurent(f: &Symbol, lbox: &LatticeBox, margin: usize) -> Result<IdentityReport> {
    let ds = derived_symbols(f)?;
    if ds.grad_sq.max_coeff() < 1e-14 {
        return Err(Error::Refused("the identity needs a non-constant symbol".into()));
    }
    let r = f.mul(&ds.grad_sq, DEFAULT_TAIL_TOL);
    identity_residual(f, &ds.velocity, &r, lbox, margin)
}

/// `[A_g, L_f] − L_{−i g·∇f}` on interior vectors, for any real weight family `g`.
pub fn identity_check_weighted(f: &Symbol, g: &[Symbol], lbox: &LatticeBox, margin: usize) -> Result<IdentityReport> {
    if f.is_constant(1e-14) {
        return Err(Error::Refused("the identity needs a non-constant symbol".into()));
    }
    let r = weighted_gradient(f, g).scale(-I);
    identity_residual(f, g, &r, lbox, margin)
}

fn identity_residual(f: &Symbol, g: &[Symbol], r: &Symbol, lbox: &LatticeBox, margin: usize) -> Result<IdentityReport> {
    if lbox.boundary() != Boundary::Open {
        return Err(Error::Refused("identity checks run on open boxes".into()));
    }
    let a = conjugate_op(lbox, g)?;
    let l = laurent_op(lbox, f)?;
    let rop = laurent_op(lbox, r)?;
    let c = linalg::commutator(a.matrix(), l.matrix()) - rop.matrix();
    let window_sites = lbox.interior(margin).len();
    if window_sites == 0 {
        return Err(Error::Domain(format!("margin {margin} leaves an empty window")));
    }
    Ok(IdentityReport { residual: windowed_norm(&c, lbox, margin), margin, window_sites })
}

/// `(min, max)` of `g` over grid points whose phase `arg f(θ)` lies in the closed arc.
pub fn mourre_constant(f: &Symbol, arc: &PhaseArc, g: &Symbol, grid: usize) -> Result<(f64, f64)> {
    if f.dim() != g.dim() {
        return Err(Error::Domain("symbol and weight live on different tori".into()));
    }
    let pts = torus_grid(f.dim(), grid);
    let vals = par::map_indexed(pts.len(), |i| {
        let t = &pts[i];
        arc.contains(linalg::phase(f.eval(t))).then(|| g.eval(t).re)
    });
    let hits: Vec<f64> = vals.into_iter().flatten().collect();
    if hits.is_empty() {
        return Err(Error::Domain(format!("arc {arc} misses Ran f on a grid of {grid}")));
    }
    Ok(hits.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x))))
}

/// `(c♯, C♭)`: best bounds over arcs enlarged by `{2⁻¹, 2⁻², 2⁻³}·width`.
pub fn mourre_constant_sharp(f: &Symbol, arc: &PhaseArc, g: &Symbol, grid: usize) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 1..=3 {
        let delta = arc.width() * 0.5f64.powi(k) / 2.0;
        let (c, cc) = mourre_constant(f, &arc.enlarged(delta), g, grid)?;
        best = (best.0.max(c), best.1.min(cc));
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct MourreOptions {
    /// Eigenvalues of the compression below this level count as deficient.
    pub threshold: f64,
    /// Width of the boundary collar removed by the windowed compression.
    pub collar: usize,
    /// Sites of the perturbation support (used only for localization).
    pub support: Vec<usize>,
    /// Smallest eigenvalue of `ΦWΦ` kept when whitening the windowed compression.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeficientMode {
    pub value: f64,
    /// Mass of the deficient vector inside support ∪ collar.
    pub localized_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MourreReport {
    pub arc: PhaseArc,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Extreme eigenvalues of `Φ(U*AU − A)Φ` relative to `Φ²` on range Φ.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub margin: f64,
    pub rank: usize,
    pub threshold: f64,
    /// Negative eigenvalues of `Φ(U*AU − A − threshold)Φ`.
    pub deficient: Vec<DeficientMode>,
    pub collar: usize,
    /// The same compression after removing the collar.
    pub windowed_min: f64,
    pub windowed_max: f64,
    pub windowed_rank: usize,
}

impl MourreReport {
    pub fn deficient_below(&self, level: f64) -> usize {
        self.deficient.iter().filter(|d| d.value < level).count()
    }
}

/// Compressed commutator `Φ(U)(U*AU − A)Φ(U)` against `(c, C)`.
pub fn mourre_check(
    u: &LatticeOperator,
    a: &LatticeOperator,
    filter: &ArcFilter,
    expected: (f64, f64),
    opts: &MourreOptions,
) -> Result<MourreReport> {
    let r = filter.rank();
    if r == 0 {
        return Err(Error::Refused("arc filter has rank 0".into()));
    }
    let lbox = u.lbox();
    let b = sandwich(u, a)?.op;
    let z = &filter.basis;
    let za = z.adjoint();
    let k = linalg::matmul(&za, &linalg::matmul(b.matrix(), z));
    let jo = JacobiOptions::default();
    let (lam, _) = jacobi_eig(&k, jo)?;

    let phi = &filter.weights;
    let mut d = k.clone();
    for i in 0..r {
        d[(i, i)] -= C64::new(opts.threshold, 0.0);
    }
    let d = CMat::from_fn(r, r, |i, j| d[(i, j)] * (phi[i] * phi[j]));
    let (dv, dvec) = jacobi_eig(&d, jo)?;
    let scale = linalg::max_abs(&d).max(1e-300);
    let collar_sites = lbox.collar(opts.collar);
    let mut marked = vec![false; lbox.len()];
    for &s in opts.support.iter().chain(collar_sites.iter()) {
        marked[s] = true;
    }
    let mut deficient = Vec::new();
    for (i, &val) in dv.iter().enumerate() {
        if val >= -1e-12 * scale {
            break;
        }
        let v = linalg::matvec(z, &dvec.column(i).into_owned());
        let total = v.norm_squared();
        let inside: f64 = v.iter().enumerate().filter(|(s, _)| marked[*s]).map(|(_, x)| x.norm_sqr()).sum();
        deficient.push(DeficientMode { value: val, localized_mass: inside / total });
    }

    // Windowed compression: W removes the collar, then ΦWBWΦ is whitened by ΦWΦ.
    let window: Vec<bool> = (0..lbox.len()).map(|s| lbox.edge_distance(s) >= opts.collar as i64).collect();
    let mut zw = z.clone();
    for (s, &keep) in window.iter().enumerate() {
        if !keep {
            zw.row_mut(s).fill(C64::new(0.0, 0.0));
        }
    }
    for (j, &w) in phi.iter().enumerate().take(r) {
        let mut col = zw.column_mut(j);
        col *= C64::new(w, 0.0);
    }
    let g = linalg::matmul(&zw.adjoint(), &zw);
    let kw = linalg::matmul(&zw.adjoint(), &linalg::matmul(b.matrix(), &zw));
    let (gv, gvec) = jacobi_eig(&g, jo)?;
    let keep: Vec<usize> = (0..r).filter(|&i| gv[i] >= opts.visibility).collect();
    let (windowed_min, windowed_max) = if keep.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let mut s = linalg::select_columns(&gvec, &keep);
        for (c, &i) in keep.iter().enumerate() {
            let mut col = s.column_mut(c);
            col *= C64::new(gv[i].sqrt().recip(), 0.0);
        }
        let m = linalg::matmul(&s.adjoint(), &linalg::matmul(&kw, &s));
        let (wl, _) = jacobi_eig(&m, jo)?;
        (wl[0], wl[wl.len() - 1])
    };
    let (lambda_min, lambda_max) = (lam[0], lam[r - 1]);
    Ok(MourreReport {
        arc: filter.arc,
        c_lower: expected.0,
        c_upper: expected.1,
        lambda_min,
        lambda_max,
        margin: expected.0 - lambda_min,
        rank: r,
        threshold: opts.threshold,
        deficient,
        collar: opts.collar,
        windowed_min,
        windowed_max,
        windowed_rank: keep.len(),
    })
}

/// `|⟨ψ, (U*AU − A)ψ⟩|` for an eigenvector `ψ` of `U` with phase `θ`.
pub fn virial_residual(u: &LatticeOperator, a: &LatticeOperator, psi: &CVec, phase: f64) -> Result<f64> {
    check_space(u.lbox(), a.lbox())?;
    if !u.flags().unitary {
        return Err(Error::NotUnitary(linalg::unitary_defect(u.matrix())));
    }
    let up = u.apply(psi);
    let eig = (&up - psi * C64::from_polar(1.0, phase)).norm();
    if eig >= 1e-8 * psi.norm().max(1.0) {
        return Err(Error::Refused(format!("not an eigenvector: residual {eig:.3e}")));
    }
    let q = up.dotc(&a.apply(&up)) - psi.dotc(&a.apply(psi));
    Ok(q.norm())
}

/// `⟨Bφ, Aψ⟩ + ⟨Aφ, Bψ⟩ − ⟨φ, (U*A²U − A²)ψ⟩ + ⟨Bφ, Bψ⟩` with `B = U*AU − A`.
pub fn qf_identity_residual(u: &LatticeOperator, a: &LatticeOperator, phi: &CVec, psi: &CVec) -> Result<f64> {
    check_space(u.lbox(), a.lbox())?;
    let ua = u.matrix().adjoint();
    let b_of = |v: &CVec| linalg::matvec(&ua, &a.apply(&u.apply(v))) - a.apply(v);
    let a2_of = |v: &CVec| {
        let av = a.apply(&a.apply(&u.apply(v)));
        linalg::matvec(&ua, &av) - a.apply(&a.apply(v))
    };
    let (bphi, bpsi) = (b_of(phi), b_of(psi));
    let lhs = bphi.dotc(&a.apply(psi)) + a.apply(phi).dotc(&bpsi);
    let rhs = phi.dotc(&a2_of(psi)) - bphi.dotc(&bpsi);
    Ok((lhs - rhs).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityRow {
    pub tau: f64,
    pub integrand: f64,
    /// Integrand divided by `τ` (s = 0) or `τ²` (s = 1).
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityTable {
    pub s: u8,
    pub rows: Vec<RegularityRow>,
    pub partial_integral: f64,
}

/// Norms of `e^{iAτ}Be^{−iAτ} − B` (s = 0) or
/// `e^{iAτ}Be^{−iAτ} + e^{−iAτ}Be^{iAτ} − 2B` (s = 1) on a τ grid.
pub fn regularity_probe(b: &LatticeOperator, a: &LatticeOperator, s: u8, taus: &[f64]) -> Result<RegularityTable> {
    check_space(b.lbox(), a.lbox())?;
    if s > 1 {
        return Err(Error::Domain(format!("regularity order must be 0 or 1, got {s}")));
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::Domain(format!("tau {t} is outside (0, 1]")));
    }
    let spec = hermitian_eig(a)?;
    let v = &spec.vectors;
    // Norms are unitarily invariant, so work in A's eigenbasis.
    let bt = linalg::matmul(&v.adjoint(), &linalg::matmul(b.matrix(), v));
    let lam = &spec.values;
    let n = lam.len();
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&i, &j| taus[i].total_cmp(&taus[j]));
    let rows: Vec<RegularityRow> = par::map_indexed(order.len(), |q| {
        let tau = taus[order[q]];
        let m = CMat::from_fn(n, n, |j, k| {
            let d = (lam[j] - lam[k]) * tau;
            let f = if s == 0 { C64::from_polar(1.0, d) - 1.0 } else { C64::new(2.0 * d.cos() - 2.0, 0.0) };
            bt[(j, k)] * f
        });
        let integrand = linalg::spectral_norm(&m);
        let weighted = integrand / if s == 0 { tau } else { tau * tau };
        RegularityRow { tau, integrand, weighted }
    });
    let partial_integral = rows.windows(2).map(|w| 0.5 * (w[1].tau - w[0].tau) * (w[1].weighted + w[0].weighted)).sum();
    Ok(RegularityTable { s, rows, partial_integral })
}

/// `2^{−k}` for `k = 0..=12`.
pub fn default_tau_grid() -> Vec<f64> {
    (0..=12).map(|k| 0.5f64.powi(k)).collect()
}
