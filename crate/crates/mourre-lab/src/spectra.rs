//! Eigensolvers for Hermitian and unitary matrices, arc projectors and
//! filters, essential-arc classification and the weighted-resolvent probe.

use std::sync::Arc;

use crate::arc::PhaseArc;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticeOperator};
use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::par;
use crate::symbol::range_arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Hermitian,
    Unitary,
}

/// Eigenvalues (or eigenphases in `[0, 2π)`) sorted ascending, with
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub kind: SpectrumKind,
    pub lbox: LatticeBox,
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// `max_k ‖M v_k − λ_k v_k‖`.
    pub residual: f64,
    /// `| |⟨v_k, U v_k⟩| − 1 |` in the unitary case.
    pub modulus_defect: Vec<f64>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// `(Σ|v|²)² / Σ|v|⁴`, between 1 (one site) and N (flat).
    pub fn participation_ratio(&self, k: usize) -> f64 {
        participation_ratio(&self.vector(k))
    }

    /// Largest deviation of `V*V` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = linalg::matmul(&self.vectors.adjoint(), &self.vectors);
        linalg::max_abs_diff(&g, &CMat::identity(g.nrows(), g.ncols()))
    }

    /// `V f(Λ) V*` for weights listed per eigenvector.
    pub fn synthesize(&self, weights: &[C64]) -> CMat {
        let mut scaled = self.vectors.clone();
        for (k, w) in weights.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= *w;
        }
        linalg::matmul(&scaled, &self.vectors.adjoint())
    }

    /// Eigenvalues of the unitary case, `e^{iθ_k}`.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.values.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }
}

pub fn participation_ratio(v: &CVec) -> f64 {
    let s2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let s4: f64 = v.iter().map(|z| z.norm_sqr().powi(2)).sum();
    if s4 == 0.0 {
        0.0
    } else {
        s2 * s2 / s4
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions {
    /// Relative off-diagonal Frobenius mass at which sweeps stop.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_sweeps: 60 }
    }
}

fn off_diagonal(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi. Returns ascending eigenvalues and eigenvectors.
pub fn jacobi_eig(m: &CMat, opts: JacobiOptions) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    // Hermitian part; callers verify hermiticity.
    let mut a = CMat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = CMat::identity(n, n);
    let total = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n <= 1 || total == 0.0 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok((vals, v));
    }
    let tiny = f64::EPSILON * 1e-3 * total;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&a);
        if off <= opts.tol * total {
            break;
        }
        if sweeps == opts.max_sweeps {
            return Err(Error::NoConvergence { off: off / total, sweeps });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tiny {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let e = apq / mag;
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s e], [−s ē, c]] on (p, q); A ← G* A G, V ← V G.
                let se = e * s;
                let sec = e.conj() * s;
                {
                    let data = a.as_mut_slice();
                    let (cp, cq) = (p * n, q * n);
                    for k in 0..n {
                        let x = data[cp + k];
                        let y = data[cq + k];
                        data[cp + k] = x * c - y * sec;
                        data[cq + k] = x * se + y * c;
                    }
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = x * c - y * se;
                    a[(q, k)] = x * sec + y * c;
                }
                a[(p, p)] = C64::new(app - t * mag, 0.0);
                a[(q, q)] = C64::new(aqq + t * mag, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                {
                    let data = v.as_mut_slice();
                    let (cp, cq) = (p * n, q * n);
                    for k in 0..n {
                        let x = data[cp + k];
                        let y = data[cq + k];
                        data[cp + k] = x * c - y * sec;
                        data[cq + k] = x * se + y * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| diag[i]).collect();
    let vecs = linalg::select_columns(&v, &order);
    Ok((vals, vecs))
}

fn eigen_residual(m: &CMat, values: &[C64], vectors: &CMat) -> f64 {
    let mv = linalg::matmul(m, vectors);
    (0..values.len())
        .map(|k| (mv.column(k) - vectors.column(k) * values[k]).norm())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian-flagged operator, memoized per operator.
pub fn hermitian_eig(op: &LatticeOperator) -> Result<Arc<SpectralData>> {
    if !op.flags().hermitian {
        return Err(Error::NotHermitian(linalg::hermitian_defect(op.matrix())));
    }
    op.memo().hermitian.get_or_init(|| hermitian_eig_uncached(op, JacobiOptions::default()).map(Arc::new)).clone()
}

pub fn hermitian_eig_uncached(op: &LatticeOperator, opts: JacobiOptions) -> Result<SpectralData> {
    let (values, vectors) = jacobi_eig(op.matrix(), opts)?;
    let lam: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    let residual = eigen_residual(op.matrix(), &lam, &vectors);
    Ok(SpectralData { kind: SpectrumKind::Hermitian, lbox: op.lbox().clone(), values, vectors, residual, modulus_defect: Vec::new() })
}

#[derive(Debug, Clone, Copy)]
pub struct UnitaryEigOptions {
    pub jacobi: JacobiOptions,
    /// Gap below which eigenvalues of `(U + U*)/2` are grouped.
    pub cluster_gap: f64,
}

impl Default for UnitaryEigOptions {
    fn default() -> Self {
        Self { jacobi: JacobiOptions::default(), cluster_gap: 1e-8 }
    }
}

/// Eigendecomposition of a unitary-flagged operator, memoized per operator.
pub fn unitary_eig(op: &LatticeOperator) -> Result<Arc<SpectralData>> {
    if !op.flags().unitary {
        return Err(Error::NotUnitary(linalg::unitary_defect(op.matrix())));
    }
    op.memo().unitary.get_or_init(|| unitary_eig_uncached(op, UnitaryEigOptions::default()).map(Arc::new)).clone()
}

fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > gap {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Joint diagonalization of `H₁ = (U+U*)/2` and `H₂ = (U−U*)/(2i)`:
/// `H₁` first, then `H₂` compressed to each `H₁` cluster, then `H₁` again
/// inside any residual `H₂` cluster.
pub fn unitary_eig_uncached(op: &LatticeOperator, opts: UnitaryEigOptions) -> Result<SpectralData> {
    let u = op.matrix();
    let n = u.nrows();
    let normality = linalg::normality_defect(u);
    if normality > 1e-10 {
        return Err(Error::Refused(format!("normality defect {normality:.3e} exceeds 1e-10")));
    }
    let ua = u.adjoint();
    let h1 = CMat::from_fn(n, n, |i, j| 0.5 * (u[(i, j)] + ua[(i, j)]));
    let h2 = CMat::from_fn(n, n, |i, j| (u[(i, j)] - ua[(i, j)]) * C64::new(0.0, -0.5));
    let (l1, mut v) = jacobi_eig(&h1, opts.jacobi)?;
    for range in clusters(&l1, opts.cluster_gap) {
        if range.len() == 1 {
            continue;
        }
        let cols: Vec<usize> = range.clone().collect();
        let vc = linalg::select_columns(&v, &cols);
        let comp2 = linalg::matmul(&vc.adjoint(), &linalg::matmul(&h2, &vc));
        let (l2, w) = jacobi_eig(&comp2, opts.jacobi)?;
        let mut vc = linalg::matmul(&vc, &w);
        for sub in clusters(&l2, opts.cluster_gap) {
            if sub.len() == 1 {
                continue;
            }
            let sc: Vec<usize> = sub.clone().collect();
            let vs = linalg::select_columns(&vc, &sc);
            let comp1 = linalg::matmul(&vs.adjoint(), &linalg::matmul(&h1, &vs));
            let (_, w1) = jacobi_eig(&comp1, opts.jacobi)?;
            let vs = linalg::matmul(&vs, &w1);
            for (a, &k) in sc.iter().enumerate() {
                vc.set_column(k, &vs.column(a));
            }
        }
        for (a, &k) in cols.iter().enumerate() {
            v.set_column(k, &vc.column(a));
        }
    }
    let uv = linalg::matmul(u, &v);
    let mut items: Vec<(f64, usize, f64)> = (0..n)
        .map(|k| {
            let rq = v.column(k).dotc(&uv.column(k));
            (linalg::phase(rq), k, (rq.norm() - 1.0).abs())
        })
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = items.iter().map(|x| x.1).collect();
    let values: Vec<f64> = items.iter().map(|x| x.0).collect();
    let modulus_defect: Vec<f64> = items.iter().map(|x| x.2).collect();
    let vectors = linalg::select_columns(&v, &order);
    let lam: Vec<C64> = values.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let residual = eigen_residual(u, &lam, &vectors);
    Ok(SpectralData { kind: SpectrumKind::Unitary, lbox: op.lbox().clone(), values, vectors, residual, modulus_defect })
}

/// Unitary polar factor `M (M*M)^{−1/2}` of an invertible matrix.
pub fn polar_factor(m: &CMat) -> Result<CMat> {
    let (vals, v) = jacobi_eig(&linalg::matmul(&m.adjoint(), m), JacobiOptions::default())?;
    if vals[0] <= 1e-14 * vals[vals.len() - 1].max(1e-300) {
        return Err(Error::Singular(format!("polar factor of a matrix with smallest singular value {:.3e}", vals[0].max(0.0).sqrt())));
    }
    let mut w = v.clone();
    for (j, &l) in vals.iter().enumerate() {
        let mut col = w.column_mut(j);
        col *= C64::new(l.sqrt().recip(), 0.0);
    }
    Ok(linalg::matmul(m, &linalg::matmul(&w, &v.adjoint())))
}

/// Sum of eigenprojectors with phase strictly inside the arc.
pub fn arc_projector(s: &SpectralData, arc: &PhaseArc) -> Result<LatticeOperator> {
    let w: Vec<C64> = s.values.iter().map(|&t| if arc.contains_strictly(t) { ONE } else { ZERO }).collect();
    LatticeOperator::new(s.lbox.clone(), s.synthesize(&w))?.claim_hermitian()
}

/// Quintic smoothstep `u³(10 − 15u + 6u²)`, C² on `[0, 1]`.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Bump equal to 1 on the arc shrunk by `smoothing` and 0 outside the arc.
pub fn arc_bump(arc: &PhaseArc, smoothing: f64, phase: f64) -> f64 {
    if arc.is_full() {
        return 1.0;
    }
    if !arc.contains_strictly(phase) {
        return 0.0;
    }
    if smoothing == 0.0 {
        return 1.0;
    }
    let o = arc.offset(phase);
    let w = arc.width();
    smoothstep(o / smoothing) * smoothstep((w - o) / smoothing)
}

/// `Φ(U) = Σ φ(θ_k) P_k`, kept together with the eigenvectors on which φ > 0.
#[derive(Debug, Clone)]
pub struct ArcFilter {
    pub arc: PhaseArc,
    pub smoothing: f64,
    /// Indices into the spectral data with positive weight.
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    /// Columns `v_k` for `k` in `support`.
    pub basis: CMat,
    pub op: LatticeOperator,
}

impl ArcFilter {
    pub fn rank(&self) -> usize {
        self.support.len()
    }

    pub fn apply(&self, psi: &CVec) -> CVec {
        self.op.apply(psi)
    }
}

pub fn arc_filter(s: &SpectralData, arc: &PhaseArc, smoothing: f64) -> Result<ArcFilter> {
    arc_filter_excluding(s, arc, smoothing, &[], 0.0)
}

/// Arc filter whose support avoids every phase within `exclusion` of `excluded`.
pub fn arc_filter_excluding(
    s: &SpectralData,
    arc: &PhaseArc,
    smoothing: f64,
    excluded: &[f64],
    exclusion: f64,
) -> Result<ArcFilter> {
    if !(smoothing >= 0.0) || 2.0 * smoothing >= arc.width() {
        return Err(Error::Domain(format!("smoothing {smoothing} is not below half the arc width {}", arc.width() / 2.0)));
    }
    let mut weights_all: Vec<f64> = s.values.iter().map(|&t| arc_bump(arc, smoothing, t)).collect();
    for (k, &t) in s.values.iter().enumerate() {
        if excluded.iter().any(|&e| linalg::phase_distance(e, t) <= exclusion) {
            weights_all[k] = 0.0;
        }
    }
    let support: Vec<usize> = (0..s.len()).filter(|&k| weights_all[k] > 0.0).collect();
    let weights: Vec<f64> = support.iter().map(|&k| weights_all[k]).collect();
    let w: Vec<C64> = weights_all.iter().map(|&x| C64::new(x, 0.0)).collect();
    let op = LatticeOperator::new(s.lbox.clone(), s.synthesize(&w))?.claim_hermitian()?;
    let basis = linalg::select_columns(&s.vectors, &support);
    Ok(ArcFilter { arc: *arc, smoothing, support, weights, basis, op })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outlier {
    pub index: usize,
    pub phase: f64,
    pub participation_ratio: f64,
    /// Participation ratio below `0.2·N`.
    pub localized: bool,
}

#[derive(Debug, Clone)]
pub struct ArcComparison {
    pub arc: PhaseArc,
    pub inside: usize,
    pub outside: usize,
    pub unclassified: usize,
    pub outliers: Vec<Outlier>,
    /// Largest distance of any classified-inside-or-outside phase from the closed arc.
    pub max_excursion: f64,
}

impl ArcComparison {
    pub fn localized_outliers(&self) -> usize {
        self.outliers.iter().filter(|o| o.localized).count()
    }
}

/// Classifies each eigenphase against `Θ_a`.
pub fn essential_arc_compare(s: &SpectralData, a: f64, endpoint_exclusion: f64) -> Result<ArcComparison> {
    let arc = range_arc(a)?;
    let n = s.len() as f64;
    let mut r = ArcComparison { arc, inside: 0, outside: 0, unclassified: 0, outliers: Vec::new(), max_excursion: 0.0 };
    for (k, &t) in s.values.iter().enumerate() {
        if endpoint_exclusion > 0.0 && arc.endpoint_distance(t) < endpoint_exclusion {
            r.unclassified += 1;
        } else if arc.contains(t) {
            r.inside += 1;
        } else {
            r.outside += 1;
            r.max_excursion = r.max_excursion.max(arc.endpoint_distance(t));
            let pr = s.participation_ratio(k);
            r.outliers.push(Outlier { index: k, phase: t, participation_ratio: pr, localized: pr < 0.2 * n });
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LapRow {
    pub theta: f64,
    pub radius: f64,
    pub norm: f64,
}

/// `1 − 2^{−k}` for `k = 1..=k_max`.
pub fn radial_ladder(k_max: u32) -> Vec<f64> {
    (1..=k_max).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}

/// `⟨A⟩^{−1} = (A² + I)^{−1/2}` from the eigendecomposition of `A`.
pub fn japanese_weight(a: &LatticeOperator) -> Result<CMat> {
    let s = hermitian_eig(a)?;
    let w: Vec<C64> = s.values.iter().map(|&l| C64::new(1.0 / (l * l + 1.0).sqrt(), 0.0)).collect();
    Ok(s.synthesize(&w))
}

/// `‖⟨A⟩^{−1} (1 − zU*)^{−1} ⟨A⟩^{−1}‖` over `z = r e^{iθ}`.
pub fn lap_probe(u: &LatticeOperator, a: &LatticeOperator, thetas: &[f64], radii: &[f64]) -> Result<Vec<LapRow>> {
    crate::lattice::check_space(u.lbox(), a.lbox())?;
    if !u.flags().unitary {
        return Err(Error::NotUnitary(linalg::unitary_defect(u.matrix())));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0 && (**r - 1.0).abs() > 0.0)) {
        return Err(Error::Domain(format!("radius {r} is not admissible")));
    }
    let w = japanese_weight(a)?;
    let ua = u.matrix().adjoint();
    let n = u.len();
    let jobs: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| radii.iter().map(move |&r| (t, r))).collect();
    let results = par::map_indexed(jobs.len(), |j| {
        let (theta, radius) = jobs[j];
        let z = C64::from_polar(radius, theta);
        let m = CMat::identity(n, n) - &ua * z;
        linalg::solve(&m, &w).map(|x| LapRow { theta, radius, norm: linalg::spectral_norm(&linalg::matmul(&w, &x)) })
    });
    results.into_iter().collect()
}

/// Ratio of the last two ladder values of a profile.
pub fn last_ratio(profile: &[LapRow]) -> f64 {
    match profile {
        [.., a, b] => b.norm / a.norm,
        _ => f64::NAN,
    }
}

/// Rows of `table` at phase `theta`, in ladder order.
pub fn profile_at(table: &[LapRow], theta: f64) -> Vec<LapRow> {
    table.iter().filter(|r| r.theta == theta).copied().collect()
}
