//! Discrete-time dynamics `ψ_{n+1} = Uψ_n` on open boxes: position norms,
//! ballistic rates, the telescoping identities and RAGE averages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arc::PhaseArc;
use crate::error::{Error, Result};
use crate::lattice::{conjugate_op, x_norm, Boundary, LatticeBox, LatticeOperator};
use crate::linalg::{self, CMat, CVec, C64, ZERO};
use crate::mourre::{mourre_constant, windowed_norm};
use crate::symbol::{derived_symbols, Symbol};

/// Entries below this modulus do not count toward an operator's band.
pub const BAND_TOL: f64 = 1e-14;

/// Finite-rank observable for RAGE averages.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Orthogonal projector onto the listed sites.
    Sites(Vec<usize>),
    Matrix(CMat),
}

impl Observable {
    /// Projector onto the `width` sites nearest the origin of a line, or the
    /// centered `width^d` block in higher dimension.
    pub fn central(lbox: &LatticeBox, width: usize) -> Self {
        let r = (width as i64 - 1) / 2;
        let sites = (0..lbox.len()).filter(|&i| lbox.coords(i).iter().all(|c| c.abs() <= r)).collect();
        Observable::Sites(sites)
    }

    pub fn norm_of_image(&self, v: &CVec) -> f64 {
        match self {
            Observable::Sites(s) => s.iter().map(|&i| v[i].norm_sqr()).sum::<f64>().sqrt(),
            Observable::Matrix(k) => linalg::matvec(k, v).norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub n: usize,
    pub x_norm: f64,
    pub plain_norm: f64,
    /// `(1/n) Σ_{m<n} ‖K U^m ψ‖`, from `n = 1` on.
    pub rage_partial: Option<f64>,
    /// `‖Φ U^n ψ‖` when a filter is supplied.
    pub arc_weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone)]
pub struct PropagationTrace {
    pub steps: Vec<TraceStep>,
    /// Largest recorded `n`; every recorded state is free of boundary leakage.
    pub wrap_horizon: usize,
    /// `true` when the run stopped because mass entered the collar.
    pub leak_stopped: bool,
    /// Horizon from band arithmetic: support margin over bandwidth.
    pub band_horizon: usize,
    pub bandwidth: usize,
    pub rate_fit: Option<RateFit>,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub n_max: usize,
    pub rage: Option<Observable>,
    pub arc_filter: Option<CMat>,
    /// Largest admissible norm of the state inside the boundary collar.
    pub leak_tol: f64,
}

impl EvolveOptions {
    pub fn new(n_max: usize) -> Self {
        Self { n_max, rage: None, arc_filter: None, leak_tol: 1e-10 }
    }
}

/// Norm of `ψ` on sites closer than `width` to the edge.
pub fn collar_norm(lbox: &LatticeBox, psi: &CVec, width: usize) -> f64 {
    (0..lbox.len())
        .filter(|&i| lbox.edge_distance(i) < width as i64)
        .map(|i| psi[i].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Distance from the support of `ψ` (entries above `tol`) to the edge.
pub fn support_margin(lbox: &LatticeBox, psi: &CVec, tol: f64) -> i64 {
    (0..lbox.len()).filter(|&i| psi[i].norm() > tol).map(|i| lbox.edge_distance(i)).min().unwrap_or(0)
}

/// Band-arithmetic horizon `⌊(margin − bandwidth) / bandwidth⌋`, counting
/// the collar of width `bandwidth` as lost.
pub fn band_horizon(margin: i64, bandwidth: usize) -> usize {
    if bandwidth == 0 {
        return usize::MAX;
    }
    ((margin - bandwidth as i64).max(0) as usize) / bandwidth
}

fn require_open(u: &LatticeOperator) -> Result<()> {
    if u.lbox().boundary() != Boundary::Open {
        return Err(Error::Refused("dynamics runs on open boxes".into()));
    }
    Ok(())
}

pub fn evolve(u: &LatticeOperator, psi0: &CVec, opts: &EvolveOptions) -> Result<PropagationTrace> {
    require_open(u)?;
    let lbox = u.lbox();
    if psi0.len() != lbox.len() {
        return Err(Error::BoxMismatch(format!("vector of length {} on {} sites", psi0.len(), lbox.len())));
    }
    let bw = u.effective_bandwidth(BAND_TOL).max(1);
    let initial_leak = collar_norm(lbox, psi0, bw);
    if initial_leak > opts.leak_tol {
        return Err(Error::Refused(format!("initial state has norm {initial_leak:.3e} in the collar of width {bw}")));
    }
    let band = band_horizon(support_margin(lbox, psi0, 0.0), bw);
    let mut steps = Vec::new();
    let mut psi = psi0.clone();
    let mut rage_sum = 0.0;
    let mut leak_stopped = false;
    for n in 0..=opts.n_max {
        if n > 0 {
            let next = u.apply(&psi);
            if collar_norm(lbox, &next, bw) > opts.leak_tol {
                leak_stopped = true;
                break;
            }
            psi = next;
        }
        let rage_partial = opts.rage.as_ref().map(|k| {
            let avg = if n == 0 { f64::NAN } else { rage_sum / n as f64 };
            rage_sum += k.norm_of_image(&psi);
            avg
        });
        steps.push(TraceStep {
            n,
            x_norm: x_norm(lbox, &psi),
            plain_norm: psi.norm(),
            rage_partial: rage_partial.filter(|x| x.is_finite()),
            arc_weight: opts.arc_filter.as_ref().map(|f| linalg::matvec(f, &psi).norm()),
        });
    }
    let wrap_horizon = steps.last().map_or(0, |s| s.n);
    let mut trace = PropagationTrace { steps, wrap_horizon, leak_stopped, band_horizon: band, bandwidth: bw, rate_fit: None };
    trace.rate_fit = ballistic_rate(&trace).ok();
    Ok(trace)
}

/// Least-squares slope of `‖ψ_n‖_X` against `n` over the last half of the trace.
pub fn ballistic_rate(trace: &PropagationTrace) -> Result<RateFit> {
    let len = trace.steps.len();
    if len < 32 {
        return Err(Error::Domain(format!("trace of {len} steps is shorter than 32")));
    }
    let tail = &trace.steps[len / 2..];
    let m = tail.len() as f64;
    let mx = tail.iter().map(|s| s.n as f64).sum::<f64>() / m;
    let my = tail.iter().map(|s| s.x_norm).sum::<f64>() / m;
    let sxy: f64 = tail.iter().map(|s| (s.n as f64 - mx) * (s.x_norm - my)).sum();
    let sxx: f64 = tail.iter().map(|s| (s.n as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(RateFit { slope, intercept: my - slope * mx, first: tail[0].n, last: tail[tail.len() - 1].n })
}

/// Arc data for the lower rate bound: `Φ(U)` on the same sites.
#[derive(Debug, Clone)]
pub struct ArcPreparation {
    pub arc: PhaseArc,
    pub filter: CMat,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBoundsReport {
    pub measured: f64,
    pub state_norm: f64,
    pub commutator_norm: f64,
    pub upper_bound: f64,
    pub upper_pass: bool,
    /// `(√c·‖Φψ‖, √C·‖Φψ‖)`.
    pub window: Option<(f64, f64)>,
    pub constants: Option<(f64, f64)>,
    pub window_pass: Option<bool>,
    pub slack: f64,
    pub horizon: usize,
}

/// Measured ballistic rate against `√‖[A,U]‖·‖ψ‖` and, with an arc, against `[√c, √C]·‖Φψ‖`.
pub fn rate_bounds_check(
    u: &LatticeOperator,
    f: &Symbol,
    psi0: &CVec,
    arc: Option<&ArcPreparation>,
    n_max: usize,
    slack: f64,
    leak_tol: f64,
) -> Result<RateBoundsReport> {
    require_open(u)?;
    let lbox = u.lbox();
    let ds = derived_symbols(f)?;
    let a = conjugate_op(lbox, &ds.velocity)?;
    let psi = match arc {
        Some(p) => linalg::matvec(&p.filter, psi0),
        None => psi0.clone(),
    };
    let state_norm = psi.norm();
    if state_norm < 1e-12 {
        return Err(Error::Refused("the filtered state has no continuous component".into()));
    }
    let bw = u.effective_bandwidth(BAND_TOL).max(1);
    let margin = 2 * bw.max(a.flags().bandwidth.unwrap_or(0));
    let cols = lbox.interior(margin);
    let uc = linalg::select_columns(u.matrix(), &cols);
    let ac = linalg::select_columns(a.matrix(), &cols);
    let comm = linalg::matmul(a.matrix(), &uc) - linalg::matmul(u.matrix(), &ac);
    let commutator_norm = linalg::spectral_norm(&comm);
    let mut opts = EvolveOptions::new(n_max);
    opts.leak_tol = leak_tol;
    let trace = evolve(u, &psi, &opts)?;
    let measured = ballistic_rate(&trace)?.slope;
    let upper_bound = commutator_norm.sqrt() * state_norm;
    let (window, constants, window_pass) = match arc {
        Some(p) => {
            let (c, cc) = mourre_constant(f, &p.arc, &ds.grad_sq, p.grid)?;
            let w = (c.max(0.0).sqrt() * state_norm, cc.sqrt() * state_norm);
            let ok = measured >= w.0 * (1.0 - slack) && measured <= w.1 * (1.0 + slack);
            (Some(w), Some((c, cc)), Some(ok))
        }
        None => (None, None, None),
    };
    Ok(RateBoundsReport {
        measured,
        state_norm,
        commutator_norm,
        upper_bound,
        upper_pass: measured <= upper_bound * (1.0 + slack),
        window,
        constants,
        window_pass,
        slack,
        horizon: trace.wrap_horizon,
    })
}

struct Propagator<'a> {
    u: &'a LatticeOperator,
    ua: CMat,
    coords: Vec<Vec<f64>>,
}

impl<'a> Propagator<'a> {
    fn new(u: &'a LatticeOperator) -> Self {
        let lbox = u.lbox();
        let coords = (0..lbox.dim()).map(|j| (0..lbox.len()).map(|i| lbox.coords(i)[j] as f64).collect()).collect();
        Self { u, ua: u.matrix().adjoint(), coords }
    }

    fn x(&self, j: usize, v: &CVec) -> CVec {
        CVec::from_fn(v.len(), |i, _| v[i] * self.coords[j][i])
    }

    /// `C_j v = X_j v − U X_j U* v`.
    fn c(&self, j: usize, v: &CVec) -> CVec {
        self.x(j, v) - self.u.apply(&self.x(j, &linalg::matvec(&self.ua, v)))
    }

    fn step(&self, v: &CVec, backward: bool) -> CVec {
        if backward {
            linalg::matvec(&self.ua, v)
        } else {
            self.u.apply(v)
        }
    }

    /// `ψ, U^{±1}ψ, …, U^{±n}ψ`, refusing once mass enters the collar.
    fn orbit(&self, psi: &CVec, n: usize, backward: bool, leak_tol: f64) -> Result<Vec<CVec>> {
        let lbox = self.u.lbox();
        let bw = self.u.effective_bandwidth(BAND_TOL).max(1);
        let mut out = vec![psi.clone()];
        for m in 1..=n {
            let next = self.step(&out[m - 1], backward);
            if collar_norm(lbox, &next, bw) > leak_tol {
                return Err(Error::Horizon { requested: n, horizon: m - 1 });
            }
            out.push(next);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelescopingReport {
    pub forward_lhs: f64,
    pub forward_rhs: f64,
    pub backward_lhs: f64,
    pub backward_rhs: f64,
    pub residual: f64,
}

/// Both telescoping identities for `‖U^{±n}ψ‖_X² − ‖ψ‖_X²`.
pub fn telescoping_check(u: &LatticeOperator, psi0: &CVec, n: usize, leak_tol: f64) -> Result<TelescopingReport> {
    require_open(u)?;
    let p = Propagator::new(u);
    let lbox = u.lbox();
    let d = lbox.dim();
    let base = x_norm(lbox, psi0).powi(2);
    let fwd = p.orbit(psi0, n, false, leak_tol)?;
    let bwd = p.orbit(psi0, n, true, leak_tol)?;
    let terms = |v: &CVec| -> (f64, f64) {
        (0..d).fold((0.0, 0.0), |(cross, sq), j| {
            let cv = p.c(j, v);
            (cross + cv.dotc(&p.x(j, v)).re, sq + cv.norm_squared())
        })
    };
    let mut forward_rhs = 0.0;
    for v in &fwd[1..] {
        let (cross, sq) = terms(v);
        forward_rhs += 2.0 * cross - sq;
    }
    let mut backward_rhs = 0.0;
    for v in &bwd[..n] {
        let (cross, sq) = terms(v);
        backward_rhs += -2.0 * cross + sq;
    }
    let forward_lhs = x_norm(lbox, &fwd[n]).powi(2) - base;
    let backward_lhs = x_norm(lbox, &bwd[n]).powi(2) - base;
    let residual = (forward_lhs - forward_rhs).abs().max((backward_lhs - backward_rhs).abs());
    Ok(TelescopingReport { forward_lhs, forward_rhs, backward_lhs, backward_rhs, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticReport {
    /// Largest `‖[C_j, U] U^m ψ‖` along the orbit.
    pub commutator_defect: f64,
    /// `(n, ‖U^nψ‖_X² − ‖ψ‖_X², n²Σ‖C_jψ‖² + 2nΣRe⟨C_jψ, X_jψ⟩)`.
    pub rows: Vec<(i64, f64, f64)>,
    pub residual: f64,
}

/// The closed quadratic form of `‖U^nψ‖_X²` for `U` commuting with its `C_j`.
pub fn corollary_quadratic_check(u: &LatticeOperator, psi0: &CVec, n_list: &[i64], leak_tol: f64) -> Result<QuadraticReport> {
    require_open(u)?;
    let p = Propagator::new(u);
    let lbox = u.lbox();
    let d = lbox.dim();
    let n_fwd = n_list.iter().filter(|&&n| n > 0).map(|&n| n as usize).max().unwrap_or(0);
    let n_bwd = n_list.iter().filter(|&&n| n < 0).map(|&n| n.unsigned_abs() as usize).max().unwrap_or(0);
    let fwd = p.orbit(psi0, n_fwd, false, leak_tol)?;
    let bwd = p.orbit(psi0, n_bwd, true, leak_tol)?;
    let scale = psi0.norm().max(1e-300);
    let mut defect: f64 = 0.0;
    for v in fwd.iter().chain(bwd.iter().skip(1)) {
        for j in 0..d {
            let w = p.c(j, &u.apply(v)) - u.apply(&p.c(j, v));
            defect = defect.max(w.norm() / scale);
        }
    }
    if defect >= 1e-10 {
        return Err(Error::Refused(format!("[C_j, U] does not vanish on the orbit (norm {defect:.3e})")));
    }
    let (mut c2, mut cx) = (0.0, 0.0);
    for j in 0..d {
        let cv = p.c(j, psi0);
        c2 += cv.norm_squared();
        cx += cv.dotc(&p.x(j, psi0)).re;
    }
    let base = x_norm(lbox, psi0).powi(2);
    let mut rows = Vec::new();
    let mut residual: f64 = 0.0;
    for &n in n_list {
        let v = if n >= 0 { &fwd[n as usize] } else { &bwd[n.unsigned_abs() as usize] };
        let lhs = x_norm(lbox, v).powi(2) - base;
        let nf = n as f64;
        let rhs = nf * nf * c2 + 2.0 * nf * cx;
        residual = residual.max((lhs - rhs).abs());
        rows.push((n, lhs, rhs));
    }
    Ok(QuadraticReport { commutator_defect: defect, rows, residual })
}

/// Brickwork of seeded random 2×2 unitaries on an open line: exactly
/// unitary with bandwidth 2.
pub fn random_banded_unitary(lbox: &LatticeBox, seed: u64) -> Result<LatticeOperator> {
    if lbox.dim() != 1 || lbox.boundary() != Boundary::Open {
        return Err(Error::Refused("random banded unitaries are built on open lines".into()));
    }
    let n = lbox.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |offset: usize| {
        let mut m = CMat::zeros(n, n);
        let mut i = 0;
        if offset == 1 {
            m[(0, 0)] = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            i = 1;
        }
        while i + 1 < n {
            let (th, a, b, c) = (
                rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let (co, si) = (th.cos(), th.sin());
            let g = C64::from_polar(1.0, c);
            m[(i, i)] = C64::from_polar(co, a) * g;
            m[(i, i + 1)] = C64::from_polar(si, b) * g;
            m[(i + 1, i)] = -C64::from_polar(si, -b) * g;
            m[(i + 1, i + 1)] = C64::from_polar(co, -a) * g;
            i += 2;
        }
        if i < n {
            m[(i, i)] = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        }
        m
    };
    let even = layer(0);
    let odd = layer(1);
    let m = linalg::matmul(&odd, &even);
    Ok(LatticeOperator::new(lbox.clone(), m)?.claim_unitary()?.with_bandwidth(2))
}

/// Windowed norm of `[A, U]` on an open box.
pub fn commutator_norm(u: &LatticeOperator, a: &LatticeOperator, margin: usize) -> f64 {
    windowed_norm(&linalg::commutator(a.matrix(), u.matrix()), u.lbox(), margin)
}

/// `e_β` helper that accepts coordinates on the box.
pub fn site_state(lbox: &LatticeBox, coords: &[i64]) -> Result<CVec> {
    lbox.basis(coords)
}

/// A zero vector on the box.
pub fn zero_state(lbox: &LatticeBox) -> CVec {
    CVec::from_element(lbox.len(), ZERO)
}
