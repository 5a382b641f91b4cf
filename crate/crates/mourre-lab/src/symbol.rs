//! Symbols on the d-torus: finitely supported Fourier coefficients, an
//! optional closed-form evaluator, derivatives and critical sets.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rustfft::FftPlanner;

use crate::arc::PhaseArc;
use crate::error::{Error, Result};
use crate::linalg::{phase, C64, I, ONE, ZERO};

pub type MultiIndex = Vec<i64>;
pub type Evaluator = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

/// Truncation threshold for coefficient tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-15;
/// Bound on the error a truncated tail may induce in derived symbols.
pub const DEFAULT_DERIVED_TOL: f64 = 1e-10;

/// Mass of the coefficients dropped by truncation, with weighted moments
/// `Σ|α|^k |f̂_α|` for bounding the tails of derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tail {
    pub mass: f64,
    pub moment1: f64,
    pub moment2: f64,
}

impl Tail {
    fn add(&mut self, alpha: &[i64], modulus: f64) {
        let r = sup_norm(alpha) as f64;
        self.mass += modulus;
        self.moment1 += r * modulus;
        self.moment2 += r * r * modulus;
    }
}

#[derive(Clone)]
pub struct Symbol {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, C64>,
    evaluator: Option<Evaluator>,
    unimodular: bool,
    tail: Tail,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("dim", &self.dim)
            .field("bandwidth", &self.bandwidth())
            .field("terms", &self.coeffs.len())
            .field("closed_form", &self.evaluator.is_some())
            .field("unimodular", &self.unimodular)
            .field("tail", &self.tail)
            .finish()
    }
}

pub fn sup_norm(alpha: &[i64]) -> usize {
    alpha.iter().map(|a| a.unsigned_abs() as usize).max().unwrap_or(0)
}

impl Symbol {
    /// Symbol from explicit coefficients; exact zeros are discarded.
    pub fn from_coeffs(dim: usize, coeffs: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("symbol dimension must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (alpha, c) in coeffs {
            if alpha.len() != dim {
                return Err(Error::Domain(format!("multi-index {alpha:?} has wrong length for d = {dim}")));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient at {alpha:?}")));
            }
            *map.entry(alpha).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        Ok(Self { dim, coeffs: map, evaluator: None, unimodular: false, tail: Tail::default() })
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::from_coeffs(dim, [(vec![0; dim], c)]).expect("valid constant")
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, ZERO)
    }

    /// `c · e^{iα·θ}`.
    pub fn mode(alpha: MultiIndex, c: C64) -> Self {
        let d = alpha.len();
        Self::from_coeffs(d, [(alpha, c)]).expect("valid mode")
    }

    /// Attaches a closed form after checking it against the trigonometric sum.
    pub fn with_evaluator(mut self, ev: Evaluator, tol: f64) -> Result<Self> {
        let mut worst: f64 = 0.0;
        for theta in self.test_grid() {
            worst = worst.max((ev(&theta) - self.trig_eval(&theta)).norm());
        }
        if worst >= tol {
            return Err(Error::Precision { what: "evaluator vs trigonometric sum".into(), value: worst, tol });
        }
        self.evaluator = Some(ev);
        Ok(self)
    }

    /// Sets the unimodular claim after checking `| |f| − 1 | < 1e−10` on a grid.
    pub fn claim_unimodular(mut self) -> Result<Self> {
        let d = self.unimodular_defect();
        if d >= 1e-10 {
            return Err(Error::Precision { what: "unimodular claim".into(), value: d, tol: 1e-10 });
        }
        self.unimodular = true;
        Ok(self)
    }

    pub fn unimodular_defect(&self) -> f64 {
        self.test_grid().iter().fold(0.0, |m, t| m.max((self.eval(t).norm() - 1.0).abs()))
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.keys().map(|a| sup_norm(a)).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[i64]) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    pub fn has_closed_form(&self) -> bool {
        self.evaluator.is_some()
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// `Σ |f̂_α|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// `Σ |α|^k |f̂_α|`.
    pub fn weighted_l1(&self, k: i32) -> f64 {
        self.coeffs.iter().map(|(a, c)| (sup_norm(a) as f64).powi(k) * c.norm()).sum()
    }

    /// Value at `θ`: the closed form when present, the trigonometric sum otherwise.
    pub fn eval(&self, theta: &[f64]) -> C64 {
        match &self.evaluator {
            Some(ev) => ev(theta),
            None => self.trig_eval(theta),
        }
    }

    /// `Σ f̂_α e^{iθ·α}`.
    pub fn trig_eval(&self, theta: &[f64]) -> C64 {
        debug_assert_eq!(theta.len(), self.dim);
        self.coeffs
            .iter()
            .map(|(alpha, c)| {
                let arg: f64 = alpha.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum();
                c * C64::from_polar(1.0, arg)
            })
            .sum()
    }

    /// Largest coefficient modulus; zero symbol gives 0.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(a, c)| a.iter().all(|&x| x == 0) || c.norm() < tol)
    }

    /// `f̄`, with coefficients `conj(f̂_{−α})`.
    pub fn conj(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(a, c)| (a.iter().map(|x| -x).collect(), c.conj()));
        let mut s = Self::from_coeffs(self.dim, coeffs).expect("valid");
        s.tail = self.tail;
        s.unimodular = self.unimodular;
        if let Some(ev) = &self.evaluator {
            let ev = ev.clone();
            s.evaluator = Some(Arc::new(move |t: &[f64]| ev(t).conj()));
        }
        s
    }

    /// `∂_{θ_j} f`, with coefficients `i α_j f̂_α`.
    pub fn derivative(&self, j: usize) -> Self {
        assert!(j < self.dim, "axis out of range");
        let coeffs = self.coeffs.iter().map(|(a, c)| (a.clone(), I * a[j] as f64 * c));
        let mut s = Self::from_coeffs(self.dim, coeffs).expect("valid");
        s.tail = Tail { mass: self.tail.moment1, moment1: self.tail.moment2, moment2: if self.tail.mass == 0.0 { 0.0 } else { f64::INFINITY } };
        s
    }

    pub fn scale(&self, k: C64) -> Self {
        let coeffs = self.coeffs.iter().map(|(a, c)| (a.clone(), c * k));
        let mut s = Self::from_coeffs(self.dim, coeffs).expect("valid");
        s.tail = Tail { mass: self.tail.mass * k.norm(), moment1: self.tail.moment1 * k.norm(), moment2: self.tail.moment2 * k.norm() };
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let coeffs = self.coeffs.iter().chain(other.coeffs.iter()).map(|(a, c)| (a.clone(), *c));
        let mut s = Self::from_coeffs(self.dim, coeffs).expect("valid");
        s.tail = Tail {
            mass: self.tail.mass + other.tail.mass,
            moment1: self.tail.moment1 + other.tail.moment1,
            moment2: self.tail.moment2 + other.tail.moment2,
        };
        s
    }

    /// Pointwise product by coefficient convolution; products below `drop_tol` are discarded.
    pub fn mul(&self, other: &Self, drop_tol: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let s: MultiIndex = a.iter().zip(b).map(|(p, q)| p + q).collect();
                *acc.entry(s).or_insert(ZERO) += x * y;
            }
        }
        // |α+β|^k ≤ 2^k (|α|^k + |β|^k) bounds the cross terms of truncated tails.
        let (a, b) = (&self.tail, &other.tail);
        let (a1, b1) = (self.weighted_l1(1), other.weighted_l1(1));
        let (a2, b2) = (self.weighted_l1(2), other.weighted_l1(2));
        let (an, bn) = (self.l1_norm(), other.l1_norm());
        let mut tail = Tail {
            mass: a.mass * bn + b.mass * an + a.mass * b.mass,
            moment1: 2.0 * (a.moment1 * bn + a.mass * b1 + b.moment1 * an + b.mass * a1 + a.moment1 * b.mass + a.mass * b.moment1),
            moment2: 4.0 * (a.moment2 * bn + a.mass * b2 + b.moment2 * an + b.mass * a2 + a.moment2 * b.mass + a.mass * b.moment2),
        };
        let mut kept = BTreeMap::new();
        for (a, c) in acc {
            if c.norm() < drop_tol {
                tail.add(&a, c.norm());
            } else {
                kept.insert(a, c);
            }
        }
        let mut s = Self { dim: self.dim, coeffs: kept, evaluator: None, unimodular: false, tail };
        if let (Some(f), Some(g)) = (&self.evaluator, &other.evaluator) {
            let (f, g) = (f.clone(), g.clone());
            s.evaluator = Some(Arc::new(move |t: &[f64]| f(t) * g(t)));
        }
        s
    }

    /// Largest `|Im f|` on the test grid.
    pub fn imaginary_defect(&self) -> f64 {
        self.test_grid().iter().fold(0.0, |m, t| m.max(self.eval(t).im.abs()))
    }

    /// Points `2πk/G` per axis, with `G` scaled to the bandwidth.
    pub fn test_grid(&self) -> Vec<Vec<f64>> {
        let cap = match self.dim {
            1 => 1024,
            2 => 64,
            _ => 16,
        };
        let g = (4 * self.bandwidth() + 8).clamp(16, cap);
        torus_grid(self.dim, g)
    }

    /// Structured-text record with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("symbol\n");
        out.push_str(&format!("dim {}\n", self.dim));
        out.push_str(&format!("bandwidth {}\n", self.bandwidth()));
        out.push_str(&format!("unimodular {}\n", u8::from(self.unimodular)));
        out.push_str(&format!("tail_mass {:.16e}\n", self.tail.mass));
        for (a, c) in &self.coeffs {
            out.push_str("coeff");
            for x in a {
                out.push_str(&format!(" {x}"));
            }
            out.push_str(&format!(" {:.16e} {:.16e}\n", c.re, c.im));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut declared_bw = None;
        let mut unimodular = false;
        let mut tail = Tail::default();
        let mut coeffs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() || body == "symbol" {
                continue;
            }
            let mut it = body.split_whitespace();
            let key = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let perr = |msg: &str| Error::Parse { line, msg: msg.to_string() };
            match key {
                "dim" => dim = Some(parse_one::<usize>(&rest, line)?),
                "bandwidth" => declared_bw = Some(parse_one::<usize>(&rest, line)?),
                "unimodular" => unimodular = parse_one::<u8>(&rest, line)? == 1,
                "tail_mass" => tail.mass = parse_one::<f64>(&rest, line)?,
                "coeff" => {
                    let d = dim.ok_or_else(|| perr("coeff before dim"))?;
                    if rest.len() != d + 2 {
                        return Err(perr(&format!("expected {} fields after 'coeff'", d + 2)));
                    }
                    let alpha = rest[..d]
                        .iter()
                        .map(|s| s.parse::<i64>().map_err(|_| perr(&format!("bad index '{s}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    let re = rest[d].parse::<f64>().map_err(|_| perr("bad real part"))?;
                    let im = rest[d + 1].parse::<f64>().map_err(|_| perr("bad imaginary part"))?;
                    coeffs.push((alpha, C64::new(re, im)));
                }
                other => return Err(perr(&format!("unknown record '{other}'"))),
            }
        }
        let dim = dim.ok_or(Error::Parse { line: 0, msg: "missing dim".into() })?;
        let mut s = Self::from_coeffs(dim, coeffs)?;
        if let Some(bw) = declared_bw {
            if s.bandwidth() > bw {
                return Err(Error::Parse { line: 0, msg: format!("coefficients exceed declared bandwidth {bw}") });
            }
        }
        s.tail = tail;
        if unimodular {
            s = s.claim_unimodular()?;
        }
        Ok(s)
    }
}

fn parse_one<T: std::str::FromStr>(rest: &[&str], line: usize) -> Result<T> {
    match rest {
        [v] => v.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("cannot parse '{v}'") }),
        _ => Err(Error::Parse { line, msg: "expected exactly one value".into() }),
    }
}

/// All points of the uniform `g^d` grid on the torus, axis 0 slowest.
pub fn torus_grid(d: usize, g: usize) -> Vec<Vec<f64>> {
    let total = g.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut t = vec![0.0; d];
            for j in (0..d).rev() {
                t[j] = TAU * (idx % g) as f64 / g as f64;
                idx /= g;
            }
            t
        })
        .collect()
}

/// Fourier coefficients by the trapezoidal rule on a `grid^d` lattice.
pub fn fourier_coeffs(
    evaluator: &dyn Fn(&[f64]) -> C64,
    d: usize,
    grid: usize,
    bandwidth: usize,
    tail_tol: f64,
) -> Result<Symbol> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if grid < 4 * bandwidth || grid == 0 {
        return Err(Error::Domain(format!("grid {grid} is below 4 x bandwidth {bandwidth}")));
    }
    let total = grid.pow(d as u32);
    let mut data = Vec::with_capacity(total);
    for theta in torus_grid(d, grid) {
        let v = evaluator(&theta);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Domain(format!("evaluator is unbounded at {theta:?}")));
        }
        data.push(v);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(grid);
    // Axis j has stride grid^(d-1-j).
    for j in 0..d {
        let stride = grid.pow((d - 1 - j) as u32);
        let mut line = vec![ZERO; grid];
        for start in 0..total {
            if !(start / stride).is_multiple_of(grid) {
                continue;
            }
            for k in 0..grid {
                line[k] = data[start + k * stride];
            }
            fft.process(&mut line);
            for k in 0..grid {
                data[start + k * stride] = line[k];
            }
        }
    }
    let norm = total as f64;
    let b = bandwidth as i64;
    let mut kept = Vec::new();
    let mut tail = Tail::default();
    let mut edge: f64 = 0.0;
    let side = (2 * bandwidth + 1).pow(d as u32);
    for idx in 0..side {
        let mut rem = idx;
        let mut alpha = vec![0i64; d];
        let mut flat = 0usize;
        for j in (0..d).rev() {
            alpha[j] = (rem % (2 * bandwidth + 1)) as i64 - b;
            rem /= 2 * bandwidth + 1;
        }
        for &a in &alpha {
            flat = flat * grid + a.rem_euclid(grid as i64) as usize;
        }
        let c = data[flat] / norm;
        let m = c.norm();
        if m < tail_tol {
            tail.add(&alpha, m);
        } else {
            if bandwidth > 0 && sup_norm(&alpha) == bandwidth {
                edge = edge.max(m);
            }
            kept.push((alpha, c));
        }
    }
    if edge > 0.0 {
        return Err(Error::Aliasing { bandwidth, modulus: edge });
    }
    Ok(Symbol::from_coeffs(d, kept)?.with_tail(tail))
}

/// Closed form `f_a(θ) = −(e^{−iθ} − a)/(e^{iθ} − a)`.
pub fn ggt_value(a: f64, theta: f64) -> C64 {
    let num = C64::from_polar(1.0, -theta) - a;
    let den = C64::from_polar(1.0, theta) - a;
    -num / den
}

pub fn ggt_symbol(a: f64) -> Result<Symbol> {
    ggt_symbol_with_tol(a, DEFAULT_TAIL_TOL)
}

/// The canonical GGT symbol `f_a` with coefficients `f̂_{−1} = 1/a` and
/// `f̂_l = −(1 − a^{−2}) a^{−l}` for `l ≥ 0`, truncated below `tail_tol`.
pub fn ggt_symbol_with_tol(a: f64, tail_tol: f64) -> Result<Symbol> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("GGT symbol needs a > 1, got {a}")));
    }
    let w = 1.0 - a.powi(-2);
    let mut coeffs = vec![(vec![-1i64], C64::new(1.0 / a, 0.0))];
    let mut tail = Tail::default();
    let mut l = 0i64;
    loop {
        let c = w * a.powi(-(l as i32));
        if c < tail_tol {
            if c < 1e-300 {
                break;
            }
            tail.add(&[l], c);
        } else {
            coeffs.push((vec![l], C64::new(-c, 0.0)));
        }
        l += 1;
    }
    let ev: Evaluator = Arc::new(move |t: &[f64]| ggt_value(a, t[0]));
    Symbol::from_coeffs(1, coeffs)?.with_tail(tail).with_evaluator(ev, 1e-10)?.claim_unimodular()
}

/// Endpoints `arg f_a(∓θ_a)` of the essential arc, `θ_a = cos⁻¹(1/a)`.
pub fn range_arc(a: f64) -> Result<PhaseArc> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("range arc needs a > 1, got {a}")));
    }
    let ta = (1.0 / a).acos();
    PhaseArc::new(phase(ggt_value(a, -ta)), phase(ggt_value(a, ta)))
}

/// Symbols derived from `f` for the commutator calculus.
#[derive(Debug, Clone)]
pub struct DerivedSymbols {
    /// `∂_j f`.
    pub partials: Vec<Symbol>,
    /// `i f ∂_j f̄`, real when `|f| = 1`.
    pub velocity: Vec<Symbol>,
    /// `|∇f|² = Σ_j |∂_j f|²`.
    pub grad_sq: Symbol,
    /// Worst imaginary part of the velocity symbols on the test grid.
    pub imaginary_defect: f64,
}

pub fn derived_symbols(f: &Symbol) -> Result<DerivedSymbols> {
    derived_symbols_with_tol(f, DEFAULT_DERIVED_TOL)
}

pub fn derived_symbols_with_tol(f: &Symbol, tail_tol: f64) -> Result<DerivedSymbols> {
    let d = f.dim();
    let partials: Vec<Symbol> = (0..d).map(|j| f.derivative(j)).collect();
    let l1 = f.l1_norm();
    let dl1: f64 = partials.iter().map(|p| p.l1_norm()).sum();
    let induced = f.tail().moment1 * (l1 + dl1) + f.tail().mass * dl1;
    if induced > tail_tol {
        return Err(Error::Precision { what: "differentiated coefficient tail".into(), value: induced, tol: tail_tol });
    }
    let drop = DEFAULT_TAIL_TOL;
    let fbar = f.conj();
    let mut velocity = Vec::with_capacity(d);
    let mut grad_sq = Symbol::zero(d);
    for (j, p) in partials.iter().enumerate() {
        velocity.push(f.mul(&fbar.derivative(j), drop).scale(I));
        grad_sq = grad_sq.add(&p.mul(&p.conj(), drop));
    }
    let imaginary_defect = velocity.iter().fold(0.0, |m: f64, v| m.max(v.imaginary_defect()));
    if f.is_unimodular() && imaginary_defect >= 1e-10 {
        return Err(Error::Precision { what: "imaginary part of i f grad(conj f)".into(), value: imaginary_defect, tol: 1e-10 });
    }
    Ok(DerivedSymbols { partials, velocity, grad_sq, imaginary_defect })
}

/// `g · ∇f = Σ_j g_j ∂_j f`.
pub fn weighted_gradient(f: &Symbol, g: &[Symbol]) -> Symbol {
    assert_eq!(g.len(), f.dim(), "weight family must have one symbol per axis");
    let mut acc = Symbol::zero(f.dim());
    for (j, gj) in g.iter().enumerate() {
        acc = acc.add(&gj.mul(&f.derivative(j), DEFAULT_TAIL_TOL));
    }
    acc
}

#[derive(Debug, Clone)]
pub struct CriticalReport {
    pub critical_points: Vec<Vec<f64>>,
    pub critical_values: Vec<f64>,
    pub grid_step: f64,
}

/// Grid scan for `|∇f| < tol`, with per-axis refinement of local minima of `|∇f|`.
pub fn critical_set(f: &Symbol, grid: usize, tol: f64) -> Result<CriticalReport> {
    let d = f.dim();
    if grid < 3 {
        return Err(Error::Domain("critical-set grid needs at least 3 points per axis".into()));
    }
    let partials: Vec<Symbol> = (0..d).map(|j| f.derivative(j)).collect();
    let induced = f.tail().moment1;
    if induced > DEFAULT_DERIVED_TOL {
        return Err(Error::Precision { what: "gradient tail".into(), value: induced, tol: DEFAULT_DERIVED_TOL });
    }
    let grad = |t: &[f64]| partials.iter().map(|p| p.trig_eval(t).norm_sqr()).sum::<f64>().sqrt();
    let h = TAU / grid as f64;
    let pts = torus_grid(d, grid);
    let values: Vec<f64> = pts.iter().map(|t| grad(t)).collect();
    let stride = |j: usize| grid.pow((d - 1 - j) as u32);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for (idx, t) in pts.iter().enumerate() {
        if values[idx] < tol {
            found.push(t.clone());
            continue;
        }
        let is_min = (0..d).all(|j| {
            let s = stride(j);
            let k = (idx / s) % grid;
            let up = idx - k * s + ((k + 1) % grid) * s;
            let dn = idx - k * s + ((k + grid - 1) % grid) * s;
            values[idx] <= values[up] && values[idx] <= values[dn]
        });
        if !is_min {
            continue;
        }
        let mut p = t.clone();
        for j in 0..d {
            p[j] = refine_axis(f, &partials[j], &p, j, h);
        }
        if grad(&p) < tol {
            found.push(p.iter().map(|&x| crate::linalg::normalize_phase(x)).collect());
        }
    }
    let mut items: Vec<(f64, Vec<f64>)> = found.into_iter().map(|p| (phase(f.eval(&p)), p)).collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.partial_cmp(&b.1).unwrap()));
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut phases = Vec::new();
    for (ph, p) in items {
        let dup = points.iter().any(|q| {
            q.iter().zip(&p).all(|(&x, &y)| crate::linalg::phase_distance(x, y) < h / 2.0)
        });
        if !dup {
            points.push(p);
            phases.push(ph);
        }
    }
    Ok(CriticalReport { critical_points: points, critical_values: phases, grid_step: h })
}

/// Refines coordinate `j` of `p` inside `[p_j − h, p_j + h]`: bisection on
/// the sign of `Im(f̄ ∂_j f)` when it changes sign, golden section on `|∂_j f|²` otherwise.
fn refine_axis(f: &Symbol, dj: &Symbol, p: &[f64], j: usize, h: f64) -> f64 {
    let at = |x: f64| {
        let mut q = p.to_vec();
        q[j] = x;
        q
    };
    let signed = |x: f64| {
        let q = at(x);
        (f.trig_eval(&q).conj() * dj.trig_eval(&q)).im
    };
    let (mut lo, mut hi) = (p[j] - h, p[j] + h);
    let (slo, shi) = (signed(lo), signed(hi));
    if slo * shi < 0.0 {
        let mut s_lo = slo;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let sm = signed(mid);
            if sm == 0.0 {
                return mid;
            }
            if (sm < 0.0) == (s_lo < 0.0) {
                lo = mid;
                s_lo = sm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
    let obj = |x: f64| dj.trig_eval(&at(x)).norm_sqr();
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    for _ in 0..100 {
        if obj(c) < obj(e) {
            b = e;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        e = a + r * (b - a);
    }
    0.5 * (a + b)
}

/// `1` as a symbol.
pub fn one(dim: usize) -> Symbol {
    Symbol::constant(dim, ONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_has_only_zero_mode() {
        let s = fourier_coeffs(&|_t: &[f64]| C64::new(2.5, -1.0), 1, 32, 4, 1e-14).unwrap();
        assert_eq!(s.coeffs().len(), 1);
        assert!((s.coeff(&[0]) - C64::new(2.5, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn single_mode() {
        let s = fourier_coeffs(&|t: &[f64]| C64::from_polar(1.0, t[0]), 1, 32, 4, 1e-14).unwrap();
        assert_eq!(s.coeffs().len(), 1);
        assert!((s.coeff(&[1]) - ONE).norm() < 1e-15);
    }

    #[test]
    fn grid_below_four_bandwidths_is_refused() {
        assert!(matches!(fourier_coeffs(&|_t: &[f64]| ONE, 1, 15, 4, 1e-14), Err(Error::Domain(_))));
    }

    #[test]
    fn slow_decay_trips_the_edge_check() {
        let r = fourier_coeffs(&|t: &[f64]| C64::new(1.0 / (1.2 - t[0].cos()), 0.0), 1, 64, 8, 1e-14);
        assert!(matches!(r, Err(Error::Aliasing { bandwidth: 8, .. })));
    }

    #[test]
    fn ggt_symbol_values_at_zero_and_pi() {
        let f = ggt_symbol(2.0).unwrap();
        assert!((f.eval(&[0.0]) + ONE).norm() < 1e-15);
        assert!((f.eval(&[PI]) + ONE).norm() < 1e-15);
        assert!((f.trig_eval(&[0.0]) + ONE).norm() < 1e-13);
        assert!(f.is_unimodular());
    }

    #[test]
    fn ggt_symbol_rejects_small_a() {
        assert!(ggt_symbol(1.0).is_err());
        assert!(ggt_symbol(0.5).is_err());
        assert!(range_arc(1.0).is_err());
    }

    #[test]
    fn derived_of_constant_vanish() {
        let ds = derived_symbols(&Symbol::constant(1, C64::new(0.3, 0.4))).unwrap();
        assert!(ds.partials[0].max_coeff() == 0.0);
        assert!(ds.velocity[0].max_coeff() == 0.0);
        assert!(ds.grad_sq.max_coeff() == 0.0);
    }

    #[test]
    fn derived_of_plane_wave() {
        let f = Symbol::mode(vec![1], ONE).claim_unimodular().unwrap();
        let ds = derived_symbols(&f).unwrap();
        assert!((ds.velocity[0].coeff(&[0]) - ONE).norm() < 1e-15);
        assert_eq!(ds.velocity[0].coeffs().len(), 1);
        assert!((ds.grad_sq.coeff(&[0]) - ONE).norm() < 1e-15);
    }

    #[test]
    fn empty_critical_set_for_plane_wave() {
        let f = Symbol::mode(vec![1], ONE);
        assert!(critical_set(&f, 64, 1e-8).unwrap().critical_points.is_empty());
    }

    #[test]
    fn constant_symbol_is_critical_everywhere() {
        let r = critical_set(&Symbol::constant(1, ONE), 32, 1e-8).unwrap();
        assert_eq!(r.critical_points.len(), 32);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let f = ggt_symbol(3.0).unwrap();
        let g = Symbol::from_text(&f.to_text()).unwrap();
        assert_eq!(f.coeffs(), g.coeffs());
        assert!(g.is_unimodular());
        assert_eq!(g.tail().mass, f.tail().mass);
    }

    #[test]
    fn malformed_text_reports_line() {
        let err = Symbol::from_text("symbol\ndim 1\ncoeff 0 1.0\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, msg: "expected 3 fields after 'coeff'".into() });
    }
}
