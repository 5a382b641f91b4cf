//! GGT matrices from Verblunsky coefficients, the `q_n` seminorms and the
//! perturbation hypotheses on `α_k = α_∞(1 + u_k + v_k + w_k)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeBox, LatticeOperator};
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::par;

/// Window of coefficients with a constant tail outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    window: BTreeMap<i64, C64>,
    tail: C64,
}

impl VerblunskySequence {
    pub fn new(window: BTreeMap<i64, C64>, tail: C64) -> Result<Self> {
        for (k, a) in window.iter().map(|(k, a)| (Some(*k), a)).chain(std::iter::once((None, &tail))) {
            let m = a.norm();
            if !(m > 0.0 && m < 1.0) {
                let at = k.map_or("the tail".to_string(), |k| format!("k = {k}"));
                return Err(Error::Domain(format!("|alpha| = {m} at {at} is outside (0, 1)")));
            }
        }
        Ok(Self { window, tail })
    }

    pub fn constant(tail: C64) -> Result<Self> {
        Self::new(BTreeMap::new(), tail)
    }

    /// Constant sequence whose symbol is `f_a`: `|α_∞| = √(1 − a^{−2})`.
    pub fn constant_for(a: f64) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::Domain(format!("need a > 1, got {a}")));
        }
        Self::constant(C64::new((1.0 - a.powi(-2)).sqrt(), 0.0))
    }

    pub fn alpha(&self, k: i64) -> C64 {
        self.window.get(&k).copied().unwrap_or(self.tail)
    }

    /// `a_k = (1 − |α_k|²)^{−1/2}`.
    pub fn a(&self, k: i64) -> f64 {
        (1.0 - self.alpha(k).norm_sqr()).sqrt().recip()
    }

    pub fn a_inf(&self) -> f64 {
        (1.0 - self.tail.norm_sqr()).sqrt().recip()
    }

    pub fn tail(&self) -> C64 {
        self.tail
    }

    pub fn window(&self) -> &BTreeMap<i64, C64> {
        &self.window
    }

    /// `sup_k a_k^{−1}`.
    pub fn sup_inv_a(&self) -> f64 {
        self.window.keys().map(|&k| self.a(k).recip()).fold(self.a_inf().recip(), f64::max)
    }
}

/// `H(α) = T*D₂ − T*D₁T(I − D₂T)^{−1}D₁*` on a periodic line with cyclic `T`.
pub fn build_ggt(lbox: &LatticeBox, seq: &VerblunskySequence) -> Result<LatticeOperator> {
    if lbox.dim() != 1 || lbox.boundary() != Boundary::Periodic {
        return Err(Error::Refused("build_ggt needs a one-dimensional periodic box".into()));
    }
    let h = lbox.half(0);
    if let Some(k) = seq.window().keys().find(|k| k.abs() > h) {
        return Err(Error::Domain(format!("window site {k} lies outside the box")));
    }
    let n = lbox.len();
    let alpha: Vec<C64> = (-h..=h).map(|k| seq.alpha(k)).collect();
    let inv_a: Vec<f64> = (-h..=h).map(|k| seq.a(k).recip()).collect();
    let mut m = CMat::identity(n, n);
    for c in 0..n {
        m[((c + 1) % n, c)] -= C64::new(inv_a[(c + 1) % n], 0.0);
    }
    let d1_adj = CMat::from_diagonal(&alpha.iter().map(|a| a.conj()).collect::<Vec<_>>().into());
    let x = linalg::solve(&m, &d1_adj)?;
    // Row r of T*D₁T X is α_{r+1} times row r of X.
    let mut hmat = CMat::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            hmat[(r, c)] = -alpha[(r + 1) % n] * x[(r, c)];
        }
        hmat[((c + n - 1) % n, c)] += C64::new(inv_a[c], 0.0);
    }
    LatticeOperator::new(lbox.clone(), hmat)?.claim_unitary()
}

/// Column-by-column row formula
/// `H e_k = a_k^{−1} e_{k−1} − ᾱ_k Σ_{l≥k} α_{l+1} Π_{m=k+1}^{l} a_m^{−1} e_l`,
/// truncated after `tail_cut` terms, on an open line.
pub fn build_ggt_rows(lbox: &LatticeBox, seq: &VerblunskySequence, tail_cut: usize, tail_tol: f64) -> Result<LatticeOperator> {
    if lbox.dim() != 1 || lbox.boundary() != Boundary::Open {
        return Err(Error::Refused("build_ggt_rows needs a one-dimensional open box".into()));
    }
    let bound = seq.sup_inv_a().powi(tail_cut as i32);
    if bound >= tail_tol {
        return Err(Error::Precision { what: "GGT row tail".into(), value: bound, tol: tail_tol });
    }
    let h = lbox.half(0);
    let n = lbox.len();
    let mut m = CMat::zeros(n, n);
    let idx = |k: i64| (k + h) as usize;
    for k in -h..=h {
        if k > -h {
            m[(idx(k - 1), idx(k))] = C64::new(seq.a(k).recip(), 0.0);
        }
        let lead = -seq.alpha(k).conj();
        let mut prod = 1.0;
        for l in k..=k + tail_cut as i64 {
            if l > k {
                prod /= seq.a(l);
            }
            if l > h {
                break;
            }
            m[(idx(l), idx(k))] += lead * seq.alpha(l + 1) * prod;
        }
    }
    LatticeOperator::new(lbox.clone(), m)
}

/// Finite-window `q_n`, a lower bound for the value over ℤ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QNorm {
    pub value: f64,
    pub first: i64,
    pub last: i64,
}

/// `q₀ = sup|γ|`, `q_{n+1} = q_n + ‖ξ^{n+1} Δ^{n+1} γ‖∞` with `(Δγ)_k = γ_k − γ_{k+1}`.
/// `gamma[i]` is the value at index `start + i`.
pub fn q_norm(n: usize, gamma: &[C64], start: i64) -> Result<QNorm> {
    if n > 2 {
        return Err(Error::Domain(format!("q_n is defined for n <= 2, got {n}")));
    }
    if gamma.len() < n + 1 {
        return Err(Error::Domain(format!("window of length {} is shorter than {}", gamma.len(), n + 1)));
    }
    let mut value = gamma.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut diff = gamma.to_vec();
    for order in 1..=n {
        diff = diff.windows(2).map(|w| w[0] - w[1]).collect();
        let sup = diff
            .iter()
            .enumerate()
            .map(|(i, d)| (start + i as i64).abs().pow(order as u32) as f64 * d.norm())
            .fold(0.0, f64::max);
        value += sup;
    }
    Ok(QNorm { value, first: start, last: start + gamma.len() as i64 - 1 })
}

/// Decomposed perturbation `α_k = α_∞(1 + u_k + v_k + w_k)` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationProfile {
    pub alpha_inf: C64,
    pub u: BTreeMap<i64, C64>,
    pub v: BTreeMap<i64, C64>,
    pub w: BTreeMap<i64, C64>,
    pub b1: f64,
    pub b2: f64,
    /// Inclusive window range; sites inside it without entries are unperturbed.
    pub range: (i64, i64),
}

impl PerturbationProfile {
    pub fn unperturbed(alpha_inf: C64, range: (i64, i64)) -> Self {
        Self { alpha_inf, u: BTreeMap::new(), v: BTreeMap::new(), w: BTreeMap::new(), b1: 1.0, b2: 2.0, range }
    }

    fn get(map: &BTreeMap<i64, C64>, k: i64) -> C64 {
        map.get(&k).copied().unwrap_or(ZERO)
    }

    pub fn total(&self, k: i64) -> C64 {
        Self::get(&self.u, k) + Self::get(&self.v, k) + Self::get(&self.w, k)
    }

    /// Recomposed sequence; sites with no perturbation fall back to the tail.
    pub fn sequence(&self) -> Result<VerblunskySequence> {
        let keys: std::collections::BTreeSet<i64> = self.u.keys().chain(self.v.keys()).chain(self.w.keys()).copied().collect();
        let window = keys.into_iter().map(|k| (k, self.alpha_inf * (ONE + self.total(k)))).collect();
        VerblunskySequence::new(window, self.alpha_inf)
    }

    /// Puts the whole deviation of a window into `u`.
    pub fn from_window(alpha_inf: C64, window: &BTreeMap<i64, C64>, b1: f64, b2: f64) -> Result<Self> {
        if alpha_inf.norm() == 0.0 {
            return Err(Error::Domain("alpha_inf must be nonzero".into()));
        }
        let u = window.iter().map(|(&k, &a)| (k, a / alpha_inf - ONE)).collect();
        let range = (
            window.keys().next().copied().unwrap_or(0),
            window.keys().next_back().copied().unwrap_or(0),
        );
        Ok(Self { alpha_inf, u, v: BTreeMap::new(), w: BTreeMap::new(), b1, b2, range })
    }

    /// `max_k |α_∞(1 + u_k + v_k + w_k) − α_k|` against a sequence.
    pub fn recomposition_defect(&self, seq: &VerblunskySequence) -> f64 {
        (self.range.0..=self.range.1)
            .map(|k| (self.alpha_inf * (ONE + self.total(k)) - seq.alpha(k)).norm())
            .fold(0.0, f64::max)
    }

    fn dense(&self, map: &BTreeMap<i64, C64>) -> Vec<C64> {
        (self.range.0..=self.range.1).map(|k| Self::get(map, k)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alpha_inf {:.16e} {:.16e}", self.alpha_inf.re, self.alpha_inf.im);
        let _ = writeln!(s, "b1 {:.16e}", self.b1);
        let _ = writeln!(s, "b2 {:.16e}", self.b2);
        let _ = writeln!(s, "range {} {}", self.range.0, self.range.1);
        for (name, map) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            for (k, z) in map {
                let _ = writeln!(s, "{name} {k} {:.16e} {:.16e}", z.re, z.im);
            }
        }
        s
    }

    /// Parses a profile: header lines `alpha_inf re im`, `b1 x`, `b2 x`,
    /// optional `range lo hi`, then either plain `k re im` window lines or
    /// component lines `u|v|w k re im`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut alpha_inf = None;
        let (mut b1, mut b2) = (None, None);
        let mut range = None;
        let mut window = BTreeMap::new();
        let mut comps: [BTreeMap<i64, C64>; 3] = Default::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let f: Vec<&str> = body.split_whitespace().collect();
            let perr = |msg: String| Error::Parse { line, msg };
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("cannot parse number '{s}'")));
            let int = |s: &str| s.parse::<i64>().map_err(|_| perr(format!("cannot parse index '{s}'")));
            match f[0] {
                "alpha_inf" if f.len() == 3 => alpha_inf = Some(C64::new(num(f[1])?, num(f[2])?)),
                "b1" if f.len() == 2 => b1 = Some(num(f[1])?),
                "b2" if f.len() == 2 => b2 = Some(num(f[1])?),
                "range" if f.len() == 3 => range = Some((int(f[1])?, int(f[2])?)),
                "u" | "v" | "w" if f.len() == 4 => {
                    let slot = match f[0] {
                        "u" => 0,
                        "v" => 1,
                        _ => 2,
                    };
                    comps[slot].insert(int(f[1])?, C64::new(num(f[2])?, num(f[3])?));
                }
                _ if f.len() == 3 && f[0].parse::<i64>().is_ok() => {
                    window.insert(int(f[0])?, C64::new(num(f[1])?, num(f[2])?));
                }
                _ => return Err(perr(format!("unrecognized profile line '{body}'"))),
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("profile is missing '{what}'") };
        let alpha_inf = alpha_inf.ok_or_else(|| missing("alpha_inf"))?;
        let (b1, b2) = (b1.ok_or_else(|| missing("b1"))?, b2.ok_or_else(|| missing("b2"))?);
        if !(0.0 < b1 && b1 < b2) {
            return Err(Error::Parse { line: 0, msg: format!("annulus needs 0 < b1 < b2, got {b1}, {b2}") });
        }
        let has_comps = comps.iter().any(|c| !c.is_empty());
        if has_comps && !window.is_empty() {
            return Err(Error::Parse { line: 0, msg: "profile mixes window lines with u/v/w lines".into() });
        }
        let mut p = if has_comps {
            let [u, v, w] = comps;
            Self { alpha_inf, u, v, w, b1, b2, range: (0, 0) }
        } else {
            Self::from_window(alpha_inf, &window, b1, b2)?
        };
        let keys = p.u.keys().chain(p.v.keys()).chain(p.w.keys());
        let (lo, hi) = keys.fold((i64::MAX, i64::MIN), |(l, h), &k| (l.min(k), h.max(k)));
        p.range = match range {
            Some((a, b)) if a <= b && (lo > hi || (a <= lo && hi <= b)) => (a, b),
            Some(r) => return Err(Error::Parse { line: 0, msg: format!("range {r:?} does not cover the profile entries") }),
            None if lo <= hi => (lo, hi),
            None => (0, 0),
        };
        p.sequence()?;
        Ok(p)
    }
}

/// Partial trapezoidal integrals of an annulus-sup integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct BulletVerdict {
    pub integral: f64,
    /// `(r, ∫_1^r)` at each valid grid point.
    pub partials: Vec<(f64, f64)>,
    /// Largest single-step increment at `r ≥ flat_from`.
    pub tail_increment: f64,
    /// Finite-window seminorm for the v and w bullets.
    pub seminorm: Option<QNorm>,
    /// Largest modulus on the outer tenth of the window.
    pub edge_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub u: BulletVerdict,
    pub v: BulletVerdict,
    pub w: BulletVerdict,
    /// Some grid radii had an empty or partly uncovered annulus.
    pub truncated: bool,
    pub r_valid_max: f64,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.u.pass && self.v.pass && self.w.pass
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HypothesisOptions {
    pub flat_tol: f64,
    pub flat_from: f64,
    pub decay_tol: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self { flat_tol: 1e-3, flat_from: 50.0, decay_tol: 1e-2 }
    }
}

pub fn hypothesis_check(p: &PerturbationProfile, r_max: f64) -> Result<HypothesisReport> {
    hypothesis_check_with(p, r_max, HypothesisOptions::default())
}

pub fn hypothesis_check_with(p: &PerturbationProfile, r_max: f64, opts: HypothesisOptions) -> Result<HypothesisReport> {
    if !(r_max >= 1.0) {
        return Err(Error::Domain(format!("r_max must be at least 1, got {r_max}")));
    }
    let (lo, hi) = p.range;
    let edge = (-lo).min(hi).max(0) as f64;
    let steps = ((r_max - 1.0) / 0.5).floor() as usize;
    let radii: Vec<f64> = (0..=steps).map(|i| 1.0 + 0.5 * i as f64).collect();
    let valid: Vec<f64> = radii.iter().copied().filter(|&r| p.b1 * r <= edge).collect();
    let truncated = valid.len() < radii.len() || p.b2 * r_max > edge;
    let u = p.dense(&p.u);
    let v = p.dense(&p.v);
    let w = p.dense(&p.w);
    let dv: Vec<C64> = v.windows(2).map(|x| x[0] - x[1]).collect();
    let annulus_sup = |seq: &[C64], r: f64| {
        seq.iter()
            .enumerate()
            .filter(|(i, _)| {
                let k = (lo + *i as i64).abs() as f64;
                p.b1 * r <= k && k <= p.b2 * r
            })
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    };
    let edge_sup = |seq: &[C64]| {
        seq.iter()
            .enumerate()
            .filter(|(i, _)| (lo + *i as i64).abs() as f64 >= 0.9 * edge)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    };
    let integrate = |seq: &[C64]| {
        let vals = par::map_indexed(valid.len(), |i| annulus_sup(seq, valid[i]));
        let mut partials = Vec::with_capacity(valid.len());
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..valid.len() {
            if i > 0 {
                let inc = 0.5 * (valid[i] - valid[i - 1]) * (vals[i] + vals[i - 1]);
                acc += inc;
                if valid[i] >= opts.flat_from {
                    worst = worst.max(inc);
                }
            }
            partials.push((valid[i], acc));
        }
        (acc, partials, worst)
    };
    let (iu, pu, tu) = integrate(&u);
    let (iv, pv, tv) = integrate(&dv);
    let (iw, pw, tw) = integrate(&[]);
    let qv = if v.len() >= 2 { Some(q_norm(1, &v, lo)?) } else { None };
    let qw = if w.len() >= 3 { Some(q_norm(2, &w, lo)?) } else { None };
    let (ev, ew) = (edge_sup(&v), edge_sup(&w));
    let finite = |x: f64| x.is_finite();
    Ok(HypothesisReport {
        u: BulletVerdict {
            integral: iu,
            partials: pu,
            tail_increment: tu,
            seminorm: None,
            edge_sup: edge_sup(&u),
            pass: finite(iu) && tu < opts.flat_tol,
        },
        v: BulletVerdict {
            integral: iv,
            partials: pv,
            tail_increment: tv,
            seminorm: qv,
            edge_sup: ev,
            pass: finite(iv) && tv < opts.flat_tol && qv.is_none_or(|q| q.value.is_finite()) && ev < opts.decay_tol,
        },
        w: BulletVerdict {
            integral: iw,
            partials: pw,
            tail_increment: tw,
            seminorm: qw,
            edge_sup: ew,
            pass: qw.is_none_or(|q| q.value.is_finite()) && ew < opts.decay_tol,
        },
        truncated,
        r_valid_max: valid.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_invariants() {
        assert!(VerblunskySequence::constant(C64::new(1.0, 0.0)).is_err());
        assert!(VerblunskySequence::constant(ZERO).is_err());
        let s = VerblunskySequence::constant_for(2.0).unwrap();
        assert!((s.a_inf() - 2.0).abs() < 1e-14);
        let k = 3;
        assert!((s.a(k).powi(-2) + s.alpha(k).norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_norm_examples() {
        let c = vec![C64::new(0.0, 2.0); 10];
        for n in 0..=2 {
            assert_eq!(q_norm(n, &c, -4).unwrap().value, 2.0);
        }
        let g: Vec<C64> = (1..=100).map(|k| C64::new(1.0 / k as f64, 0.0)).collect();
        assert!((q_norm(1, &g, 1).unwrap().value - 1.5).abs() < 1e-15);
        assert!(q_norm(2, &g[..2], 1).is_err());
    }

    #[test]
    fn unperturbed_profile_passes_with_zero_integrals() {
        let p = PerturbationProfile::unperturbed(C64::new(0.5, 0.0), (-300, 300));
        let r = hypothesis_check(&p, 100.0).unwrap();
        assert!(r.pass());
        assert_eq!((r.u.integral, r.v.integral, r.w.integral), (0.0, 0.0, 0.0));
        assert!(!r.truncated);
    }

    #[test]
    fn profile_text_round_trip() {
        let mut p = PerturbationProfile::unperturbed(C64::new(0.8, 0.1), (-5, 5));
        p.u.insert(0, C64::new(-0.3, 0.0));
        p.v.insert(2, C64::new(0.1, 0.05));
        p.w.insert(-1, C64::new(0.0, 0.02));
        assert_eq!(PerturbationProfile::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn window_profile_recomposes_exactly() {
        let text = "alpha_inf 0.5 0\nb1 1\nb2 2\n-1 0.4 0\n0 0.25 0.1\n";
        let p = PerturbationProfile::from_text(text).unwrap();
        let s = p.sequence().unwrap();
        assert!(p.recomposition_defect(&s) < 1e-16);
        assert_eq!(s.alpha(0), C64::new(0.25, 0.1));
    }

    #[test]
    fn profile_errors_carry_line_numbers() {
        let e = PerturbationProfile::from_text("alpha_inf 0.5 0\nb1 1\nb2 2\nx 1 2 3 4\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }));
    }
}
