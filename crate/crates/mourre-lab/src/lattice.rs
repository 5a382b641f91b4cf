//! Finite boxes of ℤᵈ and the concrete operators that live on them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::spectra::SpectralData;
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::Domain(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Odd-sided box with centered coordinates `−(N_j−1)/2 … (N_j−1)/2`.
/// Linear indices run with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    sides: Vec<usize>,
    boundary: Boundary,
}

impl LatticeBox {
    pub const DEFAULT_CAP: usize = 8192;

    pub fn new(sides: &[usize], boundary: Boundary) -> Result<Self> {
        Self::with_cap(sides, boundary, Self::DEFAULT_CAP)
    }

    pub fn with_cap(sides: &[usize], boundary: Boundary, cap: usize) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::Domain("box needs at least one axis".into()));
        }
        if let Some(&n) = sides.iter().find(|&&n| n < 3 || n % 2 == 0) {
            return Err(Error::Domain(format!("box sides must be odd and at least 3, got {n}")));
        }
        let total = sides.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match total {
            Some(t) if t <= cap => Ok(Self { sides: sides.to_vec(), boundary }),
            _ => Err(Error::Domain(format!("box {sides:?} exceeds the dimension cap {cap}"))),
        }
    }

    pub fn line(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new(&[n], boundary)
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.sides.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half(&self, j: usize) -> i64 {
        (self.sides[j] as i64 - 1) / 2
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self { sides: self.sides.clone(), boundary }
    }

    /// Same Hilbert space: equal sides, boundary mode may differ.
    pub fn same_space(&self, other: &Self) -> bool {
        self.sides == other.sides
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut c = vec![0; d];
        for j in (0..d).rev() {
            c[j] = (idx % self.sides[j]) as i64 - self.half(j);
            idx /= self.sides[j];
        }
        c
    }

    /// Index of a coordinate; periodic boxes wrap, open boxes reject outside points.
    pub fn index(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (j, &x) in c.iter().enumerate() {
            let n = self.sides[j] as i64;
            let h = self.half(j);
            let k = match self.boundary {
                Boundary::Periodic => (x + h).rem_euclid(n),
                Boundary::Open => {
                    if x < -h || x > h {
                        return None;
                    }
                    x + h
                }
            };
            idx = idx * self.sides[j] + k as usize;
        }
        Some(idx)
    }

    pub fn origin(&self) -> usize {
        self.index(&vec![0; self.dim()]).expect("origin is inside every box")
    }

    /// Distance of a site to the box edge, `min_j (h_j − |c_j|)`.
    pub fn edge_distance(&self, idx: usize) -> i64 {
        self.coords(idx).iter().enumerate().map(|(j, c)| self.half(j) - c.abs()).min().unwrap_or(0)
    }

    /// Sites whose coordinates satisfy `|c_j| ≤ h_j − margin`.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.edge_distance(i) >= margin as i64).collect()
    }

    /// Sites closer than `width` to the edge.
    pub fn collar(&self, width: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.edge_distance(i) < width as i64).collect()
    }

    /// `e_β`.
    pub fn basis(&self, c: &[i64]) -> Result<CVec> {
        let idx = self.index(c).ok_or_else(|| Error::Domain(format!("site {c:?} lies outside the box")))?;
        let mut v = CVec::zeros(self.len());
        v[idx] = ONE;
        Ok(v)
    }

    pub fn describe(&self) -> String {
        let sides: Vec<String> = self.sides.iter().map(|n| n.to_string()).collect();
        format!("{} {}", sides.join("x"), self.boundary.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub unitary: bool,
    pub hermitian: bool,
    pub bandwidth: Option<usize>,
}

/// Per-operator memo of eigendecompositions.
#[derive(Debug, Default)]
pub struct SpectralMemo {
    pub(crate) hermitian: OnceLock<Result<Arc<SpectralData>>>,
    pub(crate) unitary: OnceLock<Result<Arc<SpectralData>>>,
}

/// Dense matrix on a box, with verified structural flags.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    lbox: LatticeBox,
    matrix: CMat,
    flags: Flags,
    diagnostics: BTreeMap<&'static str, f64>,
    memo: Arc<SpectralMemo>,
}

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;

impl LatticeOperator {
    pub fn new(lbox: LatticeBox, matrix: CMat) -> Result<Self> {
        let n = lbox.len();
        if matrix.shape() != (n, n) {
            return Err(Error::BoxMismatch(format!("matrix {:?} on a box of {n} sites", matrix.shape())));
        }
        Ok(Self { lbox, matrix, flags: Flags::default(), diagnostics: BTreeMap::new(), memo: Arc::default() })
    }

    /// Sets the unitary flag after checking `‖M*M − I‖_max < 1e−10`.
    pub fn claim_unitary(mut self) -> Result<Self> {
        let d = linalg::unitary_defect(&self.matrix);
        self.diagnostics.insert("unitary_defect", d);
        if d >= UNITARY_TOL {
            return Err(Error::NotUnitary(d));
        }
        self.flags.unitary = true;
        Ok(self)
    }

    /// Sets the hermitian flag after checking `‖M − M*‖_max < 1e−12`.
    pub fn claim_hermitian(mut self) -> Result<Self> {
        let d = linalg::hermitian_defect(&self.matrix);
        self.diagnostics.insert("hermitian_defect", d);
        if d >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(d));
        }
        self.flags.hermitian = true;
        Ok(self)
    }

    pub fn with_bandwidth(mut self, b: usize) -> Self {
        self.flags.bandwidth = Some(b);
        self
    }

    pub(crate) fn with_flags_unchecked(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub(crate) fn note(mut self, key: &'static str, value: f64) -> Self {
        self.diagnostics.insert(key, value);
        self
    }

    pub fn lbox(&self) -> &LatticeBox {
        &self.lbox
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }

    pub(crate) fn memo(&self) -> &SpectralMemo {
        &self.memo
    }

    pub fn len(&self) -> usize {
        self.lbox.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        linalg::matvec(&self.matrix, v)
    }

    pub fn adjoint(&self) -> Self {
        let mut op = Self::new(self.lbox.clone(), self.matrix.adjoint()).expect("same shape");
        op.flags = self.flags;
        op
    }

    /// Product `self · other`; flags are not propagated.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_space(&self.lbox, &other.lbox)?;
        Self::new(self.lbox.clone(), linalg::matmul(&self.matrix, &other.matrix))
    }

    /// Largest lattice distance `‖β − β′‖∞` over entries above `tol`.
    pub fn effective_bandwidth(&self, tol: f64) -> usize {
        let n = self.len();
        let coords: Vec<Vec<i64>> = (0..n).map(|i| self.lbox.coords(i)).collect();
        let mut best = 0usize;
        for j in 0..n {
            for i in 0..n {
                if self.matrix[(i, j)].norm() > tol {
                    best = best.max(lattice_distance(&self.lbox, &coords[i], &coords[j]));
                }
            }
        }
        best
    }
}

fn lattice_distance(b: &LatticeBox, x: &[i64], y: &[i64]) -> usize {
    x.iter()
        .zip(y)
        .enumerate()
        .map(|(j, (p, q))| {
            let d = (p - q).unsigned_abs() as usize;
            match b.boundary() {
                Boundary::Periodic => d.min(b.sides()[j] - d),
                Boundary::Open => d,
            }
        })
        .max()
        .unwrap_or(0)
}

pub fn check_space(a: &LatticeBox, b: &LatticeBox) -> Result<()> {
    if a.same_space(b) {
        Ok(())
    } else {
        Err(Error::BoxMismatch(format!("{} vs {}", a.describe(), b.describe())))
    }
}

/// `T^α`: cyclic in periodic mode, truncated in open mode.
pub fn shift_op(lbox: &LatticeBox, alpha: &[i64]) -> Result<LatticeOperator> {
    if alpha.len() != lbox.dim() {
        return Err(Error::Domain(format!("shift {alpha:?} does not match d = {}", lbox.dim())));
    }
    let n = lbox.len();
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        let c: Vec<i64> = lbox.coords(j).iter().zip(alpha).map(|(x, a)| x + a).collect();
        if let Some(i) = lbox.index(&c) {
            m[(i, j)] = ONE;
        }
    }
    let periodic = lbox.boundary() == Boundary::Periodic;
    let bw = alpha
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let d = a.unsigned_abs() as usize;
            if periodic {
                let r = d % lbox.sides()[j];
                r.min(lbox.sides()[j] - r)
            } else {
                d
            }
        })
        .max()
        .unwrap_or(0);
    let flags = Flags { unitary: periodic, hermitian: false, bandwidth: Some(bw) };
    Ok(LatticeOperator::new(lbox.clone(), m)?.with_flags_unchecked(flags))
}

/// `X_j`, the diagonal of centered coordinates along axis `j`.
pub fn position_op(lbox: &LatticeBox, j: usize) -> Result<LatticeOperator> {
    if j >= lbox.dim() {
        return Err(Error::Domain(format!("axis {j} out of range for d = {}", lbox.dim())));
    }
    diagonal_op(lbox, |c| C64::new(c[j] as f64, 0.0))
}

/// `D_γ` with `γ` given as a function of the coordinates.
pub fn diagonal_op(lbox: &LatticeBox, gamma: impl Fn(&[i64]) -> C64) -> Result<LatticeOperator> {
    let vals: Vec<C64> = (0..lbox.len()).map(|i| gamma(&lbox.coords(i))).collect();
    diagonal_from(lbox, &vals)
}

/// `D_γ` with `γ` listed in index order.
pub fn diagonal_from(lbox: &LatticeBox, gamma: &[C64]) -> Result<LatticeOperator> {
    if gamma.len() != lbox.len() {
        return Err(Error::Domain(format!("{} diagonal values for {} sites", gamma.len(), lbox.len())));
    }
    let m = CMat::from_diagonal(&CVec::from_column_slice(gamma));
    let flags = Flags {
        unitary: gamma.iter().all(|g| (g.norm() - 1.0).abs() < UNITARY_TOL),
        hermitian: gamma.iter().all(|g| g.im == 0.0),
        bandwidth: Some(0),
    };
    Ok(LatticeOperator::new(lbox.clone(), m)?.with_flags_unchecked(flags))
}

/// `L_f = Σ f̂_α T^α`.
///
/// Periodic boxes fold every coefficient modulo the sides, which realizes the
/// circulant with eigenvalues `f(2πk/N)`; the folded mass is recorded under
/// `folded_mass`. Open boxes refuse symbols with bandwidth ≥ N/2.
pub fn laurent_op(lbox: &LatticeBox, f: &Symbol) -> Result<LatticeOperator> {
    if f.dim() != lbox.dim() {
        return Err(Error::Domain(format!("symbol of dimension {} on a {}-dimensional box", f.dim(), lbox.dim())));
    }
    let min_side = *lbox.sides().iter().min().unwrap();
    let bw = f.bandwidth();
    if lbox.boundary() == Boundary::Open && 2 * bw >= min_side {
        return Err(Error::Refused(format!("symbol bandwidth {bw} is too large for an open box of side {min_side}")));
    }
    let n = lbox.len();
    let mut m = CMat::zeros(n, n);
    let coords: Vec<Vec<i64>> = (0..n).map(|i| lbox.coords(i)).collect();
    let mut folded = 0.0;
    for (alpha, c) in f.coeffs() {
        if alpha.iter().enumerate().any(|(j, a)| a.abs() > lbox.half(j)) {
            folded += c.norm();
        }
        for (j, x) in coords.iter().enumerate() {
            let target: Vec<i64> = x.iter().zip(alpha).map(|(p, a)| p + a).collect();
            if let Some(i) = lbox.index(&target) {
                m[(i, j)] += c;
            }
        }
    }
    let mut op = LatticeOperator::new(lbox.clone(), m)?;
    op.flags.bandwidth = Some(bw.min(min_side / 2));
    if lbox.boundary() == Boundary::Periodic {
        op = op.note("folded_mass", folded);
        // Translation invariance: column 0 of L*L determines every entry.
        let e0 = {
            let mut v = CVec::zeros(n);
            v[0] = ONE;
            v
        };
        let col = linalg::matvec(&op.matrix.adjoint(), &op.apply(&e0));
        let defect = col.iter().enumerate().fold(0.0f64, |d, (i, z)| d.max((z - if i == 0 { ONE } else { ZERO }).norm()));
        op = op.note("unitary_defect", defect);
        if f.is_unimodular() && defect < UNITARY_TOL {
            op.flags.unitary = true;
        }
    }
    Ok(op)
}

/// `A_g = ½ Σ_j (L_{g_j} X_j + X_j L_{g_j})` on an open box.
pub fn conjugate_op(lbox: &LatticeBox, g: &[Symbol]) -> Result<LatticeOperator> {
    if lbox.boundary() != Boundary::Open {
        return Err(Error::Refused("conjugate operators need an open box".into()));
    }
    if g.len() != lbox.dim() {
        return Err(Error::Domain(format!("{} weight symbols for d = {}", g.len(), lbox.dim())));
    }
    for (j, gj) in g.iter().enumerate() {
        let im = gj.imaginary_defect();
        if im >= 1e-10 {
            return Err(Error::Domain(format!("weight g_{j} is not real (imaginary part {im:.3e})")));
        }
    }
    let n = lbox.len();
    let mut a = CMat::zeros(n, n);
    let mut bw = 0;
    for (j, gj) in g.iter().enumerate() {
        let l = laurent_op(lbox, gj)?;
        bw = bw.max(gj.bandwidth());
        let x: Vec<f64> = (0..n).map(|i| lbox.coords(i)[j] as f64).collect();
        for col in 0..n {
            for row in 0..n {
                let v = l.matrix[(row, col)];
                if v != ZERO {
                    a[(row, col)] += v * (0.5 * (x[col] + x[row]));
                }
            }
        }
    }
    // Rounding in ĝ_m versus conj ĝ_{−m} is amplified by |x|; the real-weight
    // check above bounds it, so project onto the hermitian part.
    let raw = linalg::hermitian_defect(&a);
    let a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    Ok(LatticeOperator::new(lbox.clone(), a)?.claim_hermitian()?.note("raw_hermitian_defect", raw).with_bandwidth(bw))
}

/// `A_a = ½ Σ_{0<|m|≤cut} a^{−|m|} (T^m X + X T^m)` with truncated shifts (d = 1).
pub fn conjugate_op_ggt(lbox: &LatticeBox, a: f64, series_cut: usize, tail_tol: f64) -> Result<LatticeOperator> {
    if lbox.boundary() != Boundary::Open || lbox.dim() != 1 {
        return Err(Error::Refused("the GGT conjugate operator needs a one-dimensional open box".into()));
    }
    if !(a > 1.0) {
        return Err(Error::Domain(format!("need a > 1, got {a}")));
    }
    let n = lbox.len();
    let tail = a.powi(-(series_cut as i32)) * n as f64;
    if tail >= tail_tol {
        return Err(Error::Precision { what: "series cut of the GGT conjugate operator".into(), value: tail, tol: tail_tol });
    }
    let h = lbox.half(0);
    let mut m = CMat::zeros(n, n);
    for k in -h..=h {
        for s in 1..=series_cut as i64 {
            let w = a.powi(-(s as i32));
            for mm in [s, -s] {
                let t = k + mm;
                if t.abs() <= h {
                    m[((t + h) as usize, (k + h) as usize)] = C64::new(w * (2 * k + mm) as f64 / 2.0, 0.0);
                }
            }
        }
    }
    Ok(LatticeOperator::new(lbox.clone(), m)?.claim_hermitian()?.with_bandwidth(series_cut))
}

/// `‖ψ‖_X = √(‖ψ‖² + Σ_j ‖X_j ψ‖²)`.
pub fn x_norm(lbox: &LatticeBox, psi: &CVec) -> f64 {
    x_norm_sq(lbox, psi).sqrt()
}

pub fn x_norm_sq(lbox: &LatticeBox, psi: &CVec) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, z)| {
            let r2: i64 = lbox.coords(i).iter().map(|c| c * c).sum();
            (1 + r2) as f64 * z.norm_sqr()
        })
        .sum()
}

/// Structured-text matrix dump with a box header.
pub fn dump_operator(op: &LatticeOperator) -> String {
    let mut s = String::new();
    let sides: Vec<String> = op.lbox.sides.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "box dim {} sides {} boundary {}", op.lbox.dim(), sides.join(" "), op.lbox.boundary.name());
    let bw = op.flags.bandwidth.map_or("none".to_string(), |b| b.to_string());
    let _ = writeln!(
        s,
        "flags unitary {} hermitian {} bandwidth {bw}",
        u8::from(op.flags.unitary),
        u8::from(op.flags.hermitian)
    );
    for i in 0..op.len() {
        let row: Vec<String> = (0..op.len())
            .map(|j| {
                let z = op.matrix[(i, j)];
                format!("{:.16e} {:.16e}", z.re, z.im)
            })
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Vector dump as `(coordinates, re, im)` lines.
pub fn dump_vector(lbox: &LatticeBox, psi: &CVec) -> String {
    let mut s = String::new();
    for (i, z) in psi.iter().enumerate() {
        let c: Vec<String> = lbox.coords(i).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{} {:.16e} {:.16e}", c.join(" "), z.re, z.im);
    }
    s
}

pub fn parse_vector(lbox: &LatticeBox, text: &str) -> Result<CVec> {
    let d = lbox.dim();
    let mut v = CVec::zeros(lbox.len());
    for (n, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: n + 1, msg };
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != d + 2 {
            return Err(perr(format!("expected {} fields", d + 2)));
        }
        let c = f[..d]
            .iter()
            .map(|s| s.parse::<i64>().map_err(|_| perr(format!("bad coordinate '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        let re = f[d].parse::<f64>().map_err(|_| perr("bad real part".into()))?;
        let im = f[d + 1].parse::<f64>().map_err(|_| perr("bad imaginary part".into()))?;
        let idx = lbox.index(&c).ok_or_else(|| perr(format!("site {c:?} outside the box")))?;
        v[idx] = C64::new(re, im);
    }
    Ok(v)
}
