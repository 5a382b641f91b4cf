//! Dense complex kernels shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Column-blocked product `a * b`; output columns are computed independently.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k) = a.shape();
    let n = b.ncols();
    let mut out = CMat::zeros(m, n);
    if m == 0 || n == 0 {
        return out;
    }
    let a_data = a.as_slice();
    par::for_each_chunk(out.as_mut_slice(), m, |j, col| {
        for l in 0..k {
            let s = b[(l, j)];
            if s == ZERO {
                continue;
            }
            let a_col = &a_data[l * m..(l + 1) * m];
            for (c, &x) in col.iter_mut().zip(a_col) {
                *c += x * s;
            }
        }
    });
    out
}

/// `a * v` split over row blocks.
pub fn matvec(a: &CMat, v: &CVec) -> CVec {
    assert_eq!(a.ncols(), v.len(), "matvec shape mismatch");
    let m = a.nrows();
    let mut out = CVec::zeros(m);
    let data = a.as_slice();
    const BLOCK: usize = 128;
    par::for_each_chunk(out.as_mut_slice(), BLOCK, |b, rows| {
        let r0 = b * BLOCK;
        for (j, &s) in v.iter().enumerate() {
            if s == ZERO {
                continue;
            }
            let col = &data[j * m + r0..j * m + r0 + rows.len()];
            for (y, &x) in rows.iter_mut().zip(col) {
                *y += x * s;
            }
        }
    });
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint()
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    matmul(a, b) - matmul(b, a)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |M*M − I|`.
pub fn unitary_defect(m: &CMat) -> f64 {
    let g = matmul(&m.adjoint(), m);
    max_abs_diff(&g, &CMat::identity(m.nrows(), m.ncols()))
}

/// `max |M − M*|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

/// `max |MM* − M*M|`.
pub fn normality_defect(m: &CMat) -> f64 {
    let a = m.adjoint();
    max_abs_diff(&matmul(m, &a), &matmul(&a, m))
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

pub fn norm(v: &CVec) -> f64 {
    v.norm()
}

fn probe_vector(n: usize) -> CVec {
    CVec::from_fn(n, |i, _| {
        let t = i as f64;
        C64::new((0.7 * t + 0.3).cos() + 1.1, (1.3 * t + 0.1).sin())
    })
}

/// Largest singular value by power iteration on `M*M`.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let ms = m / C64::new(scale, 0.0);
    let ma = ms.adjoint();
    let mut v = probe_vector(ms.ncols());
    v /= C64::new(v.norm(), 0.0);
    let mut est = 0.0;
    for it in 0..4000 {
        let w = matvec(&ms, &v);
        let s = w.norm();
        let mut z = matvec(&ma, &w);
        let zn = z.norm();
        if zn == 0.0 {
            return 0.0;
        }
        z /= C64::new(zn, 0.0);
        v = z;
        if it > 3 && (s - est).abs() <= 1e-14 * s {
            est = s;
            break;
        }
        est = s;
    }
    est.max(matvec(&ms, &v).norm()) * scale
}

/// Solves `m x = b` by LU with partial pivoting.
pub fn solve(m: &CMat, b: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}x{} system", m.nrows(), m.ncols())))
}

/// Columns of `m` indexed by `cols`.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Submatrix on `rows × cols`.
pub fn submatrix(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Principal angle of `z`, in `[0, 2π)`.
pub fn phase(z: C64) -> f64 {
    normalize_phase(z.im.atan2(z.re))
}

pub fn normalize_phase(t: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = t.rem_euclid(two_pi);
    if r >= two_pi {
        0.0
    } else {
        r
    }
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = normalize_phase(a - b);
    d.min(std::f64::consts::TAU - d)
}
