//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mourre_lab::arc::PhaseArc;
use mourre_lab::dynamics::{
    collar_norm, corollary_quadratic_check, evolve, random_banded_unitary, rate_bounds_check, telescoping_check,
    ArcPreparation, EvolveOptions,
};
use mourre_lab::experiment::{default_profile, ggt_conjugate, perturbation_sites};
use mourre_lab::ggt::{build_ggt, build_ggt_rows, VerblunskySequence};
use mourre_lab::lattice::{conjugate_op, laurent_op, shift_op, Boundary, LatticeBox};
use mourre_lab::linalg::{self, CMat};
use mourre_lab::mourre::{identity_check_laurent, mourre_check, virial_residual, MourreOptions};
use mourre_lab::spectra::{
    arc_filter, essential_arc_compare, jacobi_eig, lap_probe, last_ratio, profile_at, radial_ladder, unitary_eig,
    JacobiOptions,
};
use mourre_lab::symbol::{derived_symbols, ggt_symbol};

// Closed forms of the f_a family, written independently of the library.

/// `f_a(θ) = e^{−iθ}/a − (1 − a^{−2}) / (1 − e^{iθ}/a)`.
fn f_closed(a: f64, t: f64) -> C {
    C::from_polar(1.0 / a, -t) - (1.0 - a.powi(-2)) / (1.0 - C::from_polar(1.0 / a, t))
}

/// `f̂_{−1} = 1/a`, `f̂_l = −(1 − a^{−2}) a^{−l}` for `l ≥ 0`.
fn coeff_closed(a: f64, l: i64) -> f64 {
    match l {
        -1 => 1.0 / a,
        l if l >= 0 => -(1.0 - a.powi(-2)) * a.powi(-(l as i32)),
        _ => 0.0,
    }
}

/// `|f_a'(θ)| = 2|a cos θ − 1| / (a² − 2a cos θ + 1)`.
fn speed_closed(a: f64, t: f64) -> f64 {
    2.0 * (a * t.cos() - 1.0).abs() / (a * a - 2.0 * a * t.cos() + 1.0)
}

fn phase(z: C) -> f64 {
    z.arg().rem_euclid(TAU)
}

fn circ_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Greedy nearest matching after sorting on a circle cut at `cut`.
fn match_phases(a: &[f64], b: &[f64], cut: f64) -> f64 {
    let sorted = |v: &[f64]| {
        let mut s: Vec<f64> = v.iter().map(|t| (t - cut).rem_euclid(TAU)).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    sorted(a).iter().zip(sorted(b).iter()).map(|(x, y)| circ_dist(*x, *y)).fold(0.0, f64::max)
}

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        println!("criterion {id:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, detail));
    }
}

fn criterion_1(r: &mut Report) {
    let n = 63;
    let t0 = Instant::now();
    let b = LatticeBox::line(n, Boundary::Periodic).unwrap();
    let s = unitary_eig(&laurent_op(&b, &ggt_symbol(2.0).unwrap()).unwrap()).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let oracle: Vec<f64> = (0..n).map(|k| phase(f_closed(2.0, TAU * k as f64 / n as f64))).collect();
    // Cut at phase 0: the range of f_2 avoids a neighbourhood of 1 only partly, so try both cuts.
    let err = match_phases(&s.values, &oracle, 0.0).min(match_phases(&s.values, &oracle, PI));
    r.record(1, err < 1e-8 && elapsed < 5.0, format!("max phase error {err:.3e} (tol 1e-8), {elapsed:.2} s (limit 5 s)"));
}

fn criterion_2(r: &mut Report) {
    let n = 63;
    let b = LatticeBox::line(n, Boundary::Periodic).unwrap();
    let h = build_ggt(&b, &VerblunskySequence::constant_for(2.0).unwrap()).unwrap();
    let l = laurent_op(&b, &ggt_symbol(2.0).unwrap()).unwrap();
    let band: Vec<i64> = (-1..).take_while(|&l: &i64| 0.5f64.powi(l as i32) >= 1e-12).collect();
    let (mut diff, mut oracle_err) = (0.0f64, 0.0f64);
    for &d in &band {
        for c in 0..n {
            let row = (c as i64 + d).rem_euclid(n as i64) as usize;
            diff = diff.max((h.matrix()[(row, c)] - l.matrix()[(row, c)]).norm());
            oracle_err = oracle_err.max((h.matrix()[(row, c)] - C::new(coeff_closed(2.0, d), 0.0)).norm());
        }
    }
    let defect = linalg::unitary_defect(h.matrix());
    r.record(
        2,
        diff < 1e-10 && oracle_err < 1e-10 && defect < 1e-10,
        format!("GGT vs Laurent {diff:.3e}, vs closed-form coefficients {oracle_err:.3e} on offsets -1..={}, unitarity defect {defect:.3e}", band[band.len() - 1]),
    );
}

fn criterion_3(r: &mut Report) {
    let (lo, hi) = (TAU / 3.0, 2.0 * TAU / 3.0);
    let mut excursion = 0.0f64;
    let mut counts = Vec::new();
    for n in [127usize, 255] {
        let b = LatticeBox::line(n, Boundary::Periodic).unwrap();
        let s = unitary_eig(&laurent_op(&b, &ggt_symbol(2.0).unwrap()).unwrap()).unwrap();
        for &t in &s.values {
            if !(lo..=hi).contains(&t) {
                excursion = excursion.max(circ_dist(t, lo).min(circ_dist(t, hi)));
            }
        }
        let sp = unitary_eig(&build_ggt(&b, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap()).unwrap();
        let outliers = sp
            .values
            .iter()
            .enumerate()
            .filter(|(k, &t)| {
                let away = !(lo..=hi).contains(&t) && circ_dist(t, lo).min(circ_dist(t, hi)) > 1e-3;
                away && sp.participation_ratio(*k) < 0.2 * n as f64
            })
            .count();
        let lib = essential_arc_compare(&sp, 2.0, 1e-3).unwrap().localized_outliers();
        counts.push((n, outliers, lib));
    }
    let stable = counts[0].1 == counts[1].1 && counts.iter().all(|c| c.1 == c.2);
    r.record(
        3,
        excursion < 1e-8 && stable && counts[0].1 > 0,
        format!("unperturbed excursion from [2pi/3, 4pi/3] {excursion:.3e}; localized outliers {:?} (N, oracle, library)", counts),
    );
}

fn criterion_4(r: &mut Report) {
    let (n, margin, a) = (201usize, 40usize, 2.0);
    let t0 = Instant::now();
    let b = LatticeBox::line(n, Boundary::Open).unwrap();
    let lib = identity_check_laurent(&ggt_symbol(a).unwrap(), &b, margin).unwrap().residual;
    let elapsed = t0.elapsed().as_secs_f64();

    // Oracle: closed-form coefficients of f, i f conj(f)' and a quadrature DFT of f|f'|².
    let m = 4096;
    let samples: Vec<C> = (0..m)
        .map(|k| {
            let t = TAU * k as f64 / m as f64;
            f_closed(a, t) * speed_closed(a, t).powi(2)
        })
        .collect();
    let h = (n / 2) as i64;
    let rhat: Vec<C> = (-2 * h..=2 * h)
        .map(|l| samples.iter().enumerate().map(|(k, v)| v * C::from_polar(1.0, -(l as f64) * TAU * k as f64 / m as f64)).sum::<C>() / m as f64)
        .collect();
    let x = |i: usize| i as i64 - h;
    let av = CMat::from_fn(n, n, |i, j| {
        let d = x(i) - x(j);
        if d == 0 { C::new(0.0, 0.0) } else { C::new(a.powi(-(d.abs() as i32)) * (x(i) + x(j)) as f64 / 2.0, 0.0) }
    });
    let lf = CMat::from_fn(n, n, |i, j| C::new(coeff_closed(a, x(i) - x(j)), 0.0));
    let rr = CMat::from_fn(n, n, |i, j| rhat[(x(i) - x(j) + 2 * h) as usize]);
    let resid = &av * &lf - &lf * &av - rr;
    let frob: f64 = (0..n)
        .filter(|&j| x(j).abs() <= h - margin as i64)
        .map(|j| resid.column(j).norm_squared())
        .sum::<f64>()
        .sqrt();
    r.record(
        4,
        lib < 1e-8 && frob < 1e-8 && elapsed < 30.0,
        format!("windowed residual {lib:.3e}, independent Frobenius bound {frob:.3e} (tol 1e-8), {elapsed:.2} s (limit 30 s)"),
    );
}

fn criterion_5(r: &mut Report) {
    let c_oracle = speed_closed(2.0, PI).powi(2);
    let n = 201;
    let p = LatticeBox::line(n, Boundary::Periodic).unwrap();
    let o = p.with_boundary(Boundary::Open);
    let arc = PhaseArc::new(PI - 0.3, PI + 0.3).unwrap();
    let f = ggt_symbol(2.0).unwrap();
    let ds = derived_symbols(&f).unwrap();
    let opts = |support| MourreOptions { threshold: c_oracle - 0.1, collar: 40, support, visibility: 1e-2 };

    let u = laurent_op(&p, &f).unwrap();
    let a = conjugate_op(&o, &ds.velocity).unwrap();
    let filt = arc_filter(&unitary_eig(&u).unwrap(), &arc, 0.29).unwrap();
    let lr = mourre_check(&u, &a, &filt, (c_oracle, 4.0), &opts(vec![])).unwrap();

    let prof = default_profile(2.0).unwrap();
    let h = build_ggt(&p, &prof.sequence().unwrap()).unwrap();
    let ag = ggt_conjugate(&o, 2.0).unwrap();
    let gf = arc_filter(&unitary_eig(&h).unwrap(), &arc, 0.29).unwrap();
    let gr = mourre_check(&h, &ag, &gf, (c_oracle, 4.0), &opts(perturbation_sites(&p, &prof))).unwrap();
    let below = gr.deficient_below(c_oracle - 0.1);
    let min_mass = gr.deficient.iter().map(|d| d.localized_mass).fold(1.0, f64::min);
    r.record(
        5,
        lr.windowed_min >= c_oracle - 0.05 && below <= 10 && min_mass >= 0.99,
        format!(
            "Laurent windowed lambda_min {:.4} (>= 4/9 - 0.05 = {:.4}; unwindowed {:.3} from the periodic seam); GGT: {below} eigenvalues below 4/9 - 0.1, min localized mass {min_mass:.4}",
            lr.windowed_min,
            c_oracle - 0.05,
            lr.lambda_min
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let mut worst = 0.0f64;
    let mut tested = 0;
    for n in [127usize, 255] {
        let p = LatticeBox::line(n, Boundary::Periodic).unwrap();
        let o = p.with_boundary(Boundary::Open);
        let u = build_ggt(&p, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap();
        let a = ggt_conjugate(&o, 2.0).unwrap();
        let s = unitary_eig(&u).unwrap();
        for out in essential_arc_compare(&s, 2.0, 1e-3).unwrap().outliers {
            let v = s.vector(out.index);
            if collar_norm(&o, &v, 10) < 1e-10 {
                tested += 1;
                worst = worst.max(virial_residual(&u, &a, &v, out.phase).unwrap());
            }
        }
    }
    r.record(6, tested > 0 && worst < 1e-6, format!("{tested} outlier eigenpairs, max |<psi, (U*AU - A) psi>| = {worst:.3e} (tol 1e-6)"));
}

fn criterion_7(r: &mut Report) {
    let t0 = Instant::now();
    let b = LatticeBox::line(1025, Boundary::Open).unwrap();
    let u = laurent_op(&b, &ggt_symbol(2.0).unwrap()).unwrap();
    let trace = evolve(&u, &b.basis(&[0]).unwrap(), &EvolveOptions::new(400)).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let rate = trace.rate_fit.map_or(f64::NAN, |f| f.slope);
    let m = 1 << 14;
    let oracle = ((0..m).map(|k| speed_closed(2.0, TAU * k as f64 / m as f64).powi(2)).sum::<f64>() / m as f64).sqrt();
    let rel = (rate - oracle).abs() / oracle;

    let b2 = LatticeBox::new(&[65, 65], Boundary::Open).unwrap();
    let t = shift_op(&b2, &[1, 1]).unwrap();
    let tr2 = evolve(&t, &b2.basis(&[0, 0]).unwrap(), &EvolveOptions::new(400)).unwrap();
    let rate2 = tr2.rate_fit.map_or(f64::NAN, |f| f.slope);
    let rel2 = (rate2 - 2f64.sqrt()).abs() / 2f64.sqrt();
    r.record(
        7,
        rel < 0.02 && elapsed < 60.0 && rel2 < 0.01,
        format!(
            "L_f2 rate {rate:.5} vs ||L_|f'| e_0|| = {oracle:.5} (rel {rel:.2e}, tol 2%) over n <= {} in {elapsed:.2} s; d = 2 translation rate {rate2:.5} vs sqrt 2 (rel {rel2:.2e}, tol 1%) over n <= {}",
            trace.wrap_horizon, tr2.wrap_horizon
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let f = ggt_symbol(2.0).unwrap();
    let sup = (0..4096).map(|k| speed_closed(2.0, TAU * k as f64 / 4096.0).powi(2)).fold(0.0, f64::max);

    let b = LatticeBox::line(1025, Boundary::Open).unwrap();
    let u = laurent_op(&b, &f).unwrap();
    let plain = rate_bounds_check(&u, &f, &b.basis(&[0]).unwrap(), None, 400, 0.05, 1e-10).unwrap();

    let n = 401;
    let p = LatticeBox::line(n, Boundary::Periodic).unwrap();
    let o = p.with_boundary(Boundary::Open);
    let arc = PhaseArc::new(2.6, 3.6).unwrap();
    let s = unitary_eig(&laurent_op(&p, &f).unwrap()).unwrap();
    let filt = arc_filter(&s, &arc, 0.45 * arc.width()).unwrap();
    let prep = ArcPreparation { arc, filter: filt.op.matrix().clone(), grid: 4096 };
    let uo = laurent_op(&o, &f).unwrap();
    let filtered = rate_bounds_check(&uo, &f, &o.basis(&[0]).unwrap(), Some(&prep), 400, 0.05, 1e-4).unwrap();

    // Oracle constants: extremes of |f'|² over the preimage of the arc.
    let (mut c, mut cc) = (f64::INFINITY, 0.0f64);
    for k in 0..1 << 16 {
        let t = TAU * k as f64 / (1 << 16) as f64;
        if (2.6..=3.6).contains(&phase(f_closed(2.0, t))) {
            let g = speed_closed(2.0, t).powi(2);
            c = c.min(g);
            cc = cc.max(g);
        }
    }
    let norm = filtered.state_norm;
    let (lo, hi) = (c.sqrt() * norm * 0.95, cc.sqrt() * norm * 1.05);
    let upper_ok = plain.upper_pass && filtered.upper_pass;
    let comm_ok = (plain.commutator_norm - sup).abs() / sup < 0.01;
    let window_ok = filtered.measured >= lo && filtered.measured <= hi;
    r.record(
        8,
        upper_ok && comm_ok && window_ok,
        format!(
            "e_0: rate {:.4} <= {:.4} (||[A,U]|| = {:.4} vs sup|f'|^2 = {sup:.4}); filtered: rate {:.4} in [{lo:.4}, {hi:.4}] and <= {:.4}",
            plain.measured, plain.upper_bound, plain.commutator_norm, filtered.measured, filtered.upper_bound
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut note = |res: f64| {
        worst = worst.max(res);
        cases += 1;
    };

    let b = LatticeBox::line(41, Boundary::Open).unwrap();
    let t = shift_op(&b, &[1]).unwrap();
    let e0 = b.basis(&[0]).unwrap();
    let ts = telescoping_check(&t, &e0, 10, 1e-12).unwrap();
    let closed = (ts.forward_lhs - 100.0).abs().max((ts.forward_rhs - 100.0).abs()).max((ts.backward_rhs - 100.0).abs());
    note(ts.residual.max(closed));

    let b201 = LatticeBox::line(201, Boundary::Open).unwrap();
    let e = b201.basis(&[0]).unwrap();
    note(telescoping_check(&laurent_op(&b201, &ggt_symbol(2.0).unwrap()).unwrap(), &e, 5, 1e-10).unwrap().residual);
    let seq = default_profile(2.0).unwrap().sequence().unwrap();
    let cut = ((1e-15f64).ln() / seq.sup_inv_a().ln()).ceil() as usize + 1;
    note(telescoping_check(&build_ggt_rows(&b201, &seq, cut, 1e-15).unwrap(), &e, 5, 1e-10).unwrap().residual);
    let b101 = LatticeBox::line(101, Boundary::Open).unwrap();
    for seed in 1..=5 {
        let u = random_banded_unitary(&b101, seed).unwrap();
        note(telescoping_check(&u, &b101.basis(&[3]).unwrap(), 20, 1e-12).unwrap().residual);
    }

    let ns: Vec<i64> = (-10..=10).collect();
    note(corollary_quadratic_check(&t, &e0, &ns, 1e-12).unwrap().residual);
    let mix = (b.basis(&[0]).unwrap() + b.basis(&[2]).unwrap().scale(2.0)).unscale(5f64.sqrt());
    let q = corollary_quadratic_check(&t, &mix, &ns, 1e-12).unwrap();
    // Oracle: ‖Tⁿψ‖_X² − ‖ψ‖_X² = n² + 2n⟨x⟩ with ⟨x⟩ = 4/5·2.
    let closed_q = q.rows.iter().map(|&(n, lhs, _)| (lhs - (n * n) as f64 - 2.0 * n as f64 * 1.6).abs()).fold(0.0, f64::max);
    note(q.residual.max(closed_q));
    let b2 = LatticeBox::new(&[21, 21], Boundary::Open).unwrap();
    let t2 = shift_op(&b2, &[1, 1]).unwrap();
    note(corollary_quadratic_check(&t2, &b2.basis(&[1, -2]).unwrap(), &(-5..=5).collect::<Vec<_>>(), 1e-12).unwrap().residual);

    r.record(9, worst < 1e-8 && closed < 1e-12, format!("{cases} cases, max residual {worst:.3e} (tol 1e-8); T-shift value at n = 10: {}", ts.forward_lhs));
}

fn criterion_10(r: &mut Report) {
    let k_max = (127f64 / 2.0).log2().floor() as u32;
    let radii = radial_ladder(k_max);
    let mid = PI - 0.4;
    let mut last = Vec::new();
    let mut ratios = Vec::new();
    let mut spread = 0.0f64;
    for n in [127usize, 255] {
        let p = LatticeBox::line(n, Boundary::Periodic).unwrap();
        let u = build_ggt(&p, &default_profile(2.0).unwrap().sequence().unwrap()).unwrap();
        let a = ggt_conjugate(&p.with_boundary(Boundary::Open), 2.0).unwrap();
        let s = unitary_eig(&u).unwrap();
        let outlier = essential_arc_compare(&s, 2.0, 1e-3).unwrap().outliers[0].phase;
        let rows = lap_probe(&u, &a, &[mid, outlier], &radii).unwrap();
        let prof = profile_at(&rows, mid);
        ratios.push(last_ratio(&prof));
        last.push(prof[prof.len() - 1].norm);
        let scaled: Vec<f64> = profile_at(&rows, outlier).iter().map(|x| x.norm * (1.0 - x.radius)).collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        spread = spread.max(hi / lo);
    }
    let change = (last[1] - last[0]).abs() / last[0];
    r.record(
        10,
        ratios.iter().all(|&x| x < 1.2) && change < 0.1 && spread <= 2.0,
        format!(
            "mid-arc last ratios {:.3}/{:.3} (< 1.2), k = {k_max} norm {:.4} -> {:.4} (change {:.2}%, < 10%); outlier norm*(1-|z|) spread {spread:.3} (<= 2)",
            ratios[0], ratios[1], last[0], last[1], 100.0 * change
        ),
    );
}

/// Number of eigenvalues below `sigma` from the pivots of `LDL*` of `M − σI`.
fn inertia_below(m: &CMat, sigma: f64) -> usize {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= C::new(sigma, 0.0);
    }
    let mut neg = 0;
    for k in 0..n {
        let mut piv = a[(k, k)].re;
        if piv == 0.0 {
            piv = -1e-300;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let l = a[(i, k)] / piv;
            for j in k + 1..n {
                let t = l * a[(k, j)];
                a[(i, j)] -= t;
            }
        }
    }
    neg
}

fn bisection_eigs(m: &CMat) -> Vec<f64> {
    let bound: f64 = m.iter().map(|z| z.norm()).sum::<f64>() + 1.0;
    (0..m.nrows())
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if inertia_below(m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn criterion_11(r: &mut Report) {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = C::new(rng.random_range(-1.0..1.0), 0.0);
            for j in i + 1..4 {
                let z = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let (vals, _) = jacobi_eig(&m, JacobiOptions::default()).unwrap();
        let oracle = bisection_eigs(&m);
        for (x, y) in vals.iter().zip(&oracle) {
            worst = worst.max((x - y).abs());
        }
    }
    r.record(11, worst < 1e-10, format!("100 seeded 4x4 Hermitian matrices, max |Jacobi - bisection| = {worst:.3e} (tol 1e-10)"));
}

fn criterion_12(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.conf");
    std::fs::write(&cfg, "kind = verify\nseed = 12\n").unwrap();
    let mut bodies = Vec::new();
    let mut statuses = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let st = Command::new(env!("CARGO_BIN_EXE_mourre-lab"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        statuses.push(st.status.code());
        bodies.push(std::fs::read(out.join("verify.json")).unwrap_or_default());
    }
    let same = !bodies[0].is_empty() && bodies[0] == bodies[1];
    r.record(12, same && statuses.iter().all(|s| *s == Some(0)), format!("two verify runs: exit codes {statuses:?}, artifacts identical: {same} ({} bytes)", bodies[0].len()));
}

fn main() -> ExitCode {
    let mut r = Report { lines: Vec::new() };
    let all: [fn(&mut Report); 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    for (i, c) in all.iter().enumerate() {
        let t0 = Instant::now();
        c(&mut r);
        eprintln!("  criterion {} took {:.2} s", i + 1, t0.elapsed().as_secs_f64());
    }
    let failed: Vec<usize> = r.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!("acceptance: {} of {} criteria pass", r.lines.len() - failed.len(), r.lines.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
