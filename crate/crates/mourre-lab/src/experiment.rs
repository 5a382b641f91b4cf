//! Runs a configured experiment and writes its artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::arc::PhaseArc;
use crate::config::{ExperimentConfig, InitialState, Kind, SymbolSource};
use crate::dynamics::{
    band_horizon, corollary_quadratic_check, evolve, random_banded_unitary, rate_bounds_check, support_margin,
    telescoping_check, ArcPreparation, EvolveOptions, Observable, BAND_TOL,
};
use crate::error::{Error, Result};
use crate::ggt::{build_ggt, build_ggt_rows, PerturbationProfile, VerblunskySequence};
use crate::lattice::{conjugate_op, conjugate_op_ggt, laurent_op, parse_vector, shift_op, Boundary, LatticeBox, LatticeOperator};
use crate::linalg::{self, CVec, C64};
use crate::mourre::{identity_check_laurent, mourre_check, mourre_constant, qf_identity_residual, MourreOptions};
use crate::spectra::{arc_filter, essential_arc_compare, unitary_eig, SpectralData};
use crate::symbol::{derived_symbols, ggt_symbol, Symbol};

/// Grid used for the symbol-side Mourre constants.
pub const CONSTANT_GRID: usize = 4096;
/// Default Mourre window: around phase π.
pub const MOURRE_ARC: (f64, f64) = (std::f64::consts::PI - 0.3, std::f64::consts::PI + 0.3);
pub const MOURRE_SMOOTHING: f64 = 0.29;
pub const MOURRE_COLLAR: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub key: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Assertion {
    /// Passes when `value < bound`; NaN fails.
    pub fn below(key: &str, value: f64, bound: f64) -> Self {
        Self { key: key.into(), value, bound, pass: value < bound }
    }

    /// Passes when `value ≥ bound`; NaN fails.
    pub fn at_least(key: &str, value: f64, bound: f64) -> Self {
        Self { key: key.into(), value, bound, pass: value >= bound }
    }

    pub fn summary(&self) -> String {
        format!("{} {} value={:.6e} bound={:.6e}", if self.pass { "PASS" } else { "FAIL" }, self.key, self.value, self.bound)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn first_failure(&self) -> Option<&Assertion> {
        self.assertions.iter().find(|a| !a.pass)
    }
}

pub fn load_symbol(cfg: &ExperimentConfig) -> Result<Symbol> {
    match &cfg.symbol {
        SymbolSource::Ggt(a) => ggt_symbol(*a),
        SymbolSource::File(p) => Symbol::from_text(&std::fs::read_to_string(p)?),
    }
}

fn symbol_a(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.symbol {
        SymbolSource::Ggt(a) => Ok(a),
        SymbolSource::File(_) => Err(Error::Refused("GGT experiments need symbol.a".into())),
    }
}

/// `α_∞ = √(1 − a^{−2})` with `u_0 = −1.6`, `u_1 = −0.5`: two localized outliers.
pub fn default_profile(a: f64) -> Result<PerturbationProfile> {
    let alpha_inf = VerblunskySequence::constant_for(a)?.tail();
    let mut p = PerturbationProfile::unperturbed(alpha_inf, (0, 1));
    p.u.insert(0, C64::new(-1.6, 0.0));
    p.u.insert(1, C64::new(-0.5, 0.0));
    Ok(p)
}

pub fn load_profile(cfg: &ExperimentConfig) -> Result<Option<PerturbationProfile>> {
    cfg.profile.as_ref().map(|p| PerturbationProfile::from_text(&std::fs::read_to_string(p)?)).transpose()
}

/// Sites carrying a perturbation of the profile.
pub fn perturbation_sites(lbox: &LatticeBox, p: &PerturbationProfile) -> Vec<usize> {
    let keys: std::collections::BTreeSet<i64> = p.u.keys().chain(p.v.keys()).chain(p.w.keys()).copied().collect();
    keys.into_iter().filter_map(|k| lbox.index(&[k])).collect()
}

/// Smallest series cut of `A_a` with `a^{−cut}·N < 1e−13`.
pub fn ggt_conjugate(lbox: &LatticeBox, a: f64) -> Result<LatticeOperator> {
    let cut = ((lbox.len() as f64 / 1e-13).ln() / a.ln()).ceil() as usize + 1;
    conjugate_op_ggt(lbox, a, cut, 1e-13)
}

pub fn initial_state(cfg: &ExperimentConfig, lbox: &LatticeBox) -> Result<CVec> {
    match &cfg.psi0 {
        InitialState::Site(c) => lbox.basis(c),
        InitialState::File(p) => parse_vector(lbox, &std::fs::read_to_string(p)?),
    }
}

/// Largest pairing error between two multisets of phases.
pub fn phase_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    // Cut the circle in the middle of the widest empty gap so no pair straddles it.
    let mut all: Vec<f64> = a.iter().chain(b).map(|&t| linalg::normalize_phase(t)).collect();
    all.sort_by(f64::total_cmp);
    let mut cut = (all[0] + std::f64::consts::TAU + all[all.len() - 1]) / 2.0;
    let mut widest = all[0] + std::f64::consts::TAU - all[all.len() - 1];
    for w in all.windows(2) {
        if w[1] - w[0] > widest {
            widest = w[1] - w[0];
            cut = (w[0] + w[1]) / 2.0;
        }
    }
    let unwrap = |v: &[f64]| {
        let mut s: Vec<f64> = v.iter().map(|&t| linalg::normalize_phase(t - cut)).collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let (x, y) = (unwrap(a), unwrap(b));
    x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// `arg f(2πk/N)` at every site of a periodic box.
pub fn symbol_sample_phases(f: &Symbol, lbox: &LatticeBox) -> Vec<f64> {
    (0..lbox.len())
        .map(|i| {
            let theta: Vec<f64> = lbox
                .coords(i)
                .iter()
                .zip(lbox.sides())
                .map(|(&k, &n)| std::f64::consts::TAU * k as f64 / n as f64)
                .collect();
            linalg::phase(f.eval(&theta))
        })
        .collect()
}

fn header(cfg: &ExperimentConfig) -> String {
    cfg.resolved().lines().map(|l| format!("# {l}\n")).collect()
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_artifact(out: &Path, name: &str, body: &str, outcome: &mut Outcome) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    std::fs::write(&path, body)?;
    outcome.artifacts.push(path);
    Ok(())
}

fn write_json(out: &Path, name: &str, cfg: &ExperimentConfig, mut map: Map<String, Value>, outcome: &mut Outcome) -> Result<()> {
    map.insert("config".into(), Value::String(cfg.resolved()));
    let body = serde_json::to_string_pretty(&Value::Object(map)).map_err(|e| Error::Io(e.to_string()))? + "\n";
    write_artifact(out, name, &body, outcome)
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn spectrum_csv(cfg: &ExperimentConfig, s: &SpectralData) -> String {
    let mut t = header(cfg);
    t.push_str("index,phase,modulus_defect,participation_ratio\n");
    for k in 0..s.len() {
        let _ = writeln!(t, "{k},{},{},{}", sci(s.values[k]), sci(s.modulus_defect[k]), sci(s.participation_ratio(k)));
    }
    t
}

fn sides_box(cfg: &ExperimentConfig, boundary: Boundary) -> Result<LatticeBox> {
    LatticeBox::new(&cfg.sides, boundary)
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    match cfg.kind {
        Kind::Spectrum => run_spectrum(cfg, out, &mut outcome)?,
        Kind::Ggt => run_ggt(cfg, out, &mut outcome)?,
        Kind::Mourre => run_mourre(cfg, out, &mut outcome)?,
        Kind::Propagate => run_propagate(cfg, out, &mut outcome)?,
        Kind::Verify => run_verify(cfg, out, &mut outcome)?,
    }
    Ok(outcome)
}

fn run_spectrum(cfg: &ExperimentConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let lbox = sides_box(cfg, cfg.boundary)?;
    let f = load_symbol(cfg)?;
    let u = laurent_op(&lbox, &f)?;
    let s = unitary_eig(&u)?;
    write_artifact(out, "spectrum.csv", &spectrum_csv(cfg, &s), outcome)?;
    if lbox.boundary() == Boundary::Periodic {
        let d = phase_multiset_distance(&s.values, &symbol_sample_phases(&f, &lbox));
        outcome.assertions.push(Assertion::below("spectrum.symbol_match", d, cfg.tolerances.eig));
    }
    outcome.assertions.push(Assertion::below("spectrum.residual", s.residual, cfg.tolerances.eig));
    Ok(())
}

fn run_ggt(cfg: &ExperimentConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let a = symbol_a(cfg)?;
    let lbox = sides_box(cfg, Boundary::Periodic)?;
    let profile = match load_profile(cfg)? {
        Some(p) => p,
        None => default_profile(a)?,
    };
    let seq = profile.sequence()?;
    let a_inf = seq.a_inf();
    let u = build_ggt(&lbox, &seq)?;
    let s = unitary_eig(&u)?;
    let cmp = essential_arc_compare(&s, a_inf, 1e-3)?;
    write_artifact(out, "spectrum.csv", &spectrum_csv(cfg, &s), outcome)?;
    let mut m = Map::new();
    m.insert("a_inf".into(), num(a_inf));
    m.insert("arc_low".into(), num(cmp.arc.low()));
    m.insert("arc_high".into(), num(cmp.arc.high()));
    m.insert("unitary_defect".into(), num(u.diagnostic("unitary_defect").unwrap_or(f64::NAN)));
    m.insert("inside".into(), cmp.inside.into());
    m.insert("outside".into(), cmp.outside.into());
    m.insert("unclassified".into(), cmp.unclassified.into());
    m.insert("localized_outliers".into(), cmp.localized_outliers().into());
    for (i, o) in cmp.outliers.iter().enumerate() {
        m.insert(format!("outlier_{i}_phase"), num(o.phase));
        m.insert(format!("outlier_{i}_participation_ratio"), num(o.participation_ratio));
    }
    write_json(out, "ggt.json", cfg, m, outcome)?;
    outcome.assertions.push(Assertion::below("ggt.unitary", linalg::unitary_defect(u.matrix()), 1e-10));
    let delocalized = (cmp.outliers.len() - cmp.localized_outliers()) as f64;
    outcome.assertions.push(Assertion::below("ggt.outliers_localized", delocalized, 0.5));
    Ok(())
}

fn run_mourre(cfg: &ExperimentConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let periodic = sides_box(cfg, Boundary::Periodic)?;
    let open = periodic.with_boundary(Boundary::Open);
    let arc = match cfg.arc {
        Some(a) => a,
        None => PhaseArc::new(MOURRE_ARC.0, MOURRE_ARC.1)?,
    };
    let smoothing = MOURRE_SMOOTHING.min(arc.width() / 2.0 * 0.97);
    let profile = load_profile(cfg)?;
    let (u, a_op, f, support) = match &profile {
        Some(p) => {
            let seq = p.sequence()?;
            let a = seq.a_inf();
            (build_ggt(&periodic, &seq)?, ggt_conjugate(&open, a)?, ggt_symbol(a)?, perturbation_sites(&periodic, p))
        }
        None => {
            let f = load_symbol(cfg)?;
            let ds = derived_symbols(&f)?;
            (laurent_op(&periodic, &f)?, conjugate_op(&open, &ds.velocity)?, f, Vec::new())
        }
    };
    let ds = derived_symbols(&f)?;
    let (c, cc) = mourre_constant(&f, &arc, &ds.grad_sq, CONSTANT_GRID)?;
    let s = unitary_eig(&u)?;
    let filter = arc_filter(&s, &arc, smoothing)?;
    let opts = MourreOptions { threshold: c - 0.1, collar: MOURRE_COLLAR, support, visibility: 1e-2 };
    let r = mourre_check(&u, &a_op, &filter, (c, cc), &opts)?;
    let mut m = Map::new();
    for (k, v) in [
        ("arc_low", arc.low()),
        ("arc_high", arc.high()),
        ("smoothing", smoothing),
        ("c_lower", c),
        ("c_upper", cc),
        ("lambda_min", r.lambda_min),
        ("lambda_max", r.lambda_max),
        ("windowed_min", r.windowed_min),
        ("windowed_max", r.windowed_max),
        ("threshold", r.threshold),
    ] {
        m.insert(k.into(), num(v));
    }
    m.insert("rank".into(), r.rank.into());
    m.insert("windowed_rank".into(), r.windowed_rank.into());
    m.insert("collar".into(), r.collar.into());
    m.insert("deficient".into(), r.deficient.len().into());
    let min_mass = r.deficient.iter().map(|d| d.localized_mass).fold(1.0, f64::min);
    m.insert("deficient_min_mass".into(), num(min_mass));
    write_json(out, "mourre.json", cfg, m, outcome)?;
    outcome.assertions.push(Assertion::at_least("mourre.windowed_min", r.windowed_min, c - 0.05));
    outcome.assertions.push(Assertion::below("mourre.deficient_count", r.deficient.len() as f64, 10.5));
    outcome.assertions.push(Assertion::at_least("mourre.deficient_localized", min_mass, 0.99));
    Ok(())
}

fn run_propagate(cfg: &ExperimentConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let open = sides_box(cfg, Boundary::Open)?;
    let psi0 = initial_state(cfg, &open)?;
    let profile = load_profile(cfg)?;
    let f = load_symbol(cfg)?;
    let u = match &profile {
        Some(p) => {
            let seq = p.sequence()?;
            let cut = ((1e-15f64).ln() / seq.sup_inv_a().ln()).ceil() as usize + 1;
            build_ggt_rows(&open, &seq, cut, 1e-15)?
        }
        None => laurent_op(&open, &f)?,
    };
    let mut opts = EvolveOptions::new(cfg.n_max);
    opts.leak_tol = cfg.tolerances.leak;
    opts.rage = Some(Observable::central(&open, 5));
    let prep = match (&cfg.arc, &profile) {
        (Some(arc), None) => {
            let s = unitary_eig(&laurent_op(&open.with_boundary(Boundary::Periodic), &f)?)?;
            let filter = arc_filter(&s, arc, 0.45 * arc.width())?;
            Some(ArcPreparation { arc: *arc, filter: filter.op.into_matrix(), grid: CONSTANT_GRID })
        }
        _ => None,
    };
    opts.arc_filter = prep.as_ref().map(|p| p.filter.clone());
    let trace = evolve(&u, &psi0, &opts)?;
    let mut t = header(cfg);
    t.push_str("n,x_norm,plain_norm,rage_partial,arc_weight\n");
    let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
    for s in &trace.steps {
        let _ = writeln!(t, "{},{},{},{},{}", s.n, sci(s.x_norm), sci(s.plain_norm), opt(s.rage_partial), opt(s.arc_weight));
    }
    write_artifact(out, "trace.csv", &t, outcome)?;
    let mut m = Map::new();
    m.insert("wrap_horizon".into(), trace.wrap_horizon.into());
    m.insert("band_horizon".into(), trace.band_horizon.into());
    m.insert("bandwidth".into(), trace.bandwidth.into());
    m.insert("leak_stopped".into(), trace.leak_stopped.into());
    if let Some(fit) = trace.rate_fit {
        m.insert("trace_rate".into(), num(fit.slope));
        m.insert("trace_intercept".into(), num(fit.intercept));
    }
    if profile.is_none() {
        let r = rate_bounds_check(&u, &f, &psi0, prep.as_ref(), cfg.n_max, cfg.tolerances.rate_slack, cfg.tolerances.leak)?;
        m.insert("commutator_norm".into(), num(r.commutator_norm));
        m.insert("upper_bound".into(), num(r.upper_bound));
        m.insert("measured".into(), num(r.measured));
        m.insert("state_norm".into(), num(r.state_norm));
        outcome.assertions.push(Assertion::below("propagate.rate_upper", r.measured, r.upper_bound * (1.0 + r.slack)));
        if let (Some((lo, hi)), Some((c, cc))) = (r.window, r.constants) {
            m.insert("window_low".into(), num(lo));
            m.insert("window_high".into(), num(hi));
            m.insert("c_lower".into(), num(c));
            m.insert("c_upper".into(), num(cc));
            outcome.assertions.push(Assertion::at_least("propagate.rate_window_low", r.measured, lo * (1.0 - r.slack)));
            outcome.assertions.push(Assertion::below("propagate.rate_window_high", r.measured, hi * (1.0 + r.slack)));
        }
    }
    write_json(out, "rate.json", cfg, m, outcome)?;
    outcome.assertions.push(Assertion::at_least("propagate.steps", trace.rate_fit.map_or(0.0, |_| trace.steps.len() as f64), 32.0));
    Ok(())
}

/// The identity battery behind `kind = verify`, as `(key, residual, tolerance)`.
pub fn verify_battery(cfg: &ExperimentConfig) -> Result<Vec<Assertion>> {
    let tol = &cfg.tolerances;
    let f = load_symbol(cfg)?;
    let periodic = sides_box(cfg, Boundary::Periodic)?;
    let open = periodic.with_boundary(Boundary::Open);
    let mut checks = Vec::new();

    let up = laurent_op(&periodic, &f)?;
    let s = unitary_eig(&up)?;
    let d = phase_multiset_distance(&s.values, &symbol_sample_phases(&f, &periodic));
    checks.push(Assertion::below("verify.circulant", d, tol.eig));

    if let (SymbolSource::Ggt(a), 1) = (&cfg.symbol, periodic.dim()) {
        let h = build_ggt(&periodic, &VerblunskySequence::constant_for(*a)?)?;
        checks.push(Assertion::below("verify.ggt_laurent", linalg::max_abs_diff(h.matrix(), up.matrix()), 1e-10));
        checks.push(Assertion::below("verify.ggt_unitary", linalg::unitary_defect(h.matrix()), 1e-10));
    }

    let ds = derived_symbols(&f)?;
    checks.push(Assertion::below("verify.velocity_real", ds.imaginary_defect, 1e-10));
    let id = identity_check_laurent(&f, &open, cfg.margin)?;
    checks.push(Assertion::below("verify.commutator_identity", id.residual, tol.identity));

    let origin = vec![0i64; open.dim()];
    let e0 = open.basis(&origin)?;
    let mut step = vec![0i64; open.dim()];
    step[0] = 1;
    let t = shift_op(&open, &step)?;
    let ts = telescoping_check(&t, &e0, 10, tol.leak)?;
    checks.push(Assertion::below("verify.telescoping_shift", ts.residual.max((ts.forward_lhs - 100.0).abs()), tol.telescoping));
    let q = corollary_quadratic_check(&t, &e0, &(-10..=10).collect::<Vec<_>>(), tol.leak)?;
    checks.push(Assertion::below("verify.quadratic_shift", q.residual, tol.telescoping));

    let uo = laurent_op(&open, &f)?;
    let tl = telescoping_check(&uo, &e0, 5, tol.leak)?;
    checks.push(Assertion::below("verify.telescoping_laurent", tl.residual, tol.telescoping));

    let a_op = conjugate_op(&open, &ds.velocity)?;
    let mut one = origin.clone();
    one[0] = 1;
    let qf = qf_identity_residual(&uo, &a_op, &e0, &open.basis(&one)?)?;
    checks.push(Assertion::below("verify.qf_identity", qf, tol.identity));

    if let (Some(seed), 1) = (cfg.seed, open.dim()) {
        let r = random_banded_unitary(&open, seed)?;
        let tr = telescoping_check(&r, &e0, 20, tol.leak)?;
        checks.push(Assertion::below("verify.telescoping_random", tr.residual, tol.telescoping));
    }
    Ok(checks)
}

fn run_verify(cfg: &ExperimentConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let checks = verify_battery(cfg)?;
    let mut m = Map::new();
    for c in &checks {
        let key = c.key.trim_start_matches("verify.");
        m.insert(key.into(), num(c.value));
        m.insert(format!("{key}_tol"), num(c.bound));
        m.insert(format!("{key}_pass"), c.pass.into());
    }
    m.insert("checks".into(), checks.len().into());
    write_json(out, "verify.json", cfg, m, outcome)?;
    outcome.assertions.extend(checks);
    Ok(())
}

/// Rough dense cost of an `n`-site eigensolve or product, in GFlop.
fn dense_cost(n: usize) -> f64 {
    30.0 * (n as f64).powi(3) / 1e9
}

/// The plan for a config: operators, checks and cost estimates. Nothing is solved.
pub fn describe(cfg: &ExperimentConfig) -> Result<String> {
    let mut s = String::new();
    let n: usize = cfg.sides.iter().product();
    let _ = writeln!(s, "experiment {} on box {:?} ({} sites)", cfg.kind.name(), cfg.sides, n);
    let mut steps: BTreeMap<usize, String> = BTreeMap::new();
    let mut add = |s: String| {
        let k = steps.len();
        steps.insert(k, s);
    };
    match cfg.kind {
        Kind::Spectrum => {
            add(format!("build L_f on the {} box", cfg.boundary.name()));
            add(format!("unitary eigensolve (~{:.1} GFlop)", dense_cost(n)));
            add("write spectrum.csv".into());
            add("check spectrum.symbol_match, spectrum.residual".into());
        }
        Kind::Ggt => {
            add("build the GGT matrix from the Verblunsky profile on the periodic box".into());
            add(format!("unitary eigensolve (~{:.1} GFlop)", dense_cost(n)));
            add("classify eigenphases against the essential arc".into());
            add("write spectrum.csv, ggt.json".into());
            add("check ggt.unitary, ggt.outliers_localized".into());
        }
        Kind::Mourre => {
            add("build U on the periodic box and A on the open box".into());
            add(format!("unitary eigensolve and arc filter (~{:.1} GFlop)", dense_cost(n)));
            add(format!("compress U*AU - A on the filter range (~{:.1} GFlop)", 2.0 * dense_cost(n)));
            add("write mourre.json".into());
            add("check mourre.windowed_min, mourre.deficient_count, mourre.deficient_localized".into());
        }
        Kind::Propagate => {
            let open = sides_box(cfg, Boundary::Open)?;
            let f = load_symbol(cfg)?;
            let u = laurent_op(&open, &f)?;
            let bw = u.effective_bandwidth(BAND_TOL).max(1);
            let psi0 = initial_state(cfg, &open)?;
            let margin = support_margin(&open, &psi0, 0.0);
            let ds = derived_symbols(&f)?;
            let v_max = f
                .test_grid()
                .iter()
                .map(|t| ds.velocity.iter().map(|v| v.eval(t).re.powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            add(format!("build L_f on the open box (bandwidth {bw} at {BAND_TOL:e})"));
            add(format!("wrap horizon {} steps (support margin {margin} / bandwidth {bw})", band_horizon(margin, bw)));
            add(format!("velocity estimate {:.0} steps (margin / max|v| = {margin} / {v_max:.3})", margin as f64 / v_max.max(1e-300)));
            add(format!("evolve up to n = {} with collar leak tolerance {:e} (~{:.2} GFlop)", cfg.n_max, cfg.tolerances.leak, 2.0 * (n * n * cfg.n_max) as f64 / 1e9));
            if cfg.arc.is_some() {
                add(format!("periodic eigensolve for the arc filter (~{:.1} GFlop)", dense_cost(n)));
            }
            add("write trace.csv, rate.json".into());
            add("check propagate.rate_upper and the arc window when configured".into());
        }
        Kind::Verify => {
            add("verify.circulant: eigenphases of the periodic L_f against symbol samples".into());
            add("verify.ggt_laurent: constant-coefficient GGT matrix against L_{f_a}".into());
            add("verify.ggt_unitary: unitarity of the GGT matrix".into());
            add("verify.velocity_real: i f grad(conj f) is real".into());
            add("verify.commutator_identity: [A, L_f] - L_{f |grad f|^2} on the window".into());
            add("verify.telescoping_shift: forward and backward telescoping for T, value 100 at n = 10".into());
            add("verify.quadratic_shift: quadratic law for T at n = -10..10".into());
            add("verify.telescoping_laurent: telescoping for L_f at n = 5".into());
            add("verify.qf_identity: quadratic-form identity for e_0, e_1".into());
            if cfg.seed.is_some() {
                add("verify.telescoping_random: telescoping for a seeded brickwork unitary".into());
            }
            add(format!("write verify.json (~{:.1} GFlop)", 3.0 * dense_cost(n)));
        }
    }
    for (k, v) in &steps {
        let _ = writeln!(s, "  {}. {v}", k + 1);
    }
    Ok(s)
}
