//! Flat `key = value` experiment configs with dotted section names.
//!
//! ```text
//! # comment
//! kind = verify
//! seed = 7
//! box.sides = 201
//! symbol.a = 2
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::arc::PhaseArc;
use crate::error::{Error, Result};
use crate::lattice::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Spectrum,
    Mourre,
    Propagate,
    Ggt,
    Verify,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Mourre => "mourre",
            Kind::Propagate => "propagate",
            Kind::Ggt => "ggt",
            Kind::Verify => "verify",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectrum" => Ok(Kind::Spectrum),
            "mourre" => Ok(Kind::Mourre),
            "propagate" => Ok(Kind::Propagate),
            "ggt" => Ok(Kind::Ggt),
            "verify" => Ok(Kind::Verify),
            other => Err(format!("unknown kind '{other}' (expected spectrum, mourre, propagate, ggt or verify)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSource {
    /// The `f_a` family.
    Ggt(f64),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Site(Vec<i64>),
    File(PathBuf),
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Site(c) => {
                let c: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "site {}", c.join(","))
            }
            InitialState::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

/// Tolerance overrides; every entry must be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub identity: f64,
    pub telescoping: f64,
    pub virial: f64,
    pub leak: f64,
    pub eig: f64,
    pub rate_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-8, telescoping: 1e-8, virial: 1e-6, leak: 1e-10, eig: 1e-8, rate_slack: 0.05 }
    }
}

impl Tolerances {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "identity" => &mut self.identity,
            "telescoping" => &mut self.telescoping,
            "virial" => &mut self.virial,
            "leak" => &mut self.leak,
            "eig" => &mut self.eig,
            "rate_slack" => &mut self.rate_slack,
            _ => return None,
        })
    }

    fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("identity", self.identity),
            ("telescoping", self.telescoping),
            ("virial", self.virial),
            ("leak", self.leak),
            ("eig", self.eig),
            ("rate_slack", self.rate_slack),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: Option<u64>,
    pub sides: Vec<usize>,
    pub boundary: Boundary,
    /// Distance from the edge excluded by windowed residuals.
    pub margin: usize,
    pub symbol: SymbolSource,
    pub profile: Option<PathBuf>,
    pub arc: Option<PhaseArc>,
    pub n_max: usize,
    pub psi0: InitialState,
    pub tolerances: Tolerances,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(kind: Kind) -> Self {
        let (sides, boundary) = match kind {
            Kind::Spectrum => (63, Boundary::Periodic),
            Kind::Ggt => (127, Boundary::Periodic),
            Kind::Propagate => (1025, Boundary::Open),
            Kind::Mourre => (201, Boundary::Periodic),
            Kind::Verify => (201, Boundary::Open),
        };
        Self {
            kind,
            seed: None,
            sides: vec![sides],
            boundary,
            margin: 40,
            symbol: SymbolSource::Ggt(2.0),
            profile: None,
            arc: None,
            n_max: 400,
            psi0: InitialState::Site(vec![0]),
            tolerances: Tolerances::default(),
            output: PathBuf::from("out"),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text; relative file references resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse { line, msg: format!("expected key = value, got '{body}'") })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse { line, msg: "empty key or value".into() });
            }
            if let Some((prev, _)) = entries.get(&k) {
                return Err(Error::Parse { line, msg: format!("duplicate key '{k}' (first set on line {prev})") });
            }
            entries.insert(k, (line, v));
        }
        let (kline, kind) = entries.remove("kind").ok_or_else(|| Error::Parse { line: 0, msg: "missing key 'kind'".into() })?;
        let kind: Kind = kind.parse().map_err(|msg| Error::Parse { line: kline, msg })?;
        let mut cfg = Self::defaults(kind);
        let mut arc_ends: [Option<(usize, f64)>; 2] = [None, None];
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let must_exist = |line: usize, p: PathBuf| -> Result<PathBuf> {
            if p.is_file() {
                Ok(p)
            } else {
                Err(Error::Parse { line, msg: format!("file {} does not exist", p.display()) })
            }
        };
        for (key, (line, value)) in entries {
            let bad = |what: &str| Error::Parse { line, msg: format!("{key}: {what} '{value}'") };
            match key.as_str() {
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("expected an unsigned integer, got"))?),
                "box.sides" => {
                    cfg.sides = value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("expected comma-separated sides, got"))?;
                    if cfg.sides.iter().any(|&n| n < 3 || n % 2 == 0) {
                        return Err(bad("sides must be odd and at least 3, got"));
                    }
                }
                "box.boundary" => cfg.boundary = value.parse().map_err(|_| bad("expected periodic or open, got"))?,
                "box.margin" => cfg.margin = value.parse().map_err(|_| bad("expected an unsigned integer, got"))?,
                "symbol.a" => {
                    let a: f64 = value.parse().map_err(|_| bad("expected a number, got"))?;
                    if !(a > 1.0 && a.is_finite()) {
                        return Err(bad("the symbol parameter must exceed 1, got"));
                    }
                    cfg.symbol = SymbolSource::Ggt(a);
                }
                "symbol.file" => cfg.symbol = SymbolSource::File(must_exist(line, resolve(&value))?),
                "verblunsky.profile" => cfg.profile = Some(must_exist(line, resolve(&value))?),
                "arc.low" | "arc.high" => {
                    let x: f64 = value.parse().map_err(|_| bad("expected a phase, got"))?;
                    if !x.is_finite() {
                        return Err(bad("expected a finite phase, got"));
                    }
                    arc_ends[usize::from(key == "arc.high")] = Some((line, x));
                }
                "dynamics.n_max" => cfg.n_max = value.parse().map_err(|_| bad("expected an unsigned integer, got"))?,
                "dynamics.psi0" => cfg.psi0 = parse_state(&value, line, &resolve, &must_exist)?,
                "output.dir" => cfg.output = PathBuf::from(&value),
                k if k.starts_with("tolerances.") => {
                    let x: f64 = value.parse().map_err(|_| bad("expected a number, got"))?;
                    if !(x > 0.0 && x.is_finite()) {
                        return Err(bad("tolerances must be positive, got"));
                    }
                    *cfg.tolerances.slot(&k["tolerances.".len()..]).ok_or_else(|| Error::Parse { line, msg: format!("unknown tolerance '{k}'") })? = x;
                }
                _ => return Err(Error::Parse { line, msg: format!("unknown key '{key}'") }),
            }
        }
        match arc_ends {
            [None, None] => {}
            [Some((l1, lo)), Some((l2, hi))] => {
                cfg.arc = Some(PhaseArc::new(lo, hi).map_err(|e| Error::Parse { line: l1.max(l2), msg: format!("malformed arc: {e}") })?);
            }
            [Some((line, _)), None] | [None, Some((line, _))] => {
                return Err(Error::Parse { line, msg: "arc needs both arc.low and arc.high".into() });
            }
        }
        if let InitialState::Site(c) = &cfg.psi0 {
            if c.len() != cfg.sides.len() {
                return Err(Error::Parse { line: 0, msg: format!("psi0 has {} coordinates on a {}-dimensional box", c.len(), cfg.sides.len()) });
            }
        }
        Ok(cfg)
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn resolved(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = {}", self.kind.name());
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let sides: Vec<String> = self.sides.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "box.sides = {}", sides.join(","));
        let _ = writeln!(s, "box.boundary = {}", self.boundary.name());
        let _ = writeln!(s, "box.margin = {}", self.margin);
        match &self.symbol {
            SymbolSource::Ggt(a) => {
                let _ = writeln!(s, "symbol.a = {a}");
            }
            SymbolSource::File(p) => {
                let _ = writeln!(s, "symbol.file = {}", p.display());
            }
        }
        if let Some(p) = &self.profile {
            let _ = writeln!(s, "verblunsky.profile = {}", p.display());
        }
        if let Some(arc) = &self.arc {
            let _ = writeln!(s, "arc.low = {}", arc.low());
            let _ = writeln!(s, "arc.high = {}", arc.high());
        }
        let _ = writeln!(s, "dynamics.n_max = {}", self.n_max);
        let _ = writeln!(s, "dynamics.psi0 = {}", self.psi0);
        for (k, v) in self.tolerances.entries() {
            let _ = writeln!(s, "tolerances.{k} = {v:e}");
        }
        let _ = writeln!(s, "output.dir = {}", self.output.display());
        s
    }
}

fn parse_state(
    value: &str,
    line: usize,
    resolve: &dyn Fn(&str) -> PathBuf,
    must_exist: &dyn Fn(usize, PathBuf) -> Result<PathBuf>,
) -> Result<InitialState> {
    let (tag, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
    match tag {
        "site" => rest
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(InitialState::Site)
            .map_err(|_| Error::Parse { line, msg: format!("dynamics.psi0: bad site '{rest}'") }),
        "file" => Ok(InitialState::File(must_exist(line, resolve(rest.trim()))?)),
        _ => Err(Error::Parse { line, msg: format!("dynamics.psi0: expected 'site x[,y..]' or 'file path', got '{value}'") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(t: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(t, Path::new("."))
    }

    #[test]
    fn defaults_by_kind() {
        let c = parse("kind = verify\n").unwrap();
        assert_eq!(c.sides, vec![201]);
        assert_eq!(c.symbol, SymbolSource::Ggt(2.0));
        assert_eq!(c.boundary, Boundary::Open);
    }

    #[test]
    fn degenerate_arc_names_its_line() {
        let e = parse("kind = mourre\narc.low = 1.0\n\narc.high = 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse("kind = walk\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("kind = ggt\nbox.colour = red\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("kind = ggt\ntolerances.leak = -1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("kind = ggt\ntolerances.foo = 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("kind = ggt\nbox.sides = 64\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("kind = ggt\nsymbol.file = /nonexistent/f.sym\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("kind = ggt\nseed = 1\nseed = 2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("kind = ggt\narc.low = 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("seed = 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn resolved_text_round_trips() {
        let c = parse("kind = propagate # trailing\nseed = 9\nbox.sides = 33,33\ndynamics.psi0 = site 1,-2\narc.low = 2.6\narc.high = 3.6\ntolerances.leak = 1e-9\n").unwrap();
        let again = parse(&c.resolved()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.tolerances.leak, 1e-9);
    }
}
