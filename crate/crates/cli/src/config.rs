//! Run configuration: defaults, a flat `key = value` file, then flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use clap::{Arg, ArgMatches, Command};
use dicke_core::{DickeIndex, ModelParams, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    GCurve,
    Spectrum,
    Exceptional,
    Convergence,
    Gme,
}

impl Subcommand {
    pub const ALL: [Subcommand; 5] =
        [Subcommand::GCurve, Subcommand::Spectrum, Subcommand::Exceptional, Subcommand::Convergence, Subcommand::Gme];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::GCurve => "gcurve",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Exceptional => "exceptional",
            Subcommand::Convergence => "convergence",
            Subcommand::Gme => "gme",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Subcommand::GCurve => "Sample G_+(E) and G_-(E) on an energy grid",
            Subcommand::Spectrum => "Stable zeros of G with oracle comparison and eigenstate summaries",
            Subcommand::Exceptional => "Couplings at which n - 4m^2g^2 is an eigenvalue",
            Subcommand::Convergence => "Relative level change against the basis cutoff, ECS and Fock",
            Subcommand::Gme => "GME, purity and energy along the evolution of the Bell-type state",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn keys(self) -> Vec<KeySpec> {
        let mut keys = vec![
            key("n", None, "number of qubits N"),
            key("delta", None, "qubit splitting"),
            key("omega", Some("1"), "cavity frequency"),
            key("output", Some("-"), "output path, - for stdout"),
        ];
        let coupling = [
            key("g", None, "coupling per qubit (exclusive with lambda)"),
            key("lambda", None, "collective coupling g*sqrt(N) (exclusive with g)"),
        ];
        match self {
            Subcommand::GCurve => {
                keys.extend(coupling);
                keys.extend([
                    key("format", Some("csv"), "csv or json"),
                    key("e_min", Some("auto"), "lower energy, auto for the spectral lower bound"),
                    key("e_max", None, "upper energy"),
                    key("points", Some("2001"), "grid points including both ends"),
                    key("n_c", Some("20"), "series truncation"),
                    key("scheme", Some("matched"), "matched or direct"),
                ]);
            }
            Subcommand::Spectrum => {
                keys.extend(coupling);
                keys.extend([
                    key("format", Some("json"), "json or csv"),
                    key("parity", Some("both"), "+, - or both"),
                    key("e_min", Some("auto"), "lower energy, auto for the spectral lower bound"),
                    key("e_max", None, "upper energy"),
                    key("n_c", Some("20"), "starting series truncation"),
                    key("max_n_c", Some("160"), "largest truncation tried by the stability test"),
                    key("scheme", Some("matched"), "matched or direct"),
                    key("oracle", Some("true"), "compare with the truncated Fock diagonalization"),
                    key("m_fock", Some("200"), "oracle photon cutoff"),
                    key("eigenstates", Some("true"), "reconstruct eigenstates of regular zeros"),
                ]);
            }
            Subcommand::Exceptional => {
                keys.extend([
                    key("format", Some("csv"), "csv or json"),
                    key("parity", Some("both"), "+, - or both"),
                    key("m", Some("all"), "comma list of m > 0 (1/2, 3/2, 1.5, ...) or all"),
                    key("n_min", Some("0"), "lowest photon level"),
                    key("n_max", Some("3"), "highest photon level"),
                    key("g_lo", Some("0"), "lower end of the coupling sweep"),
                    key("g_hi", Some("1"), "upper end of the coupling sweep"),
                    key("g_step", Some("0.001"), "sweep step"),
                    key("n_c", Some("40"), "series truncation"),
                    key("m_fock", Some("200"), "oracle photon cutoff for verification"),
                ]);
            }
            Subcommand::Convergence => {
                keys.extend(coupling);
                keys.extend([
                    key("format", Some("csv"), "csv or json"),
                    key("parity", Some("both"), "+, - or both"),
                    key("basis", Some("both"), "ecs, fock or both"),
                    key("states", Some("5"), "lowest states per parity"),
                    key("c_min", Some("1"), "smallest cutoff"),
                    key("c_max", Some("40"), "largest cutoff"),
                ]);
            }
            Subcommand::Gme => {
                keys.extend(coupling);
                keys.extend([
                    key("format", Some("csv"), "csv or json"),
                    key("t_max", Some("50"), "final time"),
                    key("dt", Some("0.05"), "time step"),
                    key("source", Some("oracle"), "eigenbasis from oracle or gfunction"),
                    key("m_fock", Some("40"), "starting photon cutoff of the eigenbasis"),
                    key("max_m_fock", Some("400"), "largest photon cutoff tried"),
                    key("sdp_tolerance", Some("1e-7"), "duality gap and infeasibility target"),
                ]);
            }
        }
        keys
    }

    pub fn command(self) -> Command {
        let mut cmd = Command::new(self.name())
            .about(self.about())
            .arg(Arg::new("config").long("config").value_name("PATH").help("flat key = value file"));
        for k in self.keys() {
            let mut help = String::from(k.help);
            if let Some(d) = k.default {
                help.push_str(&format!(" [default: {d}]"));
            }
            cmd = cmd.arg(Arg::new(k.name).long(k.name).value_name("VALUE").allow_negative_numbers(true).help(help));
        }
        cmd
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { name, default, help }
}

/// Bad input; maps to exit code 64.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return usage(format!("config line {}: empty key", i + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return usage(format!("config line {}: duplicate key {k}", i + 1));
        }
    }
    Ok(out)
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Defaults, overridden by the file, overridden by flags.
    pub fn resolve(
        subcommand: Subcommand,
        file: Option<BTreeMap<String, String>>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, UsageError> {
        let specs = subcommand.keys();
        let mut values = BTreeMap::new();
        for k in &specs {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        for (k, v) in file.into_iter().flatten().chain(flags.clone()) {
            if !specs.iter().any(|s| s.name == k) {
                return usage(format!("unknown key {k} for {}", subcommand.name()));
            }
            values.insert(k, v);
        }
        let cfg = Self { subcommand, values };
        cfg.check_required()?;
        Ok(cfg)
    }

    pub fn from_matches(subcommand: Subcommand, m: &ArgMatches) -> Result<Self, UsageError> {
        let file = match m.get_one::<String>("config") {
            Some(path) => Some(read_config(Path::new(path))?),
            None => None,
        };
        let mut flags = BTreeMap::new();
        for k in subcommand.keys() {
            if let Some(v) = m.get_one::<String>(k.name) {
                flags.insert(k.name.to_string(), v.clone());
            }
        }
        Self::resolve(subcommand, file, &flags)
    }

    fn check_required(&self) -> Result<(), UsageError> {
        for k in self.subcommand.keys() {
            if k.default.is_none() && k.name != "g" && k.name != "lambda" && !self.values.contains_key(k.name) {
                return usage(format!("missing required key {}", k.name));
            }
        }
        let has_coupling = self.subcommand.keys().iter().any(|k| k.name == "g");
        if has_coupling {
            match (self.values.contains_key("g"), self.values.contains_key("lambda")) {
                (true, true) => return usage("give either g or lambda, not both"),
                (false, false) => return usage("missing required key g (or lambda)"),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn required(&self, name: &str) -> Result<&str, UsageError> {
        self.raw(name).ok_or_else(|| UsageError(format!("missing required key {name}")))
    }

    pub fn f64(&self, name: &str) -> Result<f64, UsageError> {
        let s = self.required(name)?;
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => usage(format!("{name}: expected a finite number, got {s:?}")),
        }
    }

    /// A number, or `None` for the literal `auto`.
    pub fn f64_or_auto(&self, name: &str) -> Result<Option<f64>, UsageError> {
        if self.required(name)? == "auto" {
            Ok(None)
        } else {
            self.f64(name).map(Some)
        }
    }

    pub fn usize(&self, name: &str) -> Result<usize, UsageError> {
        let s = self.required(name)?;
        s.parse::<usize>().or_else(|_| usage(format!("{name}: expected a non-negative integer, got {s:?}")))
    }

    pub fn bool(&self, name: &str) -> Result<bool, UsageError> {
        match self.required(name)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            s => usage(format!("{name}: expected true or false, got {s:?}")),
        }
    }

    /// One of `choices`, returned as its index.
    pub fn choice(&self, name: &str, choices: &[&str]) -> Result<usize, UsageError> {
        let s = self.required(name)?;
        choices
            .iter()
            .position(|c| *c == s)
            .ok_or_else(|| UsageError(format!("{name}: expected one of {}, got {s:?}", choices.join(", "))))
    }

    pub fn parities(&self) -> Result<Vec<Parity>, UsageError> {
        Ok(match self.choice("parity", &["both", "+", "-", "plus", "minus"])? {
            0 => Parity::both().to_vec(),
            1 | 3 => vec![Parity::Positive],
            _ => vec![Parity::Negative],
        })
    }

    pub fn n_qubits(&self) -> Result<u32, UsageError> {
        let n = self.usize("n")?;
        match u32::try_from(n) {
            Ok(v) if v >= 1 => Ok(v),
            _ => usage("n: expected at least one qubit"),
        }
    }

    /// Model parameters; `g` and `lambda` are optional only where the
    /// subcommand sweeps the coupling, in which case g = `fallback_g`.
    pub fn model(&self, fallback_g: Option<f64>) -> Result<ModelParams, UsageError> {
        let n = self.n_qubits()?;
        let (delta, omega) = (self.f64("delta")?, self.f64("omega")?);
        let g = if self.raw("g").is_some() {
            self.f64("g")?
        } else if self.raw("lambda").is_some() {
            self.f64("lambda")? / f64::from(n).sqrt()
        } else {
            fallback_g.ok_or_else(|| UsageError("missing required key g (or lambda)".into()))?
        };
        ModelParams::with_omega(n, delta, omega, g).map_err(|e| UsageError(e.to_string()))
    }

    /// Positive Dicke indices from `m`: `all` or a comma list such as
    /// `1/2,3/2` or `0.5, 1.5`.
    pub fn dicke_indices(&self, n_qubits: u32) -> Result<Vec<DickeIndex>, UsageError> {
        let s = self.required("m")?;
        if s == "all" {
            return Ok(DickeIndex::positive(n_qubits));
        }
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            let two_m = parse_two_m(part).ok_or_else(|| UsageError(format!("m: cannot read {part:?}")))?;
            if two_m <= 0 {
                return usage("m: exceptional families need m > 0");
            }
            let idx = DickeIndex::new(n_qubits, two_m).map_err(|e| UsageError(format!("m: {e}")))?;
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
        Ok(out)
    }
}

fn parse_two_m(s: &str) -> Option<i32> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (a.trim().parse::<i32>().ok()?, b.trim().parse::<i32>().ok()?);
        return match b {
            1 => Some(2 * a),
            2 => Some(a),
            _ => None,
        };
    }
    let v = s.parse::<f64>().ok()?;
    let two = 2.0 * v;
    (two.is_finite() && two.fract() == 0.0 && two.abs() < 1e6).then_some(two as i32)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}
