//! The five pipelines. Each returns the rendered output document.

use std::fmt;

use serde_json::{Map, Value};

use dicke_core::dynamics::{self, BasisSource, DynamicsOptions};
use dicke_core::entanglement::{gme_monotone, min_negativity, GmeOptions};
use dicke_core::gfunction::{g_value, nearest_pole_distance, GOptions, GScheme};
use dicke_core::oracle::{sector_eigenvalues, Basis};
use dicke_core::spectrum::{
    energy_lower_bound, find_exceptional, reconstruct_eigenstate, scan_zeros, EigenState, ExceptionalOptions,
    ReconstructOptions, RecordKind, ScanOptions, ScanResult,
};
use dicke_core::{Error, ModelParams, Parity};

use crate::config::{RunConfig, Subcommand, UsageError};
use crate::output::{envelope, json_f64, json_opt, render_json, Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Core(Error),
    Io(std::io::Error),
}

impl CliError {
    /// 0 success, 2 convergence failure, 3 solver failure, 64 bad usage.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Domain(_)) => 64,
            CliError::Core(Error::Convergence { .. } | Error::Completeness { .. } | Error::DimensionCap { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 74,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "usage: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cfg: &RunConfig) -> Result<String> {
    match cfg.subcommand {
        Subcommand::GCurve => gcurve(cfg),
        Subcommand::Spectrum => spectrum(cfg),
        Subcommand::Exceptional => exceptional(cfg),
        Subcommand::Convergence => convergence(cfg),
        Subcommand::Gme => gme(cfg),
    }
}

fn render(cfg: &RunConfig, table: &Table, formats: &[&str]) -> Result<String> {
    Ok(match formats[cfg.choice("format", formats)?] {
        "json" => table.to_json(cfg),
        _ => table.to_csv(cfg),
    })
}

fn scheme(cfg: &RunConfig) -> Result<GScheme> {
    Ok(match cfg.choice("scheme", &["matched", "direct"])? {
        0 => GScheme::Matched,
        _ => GScheme::DirectSeries,
    })
}

fn energy_range(cfg: &RunConfig, params: &ModelParams) -> Result<(f64, f64)> {
    let lo = cfg.f64_or_auto("e_min")?.unwrap_or_else(|| energy_lower_bound(params));
    Ok((lo, cfg.f64("e_max")?))
}

fn parity_label(p: Parity) -> Cell {
    Cell::from(p.label())
}

fn gcurve(cfg: &RunConfig) -> Result<String> {
    let params = cfg.model(None)?;
    let (lo, hi) = energy_range(cfg, &params)?;
    let points = cfg.usize("points")?;
    let opts = GOptions::default().with_truncation(cfg.usize("n_c")?).with_scheme(scheme(cfg)?);
    let grid: Vec<f64> = match points {
        _ if hi < lo => Vec::new(),
        0 => Vec::new(),
        1 => vec![lo],
        p => (0..p).map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64).collect(),
    };
    // A row is flagged when a pole lies closer than one grid step, so both
    // samples bracketing a pole carry the flag.
    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let r = params.reduced();
    let n2 = f64::from(params.n_qubits()).powi(2);

    let mut t = Table::new(&["E", "x", "G_plus", "G_minus", "pole_plus", "pole_minus"]);
    let mut unconverged = 0usize;
    for &e in &grid {
        let mut row = vec![Cell::from(e), Cell::from(e + params.omega() * n2 * r.g() * r.g())];
        let mut flags = Vec::with_capacity(2);
        for parity in Parity::both() {
            let near = nearest_pole_distance(&params, parity, e).0 < step;
            let (value, pole) = match g_value(&params, e, parity, &opts) {
                Ok(ev) => (ev.value * ev.log_scale.exp(), near),
                Err(Error::Pole { .. }) => (f64::NAN, true),
                Err(Error::Convergence { .. }) => {
                    unconverged += 1;
                    (f64::NAN, near)
                }
                Err(e) => return Err(e.into()),
            };
            row.push(Cell::from(value));
            flags.push(Cell::from(usize::from(pole)));
        }
        row.extend(flags);
        t.push(row);
    }
    t.note("unconverged_samples", Value::from(unconverged));
    render(cfg, &t, &["csv", "json"])
}

/// Norm, photon number, Dicke weights and the mirror-symmetry defect.
fn eigenstate_summary(params: &ModelParams, s: &EigenState) -> Value {
    let n = params.n_qubits() as usize;
    let stride = s.fock_cutoff + 1;
    let amp = |pos: usize, k: usize| s.fock_amplitudes[pos * stride + k];
    let mut weights = vec![0.0; n + 1];
    let (mut norm2, mut photons, mut defect) = (0.0, 0.0, 0.0f64);
    for (pos, w) in weights.iter_mut().enumerate() {
        for k in 0..stride {
            let a = amp(pos, k);
            *w += a * a;
            norm2 += a * a;
            photons += k as f64 * a * a;
            defect = defect.max((amp(n - pos, k) - s.parity.mirror_factor(k) * a).abs());
        }
    }
    let mut o = Map::new();
    o.insert("norm".into(), json_f64(norm2.sqrt()));
    o.insert("mean_photon_number".into(), json_f64(photons / norm2));
    o.insert("dicke_weights".into(), weights.into_iter().map(json_f64).collect());
    o.insert("parity_defect".into(), json_f64(defect));
    o.insert("singular_ratio".into(), json_f64(s.singular_ratio));
    o.insert("ecs_cutoff".into(), Value::from(s.ecs_cutoff));
    o.insert("fock_cutoff".into(), Value::from(s.fock_cutoff));
    Value::Object(o)
}

fn nearest(levels: &[f64], e: f64) -> Option<f64> {
    levels.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()))
}

fn spectrum(cfg: &RunConfig) -> Result<String> {
    let params = cfg.model(None)?;
    let (lo, hi) = energy_range(cfg, &params)?;
    let format = cfg.choice("format", &["json", "csv"])?;
    let mut opts = ScanOptions::default();
    opts.g = opts.g.with_truncation(cfg.usize("n_c")?).with_scheme(scheme(cfg)?);
    opts.max_truncation = cfg.usize("max_n_c")?;
    if opts.max_truncation <= opts.g.n_c {
        return Err(UsageError("max_n_c must exceed n_c".into()).into());
    }
    let use_oracle = cfg.bool("oracle")?;
    let m_fock = cfg.usize("m_fock")?;
    let with_states = cfg.bool("eigenstates")?;

    let mut scan = ScanResult::default();
    let mut oracle: Vec<(Parity, Vec<f64>)> = Vec::new();
    for parity in cfg.parities()? {
        let r = scan_zeros(&params, parity, lo, hi, &opts)?;
        scan.records.extend(r.records);
        scan.rejected.extend(r.rejected);
        scan.tangencies.extend(r.tangencies);
        if use_oracle {
            oracle.push((parity, sector_eigenvalues(&params, parity, Basis::Fock, m_fock)?));
        }
    }
    let oracle_level = |p: Parity, e: f64| oracle.iter().find(|(q, _)| *q == p).and_then(|(_, l)| nearest(l, e));

    if format == 1 {
        let mut t =
            Table::new(&["energy", "parity", "kind", "residual", "n_c_used", "oracle_energy", "oracle_delta"]);
        for r in &scan.records {
            let o = oracle_level(r.parity, r.energy);
            t.push(vec![
                r.energy.into(),
                parity_label(r.parity),
                r.kind.label().into(),
                r.residual.into(),
                r.n_c_used.into(),
                o.unwrap_or(f64::NAN).into(),
                o.map_or(f64::NAN, |o| r.energy - o).into(),
            ]);
        }
        return Ok(t.to_csv(cfg));
    }

    let mut records = Vec::with_capacity(scan.records.len());
    for r in &scan.records {
        let mut o = Map::new();
        o.insert("energy".into(), json_f64(r.energy));
        o.insert("parity".into(), Value::from(r.parity.label()));
        o.insert("kind".into(), Value::from(r.kind.label()));
        o.insert("residual".into(), json_f64(r.residual));
        o.insert("n_c_used".into(), Value::from(r.n_c_used));
        if use_oracle {
            let level = oracle_level(r.parity, r.energy);
            o.insert("oracle_energy".into(), json_opt(level));
            o.insert("oracle_delta".into(), json_opt(level.map(|l| r.energy - l)));
        }
        let state = if with_states && r.kind == RecordKind::Regular {
            match reconstruct_eigenstate(&params, r, &ReconstructOptions::default()) {
                Ok(s) => eigenstate_summary(&params, &s),
                Err(e) => Value::Object(Map::from_iter([("error".to_string(), Value::from(e.to_string()))])),
            }
        } else {
            Value::Null
        };
        o.insert("eigenstate".into(), state);
        records.push(Value::Object(o));
    }
    let rejected = scan
        .rejected
        .iter()
        .map(|z| {
            let mut o = Map::new();
            o.insert("energy".into(), json_f64(z.energy));
            o.insert("parity".into(), Value::from(z.parity.label()));
            o.insert("n_c".into(), Value::from(z.n_c));
            o.insert("shift".into(), json_opt(z.shift));
            o.insert("superseded".into(), Value::from(z.superseded));
            Value::Object(o)
        })
        .collect();
    let tangencies = scan
        .tangencies
        .iter()
        .map(|t| {
            let mut o = Map::new();
            o.insert("energy".into(), json_f64(t.energy));
            o.insert("parity".into(), Value::from(t.parity.label()));
            o.insert("relative_value".into(), json_f64(t.relative_value));
            Value::Object(o)
        })
        .collect();
    let mut doc = envelope(cfg);
    doc.insert("energy_range".into(), Value::Array(vec![json_f64(lo), json_f64(hi)]));
    doc.insert("records".into(), Value::Array(records));
    doc.insert("rejected".into(), Value::Array(rejected));
    doc.insert("tangencies".into(), Value::Array(tangencies));
    Ok(render_json(doc))
}

fn exceptional(cfg: &RunConfig) -> Result<String> {
    let (g_lo, g_hi, g_step) = (cfg.f64("g_lo")?, cfg.f64("g_hi")?, cfg.f64("g_step")?);
    if !(g_step > 0.0) {
        return Err(UsageError("g_step must be positive".into()).into());
    }
    let params = cfg.model(Some(g_hi.max(0.0)))?;
    let families = cfg.dicke_indices(params.n_qubits())?;
    let (n_min, n_max) = (cfg.usize("n_min")?, cfg.usize("n_max")?);
    let opts = ExceptionalOptions { g_step, n_c: cfg.usize("n_c")?, oracle_cutoff: cfg.usize("m_fock")?, ..Default::default() };
    let mut t = Table::new(&["parity", "two_m", "m", "n", "g", "energy", "oracle_deviation"]);
    for parity in cfg.parities()? {
        for &m in &families {
            for n in n_min..=n_max {
                for p in find_exceptional(&params, parity, m, n, (g_lo, g_hi), &opts)? {
                    t.push(vec![
                        parity_label(parity),
                        m.two_m().into(),
                        m.m().into(),
                        n.into(),
                        p.g.into(),
                        p.energy.into(),
                        p.oracle_deviation.into(),
                    ]);
                }
            }
        }
    }
    render(cfg, &t, &["csv", "json"])
}

fn convergence(cfg: &RunConfig) -> Result<String> {
    let params = cfg.model(None)?;
    let bases: &[(Basis, &str)] = match cfg.choice("basis", &["both", "ecs", "fock"])? {
        0 => &[(Basis::Ecs, "ecs"), (Basis::Fock, "fock")],
        1 => &[(Basis::Ecs, "ecs")],
        _ => &[(Basis::Fock, "fock")],
    };
    let states = cfg.usize("states")?;
    let (c_min, c_max) = (cfg.usize("c_min")?, cfg.usize("c_max")?);
    if c_min == 0 || c_max < c_min {
        return Err(UsageError("need 1 <= c_min <= c_max".into()).into());
    }
    let mut t = Table::new(&["basis", "parity", "state", "cutoff", "energy", "eta"]);
    for &(basis, name) in bases {
        for parity in cfg.parities()? {
            let levels: Vec<Vec<f64>> =
                (c_min - 1..=c_max).map(|c| sector_eigenvalues(&params, parity, basis, c)).collect::<std::result::Result<_, _>>()?;
            for s in 0..states {
                for (i, c) in (c_min..=c_max).enumerate() {
                    let (Some(&prev), Some(&cur)) = (levels[i].get(s), levels[i + 1].get(s)) else {
                        continue;
                    };
                    let eta = if cur == prev { 0.0 } else { ((cur - prev) / cur).abs() };
                    t.push(vec![name.into(), parity_label(parity), s.into(), c.into(), cur.into(), eta.into()]);
                }
            }
        }
    }
    render(cfg, &t, &["csv", "json"])
}

fn gme(cfg: &RunConfig) -> Result<String> {
    let params = cfg.model(None)?;
    let gme_opts = GmeOptions { tolerance: cfg.f64("sdp_tolerance")?, ..Default::default() };
    if params.n_qubits() < 2 || params.n_qubits() > gme_opts.max_qubits {
        return Err(UsageError(format!("gme needs 2 to {} qubits", gme_opts.max_qubits)).into());
    }
    let times = dynamics::time_grid(cfg.f64("t_max")?, cfg.f64("dt")?)?;
    let source = match cfg.choice("source", &["oracle", "gfunction"])? {
        0 => BasisSource::Oracle,
        _ => BasisSource::GFunction,
    };
    let opts = DynamicsOptions {
        source,
        photon_cutoff: cfg.usize("m_fock")?,
        max_photon_cutoff: cfg.usize("max_m_fock")?,
        ..Default::default()
    };
    let run = dynamics::run(&params, &times, &opts)?;

    let mut t = Table::new(&[
        "t",
        "gme",
        "purity",
        "energy",
        "min_negativity",
        "trace",
        "duality_gap",
        "solver_status",
        "sdp_iterations",
    ]);
    for s in &run.samples {
        let rho = &s.state.rho;
        let g = gme_monotone(rho, params.n_qubits(), &gme_opts)?;
        t.push(vec![
            s.state.t.into(),
            g.value.into(),
            s.state.purity().into(),
            s.energy.into(),
            min_negativity(rho, params.n_qubits())?.into(),
            s.state.trace().into(),
            g.duality_gap.into(),
            g.solver_status.label().into(),
            g.iterations.into(),
        ]);
    }
    let c = run.conservation;
    t.note("basis_size", Value::from(run.basis.len()));
    t.note("fock_cutoff", Value::from(run.basis.fock_cutoff));
    t.note("completeness_defect", json_f64(run.basis.completeness_defect));
    t.note("trace_error", json_f64(c.trace_error));
    t.note("energy_drift", json_f64(c.energy_drift));
    t.note("norm_defect", json_f64(c.norm_defect));
    t.note("min_eigenvalue", json_f64(c.min_eigenvalue));
    t.note("conservation_holds", Value::from(c.holds()));
    render(cfg, &t, &["csv", "json"])
}
