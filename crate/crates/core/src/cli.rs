//! The `cprlab` command-line front end.
//!
//! Subcommands: `floor` (analytic floors), `simulate` (analytic and
//! Monte-Carlo floors), `link` (phase-noise budget of a link) and `presets`.
//! Parameters come from an optional INI file with `[link]`, `[cpr]`,
//! `[sweep]` and `[mc]` sections; command-line flags take precedence.
//! Output is CSV preceded by `#` comment lines that record the tool version,
//! the command and every resolved parameter.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ini::Ini;

use crate::channel::Snr;
use crate::cpr::{Estimator, UnwrapPolicy};
use crate::error::{invalid, Error, Result};
use crate::experiments::{self, Axis, Decoding, EepnInjection, FloorResult, McSettings, Mode, MuChoice, SweepSpec};
use crate::noise::{self, LinkParams};
use crate::AlgorithmKind;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "cprlab",
    version,
    about = "Carrier phase recovery floors for n-PSK coherent links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic BER floors over a parameter grid.
    Floor(SweepArgs),
    /// Analytic and Monte-Carlo BER floors over a parameter grid.
    Simulate(SimulateArgs),
    /// Laser and EEPN variance budget of a link.
    Link(LinkCommandArgs),
    /// List the built-in figure presets.
    Presets,
}

#[derive(Debug, Args, Default)]
struct LinkArgs {
    /// Symbol rate in baud.
    #[arg(long)]
    baud: Option<f64>,
    /// Carrier wavelength in nm.
    #[arg(long, value_name = "NM")]
    wavelength: Option<f64>,
    /// Fiber dispersion in ps/nm/km.
    #[arg(long, value_name = "PS_NM_KM")]
    dispersion: Option<f64>,
    /// Transmitter laser linewidth in Hz.
    #[arg(long, value_name = "HZ")]
    tx_linewidth: Option<f64>,
    /// Local oscillator linewidth in Hz.
    #[arg(long, value_name = "HZ")]
    lo_linewidth: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// INI file with [link], [cpr], [sweep] and [mc] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in sweep (see `cprlab presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Algorithms: nlms, bwa, vv (comma separated).
    #[arg(long, value_delimiter = ',')]
    algorithm: Vec<AlgorithmKind>,
    /// Modulation orders (comma separated).
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    /// BWA/VV block lengths (comma separated).
    #[arg(long, value_delimiter = ',')]
    block_length: Vec<usize>,
    /// Total phase-noise variances in rad² (comma separated).
    #[arg(long, value_delimiter = ',')]
    sigma2: Vec<f64>,
    /// Linewidths of both lasers in Hz, back-to-back (comma separated).
    #[arg(long, value_delimiter = ',')]
    linewidth: Vec<f64>,
    /// Fiber lengths in km (comma separated).
    #[arg(long, value_delimiter = ',')]
    distance: Vec<f64>,
    #[command(flatten)]
    link: LinkArgs,
    /// NLMS step size, or `optimized`.
    #[arg(long)]
    mu: Option<MuChoice>,
    /// BWA/VV estimator: phasor or phase-average.
    #[arg(long)]
    estimator: Option<Estimator>,
    /// Ambiguity resolution: previous or genie.
    #[arg(long)]
    unwrap: Option<UnwrapPolicy>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// analytic, mc or both.
    #[arg(long)]
    mode: Option<Mode>,
    /// Counted symbols per point (default: enough for 100 expected bit errors).
    #[arg(long)]
    symbols: Option<u64>,
    /// Frames per point.
    #[arg(long)]
    frames: Option<u64>,
    /// Symbols per frame.
    #[arg(long)]
    frame_len: Option<usize>,
    /// Cap of the automatic symbol budget.
    #[arg(long)]
    max_symbols: Option<u64>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// differential or genie.
    #[arg(long)]
    decoding: Option<Decoding>,
    /// variance-equivalent or physical.
    #[arg(long)]
    eepn: Option<EepnInjection>,
    /// Es/N0 in dB (default: noiseless).
    #[arg(long)]
    snr_db: Option<f64>,
}

#[derive(Debug, Args)]
struct LinkCommandArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    link: LinkArgs,
    /// Fiber length in km.
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parameters gathered from a config file and/or the command line; `None`
/// means "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub algorithms: Option<Vec<AlgorithmKind>>,
    pub orders: Option<Vec<usize>>,
    pub block_lengths: Option<Vec<usize>>,
    pub axis: Option<Axis>,
    pub baud: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub dispersion_ps_nm_km: Option<f64>,
    pub tx_linewidth_hz: Option<f64>,
    pub lo_linewidth_hz: Option<f64>,
    pub mu: Option<MuChoice>,
    pub estimator: Option<Estimator>,
    pub unwrap: Option<UnwrapPolicy>,
    pub mode: Option<Mode>,
    pub symbols: Option<u64>,
    pub frames: Option<u64>,
    pub frame_len: Option<usize>,
    pub max_symbols: Option<u64>,
    pub seed: Option<u64>,
    pub decoding: Option<Decoding>,
    pub eepn: Option<EepnInjection>,
    pub snr_db: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $(if $top.$f.is_some() { $base.$f = $top.$f; })*
    };
}

impl RunConfig {
    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay_fields!(
            self,
            top,
            preset,
            algorithms,
            orders,
            block_lengths,
            axis,
            baud,
            wavelength_nm,
            dispersion_ps_nm_km,
            tx_linewidth_hz,
            lo_linewidth_hz,
            mu,
            estimator,
            unwrap,
            mode,
            symbols,
            frames,
            frame_len,
            max_symbols,
            seed,
            decoding,
            eepn,
            snr_db
        );
        self
    }

    fn validate(&self) -> Result<()> {
        if let (Some(algs), Some(blocks)) = (&self.algorithms, &self.block_lengths) {
            if algs.contains(&AlgorithmKind::Vv) {
                if let Some(n) = blocks.iter().find(|&&n| n % 2 == 0) {
                    return Err(invalid(format!("N_VV must be odd, got {n}")));
                }
            }
        }
        if let Some(blocks) = &self.block_lengths {
            if blocks.contains(&0) {
                return Err(invalid("block length must be >= 1"));
            }
        }
        if let Some(s) = self.symbols {
            if s < experiments::MIN_MC_SYMBOLS {
                return Err(invalid(format!(
                    "Monte-Carlo runs need at least {} symbols per point, got {s}",
                    experiments::MIN_MC_SYMBOLS
                )));
            }
        }
        for (name, v) in [
            ("baud", self.baud),
            ("wavelength", self.wavelength_nm),
            ("dispersion", self.dispersion_ps_nm_km),
            ("tx_linewidth", self.tx_linewidth_hz),
            ("lo_linewidth", self.lo_linewidth_hz),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn link(&self) -> Result<LinkParams> {
        let d = LinkParams::ssmf_32gbd();
        LinkParams::from_engineering(
            self.tx_linewidth_hz.unwrap_or(d.delta_f_tx()),
            self.lo_linewidth_hz.unwrap_or(d.delta_f_lo()),
            self.baud.unwrap_or(d.symbol_rate()),
            self.wavelength_nm.unwrap_or(d.wavelength() * 1e9),
            self.dispersion_ps_nm_km
                .unwrap_or(noise::si_to_ps_per_nm_km(d.dispersion())),
            0.0,
        )
    }

    /// Resolves into a validated sweep. A preset supplies defaults that the
    /// remaining fields override.
    pub fn to_sweep(&self) -> Result<SweepSpec> {
        self.validate()?;
        let mut spec = match &self.preset {
            Some(name) => experiments::preset(name)?,
            None => {
                let algorithms = self
                    .algorithms
                    .clone()
                    .ok_or_else(|| Error::Usage("missing --algorithm (or --preset)".into()))?;
                let orders = self
                    .orders
                    .clone()
                    .ok_or_else(|| Error::Usage("missing --order (or --preset)".into()))?;
                let axis = self.axis.clone().ok_or_else(|| {
                    Error::Usage("missing one of --sigma2, --linewidth, --distance (or --preset)".into())
                })?;
                SweepSpec::new("custom", algorithms, orders, vec![11], axis)
            }
        };
        if let Some(a) = &self.algorithms {
            spec.algorithms = a.clone();
        }
        if let Some(o) = &self.orders {
            spec.orders = o.clone();
        }
        if let Some(b) = &self.block_lengths {
            spec.block_lengths = b.clone();
        }
        if spec.block_lengths.is_empty() && spec.algorithms.iter().any(|a| a.uses_block_length()) {
            spec.block_lengths = vec![11];
        }
        if let Some(axis) = &self.axis {
            spec.axis = axis.clone();
        }
        spec.link = self.link()?;
        if let Some(mu) = self.mu {
            spec.mu = mu;
        }
        if let Some(e) = self.estimator {
            spec.estimator = e;
        }
        if let Some(u) = self.unwrap {
            spec.unwrap = u;
        }
        spec.mode = self.mode.unwrap_or(Mode::Both);
        let d = McSettings::default();
        spec.mc = McSettings {
            frame_len: self.frame_len.unwrap_or(d.frame_len),
            symbols: self.symbols,
            frames: self.frames,
            max_symbols: self.max_symbols.unwrap_or(d.max_symbols),
            base_seed: self.seed.unwrap_or(d.base_seed),
            decoding: self.decoding.unwrap_or(d.decoding),
            snr: self.snr_db.map_or(Snr::Noiseless, Snr::EsN0Db),
            eepn: self.eepn.unwrap_or(d.eepn),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn axis_from(sigma2: Vec<f64>, linewidth: Vec<f64>, distance: Vec<f64>) -> Result<Option<Axis>> {
    let given: Vec<Axis> = [
        (!sigma2.is_empty()).then_some(Axis::Variance(sigma2)),
        (!linewidth.is_empty()).then_some(Axis::Linewidth(linewidth)),
        (!distance.is_empty()).then_some(Axis::Distance(distance)),
    ]
    .into_iter()
    .flatten()
    .collect();
    match given.len() {
        0 => Ok(None),
        1 => Ok(given.into_iter().next()),
        _ => Err(Error::Usage(
            "conflicting variance specifications: give only one of sigma2, linewidth, distance".into(),
        )),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value `{}` for key `{key}`", v.trim())))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value `{}` for key `{key}`", value.trim())))
}

/// Parses INI text into a [`RunConfig`]. Unknown sections or keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = RunConfig::default();
    let (mut sigma2, mut linewidth, mut distance) = (Vec::new(), Vec::new(), Vec::new());
    for (section, props) in ini.iter() {
        for (key, value) in props.iter() {
            let qualified = format!("{}.{key}", section.unwrap_or(""));
            match (section, key) {
                (Some("link"), "baud") => cfg.baud = Some(parse_one(key, value)?),
                (Some("link"), "wavelength_nm") => cfg.wavelength_nm = Some(parse_one(key, value)?),
                (Some("link"), "dispersion_ps_nm_km") => cfg.dispersion_ps_nm_km = Some(parse_one(key, value)?),
                (Some("link"), "tx_linewidth_hz") => cfg.tx_linewidth_hz = Some(parse_one(key, value)?),
                (Some("link"), "lo_linewidth_hz") => cfg.lo_linewidth_hz = Some(parse_one(key, value)?),
                (Some("cpr"), "algorithm") => cfg.algorithms = Some(parse_list(key, value)?),
                (Some("cpr"), "order") => cfg.orders = Some(parse_list(key, value)?),
                (Some("cpr"), "block_length") => cfg.block_lengths = Some(parse_list(key, value)?),
                (Some("cpr"), "mu") => cfg.mu = Some(value.parse()?),
                (Some("cpr"), "estimator") => cfg.estimator = Some(value.parse()?),
                (Some("cpr"), "unwrap") => cfg.unwrap = Some(value.parse()?),
                (Some("sweep"), "preset") => cfg.preset = Some(value.trim().to_string()),
                (Some("sweep"), "sigma2") => sigma2 = parse_list(key, value)?,
                (Some("sweep"), "linewidth_hz") => linewidth = parse_list(key, value)?,
                (Some("sweep"), "distance_km") => distance = parse_list(key, value)?,
                (Some("sweep"), "mode") => cfg.mode = Some(value.parse()?),
                (Some("mc"), "symbols") => cfg.symbols = Some(parse_one(key, value)?),
                (Some("mc"), "frames") => cfg.frames = Some(parse_one(key, value)?),
                (Some("mc"), "frame_len") => cfg.frame_len = Some(parse_one(key, value)?),
                (Some("mc"), "max_symbols") => cfg.max_symbols = Some(parse_one(key, value)?),
                (Some("mc"), "seed") => cfg.seed = Some(parse_one(key, value)?),
                (Some("mc"), "decoding") => cfg.decoding = Some(value.parse()?),
                (Some("mc"), "eepn") => cfg.eepn = Some(value.parse()?),
                (Some("mc"), "snr_db") => cfg.snr_db = Some(parse_one(key, value)?),
                _ => return Err(Error::Config(format!("unknown key `{qualified}`"))),
            }
        }
    }
    cfg.axis = axis_from(sigma2, linewidth, distance).map_err(|_| {
        Error::Config("conflicting variance specifications: set only one of sigma2, linewidth_hz, distance_km".into())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn link_overrides(link: &LinkArgs) -> RunConfig {
    RunConfig {
        baud: link.baud,
        wavelength_nm: link.wavelength,
        dispersion_ps_nm_km: link.dispersion,
        tx_linewidth_hz: link.tx_linewidth,
        lo_linewidth_hz: link.lo_linewidth,
        ..RunConfig::default()
    }
}

fn sweep_overrides(args: SweepArgs) -> Result<(RunConfig, Option<PathBuf>, Option<PathBuf>)> {
    let axis = axis_from(args.sigma2, args.linewidth, args.distance)?;
    let cfg = RunConfig {
        preset: args.preset,
        algorithms: (!args.algorithm.is_empty()).then_some(args.algorithm),
        orders: (!args.order.is_empty()).then_some(args.order),
        block_lengths: (!args.block_length.is_empty()).then_some(args.block_length),
        axis,
        mu: args.mu,
        estimator: args.estimator,
        unwrap: args.unwrap,
        ..link_overrides(&args.link)
    };
    Ok((cfg, args.config, args.out))
}

fn resolve(config: Option<&Path>, flags: RunConfig) -> Result<RunConfig> {
    let base = match config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let merged = base.overlay(flags);
    merged.validate()?;
    Ok(merged)
}

/// Runs the CLI with `args` (including the program name), writing results
/// to `out` unless `--out` redirects them.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}")?;
                return Ok(());
            }
            return Err(Error::Usage(e.to_string()));
        }
    };
    let command_line = render_command(&args);
    match cli.command {
        Command::Presets => {
            for (name, description) in experiments::PRESETS {
                writeln!(out, "{name:8} {description}")?;
            }
            Ok(())
        }
        Command::Floor(sweep) => {
            let (flags, config, dest) = sweep_overrides(sweep)?;
            let mut cfg = resolve(config.as_deref(), flags)?;
            cfg.mode = Some(Mode::Analytic);
            let spec = cfg.to_sweep()?;
            let results = experiments::run_sweep(&spec)?;
            let text = floor_csv(&command_line, &spec, &results)?;
            emit(&text, dest.as_deref(), out)
        }
        Command::Simulate(sim) => {
            let (mut flags, config, dest) = sweep_overrides(sim.sweep)?;
            flags.mode = sim.mode;
            flags.symbols = sim.symbols;
            flags.frames = sim.frames;
            flags.frame_len = sim.frame_len;
            flags.max_symbols = sim.max_symbols;
            flags.seed = sim.seed;
            flags.decoding = sim.decoding;
            flags.eepn = sim.eepn;
            flags.snr_db = sim.snr_db;
            let cfg = resolve(config.as_deref(), flags)?;
            let spec = cfg.to_sweep()?;
            let results = experiments::run_sweep(&spec)?;
            let text = simulate_csv(&command_line, &spec, &results)?;
            emit(&text, dest.as_deref(), out)
        }
        Command::Link(args) => {
            let cfg = resolve(args.config.as_deref(), link_overrides(&args.link))?;
            let distance = match (args.distance, &cfg.axis) {
                (Some(d), _) => Some(d),
                (None, Some(Axis::Distance(d))) if d.len() == 1 => Some(d[0]),
                _ => None,
            };
            let text = link_report(&command_line, &cfg, distance)?;
            emit(&text, args.out.as_deref(), out)
        }
    }
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match dest {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render_command(args: &[OsString]) -> String {
    let mut parts = vec!["cprlab".to_string()];
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        let plain = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,=/:+@%".contains(c));
        parts.push(if plain {
            s.into_owned()
        } else {
            format!("'{}'", s.replace('\'', "'\\''"))
        });
    }
    parts.join(" ")
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn header(command_line: &str, spec: &SweepSpec) -> String {
    let mc = &spec.mc;
    let link = &spec.link;
    let mut h = String::new();
    let mut line = |s: String| {
        h.push_str("# ");
        h.push_str(&s);
        h.push('\n');
    };
    line(format!("cprlab {VERSION}"));
    line(format!("command: {command_line}"));
    line(format!("sweep: {}", spec.name));
    line(format!("algorithms: {}", join(&spec.algorithms)));
    line(format!("orders: {}", join(&spec.orders)));
    line(format!("block_lengths: {}", join(&spec.block_lengths)));
    line(format!("axis: {}", spec.axis.name()));
    line(format!(
        "axis_values: {}",
        spec.axis.values().iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
    ));
    line(format!(
        "link: baud={} wavelength_nm={} dispersion_ps_nm_km={} tx_linewidth_hz={} lo_linewidth_hz={}",
        num(link.symbol_rate()),
        num(link.wavelength() * 1e9),
        num(noise::si_to_ps_per_nm_km(link.dispersion())),
        num(link.delta_f_tx()),
        num(link.delta_f_lo()),
    ));
    line(format!("mode: {}", spec.mode));
    line(format!("mu: {}", spec.mu));
    line(format!("estimator: {}", spec.estimator));
    line(format!("unwrap: {}", spec.unwrap));
    if spec.mode.includes_mc() {
        let snr = match mc.snr {
            Snr::Noiseless => "noiseless".to_string(),
            Snr::EsN0Db(db) => format!("{db}"),
        };
        line(format!(
            "mc: symbols={} frames={} frame_len={} max_symbols={} seed={} decoding={} eepn={} snr_db={snr}",
            mc.symbols.map_or("auto".into(), |s| s.to_string()),
            mc.frames.map_or("auto".into(), |f| f.to_string()),
            mc.frame_len,
            mc.max_symbols,
            mc.base_seed,
            mc.decoding,
            mc.eepn,
        ));
    }
    h
}

fn csv_body(rows: Vec<Vec<String>>, columns: &[&str]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

/// Columns of `cprlab floor`.
pub const FLOOR_COLUMNS: [&str; 5] = ["algorithm", "n", "sigma2_total", "block_length", "ber_floor"];

/// Columns of `cprlab simulate`.
pub const SIMULATE_COLUMNS: [&str; 15] = [
    "algorithm",
    "n",
    "block_length",
    "mu",
    "sigma2_total",
    "linewidth_hz",
    "distance_km",
    "analytic_floor",
    "mc_floor",
    "below_resolution",
    "ci_low",
    "ci_high",
    "errors",
    "symbols",
    "seed",
];

fn floor_csv(command_line: &str, spec: &SweepSpec, results: &[FloorResult]) -> Result<String> {
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.point.algorithm.to_string(),
                r.point.order.to_string(),
                num(r.point.sigma2),
                r.point.block_length.map(|n| n.to_string()).unwrap_or_default(),
                num(r.analytic_floor),
            ]
        })
        .collect();
    Ok(header(command_line, spec) + &csv_body(rows, &FLOOR_COLUMNS)?)
}

fn simulate_csv(command_line: &str, spec: &SweepSpec, results: &[FloorResult]) -> Result<String> {
    let rows = results
        .iter()
        .map(|r| {
            let m = r.measured;
            vec![
                r.point.algorithm.to_string(),
                r.point.order.to_string(),
                r.point.block_length.map(|n| n.to_string()).unwrap_or_default(),
                opt_num(r.mu),
                num(r.point.sigma2),
                opt_num(r.point.linewidth_hz),
                opt_num(r.point.distance_km),
                num(r.analytic_floor),
                opt_num(m.and_then(|m| m.ber)),
                m.map(|m| m.below_resolution().to_string()).unwrap_or_default(),
                opt_num(m.map(|m| m.ci_low)),
                opt_num(m.map(|m| m.ci_high)),
                m.map(|m| m.counts.bit_errors.to_string()).unwrap_or_default(),
                m.map(|m| m.counts.symbols.to_string()).unwrap_or_default(),
                m.map(|_| r.seed.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(header(command_line, spec) + &csv_body(rows, &SIMULATE_COLUMNS)?)
}

/// Literature value of L0 quoted for 32 GBd, 1550 nm and 17 ps/nm/km.
const QUOTED_L0_KM: f64 = 60.69;

fn link_report(command_line: &str, cfg: &RunConfig, distance_km: Option<f64>) -> Result<String> {
    let missing: Vec<&str> = [
        ("--baud", cfg.baud.is_none()),
        ("--wavelength", cfg.wavelength_nm.is_none()),
        ("--dispersion", cfg.dispersion_ps_nm_km.is_none()),
        ("--tx-linewidth", cfg.tx_linewidth_hz.is_none()),
        ("--lo-linewidth", cfg.lo_linewidth_hz.is_none()),
        ("--distance", distance_km.is_none()),
    ]
    .into_iter()
    .filter_map(|(flag, absent)| absent.then_some(flag))
    .collect();
    if !missing.is_empty() {
        return Err(Error::Usage(format!("link needs {}", missing.join(", "))));
    }
    let (baud, nm, disp, tx, lo, km) = (
        cfg.baud.unwrap(),
        cfg.wavelength_nm.unwrap(),
        cfg.dispersion_ps_nm_km.unwrap(),
        cfg.tx_linewidth_hz.unwrap(),
        cfg.lo_linewidth_hz.unwrap(),
        distance_km.unwrap(),
    );
    let link = LinkParams::from_engineering(tx, lo, baud, nm, disp, km)?;
    let mut r = format!("# cprlab {VERSION}\n# command: {command_line}\n");
    let mut row = |name: &str, value: String, unit: &str| {
        r.push_str(&format!("{name:<28} {value} {unit}\n"));
    };
    row("symbol_rate", num(baud), "Bd");
    row("wavelength", num(nm), "nm");
    row("dispersion", num(disp), "ps/nm/km");
    row("tx_linewidth", num(tx), "Hz");
    row("lo_linewidth", num(lo), "Hz");
    row("distance", num(km), "km");
    row(
        "laser_phase_noise_variance",
        num(noise::laser_pn_variance(&link)),
        "rad^2",
    );
    row("eepn_variance", num(noise::eepn_variance(&link)), "rad^2");
    row("total_variance", num(noise::total_variance(&link)), "rad^2");
    row("effective_linewidth", num(noise::effective_linewidth(&link)), "Hz");
    let l0 = match noise::crossover_distance(&link) {
        Ok(m) => Some(noise::m_to_km(m)),
        Err(Error::NoCrossover) => None,
        Err(e) => return Err(e),
    };
    match l0 {
        Some(l0) => row("crossover_distance_l0", num(l0), "km"),
        None => row(
            "crossover_distance_l0",
            "none".into(),
            "(dispersion is zero, EEPN never accrues)",
        ),
    }
    let reference = baud == 32e9 && nm == 1550.0 && disp == 17.0;
    if let (true, Some(l0)) = (reference, l0) {
        r.push_str(&format!(
            "# note: L0 = 8*c*T_S^2/(lambda^2*D) gives {l0:.2} km here; {QUOTED_L0_KM} km is quoted in the literature for these parameters.\n"
        ));
    }
    Ok(r)
}
