//! Config-driven experiment runner and the pipelines behind each subcommand.
//!
//! Exit codes: 0 on success, 1 for invalid input or I/O failures, 2 when a
//! numerical budget (leakage, convergence, dimension cap, oracle tolerance)
//! is violated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bethe::{f_bound, AsymptoticInput, MagnonTable};
use crate::disorder::{localization_diagnostics, make_sequence, SequenceSpec};
use crate::dynamics::{
    cumulative_from_states, evolve, truncation_interval, variance_szs, CumulativeProfile, EvolveOptions, Propagator,
    SectorWaveFunction,
};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_pseudo_nonsymmetric, build_pseudo_symmetric, ModelParams, SectorBasis};
use crate::lattice::{map_spins_to_pseudo, SpeciesSequence, SpinWindow};
use crate::oracle::{oracle_diff, EdRun};

/// Bundled configuration reproducing the cumulative distributions of the
/// symmetric model.
pub const FIG2_CONFIG: &str = include_str!("../configs/fig2.toml");
/// Bundled configuration reproducing the localization heatmaps.
pub const FIG3_CONFIG: &str = include_str!("../configs/fig3.toml");

#[derive(Debug, Parser)]
#[command(name = "qjam", version, about = "Impurity dynamics in jammed spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for disordered sequences (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Map a spin window to its species sequence and impurity pseudopositions.
    Map,
    /// Evolve impurities in the pseudospace and write cumulative distributions.
    Evolve,
    /// Tabulate the asymptotic cumulative distributions.
    Bethe,
    /// Localization heatmaps and transmitted weights.
    Disorder,
    /// Variance of the staggered magnetisation for one impurity.
    Variance,
    /// Compare the pseudospace pipeline with full exact diagonalization.
    OracleDiff,
    /// Run a bundled figure configuration.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
}

/// One experiment; every section is optional and only the one used by the
/// subcommand is required.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub model: Option<ModelParams>,
    pub sequence: Option<SequenceSpec>,
    pub map: Option<MapConfig>,
    pub evolve: Option<EvolveConfig>,
    pub bethe: Option<BetheConfig>,
    pub disorder: Option<DisorderConfig>,
    pub variance: Option<VarianceConfig>,
    pub oracle: Option<OracleConfig>,
}

/// Spins as a string of `u`/`d` (or `1`/`0`); the first one sits at `anchor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub spins: String,
    #[serde(default)]
    pub anchor: i64,
    #[serde(default = "default_pad")]
    pub left_pad: String,
    #[serde(default = "default_pad")]
    pub right_pad: String,
}

fn default_pad() -> String {
    "u".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// Initial impurity pseudopositions, increasing.
    pub positions: Vec<i64>,
    pub times: Vec<f64>,
    /// Use the non-symmetric model with the configured sequence.
    #[serde(default)]
    pub nonsymmetric: bool,
    #[serde(default)]
    pub propagator: PropagatorChoice,
    #[serde(default = "default_leakage_margin")]
    pub leakage_margin: usize,
}

fn default_leakage_margin() -> usize {
    5
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorChoice {
    #[default]
    Auto,
    Dense,
    Chebyshev,
}

impl From<PropagatorChoice> for Propagator {
    fn from(p: PropagatorChoice) -> Self {
        match p {
            PropagatorChoice::Auto => Propagator::Auto,
            PropagatorChoice::Dense => Propagator::Dense,
            PropagatorChoice::Chebyshev => Propagator::Chebyshev,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetheConfig {
    pub d0: Vec<i64>,
    /// Each entry adds a curve set with the scattering phase replaced by -1.
    #[serde(default = "default_trivial")]
    pub trivial_phase: Vec<bool>,
    pub n_p: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
}

fn default_trivial() -> Vec<bool> {
    vec![false]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub v_values: Vec<f64>,
    #[serde(default)]
    pub n0: i64,
    /// Disordered window, inclusive; also the barrier for transmitted weight.
    pub barrier: (i64, i64),
    /// Consecutive seeds starting at the run seed for averaged transmission.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_radius")]
    pub radius: i64,
    pub times: Vec<f64>,
    /// Heatmap columns, inclusive.
    pub x_range: (i64, i64),
}

fn default_seeds() -> u64 {
    1
}

fn default_radius() -> i64 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Initial spins, `u`/`d`, one per site of the chain.
    pub spins: String,
    pub times: Vec<f64>,
    #[serde(default)]
    pub nonsymmetric: bool,
    /// Sites excluded at each end from the comparison.
    #[serde(default)]
    pub margin: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-9
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(m) = &cfg.model {
            m.validate()?;
        }
        Ok(cfg)
    }

    fn model(&self) -> Result<ModelParams> {
        self.model.ok_or_else(|| missing("model"))
    }

    fn sequence(&self, y: u32) -> Result<SpeciesSequence> {
        let spec = self.sequence.clone().unwrap_or_default();
        make_sequence(&spec, y)
    }
}

fn missing(section: &str) -> Error {
    Error::Invalid(format!("config section [{section}] is required"))
}

fn parse_spins(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'u' | 'U' | '1' => Ok(true),
            'd' | 'D' | '0' => Ok(false),
            _ => Err(Error::Parse(format!("spin character {c:?} is not u/d/1/0"))),
        })
        .collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("times must be a non-empty, non-negative, increasing list".into()));
    }
    Ok(())
}

/// Evolves impurities from `positions` and returns one cumulative profile
/// per impurity. With a sequence the non-symmetric model is used.
pub fn impurity_profiles(
    p: &ModelParams,
    seq: Option<&SpeciesSequence>,
    positions: &[i64],
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<CumulativeProfile>> {
    check_times(times)?;
    let nu = positions.len();
    let t_max = times[times.len() - 1];
    let (lo, hi) = truncation_interval(positions, p.j, t_max);
    let basis = SectorBasis::new(nu, lo, hi)?;
    let h = match seq {
        Some(s) => build_pseudo_nonsymmetric(p, s, &basis)?,
        None => build_pseudo_symmetric(p, &basis)?,
    };
    let psi0 = SectorWaveFunction::basis_state(&basis, positions)?;
    let states = evolve(&h, &psi0, times, opts)?;
    (1..=nu).map(|k| cumulative_from_states(&states, k)).collect()
}

/// Sup-norm distance between evolved and asymptotic cumulative distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticGap {
    pub time: f64,
    /// One entry per impurity.
    pub gap: [f64; 2],
}

/// Two impurities at `0` and `d0` in the symmetric model: the largest
/// `|F_t^{(k)}(x) - F_m^{(k)}(v) - F_b(v)|` over `|x - d0/2| <= 3.5 J t`, with
/// `v = (x - d0/2) / t`.
pub fn asymptotic_gaps(p: &ModelParams, d0: i64, n_p: usize, times: &[f64]) -> Result<Vec<AsymptoticGap>> {
    let input = AsymptoticInput::new(p.delta, p.g, d0, n_p)?;
    let tables = [MagnonTable::new(1, &input)?, MagnonTable::new(2, &input)?];
    let profiles = impurity_profiles(p, None, &[0, d0], times, &EvolveOptions::default())?;
    let mid = d0 as f64 / 2.0;
    let mut out = Vec::new();
    for (ti, &t) in times.iter().enumerate() {
        let reach = 3.5 * p.j.abs() * t;
        let (xa, xb) = ((mid - reach).ceil() as i64, (mid + reach).floor() as i64);
        let mut gap = [0.0f64; 2];
        for x in xa..=xb {
            let v = (x as f64 - mid) / (p.j * t);
            let fb = f_bound(v, &input)?;
            for k in 0..2 {
                let d = (profiles[k].at(ti, x) - tables[k].eval(v) - fb).abs();
                gap[k] = gap[k].max(d);
            }
        }
        out.push(AsymptoticGap { time: t, gap });
    }
    Ok(out)
}

/// Variance of the staggered magnetisation for one impurity started at
/// pseudoposition 0, at each time.
pub fn variance_series(p: &ModelParams, seq: &SpeciesSequence, times: &[f64]) -> Result<Vec<f64>> {
    let prof = impurity_profiles(p, Some(seq), &[0], times, &EvolveOptions::default())?;
    let (lo, hi) = (prof[0].x_lo, prof[0].x_hi());
    let window = 2 * (hi.min(-lo) - 5);
    (0..times.len())
        .map(|ti| variance_szs(|x| prof[0].at(ti, x), seq, None, 0.0, window))
        .collect()
}

/// Mean transmitted weight at time `t` over `seeds` consecutive seeds, with
/// the disordered window used as barrier.
pub fn mean_transmission(
    p: &ModelParams,
    base: &SequenceSpec,
    barrier: (i64, i64),
    first_seed: u64,
    seeds: u64,
    t: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for s in first_seed..first_seed + seeds {
        let seq = make_sequence(&base.clone().with_window(barrier.0, barrier.1, s), p.y)?;
        acc += localization_diagnostics(p, &seq, 0, barrier, 3, &[t])?.transmitted[0];
    }
    Ok(acc / seeds as f64)
}

/// Artifacts of one run, written under a directory with a manifest.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body.into_bytes()));
    }

    fn write(mut self) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let mut manifest = String::new();
        for (name, body) in &self.files {
            fs::write(self.dir.join(name), body)?;
            let hash: String = Sha256::digest(body).iter().map(|b| format!("{b:02x}")).collect();
            let _ = writeln!(manifest, "{hash}  {name}");
        }
        fs::write(self.dir.join("manifest.sha256"), manifest)?;
        Ok(self.dir)
    }
}

fn join_row<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn run_map(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let m = cfg.map.as_ref().ok_or_else(|| missing("map"))?;
    let y = cfg.model.map_or(2, |p| p.y);
    let w = SpinWindow::new(y, m.anchor, parse_spins(&m.spins)?, parse_spins(&m.left_pad)?, parse_spins(&m.right_pad)?)?;
    let (seq, c) = map_spins_to_pseudo(&w)?;
    let (lo, hi) = seq.window();
    let mut s = String::from("j,species,vacuum_macroposition\n");
    for j in lo..=hi {
        let _ = writeln!(s, "{j},{},{}", seq.species(j), seq.vacuum_macro(j));
    }
    out.add("sequence.csv", s);
    let mut s = String::from("impurity,pseudoposition\n");
    for (i, n) in c.positions().iter().enumerate() {
        let _ = writeln!(s, "{},{n}", i + 1);
    }
    out.add("impurities.csv", s);
    Ok(())
}

fn run_evolve(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let e = cfg.evolve.as_ref().ok_or_else(|| missing("evolve"))?;
    let p = cfg.model()?;
    let seq = if e.nonsymmetric { Some(cfg.sequence(p.y)?) } else { None };
    let opts = EvolveOptions { propagator: e.propagator.into(), leakage_margin: Some(e.leakage_margin), ..Default::default() };
    let profiles = impurity_profiles(&p, seq.as_ref(), &e.positions, &e.times, &opts)?;
    let mut s = String::from("t,x");
    for k in 1..=profiles.len() {
        let _ = write!(s, ",F{k}");
    }
    s.push('\n');
    let (lo, hi) = (profiles[0].x_lo, profiles[0].x_hi());
    for (ti, t) in e.times.iter().enumerate() {
        for x in lo..=hi {
            let _ = writeln!(s, "{t},{x},{}", join_row(profiles.iter().map(|f| f.at(ti, x))));
        }
    }
    out.add("cumulative.csv", s);
    Ok(())
}

fn run_bethe(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let b = cfg.bethe.as_ref().ok_or_else(|| missing("bethe"))?;
    let p = cfg.model()?;
    if b.v_points < 2 || b.v_max <= b.v_min {
        return Err(Error::Invalid("velocity grid needs v_max > v_min and at least 2 points".into()));
    }
    for &d0 in &b.d0 {
        for &trivial in &b.trivial_phase {
            let mut input = AsymptoticInput::new(p.delta, p.g, d0, b.n_p)?;
            input.trivial_phase = trivial;
            let t1 = MagnonTable::new(1, &input)?;
            let t2 = MagnonTable::new(2, &input)?;
            let mut s = String::from("x_over_t,F_magnon_1,F_magnon_2,F_bound,F_total_1,F_total_2\n");
            for i in 0..b.v_points {
                let v = b.v_min + (b.v_max - b.v_min) * i as f64 / (b.v_points - 1) as f64;
                let fb = if trivial { 0.0 } else { f_bound(v / p.j, &input)? };
                let (m1, m2) = (t1.eval(v / p.j), t2.eval(v / p.j));
                let _ = writeln!(s, "{}", join_row([v, m1, m2, fb, m1 + fb, m2 + fb]));
            }
            let tag = if trivial { "trivial" } else { "full" };
            out.add(format!("bethe_d{d0}_{tag}.csv"), s);
        }
    }
    Ok(())
}

fn run_disorder(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let d = cfg.disorder.as_ref().ok_or_else(|| missing("disorder"))?;
    let base = cfg.model()?;
    let spec = cfg.sequence.clone().unwrap_or_default();
    check_times(&d.times)?;
    if d.x_range.1 < d.x_range.0 || d.seeds == 0 {
        return Err(Error::Invalid("x_range must be increasing and seeds positive".into()));
    }
    let mut summary = String::from("V,disordered,seed,t,transmitted,pinned,localized_weight\n");
    for &v in &d.v_values {
        let p = ModelParams { v, ..base };
        p.validate()?;
        for disordered in [false, true] {
            let seeds = if disordered { cfg.seed..cfg.seed + d.seeds } else { cfg.seed..cfg.seed + 1 };
            for seed in seeds {
                let s = if disordered { spec.clone().with_window(d.barrier.0, d.barrier.1, seed) } else { spec.clone() };
                let seq = make_sequence(&s, p.y)?;
                let r = localization_diagnostics(&p, &seq, d.n0, d.barrier, d.radius, &d.times)?;
                for (ti, t) in d.times.iter().enumerate() {
                    let _ = writeln!(
                        summary,
                        "{v},{disordered},{seed},{t},{},{},{}",
                        r.transmitted[ti], r.pinned[ti], r.localized_weight
                    );
                }
                if seed == cfg.seed {
                    let mut h = String::from("t");
                    for x in d.x_range.0..=d.x_range.1 {
                        let _ = write!(h, ",{x}");
                    }
                    h.push('\n');
                    for (ti, t) in d.times.iter().enumerate() {
                        let row = (d.x_range.0..=d.x_range.1).map(|x| r.cumulative.at(ti, x));
                        let _ = writeln!(h, "{t},{}", join_row(row));
                    }
                    let tag = if disordered { "disordered" } else { "clean" };
                    out.add(format!("heatmap_V{v}_{tag}.csv"), h);
                }
            }
        }
    }
    out.add("transmission.csv", summary);
    Ok(())
}

fn run_variance(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let vc = cfg.variance.as_ref().ok_or_else(|| missing("variance"))?;
    let p = cfg.model()?;
    let seq = cfg.sequence(p.y)?;
    let var = variance_series(&p, &seq, &vc.times)?;
    let mut s = String::from("t,variance,variance_over_t2\n");
    for (t, v) in vc.times.iter().zip(&var) {
        let over = if *t > 0.0 { v / (t * t) } else { f64::NAN };
        let _ = writeln!(s, "{t},{v},{over}");
    }
    out.add("variance.csv", s);
    Ok(())
}

fn run_oracle(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let o = cfg.oracle.as_ref().ok_or_else(|| missing("oracle"))?;
    let p = cfg.model()?;
    let initial = parse_spins(&o.spins)?;
    let run = EdRun {
        len: initial.len(),
        params: p,
        include_hi: o.nonsymmetric,
        sites: (0..initial.len()).collect(),
        initial,
        times: o.times.clone(),
        pairs: Vec::new(),
    };
    let d = oracle_diff(&run, o.margin)?;
    out.add(
        "oracle.csv",
        format!("nu,ed_dim,sector_dim,max_deviation\n{},{},{},{}\n", d.nu, d.ed_dim, d.sector_dim, d.max_deviation),
    );
    if d.max_deviation > o.tolerance {
        return Err(Error::Convergence(format!(
            "oracle deviation {:e} exceeds tolerance {:e}",
            d.max_deviation, o.tolerance
        )));
    }
    Ok(())
}

/// Runs one subcommand and writes its artifacts, a `run.toml` sidecar with
/// the effective configuration, and `manifest.sha256`.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let (command, text) = match cli.command {
        Command::Reproduce { figure: Figure::Fig2 } => (Command::Bethe, FIG2_CONFIG.to_string()),
        Command::Reproduce { figure: Figure::Fig3 } => (Command::Disorder, FIG3_CONFIG.to_string()),
        c => {
            let path = cli.config.as_ref().ok_or_else(|| Error::Invalid("--config is required".into()))?;
            (c, fs::read_to_string(path)?)
        }
    };
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dir = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    cfg.output = Some(dir.clone());
    let mut out = Artifacts::new(dir);
    let outcome = match command {
        Command::Map => run_map(&cfg, &mut out),
        Command::Evolve => run_evolve(&cfg, &mut out),
        Command::Bethe => run_bethe(&cfg, &mut out),
        Command::Disorder => run_disorder(&cfg, &mut out),
        Command::Variance => run_variance(&cfg, &mut out),
        Command::OracleDiff => run_oracle(&cfg, &mut out),
        Command::Reproduce { .. } => unreachable!("reproduce resolves to a pipeline above"),
    };
    if outcome.is_ok() || !out.files.is_empty() {
        let sidecar = toml::to_string(&cfg).map_err(|e| Error::Parse(e.to_string()))?;
        out.add("run.toml", sidecar);
        out.write()?;
    }
    outcome.map(|_| cli.out.clone().or(cfg.output).unwrap_or_default())
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(dir) => {
            println!("wrote {}", Path::new(&dir).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("qjam-cli-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    fn cli_with(command: Command, text: &str, name: &str) -> (Cli, PathBuf) {
        let dir = tmp(name);
        fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("cfg.toml");
        fs::write(&cfg, text).unwrap();
        let out = dir.join("out");
        (Cli { command, config: Some(cfg), out: Some(out.clone()), seed: None }, out)
    }

    #[test]
    fn test_bundled_configs_parse() {
        let f2 = ExperimentConfig::parse(FIG2_CONFIG).unwrap();
        assert_eq!(f2.bethe.unwrap().d0, vec![1, 3, 6]);
        let f3 = ExperimentConfig::parse(FIG3_CONFIG).unwrap();
        assert_eq!(f3.disorder.unwrap().v_values, vec![0.1, 0.3, 0.5]);
    }

    #[test]
    fn test_unknown_keys_rejected() {
        let e = ExperimentConfig::parse("seed = 1\nbogus = 2\n").unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert!(ExperimentConfig::parse("[model]\nJ = 1.0\nDelta = 0.5\ng = 0.0\nV = 0.0\nW = 1\n").is_err());
        assert!(ExperimentConfig::parse("[model]\nJ = 0.0\nDelta = 0.5\ng = 0.0\nV = 0.0\n").is_err());
    }

    #[test]
    fn test_map_subcommand() {
        let (cli, out) = cli_with(Command::Map, "[map]\nspins = \"uduudduudu\"\n", "map");
        run(&cli).unwrap();
        let imp = fs::read_to_string(out.join("impurities.csv")).unwrap();
        assert_eq!(imp.lines().count(), 2);
        let manifest = fs::read_to_string(out.join("manifest.sha256")).unwrap();
        assert_eq!(manifest.lines().count(), 3);
    }

    #[test]
    fn test_evolve_reproducible() {
        let text = "[model]\nJ = 1.0\nDelta = 0.5\ng = -1.0\nV = 0.5\n[evolve]\npositions = [0, 2]\ntimes = [0.0, 1.0, 2.0]\nnonsymmetric = true\n";
        let (cli, out) = cli_with(Command::Evolve, text, "evolve");
        run(&cli).unwrap();
        let a = fs::read(out.join("cumulative.csv")).unwrap();
        run(&cli).unwrap();
        assert_eq!(a, fs::read(out.join("cumulative.csv")).unwrap());
        let body = String::from_utf8(a).unwrap();
        assert!(body.starts_with("t,x,F1,F2\n"));
    }

    #[test]
    fn test_oracle_diff_exit_codes() {
        let base = "[model]\nJ = 1.0\nDelta = 0.5\ng = -1.0\nV = 0.3\n[oracle]\nspins = \"ududduudud\"\ntimes = [0.5, 1.0]\nnonsymmetric = true\n";
        let (cli, out) = cli_with(Command::OracleDiff, base, "oracle");
        run(&cli).unwrap();
        assert!(out.join("oracle.csv").exists());
        let strict = format!("{base}tolerance = -1.0\n");
        let (cli, _) = cli_with(Command::OracleDiff, &strict, "oracle-strict");
        assert_eq!(exit_code(&run(&cli).unwrap_err()), 2);
    }

    #[test]
    fn test_leakage_is_numerical_failure() {
        let text = "[model]\nJ = 1.0\nDelta = 0.0\ng = 0.0\nV = 0.0\n[evolve]\npositions = [0]\ntimes = [1.0]\nleakage_margin = 1000\n";
        let (cli, _) = cli_with(Command::Evolve, text, "leak");
        assert_eq!(exit_code(&run(&cli).unwrap_err()), 2);
    }

    #[test]
    fn test_missing_section_is_invalid() {
        let (cli, _) = cli_with(Command::Bethe, "seed = 3\n", "missing");
        assert_eq!(exit_code(&run(&cli).unwrap_err()), 1);
    }
}
