//! The `rpolar` command line.
//!
//! Exit codes: 0 success, 2 parse error, 3 invalid weights or values, 4 I/O.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::energy::{reduced_energy, CosseratWeights, DeformationGradient, Regime};
use crate::error::Error;
use crate::matcore::{diag, to_rows, Matrix, Rotation};
use crate::ndim;
use crate::oracle::{self, OracleConfig};
use crate::planar;
use crate::spatial::{self, classify_sum, Domain};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: message.into() }
    }

    fn domain(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DOMAIN, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        CliError { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotSquare { .. } | Error::NonFinite => CliError::parse(e.to_string()),
            _ => CliError::domain(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rpolar", version, about = "Energy-minimizing rotations of the Cosserat shear-stretch energy")]
pub struct Cli {
    /// Worker threads for the oracle (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimizers for one deformation gradient, as JSON.
    Solve(SolveArgs),
    /// Planar pitchfork: optimal relative angles against tr U, as CSV.
    SweepPlanar(SweepPlanarArgs),
    /// Monte-Carlo relative angles in 3D against nu1 + nu2, as CSV.
    ScatterMc(ScatterArgs),
    /// Reduced energy on a grid of unordered singular values, as CSV.
    IsoGrid(IsoGridArgs),
    /// Global minimum for a diagonal stretch in any dimension, as JSON.
    Ndim(NdimArgs),
}

#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub muc: f64,
}

impl WeightArgs {
    fn weights(&self) -> CliResult<CosseratWeights> {
        Ok(CosseratWeights::new(self.mu, self.muc)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Also read from RELAXED_POLAR_SEED; the flag wins.
    #[arg(long, env = "RELAXED_POLAR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Random restarts of the oracle.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Leave out the closed-form warm starts.
    #[arg(long)]
    pub cold: bool,
}

impl OracleArgs {
    fn config(&self) -> CliResult<OracleConfig> {
        if self.samples == 0 || self.max_iters == 0 {
            return Err(CliError::domain("--samples and --max-iters must be positive"));
        }
        let mut cfg = OracleConfig::with_seed(self.seed).samples(self.samples);
        cfg.max_iters = self.max_iters;
        cfg.warm_starts = !self.cold;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// `[[..],[..]]` JSON rows, or rows of whitespace-separated numbers
    /// separated by newlines or `;`.
    #[arg(long, conflicts_with_all = ["file", "shear"])]
    pub matrix: Option<String>,
    /// File holding the matrix in either format.
    #[arg(long, conflicts_with = "shear")]
    pub file: Option<PathBuf>,
    /// Planar simple shear `[[1, gamma], [0, 1]]`.
    #[arg(long, allow_negative_numbers = true)]
    pub shear: Option<f64>,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Append the oracle minimum and its gap to the closed form.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub min: f64,
    #[arg(long)]
    pub max: f64,
    #[arg(long)]
    pub count: usize,
}

impl RangeArgs {
    fn values(&self) -> CliResult<Vec<f64>> {
        if self.count < 2 || !(self.min < self.max) || !(self.min > 0.0) || !self.max.is_finite() {
            return Err(CliError::domain("range needs 0 < min < max and count >= 2"));
        }
        let span = self.max - self.min;
        let last = (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.min + span * i as f64 / last).collect())
    }
}

#[derive(Debug, Args)]
pub struct SweepPlanarArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    /// Fixed ratio nu1 / nu2 of the swept gradients `diag(nu1, nu2)`.
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    /// `MU,MUC`; repeat for several weight pairs.
    #[arg(long = "weights", value_parser = parse_weight_pair, default_value = "1,0")]
    pub weights: Vec<(f64, f64)>,
    /// Ratio nu1 / nu2.
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    /// Smallest singular value; halved nu2 is used where it would not be
    /// the smallest.
    #[arg(long, default_value_t = 0.5)]
    pub nu3: f64,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IsoGridArgs {
    /// Comma-separated contour levels.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.4,0.8")]
    pub levels: Vec<f64>,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NdimArgs {
    /// Singular values, any order.
    #[arg(required = true, num_args = 1.., allow_negative_numbers = true)]
    pub nus: Vec<f64>,
    /// List every critical point (n <= 10).
    #[arg(long)]
    pub census: bool,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

fn parse_weight_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected MU,MUC, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Parses a JSON array of rows or whitespace-separated rows.
pub fn parse_matrix(text: &str) -> CliResult<Matrix> {
    let text = text.trim();
    let rows: Vec<Vec<f64>> = if text.starts_with('[') {
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("matrix JSON: {e}")))?
    } else {
        text.split(['\n', ';'])
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|x| x.parse::<f64>().map_err(|e| CliError::parse(format!("{x:?}: {e}"))))
                    .collect()
            })
            .collect::<CliResult<_>>()?
    };
    if rows.is_empty() {
        return Err(CliError::parse("empty matrix"));
    }
    Ok(crate::matcore::from_rows(&rows)?)
}

fn read_gradient(args: &SolveArgs) -> CliResult<DeformationGradient> {
    let m = match (&args.matrix, &args.file, args.shear) {
        (Some(s), _, _) => parse_matrix(s)?,
        (_, Some(p), _) => parse_matrix(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
        (_, _, Some(g)) => {
            if !g.is_finite() {
                return Err(CliError::parse("shear must be finite"));
            }
            Matrix::from_row_slice(2, 2, &[1.0, g, 0.0, 1.0])
        }
        _ => return Err(CliError::parse("one of --matrix, --file or --shear is required")),
    };
    Ok(DeformationGradient::new(m)?)
}

fn rows(r: &Rotation) -> Value {
    json!(to_rows(r.matrix()))
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Classical => "Classical",
        Regime::NonClassical => "NonClassical",
    }
}

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Classical => "Classical",
        Domain::Boundary => "Boundary",
        Domain::NonClassical => "NonClassical",
    }
}

/// JSON report of the closed-form solution.
pub fn solve_report(w: &CosseratWeights, f: &DeformationGradient) -> CliResult<Value> {
    let mut report = json!({
        "dimension": f.dim(),
        "weights": { "mu": w.mu(), "muc": w.muc() },
        "regime": regime_name(w.regime()),
        "singular_radius": w.singular_radius(),
        "scaling": w.scaling(),
        "singular_values": f.singular_values(),
        "polar_factor": rows(&f.polar().rotation),
    });
    let obj = report.as_object_mut().expect("object literal");
    match f.dim() {
        2 => {
            let s = planar::optimal_angles(w, f)?;
            obj.insert("minimizers".into(), s.minimizers.iter().map(rows).collect());
            let labels = if s.bifurcated { vec!["Plus", "Minus"] } else { vec!["Polar"] };
            obj.insert("branch_labels".into(), json!(labels));
            obj.insert("relative_angles".into(), json!(s.relative_angles));
            obj.insert("branch_angles".into(), json!(s.branch_angles));
            obj.insert("polar_angle".into(), json!(s.polar_angle));
            obj.insert("tr_u".into(), json!(s.tr_u));
            obj.insert("domain".into(), json!(domain_name(s.domain)));
            obj.insert("reduced_energy".into(), json!(s.reduced_energy));
        }
        3 => {
            let s = spatial::rpolar_3d(w, f)?;
            obj.insert("minimizers".into(), s.minimizers.iter().map(rows).collect());
            obj.insert("branch_labels".into(), json!(s.labels));
            obj.insert("relative_angles".into(), json!(s.relative_angles));
            obj.insert("axis".into(), json!(s.axis));
            obj.insert("u_mmp".into(), json!(s.u_mmp));
            obj.insert("s_mmp".into(), json!(s.s_mmp));
            obj.insert("degenerate".into(), json!(s.degenerate));
            obj.insert("domain".into(), json!(domain_name(s.domain)));
            obj.insert("reduced_energy".into(), json!(s.reduced_energy));
        }
        _ => {
            let nu = f.singular_values();
            let minimizers = ndim::rpolar_nd(w, f);
            let k = minimizers.len().trailing_zeros() as usize;
            // Sign pattern of the pair angles, in binary order.
            let labels: Vec<String> = (0..minimizers.len())
                .map(|bits| if k == 0 { "Polar".into() } else { (0..k).map(|i| if bits >> i & 1 == 1 { '-' } else { '+' }).collect() })
                .collect();
            let domain = match (w.singular_radius(), nu.get(1)) {
                (Some(rho), Some(nu2)) => classify_sum(nu[0] + nu2, rho),
                _ => Domain::Classical,
            };
            let angles: Vec<Vec<f64>> = minimizers
                .iter()
                .map(|r| {
                    let rel = crate::energy::relative_rotation(r, f).expect("dimensions match");
                    (0..k).map(|i| rel[(2 * i + 1, 2 * i)].atan2(rel[(2 * i, 2 * i)])).collect()
                })
                .collect();
            obj.insert("minimizers".into(), minimizers.iter().map(rows).collect());
            obj.insert("branch_labels".into(), json!(labels));
            obj.insert("relative_angles".into(), json!(angles));
            obj.insert("pairs".into(), json!(k));
            obj.insert("domain".into(), json!(domain_name(domain)));
            obj.insert("reduced_energy".into(), json!(reduced_energy(w, f)));
        }
    }
    Ok(report)
}

fn verify_report(w: &CosseratWeights, f: &DeformationGradient, cfg: &OracleConfig) -> Value {
    let res = oracle::global_minimize(w, f, cfg);
    let wred = reduced_energy(w, f);
    json!({
        "oracle_best_energy": res.best_energy,
        "gap": res.best_energy - wred,
        "grad_norm_at_best": res.grad_norm_at_best,
        "restarts_converged": res.restarts_converged,
        "warm_starts": res.warm_started,
        "samples": cfg.samples,
        "seed": cfg.seed,
    })
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let w = args.weights.weights()?;
    let f = read_gradient(args)?;
    let mut report = solve_report(&w, &f)?;
    if args.verify {
        let cfg = args.oracle.config()?;
        report["verify"] = verify_report(&w, &f, &cfg);
    }
    emit_json(&report, out)
}

fn emit_json(v: &Value, out: &mut dyn Write) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn write_csv(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn check_ratio(ratio: f64) -> CliResult<()> {
    if !(ratio >= 1.0 && ratio.is_finite()) {
        return Err(CliError::domain("--ratio must be at least 1"));
    }
    Ok(())
}

/// CSV `tr_U,beta_plus,beta_minus,wred,bifurcated` for `F = diag(r nu2, nu2)`
/// with `tr U` on the grid.
pub fn sweep_planar_csv(w: &CosseratWeights, grid: &[f64], ratio: f64) -> CliResult<String> {
    check_ratio(ratio)?;
    let mut csv = String::from("tr_U,beta_plus,beta_minus,wred,bifurcated\n");
    for &t in grid {
        let nu2 = t / (1.0 + ratio);
        let f = DeformationGradient::diagonal(&[ratio * nu2, nu2])?;
        let s = planar::optimal_angles(w, &f)?;
        let (bp, bm) = if s.bifurcated { (s.relative_angles[0], s.relative_angles[1]) } else { (0.0, 0.0) };
        writeln!(csv, "{t},{bp},{bm},{},{}", s.reduced_energy, s.bifurcated).expect("string write");
    }
    Ok(csv)
}

fn cmd_sweep_planar(args: &SweepPlanarArgs) -> CliResult<()> {
    let w = args.weights.weights()?;
    let csv = sweep_planar_csv(&w, &args.range.values()?, args.ratio)?;
    write_csv(&args.out, &csv)
}

/// Singular values of the scatter point with `nu1 + nu2 = sum`.
pub fn scatter_singular_values(sum: f64, ratio: f64, nu3: f64) -> [f64; 3] {
    let nu2 = sum / (1.0 + ratio);
    let nu3 = if nu3 < nu2 { nu3 } else { 0.5 * nu2 };
    [ratio * nu2, nu2, nu3]
}

/// CSV `nu1_plus_nu2,beta_mc,beta_predicted,weights_mu,weights_muc,seed`.
///
/// Each point is `F = Q1 diag(nu) Q2` with Haar rotations drawn from the
/// stream of the point index; `beta_mc` is the magnitude of the relative
/// angle of the oracle minimizer, `beta_predicted` the closed-form
/// `arccos(rho / (nu1 + nu2))` (0 on the classical side).
pub fn scatter_mc_csv(weights: &[CosseratWeights], grid: &[f64], ratio: f64, nu3: f64, cfg: &OracleConfig) -> CliResult<String> {
    check_ratio(ratio)?;
    if !(nu3 > 0.0 && nu3.is_finite()) {
        return Err(CliError::domain("--nu3 must be positive"));
    }
    let mut csv = String::from("nu1_plus_nu2,beta_mc,beta_predicted,weights_mu,weights_muc,seed\n");
    let mut point = 0u64;
    for w in weights {
        for &sum in grid {
            let nu = scatter_singular_values(sum, ratio, nu3);
            let mut rng = oracle::restart_rng(cfg.seed, u64::MAX - point);
            point += 1;
            let q1 = oracle::haar_sample(3, &mut rng);
            let q2 = oracle::haar_sample(3, &mut rng);
            let f = DeformationGradient::new(q1.matrix() * diag(&nu) * q2.matrix())?;
            let res = oracle::global_minimize(w, &f, cfg);
            let beta_mc = oracle::relative_angle(&res.best_rotation, &f).abs();
            let beta_predicted = w.singular_radius().map_or(0.0, |rho| planar::branch_angle(sum, rho));
            writeln!(csv, "{sum},{beta_mc},{beta_predicted},{},{},{}", w.mu(), w.muc(), cfg.seed).expect("string write");
        }
    }
    Ok(csv)
}

fn cmd_scatter_mc(args: &ScatterArgs) -> CliResult<()> {
    let weights = args
        .weights
        .iter()
        .map(|&(mu, muc)| CosseratWeights::new(mu, muc))
        .collect::<crate::error::Result<Vec<_>>>()?;
    let csv = scatter_mc_csv(&weights, &args.range.values()?, args.ratio, args.nu3, &args.oracle.config()?)?;
    write_csv(&args.out, &csv)
}

/// CSV `nu1,nu2,nu3,wred,level_index` over the cube `grid^3`, where
/// `level_index` counts the levels at or below `wred`.
pub fn iso_grid_csv(w: &CosseratWeights, levels: &[f64], grid: &[f64]) -> CliResult<String> {
    if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(CliError::domain("levels must be positive"));
    }
    let mut csv = String::from("nu1,nu2,nu3,wred,level_index\n");
    for &a in grid {
        for &b in grid {
            for &c in grid {
                let wred = ndim::reduced_energy_weighted(w, &[a, b, c]);
                let idx = levels.iter().filter(|l| **l <= wred).count();
                writeln!(csv, "{a},{b},{c},{wred},{idx}").expect("string write");
            }
        }
    }
    Ok(csv)
}

fn cmd_iso_grid(args: &IsoGridArgs) -> CliResult<()> {
    let w = args.weights.weights()?;
    let csv = iso_grid_csv(&w, &args.levels, &args.range.values()?)?;
    write_csv(&args.out, &csv)
}

/// JSON report of the general-dimension global minimum for `(1, 0)`.
pub fn ndim_report(nus: &[f64], census: bool) -> CliResult<Value> {
    let mut nu = nus.to_vec();
    if nu.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CliError::domain("singular values must be positive"));
    }
    nu.sort_by(|a, b| b.total_cmp(a));
    let min = ndim::global_minimizers_nd(&nu)?;
    let mut report = json!({
        "nu": nu,
        "k": min.k,
        "partition": min.partition,
        "wred": min.wred,
        "minimizers": if min.k < 64 { json!(1u64 << min.k) } else { json!(min.minimizer_count().to_string()) },
        "degenerate": min.degenerate,
    });
    if min.k <= 6 {
        report["minimizer_rotations"] = min.minimizers().iter().map(rows).collect();
    }
    if census {
        let mut entries = Vec::new();
        for p in ndim::enumerate_critical_partitions(&nu)? {
            let value = ndim::critical_value(&p, &nu)?;
            entries.push((value, p));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        report["census"] = entries
            .iter()
            .map(|(v, p)| json!({ "partition": p, "value": v, "realizations": 1u64 << p.pair_count() }))
            .collect();
    }
    Ok(report)
}

fn cmd_ndim(args: &NdimArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut report = ndim_report(&args.nus, args.census)?;
    if args.verify {
        let cfg = args.oracle.config()?;
        let nu: Vec<f64> = report["nu"].as_array().expect("array").iter().filter_map(Value::as_f64).collect();
        let f = DeformationGradient::diagonal(&nu)?;
        report["verify"] = verify_report(&CosseratWeights::NON_CLASSICAL, &f, &cfg);
    }
    emit_json(&report, out)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::SweepPlanar(a) => cmd_sweep_planar(a),
        Command::ScatterMc(a) => cmd_scatter_mc(a),
        Command::IsoGrid(a) => cmd_iso_grid(a),
        Command::Ndim(a) => cmd_ndim(a, out),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(CliError::domain(e.to_string())),
        },
        None => dispatch(&cli, &mut buf),
    }
    .and_then(|()| out.write_all(&buf).map_err(|e| CliError::io(Path::new("<stdout>"), e)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
