//! Command-line front end behind the `tprod` binary.
//!
//! Four commands share the T3B tensor format: `generate` writes a
//! deblurring problem, `decompose` factors tensors and checks the factor
//! identities, `solve` runs Tikhonov regularization over noise seeds, and
//! `image` converts between PNG files and tensors and draws panels and plots.
//! Each command writes a JSON manifest or report plus an aligned text
//! summary. [`run`] returns `Ok(false)` when a residual check fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::decomp::{orthogonality_defect, tcsd_general, tcsd_thin, tgsvd, tsvd};
use crate::error::{Error, Result};
use crate::imaging;
use crate::io;
use crate::problems::{add_noise, synthetic_image, BlurKind, BlurSpec, Problem};
use crate::report::{
    factor_summary, read_json, solve_summary, write_json, FactorManifest, FileEntry, ProblemManifest, Shapes,
    SolveReport, SweepPoint,
};
use crate::tensor::Tensor3;
use crate::tikhonov::{
    make_regularizer, relative_error, solve_tikhonov_normal, RegularizerKind, TikhonovGsvd, TikhonovRun,
};

/// Default tolerance on `‖(Aᵀ*A + μ⁻¹Lᵀ*L) * X - Aᵀ*B‖_F / ‖Aᵀ*B‖_F` and on
/// the normal-equation oracle deviation.
pub const SOLVE_TOL: f64 = 1e-8;

/// Bracket searched by the discrepancy principle. Beyond about `10⁶` the
/// normal-equation residual itself cannot be evaluated to `SOLVE_TOL`.
pub const DISCREPANCY_BRACKET: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Parser)]
#[command(name = "tprod", version, about = "T-product tensor decompositions and Tikhonov deblurring")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a deblurring problem: operator, exact solution, data and noisy data.
    Generate(GenerateArgs),
    /// Factor tensors and verify the factor identities.
    Decompose(DecomposeArgs),
    /// Tikhonov-regularized solve over one or more noise seeds.
    Solve(SolveArgs),
    /// Convert images and tensors, draw panels and error plots.
    Image(ImageArgs),
}

/// Inclusive seed list: `3`, `1..10` or `1,4,9`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad seed list {s:?} (use 7, 1..10 or 1,4,9)"));
        let seeds = if let Some((a, b)) = s.split_once("..") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        } else {
            s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<Vec<u64>>>()?
        };
        if seeds.is_empty() {
            return Err(bad());
        }
        Ok(Self(seeds))
    }
}

/// Exact solution for a generated problem.
#[derive(Clone, Debug, PartialEq)]
pub enum XTrue {
    /// All ones with `k` lateral slices.
    Ones(usize),
    /// The built-in piecewise-smooth grayscale image.
    Synthetic,
    /// An `n x n` PNG; color images give three lateral slices.
    Image(PathBuf),
}

impl FromStr for XTrue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "synthetic" {
            return Ok(Self::Synthetic);
        }
        if let Some(k) = s.strip_prefix("ones:") {
            return match k.parse() {
                Ok(k) if k > 0 => Ok(Self::Ones(k)),
                _ => Err(Error::InvalidParameter(format!("bad lateral count in {s:?}"))),
            };
        }
        if let Some(p) = s.strip_prefix("image:") {
            return Ok(Self::Image(PathBuf::from(p)));
        }
        Err(Error::InvalidParameter(format!("unknown exact solution {s:?} (use ones:K, synthetic or image:PATH)")))
    }
}

impl std::fmt::Display for XTrue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Ones(k) => write!(f, "ones:{k}"),
            Self::Synthetic => write!(f, "synthetic"),
            Self::Image(p) => write!(f, "image:{}", p.display()),
        }
    }
}

/// Logarithmic `μ` grid `lo:hi:count`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl MuGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.log10(), self.hi.log10());
        (0..self.count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (self.count - 1) as f64)).collect()
    }
}

impl FromStr for MuGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad μ grid {s:?} (use lo:hi:count)"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else { return Err(bad()) };
        let g = Self {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
        };
        if !(g.lo > 0.0 && g.hi >= g.lo && g.count >= 1 && g.hi.is_finite()) {
            return Err(bad());
        }
        Ok(g)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "gravity")]
    pub kind: BlurKind,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Gravity depth.
    #[arg(long, default_value_t = 0.8)]
    pub d: f64,
    /// Prolate bandwidth.
    #[arg(long, default_value_t = 0.46)]
    pub alpha: f64,
    /// Gaussian spread.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Gaussian band.
    #[arg(long, default_value_t = 9)]
    pub band: usize,
    /// `ones:K`, `synthetic` or `image:PATH`; defaults to `ones:3` for
    /// gravity and `synthetic` for Gaussian blur.
    #[arg(long)]
    pub xtrue: Option<XTrue>,
    #[arg(long, default_value = "l2")]
    pub regularizer: RegularizerKind,
    /// Relative noise level `‖E‖_F / ‖B_true‖_F`.
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
    #[arg(long, default_value = "1..10")]
    pub seeds: SeedList,
    #[arg(long, default_value = "problem")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Decomposition {
    Tsvd,
    Tcsd,
    TcsdGeneral,
    Tgsvd,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub which: Decomposition,
    /// Input for `tsvd`, first operand for `tgsvd`.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second operand for `tgsvd`.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// (Partially) orthogonal input for `tcsd` and `tcsd-general`.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Rows of the top block.
    #[arg(long)]
    pub m1: Option<usize>,
    /// Columns of the left block (`tcsd-general`).
    #[arg(long)]
    pub n1: Option<usize>,
    /// Orthogonality tolerance for the T-CSD input check.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Overrides every residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "factors")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    /// Per-slice Cholesky solve of the normal equations.
    Normal,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Regularization operator; built from `--regularizer` when absent.
    #[arg(long)]
    pub l: Option<PathBuf>,
    /// A single noisy right-hand side.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Exact data, perturbed once per seed.
    #[arg(long)]
    pub btrue: Option<PathBuf>,
    #[arg(long)]
    pub xtrue: Option<PathBuf>,
    #[arg(long)]
    pub regularizer: Option<RegularizerKind>,
    /// Noise level; read from the problem manifest when absent.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Seeds; defaults to every seed of the problem.
    #[arg(long)]
    pub seeds: Option<SeedList>,
    #[arg(long, conflicts_with_all = ["mu_grid", "discrepancy"])]
    pub mu: Option<f64>,
    /// Picks the grid `μ` with the smallest mean error (needs the exact solution).
    #[arg(long, conflicts_with = "discrepancy")]
    pub mu_grid: Option<MuGrid>,
    /// Picks `μ` per seed so the residual equals `η` times the noise norm.
    #[arg(long, value_name = "ETA")]
    pub discrepancy: Option<f64>,
    #[arg(long)]
    pub oracle: Option<Oracle>,
    #[arg(long, default_value_t = SOLVE_TOL)]
    pub tol: f64,
    #[arg(long, default_value = "solution")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[command(subcommand)]
    pub action: ImageAction,
}

#[derive(Debug, Subcommand)]
pub enum ImageAction {
    /// PNG to `rows x channels x cols` tensor.
    Import {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Convert color input to one gray channel.
        #[arg(long)]
        gray: bool,
    },
    /// Tensor with one or three lateral slices to PNG.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Side-by-side PNG of several tensors or PNGs of equal size.
    Panel {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// SVG of mean error against `μ` from a sweep report.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(config: RunConfig) -> Result<bool> {
    match config.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Image(a) => cmd_image(&a),
    }
}

fn require_file(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("input file {} does not exist", p.display())))
    }
}

fn prepare_out_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p)?;
    let probe = p.join(".write-test");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(probe)?;
    Ok(())
}

fn shape3(t: &Tensor3) -> [usize; 3] {
    let (a, b, c) = t.shape();
    [a, b, c]
}

fn save_entry(dir: &Path, role: &str, file: &str, t: &Tensor3) -> Result<FileEntry> {
    io::save(dir.join(file), t)?;
    Ok(FileEntry { role: role.into(), file: file.into(), shape: shape3(t) })
}

fn load_checked(p: &Path) -> Result<Tensor3> {
    require_file(p)?;
    io::load(p)
}

pub fn data_file(seed: u64) -> String {
    format!("B_{seed}.t3b")
}

// ---------------------------------------------------------------- generate

pub fn cmd_generate(args: &GenerateArgs) -> Result<bool> {
    let spec = BlurSpec {
        kind: args.kind,
        n: args.n,
        d: args.d,
        alpha: args.alpha,
        sigma: args.sigma,
        band: args.band,
    };
    spec.validate()?;
    if !(args.noise >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be ≥ 0, got {}", args.noise)));
    }
    let xtrue = args.xtrue.clone().unwrap_or(match args.kind {
        BlurKind::Gravity => XTrue::Ones(3),
        BlurKind::Gaussian => XTrue::Synthetic,
    });
    if let XTrue::Image(p) = &xtrue {
        require_file(p)?;
    }
    prepare_out_dir(&args.out)?;

    let n = args.n;
    let x = match &xtrue {
        XTrue::Ones(k) => Tensor3::ones(n, *k, n),
        XTrue::Synthetic => crate::problems::image_to_tensor(&synthetic_image(n, n)),
        XTrue::Image(p) => {
            let t = imaging::load_image(p, false)?;
            if t.n1() != n || t.n3() != n {
                return Err(Error::DimensionMismatch(format!(
                    "image is {}x{} pixels but the operator needs {n}x{n}",
                    t.n1(),
                    t.n3()
                )));
            }
            t
        }
    };
    info!("building {n}x{n}x{n} {:?} operator", args.kind);
    let p = Problem::new(spec.operator()?, x, args.regularizer)?;

    let dir = &args.out;
    let mut files = vec![
        save_entry(dir, "A", "A.t3b", &p.a)?,
        save_entry(dir, "L", "L.t3b", &p.l)?,
        save_entry(dir, "Xtrue", "Xtrue.t3b", &p.x_true)?,
        save_entry(dir, "Btrue", "Btrue.t3b", &p.b_true)?,
    ];
    let seeds = if args.noise > 0.0 { args.seeds.0.clone() } else { Vec::new() };
    for &seed in &seeds {
        let (b, _) = add_noise(&p.b_true, args.noise, seed)?;
        files.push(save_entry(dir, &format!("B (seed {seed})"), &data_file(seed), &b)?);
    }
    let manifest = ProblemManifest {
        kind: format!("{:?}", args.kind).to_lowercase(),
        n,
        d: args.d,
        alpha: args.alpha,
        sigma: args.sigma,
        band: args.band,
        xtrue: xtrue.to_string(),
        regularizer: format!("{:?}", args.regularizer).to_lowercase(),
        noise: args.noise,
        seeds,
        files,
    };
    write_json(dir.join("manifest.json"), &manifest)?;
    for f in &manifest.files {
        println!("{:<16}{}x{}x{}  {}", f.role, f.shape[0], f.shape[1], f.shape[2], dir.join(&f.file).display());
    }
    Ok(true)
}

// ---------------------------------------------------------------- decompose

struct Checks {
    residuals: BTreeMap<String, f64>,
    tolerances: BTreeMap<String, f64>,
    override_tol: Option<f64>,
}

impl Checks {
    fn new(override_tol: Option<f64>) -> Self {
        Self { residuals: BTreeMap::new(), tolerances: BTreeMap::new(), override_tol }
    }

    fn add(&mut self, name: &str, value: f64, tol: f64) {
        self.residuals.insert(name.into(), value);
        self.tolerances.insert(name.into(), self.override_tol.unwrap_or(tol));
    }

    fn orthogonal(&mut self, name: &str, q: &Tensor3) -> Result<()> {
        self.add(&format!("orthogonality {name}"), orthogonality_defect(q)?, 1e-10);
        Ok(())
    }

    fn passed(&self) -> bool {
        self.residuals.iter().all(|(k, v)| v.is_finite() && *v <= self.tolerances[k])
    }
}

fn need<'a, T>(v: &'a Option<T>, flag: &str, which: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::InvalidParameter(format!("{which} needs --{flag}")))
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<bool> {
    let name = args.which.to_possible_value().expect("named variant").get_name().to_string();
    let (inputs, tensors) = {
        let paths: Vec<(&str, &PathBuf)> = match args.which {
            Decomposition::Tsvd => vec![("A", need(&args.a, "a", &name)?)],
            Decomposition::Tgsvd => vec![("A", need(&args.a, "a", &name)?), ("B", need(&args.b, "b", &name)?)],
            Decomposition::Tcsd | Decomposition::TcsdGeneral => vec![("Q", need(&args.q, "q", &name)?)],
        };
        for (_, p) in &paths {
            require_file(p)?;
        }
        if matches!(args.which, Decomposition::Tcsd | Decomposition::TcsdGeneral) {
            need(&args.m1, "m1", &name)?;
        }
        if args.which == Decomposition::TcsdGeneral {
            need(&args.n1, "n1", &name)?;
        }
        prepare_out_dir(&args.out)?;
        let mut entries = Vec::new();
        let mut tensors = Vec::new();
        for (role, p) in paths {
            let t = io::load(p)?;
            entries.push(FileEntry { role: role.into(), file: p.display().to_string(), shape: shape3(&t) });
            tensors.push(t);
        }
        (entries, tensors)
    };

    let dir = &args.out;
    let mut checks = Checks::new(args.tol);
    let mut factors = Vec::new();
    let mut ranks = None;
    let mut splits = None;
    let mut uniform = None;
    let imag_residue;
    match args.which {
        Decomposition::Tsvd => {
            let a = &tensors[0];
            let f = tsvd(a)?;
            let scale = a.fnorm().max(f64::MIN_POSITIVE);
            checks.add("reconstruction", f.reconstruct()?.distance(a) / scale, 1e-10);
            checks.orthogonal("U", &f.u)?;
            checks.orthogonal("V", &f.v)?;
            for (role, t) in [("U", &f.u), ("S", &f.s), ("V", &f.v)] {
                factors.push(save_entry(dir, role, &format!("{role}.t3b"), t)?);
            }
            imag_residue = f.imag_residue;
        }
        Decomposition::Tcsd => {
            let q = &tensors[0];
            let f = tcsd_thin(q, args.m1.unwrap_or_default(), args.rtol)?;
            let scale = q.fnorm().max(1.0);
            checks.add("reconstruction", f.residual(q)? / scale, 1e-10);
            checks.add("cosine-sine identity", f.pythagoras_defect()?, 1e-10);
            for (role, t) in [("U", &f.u), ("V", &f.v), ("Z", &f.z)] {
                checks.orthogonal(role, t)?;
            }
            for (role, t) in [("U", &f.u), ("V", &f.v), ("Z", &f.z), ("C", &f.c), ("S", &f.s)] {
                factors.push(save_entry(dir, role, &format!("{role}.t3b"), t)?);
            }
            imag_residue = f.imag_residue;
        }
        Decomposition::TcsdGeneral => {
            let q = &tensors[0];
            let f = tcsd_general(q, args.m1.unwrap_or_default(), args.n1.unwrap_or_default(), args.rtol)?;
            let scale = q.fnorm().max(1.0);
            checks.add("block pattern", f.residual(q)? / scale, 1e-10);
            for (role, t) in [("U", &f.u), ("V", &f.v), ("W", &f.w), ("Z", &f.z)] {
                checks.orthogonal(role, t)?;
            }
            for (role, t) in [("U", &f.u), ("V", &f.v), ("W", &f.w), ("Z", &f.z), ("D", &f.d)] {
                factors.push(save_entry(dir, role, &format!("{role}.t3b"), t)?);
            }
            imag_residue = f.imag_residue;
        }
        Decomposition::Tgsvd => {
            let (a, b) = (&tensors[0], &tensors[1]);
            let f = tgsvd(a, b)?;
            let scale = (a.fnorm() + b.fnorm()).max(f64::MIN_POSITIVE);
            let (ra, rb) = f.residuals(a, b)?;
            checks.add("Uᵀ*A*X - D_A", ra / scale, 1e-9);
            checks.add("Vᵀ*B*X - D_B", rb / scale, 1e-9);
            checks.orthogonal("U", &f.u)?;
            checks.orthogonal("V", &f.v)?;
            if let Some(p) = f.pythagoras_defect() {
                checks.add("cosine-sine identity", p, 1e-10);
            }
            for (role, file, t) in
                [("U", "U", &f.u), ("V", "V", &f.v), ("X", "X", &f.x), ("D_A", "DA", &f.d_a), ("D_B", "DB", &f.d_b)]
            {
                factors.push(save_entry(dir, role, &format!("{file}.t3b"), t)?);
            }
            uniform = Some(f.is_uniform());
            ranks = Some(f.ranks);
            splits = Some(f.splits);
            imag_residue = f.imag_residue;
        }
    }
    let passed = checks.passed();
    let manifest = FactorManifest {
        decomposition: name,
        inputs,
        factors,
        ranks,
        splits,
        uniform,
        residuals: checks.residuals,
        tolerances: checks.tolerances,
        imag_residue,
        passed,
    };
    write_json(dir.join("manifest.json"), &manifest)?;
    let text = factor_summary(&manifest);
    std::fs::write(dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(passed)
}

// ---------------------------------------------------------------- solve

/// Everything a solve needs, however it was supplied.
pub struct SolveInputs {
    pub a: Tensor3,
    pub l: Tensor3,
    pub regularizer: String,
    pub x_true: Option<Tensor3>,
    pub b_true: Option<Tensor3>,
    pub noise: f64,
    /// `(seed, B)`; the seed is `None` for a single supplied right-hand side.
    pub data: Vec<(Option<u64>, Tensor3)>,
}

fn load_solve_inputs(args: &SolveArgs) -> Result<SolveInputs> {
    let manifest: Option<ProblemManifest> = match &args.problem {
        Some(dir) => {
            require_file(&dir.join("manifest.json"))?;
            Some(read_json(dir.join("manifest.json"))?)
        }
        None => None,
    };
    let in_dir = |flag: &Option<PathBuf>, default: &str| -> Option<PathBuf> {
        flag.clone().or_else(|| args.problem.as_ref().map(|d| d.join(default)))
    };
    let a_path = in_dir(&args.a, "A.t3b").ok_or_else(|| Error::InvalidParameter("solve needs --problem or --a".into()))?;
    let l_path = match (&args.l, &args.regularizer) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(_)) => None,
        (None, None) => in_dir(&None, "L.t3b").filter(|p| p.is_file()),
    };
    let x_path = in_dir(&args.xtrue, "Xtrue.t3b").filter(|p| args.xtrue.is_some() || p.is_file());
    let bt_path = in_dir(&args.btrue, "Btrue.t3b").filter(|p| args.btrue.is_some() || p.is_file());
    let noise = args.noise.or(manifest.as_ref().map(|m| m.noise)).unwrap_or(0.0);
    if !(noise >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be ≥ 0, got {noise}")));
    }

    // Validate every path before loading anything large.
    for p in [Some(&a_path), l_path.as_ref(), x_path.as_ref(), args.b.as_ref()].into_iter().flatten() {
        require_file(p)?;
    }
    let seeds: Vec<u64> = match (&args.seeds, &manifest) {
        (Some(s), _) => s.0.clone(),
        (None, Some(m)) => m.seeds.clone(),
        (None, None) => Vec::new(),
    };
    let plan: Vec<(Option<u64>, Option<PathBuf>)> = if let Some(b) = &args.b {
        vec![(None, Some(b.clone()))]
    } else if noise == 0.0 {
        vec![(None, None)]
    } else {
        if seeds.is_empty() {
            return Err(Error::InvalidParameter("noisy runs need a nonempty --seeds list".into()));
        }
        seeds
            .iter()
            .map(|&s| {
                let stored = args.problem.as_ref().map(|d| d.join(data_file(s))).filter(|p| p.is_file());
                (Some(s), stored)
            })
            .collect()
    };
    if plan.iter().any(|(_, p)| p.is_none()) {
        match &bt_path {
            Some(p) => require_file(p)?,
            None => return Err(Error::InvalidParameter("need --b, --btrue or a problem directory with data".into())),
        }
    }
    prepare_out_dir(&args.out)?;

    let a = io::load(&a_path)?;
    let kind = args
        .regularizer
        .or_else(|| manifest.as_ref().and_then(|m| m.regularizer.parse().ok()))
        .unwrap_or(RegularizerKind::L2);
    let (l, regularizer) = match (&l_path, &args.l, &manifest) {
        (Some(p), None, Some(m)) => (io::load(p)?, m.regularizer.clone()),
        (Some(p), _, _) => {
            let name = p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned());
            (io::load(p)?, name)
        }
        (None, _, _) => (make_regularizer(kind, a.n2(), a.n3())?, format!("{kind:?}").to_lowercase()),
    };
    let x_true = x_path.as_ref().map(io::load).transpose()?;
    let b_true = bt_path.as_ref().map(io::load).transpose()?;
    let mut data = Vec::with_capacity(plan.len());
    for (seed, stored) in plan {
        let b = match (stored, seed, &b_true) {
            (Some(p), _, _) => io::load(p)?,
            (None, Some(s), Some(bt)) => add_noise(bt, noise, s)?.0,
            (None, None, Some(bt)) => bt.clone(),
            _ => unreachable!("checked above"),
        };
        data.push((seed, b));
    }
    Ok(SolveInputs { a, l, regularizer, x_true, b_true, noise, data })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Solves every right-hand side and fills a report; `out` receives the
/// solutions when given.
pub fn solve_inputs(inp: &SolveInputs, args: &SolveArgs, out: Option<&Path>) -> Result<SolveReport> {
    let start = Instant::now();
    if let Some(mu) = args.mu {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("μ must be positive and finite, got {mu}")));
        }
    }
    if args.mu.is_none() && args.mu_grid.is_none() && args.discrepancy.is_none() {
        return Err(Error::InvalidParameter("give --mu, --mu-grid or --discrepancy".into()));
    }
    info!("T-GSVD of {:?} with regularizer {:?}", inp.a.shape(), inp.l.shape());
    let solver = TikhonovGsvd::new(&inp.a, &inp.l)?;
    let projected = inp.data.iter().map(|(_, b)| solver.project(b)).collect::<Result<Vec<_>>>()?;

    let mut sweep = None;
    let mut mu_per_seed = None;
    let mus: Vec<f64> = if let Some(grid) = &args.mu_grid {
        let x_true = inp
            .x_true
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--mu-grid needs the exact solution".into()))?;
        let mut points = Vec::new();
        for mu in grid.values() {
            let errs = projected
                .iter()
                .map(|y| relative_error(&solver.solve_projected(y, mu)?, x_true))
                .collect::<Result<Vec<_>>>()?;
            points.push(SweepPoint { mu, mean_error: mean(&errs) });
        }
        let best = points.iter().min_by(|a, b| a.mean_error.total_cmp(&b.mean_error)).expect("nonempty grid").mu;
        sweep = Some(points);
        vec![best; inp.data.len()]
    } else if let Some(eta) = args.discrepancy {
        let scale = |b: &Tensor3| inp.b_true.as_ref().map_or(b.fnorm(), Tensor3::fnorm);
        let m = inp
            .data
            .iter()
            .zip(&projected)
            .map(|((_, b), y)| {
                let (lo, hi) = DISCREPANCY_BRACKET;
                let mu = solver.discrepancy_mu(y, inp.noise * scale(b), eta, lo, hi)?;
                if mu == lo || mu == hi {
                    warn!("discrepancy target out of reach, μ clamped to {mu:.1e}");
                }
                Ok(mu)
            })
            .collect::<Result<Vec<_>>>()?;
        mu_per_seed = Some(m.clone());
        m
    } else {
        vec![args.mu.expect("checked"); inp.data.len()]
    };

    let mut errors = Vec::new();
    let mut residuals = Vec::new();
    let mut oracle_dev: Option<f64> = None;
    for (((seed, b), y), &mu) in inp.data.iter().zip(&projected).zip(&mus) {
        let x = solver.solve_projected(y, mu)?;
        if args.oracle == Some(Oracle::Normal) {
            let xn = solve_tikhonov_normal(&inp.a, &inp.l, b, mu)?;
            let dev = x.distance(&xn) / xn.fnorm().max(f64::MIN_POSITIVE);
            oracle_dev = Some(oracle_dev.map_or(dev, |d| d.max(dev)));
        }
        let run = TikhonovRun::evaluate(&inp.a, &inp.l, b, x, mu, inp.x_true.as_ref())?;
        if let Some(dir) = out {
            let file = seed.map_or("X.t3b".to_string(), |s| format!("X_{s}.t3b"));
            io::save(dir.join(file), &run.solution)?;
        }
        residuals.push(run.normal_residual);
        errors.extend(run.relative_error);
    }
    let max_res = residuals.iter().cloned().fold(0.0, f64::max);
    let mu = (mus.iter().map(|m| m.ln()).sum::<f64>() / mus.len() as f64).exp();
    let passed = max_res <= args.tol && oracle_dev.is_none_or(|d| d <= args.tol);
    let b0 = &inp.data[0].1;
    Ok(SolveReport {
        shapes: Shapes { a: shape3(&inp.a), l: shape3(&inp.l), b: shape3(b0) },
        regularizer: inp.regularizer.clone(),
        mu: if mu_per_seed.is_some() { mu } else { mus[0] },
        mu_per_seed,
        noise: inp.noise,
        seeds: inp.data.iter().filter_map(|(s, _)| *s).collect(),
        mean_error: (!errors.is_empty()).then(|| mean(&errors)),
        errors,
        normal_residuals: residuals,
        max_normal_residual: max_res,
        oracle_deviation: oracle_dev,
        sweep,
        passed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<bool> {
    let inputs = load_solve_inputs(args)?;
    let report = solve_inputs(&inputs, args, Some(&args.out))?;
    write_json(args.out.join("report.json"), &report)?;
    let text = solve_summary(&report);
    std::fs::write(args.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(report.passed)
}

// ---------------------------------------------------------------- image

fn load_any(p: &Path) -> Result<Tensor3> {
    require_file(p)?;
    match p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("t3b") => io::load(p),
        _ => imaging::load_image(p, false),
    }
}

pub fn cmd_image(args: &ImageArgs) -> Result<bool> {
    match &args.action {
        ImageAction::Import { input, out, gray } => {
            require_file(input)?;
            let t = imaging::load_image(input, *gray)?;
            io::save(out, &t)?;
            println!("{}x{}x{}  {}", t.n1(), t.n2(), t.n3(), out.display());
        }
        ImageAction::Export { input, out } => {
            imaging::save_image(out, &load_checked(input)?)?;
            println!("{}", out.display());
        }
        ImageAction::Panel { inputs, out } => {
            let parts = inputs.iter().map(|p| load_any(p)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&Tensor3> = parts.iter().collect();
            imaging::save_panel(out, &refs)?;
            println!("{}", out.display());
        }
        ImageAction::Plot { report, out } => {
            require_file(report)?;
            let r: SolveReport = read_json(report)?;
            let sweep = r
                .sweep
                .ok_or_else(|| Error::InvalidParameter(format!("{} has no μ sweep", report.display())))?;
            let points: Vec<(f64, f64)> = sweep.iter().map(|p| (p.mu, p.mean_error)).collect();
            std::fs::write(out, imaging::sweep_svg(&points)?)?;
            println!("{}", out.display());
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!("3".parse::<SeedList>().unwrap().0, vec![3]);
        assert_eq!("1..4".parse::<SeedList>().unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!("5, 2,9".parse::<SeedList>().unwrap().0, vec![5, 2, 9]);
        assert!("4..1".parse::<SeedList>().is_err());
        assert!("".parse::<SeedList>().is_err());
    }

    #[test]
    fn mu_grid_is_logarithmic() {
        let g: MuGrid = "1e-4:1e4:9".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 9);
        for (k, m) in v.iter().enumerate() {
            assert!((m.log10() - (k as f64 - 4.0)).abs() < 1e-12);
        }
        assert!("0:1:3".parse::<MuGrid>().is_err());
        assert!("1:2".parse::<MuGrid>().is_err());
    }

    #[test]
    fn xtrue_forms() {
        assert_eq!("ones:3".parse::<XTrue>().unwrap(), XTrue::Ones(3));
        assert_eq!("synthetic".parse::<XTrue>().unwrap(), XTrue::Synthetic);
        assert_eq!("image:a.png".parse::<XTrue>().unwrap(), XTrue::Image("a.png".into()));
        assert!("ones:0".parse::<XTrue>().is_err());
        assert_eq!(XTrue::Ones(2).to_string(), "ones:2");
    }

    #[test]
    fn parses_documented_invocations() {
        RunConfig::try_parse_from(["tprod", "generate", "--kind", "gravity", "--n", "32", "--xtrue", "ones:3"]).unwrap();
        RunConfig::try_parse_from(["tprod", "decompose", "tgsvd", "--a", "A.t3b", "--b", "L.t3b"]).unwrap();
        RunConfig::try_parse_from(["tprod", "solve", "--problem", "p", "--mu-grid", "1e-4:1e4:25"]).unwrap();
        RunConfig::try_parse_from(["tprod", "image", "panel", "--inputs", "a", "b", "--out", "p.png"]).unwrap();
        assert!(RunConfig::try_parse_from(["tprod", "solve", "--mu", "1", "--mu-grid", "1:2:3"]).is_err());
    }
}
