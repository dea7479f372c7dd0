use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cayfib", version, about = "Checks the finite quantities of Cayley fibrations on twisted connected sums")]
pub struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Multiply every numeric tolerance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,

    /// Record wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular fibres of the quartic building block.
    #[command(subcommand)]
    Quartic(QuarticCmd),
    /// K3 lattice, period domains and hyperkähler rotation.
    #[command(subcommand)]
    K3(K3Cmd),
    /// Fredholm index bookkeeping.
    #[command(subcommand)]
    Index(IndexCmd),
    /// The flat Spin(7) model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Neck norms, fold model and contraction scheme.
    #[command(subcommand)]
    Neck(NeckCmd),
    /// Twisted-connected-sum gluing.
    #[command(subcommand)]
    Tcs(TcsCmd),
    /// Run the whole verification suite.
    VerifyAll(VerifyAllArgs),
}

#[derive(Debug, Subcommand)]
pub enum QuarticCmd {
    /// Locate and classify the singular points of the pencil.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    /// Quartic as JSON `{"vars": 5, "terms": [{"exp": [...], "re": "1"}]}`.
    #[arg(long, conflicts_with = "weights")]
    pub poly: Option<PathBuf>,
    /// Weights of the three cubic terms, e.g. `1,10,100`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub weights: Option<Vec<i64>>,
    /// Newton residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Include every solution in the report.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Subcommand)]
pub enum K3Cmd {
    /// Hyperkähler period-domain membership of a triple.
    CheckTriple(TripleArgs),
    /// Hyperkähler rotation and the matching projections.
    Match(TripleArgs),
    /// Roots of a negative definite sublattice.
    Roots(RootsArgs),
    /// Primitivity of a sublattice embedding.
    Primitive(LatticeArgs),
}

#[derive(Debug, Args)]
pub struct TripleArgs {
    /// Triple JSON `{"omega_plus": [...], "omega_minus": [...], "omega_zero": [...]}`;
    /// the standard triple `(e_i + f_i)` when omitted.
    #[arg(long)]
    pub triple: Option<PathBuf>,
    /// Lattice JSON `{"gram": [[...]]}`; the K3 lattice when omitted.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// Lattice JSON `{"gram": [[...]], "basis": [[...]]}`; E8(-1) when omitted.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    /// Coefficient bound for indefinite spans.
    #[arg(long, default_value_t = 2)]
    pub height: i64,
    /// Include the roots in the report.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Lattice JSON `{"gram": [[...]], "basis": [[...]]}`.
    #[arg(long)]
    pub lattice: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    /// Index of a compact Cayley submanifold.
    Compact(CompactArgs),
    /// Move an index across critical rates.
    Crossing(CrossingArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompactArgs {
    #[arg(long)]
    pub sigma: i64,
    #[arg(long)]
    pub chi: i64,
    #[arg(long)]
    pub self_int: i64,
    #[arg(long, default_value_t = 0)]
    pub dim_family: u64,
    /// Expected value to check against.
    #[arg(long)]
    pub expect: Option<i64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    #[value(name = "AC", alias = "ac")]
    Ac,
    #[value(name = "CS", alias = "cs")]
    Cs,
    #[value(name = "COMPACT", alias = "compact")]
    Compact,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CrossingArgs {
    #[arg(long, value_enum)]
    pub side: SideArg,
    /// Base rate, e.g. `-0.5`, `1/2`, `-1+sqrt5`.
    #[arg(long, allow_hyphen_values = true)]
    pub from: String,
    #[arg(long, allow_hyphen_values = true)]
    pub to: String,
    /// Index at the base rate.
    #[arg(long, default_value_t = 0)]
    pub base_index: i64,
    /// `quadric` or a JSON spectrum file.
    #[arg(long, default_value = "quadric")]
    pub spectrum: String,
    #[arg(long)]
    pub expect: Option<i64>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Calibration inequality, fibre frames, form equivalence and CY normalization.
    Calibrate(CalibrateArgs),
    /// Decay rates of the deformation fields.
    Rates,
    /// Nondegeneracy determinant over a radius sweep.
    Det(DetArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DetArgs {
    #[arg(long, default_value_t = -1.0)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum NeckCmd {
    /// Weighted norm of `r^ζ` on the neck and its asymptotic regime.
    Norms(NormsArgs),
    /// Fold-over model: width, onset scale and blow-up rate.
    Fold(FoldArgs),
    /// Run the contraction scheme on a problem file.
    Iterate(IterateArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct NormsArgs {
    #[arg(long)]
    pub zeta: f64,
    #[arg(long)]
    pub weight: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub t: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FoldArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub s: f64,
    /// Upper fibre value for the intersection radius.
    #[arg(long, requires = "eps")]
    pub eta: Option<f64>,
    #[arg(long, requires = "eta")]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    /// Problem JSON `{"d": [[...]], "q": [[[...]]], "f0": [...]}`.
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum TcsCmd {
    /// First homology of the genus-one gluing of the base.
    Base(BaseArgs),
    /// Matching of the asymptotic G2 forms across the neck.
    MatchForms,
    /// Singular fibres of the glued fibration.
    Count(CountArgs),
    /// Neck length beyond which the perturbation closes.
    Torsion(TorsionArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BaseArgs {
    /// Row-major gluing matrix `a,b,c,d`.
    #[arg(long, default_value = "0,1,1,0")]
    pub matrix: String,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Per-block singular fibre counts, e.g. `108,108`.
    #[arg(long, value_delimiter = ',')]
    pub pieces: Vec<u64>,
    #[arg(long)]
    pub expect: Option<u64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TorsionArgs {
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct VerifyAllArgs {
    /// Replace the quadric cone spectrum used by the index checks.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}
