use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rrm_core::spaces::SpaceKind;
use rrm_core::Domain;

#[derive(Debug, Parser)]
#[command(name = "rrm", version, about = "Nonconforming quadratic elements on rectangular grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Space dimensions and constraint ranks on an m×n unit-square grid.
    Dims(DimsArgs),
    /// Convergence study for the manufactured source problem.
    Source(SourceArgs),
    /// Smallest eigenvalues of the Laplacian over a sequence of grids.
    Eigen(EigenArgs),
    /// Structural checks of the RRM basis on one grid.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Element {
    Q1,
    Wilson,
    Mc,
    Rm,
    Rrm,
}

impl Element {
    pub fn kind(self) -> SpaceKind {
        match self {
            Element::Q1 => SpaceKind::Q1,
            Element::Wilson => SpaceKind::Wilson,
            Element::Mc => SpaceKind::Mc,
            Element::Rm => SpaceKind::Rm,
            Element::Rrm => SpaceKind::Rrm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Saddle,
    Reduced,
    /// Run both and cross-check them.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "rrm")]
    pub element: Element,
    /// Count the space with homogeneous boundary conditions.
    #[arg(long)]
    pub homogeneous: bool,
}

/// `unit-square`, `l-shape` (the 2×2 L), or `rect:W,H`.
pub fn parse_domain(s: &str) -> Result<Domain, String> {
    match s {
        "unit-square" => Ok(Domain::unit_square()),
        "l-shape" => Ok(Domain::l_shape()),
        _ => {
            let dims = s.strip_prefix("rect:").ok_or_else(|| format!("unknown domain '{s}'"))?;
            let (w, h) = dims.split_once(',').ok_or("rect needs W,H")?;
            let w: f64 = w.trim().parse().map_err(|_| format!("bad width '{w}'"))?;
            let h: f64 = h.trim().parse().map_err(|_| format!("bad height '{h}'"))?;
            if !(w > 0.0 && h > 0.0) {
                return Err("rect sides must be positive".into());
            }
            Ok(Domain::Rectangle { width: w, height: h })
        }
    }
}

/// A constant density; `one` is accepted as a name for 1.
pub fn parse_rho(s: &str) -> Result<f64, String> {
    if s == "one" {
        return Ok(1.0);
    }
    s.parse().map_err(|_| format!("density must be a number or 'one', got '{s}'"))
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, value_parser = parse_domain, default_value = "unit-square")]
    pub domain: Domain,
    /// Uniform grids (the default).
    #[arg(long, conflicts_with = "nonuniform")]
    pub uniform: bool,
    /// Tiled grids with cell aspect ratios 0.35/0.65, 0.65/0.35 and 1.
    #[arg(long)]
    pub nonuniform: bool,
    /// Uniform: comma-separated cell counts in x. Nonuniform: a single count
    /// L meaning levels 1..=L, or a comma-separated list of levels.
    #[arg(long)]
    pub levels: Option<String>,
    /// Comma-separated mesh sizes in x (uniform grids).
    #[arg(long, conflicts_with = "levels")]
    pub hx: Option<String>,
    /// Single grid with m cells in x.
    #[arg(long, conflicts_with_all = ["levels", "hx"])]
    pub m: Option<usize>,
    /// Cells in y for `--m`; defaults to the count implied by `--aspect`.
    #[arg(long, requires = "m")]
    pub n: Option<usize>,
    /// Cell aspect ratio h_x / h_y of uniform grids.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub aspect: f64,
    /// Single grid read from JSON `{"xs": [...], "ys": [...], "active": [...]}`.
    #[arg(long, conflicts_with_all = ["levels", "hx", "m", "nonuniform"])]
    pub mesh_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Levels solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Directory receiving K, M (and B) of every level as 1-based coordinate
    /// text.
    #[arg(long)]
    pub dump_matrices: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[arg(long, value_enum, default_value = "rrm")]
    pub element: Element,
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// RRM constraint treatment; defaults to reduced on rectangles and
    /// saddle on masked grids.
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    /// Constant density, or `one`.
    #[arg(long, default_value = "1", value_parser = parse_rho, allow_negative_numbers = true)]
    pub rho: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long, value_enum, default_value = "rrm")]
    pub element: Element,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    #[arg(long, default_value = "1", value_parser = parse_rho, allow_negative_numbers = true)]
    pub rho: f64,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
