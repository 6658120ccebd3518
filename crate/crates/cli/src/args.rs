use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mshia_core::driver::DEFAULT_MAX_OUTER_ITERS;
use mshia_core::meanshift::{DEFAULT_INNER_MAX_STEPS, DEFAULT_INNER_TOL};
use mshia_core::{Criterion, Kernel, ProfileSpec, WindowShape};

#[derive(Debug, Parser)]
#[command(
    name = "mshia",
    version,
    about = "Iterative mean shift segmentation of grayscale images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment an image and optionally export traces, profiles and stability reports.
    Segment(SegmentArgs),
    /// Write the built-in standard test images as PGM files.
    Suite {
        /// Directory that receives `<name>.pgm` for every suite image.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Old,
    New,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Old => Criterion::OldEntropyDelta,
            CriterionArg::New => Criterion::NewDiffEntropy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Uniform,
    Epanechnikov,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Uniform => Kernel::Uniform,
            KernelArg::Epanechnikov => Kernel::Epanechnikov,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Circle,
    Square,
}

impl From<WindowArg> for WindowShape {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Circle => WindowShape::Circle,
            WindowArg::Square => WindowShape::Square,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input image: binary PGM (P5) or 8-bit grayscale PNG.
    #[arg(long)]
    pub input: PathBuf,

    /// Output PGM. In --compare mode `.old`/`.new` is inserted before the extension.
    #[arg(long)]
    pub output: PathBuf,

    #[arg(long, value_enum, default_value = "new")]
    pub criterion: CriterionArg,

    /// Spatial window radius in pixels.
    #[arg(long, default_value_t = 4)]
    pub hs: u32,

    /// Range window radius in gray levels.
    #[arg(long, default_value_t = 12.0)]
    pub hr: f64,

    #[arg(long, value_enum, default_value = "uniform")]
    pub kernel: KernelArg,

    #[arg(long, value_enum, default_value = "circle")]
    pub window: WindowArg,

    /// Stopping threshold on the criterion value.
    #[arg(long, default_value_t = 0.001)]
    pub threshold: f64,

    /// Cap on outer iterations.
    #[arg(long, default_value_t = DEFAULT_MAX_OUTER_ITERS)]
    pub max_iters: u32,

    /// Cap on mode-seeking steps per pixel.
    #[arg(long, default_value_t = DEFAULT_INNER_MAX_STEPS)]
    pub inner_max_steps: u32,

    /// Per-pixel tolerance on the range shift (0 = until the window stops).
    #[arg(long, default_value_t = DEFAULT_INNER_TOL)]
    pub inner_tol: f64,

    /// One mean shift step per pixel and pass.
    #[arg(long)]
    pub single_shift: bool,

    /// Trace CSV. In --compare mode `.old`/`.new` is inserted before the extension.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,

    /// Intensity profile to export, `row:N` or `col:N`. Repeatable.
    #[arg(long = "profile")]
    pub profiles: Vec<ProfileSpec>,

    /// Run both criteria and report their stability side by side.
    #[arg(long)]
    pub compare: bool,

    /// Also write the stability report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Worker threads for the filter passes (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Read and rewrite the input without processing.
    #[arg(long, conflicts_with = "compare")]
    pub passthrough: bool,
}
