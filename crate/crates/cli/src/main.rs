//! `mshia`: iterative mean shift segmentation from the command line.
//!
//! Exit codes: 0 on success, 1 on I/O or file-format errors, 2 on invalid
//! arguments. Output files are written only after all processing
//! succeeded, each through a temporary file and a rename.

mod args;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use mshia_core::fmt::sig9;
use mshia_core::{
    analysis, extract_profile, pgm, segment, stability_metrics, suite, Criterion, GrayImage,
    MeanShiftParams, SegmentationResult, StoppingConfig,
};

use crate::args::{Cli, Command, SegmentArgs};
use crate::output::{profile_path, tagged, OutputBatch};

enum CliError {
    /// Bad arguments; exit code 2.
    Usage(String),
    /// I/O or format problem with a named file; exit code 1.
    File { path: PathBuf, message: String },
}

impl CliError {
    fn file(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // value errors from clap come without a usage line
            let message = e.render().to_string();
            if message.contains("Usage:") {
                eprint!("{message}");
            } else {
                eprintln!("{}\n{}", message.trim_end(), segment_usage());
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}\n\n{}", segment_usage());
            ExitCode::from(2)
        }
        Err(CliError::File { path, message }) => {
            eprintln!("error: {}: {message}", path.display());
            ExitCode::from(1)
        }
    }
}

fn segment_usage() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    match cmd.find_subcommand_mut("segment") {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Segment(args) => run_segment(args),
        Command::Suite { out_dir } => {
            let mut batch = OutputBatch::default();
            for (name, img) in suite::standard_suite() {
                batch.add(out_dir.join(format!("{name}.pgm")), pgm::encode(&img));
            }
            let paths: Vec<String> = batch.paths().map(|p| p.display().to_string()).collect();
            batch
                .commit()
                .map_err(|e| CliError::file(&e.path, e.source))?;
            for p in paths {
                println!("{p}");
            }
            Ok(())
        }
    }
}

fn usage(err: impl std::fmt::Display) -> CliError {
    CliError::Usage(err.to_string())
}

fn run_segment(args: SegmentArgs) -> Result<(), CliError> {
    let mut ms = MeanShiftParams::new(args.hs, args.hr)
        .and_then(|p| p.with_inner_limits(args.inner_max_steps, args.inner_tol))
        .map_err(usage)?
        .with_kernel(args.kernel.into())
        .with_window(args.window.into());
    if args.single_shift {
        ms = ms.single_shift();
    }
    let stop = StoppingConfig::new(args.criterion.into(), args.threshold, args.max_iters)
        .map_err(usage)?;
    if args.threads == Some(0) {
        return Err(usage("--threads must be >= 1"));
    }

    let img = read_image(&args.input)?;
    for spec in &args.profiles {
        extract_profile(&img, *spec).map_err(|e| usage(format!("--profile {spec}: {e}")))?;
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| usage(format!("cannot start thread pool: {e}")))?;

    let mut batch = OutputBatch::default();
    let mut lines = Vec::new();

    if args.passthrough {
        batch.add(&args.output, pgm::encode(&img));
        lines.push(format!(
            "passthrough width={} height={}",
            img.width(),
            img.height()
        ));
    } else if args.compare {
        let mut reports = Vec::new();
        for criterion in [Criterion::OldEntropyDelta, Criterion::NewDiffEntropy] {
            let result = pool.install(|| segment(&img, &ms, &stop.with_criterion(criterion)));
            let tag = criterion.name();
            stage_result(
                &mut batch,
                &args,
                &result,
                &tagged(&args.output, tag),
                |p| tagged(p, tag),
            )?;
            lines.push(summary(criterion, &result));
            reports.push(format!("{tag}={}", stability_metrics(&result.trace)));
        }
        let comparison = format!("stability {}", reports.join(" "));
        if let Some(path) = &args.report {
            batch.add(path, format!("{comparison}\n"));
        }
        lines.push(comparison);
    } else {
        let result = pool.install(|| segment(&img, &ms, &stop));
        stage_result(&mut batch, &args, &result, &args.output, Path::to_path_buf)?;
        if let Some(path) = &args.report {
            batch.add(path, format!("{}\n", stability_metrics(&result.trace)));
        }
        lines.push(summary(stop.criterion(), &result));
    }

    batch
        .commit()
        .map_err(|e| CliError::file(&e.path, e.source))?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn stage_result(
    batch: &mut OutputBatch,
    args: &SegmentArgs,
    result: &SegmentationResult,
    image_path: &Path,
    trace_path: impl Fn(&Path) -> PathBuf,
) -> Result<(), CliError> {
    batch.add(image_path, pgm::encode(&result.final_image));
    if let Some(path) = &args.trace_csv {
        batch.add(trace_path(path), result.trace.to_csv());
    }
    for spec in &args.profiles {
        let profile = extract_profile(&result.final_image, *spec).map_err(usage)?;
        let mut csv = Vec::new();
        analysis::write_profile_csv(&mut csv, &profile).expect("writing to a Vec cannot fail");
        batch.add(profile_path(image_path, &spec.to_string()), csv);
    }
    Ok(())
}

fn summary(criterion: Criterion, result: &SegmentationResult) -> String {
    format!(
        "criterion={} iterations={} final_criterion={} terminated_by={}",
        criterion,
        result.iterations_run,
        sig9(result.trace.last_value()),
        result.trace.terminated_by
    )
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::file(path, e))?;
    if bytes.starts_with(b"\x89PNG") {
        mshia_core::png::read(path).map_err(|e| CliError::file(path, e))
    } else {
        pgm::decode(&bytes).map_err(|e| CliError::file(path, e))
    }
}
