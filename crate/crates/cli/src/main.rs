mod args;
mod commands;
mod error;
mod output;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, EXIT_CONFIG};
use crate::output::RunManifest;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.render().to_string().trim().to_string());
            let argv: Vec<String> = std::env::args().skip(1).collect();
            if let Some(dir) = out_dir_from_argv(&argv) {
                let command = argv.iter().find(|a| !a.starts_with('-')).map_or("", String::as_str);
                let mut manifest = RunManifest::new(command, &[]);
                manifest.status = "error".into();
                manifest.error = Some(err.to_json()["error"].clone());
                let _ = manifest.write(&dir);
            }
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };

    let (name, inputs, manifest_dir): (&str, Vec<PathBuf>, Option<PathBuf>) = match &cli.command {
        Command::EvaluateColor(a) => (
            "evaluate-color",
            vec![a.camo.clone(), a.background.clone()],
            a.common
                .out_dir
                .clone()
                .or_else(|| a.emit_histograms.then(|| PathBuf::from("."))),
        ),
        Command::EvaluateTexture(a) => (
            "evaluate-texture",
            vec![a.camo.clone(), a.background.clone()],
            a.common.out_dir.clone(),
        ),
        Command::Segment(a) => (
            "segment",
            vec![a.background.clone()],
            Some(a.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))),
        ),
        Command::Design(a) => (
            "design",
            a.backgrounds.clone(),
            Some(a.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))),
        ),
        Command::Fixtures(a) => ("fixtures", Vec::new(), Some(a.out_dir.clone())),
    };
    let mut manifest = RunManifest::new(name, &inputs);

    let result = match &cli.command {
        Command::EvaluateColor(a) => commands::evaluate_color(a, &mut manifest),
        Command::EvaluateTexture(a) => commands::evaluate_texture(a, &mut manifest),
        Command::Segment(a) => commands::segment(a, &mut manifest),
        Command::Design(a) => commands::design(a, &mut manifest),
        Command::Fixtures(a) => commands::fixtures(a, &mut manifest),
    };

    let result = result.and_then(|stdout| {
        if let Some(dir) = &manifest_dir {
            manifest.write(dir)?;
        }
        Ok(stdout)
    });

    match result {
        Ok(stdout) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(stdout.as_bytes());
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let Some(dir) = &manifest_dir {
                manifest.status = "error".into();
                manifest.outputs.clear();
                manifest.error = Some(err.to_json()["error"].clone());
                let _ = manifest.write(dir);
            }
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

/// Best-effort `--out-dir` lookup for arguments clap rejected, so that a
/// manifest can still record the failure.
fn out_dir_from_argv(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out-dir" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--out-dir=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}
