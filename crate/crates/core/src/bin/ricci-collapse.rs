use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ricci_collapse::pipeline::{exit_code, run, Command, Recipe, RunConfig};

#[derive(Parser)]
#[command(version, about = "Collapsing Ricci-flow sequences: simulate, rescale, glue and compare")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run config; every block has defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (required).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    Simulate,
    Collapse,
    Dilate,
    Gh,
    Glue,
    Compare,
    Classify,
    Pipeline { recipe: RecipeArg },
}

#[derive(ValueEnum, Clone, Copy)]
enum RecipeArg {
    Type2b,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(out) = cli.out else {
        eprintln!("error: --out DIR is required");
        return ExitCode::from(2);
    };
    let (command, recipe) = match cli.command {
        Cmd::Simulate => (Command::Simulate, None),
        Cmd::Collapse => (Command::Collapse, None),
        Cmd::Dilate => (Command::Dilate, None),
        Cmd::Gh => (Command::Gh, None),
        Cmd::Glue => (Command::Glue, None),
        Cmd::Compare => (Command::Compare, None),
        Cmd::Classify => (Command::Classify, None),
        Cmd::Pipeline { recipe: RecipeArg::Type2b } => (Command::Pipeline, Some(Recipe::Type2b)),
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    };
    let result = cfg.and_then(|cfg| run(command, recipe, &cfg, &out, cli.seed));
    match result {
        Ok(m) => {
            println!("wrote {} files to {}", m.files.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
