use std::process::ExitCode;

use clap::Parser;
use lchs::cli::{load_config_file, run, Cli, RunConfig, Settings};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(Settings::new()), load_config_file)
        .and_then(|file| RunConfig::resolve(&cli.command, file, cli.flag_settings()))
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
