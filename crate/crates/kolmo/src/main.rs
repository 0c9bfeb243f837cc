use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kolmo::cli::{dispatch, Cli};
use kolmo::manifest::RunManifest;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let write = || -> anyhow::Result<()> {
        for (path, text) in &out.side_files {
            std::fs::write(path, text)?;
        }
        match &cli.out {
            Some(p) => std::fs::write(p, &out.text)?,
            None => std::io::stdout().write_all(out.text.as_bytes())?,
        }
        if let Some(p) = &cli.manifest {
            let args: Vec<String> = std::env::args().skip(1).collect();
            let sub = args.iter().take_while(|a| !a.starts_with('-')).cloned().collect::<Vec<_>>().join(" ");
            let m = RunManifest::new(sub, args, &out.inputs, out.text.as_bytes())?;
            std::fs::write(p, m.to_json())?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("invariant check failed");
        ExitCode::from(1)
    }
}
