use std::process::ExitCode;

use weakmeas::{run, RunConfig};

const USAGE: &str = "usage: weakmeas <command> [config=FILE] [key=value ...]
commands: mi-sweep plateau-compare nonmonotone-scan xi sme-ensemble overfit accuracy snr records replay";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || matches!(args[0].as_str(), "-h" | "--help" | "help") {
        eprintln!("{USAGE}");
        return ExitCode::from(if args.is_empty() { 2 } else { 0 });
    }
    let result = RunConfig::from_args(&args).and_then(|cfg| {
        let table = run(&cfg)?;
        table.write(cfg.get("out").unwrap_or("-"))?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakmeas: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
