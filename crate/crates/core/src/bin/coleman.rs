use std::io::Write;
use std::process::ExitCode;

use coleman_core::cli::{run, EXIT_FAIL};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let ex = run(&argv);
    eprintln!("{}", ex.summary.trim_end());
    let mut code = ex.code;
    if let Some(text) = ex.report_text() {
        let written = match &ex.out {
            Some(path) => std::fs::write(path, text + "\n"),
            None => writeln!(std::io::stdout(), "{text}"),
        };
        if let Err(e) = written {
            eprintln!("cannot write report: {e}");
            code = EXIT_FAIL;
        }
    }
    ExitCode::from(code as u8)
}
