#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod table;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use levy_scale::Error;

use args::Cli;

/// 2 for invalid input, 3 for numerical failures, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::PoleEvaluation { .. }
            | Error::BracketingFailure(_)
            | Error::RepeatedRootsDetected { .. }
            | Error::ExponentAtPole { .. },
        ) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let (table, q) = commands::run(&cli.command)?;
    let out = cli.command.output();
    let mut config = serde_json::to_value(&cli.command)?;
    config["q"] = q.into();
    table::emit(&table.render(out.format, out.precision, &config), out.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let code = |e: Error| exit_code(&anyhow::Error::from(e));
        assert_eq!(code(Error::ModelFile("bad".into())), 2);
        assert_eq!(code(Error::SimplexViolation("sum".into())), 2);
        assert_eq!(code(Error::NegativeSubordinator { mu: -1.0 }), 2);
        assert_eq!(code(Error::BracketingFailure("none".into())), 3);
        assert_eq!(code(Error::PoleEvaluation { pole: 1.0 }), 3);
        assert_eq!(code(Error::RepeatedRootsDetected { location: 1.0 }), 3);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }
}
