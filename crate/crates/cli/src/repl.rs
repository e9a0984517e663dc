//! Line-oriented command loop. Output is plain text so transcripts can be
//! diffed.

use std::io::{BufRead, Write};

use uniact_client::Client;
use uniact_core::session::{CommandOutcome, Runtime, Session, StateView};

use crate::CliError;

pub trait Backend {
    fn submit(&mut self, nlc: &str) -> Result<CommandOutcome, CliError>;
    fn choose(&mut self, index: usize) -> Result<CommandOutcome, CliError>;
    fn state(&mut self) -> Result<StateView, CliError>;
}

pub struct Local {
    pub session: Session,
    pub runtime: Runtime,
}

impl Backend for Local {
    fn submit(&mut self, nlc: &str) -> Result<CommandOutcome, CliError> {
        Ok(self.session.submit(nlc, &self.runtime)?)
    }

    fn choose(&mut self, index: usize) -> Result<CommandOutcome, CliError> {
        Ok(self.session.choose(index, &self.runtime)?)
    }

    fn state(&mut self) -> Result<StateView, CliError> {
        Ok(self.session.view())
    }
}

pub struct Remote {
    pub rt: tokio::runtime::Runtime,
    pub client: Client,
    pub session: String,
}

impl Backend for Remote {
    fn submit(&mut self, nlc: &str) -> Result<CommandOutcome, CliError> {
        Ok(self.rt.block_on(self.client.command(&self.session, nlc))?)
    }

    fn choose(&mut self, index: usize) -> Result<CommandOutcome, CliError> {
        Ok(self.rt.block_on(self.client.choose(&self.session, index))?)
    }

    fn state(&mut self) -> Result<StateView, CliError> {
        Ok(self.rt.block_on(self.client.state(&self.session))?)
    }
}

fn print_outcome(out: &mut impl Write, outcome: &CommandOutcome) -> std::io::Result<()> {
    writeln!(out, "{}", outcome.message())?;
    match outcome {
        CommandOutcome::Executed { steps, .. } => {
            writeln!(out, "  steps: {}", steps.describe().join(" > "))?;
        }
        CommandOutcome::Ambiguous { candidates, .. } => {
            for (i, c) in candidates.iter().enumerate() {
                writeln!(out, "  {}. {}", i + 1, c.pair)?;
            }
        }
        CommandOutcome::Failed { steps, step_index, .. } => {
            writeln!(
                out,
                "  stopped at step {} after: {}",
                step_index + 1,
                steps.describe().join(" > ")
            )?;
        }
        CommandOutcome::Unresolved { .. } => {}
    }
    Ok(())
}

fn print_state(out: &mut impl Write, view: &StateView) -> std::io::Result<()> {
    fn walk(out: &mut impl Write, views: &[uniact_core::session::ControlView], depth: usize) -> std::io::Result<()> {
        for v in views {
            match &v.value {
                Some(value) => writeln!(out, "{}{}: {}", "  ".repeat(depth), v.name, value)?,
                None => writeln!(out, "{}{}", "  ".repeat(depth), v.name)?,
            }
            walk(out, &v.children, depth + 1)?;
        }
        Ok(())
    }
    walk(out, &view.tree, 0)
}

/// Reads commands until EOF or `:quit`. While a choice is pending, a line
/// is read as a 1-based candidate number.
pub fn run(app: &str, backend: &mut dyn Backend, input: impl BufRead, mut out: impl Write) -> Result<(), CliError> {
    writeln!(out, "{app}: type a command; :state shows the controls, :quit leaves")?;
    let mut pending = 0usize;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        match line {
            ":quit" | ":q" => break,
            ":state" => print_state(&mut out, &backend.state()?)?,
            _ if pending > 0 => match line.parse::<usize>() {
                Ok(n) if (1..=pending).contains(&n) => {
                    let outcome = backend.choose(n - 1)?;
                    pending = 0;
                    print_outcome(&mut out, &outcome)?;
                }
                _ => writeln!(out, "Please answer with a number from 1 to {pending}.")?,
            },
            _ => {
                let outcome = backend.submit(line)?;
                if let CommandOutcome::Ambiguous { candidates, .. } = &outcome {
                    pending = candidates.len();
                }
                print_outcome(&mut out, &outcome)?;
            }
        }
        write!(out, "{}", if pending > 0 { "choose> " } else { "> " })?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}
