//! Running a third-party MILP solver through LP and solution files.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use crate::error::MilpError;
use crate::lpfile::{export_lp, parse_external_solution};
use crate::model::MilpModel;
use crate::solution::Solution;

/// Environment variable holding the default command template.
pub const SOLVER_ENV: &str = "FIREBREAK_SOLVER_CMD";

/// A shell command with `{lp}` and `{sol}` placeholders, plus optional `{time}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub template: String,
}

impl ExternalSolver {
    pub fn new(template: impl Into<String>) -> Result<Self, MilpError> {
        let template = template.into();
        if !template.contains("{lp}") || !template.contains("{sol}") {
            return Err(MilpError::External(format!(
                "command template must contain {{lp}} and {{sol}}: `{template}`"
            )));
        }
        Ok(Self { template })
    }

    /// Template from [`SOLVER_ENV`], if set and non-empty.
    pub fn from_env() -> Option<Result<Self, MilpError>> {
        std::env::var(SOLVER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }

    fn command_line(&self, lp: &str, sol: &str, time_limit: Option<f64>) -> String {
        let time = time_limit.map_or_else(|| "1e30".to_owned(), |t| format!("{t}"));
        self.template
            .replace("{lp}", &shell_quote(lp))
            .replace("{sol}", &shell_quote(sol))
            .replace("{time}", &time)
    }

    /// Exports `model`, runs the command and reads back the solution.
    pub fn solve(&self, model: &MilpModel, time_limit: Option<f64>) -> Result<Solution, MilpError> {
        let dir = tempfile::tempdir()?;
        let lp: PathBuf = dir.path().join("model.lp");
        let sol: PathBuf = dir.path().join("model.sol");
        std::fs::write(&lp, export_lp(model))?;
        let line = self.command_line(
            &lp.to_string_lossy(),
            &sol.to_string_lossy(),
            time_limit,
        );
        log::debug!("running external solver: {line}");
        let start = Instant::now();
        let output = Command::new("sh").arg("-c").arg(&line).output()?;
        if !output.status.success() {
            return Err(MilpError::External(format!(
                "`{line}` exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&sol).map_err(|e| {
            MilpError::External(format!("solver wrote no solution file: {e}"))
        })?;
        let mut solution = parse_external_solution(&text, model)?;
        solution.stats.seconds = start.elapsed().as_secs_f64();
        Ok(solution)
    }
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_needs_placeholders() {
        assert!(ExternalSolver::new("solver {lp}").is_err());
        assert!(ExternalSolver::new("solver {lp} {sol}").is_ok());
    }

    #[test]
    fn command_line_quotes_paths() {
        let s = ExternalSolver::new("run {lp} -o {sol} -t {time}").unwrap();
        assert_eq!(
            s.command_line("/tmp/a b.lp", "/tmp/x.sol", Some(5.0)),
            "run '/tmp/a b.lp' -o '/tmp/x.sol' -t 5"
        );
    }

    #[test]
    fn failing_command_is_reported() {
        let s = ExternalSolver::new("false {lp} {sol}").unwrap();
        let m = MilpModel::new("t");
        assert!(matches!(s.solve(&m, None), Err(MilpError::External(_))));
    }
}
