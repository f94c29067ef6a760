//! CPLEX-LP text export and solution-file parsing.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::MilpError;
use crate::model::{MilpModel, VarId, VarKind};
use crate::solution::{Solution, SolveStats, SolveStatus};

const WRAP: usize = 200;
const CONST_NAME: &str = "obj_constant";

/// Maps a label to a name the LP format accepts.
///
/// Letters, digits, `_` and `.` are kept; `[` and `,` become `_`; `]` is dropped;
/// anything else becomes `_`. Names that could be read as a number get a `v_` prefix.
pub fn sanitize(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for ch in label.chars() {
        match ch {
            'A'..='Z' | 'a'..='z' | '0'..='9' | '_' | '.' => out.push(ch),
            ']' => {}
            _ => out.push('_'),
        }
    }
    let bytes = out.as_bytes();
    let numeric_start = match bytes.first() {
        None => true,
        Some(b) if b.is_ascii_digit() || *b == b'.' => true,
        Some(b'e' | b'E') => bytes.get(1).is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    };
    let lower = out.to_ascii_lowercase();
    if numeric_start || matches!(lower.as_str(), "inf" | "infinity" | "free") {
        out.insert_str(0, "v_");
    }
    out
}

fn unique_names(labels: impl Iterator<Item = String>, reserved: &[&str]) -> Vec<String> {
    let mut seen: HashSet<String> = reserved.iter().map(|s| s.to_string()).collect();
    labels
        .map(|label| {
            let base = sanitize(&label);
            let mut name = base.clone();
            let mut k = 2;
            while !seen.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}

/// LP column names, in variable order.
pub fn lp_names(model: &MilpModel) -> Vec<String> {
    unique_names(
        model.variables().iter().map(|v| v.label.clone()),
        &[CONST_NAME],
    )
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn push_terms(buf: &mut String, head: &str, terms: &[(String, f64)]) {
    let mut line = String::from(head);
    if terms.is_empty() {
        line.push_str(" 0");
    }
    for (name, c) in terms {
        let sign = if *c < 0.0 { '-' } else { '+' };
        let mag = c.abs();
        let piece = if mag == 1.0 {
            format!(" {sign} {name}")
        } else {
            format!(" {sign} {} {name}", fmt_num(mag))
        };
        if line.len() + piece.len() > WRAP {
            buf.push_str(&line);
            buf.push('\n');
            line = String::from(" ");
        }
        line.push_str(&piece);
    }
    buf.push_str(&line);
}

/// Writes `model` in CPLEX-LP format. Column names come from [`lp_names`].
pub fn export_lp(model: &MilpModel) -> String {
    let names = lp_names(model);
    let row_names = unique_names(
        model.constraints().iter().enumerate().map(|(i, c)| {
            if c.name.is_empty() {
                format!("r{i}")
            } else {
                c.name.clone()
            }
        }),
        &["obj"],
    );
    let mut out = String::new();
    out.push_str("Maximize\n");
    let mut obj: Vec<(String, f64)> = model
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (names[j].clone(), c))
        .collect();
    let has_constant = model.objective_constant != 0.0;
    if has_constant {
        obj.push((CONST_NAME.to_owned(), model.objective_constant));
    }
    push_terms(&mut out, " obj:", &obj);
    out.push('\n');

    out.push_str("Subject To\n");
    for (row, rname) in model.constraints().iter().zip(&row_names) {
        let terms: Vec<(String, f64)> = row
            .terms
            .iter()
            .map(|&(v, c)| (names[v.0].clone(), c))
            .collect();
        push_terms(&mut out, &format!(" {rname}:"), &terms);
        let _ = writeln!(out, " {} {}", row.sense, fmt_num(row.rhs));
    }

    let mut bounds = String::new();
    let mut generals = Vec::new();
    let mut binaries = Vec::new();
    for (v, name) in model.variables().iter().zip(&names) {
        let is_plain_binary = v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0;
        if is_plain_binary {
            binaries.push(name.as_str());
            continue;
        }
        if v.kind.is_integral() {
            generals.push(name.as_str());
        }
        let (lo, hi) = (v.lower, v.upper);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        let line = if lo == hi {
            format!(" {name} = {}", fmt_num(lo))
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            format!(" {name} free")
        } else if hi == f64::INFINITY {
            format!(" {name} >= {}", fmt_num(lo))
        } else {
            format!(" {} <= {name} <= {}", fmt_num(lo), fmt_num(hi))
        };
        bounds.push_str(&line);
        bounds.push('\n');
    }
    if has_constant {
        let _ = writeln!(bounds, " {CONST_NAME} = 1");
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        out.push_str(&bounds);
    }
    for (title, list) in [("Generals", &generals), ("Binaries", &binaries)] {
        if list.is_empty() {
            continue;
        }
        out.push_str(title);
        out.push('\n');
        let mut line = String::new();
        for name in list.iter() {
            if line.len() + name.len() + 1 > WRAP {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(name);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

/// Reads a solution file written by an external solver.
///
/// Accepts the HiGHS text format (`Model status` / `# Columns N` blocks) and the
/// plain `name value` format with `#` comments used by several other solvers.
pub fn parse_external_solution(text: &str, model: &MilpModel) -> Result<Solution, MilpError> {
    let names = lp_names(model);
    let mut lookup: HashMap<&str, VarId> = HashMap::new();
    for (j, v) in model.variables().iter().enumerate() {
        lookup.insert(v.label.as_str(), VarId(j));
    }
    for (j, n) in names.iter().enumerate() {
        lookup.insert(n.as_str(), VarId(j));
    }

    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut status_text: Option<&str> = None;
    let mut file_objective: Option<f64> = None;
    let mut values: Vec<Option<f64>> = vec![None; model.num_vars()];
    let mut seen_values = false;

    let highs_format = lines.first().is_some_and(|l| *l == "Model status");
    if highs_format {
        status_text = lines.get(1).copied();
        let mut i = 2;
        while i < lines.len() {
            let line = lines[i];
            if let Some(rest) = line.strip_prefix("Objective ") {
                file_objective = Some(parse_num(rest, i)?);
            } else if let Some(rest) = line.strip_prefix("# Columns ") {
                let count: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| malformed(i, "column count"))?;
                for k in 0..count {
                    let row = lines
                        .get(i + 1 + k)
                        .ok_or_else(|| malformed(i + 1 + k, "truncated column block"))?;
                    assign(row, i + 1 + k, &lookup, &mut values)?;
                }
                seen_values = true;
                break;
            }
            i += 1;
        }
    } else {
        for (i, line) in lines.iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((_, v)) = comment.split_once('=') {
                    if comment.to_ascii_lowercase().contains("objective") {
                        file_objective = Some(parse_num(v, i)?);
                    }
                }
                continue;
            }
            assign(line, i, &lookup, &mut values)?;
            seen_values = true;
        }
    }
    if !seen_values {
        return Err(MilpError::MalformedSolution(
            "no variable values in solution file".into(),
        ));
    }

    let status = match status_text.map(str::to_ascii_lowercase).as_deref() {
        Some("infeasible") => {
            return Ok(Solution::infeasible(SolveStats::default()));
        }
        Some("optimal") => SolveStatus::Optimal,
        _ => SolveStatus::Feasible { gap: f64::NAN },
    };
    let values: Vec<f64> = values
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            v.unwrap_or_else(|| {
                log::warn!(
                    "solution file has no value for `{}`, using 0",
                    model.variables()[j].label
                );
                0.0
            })
        })
        .collect();
    let objective = model.objective_value(&values);
    if let Some(f) = file_objective {
        if (f - objective).abs() > 1e-6 * f.abs().max(1.0) {
            log::warn!("solution file objective {f} differs from recomputed {objective}");
        }
    }
    let bound = match status {
        SolveStatus::Optimal => objective,
        _ => f64::INFINITY,
    };
    Ok(Solution {
        status,
        values,
        objective,
        bound,
        stats: SolveStats::default(),
    })
}

fn malformed(line: usize, what: &str) -> MilpError {
    MilpError::MalformedSolution(format!("line {}: {what}", line + 1))
}

fn parse_num(s: &str, line: usize) -> Result<f64, MilpError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| malformed(line, &format!("bad number `{}`", s.trim())))
}

fn assign(
    row: &str,
    line: usize,
    lookup: &HashMap<&str, VarId>,
    values: &mut [Option<f64>],
) -> Result<(), MilpError> {
    let mut parts = row.split_whitespace();
    let (Some(name), Some(val)) = (parts.next(), parts.next()) else {
        return Err(malformed(line, "expected `name value`"));
    };
    if name == CONST_NAME {
        return Ok(());
    }
    let var = lookup
        .get(name)
        .ok_or_else(|| MilpError::UnknownVariable(name.to_owned()))?;
    values[var.0] = Some(parse_num(val, line)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitize_rules() {
        assert_eq!(sanitize("Y_f[3]"), "Y_f_3");
        assert_eq!(sanitize("X_s[0,3,1,2]"), "X_s_0_3_1_2");
        assert_eq!(sanitize("Γ[2,1]"), "__2_1");
        assert_eq!(sanitize("3x"), "v_3x");
        assert_eq!(sanitize("e12"), "v_e12");
        assert_eq!(sanitize("a-b c"), "a_b_c");
    }

    #[test]
    fn colliding_labels_get_suffixes() {
        let mut m = MilpModel::new("t");
        m.add_binary("a[1]").unwrap();
        m.add_binary("a_1").unwrap();
        assert_eq!(lp_names(&m), vec!["a_1", "a_1_2"]);
    }
}
