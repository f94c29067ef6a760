use std::collections::HashMap;
use std::fmt;

use crate::error::MilpError;

/// Index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub label: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Eq => "=",
            ConstraintSense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            ConstraintSense::Le => (lhs - self.rhs).max(0.0),
            ConstraintSense::Ge => (self.rhs - lhs).max(0.0),
            ConstraintSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Model-level constants kept for reporting and LP comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelConfig {
    pub t_max: Option<f64>,
    /// Named big-M values used by the builder, for diagnostics.
    pub big_m: Vec<(String, f64)>,
}

/// A maximisation MILP: variables with bounds and kinds, linear rows, linear objective.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    pub objective_constant: f64,
    pub config: ModelConfig,
    by_label: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_variable(
        &mut self,
        label: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        let label = label.into();
        if self.by_label.contains_key(&label) {
            return Err(MilpError::DuplicateLabel(label));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(MilpError::InvalidBounds { label, lower, upper });
        }
        let id = VarId(self.variables.len());
        self.by_label.insert(label.clone(), id);
        self.variables.push(Variable {
            label,
            kind,
            lower,
            upper,
        });
        self.objective.push(0.0);
        Ok(id)
    }

    pub fn add_binary(&mut self, label: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(label, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_integer(
        &mut self,
        label: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        self.add_variable(label, VarKind::Integer, lower, upper)
    }

    pub fn add_continuous(
        &mut self,
        label: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        self.add_variable(label, VarKind::Continuous, lower, upper)
    }

    /// Adds a row. Duplicate variables in `terms` are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: ConstraintSense,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (v, c) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, var: VarId, coefficient: f64) {
        self.objective[var.0] = coefficient;
    }

    pub fn add_objective(&mut self, var: VarId, coefficient: f64) {
        self.objective[var.0] += coefficient;
    }

    pub fn fix(&mut self, var: VarId, value: f64) {
        let v = &mut self.variables[var.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn set_upper(&mut self, var: VarId, upper: f64) {
        self.variables[var.0].upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_by_label(&self, label: &str) -> Option<VarId> {
        self.by_label.get(label).copied()
    }

    pub fn num_integral(&self) -> usize {
        self.variables.iter().filter(|v| v.kind.is_integral()).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Checks the model invariants: finite coefficients, declared variables, consistent bounds.
    pub fn validate(&self) -> Result<(), MilpError> {
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(MilpError::InvalidBounds {
                    label: v.label.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        for (i, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(MilpError::NonFinite(format!(
                    "objective coefficient of {}",
                    self.variables[i].label
                )));
            }
        }
        for row in &self.constraints {
            if !row.rhs.is_finite() {
                return Err(MilpError::NonFinite(format!("rhs of {}", row.name)));
            }
            for &(v, c) in &row.terms {
                if v.0 >= self.variables.len() {
                    return Err(MilpError::UnknownVariable(format!(
                        "{} references variable #{}",
                        row.name, v.0
                    )));
                }
                if !c.is_finite() {
                    return Err(MilpError::NonFinite(format!(
                        "coefficient of {} in {}",
                        self.variables[v.0].label, row.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest bound, integrality or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind.is_integral() {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for row in &self.constraints {
            worst = worst.max(row.violation(values));
        }
        worst
    }

    /// Names of rows violated by more than `tol`.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<(String, f64)> {
        self.constraints
            .iter()
            .filter_map(|row| {
                let v = row.violation(values);
                (v > tol).then(|| (row.name.clone(), v))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_are_rejected() {
        let mut m = MilpModel::new("t");
        m.add_binary("x").unwrap();
        assert!(matches!(
            m.add_binary("x"),
            Err(MilpError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn add_constraint_merges_terms() {
        let mut m = MilpModel::new("t");
        let x = m.add_binary("x").unwrap();
        let y = m.add_binary("y").unwrap();
        let r = m.add_constraint("r", [(x, 1.0), (y, 2.0), (x, 2.0), (y, -2.0)], ConstraintSense::Le, 3.0);
        assert_eq!(m.constraints()[r].terms, vec![(x, 3.0)]);
    }

    #[test]
    fn inverted_bounds_are_an_error() {
        let mut m = MilpModel::new("t");
        assert!(m.add_continuous("s", 2.0, 1.0).is_err());
    }

    #[test]
    fn violation_measures() {
        let mut m = MilpModel::new("t");
        let x = m.add_integer("x", 0.0, 3.0).unwrap();
        m.add_constraint("r", [(x, 1.0)], ConstraintSense::Ge, 2.0);
        assert_eq!(m.max_violation(&[2.0]), 0.0);
        assert!((m.max_violation(&[1.5]) - 0.5).abs() < 1e-12);
    }
}
