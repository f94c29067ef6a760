//! Extension to more than two wind-change times.
//!
//! Scenarios are ordered by change time. A scenario whose change has not happened yet looks
//! exactly like every later one, so stage-2 visits made before `TO_c` under scenario `c`
//! must be repeated identically in all later scenarios.

use firebreak_milp::{ConstraintSense, VarId};

use crate::error::{Error, Result};
use crate::instance::{Instance, ScenarioSet};
use crate::plan::Plan;
use crate::stochastic::{self, StochasticModel};

/// Sorts scenarios by occurrence time. Returns the sorted set and, for each new position,
/// the original index.
pub fn order_scenarios(set: &ScenarioSet) -> Result<(ScenarioSet, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..set.len()).collect();
    perm.sort_by(|&a, &b| {
        set.scenarios[a]
            .occurrence_time
            .total_cmp(&set.scenarios[b].occurrence_time)
    });
    for w in perm.windows(2) {
        if set.scenarios[w[0]].occurrence_time == set.scenarios[w[1]].occurrence_time {
            return Err(Error::invalid(format!(
                "scenarios {} and {} share the occurrence time {}",
                w[0] + 1,
                w[1] + 1,
                set.scenarios[w[0]].occurrence_time
            )));
        }
    }
    let sorted = ScenarioSet {
        staging_time: set.staging_time,
        scenarios: perm.iter().map(|&k| set.scenarios[k]).collect(),
    };
    Ok((sorted, perm))
}

/// Reorders an instance's scenarios (and their windows) by occurrence time.
pub fn order_instance(instance: &Instance) -> Result<Instance> {
    let (scenarios, perm) = order_scenarios(&instance.scenarios)?;
    let mut out = instance.clone();
    out.scenarios = scenarios;
    out.windows.stage2 = perm.iter().map(|&k| instance.windows.stage2[k].clone()).collect();
    Ok(out)
}

/// Builds the two-stage model plus the shared-interval rows for scenarios 2..F.
pub fn build_multi(instance: &Instance) -> Result<StochasticModel> {
    let mut h = stochastic::build(instance)?;
    let f = instance.num_scenarios();
    if f < 2 {
        return Ok(h);
    }
    let n = instance.n();
    let nq = instance.num_types();
    let sink = n + 1;
    let m = &mut h.model;
    let mut gamma = vec![vec![None; n]; f];
    for c in 1..f {
        let to = instance.scenarios.scenarios[c].occurrence_time;
        for i in 1..=n {
            let ys = h.y_s[c][i - 1];
            if m.variable(ys).upper == 0.0 {
                continue;
            }
            let g = m.add_binary(format!("G[{i},{}]", c + 1))?;
            gamma[c][i - 1] = Some(g);
            let s = h.s_s[c][i - 1];
            let (lo, hi) = (m.variable(s).lower, m.variable(s).upper);
            // S <= TO_c when G = 1
            let big = hi - to;
            if big > 0.0 {
                m.add_constraint(
                    format!("shared_before[{i},{}]", c + 1),
                    [(s, 1.0), (g, big)],
                    ConstraintSense::Le,
                    to + big,
                );
            }
            // S >= TO_c when the asset is serviced and G = 0
            let big = to - lo;
            if big > 0.0 {
                m.add_constraint(
                    format!("shared_after[{i},{}]", c + 1),
                    [(s, 1.0), (g, big), (ys, -big)],
                    ConstraintSense::Ge,
                    to - big,
                );
            }
            m.add_constraint(
                format!("shared_serviced[{i},{}]", c + 1),
                [(g, 1.0), (ys, -1.0)],
                ConstraintSense::Le,
                0.0,
            );
        }
    }

    // Printed form of the lower rows is
    //   S_i(c) >= S_i(c') + M(1 - G_i(c))   and   X_jiq(c) >= X_jiq(c') + M(1 - G_i(c)),
    // which cannot hold when G_i(c) = 0; the band below is released by -M(1 - G_i(c)).
    for c in 1..f {
        for i in 1..=n {
            let Some(g) = gamma[c][i - 1] else { continue };
            for c2 in c + 1..f {
                let (s1, s2) = (h.s_s[c][i - 1], h.s_s[c2][i - 1]);
                let (lo1, hi1) = (m.variable(s1).lower, m.variable(s1).upper);
                let (lo2, hi2) = (m.variable(s2).lower, m.variable(s2).upper);
                let tag = format!("{i},{},{}", c + 1, c2 + 1);
                let big = hi1 - lo2;
                if big > 0.0 {
                    m.add_constraint(
                        format!("same_start_hi[{tag}]"),
                        [(s1, 1.0), (s2, -1.0), (g, big)],
                        ConstraintSense::Le,
                        big,
                    );
                }
                let big = hi2 - lo1;
                if big > 0.0 {
                    m.add_constraint(
                        format!("same_start_lo[{tag}]"),
                        [(s1, 1.0), (s2, -1.0), (g, -big)],
                        ConstraintSense::Ge,
                        -big,
                    );
                }
                for q in 0..nq {
                    let x1: Vec<_> = h.x_s[c]
                        .iter()
                        .filter(|a| a.arc.to == i && a.arc.vtype == q)
                        .copied()
                        .collect();
                    let x2: Vec<_> = h.x_s[c2]
                        .iter()
                        .filter(|a| a.arc.to == i && a.arc.vtype == q)
                        .copied()
                        .collect();
                    let mut origins: Vec<usize> = x1.iter().chain(&x2).map(|a| a.arc.from).collect();
                    origins.sort_unstable();
                    origins.dedup();
                    for j in origins {
                        if j == sink {
                            continue;
                        }
                        let v1: Option<VarId> = x1.iter().find(|a| a.arc.from == j).map(|a| a.x);
                        let v2: Option<VarId> = x2.iter().find(|a| a.arc.from == j).map(|a| a.x);
                        let ub1 = v1.map_or(0.0, |v| m.variable(v).upper);
                        let ub2 = v2.map_or(0.0, |v| m.variable(v).upper);
                        let mut diff = Vec::new();
                        if let Some(v) = v1 {
                            diff.push((v, 1.0));
                        }
                        if let Some(v) = v2 {
                            diff.push((v, -1.0));
                        }
                        let tag = format!("{j},{i},{},{},{}", q + 1, c + 1, c2 + 1);
                        if ub1 > 0.0 {
                            let mut t = diff.clone();
                            t.push((g, ub1));
                            m.add_constraint(format!("same_flow_hi[{tag}]"), t, ConstraintSense::Le, ub1);
                        }
                        if ub2 > 0.0 {
                            let mut t = diff;
                            t.push((g, -ub2));
                            m.add_constraint(format!("same_flow_lo[{tag}]"), t, ConstraintSense::Ge, -ub2);
                        }
                    }
                }
            }
        }
    }
    h.gamma = gamma;
    Ok(h)
}

/// Like [`stochastic::plan_to_assignment`], also setting the shared-interval indicators.
pub fn plan_to_assignment(h: &StochasticModel, instance: &Instance, plan: &Plan) -> Result<Vec<f64>> {
    let mut values = stochastic::plan_to_assignment(h, instance, plan)?;
    for (c, row) in h.gamma.iter().enumerate() {
        let to = instance.scenarios.scenarios[c].occurrence_time;
        for (k, g) in row.iter().enumerate() {
            if let Some(g) = g {
                let serviced = values[h.y_s[c][k].0] > 0.5;
                let before = values[h.s_s[c][k].0] < to;
                values[g.0] = if serviced && before { 1.0 } else { 0.0 };
            }
        }
    }
    Ok(values)
}
