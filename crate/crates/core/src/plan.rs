//! Routes split at the staging time, and their value.

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId {
    pub vtype: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub node: usize,
    pub start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehiclePlan {
    pub vehicle: VehicleId,
    pub stage1: Vec<Visit>,
    /// Where the vehicle is at the staging time: its last stage-1 asset, the start
    /// depot when it never left, or the end depot when it already returned.
    pub staging_node: usize,
    /// One route per scenario, starting after `staging_node`.
    pub stage2: Vec<Vec<Visit>>,
}

impl VehiclePlan {
    pub fn idle(vehicle: VehicleId, num_scenarios: usize) -> Self {
        Self {
            vehicle,
            stage1: Vec::new(),
            staging_node: 0,
            stage2: vec![Vec::new(); num_scenarios],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub vehicles: Vec<VehiclePlan>,
    /// Asset ids serviced in stage 1 (sorted).
    pub stage1_serviced: Vec<usize>,
    /// Per scenario, asset ids serviced in stage 2 (sorted).
    pub stage2_serviced: Vec<Vec<usize>>,
}

impl Plan {
    /// A plan with every vehicle idle at the depot.
    pub fn empty(instance: &Instance) -> Self {
        let f = instance.num_scenarios();
        let mut vehicles = Vec::new();
        for (q, &k) in instance.fleet.depot_availability.iter().enumerate() {
            for index in 0..k as usize {
                vehicles.push(VehiclePlan::idle(VehicleId { vtype: q, index }, f));
            }
        }
        Self {
            vehicles,
            stage1_serviced: Vec::new(),
            stage2_serviced: vec![Vec::new(); f],
        }
    }

    /// Recomputes the serviced lists from the visits: an asset counts as serviced
    /// when at least one vehicle visits it.
    pub fn serviced_from_visits(&mut self, num_scenarios: usize) {
        let mut s1: Vec<usize> = self
            .vehicles
            .iter()
            .flat_map(|v| v.stage1.iter().map(|x| x.node))
            .collect();
        s1.sort_unstable();
        s1.dedup();
        let mut s2 = vec![Vec::new(); num_scenarios];
        for (c, list) in s2.iter_mut().enumerate() {
            *list = self
                .vehicles
                .iter()
                .flat_map(|v| v.stage2.get(c).into_iter().flatten().map(|x| x.node))
                .collect();
            list.sort_unstable();
            list.dedup();
        }
        self.stage1_serviced = s1;
        self.stage2_serviced = s2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub stage1_value: f64,
    pub stage2_values: Vec<f64>,
    pub expected_total: f64,
}

/// Value of the serviced flags of `plan`. Feasibility is not checked.
pub fn evaluate(instance: &Instance, plan: &Plan) -> Result<Evaluation> {
    let f = instance.num_scenarios();
    if plan.stage2_serviced.len() != f {
        return Err(Error::Dimension(format!(
            "plan has {} scenario lists, instance has {f} scenarios",
            plan.stage2_serviced.len()
        )));
    }
    let value = |i: usize| -> Result<f64> {
        if i == 0 || i > instance.n() {
            return Err(Error::Dimension(format!("asset {i} does not exist")));
        }
        Ok(instance.asset(i).value)
    };
    let mut stage1_value = 0.0;
    for &i in &plan.stage1_serviced {
        stage1_value += value(i)?;
    }
    let mut stage2_values = Vec::with_capacity(f);
    for list in &plan.stage2_serviced {
        let mut v = 0.0;
        for &i in list {
            v += value(i)?;
        }
        stage2_values.push(v);
    }
    let expected_total = stage1_value
        + stage2_values
            .iter()
            .enumerate()
            .map(|(c, v)| instance.scenarios.probability(c) * v)
            .sum::<f64>();
    Ok(Evaluation {
        stage1_value,
        stage2_values,
        expected_total,
    })
}
