#![allow(dead_code)]

use firebreak_core::instance::{
    Asset, Fleet, Instance, Meta, Point, Scenario, ScenarioSet, TimeWindows, TravelMatrix, Window,
};

pub struct Site {
    pub at: (f64, f64),
    pub value: f64,
    pub req: Vec<u32>,
    pub stage1: Option<(f64, f64)>,
    pub stage2: Vec<Option<(f64, f64)>>,
}

impl Site {
    pub fn new(at: (f64, f64), value: f64, req: &[u32]) -> Self {
        Self {
            at,
            value,
            req: req.to_vec(),
            stage1: None,
            stage2: Vec::new(),
        }
    }

    pub fn stage1(mut self, open: f64, close: f64) -> Self {
        self.stage1 = Some((open, close));
        self
    }

    pub fn scenario(mut self, c: usize, open: f64, close: f64) -> Self {
        if self.stage2.len() <= c {
            self.stage2.resize(c + 1, None);
        }
        self.stage2[c] = Some((open, close));
        self
    }
}

/// Depot at the origin, straight-line travel at `speed`, service 0.5, scenario `c` changing
/// at `st + c`.
pub fn instance(fleet: &[u32], probs: &[f64], st: f64, speed: f64, sites: Vec<Site>) -> Instance {
    let n = sites.len();
    let f = probs.len();
    let depot = Point::new(0.0, 0.0);
    let mut locs = vec![depot];
    locs.extend(sites.iter().map(|s| Point::new(s.at.0, s.at.1)));
    locs.push(depot);
    let travel = TravelMatrix::uniform(fleet.len(), n + 2, |i, j| locs[i].dist(locs[j]) / speed);
    let win = |w: Option<(f64, f64)>| w.map(|(o, c)| Window::new(o, c));
    let stage1: Vec<Option<Window>> = sites.iter().map(|s| win(s.stage1)).collect();
    let stage2: Vec<Vec<Option<Window>>> = (0..f)
        .map(|c| sites.iter().map(|s| win(s.stage2.get(c).copied().flatten())).collect())
        .collect();
    let latest = stage1
        .iter()
        .chain(stage2.iter().flatten())
        .flatten()
        .map(|w| w.close)
        .fold(st + f as f64, f64::max);
    let inst = Instance {
        meta: Meta {
            name: "test".into(),
            ..Meta::default()
        },
        assets: sites
            .iter()
            .enumerate()
            .map(|(k, s)| Asset {
                id: k + 1,
                location: Point::new(s.at.0, s.at.1),
                value: s.value,
                service_duration: 0.5,
                requirements: s.req.clone(),
            })
            .collect(),
        start_depot: depot,
        end_depot: depot,
        fleet: Fleet::new(fleet.to_vec()),
        scenarios: ScenarioSet {
            staging_time: st,
            scenarios: probs
                .iter()
                .enumerate()
                .map(|(c, &p)| Scenario {
                    probability: p,
                    occurrence_time: st + c as f64,
                })
                .collect(),
        },
        travel: travel.clone(),
        windows: TimeWindows {
            horizon: latest + travel.max_time(),
            stage1,
            stage2,
        },
    };
    inst.validate().expect("test instance is valid");
    inst
}
