//! Canonical JSON files for instances and plans.
//!
//! Keys are sorted, objects are indented by two spaces, arrays of scalars stay on
//! one line and floats are written with at most 9 fractional digits and no
//! exponent, so equal data always produces identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::instance::{
    Asset, Fleet, Instance, Meta, Point, Scenario, ScenarioSet, TimeWindows, TravelMatrix, Window,
};
use crate::plan::{Evaluation, Plan, VehicleId, VehiclePlan, Visit};

/// Formats a finite float with up to 9 decimals, trailing zeros removed.
pub fn format_float(x: f64) -> String {
    let mut s = format!("{x:.9}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Rounds to the 9-decimal grid used by the file format.
pub fn quantize(x: f64) -> f64 {
    let q = (x * 1e9).round() / 1e9;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Rewrites floats the way they read back from a file: on the 9-decimal grid, integral
/// values as integers.
pub fn normalize_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            serde_json::from_str(&format_float(x)).unwrap_or(Value::Number(n))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, normalize_value(x))).collect()),
        other => other,
    }
}

fn check_finite(v: &Value, path: &mut Vec<String>) -> Result<()> {
    match v {
        Value::Number(n) => {
            if n.as_f64().is_some_and(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("non-finite number at {}", path.join("."))));
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(i.to_string());
                check_finite(x, path)?;
                path.pop();
            }
        }
        Value::Object(o) => {
            for (k, x) in o {
                path.push(k.clone());
                check_finite(x, path)?;
                path.pop();
            }
        }
        // serde_json turns NaN and infinities into null
        Value::Null => {
            return Err(Error::invalid(format!(
                "non-finite or null value at {}",
                path.join(".")
            )));
        }
        _ => {}
    }
    Ok(())
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(0.0)));
            }
        }
        other => out.push_str(&other.to_string()),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 2);
                if k + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_scalar(out, x);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        scalar => write_scalar(out, scalar),
    }
}

/// Canonical text of any serializable value. Refuses NaN and infinities.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::invalid(e.to_string()))?;
    check_finite(&v, &mut Vec::new())?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path: if path == "." { "<root>".into() } else { path },
            message: format!("{inner}"),
        }
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssetFile {
    id: usize,
    x: f64,
    y: f64,
    value: f64,
    service_duration: f64,
    requirements: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DepotsFile {
    start: PointFile,
    end: PointFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FleetFile {
    counts: Vec<u32>,
    #[serde(default)]
    depot_availability: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    probability: f64,
    occurrence_time: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenariosFile {
    staging_time: f64,
    list: Vec<ScenarioFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TravelFile {
    num_nodes: usize,
    /// One row-major matrix per vehicle type.
    times: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowFile {
    asset: usize,
    open: f64,
    close: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowsFile {
    horizon: f64,
    stage1: Vec<WindowFile>,
    stage2: Vec<Vec<WindowFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default)]
    params: Map<String, Value>,
    #[serde(default)]
    category_retries: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    meta: MetaFile,
    assets: Vec<AssetFile>,
    depots: DepotsFile,
    fleet: FleetFile,
    scenarios: ScenariosFile,
    travel: TravelFile,
    windows: WindowsFile,
}

fn windows_to_file(list: &[Option<Window>]) -> Vec<WindowFile> {
    list.iter()
        .enumerate()
        .filter_map(|(k, w)| {
            w.map(|w| WindowFile {
                asset: k + 1,
                open: w.open,
                close: w.close,
            })
        })
        .collect()
}

fn windows_from_file(list: Vec<WindowFile>, n: usize, what: &str) -> Result<Vec<Option<Window>>> {
    let mut out = vec![None; n];
    for w in list {
        if w.asset == 0 || w.asset > n {
            return Err(Error::invalid(format!("{what} window names unknown asset {}", w.asset)));
        }
        if out[w.asset - 1].is_some() {
            return Err(Error::invalid(format!("{what} lists asset {} twice", w.asset)));
        }
        out[w.asset - 1] = Some(Window::new(w.open, w.close));
    }
    Ok(out)
}

impl From<&Instance> for InstanceFile {
    fn from(x: &Instance) -> Self {
        InstanceFile {
            meta: MetaFile {
                name: x.meta.name.clone(),
                seed: x.meta.seed,
                params: x.meta.params.clone(),
                category_retries: x.meta.category_retries,
            },
            assets: x
                .assets
                .iter()
                .map(|a| AssetFile {
                    id: a.id,
                    x: a.location.x,
                    y: a.location.y,
                    value: a.value,
                    service_duration: a.service_duration,
                    requirements: a.requirements.clone(),
                })
                .collect(),
            depots: DepotsFile {
                start: PointFile {
                    x: x.start_depot.x,
                    y: x.start_depot.y,
                },
                end: PointFile {
                    x: x.end_depot.x,
                    y: x.end_depot.y,
                },
            },
            fleet: FleetFile {
                counts: x.fleet.counts.clone(),
                depot_availability: Some(x.fleet.depot_availability.clone()),
            },
            scenarios: ScenariosFile {
                staging_time: x.scenarios.staging_time,
                list: x
                    .scenarios
                    .scenarios
                    .iter()
                    .map(|s| ScenarioFile {
                        probability: s.probability,
                        occurrence_time: s.occurrence_time,
                    })
                    .collect(),
            },
            travel: TravelFile {
                num_nodes: x.travel.num_nodes(),
                times: x.travel.rows().to_vec(),
            },
            windows: WindowsFile {
                horizon: x.windows.horizon,
                stage1: windows_to_file(&x.windows.stage1),
                stage2: x.windows.stage2.iter().map(|l| windows_to_file(l)).collect(),
            },
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        let n = f.assets.len();
        let fleet = Fleet {
            depot_availability: f
                .fleet
                .depot_availability
                .unwrap_or_else(|| f.fleet.counts.clone()),
            counts: f.fleet.counts,
        };
        let stage2 = f
            .windows
            .stage2
            .into_iter()
            .enumerate()
            .map(|(c, l)| windows_from_file(l, n, &format!("scenario {}", c + 1)))
            .collect::<Result<Vec<_>>>()?;
        let inst = Instance {
            meta: Meta {
                name: f.meta.name,
                seed: f.meta.seed,
                params: f.meta.params,
                category_retries: f.meta.category_retries,
            },
            assets: f
                .assets
                .into_iter()
                .map(|a| Asset {
                    id: a.id,
                    location: Point::new(a.x, a.y),
                    value: a.value,
                    service_duration: a.service_duration,
                    requirements: a.requirements,
                })
                .collect(),
            start_depot: Point::new(f.depots.start.x, f.depots.start.y),
            end_depot: Point::new(f.depots.end.x, f.depots.end.y),
            fleet,
            scenarios: ScenarioSet {
                staging_time: f.scenarios.staging_time,
                scenarios: f
                    .scenarios
                    .list
                    .into_iter()
                    .map(|s| Scenario {
                        probability: s.probability,
                        occurrence_time: s.occurrence_time,
                    })
                    .collect(),
            },
            travel: TravelMatrix::new(f.travel.num_nodes, f.travel.times)?,
            windows: TimeWindows {
                horizon: f.windows.horizon,
                stage1: windows_from_file(f.windows.stage1, n, "stage-1")?,
                stage2,
            },
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn instance_from_str(text: &str) -> Result<Instance> {
    let file: InstanceFile = parse(text)?;
    Instance::try_from(file)
}

pub fn instance_to_string(instance: &Instance) -> Result<String> {
    instance.validate()?;
    to_canonical_json(&InstanceFile::from(instance))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path.as_ref())?;
    instance_from_str(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let text = instance_to_string(instance)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VisitFile {
    node: usize,
    start: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleFile {
    #[serde(rename = "type")]
    vtype: usize,
    index: usize,
    staging_node: usize,
    stage1: Vec<VisitFile>,
    stage2: Vec<Vec<VisitFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServicedFile {
    stage1: Vec<usize>,
    stage2: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluationFile {
    stage1_value: f64,
    stage2_values: Vec<f64>,
    expected_total: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default)]
    meta: Map<String, Value>,
    vehicles: Vec<VehicleFile>,
    serviced: ServicedFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    evaluation: Option<EvaluationFile>,
}

fn visits_to_file(v: &[Visit]) -> Vec<VisitFile> {
    v.iter()
        .map(|x| VisitFile {
            node: x.node,
            start: x.start,
        })
        .collect()
}

fn visits_from_file(v: Vec<VisitFile>) -> Vec<Visit> {
    v.into_iter()
        .map(|x| Visit {
            node: x.node,
            start: x.start,
        })
        .collect()
}

/// Serializes a plan with an optional evaluation and free-form metadata.
pub fn plan_to_string(
    plan: &Plan,
    evaluation: Option<&Evaluation>,
    meta: Map<String, Value>,
) -> Result<String> {
    let file = PlanFile {
        meta,
        vehicles: plan
            .vehicles
            .iter()
            .map(|v| VehicleFile {
                vtype: v.vehicle.vtype,
                index: v.vehicle.index,
                staging_node: v.staging_node,
                stage1: visits_to_file(&v.stage1),
                stage2: v.stage2.iter().map(|r| visits_to_file(r)).collect(),
            })
            .collect(),
        serviced: ServicedFile {
            stage1: plan.stage1_serviced.clone(),
            stage2: plan.stage2_serviced.clone(),
        },
        evaluation: evaluation.map(|e| EvaluationFile {
            stage1_value: e.stage1_value,
            stage2_values: e.stage2_values.clone(),
            expected_total: e.expected_total,
        }),
    };
    to_canonical_json(&file)
}

/// Parses a plan file; the stored evaluation is ignored.
pub fn plan_from_str(text: &str) -> Result<(Plan, Map<String, Value>)> {
    let file: PlanFile = parse(text)?;
    let plan = Plan {
        vehicles: file
            .vehicles
            .into_iter()
            .map(|v| VehiclePlan {
                vehicle: VehicleId {
                    vtype: v.vtype,
                    index: v.index,
                },
                stage1: visits_from_file(v.stage1),
                staging_node: v.staging_node,
                stage2: v.stage2.into_iter().map(visits_from_file).collect(),
            })
            .collect(),
        stage1_serviced: file.serviced.stage1,
        stage2_serviced: file.serviced.stage2,
    };
    Ok((plan, file.meta))
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<Plan> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(plan_from_str(&text)?.0)
}
