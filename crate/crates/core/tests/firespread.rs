use firebreak_core::firespread::{
    classify_impacts, derive_windows, impact_time, window_for_impact, FireModel, RiskCategory,
    WindowParams,
};
use firebreak_core::instance::{Point, Window};
use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg32;

const ST: f64 = 4.5;
const DELAY: f64 = 2.0;
const HORIZON: f64 = 10.0;

fn table1_model(ignition: Point) -> FireModel {
    FireModel::with_changes(ignition, (14.0, 16.0), &[(ST, 19.0, 17.0), (ST + DELAY, 21.0, 19.0)])
}

/// Axis lengths from the velocity schedule, written out independently of the library.
fn oracle_radii(c: usize, t: f64) -> (f64, f64) {
    let (change, v1) = if c == 0 { (ST, (19.0, 17.0)) } else { (ST + DELAY, (21.0, 19.0)) };
    let before = t.min(change);
    let after = (t - change).max(0.0);
    (14.0 * before + v1.0 * after, 16.0 * before + v1.1 * after)
}

fn oracle_inside(c: usize, dx: f64, dy: f64, t: f64) -> bool {
    let (rx, ry) = oracle_radii(c, t);
    if rx <= 0.0 {
        return dx == 0.0 && dy == 0.0;
    }
    (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0
}

fn bisection(c: usize, dx: f64, dy: f64) -> Option<f64> {
    if !oracle_inside(c, dx, dy, HORIZON) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, HORIZON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_inside(c, dx, dy, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn unit(rng: &mut Pcg32) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn closed_form_matches_bisection_on_random_points() {
    let ignition = Point::new(0.0, 0.0);
    let model = table1_model(ignition);
    let mut rng = Pcg32::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut reached = 0;
    for _ in 0..1000 {
        let p = Point::new(unit(&mut rng) * 320.0 - 160.0, unit(&mut rng) * 320.0 - 160.0);
        for c in 0..2 {
            let got = impact_time(p, &model, c, HORIZON);
            let want = bisection(c, p.x, p.y);
            match (got, want) {
                (Some(a), Some(b)) => {
                    worst = worst.max((a - b).abs());
                    reached += 1;
                }
                (None, None) => {}
                other => panic!("{p:?} scenario {c}: {other:?}"),
            }
        }
    }
    assert!(worst < 1e-6, "largest deviation {worst}");
    assert!(reached > 1000, "too few points reached: {reached}");
}

#[test]
fn continuous_across_the_change() {
    let model = table1_model(Point::new(0.0, 0.0));
    for c in 0..2 {
        let change = if c == 0 { ST } else { ST + DELAY };
        let (a, b) = (model.radii(c, change - 1e-9), model.radii(c, change + 1e-9));
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6);
        // points on the front at the change time, nudged inwards and outwards
        let (rx, ry) = oracle_radii(c, change);
        for k in 0..36 {
            let theta = k as f64 * std::f64::consts::PI / 18.0;
            let on = (rx * theta.cos(), ry * theta.sin());
            for scale in [1.0 - 1e-9, 1.0 + 1e-9] {
                let p = Point::new(on.0 * scale, on.1 * scale);
                let t = impact_time(p, &model, c, HORIZON).unwrap();
                assert!((t - change).abs() < 1e-6, "c={c} theta={theta}: {t}");
            }
        }
    }
}

#[test]
fn inside_once_reached() {
    let model = table1_model(Point::new(0.0, 0.0));
    let mut rng = Pcg32::seed_from_u64(9);
    for _ in 0..200 {
        let p = Point::new(unit(&mut rng) * 200.0 - 100.0, unit(&mut rng) * 200.0 - 100.0);
        for c in 0..2 {
            if let Some(t) = impact_time(p, &model, c, HORIZON) {
                for k in 0..20 {
                    let later = t + 1e-6 + k as f64 * (HORIZON - t) / 20.0;
                    assert!(model.inside(c, p, later));
                }
            }
        }
    }
}

#[test]
fn scenarios_agree_before_the_first_change() {
    let model = table1_model(Point::new(-30.0, 35.0));
    let mut rng = Pcg32::seed_from_u64(11);
    for _ in 0..500 {
        let p = Point::new(unit(&mut rng) * 80.0, unit(&mut rng) * 80.0);
        let t1 = impact_time(p, &model, 0, HORIZON);
        if let Some(t) = t1.filter(|&t| t <= ST) {
            assert_eq!(impact_time(p, &model, 1, HORIZON), Some(t));
        }
    }
}

#[test]
fn documented_impact_times() {
    let model = table1_model(Point::new(0.0, 0.0));
    let t = impact_time(Point::new(14.0, 0.0), &model, 0, HORIZON).unwrap();
    assert!((t - 1.0).abs() < 1e-12);
    assert_eq!(impact_time(Point::new(0.0, 0.0), &model, 0, HORIZON), Some(0.0));
    let t = impact_time(Point::new(0.0, 80.0), &model, 0, HORIZON).unwrap();
    let want = bisection(0, 0.0, 80.0).unwrap();
    assert!((t - want).abs() < 1e-9);
    assert!((t - (4.5 + 8.0 / 17.0)).abs() < 1e-9);
}

#[test]
fn windows_from_impacts() {
    assert_eq!(window_for_impact(3.0, 0.5, 1.0), Some(Window::new(1.5, 2.5)));
    assert_eq!(window_for_impact(0.4, 0.5, 1.0), None);
    let params = WindowParams {
        tw1: 1.0,
        tw2: 1.0,
        service: 0.5,
    };
    // stage-1 impact at 3, scenario-only impact at 10, early impact that cannot be served
    let rows = vec![
        vec![Some(3.0), Some(3.0)],
        vec![Some(10.0), None],
        vec![Some(0.4), Some(0.4)],
    ];
    let d = derive_windows(&rows, 6.5, params);
    assert_eq!(d.stage1[0], Some(Window::new(1.5, 2.5)));
    assert_eq!(d.stage2[0][1], Some(Window::new(8.5, 9.5)));
    assert_eq!(d.stage2[1][1], None);
    assert_eq!(d.dropped.len(), 1);
    assert_eq!(d.dropped[0].asset, 3);
}

#[test]
fn categories_partition() {
    assert_eq!(classify_impacts(&[Some(3.0), Some(3.0)], 4.5), RiskCategory::Stage1);
    assert_eq!(classify_impacts(&[Some(7.5), Some(7.5)], 6.5), RiskCategory::AllScenarios);
    assert_eq!(classify_impacts(&[Some(10.0), None], 6.5), RiskCategory::Scenario(0));
    assert_eq!(classify_impacts(&[None, None], 6.5), RiskCategory::NotAtRisk);
}
