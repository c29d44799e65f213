use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::agent::{
    run_exploration, score_all, Candidate, ExplorationAbort, Move, Trajectory, DIRECTIONS,
};
use crate::geometry::{GeometryKind, Point};

use super::output::{csv_text, fmt_f64, write_file};
use super::svg::{Marker, Plot, Series, PALETTE};
use super::{ExperimentConfig, ExperimentError};

/// Trajectories of one simulation-1 run, in the order of `config.kinds()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sim1Result {
    pub trajectories: Vec<Trajectory>,
}

fn trajectory_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["step", "x", "y", "z"][..=dim].iter().map(|s| s.to_string()).collect();
    h.push("chosen_move_angle_or_idle".into());
    h.push("value_idle".into());
    h.extend((0..DIRECTIONS).map(|k| format!("value_{k}")));
    h
}

fn move_label(mv: Move) -> String {
    match mv.angle() {
        None => "idle".into(),
        Some(a) => fmt_f64(a),
    }
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    let coords = |p: &Point| p.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>();
    let mut rows = Vec::with_capacity(traj.steps.len() + 1);
    for (t, step) in traj.steps.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(coords(step.state.position()));
        row.push(move_label(step.chosen));
        row.extend(step.candidates.iter().map(|c| fmt_f64(c.value())));
        rows.push(row);
    }
    let mut last = vec![traj.steps.len().to_string()];
    last.extend(coords(traj.final_state.position()));
    last.extend(std::iter::repeat_n(String::new(), DIRECTIONS + 2));
    rows.push(last);
    rows
}

fn trajectory_plot(config: &ExperimentConfig, trajectories: &[&Trajectory]) -> Plot {
    let series = trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| Series {
            label: t.config.geometry.name().to_string(),
            color: PALETTE[i % PALETTE.len()],
            points: t.positions().iter().map(|p| (p[0], p[1])).collect(),
            errors: None,
            line: true,
        })
        .collect();
    Plot {
        title: "Agent trajectories".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        series,
        markers: vec![
            Marker {
                label: "object".into(),
                at: (config.object[0], config.object[1]),
                color: "black",
            },
            Marker {
                label: "start".into(),
                at: (config.start[0], config.start[1]),
                color: "#7f7f7f",
            },
        ],
        equal_aspect: true,
    }
}

/// Approach experiment: one run per configured geometry, identical seeds.
///
/// Writes `trajectory_<kind>.csv` per geometry and `trajectories.svg`.
/// Runs that abort are written up to the failing step before the error is
/// returned.
pub fn run_sim1(config: &ExperimentConfig) -> Result<Sim1Result, ExperimentError> {
    config.validate()?;
    let snapshot = config.snapshot();
    let header = trajectory_header(config.dim);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut trajectories = Vec::new();
    let mut first_error = None;
    for kind in config.kinds() {
        let (traj, err) = match run_exploration(&config.exploration(kind)) {
            Ok(t) => (t, None),
            Err(ExplorationAbort { partial, error }) => {
                let abort = ExplorationAbort {
                    partial: partial.clone(),
                    error,
                };
                (*partial, Some(abort))
            }
        };
        let text = csv_text(&snapshot, &header, &trajectory_rows(&traj))?;
        write_file(&config.output_dir, &format!("trajectory_{}.csv", kind.name()), &text)?;
        trajectories.push(traj);
        if first_error.is_none() {
            first_error = err;
        }
    }

    let refs: Vec<&Trajectory> = trajectories.iter().collect();
    let svg = trajectory_plot(config, &refs).render(&snapshot);
    write_file(&config.output_dir, "trajectories.svg", &svg)?;

    match first_error {
        Some(abort) => Err(ExperimentError::Aborted(Box::new(abort))),
        None => Ok(Sim1Result { trajectories }),
    }
}

/// Scores of the first move set for one object position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub object: Point,
    /// Idle followed by directions `0..8`; `-inf` marks an excluded move.
    pub values: Vec<f64>,
}

/// Mean epistemic value of one direction bin over object positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinStat {
    /// `None` for the idle move.
    pub direction: Option<usize>,
    /// Angle relative to the object direction, in `(-π, π]`.
    pub angle: Option<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// Object positions contributing a finite value.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub geometry: GeometryKind,
    pub points: Vec<GridPoint>,
    pub idle: BinStat,
    /// Directions `0..8`.
    pub bins: Vec<BinStat>,
    pub excluded_cells: usize,
}

impl GridResult {
    /// Signed angle of direction bin `k`, in `(-π, π]`.
    pub fn bin_angle(k: usize) -> f64 {
        let a = k as f64 * TAU / DIRECTIONS as f64;
        if a > PI { a - TAU } else { a }
    }

    pub fn max_mean(&self) -> f64 {
        self.bins.iter().map(|b| b.mean).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_mean(&self) -> f64 {
        self.bins.iter().map(|b| b.mean).fold(f64::INFINITY, f64::min)
    }
}

fn bin_stat(direction: Option<usize>, values: impl Iterator<Item = f64>) -> BinStat {
    let xs: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    let n = xs.len();
    let mean = if n == 0 { f64::NAN } else { xs.iter().sum::<f64>() / n as f64 };
    let std_error = if n < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    BinStat {
        direction,
        angle: direction.map(GridResult::bin_angle),
        mean,
        std_error,
        count: n,
    }
}

/// Object positions at grid cell centres around the start, minus the
/// excluded ones, and the number excluded.
fn grid_objects(config: &ExperimentConfig) -> (Vec<Point>, usize) {
    let g = &config.grid;
    let width = 2.0 * g.extent / g.cells as f64;
    let mut objects = Vec::new();
    let mut excluded = 0;
    for j in 0..g.cells {
        for i in 0..g.cells {
            let mut object = Point::from_column_slice(&config.start);
            object[0] += -g.extent + (i as f64 + 0.5) * width;
            object[1] += -g.extent + (j as f64 + 0.5) * width;
            let offset = &object - Point::from_column_slice(&config.start);
            if offset.norm() < g.exclusion_radius {
                excluded += 1;
            } else {
                objects.push(object);
            }
        }
    }
    (objects, excluded)
}

fn score_grid(config: &ExperimentConfig, kind: GeometryKind) -> Result<GridResult, ExperimentError> {
    let (objects, excluded_cells) = grid_objects(config);
    let mut points = Vec::with_capacity(objects.len());
    for (idx, object) in objects.into_iter().enumerate() {
        let mut cfg = config.exploration(kind);
        cfg.object = object.clone();
        cfg.seed = config.seed.wrapping_add(idx as u64);
        let state = cfg.initial_state()?;
        let values = score_all(&cfg, &state, 0)?
            .iter()
            .map(Candidate::value)
            .collect();
        points.push(GridPoint { object, values });
    }
    let idle = bin_stat(None, points.iter().map(|p| p.values[0]));
    let bins = (0..DIRECTIONS)
        .map(|k| bin_stat(Some(k), points.iter().map(|p| p.values[k + 1])))
        .collect();
    Ok(GridResult {
        geometry: kind,
        points,
        idle,
        bins,
        excluded_cells,
    })
}

fn grid_rows(result: &GridResult) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for p in &result.points {
        for (k, v) in p.values.iter().enumerate() {
            let bin = if k == 0 { "idle".to_string() } else { (k - 1).to_string() };
            rows.push(vec![fmt_f64(p.object[0]), fmt_f64(p.object[1]), bin, fmt_f64(*v)]);
        }
    }
    rows
}

fn profile_plot(results: &[GridResult]) -> Plot {
    let series = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut bins: Vec<&BinStat> = r.bins.iter().collect();
            bins.sort_by(|a, b| a.angle.unwrap().total_cmp(&b.angle.unwrap()));
            Series {
                label: r.geometry.name().to_string(),
                color: PALETTE[i % PALETTE.len()],
                points: bins.iter().map(|b| (b.angle.unwrap(), b.mean)).collect(),
                errors: Some(bins.iter().map(|b| b.std_error).collect()),
                line: true,
            }
        })
        .collect();
    Plot {
        title: "Epistemic value by direction".into(),
        x_label: "direction relative to object (rad)".into(),
        y_label: "mean epistemic value".into(),
        series,
        markers: Vec::new(),
        equal_aspect: false,
    }
}

/// Direction-profile experiment over a grid of object positions.
///
/// Writes `grid_<kind>.csv` per geometry and `epistemic_by_direction.svg`.
pub fn run_sim2(config: &ExperimentConfig) -> Result<Vec<GridResult>, ExperimentError> {
    config.validate()?;
    let snapshot = config.snapshot();
    let mut results = Vec::new();
    for kind in config.kinds() {
        let result = score_grid(config, kind)?;
        let text = csv_text(
            &snapshot,
            &["obj_x", "obj_y", "direction_bin", "value"],
            &grid_rows(&result),
        )?;
        write_file(&config.output_dir, &format!("grid_{}.csv", kind.name()), &text)?;
        results.push(result);
    }
    let svg = profile_plot(&results).render(&snapshot);
    write_file(&config.output_dir, "epistemic_by_direction.svg", &svg)?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_excludes_centre_cells() {
        let cfg = ExperimentConfig::default();
        let (objects, excluded) = grid_objects(&cfg);
        // cells with centres at (±0.25, ±0.25), (±0.75, ±0.25), (±0.25, ±0.75)
        assert_eq!(excluded, 12);
        assert_eq!(objects.len() + excluded, 400);
    }

    #[test]
    fn bin_angles_are_signed() {
        assert_eq!(GridResult::bin_angle(0), 0.0);
        assert!((GridResult::bin_angle(7) + PI / 4.0).abs() < 1e-15);
        assert!((GridResult::bin_angle(4) - PI).abs() < 1e-15);
    }

    #[test]
    fn bin_stat_skips_excluded() {
        let b = bin_stat(Some(0), [1.0, 3.0, f64::NEG_INFINITY].into_iter());
        assert_eq!(b.count, 2);
        assert_eq!(b.mean, 2.0);
        assert!((b.std_error - 1.0).abs() < 1e-12);
    }
}
