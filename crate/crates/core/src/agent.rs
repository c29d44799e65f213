//! The one-step-ahead curiosity loop.
//!
//! At every iteration the agent enumerates its moves, pushes its belief
//! through the transformation each move induces on the internal world model,
//! scores the result by epistemic value, executes the best move (or idles
//! when nothing beats idling by more than the idle band), observes the
//! object and conditions on the observation.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::belief::{condition, epistemic_value, GaussianBelief, SensorModel};
use crate::error::{Error, Result};
use crate::geometry::{face_object_frame, rho, Frame, GeometryKind, Point, transition_map};
use crate::pushforward::{pushforward, IntegrationConfig};

/// Number of translation directions in the move set.
pub const DIRECTIONS: usize = 8;

pub const DEFAULT_IDLE_BAND: f64 = 1e-4;
pub const DEFAULT_STEP_NORM: f64 = 0.1;
pub const DEFAULT_MIN_DISTANCE: f64 = 0.2;
/// Prior standard deviation in the internal model, equal to the default
/// sensor noise: the prior mean is itself one observation.
pub const DEFAULT_SIGMA0: f64 = 0.1;

const DISTANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    Idle,
    /// Translation at `direction_angle` radians counter-clockwise from the
    /// direction of the object.
    Translate { direction_angle: f64, step_norm: f64 },
}

impl Move {
    pub fn translate(direction_angle: f64, step_norm: f64) -> Result<Self> {
        if !(step_norm > 0.0 && step_norm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step_norm must be positive, got {step_norm}"
            )));
        }
        let direction_angle = direction_angle.rem_euclid(TAU);
        Ok(Self::Translate {
            direction_angle,
            step_norm,
        })
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Self::Idle => None,
            Self::Translate {
                direction_angle, ..
            } => Some(direction_angle),
        }
    }

    pub fn is_idle(&self) -> bool {
        matches!(self, Self::Idle)
    }

    /// Agent position after the move.
    ///
    /// Directions live in the floor plane: the whole plane for `d = 2`, the
    /// first two world axes for `d = 3`.
    pub fn apply_to(&self, position: &Point, object: &Point) -> Result<Point> {
        let Self::Translate {
            direction_angle,
            step_norm,
        } = *self
        else {
            return Ok(position.clone());
        };
        let (dx, dy) = (object[0] - position[0], object[1] - position[1]);
        let norm = dx.hypot(dy);
        if !(norm > 1e-9) {
            return Err(Error::DegenerateDirection);
        }
        let (s, c) = direction_angle.sin_cos();
        let (ux, uy) = (dx / norm, dy / norm);
        let mut out = position.clone();
        out[0] += step_norm * (c * ux - s * uy);
        out[1] += step_norm * (s * ux + c * uy);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentState {
    pub frame: Frame,
    pub belief: GaussianBelief,
    pub step_index: usize,
}

impl AgentState {
    pub fn position(&self) -> &Point {
        self.frame.origin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredMove {
    #[serde(rename = "move")]
    pub mv: Move,
    pub epistemic_value: f64,
    pub pushed_belief: GaussianBelief,
    /// Frame the agent would hold after the move.
    #[serde(skip)]
    pub frame: Frame,
}

/// A candidate move and what became of it during scoring.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Candidate {
    Scored(ScoredMove),
    Excluded {
        #[serde(rename = "move")]
        mv: Move,
        reason: String,
    },
}

impl Candidate {
    pub fn mv(&self) -> Move {
        match self {
            Self::Scored(s) => s.mv,
            Self::Excluded { mv, .. } => *mv,
        }
    }

    /// Epistemic value, `-inf` for excluded moves.
    pub fn value(&self) -> f64 {
        match self {
            Self::Scored(s) => s.epistemic_value,
            Self::Excluded { .. } => f64::NEG_INFINITY,
        }
    }
}

/// Idle followed by the eight translations in ascending angle; angle 0
/// points at the object.
pub fn enumerate_moves(state: &AgentState, object: &Point, step_norm: f64) -> Result<Vec<Move>> {
    let position = state.position();
    if (object - position).norm() <= 1e-9 {
        return Err(Error::DegenerateDirection);
    }
    let mut moves = Vec::with_capacity(DIRECTIONS + 1);
    moves.push(Move::Idle);
    for k in 0..DIRECTIONS {
        moves.push(Move::translate(k as f64 * TAU / DIRECTIONS as f64, step_norm)?);
    }
    Ok(moves)
}

/// Epistemic value of the belief pushed through the move's transformation.
pub fn score_move(
    state: &AgentState,
    mv: Move,
    object: &Point,
    kind: GeometryKind,
    sensor: &SensorModel,
    cfg: &IntegrationConfig,
) -> Result<ScoredMove> {
    let position = mv.apply_to(state.position(), object)?;
    let frame = face_object_frame(&position, object)?;
    let psi = transition_map(&state.frame, &frame, kind);
    let pushed_belief = pushforward(&state.belief, &psi, cfg)?;
    let value = epistemic_value(&pushed_belief, sensor)?;
    Ok(ScoredMove {
        mv,
        epistemic_value: value,
        pushed_belief,
        frame,
    })
}

/// Index into `scored` of the move to execute.
///
/// Idle wins unless some translation beats it by more than `idle_band`;
/// among translations the highest value wins, ties going to the earlier
/// (smaller-angle) entry.
pub fn select_index(scored: &[ScoredMove], idle_band: f64) -> Result<usize> {
    if scored.is_empty() {
        return Err(Error::NoScorableMove);
    }
    let idle = scored.iter().position(|s| s.mv.is_idle());
    let idle_value = idle.map_or(f64::NEG_INFINITY, |i| scored[i].epistemic_value);
    let mut best: Option<usize> = None;
    for (i, s) in scored.iter().enumerate() {
        if s.mv.is_idle() {
            continue;
        }
        if best.is_none_or(|b| s.epistemic_value > scored[b].epistemic_value) {
            best = Some(i);
        }
    }
    match (best, idle) {
        (Some(b), Some(i)) if scored[b].epistemic_value <= idle_value + idle_band => Ok(i),
        (Some(b), _) => Ok(b),
        (None, Some(i)) => Ok(i),
        (None, None) => Err(Error::NoScorableMove),
    }
}

pub fn select_move(scored: &[ScoredMove], idle_band: f64) -> Result<Move> {
    select_index(scored, idle_band).map(|i| scored[i].mv)
}

/// Where the object appears in the internal world model seen from `frame`.
///
/// Euclidean: `φ_R(o)`. Projective: `ρ(φ_R(o))`, or `φ_R(o)` when
/// `raw_frame` is set. Optional noise is isotropic Gaussian in the internal
/// model.
pub fn observe(
    frame: &Frame,
    object: &Point,
    kind: GeometryKind,
    raw_frame: bool,
    noise: Option<(&SensorModel, &mut ChaCha8Rng)>,
) -> Result<Point> {
    let local = frame.frame_map().apply(object);
    let mut y = match kind {
        GeometryKind::Projective { gamma } if !raw_frame => rho(&local, gamma)?,
        _ => local,
    };
    if let Some((sensor, rng)) = noise {
        for v in y.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += sensor.epsilon() * z;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationConfig {
    pub geometry: GeometryKind,
    pub start: Point,
    pub object: Point,
    pub iterations: usize,
    pub step_norm: f64,
    pub sensor: SensorModel,
    pub sigma0: f64,
    pub idle_band: f64,
    pub min_distance: f64,
    /// Scheme and sample sizes; its seed is replaced per iteration by one
    /// derived from `seed`.
    pub integration: IntegrationConfig,
    pub seed: u64,
    pub raw_frame_observation: bool,
    pub observation_noise: bool,
}

impl ExplorationConfig {
    /// Start at the origin, object two units ahead, 20 iterations.
    pub fn planar_default(geometry: GeometryKind) -> Self {
        Self {
            geometry,
            start: Point::from_column_slice(&[0.0, 0.0]),
            object: Point::from_column_slice(&[0.0, 2.0]),
            iterations: 20,
            step_norm: DEFAULT_STEP_NORM,
            sensor: SensorModel::gaussian(0.1).expect("positive epsilon"),
            sigma0: DEFAULT_SIGMA0,
            idle_band: DEFAULT_IDLE_BAND,
            min_distance: DEFAULT_MIN_DISTANCE,
            integration: IntegrationConfig::default(),
            seed: 0,
            raw_frame_observation: false,
            observation_noise: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.start.len();
        if d != 2 && d != 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        if self.object.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.object.len(),
            });
        }
        let positive = [
            ("step_norm", self.step_norm),
            ("sigma0", self.sigma0),
            ("idle_band", self.idle_band),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.min_distance >= 0.0) {
            return Err(Error::InvalidParameter("min_distance must be non-negative".into()));
        }
        if let GeometryKind::Projective { gamma } = self.geometry {
            GeometryKind::projective(gamma)?;
        }
        if (&self.object - &self.start).norm() <= self.min_distance + DISTANCE_SLACK {
            return Err(Error::InvalidParameter(
                "start lies within min_distance of the object".into(),
            ));
        }
        self.integration.validate()
    }

    /// Integration seed used for all candidate moves at `step`, so every
    /// move at a step is scored on the same draws.
    pub fn step_seed(&self, step: usize) -> u64 {
        self.seed
            .wrapping_add((step as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn initial_state(&self) -> Result<AgentState> {
        let frame = face_object_frame(&self.start, &self.object)?;
        let mean = observe(
            &frame,
            &self.object,
            self.geometry,
            self.raw_frame_observation,
            None,
        )?;
        Ok(AgentState {
            frame,
            belief: GaussianBelief::isotropic(mean, self.sigma0)?,
            step_index: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub state: AgentState,
    pub candidates: Vec<Candidate>,
    pub chosen: Move,
    pub observation: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Halt {
    /// All configured iterations ran.
    Completed,
    /// The agent reached the minimum distance to the object.
    MinDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub config: ExplorationConfig,
    pub steps: Vec<StepRecord>,
    pub final_state: AgentState,
    pub halt: Halt,
}

impl Trajectory {
    /// Agent positions before each step, then the final position.
    pub fn positions(&self) -> Vec<Point> {
        self.steps
            .iter()
            .map(|s| s.state.position().clone())
            .chain(std::iter::once(self.final_state.position().clone()))
            .collect()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.positions()
            .iter()
            .map(|p| (&self.config.object - p).norm())
            .collect()
    }
}

/// A run that stopped on an unrecoverable error, with everything recorded
/// up to that point.
#[derive(Debug, Clone, thiserror::Error)]
#[error("exploration aborted at step {}: {error}", partial.steps.len())]
pub struct ExplorationAbort {
    pub partial: Box<Trajectory>,
    pub error: Error,
}

/// Run the exploration loop.
pub fn run_exploration(config: &ExplorationConfig) -> std::result::Result<Trajectory, ExplorationAbort> {
    let mut state = match config.validate().and_then(|_| config.initial_state()) {
        Ok(s) => s,
        Err(error) => {
            // no meaningful state to report; use a placeholder at the start
            let frame = Frame::identity(config.start.len().clamp(2, 3)).expect("2 or 3");
            let d = frame.dim();
            let belief = GaussianBelief::isotropic(Point::zeros(d), 1.0).expect("unit belief");
            let partial = Trajectory {
                config: config.clone(),
                steps: Vec::new(),
                final_state: AgentState {
                    frame,
                    belief,
                    step_index: 0,
                },
                halt: Halt::Completed,
            };
            return Err(ExplorationAbort {
                partial: Box::new(partial),
                error,
            });
        }
    };

    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut steps = Vec::with_capacity(config.iterations);
    let mut halt = Halt::Completed;

    for t in 0..config.iterations {
        let distance = (&config.object - state.position()).norm();
        if distance <= config.min_distance + DISTANCE_SLACK {
            halt = Halt::MinDistance;
            break;
        }
        match step(config, &state, t, &mut noise_rng) {
            Ok((record, next)) => {
                steps.push(record);
                state = next;
            }
            Err(error) => {
                let partial = Trajectory {
                    config: config.clone(),
                    steps,
                    final_state: state,
                    halt,
                };
                return Err(ExplorationAbort {
                    partial: Box::new(partial),
                    error,
                });
            }
        }
    }

    Ok(Trajectory {
        config: config.clone(),
        steps,
        final_state: state,
        halt,
    })
}

/// Score every move from `state` at iteration `t`; moves landing inside the
/// minimum distance or failing to score are excluded.
pub fn score_all(config: &ExplorationConfig, state: &AgentState, t: usize) -> Result<Vec<Candidate>> {
    let cfg = config.integration.with_seed(config.step_seed(t));
    let moves = enumerate_moves(state, &config.object, config.step_norm)?;
    let mut out = Vec::with_capacity(moves.len());
    for mv in moves {
        let position = mv.apply_to(state.position(), &config.object)?;
        let remaining = (&config.object - &position).norm();
        if !mv.is_idle() && remaining < config.min_distance - DISTANCE_SLACK {
            out.push(Candidate::Excluded {
                mv,
                reason: format!("lands {remaining:.4} from the object"),
            });
            continue;
        }
        match score_move(state, mv, &config.object, config.geometry, &config.sensor, &cfg) {
            Ok(s) => out.push(Candidate::Scored(s)),
            Err(e) => out.push(Candidate::Excluded {
                mv,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

fn step(
    config: &ExplorationConfig,
    state: &AgentState,
    t: usize,
    noise_rng: &mut ChaCha8Rng,
) -> Result<(StepRecord, AgentState)> {
    let candidates = score_all(config, state, t)?;
    let scored: Vec<ScoredMove> = candidates
        .iter()
        .filter_map(|c| match c {
            Candidate::Scored(s) => Some(s.clone()),
            Candidate::Excluded { .. } => None,
        })
        .collect();
    let best = &scored[select_index(&scored, config.idle_band)?];
    let noise = config
        .observation_noise
        .then_some((&config.sensor, &mut *noise_rng));
    let observation = observe(
        &best.frame,
        &config.object,
        config.geometry,
        config.raw_frame_observation,
        noise,
    )?;
    let belief = condition(&best.pushed_belief, &config.sensor, &observation)?;
    let next = AgentState {
        frame: best.frame.clone(),
        belief,
        step_index: t + 1,
    };
    let record = StepRecord {
        state: state.clone(),
        chosen: best.mv,
        candidates,
        observation,
    };
    Ok((record, next))
}
