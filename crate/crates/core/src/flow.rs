//! Negative gradient flow between critical points.
//!
//! Trajectories leave a critical point along one unstable coordinate
//! `x_{k, i_k - 1}` and are integrated with RK4 in the current chart, handing
//! off to the best-conditioned chart whenever a coordinate grows large. Time
//! is rescaled by `2 f(source)` so that the step size means the same thing
//! at every critical level.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{incidence_coefficient, SignConvention};
use crate::combinatorics::{enumerate_critical_points, CriticalPoint};
use crate::error::{Error, Result};
use crate::geometry::{
    chart_transition, coordinate_index, critical_value, gradient, morse_value, transition_jacobian, unstable_basis,
    ChartPoint, Spectrum,
};

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    /// Launch offset along the unstable coordinate.
    pub epsilon: f64,
    /// RK4 base step in rescaled time.
    pub step: f64,
    /// Change chart once a coordinate exceeds this magnitude.
    pub handoff: f64,
    /// Converged once every coordinate is below this magnitude.
    pub delta: f64,
    pub max_steps: usize,
    pub sample_every: usize,
    /// Relative tolerance on `f` increasing across one step.
    pub slack: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            epsilon: 1e-4,
            step: 1e-3,
            handoff: 10.0,
            delta: 1e-8,
            max_steps: 1_000_000,
            sample_every: 100,
            slack: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowSample {
    pub time: f64,
    pub point: ChartPoint,
    pub f: f64,
}

/// The state just before and just after a change of chart.
#[derive(Clone, Debug)]
pub struct ChartHandoff {
    pub step: usize,
    pub time: f64,
    pub before: ChartPoint,
    pub after: ChartPoint,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub source: CriticalPoint,
    /// Chart label at convergence; `None` when `max_steps` ran out.
    pub sink: Option<CriticalPoint>,
    pub slot_k: usize,
    pub sign: i8,
    pub samples: Vec<FlowSample>,
    pub transitions: Vec<ChartHandoff>,
    pub steps: usize,
    pub f_start: f64,
    pub f_end: f64,
    /// Largest coordinate magnitude seen outside the dominant coordinate.
    pub confinement_max: f64,
    /// Largest relative increase of `f` over an accepted step (negative when
    /// `f` decreased on every step).
    pub max_relative_increase: f64,
    /// Every accepted step decreased `f` up to the configured slack.
    pub monotone: bool,
}

impl FlowResult {
    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f).collect()
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(x, k)| x + a * k).collect()
}

struct Field<'a> {
    spectrum: &'a Spectrum,
    scale: f64,
}

impl Field<'_> {
    fn eval(&self, chart: &CriticalPoint, x: &[f64]) -> Result<Vec<f64>> {
        let p = ChartPoint::from_vec(chart.clone(), x)
            .map_err(|_| Error::IntegrationFailure("state became non-finite".into()))?;
        let g = gradient(&p, self.spectrum)?;
        // row-major flattening
        Ok(g.transpose().iter().map(|v| -v / self.scale).collect())
    }

    fn rk4(&self, chart: &CriticalPoint, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let k1 = self.eval(chart, x)?;
        let k2 = self.eval(chart, &axpy(x, h / 2.0, &k1))?;
        let k3 = self.eval(chart, &axpy(x, h / 2.0, &k2))?;
        let k4 = self.eval(chart, &axpy(x, h, &k3))?;
        Ok((0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }
}

/// The chart whose minor has the largest absolute determinant; all
/// coordinates there are at most 1 in magnitude.
fn best_chart(p: &ChartPoint) -> Result<CriticalPoint> {
    let x = p.implied_matrix();
    let mut best: Option<(f64, CriticalPoint)> = None;
    for c in enumerate_critical_points(p.n(), p.m())? {
        let cols: Vec<usize> = c.subset().iter().map(|i| i - 1).collect();
        let det = x.select_columns(&cols).determinant().abs();
        if best.as_ref().is_none_or(|(b, _)| det > *b) {
            best = Some((det, c));
        }
    }
    Ok(best.expect("at least one chart").1)
}

fn second_largest_abs(x: &[f64]) -> f64 {
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for v in x.iter().map(|v| v.abs()) {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    second
}

fn check_launch(source: &CriticalPoint, slot_k: usize, sign: i8) -> Result<()> {
    if source.lowered(slot_k).is_none() {
        return Err(Error::InvalidParameters(format!(
            "slot {slot_k} is not a valid lowering of {source}"
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParameters(format!(
            "launch sign must be +1 or -1, got {sign}"
        )));
    }
    Ok(())
}

/// Follows `-grad f` from `source` displaced by `sign * epsilon` along
/// `x_{k, i_k - 1}`.
pub fn integrate_trajectory(
    source: &CriticalPoint,
    slot_k: usize,
    sign: i8,
    s: &Spectrum,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    check_launch(source, slot_k, sign)?;
    let label = source.subset()[slot_k - 1] - 1;
    let idx = coordinate_index(source, slot_k, label).expect("unstable coordinate");
    let mut start = vec![0.0; source.m() * (source.n() - source.m())];
    start[idx] = f64::from(sign) * cfg.epsilon;
    integrate_from(
        source,
        slot_k,
        sign,
        ChartPoint::from_vec(source.clone(), &start)?,
        s,
        cfg,
    )
}

fn integrate_from(
    source: &CriticalPoint,
    slot_k: usize,
    sign: i8,
    start: ChartPoint,
    s: &Spectrum,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    let field = Field {
        spectrum: s,
        scale: 2.0 * critical_value(source, s)?,
    };
    let min_step = cfg.step * 1e-12;

    let mut chart = start.chart().clone();
    let mut x = start.to_vec();
    let mut f = morse_value(&start, s)?;
    let mut time = 0.0;
    let mut h = cfg.step;
    let mut steps = 0;

    let mut res = FlowResult {
        source: source.clone(),
        sink: None,
        slot_k,
        sign,
        samples: vec![FlowSample {
            time,
            point: start.clone(),
            f,
        }],
        transitions: Vec::new(),
        steps: 0,
        f_start: f,
        f_end: f,
        confinement_max: second_largest_abs(&x),
        max_relative_increase: f64::NEG_INFINITY,
        monotone: true,
    };

    loop {
        let max_abs = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if max_abs < cfg.delta {
            res.sink = Some(chart.clone());
            break;
        }
        if steps >= cfg.max_steps {
            break;
        }
        if max_abs > cfg.handoff {
            let before = ChartPoint::from_vec(chart.clone(), &x)?;
            let target = best_chart(&before)?;
            let after = chart_transition(&before, &target)?;
            res.samples.push(FlowSample {
                time,
                point: after.clone(),
                f,
            });
            res.transitions.push(ChartHandoff {
                step: steps,
                time,
                before,
                after: after.clone(),
            });
            chart = target;
            x = after.to_vec();
            continue;
        }

        let (next, f_next) = loop {
            let cand = field.rk4(&chart, &x, h)?;
            if cand.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationFailure(format!(
                    "non-finite state after {steps} steps from {source}"
                )));
            }
            let f_cand = morse_value(&ChartPoint::from_vec(chart.clone(), &cand)?, s)?;
            if f_cand <= f + cfg.slack * f.abs() {
                break (cand, f_cand);
            }
            h /= 2.0;
            if h < min_step {
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow after {steps} steps from {source}"
                )));
            }
        };

        let rel = (f_next - f) / f.abs();
        res.max_relative_increase = res.max_relative_increase.max(rel);
        res.monotone &= f_next <= f + cfg.slack * f.abs();
        res.confinement_max = res.confinement_max.max(second_largest_abs(&next));
        x = next;
        f = f_next;
        time += h;
        steps += 1;
        h = (2.0 * h).min(cfg.step);
        if steps % cfg.sample_every == 0 {
            res.samples.push(FlowSample {
                time,
                point: ChartPoint::from_vec(chart.clone(), &x)?,
                f,
            });
        }
    }

    let last = ChartPoint::from_vec(chart, &x)?;
    if res.samples.last().is_none_or(|s| s.time < time) {
        res.samples.push(FlowSample { time, point: last, f });
    }
    res.steps = steps;
    res.f_end = f;
    Ok(res)
}

/// How the source orientation induces one on the complement of the launch
/// vector inside the unstable space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplementRule {
    /// Delete the launch vector from the ordered basis without reordering and
    /// multiply the result by the launch sign.
    LaunchSignDeleted,
    /// Orient the complement so that (complement, launch vector) agrees with
    /// the source orientation.
    LaunchLast,
}

/// Orientation sign of a converged single-slot trajectory under the default
/// complement rule.
pub fn trajectory_sign(fr: &FlowResult) -> Result<i8> {
    trajectory_sign_with(fr, ComplementRule::LaunchSignDeleted)
}

/// Transports the oriented complement of the launch direction through the
/// chart changes recorded along `fr` and compares it with the sink's
/// reference orientation.
pub fn trajectory_sign_with(fr: &FlowResult, rule: ComplementRule) -> Result<i8> {
    let expected = fr.source.lowered(fr.slot_k);
    let sink = match (&fr.sink, &expected) {
        (Some(sink), Some(exp)) if sink == exp => sink,
        _ => {
            return Err(Error::InvalidParameters(format!(
                "trajectory from {} along slot {} did not converge to the adjacent point",
                fr.source, fr.slot_k
            )))
        }
    };
    if fr.transitions.is_empty() {
        return Err(Error::InvalidParameters(
            "trajectory never left the source chart".into(),
        ));
    }

    let launch = (fr.slot_k, fr.source.subset()[fr.slot_k - 1] - 1);
    let basis = unstable_basis(&fr.source);
    let pos = basis.iter().position(|d| *d == launch).expect("launch is unstable");
    let from: Vec<usize> = basis
        .iter()
        .filter(|d| **d != launch)
        .map(|&(a, l)| coordinate_index(&fr.source, a, l).expect("source coordinate"))
        .collect();
    let to: Vec<usize> = unstable_basis(sink)
        .iter()
        .map(|&(a, l)| coordinate_index(sink, a, l).expect("sink coordinate"))
        .collect();

    let mut jac = transition_jacobian(&fr.transitions[0].before, fr.transitions[0].after.chart())?;
    for t in &fr.transitions[1..] {
        jac = transition_jacobian(&t.before, t.after.chart())? * jac;
    }
    let det = jac.select_rows(&to).select_columns(&from).determinant();
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::IntegrationFailure(format!(
            "degenerate orientation transport from {} to {sink}",
            fr.source
        )));
    }

    let mut sign = if det > 0.0 { 1 } else { -1 };
    sign *= fr.sign;
    if rule == ComplementRule::LaunchLast && (basis.len() - 1 - pos) % 2 == 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// Number of launched trajectories from `source` that end at `target`.
pub fn count_trajectories(
    source: &CriticalPoint,
    target: &CriticalPoint,
    s: &Spectrum,
    cfg: &FlowConfig,
) -> Result<usize> {
    if source.n() != target.n() || source.m() != target.m() {
        return Err(Error::InvalidParameters(format!(
            "{source} and {target} live in different Grassmannians"
        )));
    }
    if source.morse_index() != target.morse_index() + 1 {
        return Err(Error::InvalidParameters(format!(
            "index gap between {source} and {target} is not 1"
        )));
    }
    let launches: Vec<(usize, i8)> = (1..=source.m())
        .filter(|&k| source.lowered(k).is_some())
        .flat_map(|k| [(k, 1), (k, -1)])
        .collect();
    let results = launches
        .par_iter()
        .map(|&(k, sign)| integrate_trajectory(source, k, sign, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(results.iter().filter(|r| r.sink.as_ref() == Some(target)).count())
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRecord {
    pub source: CriticalPoint,
    pub sink: Option<CriticalPoint>,
    pub slot: usize,
    pub sign: i8,
    pub steps: usize,
    pub transitions: usize,
    pub f_start: f64,
    pub f_end: f64,
    pub confinement_max: f64,
    pub monotone: bool,
    /// Orientation sign with the launch-sign/deleted-basis complement.
    pub orientation: Option<i8>,
    /// Orientation sign with the launch-vector-last complement.
    pub orientation_launch_last: Option<i8>,
}

/// Everything measured for one index-adjacent pair.
#[derive(Clone, Debug, Serialize)]
pub struct PairSummary {
    pub source: CriticalPoint,
    pub target: CriticalPoint,
    /// The lowering slot, if `target` is a one-slot lowering of `source`.
    pub slot: Option<usize>,
    pub count: usize,
    /// 2 for a one-slot lowering, 0 otherwise.
    pub predicted_count: usize,
    pub sign_plus: Option<i8>,
    pub sign_minus: Option<i8>,
    /// `(1, (-1)^(i_k - k))`.
    pub predicted_signs: Option<(i8, i8)>,
    pub signed_sum: Option<i64>,
    pub signed_sum_launch_last: Option<i64>,
    pub paper_coefficient: Option<i64>,
    pub oriented_coefficient: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub n: usize,
    pub m: usize,
    pub lambdas: Vec<f64>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub pairs: Vec<PairSummary>,
}

/// Launches both signs along every lowering slot of every critical point of
/// `G_{n,m}` and tabulates counts and signs for all index-adjacent pairs.
pub fn flow_report(n: usize, m: usize, s: &Spectrum, cfg: &FlowConfig) -> Result<FlowReport> {
    let points = enumerate_critical_points(n, m)?;
    let launches: Vec<(CriticalPoint, usize, i8)> = points
        .iter()
        .flat_map(|p| {
            (1..=m)
                .filter(move |&k| p.lowered(k).is_some())
                .flat_map(move |k| [(p.clone(), k, 1), (p.clone(), k, -1)])
        })
        .collect();

    let results = launches
        .par_iter()
        .map(|(p, k, sign)| integrate_trajectory(p, *k, *sign, s, cfg))
        .collect::<Result<Vec<_>>>()?;

    let trajectories: Vec<TrajectoryRecord> = results
        .iter()
        .map(|r| TrajectoryRecord {
            source: r.source.clone(),
            sink: r.sink.clone(),
            slot: r.slot_k,
            sign: r.sign,
            steps: r.steps,
            transitions: r.transition_count(),
            f_start: r.f_start,
            f_end: r.f_end,
            confinement_max: r.confinement_max,
            monotone: r.monotone,
            orientation: trajectory_sign_with(r, ComplementRule::LaunchSignDeleted).ok(),
            orientation_launch_last: trajectory_sign_with(r, ComplementRule::LaunchLast).ok(),
        })
        .collect();

    let mut pairs = Vec::new();
    for p in &points {
        for q in points.iter().filter(|q| q.morse_index() + 1 == p.morse_index()) {
            let from_p = || trajectories.iter().filter(move |t| &t.source == p);
            let count = from_p().filter(|t| t.sink.as_ref() == Some(q)).count();
            let slot = (1..=m).find(|&k| p.lowered(k).as_ref() == Some(q));
            let pick = |sign: i8, f: fn(&TrajectoryRecord) -> Option<i8>| {
                slot.and_then(|k| {
                    from_p()
                        .find(|t| t.slot == k && t.sign == sign && t.sink.as_ref() == Some(q))
                        .and_then(f)
                })
            };
            let plus = pick(1, |t| t.orientation);
            let minus = pick(-1, |t| t.orientation);
            let plus_last = pick(1, |t| t.orientation_launch_last);
            let minus_last = pick(-1, |t| t.orientation_launch_last);
            let sum = |a: Option<i8>, b: Option<i8>| a.zip(b).map(|(a, b)| i64::from(a) + i64::from(b));
            let coefficient = |conv| slot.map(|k| incidence_coefficient(conv, p, k)).transpose();
            pairs.push(PairSummary {
                source: p.clone(),
                target: q.clone(),
                slot,
                count,
                predicted_count: if slot.is_some() { 2 } else { 0 },
                sign_plus: plus,
                sign_minus: minus,
                predicted_signs: slot.map(|k| {
                    let e = p.subset()[k - 1] - k;
                    (1, if e % 2 == 0 { 1 } else { -1 })
                }),
                signed_sum: sum(plus, minus),
                signed_sum_launch_last: sum(plus_last, minus_last),
                paper_coefficient: coefficient(SignConvention::PaperLemma11)?,
                oriented_coefficient: coefficient(SignConvention::FlowOriented)?,
            });
        }
    }

    Ok(FlowReport {
        n,
        m,
        lambdas: s.lambdas().to_vec(),
        trajectories,
        pairs,
    })
}
