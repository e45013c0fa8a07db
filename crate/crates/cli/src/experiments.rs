//! Experiment dispatch: each experiment turns a validated config into a
//! result table without touching the filesystem.

use std::collections::BTreeMap;

use ris_ho_core::field_model::{beam_heatmap, RisPanel, SampleGrid};
use ris_ho_core::ho_engine::{decide_handover, LinkMeasurement, ServingState};
use ris_ho_core::link_metrics::{average_ber, ergodic_capacity, mc_metrics, outage_probability, MetricResult};
use ris_ho_core::rng::derive_seed;
use ris_ho_core::scenario_sim::{ho_probability_sweep, trigger_distance_sweep, HoSweepConfig, TriggerSweepConfig};

use crate::config::{Experiment, ExperimentConfig, LinkMethod};
use crate::table::{col, Cell, ResultTable};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    /// Scalar summaries copied into the manifest.
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    fn new(table: ResultTable) -> Self {
        Self {
            table,
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

trait Context<T> {
    fn op(self, operation: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for ris_ho_core::Result<T> {
    fn op(self, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { operation, source })
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let out = match cfg.experiment {
        Experiment::MetricsVsN => metrics_vs_n(cfg)?,
        Experiment::Heatmap => heatmap(cfg)?,
        Experiment::TriggerDistance => trigger_distance(cfg)?,
        Experiment::HoProbability => ho_probability(cfg)?,
        Experiment::Decide => decide(cfg)?,
    };
    if let Some((row, column)) = out.table.non_finite() {
        return Err(CliError::NonFinite { row, column });
    }
    Ok(out)
}

fn metric_row(metric: &str, n: usize, r: &MetricResult) -> Vec<Cell> {
    vec![
        Cell::Text(metric.into()),
        Cell::Int(n as u64),
        Cell::Text(r.method.as_str().into()),
        Cell::Float(r.value),
        Cell::Float(r.abs_error_est),
        Cell::Int(r.n_samples as u64),
    ]
}

/// Average BER, outage probability and ergodic capacity for each element
/// count. Monte Carlo rows use the seed `derive_seed(seed, [N])`.
pub fn metrics_vs_n(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let link = &cfg.link;
    let mut t = ResultTable::new(vec![
        col("metric", ""),
        col("n_elements", ""),
        col("method", ""),
        col("value", "ber: probability, outage: probability, capacity: bit/s/Hz"),
        col("abs_error_est", "same as value"),
        col("n_samples", ""),
    ]);
    let mut per_metric: [Vec<Vec<Cell>>; 3] = Default::default();
    for &n in &link.n_values {
        let model = link.model(n).op("cascade_stats::cascade_moments")?;
        if link.method != LinkMethod::MonteCarlo {
            per_metric[0].push(metric_row("ber", n, &average_ber(&model).op("link_metrics::average_ber")?));
            per_metric[1].push(metric_row(
                "outage",
                n,
                &outage_probability(&model, link.outage).op("link_metrics::outage_probability")?,
            ));
            per_metric[2].push(metric_row(
                "capacity",
                n,
                &ergodic_capacity(&model).op("link_metrics::ergodic_capacity")?,
            ));
        }
        if link.method != LinkMethod::Quadrature {
            let mc = mc_metrics(derive_seed(cfg.seed, &[n as u64]), &model, link.mc_samples, link.outage)
                .op("link_metrics::mc_metrics")?;
            per_metric[0].push(metric_row("ber", n, &mc.ber));
            per_metric[1].push(metric_row("outage", n, &mc.outage));
            per_metric[2].push(metric_row("capacity", n, &mc.capacity));
        }
    }
    for rows in per_metric {
        for row in rows {
            t.push(row);
        }
    }
    Ok(ExperimentOutput::new(t))
}

/// Received power of the focused panel over an `x`–`z` grid.
pub fn heatmap(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let h = &cfg.heatmap;
    let mut panel = RisPanel::square(h.n_elements, h.aperture_m).op("field_model::RisPanel::square")?;
    panel.focus_on(h.focus_m, &h.source, &h.carrier).op("field_model::RisPanel::focus_on")?;
    let grid = SampleGrid::uniform(h.x_range_m, h.nx, h.z_range_m, h.nz);
    let map = beam_heatmap(&panel, &h.source, &grid, &h.carrier).op("field_model::beam_heatmap")?;
    let db = map.power_db();
    let mut t = ResultTable::new(vec![
        col("x_m", "m"),
        col("z_m", "m"),
        col("power", "relative |E|^2"),
        col("power_db", "dB re peak"),
    ]);
    for (iz, &z) in map.zs.iter().enumerate() {
        for (ix, &x) in map.xs.iter().enumerate() {
            let k = iz * map.xs.len() + ix;
            t.push(vec![Cell::Float(x), Cell::Float(z), Cell::Float(map.power[k]), Cell::Float(db[k])]);
        }
    }
    let mut out = ExperimentOutput::new(t);
    out.summary.insert("peak_x_m".into(), map.xs[map.peak.0]);
    out.summary.insert("peak_z_m".into(), map.zs[map.peak.1]);
    out.summary.insert("width_3db_x_m".into(), map.width_3db_x.value_m);
    out.summary.insert("depth_3db_z_m".into(), map.depth_3db_z.value_m);
    if map.width_3db_x.truncated || map.depth_3db_z.truncated {
        out.notes.push("a 3 dB extent reaches the grid edge and is a lower bound".into());
    }
    Ok(out)
}

/// Mean trigger distance per `(D, t_h, N)` cell, with and without the RIS.
pub fn trigger_distance(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let sweep = TriggerSweepConfig {
        geometry: cfg.scenario,
        serving_distances_m: cfg.trigger.serving_distances_m.clone(),
        n_values: cfg.trigger.n_values.clone(),
        t_h_db: cfg.trigger.t_h_db.clone(),
        realizations: cfg.trigger.realizations,
        seed: cfg.seed,
    };
    let rows = trigger_distance_sweep(&sweep).op("scenario_sim::trigger_distance_sweep")?;
    let mut t = ResultTable::new(vec![
        col("serving_distance_m", "m"),
        col("t_h_db", "dB"),
        col("n_elements", ""),
        col("ris_enabled", ""),
        col("mean_distance_m", "m"),
        col("std_error_m", "m"),
        col("untriggered", "realizations"),
    ]);
    for r in rows {
        t.push(vec![
            Cell::Float(r.serving_distance_m),
            Cell::Float(r.t_h_db),
            Cell::Int(r.n_elements as u64),
            Cell::Bool(r.ris_enabled),
            Cell::Float(r.mean_distance_m),
            Cell::Float(r.std_error_m),
            Cell::Int(r.untriggered as u64),
        ]);
    }
    let mut out = ExperimentOutput::new(t);
    let g = &cfg.scenario;
    out.notes.push(format!(
        "trajectory: straight line at height {} m from below the serving BS (x = 0) to below the target BS (x = {} m)",
        g.ue_height_m, g.inter_site_m
    ));
    out.notes.push(format!(
        "RIS at (D, {}, {}) m focused on the route point x = {} m",
        g.ris_offset_m, g.ris_height_m, g.focus_along_m
    ));
    Ok(out)
}

/// Hard or soft handover probability against the threshold grid.
pub fn ho_probability(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let h = &cfg.ho;
    let sweep = HoSweepConfig {
        links: h.links,
        kind: h.kind,
        n_values: h.n_values.clone(),
        thresholds: h.thresholds.clone(),
        fixed_t_hh: h.fixed_t_hh,
        realizations: h.realizations,
        seed: cfg.seed,
    };
    let rows = ho_probability_sweep(&sweep).op("scenario_sim::ho_probability_sweep")?;
    let mut t = ResultTable::new(vec![
        col("kind", ""),
        col("n_elements", ""),
        col("threshold", "BER"),
        col("probability", ""),
        col("p_serving_event", ""),
        col("p_candidate_event", ""),
    ]);
    for r in rows {
        t.push(vec![
            Cell::Text(h.kind.as_str().into()),
            Cell::Int(r.n_elements as u64),
            Cell::Float(r.threshold),
            Cell::Float(r.probability),
            Cell::Float(r.p_serving_event),
            Cell::Float(r.p_candidate_event),
        ]);
    }
    Ok(ExperimentOutput::new(t))
}

/// One handover decision for the configured measurements.
pub fn decide(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    let d = &cfg.decide;
    let state = ServingState {
        serving_link: LinkMeasurement::direct(0, d.serving_ber).op("ho_engine::LinkMeasurement")?,
        active_connections: d.active_connections,
    };
    let direct = d
        .direct
        .iter()
        .map(|&(id, b)| LinkMeasurement::direct(id, b))
        .collect::<ris_ho_core::Result<Vec<_>>>()
        .op("ho_engine::LinkMeasurement")?;
    let non_direct = d
        .non_direct
        .iter()
        .map(|&(id, b)| LinkMeasurement::non_direct(id, b))
        .collect::<ris_ho_core::Result<Vec<_>>>()
        .op("ho_engine::LinkMeasurement")?;
    let decision = decide_handover(&state, &direct, &non_direct, &cfg.thresholds).op("ho_engine::decide_handover")?;
    let mut t = ResultTable::new(vec![col("mode", ""), col("chosen_link", "")]);
    t.push(vec![
        Cell::Text(decision.mode.as_str().into()),
        Cell::Text(decision.chosen_link.map(|l| l.to_string()).unwrap_or_default()),
    ]);
    Ok(ExperimentOutput::new(t))
}
