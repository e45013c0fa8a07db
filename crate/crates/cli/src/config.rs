//! Experiment configuration: a TOML document whose keys live in dotted
//! namespaces (`link.hop1_mean`, `thresholds.t_hh`, ...).
//!
//! Every key has a type and, except for `experiment` and `seed`, a default.
//! Validation reports every problem it finds in one pass and, on success,
//! returns a normalized config whose echo lists all keys with their
//! effective values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use ris_ho_core::cascade_stats::{cascade_moments, HopGainStats, SnrModel};
use ris_ho_core::field_model::{CarrierConfig, RisPanel, SourceGeometry};
use ris_ho_core::ho_engine::{HoThresholds, LinkId};
use ris_ho_core::link_metrics::OutageThreshold;
use ris_ho_core::scenario_sim::{HoKind, HoLinkStats, TwoCellGeometry};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MetricsVsN,
    Heatmap,
    TriggerDistance,
    HoProbability,
    Decide,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::MetricsVsN,
        Experiment::Heatmap,
        Experiment::TriggerDistance,
        Experiment::HoProbability,
        Experiment::Decide,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::MetricsVsN => "metrics_vs_n",
            Experiment::Heatmap => "heatmap",
            Experiment::TriggerDistance => "trigger_distance",
            Experiment::HoProbability => "ho_probability",
            Experiment::Decide => "decide",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    UInt,
    Bool,
    Choice(&'static [&'static str]),
    Text,
    FloatList,
    UIntList,
    Pair,
    Point,
    Links,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Float => "float".into(),
            Kind::UInt => "unsigned integer".into(),
            Kind::Bool => "boolean".into(),
            Kind::Choice(c) => format!("one of {}", c.join(" | ")),
            Kind::Text => "string".into(),
            Kind::FloatList => "array of floats".into(),
            Kind::UIntList => "array of unsigned integers".into(),
            Kind::Pair => "[lo, hi]".into(),
            Kind::Point => "[x, y, z]".into(),
            Kind::Links => "array of { id, ber } tables".into(),
        }
    }
}

struct Key {
    path: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    doc: &'static str,
}

const fn key(path: &'static str, kind: Kind, default: &'static str, doc: &'static str) -> Key {
    Key {
        path,
        kind,
        default: Some(default),
        doc,
    }
}

const EXPERIMENTS: &[&str] = &["metrics_vs_n", "heatmap", "trigger_distance", "ho_probability", "decide"];

static SCHEMA: &[Key] = &[
    Key {
        path: "experiment",
        kind: Kind::Choice(EXPERIMENTS),
        default: None,
        doc: "experiment to run",
    },
    Key {
        path: "seed",
        kind: Kind::UInt,
        default: None,
        doc: "master seed; --seed and RIS_HO_SEED override it",
    },
    key("output_dir", Kind::Text, "\"out\"", "artifact directory; --out overrides it"),
    key("plots", Kind::Bool, "true", "write SVG plots next to the CSV"),
    key("link.hop1_mean", Kind::Float, "1.0", "BS-RIS per-element gain mean"),
    key("link.hop1_var", Kind::Float, "0.5", "BS-RIS per-element gain variance"),
    key("link.hop2_mean", Kind::Float, "1.0", "RIS-UE per-element gain mean"),
    key("link.hop2_var", Kind::Float, "0.5", "RIS-UE per-element gain variance"),
    key("link.avg_snr_db", Kind::Float, "-30.0", "transmit SNR P_t/noise in dB"),
    key("link.outage_threshold_db", Kind::Float, "0.0", "outage SNR threshold in dB"),
    key("link.n_values", Kind::UIntList, "[32, 64, 128]", "element counts"),
    key(
        "link.method",
        Kind::Choice(&["quadrature", "monte_carlo", "both"]),
        "\"quadrature\"",
        "evaluation method",
    ),
    key("link.mc_samples", Kind::UInt, "1000000", "Monte Carlo samples per element count"),
    key("heatmap.carrier_hz", Kind::Float, "28e9", "carrier frequency"),
    key("heatmap.n_elements", Kind::UInt, "64", "element count (perfect square)"),
    key("heatmap.aperture_m", Kind::Float, "0.05", "element aperture diameter"),
    key("heatmap.bs_distance_m", Kind::Float, "100.0", "BS-RIS distance"),
    key("heatmap.incidence_deg", Kind::Float, "30.0", "incidence angle"),
    key("heatmap.focus_m", Kind::Point, "[0.0, 0.0, 3.0]", "focal point in RIS coordinates"),
    key("heatmap.x_range_m", Kind::Pair, "[-1.5, 1.5]", "lateral extent of the grid"),
    key("heatmap.nx", Kind::UInt, "61", "lateral grid points"),
    key("heatmap.z_range_m", Kind::Pair, "[0.5, 8.0]", "depth extent of the grid"),
    key("heatmap.nz", Kind::UInt, "76", "depth grid points"),
    key("scenario.inter_site_m", Kind::Float, "400.0", "serving-target BS distance"),
    key("scenario.bs_height_m", Kind::Float, "25.0", "BS antenna height"),
    key("scenario.ue_height_m", Kind::Float, "1.5", "UE height"),
    key("scenario.ris_height_m", Kind::Float, "10.0", "RIS height"),
    key("scenario.ris_offset_m", Kind::Float, "20.0", "lateral RIS offset from the route"),
    key("scenario.focus_along_m", Kind::Float, "200.0", "route position the RIS focuses on"),
    key("scenario.element_aperture_m", Kind::Float, "0.2", "RIS element aperture"),
    key("scenario.bs_aperture_m", Kind::Float, "2.0", "BS antenna aperture"),
    key("scenario.tx_power_dbm", Kind::Float, "30.0", "transmit power"),
    key("scenario.noise_power_dbm", Kind::Float, "-94.0", "noise power"),
    key("scenario.kappa", Kind::Float, "0.1", "hop variance over squared hop mean"),
    key("scenario.carrier_hz", Kind::Float, "28e9", "carrier frequency"),
    key("scenario.speed_mps", Kind::Float, "1.0", "UE speed"),
    key("scenario.sample_interval_s", Kind::Float, "0.1", "measurement interval"),
    key("trigger.serving_distances_m", Kind::FloatList, "[60.0, 150.0]", "serving BS-RIS distances D"),
    key("trigger.n_values", Kind::UIntList, "[32, 64, 100, 128, 256]", "element counts"),
    key("trigger.t_h_db", Kind::FloatList, "[-2.0, 2.0]", "handover margins"),
    key("trigger.realizations", Kind::UInt, "200", "fading realizations per cell"),
    key("ho.kind", Kind::Choice(&["hard", "soft"]), "\"hard\"", "swept handover type"),
    key("ho.n_values", Kind::UIntList, "[32, 64, 128]", "candidate element counts"),
    key("ho.threshold_range", Kind::Pair, "[1e-7, 1e-2]", "T_hh (hard) or T_hs (soft) range"),
    key("ho.threshold_points", Kind::UInt, "26", "log-spaced thresholds"),
    key("ho.fixed_t_hh", Kind::Float, "0.05", "T_hh held fixed in the soft sweep"),
    key("ho.realizations", Kind::UInt, "20000", "paired BER realizations"),
    key("ho.serving_mean", Kind::Float, "1.0", "serving link gain mean"),
    key("ho.serving_var", Kind::Float, "0.5", "serving link gain variance"),
    key("ho.serving_avg_snr_db", Kind::Float, "13.0", "serving link average SNR in dB"),
    key("ho.candidate_hop1_mean", Kind::Float, "0.3", "candidate BS-RIS gain mean"),
    key("ho.candidate_hop1_var", Kind::Float, "0.05", "candidate BS-RIS gain variance"),
    key("ho.candidate_hop2_mean", Kind::Float, "0.3", "candidate RIS-UE gain mean"),
    key("ho.candidate_hop2_var", Kind::Float, "0.05", "candidate RIS-UE gain variance"),
    key("ho.candidate_avg_snr_db", Kind::Float, "0.0", "candidate link transmit SNR in dB"),
    key("thresholds.t_hh", Kind::Float, "1e-3", "hard handover BER threshold (QoS)"),
    key("thresholds.t_hs", Kind::Float, "1e-5", "soft handover BER threshold"),
    key("thresholds.epsilon", Kind::Float, "1e-4", "ping-pong BER margin"),
    key("thresholds.load_threshold", Kind::UInt, "50", "active connections before cell breathing"),
    key("decide.serving_ber", Kind::Float, "2e-3", "serving link BER"),
    key("decide.active_connections", Kind::UInt, "10", "serving cell load"),
    key("decide.direct", Kind::Links, "[{ id = 1, ber = 5e-4 }]", "direct candidate links"),
    key("decide.non_direct", Kind::Links, "[{ id = 100, ber = 2e-4 }]", "RIS-aided candidate links"),
];

fn lookup(path: &str) -> Option<&'static Key> {
    SCHEMA.iter().find(|k| k.path == path)
}

fn default_value(k: &Key) -> Option<Value> {
    let text = format!("v = {}", k.default?);
    let mut t: Table = toml::from_str(&text).expect("schema defaults parse");
    t.remove("v")
}

/// Human-readable schema listing, one key per line.
pub fn schema_text() -> String {
    let mut s = String::from("# ris-ho-sim experiment configuration (TOML)\n");
    for k in SCHEMA {
        let default = k.default.unwrap_or("(required)");
        let _ = writeln!(s, "{:<30} {:<34} default {:<28} # {}", k.path, k.kind.describe(), default, k.doc);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkMethod {
    Quadrature,
    MonteCarlo,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSection {
    pub model_hops: (HopGainStats, HopGainStats),
    pub avg_snr_db: f64,
    pub outage: OutageThreshold,
    pub n_values: Vec<usize>,
    pub method: LinkMethod,
    pub mc_samples: usize,
}

impl LinkSection {
    pub fn model(&self, n: usize) -> ris_ho_core::Result<SnrModel> {
        SnrModel::new(
            cascade_moments(self.model_hops.0, self.model_hops.1, n)?,
            10f64.powf(self.avg_snr_db / 10.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSection {
    pub carrier: CarrierConfig,
    pub n_elements: usize,
    pub aperture_m: f64,
    pub source: SourceGeometry,
    pub focus_m: [f64; 3],
    pub x_range_m: (f64, f64),
    pub nx: usize,
    pub z_range_m: (f64, f64),
    pub nz: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSection {
    pub serving_distances_m: Vec<f64>,
    pub n_values: Vec<usize>,
    pub t_h_db: Vec<f64>,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoSection {
    pub kind: HoKind,
    pub n_values: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub fixed_t_hh: f64,
    pub realizations: usize,
    pub links: HoLinkStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecideSection {
    pub serving_ber: f64,
    pub active_connections: u32,
    pub direct: Vec<(LinkId, f64)>,
    pub non_direct: Vec<(LinkId, f64)>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub plots: bool,
    pub link: LinkSection,
    pub heatmap: HeatmapSection,
    pub scenario: TwoCellGeometry,
    pub trigger: TriggerSection,
    pub ho: HoSection,
    pub thresholds: HoThresholds,
    pub decide: DecideSection,
    values: BTreeMap<&'static str, Value>,
}

impl ExperimentConfig {
    /// Normalized TOML echo of every key.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        for k in SCHEMA {
            let v = self.values[k.path].clone();
            match k.path.split_once('.') {
                None => {
                    root.insert(k.path.into(), v);
                }
                Some((ns, leaf)) => {
                    root.entry(ns)
                        .or_insert_with(|| Value::Table(Table::new()))
                        .as_table_mut()
                        .expect("namespace is a table")
                        .insert(leaf.into(), v);
                }
            }
        }
        toml::to_string(&root).expect("config serializes")
    }

    /// Replaces the seed, keeping the echo in step.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.values.insert("seed", Value::Integer(seed as i64));
        self
    }

    pub fn with_output_dir(mut self, dir: PathBuf) -> Self {
        self.values.insert("output_dir", Value::String(dir.display().to_string()));
        self.output_dir = dir;
        self
    }
}

fn flatten(prefix: &str, table: &Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) if lookup(&path).is_none() => flatten(&path, t, out),
            _ => {
                out.insert(path, v.clone());
            }
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

// Coerces a raw value to the key's canonical form.
fn coerce(k: &Key, v: &Value) -> std::result::Result<Value, String> {
    let wrong = || format!("`{}` must be {}, got {}", k.path, k.kind.describe(), v);
    let floats = |len: Option<usize>| -> std::result::Result<Value, String> {
        let arr = v.as_array().ok_or_else(wrong)?;
        if len.is_some_and(|n| arr.len() != n) {
            return Err(wrong());
        }
        let xs = arr.iter().map(as_f64).collect::<Option<Vec<f64>>>().ok_or_else(wrong)?;
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(format!("`{}` must contain finite numbers", k.path));
        }
        Ok(Value::Array(xs.into_iter().map(Value::Float).collect()))
    };
    match k.kind {
        Kind::Float => {
            let x = as_f64(v).ok_or_else(wrong)?;
            if !x.is_finite() {
                return Err(format!("`{}` must be finite", k.path));
            }
            Ok(Value::Float(x))
        }
        Kind::UInt => match v {
            Value::Integer(i) if *i >= 0 => Ok(v.clone()),
            _ => Err(wrong()),
        },
        Kind::Bool => v.as_bool().map(Value::Boolean).ok_or_else(wrong),
        Kind::Text => v.as_str().map(|s| Value::String(s.into())).ok_or_else(wrong),
        Kind::Choice(choices) => match v.as_str() {
            Some(s) if choices.contains(&s) => Ok(v.clone()),
            _ => Err(wrong()),
        },
        Kind::FloatList => floats(None),
        Kind::Pair => floats(Some(2)),
        Kind::Point => floats(Some(3)),
        Kind::UIntList => {
            let arr = v.as_array().ok_or_else(wrong)?;
            if arr.iter().all(|x| matches!(x, Value::Integer(i) if *i >= 0)) {
                Ok(v.clone())
            } else {
                Err(wrong())
            }
        }
        Kind::Links => {
            let arr = v.as_array().ok_or_else(wrong)?;
            let mut out = Vec::new();
            for item in arr {
                let t = item.as_table().ok_or_else(wrong)?;
                if t.keys().any(|key| key != "id" && key != "ber") {
                    return Err(format!("`{}` entries take only `id` and `ber`", k.path));
                }
                let id = match t.get("id") {
                    Some(Value::Integer(i)) if (0..=u32::MAX as i64).contains(i) => *i,
                    _ => return Err(format!("`{}` entries need an integer `id` in [0, 2^32)", k.path)),
                };
                let ber = t
                    .get("ber")
                    .and_then(as_f64)
                    .ok_or_else(|| format!("`{}` entries need a numeric `ber`", k.path))?;
                let mut norm = Table::new();
                norm.insert("id".into(), Value::Integer(id));
                norm.insert("ber".into(), Value::Float(ber));
                out.push(Value::Table(norm));
            }
            Ok(Value::Array(out))
        }
    }
}

struct Reader<'a> {
    values: &'a BTreeMap<&'static str, Value>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn f(&self, path: &str) -> f64 {
        as_f64(&self.values[path]).expect("coerced float")
    }

    fn u(&self, path: &str) -> u64 {
        self.values[path].as_integer().expect("coerced integer") as u64
    }

    fn s(&self, path: &str) -> &str {
        self.values[path].as_str().expect("coerced string")
    }

    fn fs(&self, path: &str) -> Vec<f64> {
        self.values[path].as_array().expect("coerced array").iter().filter_map(as_f64).collect()
    }

    fn us(&self, path: &str) -> Vec<usize> {
        self.values[path]
            .as_array()
            .expect("coerced array")
            .iter()
            .filter_map(|v| v.as_integer())
            .map(|i| i as usize)
            .collect()
    }

    fn links(&self, path: &str) -> Vec<(LinkId, f64)> {
        self.values[path]
            .as_array()
            .expect("coerced array")
            .iter()
            .map(|t| {
                let t = t.as_table().expect("coerced table");
                (t["id"].as_integer().expect("id") as LinkId, as_f64(&t["ber"]).expect("ber"))
            })
            .collect()
    }

    fn check<T>(&mut self, what: &str, r: ris_ho_core::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{what}: {e}"));
                None
            }
        }
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }

    fn nonempty_counts(&mut self, path: &str) -> Vec<usize> {
        let ns = self.us(path);
        self.require(!ns.is_empty(), || format!("`{path}` must not be empty"));
        self.require(ns.iter().all(|&n| n > 0), || format!("`{path}` entries must be positive"));
        ns
    }
}

/// Parses, fills defaults and validates. All problems are reported together.
pub fn validate_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<String>> {
    let raw: Table = toml::from_str(text).map_err(|e| vec![format!("parse error: {}", e.to_string().trim_end())])?;
    let mut flat = BTreeMap::new();
    flatten("", &raw, &mut flat);

    let unknown: Vec<String> = flat
        .keys()
        .filter(|p| lookup(p).is_none())
        .map(|p| format!("unknown key `{p}`"))
        .collect();
    let mut errors = Vec::new();
    let mut values = BTreeMap::new();
    for k in SCHEMA {
        let v = match flat.get(k.path).cloned().or_else(|| default_value(k)) {
            Some(v) => v,
            None => {
                errors.push(format!("missing required key `{}` ({})", k.path, k.kind.describe()));
                continue;
            }
        };
        match coerce(k, &v) {
            Ok(v) => {
                values.insert(k.path, v);
            }
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(unknown.into_iter().chain(errors).collect());
    }

    // typed values are all present: keep going so every problem is reported
    let mut r = Reader {
        values: &values,
        errors: unknown,
    };
    let experiment = Experiment::parse(r.s("experiment")).expect("choice checked");

    let hop = |r: &mut Reader, m: &str, v: &str| r.check(&format!("`{m}`/`{v}`"), HopGainStats::new(r.f(m), r.f(v)));
    let link_h1 = hop(&mut r, "link.hop1_mean", "link.hop1_var");
    let link_h2 = hop(&mut r, "link.hop2_mean", "link.hop2_var");
    let outage = r.check("`link.outage_threshold_db`", OutageThreshold::from_db(r.f("link.outage_threshold_db")));
    let link_ns = r.nonempty_counts("link.n_values");
    let mc_samples = r.u("link.mc_samples") as usize;
    let method = match r.s("link.method") {
        "quadrature" => LinkMethod::Quadrature,
        "monte_carlo" => LinkMethod::MonteCarlo,
        _ => LinkMethod::Both,
    };
    if method != LinkMethod::Quadrature {
        r.require(mc_samples >= 2, || "`link.mc_samples` must be at least 2".into());
    }

    let hm_carrier = r.check("`heatmap.carrier_hz`", CarrierConfig::from_frequency(r.f("heatmap.carrier_hz")));
    let hm_n = r.u("heatmap.n_elements") as usize;
    let hm_aperture = r.f("heatmap.aperture_m");
    let panel = r.check("`heatmap.n_elements`/`heatmap.aperture_m`", RisPanel::square(hm_n, hm_aperture));
    let source = r.check(
        "`heatmap.bs_distance_m`/`heatmap.incidence_deg`",
        SourceGeometry::new(r.f("heatmap.bs_distance_m"), r.f("heatmap.incidence_deg").to_radians(), 1.0, 1.0),
    );
    if let (Some(p), Some(s), Some(c)) = (&panel, &source, &hm_carrier) {
        r.check("`heatmap.bs_distance_m`", s.check_far_field(p, c));
    }
    let focus = r.fs("heatmap.focus_m");
    r.require(focus[2] > 0.0, || "`heatmap.focus_m` must have z > 0".into());
    let xr = r.fs("heatmap.x_range_m");
    let zr = r.fs("heatmap.z_range_m");
    r.require(xr[0] < xr[1], || "`heatmap.x_range_m` must be increasing".into());
    r.require(zr[0] > 0.0 && zr[0] < zr[1], || "`heatmap.z_range_m` must be increasing with z > 0".into());
    let (nx, nz) = (r.u("heatmap.nx") as usize, r.u("heatmap.nz") as usize);
    r.require(nx >= 2 && nz >= 2, || "`heatmap.nx` and `heatmap.nz` must be at least 2".into());

    let sc_carrier = r.check("`scenario.carrier_hz`", CarrierConfig::from_frequency(r.f("scenario.carrier_hz")));
    let scenario = sc_carrier.map(|carrier| TwoCellGeometry {
        inter_site_m: r.f("scenario.inter_site_m"),
        bs_height_m: r.f("scenario.bs_height_m"),
        ue_height_m: r.f("scenario.ue_height_m"),
        ris_height_m: r.f("scenario.ris_height_m"),
        ris_offset_m: r.f("scenario.ris_offset_m"),
        focus_along_m: r.f("scenario.focus_along_m"),
        element_aperture_m: r.f("scenario.element_aperture_m"),
        bs_aperture_m: r.f("scenario.bs_aperture_m"),
        tx_power_dbm: r.f("scenario.tx_power_dbm"),
        noise_power_dbm: r.f("scenario.noise_power_dbm"),
        kappa: r.f("scenario.kappa"),
        carrier,
        speed_mps: r.f("scenario.speed_mps"),
        sample_interval_s: r.f("scenario.sample_interval_s"),
    });
    let trigger = TriggerSection {
        serving_distances_m: r.fs("trigger.serving_distances_m"),
        n_values: r.nonempty_counts("trigger.n_values"),
        t_h_db: r.fs("trigger.t_h_db"),
        realizations: r.u("trigger.realizations") as usize,
    };
    r.require(!trigger.serving_distances_m.is_empty(), || "`trigger.serving_distances_m` must not be empty".into());
    r.require(!trigger.t_h_db.is_empty(), || "`trigger.t_h_db` must not be empty".into());
    r.require(trigger.realizations > 0, || "`trigger.realizations` must be positive".into());
    if let Some(g) = &scenario {
        r.check("`scenario`", g.trajectory());
        for &d in &trigger.serving_distances_m {
            for &n in &trigger.n_values {
                if r.check(&format!("`trigger.serving_distances_m` = {d}, N = {n}"), g.layout(d, n)).is_none() {
                    break;
                }
            }
        }
    }

    let kind = if r.s("ho.kind") == "hard" { HoKind::Hard } else { HoKind::Soft };
    let ho_ns = r.nonempty_counts("ho.n_values");
    let range = r.fs("ho.threshold_range");
    let points = r.u("ho.threshold_points") as usize;
    let fixed_t_hh = r.f("ho.fixed_t_hh");
    r.require(range[0] > 0.0 && range[0] <= range[1] && range[1] < 0.5, || {
        "`ho.threshold_range` must satisfy 0 < lo <= hi < 0.5".into()
    });
    r.require(points >= 1 && (points >= 2 || range[0] == range[1]), || {
        "`ho.threshold_points` must be at least 2 for a non-degenerate range".into()
    });
    if kind == HoKind::Soft {
        r.require(range[0] >= 1e-7 && range[1] <= 1e-2, || {
            "`ho.threshold_range` must lie within [1e-7, 1e-2] for soft handover".into()
        });
        r.require(fixed_t_hh > range[1] && fixed_t_hh < 0.5, || {
            format!("`ho.fixed_t_hh` ({fixed_t_hh}) must exceed the largest T_hs and stay below 0.5")
        });
    }
    let ho_realizations = r.u("ho.realizations") as usize;
    r.require(ho_realizations > 0, || "`ho.realizations` must be positive".into());
    let thresholds_grid: Vec<f64> = if points <= 1 {
        vec![range[0]]
    } else {
        let (a, b) = (range[0].log10(), range[1].log10());
        (0..points)
            .map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64))
            .collect()
    };
    let serving_hop = hop(&mut r, "ho.serving_mean", "ho.serving_var");
    let serving = serving_hop.and_then(|h| {
        let c = cascade_moments(h, HopGainStats::new(1.0, 0.0).expect("unit hop"), 1);
        let model = c.and_then(|c| SnrModel::new(c, 10f64.powf(r.f("ho.serving_avg_snr_db") / 10.0)));
        r.check("`ho.serving_*`", model)
    });
    let ch1 = hop(&mut r, "ho.candidate_hop1_mean", "ho.candidate_hop1_var");
    let ch2 = hop(&mut r, "ho.candidate_hop2_mean", "ho.candidate_hop2_var");

    let (t_hh, t_hs) = (r.f("thresholds.t_hh"), r.f("thresholds.t_hs"));
    r.require(t_hs < t_hh, || {
        format!("`thresholds.t_hs` ({t_hs}) must be smaller than `thresholds.t_hh` ({t_hh})")
    });
    let load = r.u("thresholds.load_threshold");
    r.require(load <= u32::MAX as u64, || "`thresholds.load_threshold` exceeds 2^32 - 1".into());
    let thresholds = if t_hs < t_hh {
        r.check(
            "`thresholds`",
            HoThresholds::new(t_hh, t_hs, r.f("thresholds.epsilon"), load as u32),
        )
    } else {
        None
    };

    let decide = DecideSection {
        serving_ber: r.f("decide.serving_ber"),
        active_connections: r.u("decide.active_connections").min(u32::MAX as u64) as u32,
        direct: r.links("decide.direct"),
        non_direct: r.links("decide.non_direct"),
    };
    r.require((0.0..=0.5).contains(&decide.serving_ber), || "`decide.serving_ber` must lie in [0, 0.5]".into());
    for (path, links) in [("decide.direct", &decide.direct), ("decide.non_direct", &decide.non_direct)] {
        r.require(links.iter().all(|l| (0.0..=0.5).contains(&l.1)), || {
            format!("`{path}` BERs must lie in [0, 0.5]")
        });
    }

    let errors = r.errors;
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(ExperimentConfig {
        experiment,
        seed: values["seed"].as_integer().expect("seed") as u64,
        output_dir: PathBuf::from(values["output_dir"].as_str().expect("dir")),
        plots: values["plots"].as_bool().expect("plots"),
        link: LinkSection {
            model_hops: (link_h1.expect("checked"), link_h2.expect("checked")),
            avg_snr_db: as_f64(&values["link.avg_snr_db"]).expect("float"),
            outage: outage.expect("checked"),
            n_values: link_ns,
            method,
            mc_samples,
        },
        heatmap: HeatmapSection {
            carrier: hm_carrier.expect("checked"),
            n_elements: hm_n,
            aperture_m: hm_aperture,
            source: source.expect("checked"),
            focus_m: [focus[0], focus[1], focus[2]],
            x_range_m: (xr[0], xr[1]),
            nx,
            z_range_m: (zr[0], zr[1]),
            nz,
        },
        scenario: scenario.expect("checked"),
        trigger,
        ho: HoSection {
            kind,
            n_values: ho_ns,
            thresholds: thresholds_grid,
            fixed_t_hh,
            realizations: ho_realizations,
            links: HoLinkStats {
                serving: serving.expect("checked"),
                candidate_hops: (ch1.expect("checked"), ch2.expect("checked")),
                candidate_avg_snr: 10f64.powf(as_f64(&values["ho.candidate_avg_snr_db"]).expect("float") / 10.0),
            },
        },
        thresholds: thresholds.expect("checked"),
        decide,
        values,
    })
}
