//! Static SVG plots rendered from the CSV artifacts alone.
//!
//! Output is a pure function of the CSV text: re-rendering an existing CSV
//! gives the same bytes.

use std::fmt::Write as _;

use crate::config::Experiment;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 380.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV lacks column `{0}`")]
    MissingColumn(&'static str),
    #[error("non-numeric value `{value}` in column `{column}`")]
    NotNumeric { column: &'static str, value: String },
    #[error("no data to plot")]
    Empty,
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Result<Self, PlotError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    fn index(&self, name: &'static str) -> Result<usize, PlotError> {
        self.header.iter().position(|h| h == name).ok_or(PlotError::MissingColumn(name))
    }

    fn numbers(&self, name: &'static str) -> Result<Vec<f64>, PlotError> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>().map_err(|_| PlotError::NotNumeric {
                    column: name,
                    value: r[i].clone(),
                })
            })
            .collect()
    }
}

struct LineSpec {
    x: &'static str,
    y: &'static str,
    series: &'static [&'static str],
    facet: Option<&'static str>,
    x_label: &'static str,
    y_label: &'static str,
}

fn line_spec(e: Experiment) -> Option<LineSpec> {
    Some(match e {
        Experiment::MetricsVsN => LineSpec {
            x: "n_elements",
            y: "value",
            series: &["method"],
            facet: Some("metric"),
            x_label: "RIS elements N",
            y_label: "value",
        },
        Experiment::TriggerDistance => LineSpec {
            x: "n_elements",
            y: "mean_distance_m",
            series: &["t_h_db", "ris_enabled"],
            facet: Some("serving_distance_m"),
            x_label: "RIS elements N",
            y_label: "trigger distance (m)",
        },
        Experiment::HoProbability => LineSpec {
            x: "threshold",
            y: "probability",
            series: &["kind", "n_elements"],
            facet: None,
            x_label: "BER threshold",
            y_label: "handover probability",
        },
        Experiment::Heatmap | Experiment::Decide => return None,
    })
}

/// SVG for an experiment's CSV, or `None` when the experiment has no plot.
pub fn render(experiment: Experiment, csv_text: &str) -> Result<Option<String>, PlotError> {
    let csv = Csv::parse(csv_text)?;
    if experiment == Experiment::Heatmap {
        return render_heatmap(&csv).map(Some);
    }
    let Some(spec) = line_spec(experiment) else {
        return Ok(None);
    };
    render_lines(&csv, &spec).map(Some)
}

// Canonical text for a key cell: numbers print in shortest form.
fn label(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(x) if cell.contains('e') || cell.contains('.') => format!("{x}"),
        _ => cell.to_string(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if !(1e-3..1e5).contains(&a) {
        let e = a.log10().floor() as i32;
        let m = x / 10f64.powi(e);
        if (m.abs() - 1.0).abs() < 1e-9 {
            return format!("{}1e{e}", if x < 0.0 { "-" } else { "" });
        }
        return format!("{m:.2}e{e}");
    }
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: &[f64]) -> Self {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log = lo > 0.0 && hi / lo >= 1e3;
        if log {
            return Axis {
                lo: lo.log10().floor(),
                hi: hi.log10().ceil().max(lo.log10().floor() + 1.0),
                log,
            };
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.max(1e-300).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 6.0).ceil().max(1.0);
            let mut e = self.lo;
            let mut out = Vec::new();
            while e <= self.hi + 1e-9 {
                out.push((10f64.powf(e), format!("1e{}", e as i64)));
                e += step;
            }
            return out;
        }
        (0..=5)
            .map(|k| {
                let v = self.lo + (self.hi - self.lo) * k as f64 / 5.0;
                (v, fmt_num(v))
            })
            .collect()
    }
}

fn render_lines(csv: &Csv, spec: &LineSpec) -> Result<String, PlotError> {
    if csv.rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let xs = csv.numbers(spec.x)?;
    let ys = csv.numbers(spec.y)?;
    let series_idx = spec.series.iter().map(|s| csv.index(s)).collect::<Result<Vec<_>, _>>()?;
    let facet_idx = spec.facet.map(|f| csv.index(f)).transpose()?;

    let mut facets: Vec<String> = Vec::new();
    for r in &csv.rows {
        let f = facet_idx.map(|i| label(&r[i])).unwrap_or_default();
        if !facets.contains(&f) {
            facets.push(f);
        }
    }
    let height = PANEL_H * facets.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{PANEL_W}" height="{height}" fill="white"/>"#);
    for (p, facet) in facets.iter().enumerate() {
        let rows: Vec<usize> = (0..csv.rows.len())
            .filter(|&i| facet_idx.is_none_or(|fi| label(&csv.rows[i][fi]) == *facet))
            .collect();
        let px: Vec<f64> = rows.iter().map(|&i| xs[i]).collect();
        let py: Vec<f64> = rows.iter().map(|&i| ys[i]).collect();
        let (ax, ay) = (Axis::fit(&px), Axis::fit(&py));
        let top = PANEL_H * p as f64;
        let (x0, x1) = (MARGIN_L, PANEL_W - MARGIN_R);
        let (y0, y1) = (top + PANEL_H - MARGIN_B, top + MARGIN_T);
        let sx = |v: f64| x0 + ax.frac(v) * (x1 - x0);
        let sy = |v: f64| y0 + ay.frac(v) * (y1 - y0);

        let title = match spec.facet {
            Some(f) => format!("{f} = {facet}"),
            None => String::new(),
        };
        let _ = writeln!(svg, r#"<text x="{x0}" y="{:.2}" font-size="13">{}</text>"#, top + 20.0, escape(&title));
        let _ = writeln!(
            svg,
            r##"<rect x="{x0}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            x1 - x0,
            y0 - y1
        );
        for (v, t) in ax.ticks() {
            let x = sx(v);
            let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##, y0 + 4.0);
            let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 16.0, escape(&t));
        }
        for (v, t) in ay.ticks() {
            let y = sy(v);
            let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="#333"/>"##, x0 - 4.0);
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, escape(&t));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            y0 + 34.0,
            escape(spec.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(spec.y_label)
        );

        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for &i in &rows {
            let key = spec
                .series
                .iter()
                .zip(&series_idx)
                .map(|(name, &c)| format!("{name}={}", label(&csv.rows[i][c])))
                .collect::<Vec<_>>()
                .join(", ");
            match series.iter_mut().find(|s| s.0 == key) {
                Some(s) => s.1.push((xs[i], ys[i])),
                None => series.push((key, vec![(xs[i], ys[i])])),
            }
        }
        for (k, (key, pts)) in series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
            for &(x, y) in pts {
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
            let ly = y1 + 14.0 * k as f64 + 8.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                x1 + 10.0,
                x1 + 26.0
            );
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x1 + 30.0, ly + 4.0, escape(key));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

// Piecewise-linear dark-blue to yellow ramp over [0, 1].
fn ramp(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [13.0, 8.0, 135.0]),
        (0.4, [156.0, 23.0, 158.0]),
        (0.75, [237.0, 121.0, 83.0]),
        (1.0, [240.0, 249.0, 33.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.windows(2).position(|w| t <= w[1].0).unwrap_or(STOPS.len() - 2);
    let ((a, ca), (b, cb)) = (STOPS[k], STOPS[k + 1]);
    let u = (t - a) / (b - a);
    let c: Vec<u8> = (0..3).map(|i| (ca[i] + u * (cb[i] - ca[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn render_heatmap(csv: &Csv) -> Result<String, PlotError> {
    const FLOOR_DB: f64 = -30.0;
    if csv.rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let xs = csv.numbers("x_m")?;
    let zs = csv.numbers("z_m")?;
    let db = csv.numbers("power_db")?;
    let mut ux: Vec<f64> = Vec::new();
    let mut uz: Vec<f64> = Vec::new();
    for (&x, &z) in xs.iter().zip(&zs) {
        if !ux.contains(&x) {
            ux.push(x);
        }
        if !uz.contains(&z) {
            uz.push(z);
        }
    }
    let (plot_w, plot_h) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let (cw, ch) = (plot_w / uz.len() as f64, plot_h / ux.len() as f64);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{PANEL_H}" viewBox="0 0 {PANEL_W} {PANEL_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{PANEL_W}" height="{PANEL_H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{MARGIN_L}" y="20" font-size="13">received power (dB re peak)</text>"#);
    // depth runs left to right, lateral position bottom to top
    for i in 0..xs.len() {
        let iz = uz.iter().position(|&z| z == zs[i]).expect("collected");
        let ix = ux.iter().position(|&x| x == xs[i]).expect("collected");
        let fill = ramp((db[i] - FLOOR_DB) / -FLOOR_DB);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            MARGIN_L + iz as f64 * cw,
            MARGIN_T + (ux.len() - 1 - ix) as f64 * ch,
            cw + 0.05,
            ch + 0.05
        );
    }
    let y_base = PANEL_H - MARGIN_B;
    for (k, &z) in uz.iter().enumerate().step_by((uz.len() / 6).max(1)) {
        let x = MARGIN_L + (k as f64 + 0.5) * cw;
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y_base + 16.0, fmt_num(z));
    }
    for (k, &x) in ux.iter().enumerate().step_by((ux.len() / 6).max(1)) {
        let y = MARGIN_T + (ux.len() - 1 - k) as f64 * ch + ch / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_num(x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">depth z (m)</text>"#,
        MARGIN_L + plot_w / 2.0,
        y_base + 34.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">lateral x (m)</text>"#,
        MARGIN_T + plot_h / 2.0
    );
    let bar_x = PANEL_W - MARGIN_R + 30.0;
    for k in 0..30 {
        let t = 1.0 - k as f64 / 29.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x}" y="{:.2}" width="14" height="{:.3}" fill="{}"/>"#,
            MARGIN_T + k as f64 * plot_h / 30.0,
            plot_h / 30.0 + 0.05,
            ramp(t)
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">0 dB</text>"#, bar_x + 20.0, MARGIN_T + 8.0);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{y_base:.2}">{FLOOR_DB} dB</text>"#, bar_x + 20.0);
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_labels() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(150.0), "150");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(2.5e-6), "2.50e-6");
        assert_eq!(label("6.0000000000000000e1"), "60");
        assert_eq!(label("true"), "true");
        assert_eq!(label("32"), "32");
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#0d0887");
        assert_eq!(ramp(1.0), "#f0f921");
        assert_eq!(ramp(-3.0), ramp(0.0));
    }

    #[test]
    fn log_axis_for_wide_ranges() {
        assert!(Axis::fit(&[1e-7, 1e-2]).log);
        assert!(!Axis::fit(&[0.0, 1.0]).log);
        assert!(!Axis::fit(&[1.0, 2.0]).log);
    }

    #[test]
    fn decide_has_no_plot() {
        assert_eq!(render(Experiment::Decide, "mode,chosen_link\r\nHHO,1\r\n").unwrap(), None);
    }

    #[test]
    fn missing_columns_reported() {
        let e = render(Experiment::HoProbability, "a,b\r\n1,2\r\n").unwrap_err();
        assert!(matches!(e, PlotError::MissingColumn("threshold")));
    }
}
