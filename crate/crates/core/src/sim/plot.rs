//! Static SVG figures from run and batch directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::persist::{CONFIG_FILE, METRICS_FILE};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Linear map from data bounds into the plot area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x1 - self.x0).max(f64::MIN_POSITIVE);
        MARGIN + (v - self.x0) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y1 - self.y0).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN - (v - self.y0) / span * (HEIGHT - 2.0 * MARGIN)
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|(a, b)| format!("{:.2},{:.2}", self.x(*a), self.y(*b)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn open_svg(title: &str, xlabel: &str, ylabel: &str, frame: &Frame) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, "<path d=\"M{l},{t} L{l},{b} L{r},{b}\" stroke=\"black\" fill=\"none\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>", WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{ylabel}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (v, anchor_x, anchor_y) in [(frame.x0, l, b + 16.0), (frame.x1, r, b + 16.0)] {
        let _ = writeln!(s, "<text x=\"{anchor_x}\" y=\"{anchor_y}\" text-anchor=\"middle\">{v:.0}</text>");
    }
    for (v, y) in [(frame.y0, b), (frame.y1, t)] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{v:.0}</text>", l - 6.0, y + 4.0);
    }
    s
}

fn legend(s: &mut String, entries: &[(String, &str)]) {
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        let x = WIDTH - MARGIN - 150.0;
        let _ = writeln!(s, "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>", x + 18.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{name}</text>", x + 24.0, y + 4.0);
    }
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad {what} value {field:?}")))
}

/// `series name -> [(time, pct)]` and `robot -> [(x, y)]` from a metrics table.
type MetricsSeries = (BTreeMap<String, Vec<(f64, f64)>>, BTreeMap<String, Vec<(f64, f64)>>);

fn read_metrics(path: &Path) -> Result<MetricsSeries> {
    let mut coverage: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut paths: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(path)?;
    for rec in rdr.records() {
        let rec = rec?;
        let time = parse_f64(&rec[0], "time")?;
        let robot = rec[1].to_string();
        coverage.entry(robot.clone()).or_default().push((time, parse_f64(&rec[5], "pct_unknown")?));
        if !rec[2].is_empty() {
            paths.entry(robot).or_default().push((parse_f64(&rec[2], "x")?, parse_f64(&rec[3], "y")?));
        }
    }
    Ok((coverage, paths))
}

/// Coverage-versus-time figure for a single run.
pub fn coverage_svg(series: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    let t_max = series.values().flatten().map(|p| p.0).fold(0.0, f64::max);
    let frame = Frame { x0: 0.0, x1: t_max, y0: 0.0, y1: 100.0 };
    let mut s = open_svg("Reduction in unknown area", "time [s]", "percent", &frame);
    let mut entries = Vec::new();
    for (i, (name, pts)) in series.iter().enumerate() {
        let (color, width) = if name == "team" { ("black", 2.5) } else { (PALETTE[i % PALETTE.len()], 1.2) };
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>", frame.points(pts));
        let label = if name == "team" { "team".to_string() } else { format!("robot {name}") };
        entries.push((label, color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

/// Robot paths over the grid and zone outline.
pub fn trajectory_svg(cfg: &ScenarioConfig, paths: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    let lo = cfg.grid.origin();
    let hi = cfg.grid.max_corner();
    let side = (hi.x - lo.x).max(hi.y - lo.y);
    let frame = Frame { x0: lo.x, x1: lo.x + side, y0: lo.y, y1: lo.y + side };
    let mut s = open_svg("Robot trajectories", "x [m]", "y [m]", &frame);
    let step = cfg.grid.cell_size();
    for c in 0..=cfg.grid.width_cells() {
        let x = frame.x(lo.x + c as f64 * step);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>", frame.y(lo.y), frame.y(hi.y));
    }
    for r in 0..=cfg.grid.height_cells() {
        let y = frame.y(lo.y + r as f64 * step);
        let _ = writeln!(s, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>", frame.x(lo.x), frame.x(hi.x));
    }
    let zone: Vec<(f64, f64)> = cfg.zone().vertices().iter().map(|p| (p.x, p.y)).collect();
    let _ = writeln!(s, "<polygon points=\"{}\" fill=\"none\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>", frame.points(&zone));
    for t in &cfg.targets {
        let c = cfg.grid.cell_center(t.cell);
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>", frame.x(c.x), frame.y(c.y));
    }
    let mut entries = Vec::new();
    for (i, (name, pts)) in paths.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>", frame.points(pts));
        entries.push((format!("robot {name}"), color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

/// Mean coverage per arm with a min–max band.
pub fn batch_svg(path: &Path) -> Result<String> {
    let mut arms: BTreeMap<String, Vec<(f64, f64, f64, f64)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(path)?;
    for rec in rdr.records() {
        let rec = rec?;
        arms.entry(rec[0].to_string()).or_default().push((
            parse_f64(&rec[1], "time")?,
            parse_f64(&rec[2], "mean")?,
            parse_f64(&rec[3], "min")?,
            parse_f64(&rec[4], "max")?,
        ));
    }
    let t_max = arms.values().flatten().map(|p| p.0).fold(0.0, f64::max);
    let frame = Frame { x0: 0.0, x1: t_max, y0: 0.0, y1: 100.0 };
    let mut s = open_svg("Reduction in unknown area by arm", "time [s]", "percent", &frame);
    let mut entries = Vec::new();
    for (i, (name, rows)) in arms.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.3)).collect();
        let lower: Vec<(f64, f64)> = rows.iter().rev().map(|r| (r.0, r.2)).collect();
        let band = [upper, lower].concat();
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>", frame.points(&band));
        let mean: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>", frame.points(&mean));
        entries.push((name.clone(), color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes every figure that the contents of `dir` allow; returns the written paths.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let metrics = dir.join(METRICS_FILE);
    if metrics.is_file() {
        let (coverage, paths) = read_metrics(&metrics)?;
        let p = dir.join("coverage.svg");
        std::fs::write(&p, coverage_svg(&coverage))?;
        written.push(p);
        let config = dir.join(CONFIG_FILE);
        if config.is_file() {
            let cfg = ScenarioConfig::load(&config)?;
            let p = dir.join("trajectories.svg");
            std::fs::write(&p, trajectory_svg(&cfg, &paths))?;
            written.push(p);
        }
    }
    let batch = dir.join("batch_coverage.csv");
    if batch.is_file() {
        let p = dir.join("batch_coverage.svg");
        std::fs::write(&p, batch_svg(&batch)?)?;
        written.push(p);
    }
    if written.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} holds neither {METRICS_FILE} nor batch_coverage.csv",
            dir.display()
        )));
    }
    Ok(written)
}
