use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

/// How a table is drawn when SVG output is requested.
#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    /// Column `x` against each column in `ys`.
    Lines { x: usize, ys: Vec<usize> },
    /// Column `z` as a colour map over the `x`, `y` grid.
    Heat { x: usize, y: usize, z: usize },
}

/// Physical context repeated on every CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub hbar: f64,
    pub omega: Option<f64>,
    pub dim: Option<usize>,
    pub units: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub context: Context,
    pub plot: Option<Plot>,
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str], context: Context) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            context,
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_plot(mut self, plot: Plot) -> Self {
        self.plot = Some(plot);
        self
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.extend(["hbar", "omega", "dim", "units"].map(String::from));
        w.write_record(&header)?;
        let ctx = &self.context;
        let tail = [
            num(ctx.hbar),
            ctx.omega.map(num).unwrap_or_default(),
            ctx.dim.map(|d| d.to_string()).unwrap_or_default(),
            ctx.units.to_string(),
        ];
        for row in &self.rows {
            w.write_record(row.iter().chain(tail.iter()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect()
    }

    pub fn to_svg(&self) -> Option<String> {
        match self.plot.as_ref()? {
            Plot::Lines { x, ys } => Some(self.line_svg(*x, ys)),
            Plot::Heat { x, y, z } => Some(self.heat_svg(*x, *y, *z)),
        }
    }

    fn line_svg(&self, x: usize, ys: &[usize]) -> String {
        let xs = self.column(x);
        let series: Vec<Vec<f64>> = ys.iter().map(|&k| self.column(k)).collect();
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(series.iter().flatten());
        let frame = Frame::new(x0, x1, y0, y1);
        let mut s = frame.open(
            &self.title,
            &self.columns[x],
            &ys.iter().map(|&k| self.columns[k].as_str()).collect::<Vec<_>>().join(", "),
        );
        for (k, ys) in series.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = xs
                .iter()
                .zip(ys)
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .map(|(&a, &b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{colour}"/>"#);
            }
        }
        s + &self.data_comment() + "</svg>\n"
    }

    fn heat_svg(&self, x: usize, y: usize, z: usize) -> String {
        let (xs, ys, zs) = (self.column(x), self.column(y), self.column(z));
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        let (z0, z1) = range(&zs);
        let frame = Frame::new(x0, x1, y0, y1);
        let mut s = frame.open(&self.title, &self.columns[x], &self.columns[y]);
        let distinct = |v: &[f64]| {
            let mut u: Vec<f64> = v.iter().copied().filter(|a| a.is_finite()).collect();
            u.sort_by(f64::total_cmp);
            u.dedup();
            u.len().max(2)
        };
        let w = frame.width / (distinct(&xs) - 1) as f64;
        let h = frame.height / (distinct(&ys) - 1) as f64;
        for ((&a, &b), &c) in xs.iter().zip(&ys).zip(&zs) {
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                continue;
            }
            let t = if z1 > z0 { (c - z0) / (z1 - z0) } else { 0.5 };
            let (r, g, bl) =
                ((255.0 * t) as u8, (80.0 + 100.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8, (255.0 * (1.0 - t)) as u8);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{bl})"/>"#,
                frame.px(a) - w / 2.0,
                frame.py(b) - h / 2.0,
                w,
                h
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="20" font-size="11">{}: {} to {}</text>"#,
            frame.left,
            escape(&self.columns[z]),
            num(z0),
            num(z1)
        );
        s + &self.data_comment() + "</svg>\n"
    }

    fn data_comment(&self) -> String {
        let mut s = String::from("<!-- data\n");
        s += &self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s += &r.join(",").replace("--", "- -");
            s.push('\n');
        }
        s + "-->\n"
    }
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn range<'a>(v: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in v {
        if x.is_finite() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi == lo {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { left: 70.0, top: 30.0, width: 520.0, height: 360.0, x: (x0, x1), y: (y0, y1) }
    }

    fn px(&self, v: f64) -> f64 {
        self.left + (v - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        let mut s = String::from(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"460\" font-family=\"sans-serif\">\n",
        );
        let _ = writeln!(s, r#"<rect width="640" height="460" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.0}" y="18" font-size="13">{}</text>"#, l, escape(title));
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{:.0}" y="{:.0}" font-size="11">{}</text>"#, l, t + h + 16.0, num(self.x.0));
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="11" text-anchor="end">{}</text>"#,
            l + w,
            t + h + 16.0,
            num(self.x.1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="11" text-anchor="end">{}</text>"#,
            l - 4.0,
            t + h,
            num(self.y.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="11" text-anchor="end">{}</text>"#,
            l - 4.0,
            t + 10.0,
            num(self.y.1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="12" text-anchor="middle">{}</text>"#,
            l + w / 2.0,
            t + h + 34.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.0}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.0})">{}</text>"#,
            t + h / 2.0,
            t + h / 2.0,
            escape(ylabel)
        );
        s
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
