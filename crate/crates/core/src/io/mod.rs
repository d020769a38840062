//! Lifetime and prior CSV ingestion, and curve export as CSV or SVG.

mod svg;

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use crate::bsp::{bsp_prior, dp_prior, BetaStacyProcess, LifetimeSample};
use crate::error::{Error, Result};

pub use svg::write_svg;

/// Lifetime observations recorded against one node of the block diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub node: String,
    pub samples: Vec<LifetimeSample>,
}

impl Dataset {
    pub fn censored_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let censored = self.samples.iter().filter(|s| !s.failed).count();
        censored as f64 / self.samples.len() as f64
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Row {
        row: 1,
        message: e.to_string(),
    })?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(Error::Row {
            row: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

fn records(
    rdr: &mut csv::Reader<impl Read>,
    width: usize,
) -> impl Iterator<Item = Result<(usize, csv::StringRecord)>> + '_ {
    rdr.records().map(move |rec| {
        let rec = rec.map_err(|e| Error::Row {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::Row {
                row,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((row, rec))
    })
}

fn number(field: &str, row: usize, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Row {
        row,
        message: format!("{what} `{field}` is not a number"),
    })
}

/// Reads `node,time,event` rows, grouped by node in order of first appearance.
pub fn load_lifetimes<R: Read>(input: R) -> Result<Vec<Dataset>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &["node", "time", "event"])?;
    let mut out: Vec<Dataset> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in records(&mut rdr, 3) {
        let (row, rec) = rec?;
        let node = &rec[0];
        if node.is_empty() {
            return Err(Error::Row {
                row,
                message: "empty node name".into(),
            });
        }
        let time = number(&rec[1], row, "time")?;
        let failed = match &rec[2] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Row {
                    row,
                    message: format!("event `{other}` must be 0 or 1"),
                })
            }
        };
        let sample = LifetimeSample::new(time, failed).map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let slot = *index.entry(node.to_string()).or_insert_with(|| {
            out.push(Dataset {
                node: node.to_string(),
                samples: Vec::new(),
            });
            out.len() - 1
        });
        out[slot].samples.push(sample);
    }
    Ok(out)
}

pub fn load_lifetimes_path(path: impl AsRef<Path>) -> Result<Vec<Dataset>> {
    load_lifetimes(open(path.as_ref())?)
}

pub fn save_lifetimes<W: Write>(datasets: &[Dataset], mut out: W) -> Result<()> {
    writeln!(out, "node,time,event")?;
    for d in datasets {
        for s in &d.samples {
            writeln!(out, "{},{},{}", d.node, s.time, u8::from(s.failed))?;
        }
    }
    Ok(())
}

/// Reads `node,time,cdf,precision` rows into one prior per node.
///
/// Nodes with a constant precision column get a DP prior; otherwise the
/// per-row precisions define a general beta-Stacy prior.
pub fn load_prior_spec<R: Read>(input: R) -> Result<BTreeMap<String, BetaStacyProcess>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &["node", "time", "cdf", "precision"])?;
    struct Rows {
        first_row: usize,
        grid: Vec<f64>,
        cdf: Vec<f64>,
        precision: Vec<f64>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Rows> = HashMap::new();
    for rec in records(&mut rdr, 4) {
        let (row, rec) = rec?;
        let node = rec[0].to_string();
        let entry = rows.entry(node.clone()).or_insert_with(|| {
            order.push(node);
            Rows {
                first_row: row,
                grid: Vec::new(),
                cdf: Vec::new(),
                precision: Vec::new(),
            }
        });
        entry.grid.push(number(&rec[1], row, "time")?);
        entry.cdf.push(number(&rec[2], row, "cdf")?);
        entry.precision.push(number(&rec[3], row, "precision")?);
    }
    let mut out = BTreeMap::new();
    for node in order {
        let r = &rows[&node];
        let constant = r.precision.windows(2).all(|w| w[0] == w[1]);
        let prior = if constant {
            dp_prior(&r.grid, &r.cdf, r.precision[0])
        } else {
            bsp_prior(&r.grid, &r.cdf, &r.precision)
        }
        .map_err(|e| Error::Row {
            row: r.first_row,
            message: format!("prior for `{node}`: {e}"),
        })?;
        out.insert(node, prior);
    }
    Ok(out)
}

pub fn load_prior_spec_path(path: impl AsRef<Path>) -> Result<BTreeMap<String, BetaStacyProcess>> {
    load_prior_spec(open(path.as_ref())?)
}

/// Reads `t,cdf` rows, such as a known true CDF for plot overlays.
pub fn load_truth<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &["t", "cdf"])?;
    let mut out = Vec::new();
    for rec in records(&mut rdr, 2) {
        let (row, rec) = rec?;
        out.push((number(&rec[0], row, "t")?, number(&rec[1], row, "cdf")?));
    }
    Ok(out)
}

pub fn load_truth_path(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    load_truth(open(path.as_ref())?)
}

pub fn save_truth<W: Write>(points: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "t,cdf")?;
    for (t, f) in points {
        writeln!(out, "{},{}", sig12(*t), sig12(*f))?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// One exported grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub t: f64,
    pub mean: f64,
    pub second_moment: f64,
    pub lower: f64,
    pub upper: f64,
    pub precision: f64,
    pub terminal: bool,
    pub degenerate: bool,
}

impl CurveRow {
    fn flags(&self) -> String {
        let mut flags = Vec::new();
        if self.terminal {
            flags.push("terminal");
        }
        if self.degenerate {
            flags.push("degenerate");
        }
        flags.join(";")
    }
}

/// Pointwise summary of a fitted process.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveExport {
    pub rows: Vec<CurveRow>,
    pub level: f64,
}

impl CurveExport {
    pub fn from_process(bsp: &BetaStacyProcess, level: f64) -> Result<Self> {
        let seconds = bsp.second_moments();
        let mut rows = Vec::with_capacity(bsp.len());
        for (i, &t) in bsp.grid().iter().enumerate() {
            let mean = bsp.base().values()[i];
            let second = seconds[i];
            let (lower, upper) = crate::bsp::interval_from_moments(mean, second, level)?;
            rows.push(CurveRow {
                t,
                mean,
                second_moment: second,
                lower,
                upper,
                precision: bsp.precision()[i],
                terminal: bsp.is_terminal(i),
                degenerate: mean > 0.0 && mean < 1.0 && lower == upper,
            });
        }
        Ok(Self { rows, level })
    }

    pub fn mean_band_width(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.upper - r.lower).sum::<f64>() / self.rows.len() as f64
    }
}

pub const CURVE_HEADER: &str = "t,mean,second_moment,lower,upper,precision,flags";

pub fn write_csv<W: Write>(curve: &CurveExport, mut out: W) -> Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for r in &curve.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig12(r.t),
            sig12(r.mean),
            sig12(r.second_moment),
            sig12(r.lower),
            sig12(r.upper),
            sig12(r.precision),
            r.flags()
        )?;
    }
    Ok(())
}

/// `%.12g` formatting.
pub fn sig12(x: f64) -> String {
    format_sig(x, 12)
}

pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsp::posterior_update;
    use proptest::prelude::*;

    #[test]
    fn loads_three_failures() {
        let d = load_lifetimes("node,time,event\nsys,1,1\nsys,2,1\nsys,3,1\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].node, "sys");
        assert_eq!(d[0].samples.len(), 3);
        assert!(d[0].samples.iter().all(|s| s.failed));
    }

    #[test]
    fn censored_row_and_grouping() {
        let src = "node,time,event\nmotor,5.2,0\nbelt,1,1\nmotor,6,1\n";
        let d = load_lifetimes(src.as_bytes()).unwrap();
        assert_eq!(d[0].node, "motor");
        assert_eq!(d[0].samples[0], LifetimeSample::censored(5.2).unwrap());
        assert_eq!(d[1].node, "belt");
        assert_eq!(d[0].samples.len(), 2);
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        let err =
            load_lifetimes("node,time,event\nmotor,1,1\nmotor,-1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 3, .. }), "{err:?}");
        let err = load_lifetimes("node,time,event\nmotor,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
        let err = load_lifetimes("node,time,event\nmotor,abc,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
        let err = load_lifetimes("node,time\nmotor,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 1, .. }));
        let err = load_lifetimes("node,time,event\nmotor,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn save_then_load_is_stable() {
        let src = "node,time,event\nmotor,5.2,0\nmotor,6,1\nbelt,0.125,1\n";
        let d = load_lifetimes(src.as_bytes()).unwrap();
        let mut buf = Vec::new();
        save_lifetimes(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), src);
        assert_eq!(load_lifetimes(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn prior_spec() {
        let src = "node,time,cdf,precision\nh,1,0.3333333333333333,5\nh,2,0.6666666666666666,5\nh,3,1,5\n";
        let p = load_prior_spec(src.as_bytes()).unwrap();
        assert_eq!(p["h"].precision(), &[5.0, 5.0, 5.0]);
        assert!((p["h"].mean(1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let zero = "node,time,cdf,precision\nz,1,0.5,0\nz,2,1,0\n";
        assert_eq!(
            load_prior_spec(zero.as_bytes()).unwrap()["z"].precision(),
            &[0.0, 0.0]
        );

        let varying = "node,time,cdf,precision\nv,1,0.5,2\nv,2,1,7\n";
        assert_eq!(
            load_prior_spec(varying.as_bytes()).unwrap()["v"].precision(),
            &[2.0, 7.0]
        );

        let decreasing = "node,time,cdf,precision\nd,1,0.5,1\nd,2,0.4,1\nd,3,1,1\n";
        assert!(load_prior_spec(decreasing.as_bytes()).is_err());
        let short = "node,time,cdf,precision\nd,1,0.5,1\n";
        assert!(load_prior_spec(short.as_bytes()).is_err());
        let negative = "node,time,cdf,precision\nd,1,1,-1\n";
        assert!(load_prior_spec(negative.as_bytes()).is_err());
    }

    #[test]
    fn csv_export() {
        let samples: Vec<_> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&t| LifetimeSample::failure(t).unwrap())
            .collect();
        let post = posterior_update(&BetaStacyProcess::noninformative(), &samples).unwrap();
        let curve = CurveExport::from_process(&post, 0.95).unwrap();
        let mut buf = Vec::new();
        write_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CURVE_HEADER);
        assert!(
            lines[1].starts_with("1,0.333333333333,0.166666666667,"),
            "{}",
            lines[1]
        );
        assert!(lines[3].ends_with(",1,1,1,1,3,terminal"), "{}", lines[3]);

        let mut buf = Vec::new();
        write_csv(&CurveExport::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CURVE_HEADER}\n"));
    }

    #[test]
    fn truth_roundtrip() {
        let pts = vec![(0.5, 0.0), (1.0, 0.25), (2.0, 0.75)];
        let mut buf = Vec::new();
        save_truth(&pts, &mut buf).unwrap();
        assert_eq!(load_truth(buf.as_slice()).unwrap(), pts);
        assert!(load_truth("t,cdf\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig12(3.0), "3");
        assert_eq!(sig12(1234.5), "1234.5");
        assert_eq!(sig12(1e12), "1e+12");
        assert_eq!(sig12(1.5e-7), "1.5e-07");
        assert_eq!(sig12(-0.25), "-0.25");
        assert_eq!(sig12(0.0001), "0.0001");
    }

    proptest! {
        #[test]
        fn sig12_parses_back_within_rounding(x in -1e15f64..1e15) {
            let y: f64 = sig12(x).parse().unwrap();
            prop_assert!((x - y).abs() <= 1e-11 * x.abs());
        }
    }
}
