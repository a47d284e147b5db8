use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::estimators::RatioCurve;
use crate::tail_analysis::TailVerdict;

use super::{CurveItem, ReportBundle};

pub const CSV_HEADER: &str = "x,n_effective,point,ci_low,ci_high,target";

/// 17 significant digits, so every `f64` parses back to itself.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn ratio_csv(c: &RatioCurve) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for i in 0..c.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            format_number(c.x_grid[i]),
            c.n_effective[i],
            format_number(c.point[i]),
            format_number(c.ci_low(i)),
            format_number(c.ci_high(i)),
            format_number(c.target)
        );
    }
    s
}

// Deterministic ratios: no sampling, so the interval collapses to the point.
fn verdict_csv(v: &TailVerdict) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (x, r) in v.grid.iter().zip(&v.ratios) {
        let r = format_number(*r);
        let _ = writeln!(s, "{},0,{r},{r},{r},{}", format_number(*x), format_number(v.target));
    }
    s
}

fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' { ch } else { '_' })
        .collect();
    format!("{index:02}_{clean}.csv")
}

/// Writes `report.json` and one CSV per curve into `out_dir`, returning the
/// paths written (report first).
pub fn render_tables(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut tables: Vec<(String, String)> = Vec::new();
    for item in &bundle.curves {
        match item {
            CurveItem::Ratio(c) => tables.push((c.name.clone(), ratio_csv(c))),
            CurveItem::TailVerdict(v) => tables.push((format!("tail_verdict_{:?}", v.property).to_lowercase(), verdict_csv(v))),
            CurveItem::Ladder(l) => {
                tables.push((l.window_ratio.name.clone(), ratio_csv(&l.window_ratio)));
                tables.push((l.t2_window_ratio.name.clone(), ratio_csv(&l.t2_window_ratio)));
            }
        }
    }
    let report = out_dir.join("report.json");
    let mut json = bundle.to_json()?;
    json.push('\n');
    fs::write(&report, json)?;
    let mut paths = vec![report];
    for (i, (name, body)) in tables.into_iter().enumerate() {
        let path = out_dir.join(file_stem(i, &name));
        fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}
