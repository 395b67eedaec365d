//! Report, curve, and heatmap writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bathtub::SigmaCurve;
use crate::bounds::{BallModulusParams, BoundReport, ModulusComparison};
use crate::error::Result;
use crate::grid::ScalarField;
use crate::rearrange::RadialProfile;
use crate::spectral::EigenPair;

/// One JSON object per line, in the given order.
pub fn write_reports_jsonl(path: &Path, reports: &[BoundReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    id: &'a str,
    lhs: f64,
    rhs: f64,
    margin: f64,
    pass: bool,
    vacuous: bool,
    advisory: bool,
}

pub fn write_summary_csv(path: &Path, reports: &[BoundReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(SummaryRow {
            id: &r.id,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            pass: r.pass,
            vacuous: r.vacuous,
            advisory: r.advisory,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SigmaRow {
    beta: f64,
    sigma: f64,
    sigma_ball: f64,
    sigma_ball_explicit: Option<f64>,
    argmax_cell: usize,
    argmax_x: f64,
    argmax_y: f64,
    argmax_z: f64,
    level_alpha: f64,
    iterations: usize,
    tied_cells: usize,
}

/// Sigma curve next to the ball moduli of the equal-measure ball.
pub fn write_sigma_curve_csv(path: &Path, curve: &SigmaCurve, ball: &BallModulusParams) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in &curve.points {
        let t = p.beta.min(ball.measure());
        w.serialize(SigmaRow {
            beta: p.beta,
            sigma: p.sigma,
            sigma_ball: ball.radial_sigma_ball(t)?,
            sigma_ball_explicit: ball.paper_sigma_ball(t).ok(),
            argmax_cell: p.argmax_cell,
            argmax_x: p.argmax_center[0],
            argmax_y: p.argmax_center[1],
            argmax_z: p.argmax_center[2],
            level_alpha: p.level_alpha,
            iterations: p.iterations,
            tied_cells: p.tied_cells.len(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_radial_profile_csv(path: &Path, profile: &RadialProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "radius", "value"])?;
    for (k, (r, v)) in profile.radii.iter().zip(&profile.values).enumerate() {
        w.write_record([k.to_string(), r.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EigenRow {
    k: usize,
    lambda: f64,
    residual: f64,
    linf: f64,
    l1: f64,
    rhs_2_14: f64,
    margin: f64,
    pass: bool,
    vacuous: bool,
}

/// `pairs` and `checks` are matched by position.
pub fn write_eigen_report_csv(path: &Path, pairs: &[EigenPair], checks: &[BoundReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (ep, r) in pairs.iter().zip(checks) {
        w.serialize(EigenRow {
            k: ep.k,
            lambda: ep.lambda,
            residual: ep.residual,
            linf: r.lhs,
            l1: ep.u.norm_l1(),
            rhs_2_14: r.rhs,
            margin: r.margin,
            pass: r.pass,
            vacuous: r.vacuous,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_modulus_comparison_csv(path: &Path, rows: &[ModulusComparison]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Cell table: interior index, lattice coordinates, center, value.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let d = field.domain();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cell", "i", "j", "k", "x", "y", "z", "value"])?;
    for (cell, v) in field.values().iter().enumerate() {
        let g = d.grid_coords(cell);
        let x = d.center(cell);
        w.write_record([
            cell.to_string(),
            g[0].to_string(),
            g[1].to_string(),
            g[2].to_string(),
            x[0].to_string(),
            x[1].to_string(),
            x[2].to_string(),
            v.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plain PGM (P2) of a field, scaled so `max |value|` maps to 255. Exterior
/// cells are 0, the top row is the largest `j`. 3D fields show the middle
/// `k` slice.
pub fn pgm_string(field: &ScalarField) -> String {
    let d = field.domain();
    let [nx, ny, nz] = d.extent();
    let k = if d.dim() == 3 { nz / 2 } else { 0 };
    let peak = field.norm_linf();
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    let mut out = format!("P2\n{nx} {ny}\n255\n");
    for j in (0..ny).rev() {
        let row: Vec<String> = (0..nx)
            .map(|i| match d.interior_at([i, j, k]) {
                Some(cell) => ((field.values()[cell].abs() * scale).round() as u8).to_string(),
                None => "0".to_string(),
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(path: &Path, field: &ScalarField) -> Result<()> {
    std::fs::write(path, pgm_string(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_domain, Shape};

    #[test]
    fn pgm_layout() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 8.0).unwrap();
        let f = ScalarField::from_fn(&d, |x| x[0]);
        let s = pgm_string(&f);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "P2");
        assert_eq!(lines[1], "10 10");
        assert_eq!(lines.len(), 3 + 10);
        // Padding row and column are zero; the rightmost interior column is 255.
        assert!(lines[3].split(' ').all(|v| v == "0"));
        let row: Vec<&str> = lines[4].split(' ').collect();
        assert_eq!(row[0], "0");
        assert_eq!(row[8], "255");
    }

    #[test]
    fn csv_and_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let reports = vec![BoundReport::new("a", 1.0, 2.0, 0.0), BoundReport::new("b", 3.0, 2.0, 0.0)];
        let jl = dir.path().join("r.jsonl");
        write_reports_jsonl(&jl, &reports).unwrap();
        let text = std::fs::read_to_string(&jl).unwrap();
        let parsed: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1]["pass"], false);
        let cs = dir.path().join("s.csv");
        write_summary_csv(&cs, &reports).unwrap();
        let mut rd = csv::Reader::from_path(&cs).unwrap();
        assert_eq!(rd.headers().unwrap().iter().take(5).collect::<Vec<_>>(), ["id", "lhs", "rhs", "margin", "pass"]);
        assert_eq!(rd.records().count(), 2);
    }
}
