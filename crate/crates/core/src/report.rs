//! CSV writers. Every file starts with a `#` provenance line naming the tool
//! version and the configuration digest, followed by a header row.

use std::io::Write;

use crate::analysis::{DesignPoint, WrenchSetDump};
use crate::optimize::{ObjectiveGrid, ScaleSweepRow, TiltOptimum};
use crate::sim::SimLog;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# hexarotor <version> config=<digest>`.
pub fn provenance(config_digest: &str) -> String {
    format!("# hexarotor {VERSION} config={config_digest}")
}

fn write_table<W: Write>(
    mut out: W,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "{c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn design_fields(p: &DesignPoint) -> Vec<String> {
    vec![
        num(p.alpha_deg()),
        num(p.beta_deg()),
        num(p.metrics.f_min),
        num(p.metrics.t_min),
        num(p.objective),
    ]
}

/// Objective surface over the `(α, β)` grid, β-major.
pub fn write_grid<W: Write>(out: W, digest: &str, grid: &ObjectiveGrid) -> std::io::Result<()> {
    write_table(
        out,
        &[provenance(digest)],
        &["alpha_deg", "beta_deg", "f_min", "t_min", "zeta", "valid"],
        grid.points.iter().map(|p| {
            let mut row = design_fields(p);
            row.push(p.valid.to_string());
            row
        }),
    )
}

pub fn write_weight_sweep<W: Write>(out: W, digest: &str, rows: &[(f64, TiltOptimum)]) -> std::io::Result<()> {
    write_table(
        out,
        &[provenance(digest)],
        &["c_f", "alpha_deg", "beta_deg", "f_min", "t_min", "zeta", "plateau"],
        rows.iter().map(|(c, o)| {
            let mut row = vec![num(*c)];
            row.extend(design_fields(&o.design));
            row.push(o.plateau.to_string());
            row
        }),
    )
}

pub fn write_scale_sweep<W: Write>(out: W, digest: &str, rows: &[ScaleSweepRow]) -> std::io::Result<()> {
    write_table(
        out,
        &[provenance(digest)],
        &["drag_ratio", "arm_length", "alpha_deg", "beta_deg", "f_min", "t_min", "zeta"],
        rows.iter().map(|r| {
            let mut row = vec![num(r.drag_ratio), num(r.arm_length)];
            row.extend(design_fields(&r.design));
            row
        }),
    )
}

/// Images of the 64 extreme thrust vectors; `force` selects the force or torque set.
pub fn write_wrench_set<W: Write>(out: W, digest: &str, dump: &WrenchSetDump, force: bool) -> std::io::Result<()> {
    let (points, radius, name) = if force {
        (&dump.force_points, dump.metrics.f_min, "f_min")
    } else {
        (&dump.torque_points, dump.metrics.t_min, "t_min")
    };
    write_table(
        out,
        &[provenance(digest), format!("# {name}={radius}")],
        &["s1", "s2", "s3", "s4", "s5", "s6", "x", "y", "z"],
        points.iter().map(|(signs, p)| {
            let mut row: Vec<String> = signs.iter().map(|s| s.to_string()).collect();
            row.extend([num(p.x), num(p.y), num(p.z)]);
            row
        }),
    )
}

pub fn write_sim_log<W: Write>(out: W, digest: &str, log: &SimLog) -> std::io::Result<()> {
    write_table(
        out,
        &[provenance(digest)],
        &SimLog::COLUMNS,
        log.rows.iter().map(|r| r.values().into_iter().map(num).collect()),
    )
}
