//! CSV rendering. Floats use Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fmt::Write;

use crate::analysis::AttractorCloud;
use crate::dynamics::Trajectory;
use crate::lyapunov_perron::ManifoldChart;
use crate::randomness::OuProcess;
use crate::spectral::StateVector;

fn mode_header(prefix: &str, from: usize, to: usize) -> String {
    (from..=to).map(|j| format!("{prefix}_{j}")).collect::<Vec<_>>().join(",")
}

fn push_row(out: &mut String, lead: &[f64], values: &[f64]) {
    let mut first = true;
    for v in lead.iter().chain(values) {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{v}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

/// Columns `t, mode_1..mode_N`.
pub fn ou_csv(z: &OuProcess) -> String {
    let mut out = format!("t,{}\n", mode_header("mode", 1, z.modes()));
    for (t, row) in z.rows() {
        push_row(&mut out, &[t], row);
    }
    out
}

/// Columns `t, mode_1..mode_N`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let modes = traj.states.first().map_or(0, |s| s.len());
    let mut out = format!("t,{}\n", mode_header("mode", 1, modes));
    for (i, st) in traj.states.iter().enumerate() {
        push_row(&mut out, &[traj.time(i)], st);
    }
    out
}

/// Columns `x_1..x_n, q_{n+1}..q_N, residual`.
pub fn chart_csv(chart: &ManifoldChart) -> String {
    let n = chart.certificate.n;
    let total = chart.points.first().map_or(n, |p| p.x.len());
    let mut out = format!(
        "{},{},residual\n",
        mode_header("x", 1, n),
        mode_header("q", n + 1, total)
    );
    for p in &chart.points {
        let mut row: Vec<f64> = p.x[..n].to_vec();
        row.extend_from_slice(&p.q[n..]);
        row.push(p.residual);
        push_row(&mut out, &[], &row);
    }
    out
}

/// Columns `mode_1..mode_N`.
pub fn points_csv(points: &[StateVector]) -> String {
    let modes = points.first().map_or(0, |s| s.len());
    let mut out = format!("{}\n", mode_header("mode", 1, modes));
    for p in points {
        push_row(&mut out, &[], p);
    }
    out
}

pub fn cloud_csv(cloud: &AttractorCloud) -> String {
    points_csv(&cloud.points)
}

/// Columns `t, <names...>` for curves sampled at `i·h`.
pub fn curves_csv(h: f64, names: &[&str], curves: &[&[f64]]) -> String {
    let mut out = format!("t,{}\n", names.join(","));
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..len {
        let row: Vec<f64> = curves.iter().map(|c| c[i]).collect();
        push_row(&mut out, &[h * i as f64], &row);
    }
    out
}
