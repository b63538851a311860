//! Subcommand implementations. Each command writes its files under the output
//! directory and returns whether every check it ran passed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use rim_core::analysis::{
    ap_defect, containment_bound, containment_defect, fitted_decay, invariance_defect, lipschitz_report,
    periodicity_defect, pullback_attractor,
};
use rim_core::export;
use rim_core::forcing::scan_near_period;
use rim_core::lyapunov_perron::{build_chart, gap_scan, GapScanRow};
use rim_core::{
    DefectKind, DefectReport, Error, InvarianceOptions, LpSolver, ManifoldChart, StateVector, TrackingResult,
    TrackingSolver,
};

use crate::config::{ConfigError, RunConfig, Setup};
use crate::svg::{self, Scale, Series};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Certificate(_) => 3,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::GapViolated { .. } | Error::CertificateViolation(_) => Failure::Certificate(e.to_string()),
            Error::Instability { .. } | Error::Range(_) | Error::Validation(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub type CmdResult = Result<Outcome, Failure>;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// A resolved config plus where and how to stamp outputs.
pub struct Ctx {
    pub cfg: RunConfig,
    pub hash: String,
    pub out: PathBuf,
}

impl Ctx {
    pub fn new(cfg: RunConfig, out: &Path) -> Self {
        Ctx {
            hash: cfg.hash(),
            cfg,
            out: out.to_path_buf(),
        }
    }

    fn seed(&self) -> u64 {
        self.cfg.noise.seed
    }

    fn stamp(&self) -> String {
        format!("config_sha256={} seed={}", self.hash, self.seed())
    }

    fn write(&self, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<(), Failure> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    }

    fn write_csv(&self, name: &str, csv: &str, files: &mut Vec<PathBuf>) -> Result<(), Failure> {
        self.write(name, &format!("# {}\n{csv}", self.stamp()), files)
    }

    fn write_json<T: Serialize>(
        &self,
        name: &str,
        command: &str,
        pass: bool,
        result: &T,
        files: &mut Vec<PathBuf>,
    ) -> Result<(), Failure> {
        let doc = json!({
            "command": command,
            "config_sha256": self.hash,
            "seed": self.seed(),
            "pass": pass,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
        text.push('\n');
        self.write(name, &text, files)
    }
}

fn gap_table(rows: &[GapScanRow]) -> String {
    let mut out = format!("{:>4}  {:>5}  {:>14}  {:>12}  {:>8}\n", "n", "pass", "margin", "mu", "delta");
    for r in rows {
        out.push_str(&format!(
            "{:>4}  {:>5}  {:>14.6e}  {:>12.6}  {:>8.4}\n",
            r.n,
            if r.pass { "yes" } else { "no" },
            r.margin,
            r.mu,
            r.delta
        ));
    }
    out
}

pub fn gap_scan_cmd(ctx: &Ctx) -> CmdResult {
    let s = ctx.cfg.spectrum()?;
    let rows = gap_scan(&s, ctx.cfg.nonlinearity.lipschitz, ctx.cfg.certificate.k)?;
    let first = rows.iter().find(|r| r.pass).map(|r| r.n);
    let mut files = Vec::new();
    let table = gap_table(&rows);
    ctx.write("gap_scan.txt", &format!("# {}\n{table}", ctx.stamp()), &mut files)?;
    ctx.write_json(
        "gap_scan.json",
        "gap-scan",
        true,
        &json!({ "first_passing_n": first, "rows": rows }),
        &mut files,
    )?;
    let summary = match first {
        Some(n) => format!("{table}first passing n = {n}"),
        None => format!("{table}no n passes"),
    };
    Ok(Outcome {
        pass: true,
        files,
        summary,
    })
}

fn chart_svg(ctx: &Ctx, chart: &ManifoldChart) -> String {
    let n = chart.certificate.n;
    let total = chart.points.first().map_or(n, |p| p.x.len());
    if n == 1 {
        let names: Vec<String> = (n + 1..=total.min(n + 3)).map(|j| format!("m_{j}")).collect();
        let series: Vec<Series<'_>> = names
            .iter()
            .enumerate()
            .map(|(i, name)| Series {
                name,
                points: chart.points.iter().map(|p| (p.x[0], p.q[n + i])).collect(),
            })
            .collect();
        svg::line_plot("manifold graph", &ctx.stamp(), "x_1", "m(x)", &series, Scale::Linear)
    } else {
        let res: Vec<f64> = chart.points.iter().map(|p| p.residual).collect();
        svg::log_histogram("fixed-point residuals", &ctx.stamp(), "log10 residual", &res, 10)
    }
}

fn chart_meta(ctx: &Ctx, setup: &Setup, chart: &ManifoldChart) -> Value {
    json!({
        "tau": chart.tau,
        "h": chart.h,
        "t_back": chart.t_back,
        "t_fwd": setup.t_fwd,
        "tol": chart.tol,
        "certificate": chart.certificate,
        "points": chart.points.len(),
        "max_residual": chart.max_residual(),
        "lipschitz_estimate": chart.lipschitz_estimate,
        "noise_seed": ctx.seed(),
    })
}

fn make_chart(ctx: &Ctx, setup: &Setup) -> Result<ManifoldChart, Failure> {
    let solver = LpSolver::new(&setup.model, &setup.ou, ctx.cfg.numerics.tau, setup.cert, setup.t_back)?;
    Ok(build_chart(&solver, &ctx.cfg.chart_grid(), ctx.cfg.numerics.tol)?)
}

pub fn build_manifold_cmd(ctx: &Ctx) -> CmdResult {
    let setup = Setup::build(&ctx.cfg)?;
    let chart = make_chart(ctx, &setup)?;
    let tol = ctx.cfg.numerics.tol;
    let pass = chart.max_residual() <= tol;
    let mut files = Vec::new();
    ctx.write_csv("chart.csv", &export::chart_csv(&chart), &mut files)?;
    ctx.write_json("chart.json", "build-manifold", pass, &chart_meta(ctx, &setup, &chart), &mut files)?;
    ctx.write("chart.svg", &chart_svg(ctx, &chart), &mut files)?;
    Ok(Outcome {
        pass,
        files,
        summary: format!(
            "chart: {} points, max residual {:.3e} (tol {tol:.1e}), lipschitz {:.4}",
            chart.points.len(),
            chart.max_residual(),
            chart.lipschitz_estimate
        ),
    })
}

fn tracking_runs(ctx: &Ctx, setup: &Setup) -> Result<Vec<TrackingResult>, Failure> {
    let lp = LpSolver::new(&setup.model, &setup.ou, ctx.cfg.numerics.tau, setup.cert, setup.t_back)?;
    let solver = TrackingSolver::new(&lp, setup.t_fwd)?;
    let tol = ctx.cfg.numerics.tol;
    let starts = ctx.cfg.tracking_points();
    let mut out = Vec::with_capacity(starts.len());
    for u0 in &starts {
        out.push(solver.track_phi(u0, tol)?);
    }
    Ok(out)
}

/// Worst ratio of decay curve to its envelope (with the `O(h)` factor and
/// the tolerance floor); `≤ 1` means the envelope holds everywhere.
fn tracking_report(ctx: &Ctx, setup: &Setup, runs: &[TrackingResult]) -> DefectReport {
    let s = &setup.model.spectrum;
    let h = ctx.cfg.numerics.h;
    let tol = ctx.cfg.numerics.tol;
    let slack = 1.0 + 10.0 * h * s.lambda(setup.cert.n + 1);
    let mut worst: f64 = 0.0;
    let mut slope: f64 = f64::NEG_INFINITY;
    for r in runs {
        for (i, c) in r.decay_curve.iter().enumerate() {
            let env = (r.prefactor * slack + tol) * (-r.rate * h * i as f64).exp();
            worst = worst.max(c / env);
        }
        if r.fitted_slope.is_finite() {
            slope = slope.max(r.fitted_slope);
        }
    }
    DefectReport::new(DefectKind::Tracking, worst, Some(1.0))
        .with("samples", runs.len() as f64)
        .with("mu", setup.cert.mu)
        .with("delta", setup.cert.delta)
        .with("max_fitted_slope", slope)
        .with("max_graph_residual", runs.iter().map(|r| r.graph_residual).fold(0.0, f64::max))
        .with("t_fwd", setup.t_fwd)
}

fn periodicity_reports(ctx: &Ctx, setup: &Setup) -> Result<Vec<DefectReport>, Failure> {
    let period = ctx
        .cfg
        .forcing
        .period
        .ok_or_else(|| Failure::Config("forcing.period: periodicity check needs a declared period".into()))?;
    let v = &ctx.cfg.verify;
    let grid = ctx.cfg.chart_grid();
    v.periodicity_taus
        .iter()
        .map(|&tau| {
            Ok(periodicity_defect(
                &setup.model,
                &setup.ou,
                setup.cert,
                setup.t_back,
                tau,
                period,
                &grid,
                ctx.cfg.numerics.tol,
                v.periodicity_slack,
            )?)
        })
        .collect()
}

fn ap_report(ctx: &Ctx, setup: &Setup) -> Result<Option<DefectReport>, Failure> {
    let v = &ctx.cfg.verify;
    let s = &setup.model.spectrum;
    let tau0 = match (v.ap_tau0, v.ap_scan) {
        (Some(t), _) => t,
        (None, Some([lo, hi])) => scan_near_period(&setup.model.forcing, s, s.alpha(), lo, hi)?.0,
        (None, None) => return Ok(None),
    };
    let r = ap_defect(
        &setup.model,
        &setup.ou,
        setup.cert,
        setup.t_back,
        ctx.cfg.numerics.tau,
        tau0,
        &ctx.cfg.chart_grid(),
        ctx.cfg.numerics.tol,
    )?;
    Ok(Some(r))
}

struct Containment {
    reports: Vec<DefectReport>,
    cloud_points: Vec<StateVector>,
    slope: Option<f64>,
}

fn containment_runs(ctx: &Ctx, setup: &Setup) -> Result<Containment, Failure> {
    let nm = &ctx.cfg.numerics;
    let ens = ctx.cfg.ensemble();
    let lp = LpSolver::new(&setup.model, &setup.ou, nm.tau, setup.cert, setup.t_back)?;
    let mut reports = Vec::new();
    let mut cloud_points = Vec::new();
    for &t in &nm.pullback_times {
        let cloud = pullback_attractor(&setup.model, &setup.ou, nm.tau, t, &ens)?;
        let bound = if setup.cert.supports_tracking() {
            Some(containment_bound(&setup.model, &setup.ou, setup.cert, setup.t_back, nm.tau, t, &ens, nm.tol)?)
        } else {
            None
        };
        reports.push(containment_defect(&lp, &cloud, nm.tol, bound)?);
        cloud_points = cloud.points;
    }
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    Ok(Containment {
        slope: fitted_decay(&nm.pullback_times, &values),
        reports,
        cloud_points,
    })
}

pub fn verify_cmd(ctx: &Ctx) -> CmdResult {
    let setup = Setup::build(&ctx.cfg)?;
    let v = &ctx.cfg.verify;
    let tol = ctx.cfg.numerics.tol;
    let lp = LpSolver::new(&setup.model, &setup.ou, ctx.cfg.numerics.tau, setup.cert, setup.t_back)?;
    let chart = build_chart(&lp, &ctx.cfg.chart_grid(), tol)?;
    let opts = InvarianceOptions {
        flow_substeps: v.flow_substeps,
        c_inv: v.c_inv,
    };
    let mut reports = vec![
        invariance_defect(&lp, &chart, v.invariance_time, opts, tol)?,
        lipschitz_report(&chart, v.lipschitz_slack),
    ];
    let mut skipped = Vec::new();
    if setup.cert.supports_tracking() && v.tracking_samples > 0 {
        let runs = tracking_runs(ctx, &setup)?;
        reports.push(tracking_report(ctx, &setup, &runs));
    } else {
        skipped.push("tracking");
    }
    if v.periodicity {
        reports.extend(periodicity_reports(ctx, &setup)?);
    }
    if let Some(r) = ap_report(ctx, &setup)? {
        reports.push(r);
    }
    let mut containment_slope = None;
    if v.containment {
        let c = containment_runs(ctx, &setup)?;
        containment_slope = c.slope;
        reports.extend(c.reports);
    }
    let pass = reports.iter().all(|r| r.pass);
    let mut files = Vec::new();
    ctx.write_json(
        "verification.json",
        "verify",
        pass,
        &json!({
            "reports": reports,
            "skipped": skipped,
            "containment_fitted_decay": containment_slope,
            "chart": chart_meta(ctx, &setup, &chart),
        }),
        &mut files,
    )?;
    let mut summary = String::new();
    for r in &reports {
        summary.push_str(&format!(
            "{:<20} {:>12.4e}  bound {:>12}  {}\n",
            format!("{:?}", r.kind).to_lowercase(),
            r.value,
            r.bound.map_or("-".into(), |b| format!("{b:.4e}")),
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    summary.push_str(if pass { "all checks passed" } else { "some checks failed" });
    Ok(Outcome { pass, files, summary })
}

/// Keeps about `target` evenly spaced samples of a long curve.
fn thin(curve: &[f64], h: f64, target: usize) -> Vec<(f64, f64)> {
    let stride = (curve.len() / target.max(1)).max(1);
    curve
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i + 1 == curve.len())
        .map(|(i, c)| (h * i as f64, *c))
        .collect()
}

pub fn track_cmd(ctx: &Ctx) -> CmdResult {
    let setup = Setup::build(&ctx.cfg)?;
    let runs = tracking_runs(ctx, &setup)?;
    let report = tracking_report(ctx, &setup, &runs);
    let h = ctx.cfg.numerics.h;
    let mut files = Vec::new();
    let summaries: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "v0": r.v0,
                "v0_star": r.v0_star,
                "x0": r.x0,
                "y0": r.y0,
                "defect": r.defect,
                "prefactor": r.prefactor,
                "rate": r.rate,
                "fitted_slope": r.fitted_slope,
                "iterations": r.iterations,
                "graph_residual": r.graph_residual,
                "envelope_holds": r.envelope_holds,
            })
        })
        .collect();
    ctx.write_json(
        "tracking.json",
        "track",
        report.pass,
        &json!({ "report": report, "runs": summaries, "t_fwd": setup.t_fwd }),
        &mut files,
    )?;
    let envelopes: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| (0..r.decay_curve.len()).map(|i| r.envelope(i)).collect())
        .collect();
    let mut names = Vec::new();
    let mut curves: Vec<&[f64]> = Vec::new();
    for (i, (r, e)) in runs.iter().zip(&envelopes).enumerate() {
        names.push(format!("decay_{}", i + 1));
        names.push(format!("envelope_{}", i + 1));
        curves.push(&r.decay_curve);
        curves.push(e);
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    ctx.write_csv("decay.csv", &export::curves_csv(h, &name_refs, &curves), &mut files)?;
    let series: Vec<Series<'_>> = runs
        .iter()
        .zip(&names.iter().step_by(2).collect::<Vec<_>>())
        .map(|(r, name)| Series {
            name,
            points: thin(&r.decay_curve, h, 400),
        })
        .collect();
    ctx.write(
        "decay.svg",
        &svg::line_plot("tracking decay", &ctx.stamp(), "t", "|xi(t)|", &series, Scale::Log10),
        &mut files,
    )?;
    Ok(Outcome {
        pass: report.pass,
        files,
        summary: format!(
            "tracking: {} samples, worst envelope ratio {:.4}, max fitted slope {:.4} (mu {:.4})",
            runs.len(),
            report.value,
            report.context["max_fitted_slope"],
            setup.cert.mu
        ),
    })
}

pub fn periodicity_cmd(ctx: &Ctx) -> CmdResult {
    let setup = Setup::build(&ctx.cfg)?;
    let reports = periodicity_reports(ctx, &setup)?;
    let pass = reports.iter().all(|r| r.pass);
    let mut files = Vec::new();
    ctx.write_json("periodicity.json", "periodicity", pass, &json!({ "reports": reports }), &mut files)?;
    let worst = reports.iter().map(|r| r.value).fold(0.0, f64::max);
    Ok(Outcome {
        pass,
        files,
        summary: format!("periodicity: {} taus, worst defect {worst:.4e}", reports.len()),
    })
}

pub fn attractor_cmd(ctx: &Ctx) -> CmdResult {
    let setup = Setup::build(&ctx.cfg)?;
    let c = containment_runs(ctx, &setup)?;
    let pass = c.reports.iter().all(|r| r.pass);
    let mut files = Vec::new();
    ctx.write_csv("cloud.csv", &export::points_csv(&c.cloud_points), &mut files)?;
    ctx.write_json(
        "attractor.json",
        "attractor",
        pass,
        &json!({
            "pullback_times": ctx.cfg.numerics.pullback_times,
            "reports": c.reports,
            "fitted_decay": c.slope,
        }),
        &mut files,
    )?;
    let n = setup.cert.n;
    let lp = LpSolver::new(&setup.model, &setup.ou, ctx.cfg.numerics.tau, setup.cert, setup.t_back)?;
    let split = lp.split();
    let graph: Vec<(f64, f64)> = ctx
        .cfg
        .chart_grid()
        .iter()
        .map(|x| {
            let m = lp.tilde_manifold_point(&split.project_p(x), ctx.cfg.numerics.tol)?;
            Ok((x[0], m[n]))
        })
        .collect::<Result<_, Error>>()?;
    let cloud: Vec<(f64, f64)> = c.cloud_points.iter().map(|p| (p[0], p[n])).collect();
    let ylabel = format!("mode {}", n + 1);
    ctx.write(
        "attractor.svg",
        &svg::scatter_plot(
            "pullback cloud and manifold",
            &ctx.stamp(),
            "mode 1",
            &ylabel,
            &[
                Series {
                    name: "cloud",
                    points: cloud,
                },
                Series {
                    name: "graph",
                    points: graph,
                },
            ],
        ),
        &mut files,
    )?;
    let values: Vec<String> = c.reports.iter().map(|r| format!("{:.4e}", r.value)).collect();
    Ok(Outcome {
        pass,
        files,
        summary: format!(
            "containment defects [{}] at pullback times {:?}",
            values.join(", "),
            ctx.cfg.numerics.pullback_times
        ),
    })
}

/// Runs every command into one directory and writes an index.
pub fn report_cmd(ctx: &Ctx) -> CmdResult {
    type Cmd = fn(&Ctx) -> CmdResult;
    let mut steps: Vec<(&str, Cmd)> = vec![
        ("gap-scan", gap_scan_cmd),
        ("build-manifold", build_manifold_cmd),
        ("verify", verify_cmd),
    ];
    let cfg = &ctx.cfg;
    let s = cfg.spectrum()?;
    if cfg.certificate(&s)?.supports_tracking() {
        steps.push(("track", track_cmd));
    }
    if cfg.verify.periodicity {
        steps.push(("periodicity", periodicity_cmd));
    }
    steps.push(("attractor", attractor_cmd));
    let mut index = Vec::new();
    let mut files = Vec::new();
    let mut summary = String::new();
    let mut pass = true;
    for (name, cmd) in steps {
        let o = cmd(ctx)?;
        pass &= o.pass;
        let names: Vec<String> = o
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect();
        index.push(json!({ "command": name, "pass": o.pass, "files": names }));
        summary.push_str(&format!("[{name}] {}\n", o.summary));
        files.extend(o.files);
    }
    ctx.write_json("report.json", "report", pass, &index, &mut files)?;
    summary.push_str(if pass { "report: all passed" } else { "report: failures present" });
    Ok(Outcome { pass, files, summary })
}
