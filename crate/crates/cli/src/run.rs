//! Experiment execution: build systems from a config, integrate, compare,
//! write outputs and assemble the verification report.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use fastslow_core::averaging::AveragedSystem;
use fastslow_core::bundle_geometry::{Chart, PhaseStateFull, PhaseStateReduced};
use fastslow_core::integrators::{
    closeness_report, integrate, integrate_full, integrate_reduced_canonical,
    integrate_reduced_magnetic, ClosenessReport, FullDynamics, IntegratorConfig, MagneticFlow,
    RatioTable, StateLayout, Trajectory,
};
use fastslow_core::lie_poisson::{integrate_euler, EulerSystem, LieAlgebraData};
use fastslow_core::parallel::par_map;
use fastslow_core::quadrature::QuadratureRule;
use fastslow_core::systems::{
    curvature_identity_defect, custom_systems, gaussian_curvature, oscillating_particle_averaged,
    particle_full_system, pendulum_systems, two_harmonic_potential, CustomParams,
    DiskCanonicalFlow, DiskMagnetic, DiskParams, DiskTangentFlow, PendulumParams, SurfaceMetric,
};
use serde_json::{json, Value};

use crate::config::{method_name, Experiment, ExperimentConfig, Format};
use crate::output::{emit_csv, emit_json, emit_text, sweep_csv, trajectory_json};
use crate::report::{Threshold, VerificationReport};
use crate::CliError;

/// Acceptable per-halving ratio of sup errors for first-order closeness.
pub const RATIO_WINDOW: (f64, f64) = (1.5, 3.0);
/// Canonical and magnetic integrations of one averaged system.
pub const CHART_TOL: f64 = 1e-7;
/// Spinning-disk tangent equations against the magnetic reduced flow.
pub const DISK_EQUIVALENCE_TOL: f64 = 1e-6;
pub const CURVATURE_TOL: f64 = 1e-7;
pub const CURVATURE_GRID: usize = 50;
pub const EFFECTIVE_POTENTIAL_TOL: f64 = 1e-10;
pub const PARTICLE_MEANS_TOL: f64 = 1e-10;
pub const EULER_DRIFT_TOL: f64 = 1e-8;
/// Horizon of the chart-equivalence check, in slow time.
pub const CHART_HORIZON: f64 = 10.0;
/// Confining stiffness of the two-harmonic potential.
pub const PARTICLE_STIFFNESS: f64 = 1.0;

/// Quadrature used for the particle's fiber means.
pub fn particle_rule() -> QuadratureRule {
    QuadratureRule::trapezoid(16)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: VerificationReport,
    /// Files written, in write order.
    pub written: Vec<PathBuf>,
}

struct SweepEntry {
    epsilon: f64,
    full: Trajectory,
    reduced: Trajectory,
    closeness: ClosenessReport,
}

struct Writer<'a> {
    cfg: &'a ExperimentConfig,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn metadata(&self, label: &str, extra: Value) -> Value {
        json!({
            "experiment": self.cfg.experiment.name(),
            "trajectory": label,
            "fastslow_version": env!("CARGO_PKG_VERSION"),
            "parallel": fastslow_core::parallel::is_parallel(),
            "config": self.cfg.serialize(),
            "details": extra,
        })
    }

    fn trajectory(&mut self, label: &str, traj: &Trajectory, extra: Value) -> Result<(), CliError> {
        for f in &self.cfg.formats {
            let path = self.cfg.output_dir.join(format!("{label}.{}", f.name()));
            match f {
                Format::Csv => emit_csv(traj, &path)?,
                Format::Json => emit_json(
                    &trajectory_json(traj, self.metadata(label, extra.clone())),
                    &path,
                    false,
                )?,
            }
            self.written.push(path);
        }
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.cfg.output_dir.join(name);
        emit_text(text, &path)?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let path = self.cfg.output_dir.join(name);
        emit_json(value, &path, true)?;
        self.written.push(path);
        Ok(())
    }
}

fn core_err(cfg: &ExperimentConfig, stage: &str) -> impl Fn(fastslow_core::Error) -> CliError {
    let context = format!("{} ({stage})", cfg.experiment);
    move |source| CliError::Core {
        context: context.clone(),
        source,
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Full and averaged runs from the same initial point, compared over the
/// averaging window.
fn sweep_entry<S: FullDynamics>(
    full: &S,
    avg: &AveragedSystem,
    q: Vec<f64>,
    p: Vec<f64>,
    cfg: &ExperimentConfig,
) -> fastslow_core::Result<SweepEntry> {
    let s0 = PhaseStateFull::new(q.clone(), p.clone(), 0.0, full.mu());
    let ft = integrate_full(full, &s0, cfg.horizon_factor, &cfg.integrator)?;
    let rt = integrate_reduced_canonical(
        avg,
        &PhaseStateReduced::canonical(q, p),
        cfg.horizon_factor,
        &cfg.reduced_integrator(),
    )?;
    let closeness = closeness_report(&ft, &rt, full)?;
    Ok(SweepEntry {
        epsilon: full.epsilon(),
        full: ft,
        reduced: rt,
        closeness,
    })
}

/// Sup distance in `(Q, P)` between canonical and magnetic integrations of
/// `avg`, the latter mapped back to the canonical chart.
fn chart_gap(
    avg: &AveragedSystem,
    q: &[f64],
    p: &[f64],
    cfg: &IntegratorConfig,
) -> fastslow_core::Result<f64> {
    let s0 = PhaseStateReduced::canonical(q.to_vec(), p.to_vec());
    let ct = integrate_reduced_canonical(avg, &s0, CHART_HORIZON, cfg)?;
    let mt =
        integrate_reduced_magnetic(avg, &avg.to_chart(&s0, Chart::Magnetic), CHART_HORIZON, cfg)?;
    let l = avg.dim_base;
    Ok(ct.states.iter().zip(&mt.states).fold(0.0, |m, (c, x)| {
        let back = PhaseStateReduced::magnetic(x[..l].to_vec(), x[l..].to_vec()).to_chart(
            Chart::Canonical,
            avg.mu,
            &avg.a0(&x[..l]),
        );
        m.max(sup_dist(c, &[back.q, back.p].concat()))
    }))
}

fn pendulum_params(cfg: &ExperimentConfig, epsilon: f64) -> PendulumParams {
    PendulumParams {
        l: cfg.number("l"),
        g: cfg.number("g"),
        a: cfg.number("a"),
        mu: cfg.number("mu"),
        epsilon,
    }
}

/// Initial `(q, p)` of the sweep experiments.
fn sweep_initial(cfg: &ExperimentConfig) -> (Vec<f64>, Vec<f64>) {
    match cfg.experiment {
        Experiment::Pendulum => {
            let l = cfg.number("l");
            (
                vec![l * cfg.number("theta0")],
                vec![l * cfg.number("omega0")],
            )
        }
        _ => (
            vec![cfg.number("x1"), cfg.number("x2")],
            vec![cfg.number("p1"), cfg.number("p2")],
        ),
    }
}

fn run_sweep_entry(cfg: &ExperimentConfig, eps: f64) -> fastslow_core::Result<SweepEntry> {
    let (q, p) = sweep_initial(cfg);
    match cfg.experiment {
        Experiment::Pendulum => {
            let (full, avg) = pendulum_systems(&pendulum_params(cfg, eps))?;
            sweep_entry(&full, &avg, q, p, cfg)
        }
        Experiment::Particle => {
            let pot = two_harmonic_potential(PARTICLE_STIFFNESS).potential;
            let mu = cfg.number("mu");
            let full = particle_full_system(&pot, eps, mu, &particle_rule());
            let (avg, _) = oscillating_particle_averaged(&pot, eps, mu, &particle_rule())?;
            sweep_entry(&full, &avg, q, p, cfg)
        }
        Experiment::Custom => {
            let (full, avg) = custom_systems(CustomParams {
                b: cfg.number("b"),
                epsilon: eps,
                mu: cfg.number("mu"),
            })?;
            sweep_entry(&full, &avg, q, p, cfg)
        }
        other => unreachable!("{other} is not a sweep experiment"),
    }
}

/// Closed-form checks specific to one sweep experiment, at the first ε.
fn sweep_side_checks(
    cfg: &ExperimentConfig,
    report: &mut VerificationReport,
) -> Result<(), CliError> {
    let eps = cfg.epsilon_sweep[0];
    let (q, p) = sweep_initial(cfg);
    match cfg.experiment {
        Experiment::Pendulum => {
            let params = pendulum_params(cfg, eps);
            let (_, avg) = pendulum_systems(&params).map_err(core_err(cfg, "build"))?;
            let worst = (0..1000).fold(0.0_f64, |m, k| {
                let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / 1000.0;
                m.max(
                    (avg.effective_potential(&[params.l * theta])
                        - params.effective_potential(theta))
                    .abs(),
                )
            });
            report.check(
                "effective potential vs ¼μ²a²sin²θ − gl·cosθ",
                worst,
                Threshold::Below(EFFECTIVE_POTENTIAL_TOL),
            );
        }
        Experiment::Particle => {
            let th = two_harmonic_potential(PARTICLE_STIFFNESS);
            let rule = particle_rule();
            let mut worst = 0.0_f64;
            for i in 0..20 {
                for j in 0..20 {
                    let x = [-1.5 + 3.0 * i as f64 / 19.0, -1.5 + 3.0 * j as f64 / 19.0];
                    let r = fastslow_core::systems::particle_means(&th.potential, &x, &rule);
                    worst = worst.max((r.mean_vv - (th.mean_vv)(&x)).abs());
                    worst = worst.max(sup_dist(&r.mean_sv, &(th.mean_sv)(&x)));
                }
            }
            report.check(
                "fiber means vs closed form",
                worst,
                Threshold::Below(PARTICLE_MEANS_TOL),
            );
            let (avg, _) =
                oscillating_particle_averaged(&th.potential, eps, cfg.number("mu"), &rule)
                    .map_err(core_err(cfg, "build"))?;
            let gap = chart_gap(&avg, &q, &p, &cfg.reduced_integrator())
                .map_err(core_err(cfg, "chart equivalence"))?;
            report.check(
                "chart equivalence (canonical vs magnetic)",
                gap,
                Threshold::Below(CHART_TOL),
            );
        }
        Experiment::Custom => {
            let (_, avg) = custom_systems(CustomParams {
                b: cfg.number("b"),
                epsilon: eps,
                mu: cfg.number("mu"),
            })
            .map_err(core_err(cfg, "build"))?;
            let gap = chart_gap(&avg, &q, &p, &cfg.reduced_integrator())
                .map_err(core_err(cfg, "chart equivalence"))?;
            report.check(
                "chart equivalence (canonical vs magnetic)",
                gap,
                Threshold::Below(CHART_TOL),
            );
        }
        _ => {}
    }
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, w: &mut Writer) -> Result<VerificationReport, CliError> {
    let mut report = VerificationReport::new(cfg.experiment.name());
    let entries = par_map(&cfg.epsilon_sweep, |&eps| run_sweep_entry(cfg, eps))
        .into_iter()
        .zip(&cfg.epsilon_sweep)
        .map(|(r, eps)| r.map_err(core_err(cfg, &format!("ε = {eps}"))))
        .collect::<Result<Vec<_>, _>>()?;
    for e in &entries {
        let c = &e.closeness;
        log::info!(
            "{} ε = {}: sup error {:.6e} over {} samples",
            cfg.experiment,
            e.epsilon,
            c.sup_error,
            c.samples
        );
        let extra = json!({ "epsilon": e.epsilon, "sup_error": c.sup_error });
        w.trajectory(&format!("full_eps{:?}", e.epsilon), &e.full, extra.clone())?;
        w.trajectory(&format!("reduced_eps{:?}", e.epsilon), &e.reduced, extra)?;
    }
    let reports: Vec<ClosenessReport> = entries.into_iter().map(|e| e.closeness).collect();
    w.text("sweep.csv", &sweep_csv(&reports))?;

    let table = RatioTable::new(
        cfg.epsilon_sweep.clone(),
        reports.iter().map(|r| r.sup_error).collect(),
    );
    if table.ratios.is_empty() {
        report.check(
            "sweep length (ratios need two ε)",
            table.epsilons.len() as f64,
            Threshold::AtLeast(2.0),
        );
    }
    for (k, r) in table.ratios.iter().enumerate() {
        report.check(
            format!(
                "error ratio ε={:?} → ε={:?}",
                table.epsilons[k],
                table.epsilons[k + 1]
            ),
            *r,
            Threshold::Within(RATIO_WINDOW.0, RATIO_WINDOW.1),
        );
    }
    sweep_side_checks(cfg, &mut report)?;
    Ok(report)
}

fn run_disk(cfg: &ExperimentConfig, w: &mut Writer) -> Result<VerificationReport, CliError> {
    let mut report = VerificationReport::new(cfg.experiment.name());
    let radius = cfg.number("radius");
    if radius.is_nan() || radius <= 0.0 {
        return Err(core_err(cfg, "build")(fastslow_core::Error::Domain(
            format!("sphere radius must be positive, got {radius}"),
        )));
    }
    let surface = SurfaceMetric::sphere(radius);
    let rect = [(0.2, PI - 0.2), (-PI, PI)];
    let defect = curvature_identity_defect(&surface, rect, CURVATURE_GRID)
        .map_err(core_err(cfg, "curvature"))?;
    report.check(
        "curvature identity d(A·dq) = EG·K dq₁∧dq₂",
        defect,
        Threshold::Below(CURVATURE_TOL),
    );
    let mut k_err = 0.0_f64;
    let at = |r: (f64, f64), n: usize| r.0 + (r.1 - r.0) * (n as f64 + 0.5) / CURVATURE_GRID as f64;
    for i in 0..CURVATURE_GRID {
        for j in 0..CURVATURE_GRID {
            let k = gaussian_curvature(&surface, &[at(rect[0], i), at(rect[1], j)])
                .map_err(core_err(cfg, "curvature"))?;
            k_err = k_err.max((k - 1.0 / (radius * radius)).abs());
        }
    }
    report.check(
        "Gaussian curvature vs 1/R²",
        k_err,
        Threshold::Below(CURVATURE_TOL),
    );

    let disk = DiskParams {
        m: cfg.number("m"),
        i_a: cfg.number("i_a"),
        i_d: cfg.number("i_d"),
        second_form: None,
        mu: cfg.number("mu"),
    };
    disk.validate().map_err(core_err(cfg, "build"))?;
    let q = [cfg.number("q1"), cfg.number("q2")];
    let v = [cfg.number("v1"), cfg.number("v2")];
    let time = cfg.number("time");
    let icfg = &cfg.integrator;
    let tangent = DiskTangentFlow {
        surface: surface.clone(),
        disk: disk.clone(),
    };
    let canon = DiskCanonicalFlow {
        surface: surface.clone(),
        disk: disk.clone(),
    };
    let mag = DiskMagnetic { surface, disk };
    let jobs = ["tangent", "magnetic", "canonical"];
    let trajs = par_map(&jobs, |&job| -> fastslow_core::Result<Trajectory> {
        match job {
            "tangent" => integrate(
                &tangent,
                [q, v].concat(),
                time,
                icfg,
                StateLayout::Tangent { dim_base: 2 },
            ),
            "magnetic" => integrate(
                &MagneticFlow(&mag),
                [q.to_vec(), mag.momentum_of(&q, &v)?].concat(),
                time,
                icfg,
                StateLayout::Reduced {
                    dim_base: 2,
                    chart: Chart::Magnetic,
                },
            ),
            _ => integrate(
                &canon,
                [q.to_vec(), canon.momentum_of(&q, &v)?].concat(),
                time,
                icfg,
                StateLayout::Reduced {
                    dim_base: 2,
                    chart: Chart::Canonical,
                },
            ),
        }
    })
    .into_iter()
    .zip(jobs)
    .map(|(t, job)| t.map_err(core_err(cfg, job)))
    .collect::<Result<Vec<_>, _>>()?;
    let gap = |a: &Trajectory, b: &Trajectory| {
        a.states
            .iter()
            .zip(&b.states)
            .fold(0.0_f64, |m, (x, y)| m.max(sup_dist(&x[..2], &y[..2])))
    };
    report.check(
        "disk equations vs magnetic reduction",
        gap(&trajs[0], &trajs[1]),
        Threshold::Below(DISK_EQUIVALENCE_TOL),
    );
    report.check(
        "chart equivalence (canonical vs magnetic)",
        gap(&trajs[2], &trajs[1]),
        Threshold::Below(CHART_TOL),
    );
    for (job, t) in jobs.iter().zip(&trajs) {
        w.trajectory(job, t, json!({ "time": time }))?;
    }
    Ok(report)
}

fn euler_algebra(cfg: &ExperimentConfig) -> fastslow_core::Result<LieAlgebraData> {
    let name = cfg.text("algebra");
    match LieAlgebraData::builtin(&name) {
        Some(a) => Ok(a),
        None => LieAlgebraData::load(Path::new(&name)),
    }
}

fn run_euler(cfg: &ExperimentConfig, w: &mut Writer) -> Result<VerificationReport, CliError> {
    let mut report = VerificationReport::new(cfg.experiment.name());
    let alg = euler_algebra(cfg).map_err(core_err(cfg, "algebra"))?;
    let sys = EulerSystem::diagonal(alg, &cfg.list("inertia"), cfg.list("shift"))
        .map_err(core_err(cfg, "build"))?;
    let xi0 = cfg.list("xi0");
    let traj = integrate_euler(&sys, &xi0, cfg.number("time"), &cfg.integrator)
        .map_err(core_err(cfg, "integrate"))?;
    report.check(
        "relative energy drift",
        traj.relative_energy_drift(),
        Threshold::Below(EULER_DRIFT_TOL),
    );
    if let Some(c0) = sys.casimir(&xi0) {
        let scale = if c0.abs() > 0.0 { c0.abs() } else { 1.0 };
        report.check(
            "relative Casimir drift",
            traj.momentum_drift() / scale,
            Threshold::Below(EULER_DRIFT_TOL),
        );
    } else {
        log::info!(
            "algebra {} has no registered Casimir; skipping the Casimir check",
            sys.algebra.name()
        );
    }
    w.trajectory("euler", &traj, json!({ "algebra": sys.algebra.name() }))?;
    Ok(report)
}

/// Run `cfg`, writing outputs under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|source| CliError::Io {
        path: cfg.output_dir.display().to_string(),
        source,
    })?;
    log::info!(
        "running {} with {} (dt {}), output in {}",
        cfg.experiment,
        method_name(cfg.integrator.method),
        cfg.integrator.dt,
        cfg.output_dir.display()
    );
    let mut w = Writer {
        cfg,
        written: Vec::new(),
    };
    let report = match cfg.experiment {
        e if e.is_sweep() => run_sweep(cfg, &mut w)?,
        Experiment::Disk => run_disk(cfg, &mut w)?,
        Experiment::Euler => run_euler(cfg, &mut w)?,
        other => unreachable!("{other} has no runner"),
    };
    w.text("config.cfg", &cfg.serialize())?;
    w.text("report.txt", &format!("{report}\n"))?;
    if cfg.formats.contains(&Format::Json) {
        w.json("report.json", &report.to_json())?;
    }
    Ok(RunOutcome {
        report,
        written: w.written,
    })
}
