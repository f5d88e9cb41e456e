//! Command-line driver.
//!
//! `trajectory.csv` has one row per recorded time with the columns
//!
//! `t, mass, E_reg, D_reg, E_BD, D_BD, I2, I2_tilde, I4, Mx0[, Mx1], Mu0[, Mu1], min_q, max_q,`
//! `envelope_lower, envelope_upper, log_sobolev, hessian_intermediate, hessian_final`
//!
//! with every float written as `{:.16e}` (17 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::calculus::{bohm_residual, korteweg_form_gap, shifted_gaussian};
use crate::coeff_file::{self, CoeffFile};
use crate::config::{self, InitialKind, LoadedConfig, Mode};
use crate::continuation::{mollify_initial_data, vanishing_drag_sweep, SweepBase};
use crate::diagnostics::{
    check_hessian_lemma, check_log_sobolev, check_poincare_family, DiagnosticsRecord, MARGIN_NAMES,
};
use crate::error::{QnsError, Result};
use crate::fokker_planck::FpOptions;
use crate::galerkin::{project_initial_velocity, SimState, StepOptions};
use crate::random::{random_density, random_field, random_velocity, rng};
use crate::rescaled::{rescaled_run, tau_solve, RescaledParams};
use crate::run::{simulate, RunSettings};
use crate::spectral::{Frame, GaussianFrame, ScalarField, VectorField};

#[derive(Debug, Parser)]
#[command(
    name = "qns",
    version,
    about = "Quantum Navier-Stokes solver in a harmonic trap"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write the diagnostics trajectory.
    Simulate(RunArgs),
    /// Check the functional inequalities on seeded random fields.
    Verify(RunArgs),
    /// Vanishing-drag continuation study.
    Sweep(RunArgs),
    /// Self-similar rescaled system without trap.
    Rescaled(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    pub fn split(&self) -> (Mode, &RunArgs) {
        match self {
            Command::Simulate(a) => (Mode::Simulate, a),
            Command::Verify(a) => (Mode::Verify, a),
            Command::Sweep(a) => (Mode::Sweep, a),
            Command::Rescaled(a) => (Mode::Rescaled, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    AuditViolation = 1,
    SolverFailure = 2,
    ConfigError = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::AuditViolation => "audit_violation",
            Status::SolverFailure => "solver_failure",
            Status::ConfigError => "config_error",
        }
    }

    fn of_error(e: &QnsError) -> Status {
        match e {
            QnsError::Config { .. }
            | QnsError::CoeffFile { .. }
            | QnsError::InvalidParameter(_) => Status::ConfigError,
            _ => Status::SolverFailure,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub output_dir: Option<PathBuf>,
    pub message: String,
}

/// Run one subcommand; never panics on bad input.
pub fn execute(mode: Mode, args: &RunArgs) -> Outcome {
    let fail = |e: QnsError, dir: Option<PathBuf>| Outcome {
        status: Status::of_error(&e),
        output_dir: dir,
        message: e.to_string(),
    };
    let mut loaded = match config::load(&args.config) {
        Ok(l) => l,
        Err(e) => return fail(e, None),
    };
    if let Err(e) = loaded.config.check_mode(mode, &loaded.text) {
        return fail(e, None);
    }
    if let Some(s) = args.seed {
        loaded.config.seed = s;
    }
    let dir = match (&args.output_dir, &loaded.config.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => loaded.base_dir.join(d),
        (None, None) => PathBuf::from(format!("qns-{}", mode.name())),
    };
    loaded.config.output_dir = Some(dir.clone());
    if let Err(e) = fs::create_dir_all(&dir) {
        return fail(e.into(), Some(dir));
    }
    let result = match mode {
        Mode::Simulate => run_simulate(&loaded, &dir),
        Mode::Verify => run_verify(&loaded, &dir),
        Mode::Sweep => run_sweep(&loaded, &dir),
        Mode::Rescaled => run_rescaled(&loaded, &dir),
    };
    match result {
        Ok((status, message)) => Outcome {
            status,
            output_dir: Some(dir),
            message,
        },
        Err(e) => fail(e, Some(dir)),
    }
}

fn step_options(l: &LoadedConfig) -> StepOptions {
    let s = &l.config.solver;
    StepOptions {
        picard_tol: s.picard_tol,
        max_sweeps: s.max_sweeps,
        floor: s.floor,
        fp: FpOptions { floor: s.floor },
    }
}

fn frame_for(l: &LoadedConfig, sigma: f64) -> Result<Frame> {
    let f = &l.config.frame;
    match f.quad_order {
        Some(qo) => GaussianFrame::with_sigma(sigma, f.dim, f.degree, qo),
        None => GaussianFrame::with_default_quadrature(sigma, f.dim, f.degree),
    }
}

fn pad(v: &Option<Vec<f64>>) -> [f64; 2] {
    let mut out = [0.0; 2];
    if let Some(v) = v {
        for (o, x) in out.iter_mut().zip(v) {
            *o = *x;
        }
    }
    out
}

/// Initial density and velocity described by the configuration, normalized to unit
/// mass and mollified when asked.
pub fn initial_data(l: &LoadedConfig, frame: &Frame) -> Result<(ScalarField, VectorField)> {
    let c = &l.config;
    let init = &c.initial;
    let mut file_u = None;
    let q = match init.kind {
        InitialKind::Ground => ScalarField::constant(frame, 1.0),
        InitialKind::ShiftedGaussian => shifted_gaussian(frame, pad(&init.shift)),
        InitialKind::Perturbed => {
            let b =
                frame
                    .index_of(init.mode.unwrap_or([1, 0]))
                    .ok_or_else(|| QnsError::Config {
                        line: config::locate(&l.text, "initial", "mode"),
                        field: "initial.mode".into(),
                        message: "not in the basis".into(),
                    })?;
            let amp = init.amplitude.unwrap_or(0.0);
            ScalarField::constant(frame, 1.0).map_coeffs(|k, v| if k == b { v + amp } else { v })
        }
        InitialKind::Random => random_density(frame, &mut rng(c.seed)),
        InitialKind::File => {
            let path = l.initial_path().expect("checked at load");
            let bytes = fs::read(&path)?;
            let (q, u) = coeff_file::parse(&bytes)?.to_fields(frame)?;
            file_u = u;
            q
        }
    };
    let mass = q.integral();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(QnsError::Config {
            line: config::locate(&l.text, "initial", "kind"),
            field: "initial".into(),
            message: format!("initial density has mass {mass}"),
        });
    }
    let q = q.scale(1.0 / mass);
    let u = match file_u {
        Some(u) => u,
        None => {
            let off = pad(&c.velocity.offset);
            let s = c.velocity.slope;
            let nodal: Vec<[f64; 2]> = frame
                .points()
                .iter()
                .map(|x| [off[0] + s * x[0], off[1] + s * x[1]])
                .collect();
            project_initial_velocity(&q, &nodal)?
        }
    };
    match init.mollify {
        Some(n) => mollify_initial_data(&q, &u, n),
        None => Ok((q, u)),
    }
}

fn positive_state(l: &LoadedConfig, q: ScalarField, u: VectorField) -> Result<SimState> {
    let fr = q.frame().clone();
    let min = q
        .nodal()
        .iter()
        .zip(fr.resolved())
        .filter(|(_, r)| **r)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    if !(min > l.config.solver.floor) {
        return Err(QnsError::Config {
            line: config::locate(&l.text, "initial", "kind"),
            field: "initial".into(),
            message: format!(
                "initial density reaches {min:e} on the resolved nodes; set initial.mollify"
            ),
        });
    }
    SimState::new(q, u)
}

pub fn csv_header(dim: usize) -> String {
    let mut cols: Vec<String> = [
        "t", "mass", "E_reg", "D_reg", "E_BD", "D_BD", "I2", "I2_tilde", "I4",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((0..dim).map(|a| format!("Mx{a}")));
    cols.extend((0..dim).map(|a| format!("Mu{a}")));
    cols.push("min_q".into());
    cols.push("max_q".into());
    cols.extend(MARGIN_NAMES.iter().map(|s| s.to_string()));
    cols.join(",")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s
}

pub fn csv_row(r: &DiagnosticsRecord, dim: usize) -> String {
    let m = &r.moments;
    let mut v = vec![
        r.t, m.mass, r.energy.e, r.energy.d, r.bd.e, r.bd.d, m.i2, m.i2_tilde, m.i4,
    ];
    v.extend(&m.mx[..dim]);
    v.extend(&m.mu[..dim]);
    v.push(r.min_q);
    v.push(r.max_q);
    v.extend(r.margins());
    join(v)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn run_simulate(l: &LoadedConfig, dir: &Path) -> Result<(Status, String)> {
    let c = &l.config;
    let p = c.model_params()?;
    let frame = frame_for(l, p.sigma()?)?;
    let (q, u) = initial_data(l, &frame)?;
    let initial = positive_state(l, q, u)?;
    let time = c.time.expect("checked by check_mode");
    let mut settings = RunSettings::new(time.dt, time.t_final);
    settings.every = time.every;
    settings.step = step_options(l);
    settings.keep_states = c.solver.snapshots;
    let out = simulate(initial, &p, &settings)?;

    let dim = frame.dim();
    let mut csv = csv_header(dim);
    csv.push('\n');
    for r in &out.records {
        csv.push_str(&csv_row(r, dim));
        csv.push('\n');
    }
    fs::write(dir.join("trajectory.csv"), csv)?;
    if c.solver.snapshots {
        let snap = dir.join("snapshots");
        fs::create_dir_all(&snap)?;
        for s in &out.states {
            fs::write(
                snap.join(format!("step_{:08}.coef", s.step)),
                CoeffFile::from_fields(&s.q, Some(&s.u)).to_text(),
            )?;
        }
    }

    let a = &c.audit;
    let inequality = out.audit(&p, a.tol)?;
    let mass_drift = out
        .records
        .iter()
        .map(|r| (r.moments.mass - 1.0).abs())
        .fold(0.0, f64::max);
    let min_e_bd = out
        .records
        .iter()
        .map(|r| r.bd.e)
        .fold(f64::INFINITY, f64::min);
    let mut worst = [f64::INFINITY; 5];
    for r in &out.records {
        for (w, m) in worst.iter_mut().zip(r.margins()) {
            *w = w.min(m);
        }
    }
    let margins_ok = worst.iter().all(|w| *w >= -a.margin_tol);
    let checks = [
        ("energy_inequality", inequality.energy_excess <= a.tol),
        ("bd_inequality", inequality.bd_excess <= a.tol),
        ("mass", mass_drift <= a.mass_tol),
        ("bd_nonnegative", min_e_bd >= -a.margin_tol),
        ("margins", margins_ok),
    ];
    let audits_ok = checks.iter().all(|(_, ok)| *ok);
    let status = match (&out.failure, audits_ok) {
        (Some(_), _) => Status::SolverFailure,
        (None, false) => Status::AuditViolation,
        (None, true) => Status::Ok,
    };
    let last = out
        .records
        .last()
        .expect("initial record is always present");
    let summary = json!({
        "mode": "simulate",
        "status": status.label(),
        "failure": out.failure.as_ref().map(|e| e.to_string()),
        "steps": out.last.step,
        "t_reached": out.last.t,
        "records": out.records.len(),
        "sigma": frame.sigma(),
        "final": {
            "t": last.t,
            "mass": last.moments.mass,
            "E_reg": last.energy.e,
            "E_BD": last.bd.e,
            "I2_tilde": last.moments.i2_tilde,
            "Mx": &last.moments.mx[..dim],
            "Mu": &last.moments.mu[..dim],
            "min_q": last.min_q,
            "max_q": last.max_q,
            "q_coefficients": out.last.q.coeffs(),
        },
        "audit": {
            "passed": audits_ok,
            "checks": checks.iter().map(|(k, ok)| (k.to_string(), json!(ok))).collect::<serde_json::Map<_, _>>(),
            "energy_excess": inequality.energy_excess,
            "bd_excess": inequality.bd_excess,
            "tol": a.tol,
            "max_mass_drift": mass_drift,
            "min_E_BD": min_e_bd,
            "worst_margins": MARGIN_NAMES.iter().zip(worst).map(|(k, v)| (k.to_string(), finite_or_null(v))).collect::<serde_json::Map<_, _>>(),
        },
        "config": c,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    let msg = match &out.failure {
        Some(e) => format!("solver stopped at t = {}: {e}", out.last.t),
        None if audits_ok => format!("completed {} steps, audits passed", out.last.step),
        None => {
            let failed: Vec<&str> = checks
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|(k, _)| *k)
                .collect();
            format!(
                "completed {} steps, audit violations: {}",
                out.last.step,
                failed.join(", ")
            )
        }
    };
    Ok((status, msg))
}

/// Per-sample margins of the verification suite. Residual-type checks enter as
/// `-residual`, so every entry is nonnegative when the statement holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMargins {
    pub log_sobolev: f64,
    pub hessian_intermediate: f64,
    pub hessian_final: f64,
    pub bohm: f64,
    pub korteweg: f64,
}

pub const SAMPLE_MARGIN_NAMES: [&str; 5] = [
    "log_sobolev",
    "hessian_intermediate",
    "hessian_final",
    "bohm",
    "korteweg",
];

impl SampleMargins {
    pub fn of(q: &ScalarField, kappa: f64, floor: f64) -> Result<Self> {
        let h = check_hessian_lemma(q, floor)?;
        Ok(SampleMargins {
            log_sobolev: check_log_sobolev(q, floor)?,
            hessian_intermediate: h.intermediate,
            hessian_final: h.last,
            bohm: -bohm_residual(q, kappa, floor)?,
            korteweg: -korteweg_form_gap(q, floor)?,
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [
            self.log_sobolev,
            self.hessian_intermediate,
            self.hessian_final,
            self.bohm,
            self.korteweg,
        ]
    }
}

fn run_verify(l: &LoadedConfig, dir: &Path) -> Result<(Status, String)> {
    let c = &l.config;
    let p = c.model_params()?;
    let frame = frame_for(l, p.sigma()?)?;
    let vc = c.verify.clone().unwrap_or_default();
    let floor = c.solver.floor;
    let tol = c.audit.margin_tol;
    let mut g = rng(c.seed);

    let mut rows: Vec<(String, SampleMargins)> = Vec::new();
    let mut scalars = Vec::new();
    let mut vectors = Vec::new();
    for i in 0..vc.n_samples {
        let q = random_density(&frame, &mut g);
        rows.push((
            format!("random_{i}"),
            SampleMargins::of(&q, p.kappa, floor)?,
        ));
        scalars.push(random_field(&frame, &mut g));
        vectors.push(random_velocity(&frame, &mut g)?);
    }
    let ground = SampleMargins::of(&ScalarField::constant(&frame, 1.0), p.kappa, floor)?;
    rows.push(("ground".into(), ground));
    let tilt = match &vc.tilt {
        Some(t) => pad(&Some(t.clone())),
        None => [
            0.25 * frame.sigma(),
            if frame.dim() == 2 {
                -0.125 * frame.sigma()
            } else {
                0.0
            },
        ],
    };
    let tilt_margins = SampleMargins::of(&shifted_gaussian(&frame, tilt), p.kappa, floor)?;
    rows.push(("tilt".into(), tilt_margins));
    let poincare = check_poincare_family(&scalars, &vectors);

    let mut csv = format!("sample,{}\n", SAMPLE_MARGIN_NAMES.join(","));
    let mut worst = [f64::INFINITY; 5];
    for (name, m) in &rows {
        let _ = writeln!(csv, "{name},{}", join(m.values()));
        for (w, v) in worst.iter_mut().zip(m.values()) {
            *w = w.min(v);
        }
    }
    fs::write(dir.join("margins.csv"), csv)?;

    let tilt_ok = tilt_margins.log_sobolev.abs() < 1e-6;
    let margins_ok = worst.iter().all(|w| *w >= -tol);
    let poincare_ok = poincare.sup_scalar.is_finite() && poincare.sup_korn.is_finite();
    let passed = margins_ok && tilt_ok && poincare_ok;
    let status = if passed {
        Status::Ok
    } else {
        Status::AuditViolation
    };
    let summary = json!({
        "mode": "verify",
        "status": status.label(),
        "samples": vc.n_samples,
        "sigma": frame.sigma(),
        "worst_margins": SAMPLE_MARGIN_NAMES.iter().zip(worst).map(|(k, v)| (k.to_string(), finite_or_null(v))).collect::<serde_json::Map<_, _>>(),
        "margin_tol": tol,
        "tilt": { "shift": &tilt[..frame.dim()], "log_sobolev_margin": tilt_margins.log_sobolev, "equality_holds": tilt_ok },
        "ground": SAMPLE_MARGIN_NAMES.iter().zip(ground.values()).map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "poincare": { "sup_scalar": finite_or_null(poincare.sup_scalar), "sup_korn": finite_or_null(poincare.sup_korn), "samples": poincare.samples },
        "passed": passed,
        "config": c,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    let worst_msg: Vec<String> = SAMPLE_MARGIN_NAMES
        .iter()
        .zip(worst)
        .map(|(k, v)| format!("{k} {v:.3e}"))
        .collect();
    Ok((
        status,
        format!(
            "{} samples; worst margins: {}",
            vc.n_samples,
            worst_msg.join(", ")
        ),
    ))
}

fn run_sweep(l: &LoadedConfig, dir: &Path) -> Result<(Status, String)> {
    let c = &l.config;
    let p = c.model_params()?;
    let frame = frame_for(l, p.sigma()?)?;
    let (q0, u0) = initial_data(l, &frame)?;
    let time = c.time.expect("checked by check_mode");
    let sw = c.sweep.clone().expect("checked by check_mode");
    let mut settings = RunSettings::new(time.dt, time.t_final);
    settings.every = time.every;
    settings.step = step_options(l);
    let base = SweepBase {
        params: p,
        q0,
        u0,
        settings,
        audit_tol: c.audit.tol,
    };
    let report = vanishing_drag_sweep(&base, &sw.n_list, sw.burn_in)?;
    write_json(
        &dir.join("sweep.json"),
        &serde_json::to_value(&report).expect("report serializes"),
    )?;
    let status = if report.failed_index.is_some() {
        Status::SolverFailure
    } else if report.passed() {
        Status::Ok
    } else {
        Status::AuditViolation
    };
    let summary = json!({
        "mode": "sweep",
        "status": status.label(),
        "n_list": report.n_list,
        "increments_h1": report.increments_h1,
        "increments_l2": report.increments_l2,
        "monotone_after_burn_in": report.monotone_after_burn_in,
        "audits_passed": report.audits_passed,
        "failed_index": report.failed_index,
        "config": c,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok((
        status,
        format!(
            "increments H1 {:?}, L2 {:?}; monotone {}, audits {}",
            report.increments_h1,
            report.increments_l2,
            report.monotone_after_burn_in,
            report.audits_passed
        ),
    ))
}

fn run_rescaled(l: &LoadedConfig, dir: &Path) -> Result<(Status, String)> {
    let c = &l.config;
    let m = &c.model;
    let rp = RescaledParams {
        a: m.a,
        kappa: m.kappa,
        nu: m.nu,
    };
    rp.validate()?;
    let frame = frame_for(l, 1.0)?;
    let (q, u) = initial_data(l, &frame)?;
    let initial = positive_state(l, q, u)?;
    let time = c.time.expect("checked by check_mode");
    let run = rescaled_run(initial, &rp, time.dt, time.t_final, &step_options(l))?;

    let mut csv = String::from("t,tau,tau_dot,E,D,E_BD,D_BD,source,bd_source\n");
    for (k, (t, e)) in run.tau.iter().zip(&run.energies).enumerate() {
        if k % time.every == 0 || k + 1 == run.tau.len() {
            csv.push_str(&join([
                t.t,
                t.tau,
                t.tau_dot,
                e.e,
                e.d,
                e.e_bd,
                e.d_bd,
                e.source,
                e.bd_source,
            ]));
            csv.push('\n');
        }
    }
    fs::write(dir.join("rescaled.csv"), csv)?;

    let mut tau_summary = Value::Null;
    if let Some(rc) = &c.rescaled {
        if let (Some(tf), Some(h)) = (rc.tau_t_final, rc.tau_dt) {
            let traj = tau_solve(&rp, tf, h)?;
            let stride = (traj.len() / 2000).max(1);
            let mut csv = String::from("t,tau,tau_dot,invariant\n");
            for (k, s) in traj.iter().enumerate() {
                if k % stride == 0 || k + 1 == traj.len() {
                    csv.push_str(&join([s.t, s.tau, s.tau_dot, s.invariant(&rp)]));
                    csv.push('\n');
                }
            }
            fs::write(dir.join("tau.csv"), csv)?;
            let last = traj.last().expect("tau_solve returns the initial state");
            let drift = traj
                .iter()
                .map(|s| (s.invariant(&rp) - traj[0].invariant(&rp)).abs())
                .fold(0.0, f64::max);
            let growth = if last.t > 1.0 {
                last.tau / (last.t * (2.0 * rp.a * last.t.ln()).sqrt())
            } else {
                f64::NAN
            };
            tau_summary = json!({ "t": last.t, "tau": last.tau, "tau_dot": last.tau_dot, "invariant_drift": drift, "growth_ratio": finite_or_null(growth) });
        }
    }

    let min_e_bd = run
        .energies
        .iter()
        .map(|e| e.e_bd)
        .fold(f64::INFINITY, f64::min);
    let audits_ok = min_e_bd >= -c.audit.margin_tol;
    let status = match (&run.failure, audits_ok) {
        (Some(_), _) => Status::SolverFailure,
        (None, false) => Status::AuditViolation,
        (None, true) => Status::Ok,
    };
    let last = run.tau.last().expect("initial scale is always recorded");
    let summary = json!({
        "mode": "rescaled",
        "status": status.label(),
        "failure": run.failure.as_ref().map(|e| e.to_string()),
        "t_reached": run.last.t,
        "tau": last.tau,
        "tau_dot": last.tau_dot,
        "combined_residual": run.combined_residual(),
        "min_E_BD": min_e_bd,
        "tau_ode": tau_summary,
        "config": c,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok((
        status,
        format!(
            "reached t = {}, tau = {:.6}, combined residual {:.3e}",
            run.last.t,
            last.tau,
            run.combined_residual()
        ),
    ))
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::ConfigError.code()
            } else {
                0
            };
        }
    };
    let (mode, args) = cli.command.split();
    let out = execute(mode, args);
    if out.status == Status::Ok {
        println!("{}", out.message);
    } else {
        eprintln!("qns {}: {}", mode.name(), out.message);
    }
    out.status.code()
}
