//! Time loop shared by the command-line modes and the drag sweep.

use crate::diagnostics::{energy_inequality_audit, AuditReport, DiagnosticsRecord};
use crate::error::{QnsError, Result};
use crate::galerkin::{coupled_step, Coefficients, SimState, StepOptions};
use crate::params::ModelParams;

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub dt: f64,
    pub t_final: f64,
    /// Record diagnostics every this many steps (and always at the last step).
    pub every: usize,
    pub step: StepOptions,
    /// Keep the full state at each recorded time.
    pub keep_states: bool,
}

impl RunSettings {
    pub fn new(dt: f64, t_final: f64) -> Self {
        RunSettings {
            dt,
            t_final,
            every: 1,
            step: StepOptions::default(),
            keep_states: false,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub states: Vec<SimState>,
    pub last: SimState,
    /// The error that stopped the run early, if any.
    pub failure: Option<QnsError>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn audit(&self, p: &ModelParams, tol: f64) -> Result<AuditReport> {
        let fr = self.last.q.frame();
        energy_inequality_audit(&self.records, p, fr.sigma(), fr.dim(), tol)
    }
}

/// Advance `initial` to `t_final`. A step failure ends the run but keeps what was recorded.
pub fn simulate(initial: SimState, p: &ModelParams, settings: &RunSettings) -> Result<RunOutput> {
    p.validate()?;
    if !(settings.dt > 0.0 && settings.t_final > 0.0) || settings.every == 0 {
        return Err(QnsError::InvalidParameter(
            "need dt > 0, t_final > 0 and every >= 1".into(),
        ));
    }
    let sigma = initial.q.frame().sigma();
    let c = Coefficients::from_params(p, sigma);
    let floor = settings.step.floor;
    let n = settings.n_steps().max(1);
    let mut records = vec![DiagnosticsRecord::compute(&initial, p, floor)?];
    let mut states = if settings.keep_states {
        vec![initial.clone()]
    } else {
        Vec::new()
    };
    let mut state = initial;
    let mut failure = None;
    for k in 1..=n {
        match coupled_step(&state, &c, settings.dt, &settings.step) {
            Ok(next) => state = next,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if k % settings.every == 0 || k == n {
            match DiagnosticsRecord::compute(&state, p, floor) {
                Ok(r) => records.push(r),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
            if settings.keep_states {
                states.push(state.clone());
            }
        }
    }
    Ok(RunOutput {
        records,
        states,
        last: state,
        failure,
    })
}
