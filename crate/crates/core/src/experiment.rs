//! Experiment configs, metered runs and the CSV result files.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::report::{set_timing, HistoryRow};
use crate::problem::SaddleSpec;
use crate::saddle::{predict_complexity, select_engine, solve_saddle_with, ComplexityPrediction, Engine, ProxFlags, SaddleOptions};
use crate::tally::{OracleKind, OracleTally};
use crate::testbed::{gen_bilinear_with, gen_matrix_game, gen_quadratic_saddle, BilinearInstance, Instance};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SADDLE_OUT_DIR";

pub const SUMMARY_HEADER: &str = "run_id,engine,n,m,cond,mu_x,mu_y,eps,gap,calls_grad_r,calls_grad_h,calls_gradx_F,calls_grady_F,calls_prox_r,calls_prox_h,matvecs,wall_ms,converged";
pub const HISTORY_HEADER: &str = "iter,gap,calls_gradx_F,calls_grady_F,wall_ms";

/// `SADDLE_OUT_DIR` if set, else `results`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceDescriptor {
    /// A = diag(1,2), b = (1,1), unit moduli.
    B1,
    Bilinear {
        n: usize,
        m: usize,
        cond: f64,
        #[serde(default = "one")]
        mu_x: f64,
        #[serde(default = "one")]
        mu_y: f64,
        #[serde(default)]
        seed: u64,
    },
    QuadraticSaddle {
        n: usize,
        m: usize,
        cond: f64,
        #[serde(default = "one")]
        mu_x: f64,
        #[serde(default = "one")]
        mu_y: f64,
        #[serde(default = "one")]
        p_max: f64,
        #[serde(default = "one")]
        q_max: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Square game with mu_y = 1, mu_x = 1/sqrt(kappa), λmax/λmin = kappa.
    MatrixGame {
        n: usize,
        kappa: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl InstanceDescriptor {
    pub fn build(&self, caps: &BudgetCaps) -> Result<Instance> {
        let (n, m, cond) = self.shape();
        if n > caps.max_dim || m > caps.max_dim {
            return Err(SolverError::InvalidArgument(format!(
                "dimensions {n}x{m} exceed the cap {}",
                caps.max_dim
            )));
        }
        if cond > caps.max_cond {
            return Err(SolverError::InvalidArgument(format!(
                "conditioning {cond} exceeds the cap {}",
                caps.max_cond
            )));
        }
        Ok(match *self {
            InstanceDescriptor::B1 => Instance::Bilinear(BilinearInstance::b1()),
            InstanceDescriptor::Bilinear { n, m, cond, mu_x, mu_y, seed } => {
                Instance::Bilinear(gen_bilinear_with(n, m, cond, mu_x, mu_y, seed)?)
            }
            InstanceDescriptor::QuadraticSaddle { n, m, cond, mu_x, mu_y, p_max, q_max, seed } => {
                Instance::Quadratic(gen_quadratic_saddle(n, m, cond, mu_x, mu_y, p_max, q_max, seed)?)
            }
            InstanceDescriptor::MatrixGame { n, kappa, seed } => Instance::Bilinear(gen_matrix_game(n, kappa, seed)?),
        })
    }

    /// (n, m, cond).
    pub fn shape(&self) -> (usize, usize, f64) {
        match *self {
            InstanceDescriptor::B1 => (2, 2, 4.0),
            InstanceDescriptor::Bilinear { n, m, cond, .. } | InstanceDescriptor::QuadraticSaddle { n, m, cond, .. } => {
                (n, m, cond)
            }
            InstanceDescriptor::MatrixGame { n, kappa, .. } => (n, n, kappa),
        }
    }

    pub fn with_cond(&self, c: f64) -> Self {
        let mut d = self.clone();
        match &mut d {
            InstanceDescriptor::B1 => {}
            InstanceDescriptor::Bilinear { cond, .. } | InstanceDescriptor::QuadraticSaddle { cond, .. } => *cond = c,
            InstanceDescriptor::MatrixGame { kappa, .. } => *kappa = c,
        }
        d
    }

    pub fn with_seed(&self, s: u64) -> Self {
        let mut d = self.clone();
        match &mut d {
            InstanceDescriptor::B1 => {}
            InstanceDescriptor::Bilinear { seed, .. }
            | InstanceDescriptor::QuadraticSaddle { seed, .. }
            | InstanceDescriptor::MatrixGame { seed, .. } => *seed = s,
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetCaps {
    pub max_dim: usize,
    pub max_cond: f64,
    /// Tightening rounds of the saddle solver.
    pub max_rounds: usize,
}

impl Default for BudgetCaps {
    fn default() -> Self {
        BudgetCaps {
            max_dim: 200,
            max_cond: 1e5,
            max_rounds: 6,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub run_id: Option<String>,
    pub instance: InstanceDescriptor,
    #[serde(default)]
    pub engine: Engine,
    pub eps: f64,
    #[serde(default)]
    pub budget: BudgetCaps,
    /// Record wall-clock times; off keeps result files byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Write a per-run history file.
    #[serde(default = "yes")]
    pub history: bool,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceDescriptor, engine: Engine, eps: f64) -> Self {
        ExperimentConfig {
            run_id: None,
            instance,
            engine,
            eps,
            budget: BudgetCaps::default(),
            timing: false,
            history: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(SolverError::InvalidArgument(format!("eps = {}", self.eps)));
        }
        if let Some(id) = &self.run_id {
            if id.is_empty() || id.contains(['/', '\\', ',']) {
                return Err(SolverError::InvalidArgument(format!("bad run id '{id}'")));
            }
        }
        Ok(())
    }
}

/// One row of the summary file plus the run's history.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub run_id: String,
    pub engine: Engine,
    pub n: usize,
    pub m: usize,
    pub cond: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub eps: f64,
    pub gap: f64,
    pub tally: OracleTally,
    pub wall_ms: f64,
    pub converged: bool,
    /// Distance of (x̂, ŷ) to the closed-form saddle.
    pub distance: f64,
    pub history: Vec<HistoryRow>,
    pub write_history: bool,
}

impl RunResult {
    pub fn summary_fields(&self) -> Vec<String> {
        let t = &self.tally;
        vec![
            self.run_id.clone(),
            self.engine.label().to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.cond.to_string(),
            self.mu_x.to_string(),
            self.mu_y.to_string(),
            self.eps.to_string(),
            self.gap.to_string(),
            t.get(OracleKind::GradR).to_string(),
            t.get(OracleKind::GradH).to_string(),
            t.get(OracleKind::GradXF).to_string(),
            t.get(OracleKind::GradYF).to_string(),
            t.get(OracleKind::ProxR).to_string(),
            t.get(OracleKind::ProxH).to_string(),
            t.get(OracleKind::Matvec).to_string(),
            self.wall_ms.to_string(),
            self.converged.to_string(),
        ]
    }
}

/// Builds the instance, solves it and meters the run. Budget exhaustion is a
/// non-converged result; any other solver error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, default_id: &str) -> Result<RunResult> {
    cfg.validate()?;
    set_timing(cfg.timing);
    let inst = cfg.instance.build(&cfg.budget)?;
    let problem = inst.to_problem();
    let engine = match cfg.engine {
        Engine::Auto => select_engine(&problem),
        e => e,
    };
    let opts = SaddleOptions {
        max_rounds: cfg.budget.max_rounds,
        ..Default::default()
    };
    let (n, m) = inst.dims();
    let (mu_x, mu_y) = inst.moduli();
    let (cx, cy) = inst.closed_form();
    let run_id = cfg.run_id.clone().unwrap_or_else(|| default_id.to_string());
    let base = RunResult {
        run_id,
        engine,
        n,
        m,
        cond: inst.cond(),
        mu_x,
        mu_y,
        eps: cfg.eps,
        gap: f64::NAN,
        tally: OracleTally::new(),
        wall_ms: 0.0,
        converged: false,
        distance: f64::NAN,
        history: Vec::new(),
        write_history: cfg.history,
    };
    match solve_saddle_with(&problem, cfg.eps, engine, &opts) {
        Ok(rep) => {
            let y = rep.y_final.clone().unwrap_or_else(|| cy.clone());
            Ok(RunResult {
                gap: rep.certified_gap,
                tally: rep.tally,
                wall_ms: rep.wall_ms,
                converged: rep.converged,
                distance: ((&rep.x_final - cx).norm_squared() + (y - cy).norm_squared()).sqrt(),
                history: rep.history,
                ..base
            })
        }
        Err(SolverError::BudgetExceeded { certified, best, .. }) => Ok(RunResult {
            gap: certified,
            distance: (&*best - cx).norm(),
            ..base
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "sweep_name")]
    pub name: String,
    pub instances: Vec<InstanceDescriptor>,
    /// Overrides each instance's conditioning when nonempty.
    #[serde(default)]
    pub conds: Vec<f64>,
    /// Overrides each instance's seed when nonempty.
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub engines: Vec<Engine>,
    pub eps: f64,
    #[serde(default)]
    pub budget: BudgetCaps,
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "yes")]
    pub history: bool,
}

fn sweep_name() -> String {
    "sweep".to_string()
}

impl SweepConfig {
    /// Runs in grid order: instance, conditioning, seed, engine.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let conds: Vec<Option<f64>> = if self.conds.is_empty() {
            vec![None]
        } else {
            self.conds.iter().copied().map(Some).collect()
        };
        let seeds: Vec<Option<u64>> = if self.seeds.is_empty() {
            vec![None]
        } else {
            self.seeds.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for inst in &self.instances {
            for c in &conds {
                for s in &seeds {
                    let mut d = inst.clone();
                    if let Some(c) = c {
                        d = d.with_cond(*c);
                    }
                    if let Some(s) = s {
                        d = d.with_seed(*s);
                    }
                    for &engine in &self.engines {
                        out.push(ExperimentConfig {
                            run_id: Some(format!("{}-{:04}", self.name, out.len())),
                            instance: d.clone(),
                            engine,
                            eps: self.eps,
                            budget: self.budget.clone(),
                            timing: self.timing,
                            history: self.history,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Runs every configuration of the sweep in parallel; results keep grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<RunResult>> {
    if cfg.engines.is_empty() || cfg.instances.is_empty() {
        return Err(SolverError::InvalidArgument("sweep needs instances and engines".into()));
    }
    let runs = cfg.expand();
    for r in &runs {
        r.validate()?;
    }
    runs.par_iter()
        .map(|r| run_experiment(r, "run"))
        .collect()
}

pub fn write_summary<W: Write>(w: W, results: &[RunResult]) -> std::io::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(SUMMARY_HEADER.split(','))?;
    for r in results {
        wr.write_record(r.summary_fields())?;
    }
    wr.flush()
}

pub fn write_history<W: Write>(w: W, history: &[HistoryRow]) -> std::io::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(HISTORY_HEADER.split(','))?;
    for h in history {
        wr.write_record([
            h.iter.to_string(),
            h.gap.to_string(),
            h.tally.get(OracleKind::GradXF).to_string(),
            h.tally.get(OracleKind::GradYF).to_string(),
            h.wall_ms.to_string(),
        ])?;
    }
    wr.flush()
}

/// Writes `summary_name` and one `history_<run_id>.csv` per run that asks
/// for it into `dir`; returns the written paths.
pub fn write_results(dir: &Path, summary_name: &str, results: &[RunResult]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let summary = dir.join(summary_name);
    write_summary(std::fs::File::create(&summary)?, results)?;
    paths.push(summary);
    for r in results.iter().filter(|r| r.write_history) {
        let p = dir.join(format!("history_{}.csv", r.run_id));
        write_history(std::fs::File::create(&p)?, &r.history)?;
        paths.push(p);
    }
    Ok(paths)
}

/// A spec with prox flags, as read by `predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictInput {
    #[serde(flatten)]
    pub spec: SaddleSpec,
    #[serde(default = "yes")]
    pub prox_r: bool,
    #[serde(default = "yes")]
    pub prox_h: bool,
    #[serde(default)]
    pub require_spectral: bool,
}

/// Prediction for a JSON document holding either a `PredictInput` or an
/// instance descriptor (whose terms are all prox-friendly).
pub fn predict_from_json(text: &str) -> Result<ComplexityPrediction> {
    let input = match serde_json::from_str::<PredictInput>(text) {
        Ok(p) => p,
        Err(spec_err) => match serde_json::from_str::<InstanceDescriptor>(text) {
            Ok(d) => {
                let p = d.build(&BudgetCaps::default())?.to_problem();
                PredictInput {
                    prox_r: p.prox_friendly_r(),
                    prox_h: p.prox_friendly_h(),
                    spec: p.spec,
                    require_spectral: false,
                }
            }
            Err(_) => return Err(SolverError::InvalidSpec(spec_err.to_string())),
        },
    };
    let flags = ProxFlags {
        prox_r: input.prox_r,
        prox_h: input.prox_h,
        require_spectral: input.require_spectral,
    };
    predict_complexity(&input.spec, flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_json() {
        let d: InstanceDescriptor = serde_json::from_str(r#"{"family":"b1"}"#).unwrap();
        assert_eq!(d, InstanceDescriptor::B1);
        let d: InstanceDescriptor =
            serde_json::from_str(r#"{"family":"bilinear","n":3,"m":2,"cond":10,"seed":4}"#).unwrap();
        assert_eq!(d.shape(), (3, 2, 10.0));
        assert!(serde_json::from_str::<InstanceDescriptor>(r#"{"family":"simplex"}"#).is_err());
    }

    #[test]
    fn predict_inputs() {
        let p = predict_from_json(r#"{"family":"b1"}"#).unwrap();
        assert_eq!(p.formula(crate::saddle::formula::OUTER), Some(2.0));
        let text = r#"{"l_xx":0,"l_xy":2,"l_yy":0,"mu_x":1,"mu_y":1,"dim_x":2,"dim_y":2,"bilinear":true}"#;
        let p = predict_from_json(text).unwrap();
        assert_eq!(p.formula(crate::saddle::formula::OUTER), Some(2.0));
        assert!(predict_from_json("{}").is_err());
    }

    #[test]
    fn caps_reject_large_instances() {
        let d = InstanceDescriptor::Bilinear {
            n: 500,
            m: 2,
            cond: 10.0,
            mu_x: 1.0,
            mu_y: 1.0,
            seed: 0,
        };
        assert!(d.build(&BudgetCaps::default()).is_err());
        assert!(d.with_cond(1e6).build(&BudgetCaps::default()).is_err());
    }

    #[test]
    fn summary_has_exact_header() {
        let cfg = ExperimentConfig::new(InstanceDescriptor::B1, Engine::Case1, 1e-6);
        let r = run_experiment(&cfg, "b1").unwrap();
        assert!(r.converged);
        let mut buf = Vec::new();
        write_summary(&mut buf, &[r.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SUMMARY_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("b1,case1,2,2,4,1,1,0.000001,"));
        assert!(row.ends_with(",0,true"));
        let mut buf = Vec::new();
        write_history(&mut buf, &r.history).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(HISTORY_HEADER));
    }

    #[test]
    fn sweep_expansion_order() {
        let s = SweepConfig {
            name: "s".into(),
            instances: vec![InstanceDescriptor::MatrixGame { n: 4, kappa: 10.0, seed: 0 }],
            conds: vec![10.0, 100.0],
            seeds: vec![1, 2],
            engines: vec![Engine::Case1, Engine::MirrorProx],
            eps: 1e-6,
            budget: BudgetCaps::default(),
            timing: false,
            history: true,
        };
        let runs = s.expand();
        assert_eq!(runs.len(), 8);
        assert_eq!(runs[0].run_id.as_deref(), Some("s-0000"));
        assert_eq!(runs[1].engine, Engine::MirrorProx);
        assert_eq!(runs[2].instance, InstanceDescriptor::MatrixGame { n: 4, kappa: 10.0, seed: 2 });
        assert_eq!(runs[4].instance.shape().2, 100.0);
    }
}
