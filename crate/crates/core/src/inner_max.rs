//! Approximate maximization of F(x, .) - h over Q_y and the inexact gradient
//! of g(x) = max_y F(x,y) - h(y) it induces.

use crate::error::{Result, SolverError};
use crate::fgm::{minimize_certified, CertifiedOptions};
use crate::objective::{CompositeObjective, FirstOrder, ProxTerm, SetIndicator, SmoothOracle};
use crate::problem::{effective_smoothness, FeasibleSet, SaddleProblem, Vector};
use crate::tally::OracleTally;

/// Smallest inner accuracy ever requested; below it rounding dominates.
pub const MIN_INNER_ACCURACY: f64 = 1e-16;

/// A (delta, l_env)-model of g at a point.
#[derive(Debug, Clone)]
pub struct InexactGrad {
    pub value: f64,
    pub grad: Vector,
    /// Envelope inexactness, twice the inner accuracy.
    pub delta: f64,
    /// Envelope constant, twice the effective smoothness.
    pub l_env: f64,
    pub witness_y: Vector,
    pub tally: OracleTally,
}

#[derive(Debug, Clone, Default)]
pub struct InnerOptions {
    pub warm_start: Option<Vector>,
    /// Replaces Q_y; only allowed when h is handled as a smooth term.
    pub set_override: Option<FeasibleSet>,
    /// Treat h as smooth even when it has a prox.
    pub force_smooth_h: bool,
    pub max_restarts: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub witness: Vector,
    /// F(x, witness) - h(witness).
    pub value: f64,
    /// Certified bound on g(x) - value.
    pub gap_bound: f64,
    pub tally: OracleTally,
    pub queries: u64,
}

// y -> -F(x,y), plus h(y) when h is not handled by its prox.
struct InnerSmooth<'p> {
    problem: &'p SaddleProblem,
    x: &'p Vector,
    with_h: bool,
    tally: OracleTally,
}

impl SmoothOracle for InnerSmooth<'_> {
    fn dim(&self) -> usize {
        self.problem.spec.dim_y
    }

    fn query(&mut self, y: &Vector, _delta: f64) -> Result<FirstOrder> {
        let mut grad = -self.problem.grad_y_f(self.x, y, &mut self.tally)?;
        let mut value = -self.problem.f_value(self.x, y);
        if self.with_h {
            grad += self.problem.grad_h(y, &mut self.tally)?;
            value += self.problem.h_value(y);
        }
        Ok(FirstOrder { value, grad })
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

struct HProx<'p> {
    problem: &'p SaddleProblem,
    tally: OracleTally,
}

impl ProxTerm for HProx<'_> {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        self.problem.prox_h(v, step, &mut self.tally)
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// Finds y with g(x) - [F(x,y) - h(y)] <= delta, certified by a gradient
/// mapping bound and strong concavity in y.
pub fn solve_inner_max(
    problem: &SaddleProblem,
    x: &Vector,
    delta: f64,
    opts: &InnerOptions,
) -> Result<InnerSolution> {
    let spec = &problem.spec;
    crate::error::check_dim(spec.dim_x, x)?;
    if !(spec.mu_y > 0.0) {
        return Err(SolverError::InvalidSpec(format!("mu_y = {}", spec.mu_y)));
    }
    if !(delta > 0.0) {
        return Err(SolverError::InvalidArgument(format!("delta = {delta}")));
    }
    let use_prox = problem.prox_friendly_h() && !opts.force_smooth_h;
    if use_prox && opts.set_override.is_some() {
        return Err(SolverError::Unsupported(
            "set override needs h as a smooth term".into(),
        ));
    }
    let mut l = spec.l_yy;
    if !use_prox {
        l += spec.l_y.ok_or_else(|| {
            SolverError::Unsupported("h has no prox and no declared l_y".into())
        })?;
    }
    let mu = spec.mu_y;
    // an affine inner objective has l = 0; any positive constant is valid and
    // a tiny one makes the prox step land on the maximizer
    let l = l.max(1e-9 * mu);
    let set = opts.set_override.clone().unwrap_or_else(|| spec.set_y.clone());
    let y0 = match &opts.warm_start {
        Some(w) => set.project(w),
        None => set.project(&Vector::zeros(spec.dim_y)),
    };
    let mut smooth = InnerSmooth {
        problem,
        x,
        with_h: !use_prox,
        tally: OracleTally::new(),
    };
    let mut hprox = HProx {
        problem,
        tally: OracleTally::new(),
    };
    let mut indicator = SetIndicator { set };
    let composite: &mut dyn ProxTerm = if use_prox { &mut hprox } else { &mut indicator };
    let mut obj = CompositeObjective::new(&mut smooth, composite, l, mu);
    let mut copts = CertifiedOptions::default();
    if let Some(m) = opts.max_restarts {
        copts.max_restarts = m;
    }
    let rep = minimize_certified(&mut obj, &y0, delta.max(MIN_INNER_ACCURACY), copts)?;
    let tally = obj.tally();
    let y = rep.x_final;
    Ok(InnerSolution {
        value: problem.f_value(x, &y) - problem.h_value(&y),
        witness: y,
        gap_bound: rep.certified_gap,
        tally,
        queries: rep.smooth_queries,
    })
}

/// Inexact gradient of g at x from a delta-accurate inner solution.
pub fn inexact_grad_g(
    problem: &SaddleProblem,
    x: &Vector,
    delta: f64,
    opts: &InnerOptions,
) -> Result<InexactGrad> {
    let sol = solve_inner_max(problem, x, delta, opts)?;
    let mut ig = inexact_grad_from_witness(problem, x, &sol.witness, delta)?;
    ig.tally = ig.tally + sol.tally;
    Ok(ig)
}

/// Packages a witness already known to be delta-accurate.
pub fn inexact_grad_from_witness(
    problem: &SaddleProblem,
    x: &Vector,
    witness: &Vector,
    delta: f64,
) -> Result<InexactGrad> {
    let mut tally = OracleTally::new();
    let grad = problem.grad_x_f(x, witness, &mut tally)?;
    Ok(InexactGrad {
        value: problem.f_value(x, witness) - problem.h_value(witness),
        grad,
        delta: 2.0 * delta,
        l_env: 2.0 * effective_smoothness(&problem.spec)?,
        witness_y: witness.clone(),
        tally,
    })
}

/// Outcome of probing the envelope at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeProbe {
    /// 0 <= g(z) - model(z) <= l_env/2 |z-x|^2 + delta, with slack.
    pub holds: bool,
    /// The same with l_env/4, i.e. the effective smoothness itself.
    pub tight_holds: bool,
    /// g(z) - model(z).
    pub excess: f64,
}

pub fn probe_envelope(exact_g: &dyn Fn(&Vector) -> f64, ig: &InexactGrad, x: &Vector, z: &Vector) -> EnvelopeProbe {
    let gz = exact_g(z);
    let d = z - x;
    let excess = gz - (ig.value + ig.grad.dot(&d));
    let slack = 1e-9 * (1.0 + gz.abs());
    let dist2 = d.norm_squared();
    EnvelopeProbe {
        holds: excess >= -slack && excess <= 0.5 * ig.l_env * dist2 + ig.delta + slack,
        tight_holds: excess >= -slack && excess <= 0.25 * ig.l_env * dist2 + ig.delta + slack,
        excess,
    }
}

/// True iff the two-sided envelope holds at z.
pub fn envelope_check(exact_g: &dyn Fn(&Vector) -> f64, ig: &InexactGrad, x: &Vector, z: &Vector) -> bool {
    probe_envelope(exact_g, ig, x, z).holds
}

/// g as a smooth oracle for outer minimization: each query solves the inner
/// problem to half the requested envelope inexactness, warm-started at the
/// previous witness.
pub struct EnvelopeOracle<'p> {
    problem: &'p SaddleProblem,
    opts: InnerOptions,
    tally: OracleTally,
    pub last_witness: Option<Vector>,
    pub inner_queries: u64,
}

impl<'p> EnvelopeOracle<'p> {
    pub fn new(problem: &'p SaddleProblem, opts: InnerOptions) -> Self {
        let last_witness = opts.warm_start.clone();
        EnvelopeOracle {
            problem,
            opts,
            tally: OracleTally::new(),
            last_witness,
            inner_queries: 0,
        }
    }
}

impl SmoothOracle for EnvelopeOracle<'_> {
    fn dim(&self) -> usize {
        self.problem.spec.dim_x
    }

    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        let mut opts = self.opts.clone();
        opts.warm_start = self.last_witness.clone();
        let gamma = (0.5 * delta).max(MIN_INNER_ACCURACY);
        let sol = solve_inner_max(self.problem, x, gamma, &opts)?;
        self.tally += sol.tally;
        self.inner_queries += sol.queries;
        let grad = self.problem.grad_x_f(x, &sol.witness, &mut self.tally)?;
        let value = sol.value;
        self.last_witness = Some(sol.witness);
        Ok(FirstOrder { value, grad })
    }

    fn grad_error(&self, delta: f64) -> f64 {
        let s = &self.problem.spec;
        s.l_xy * (delta.max(2.0 * MIN_INNER_ACCURACY) / s.mu_y).sqrt()
    }

    fn delta_for_grad_error(&self, err: f64) -> f64 {
        let s = &self.problem.spec;
        if s.l_xy == 0.0 {
            f64::INFINITY
        } else {
            s.mu_y * (err / s.l_xy).powi(2)
        }
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}
