//! Minimization of r + g where the two smooth terms have very different
//! smoothness constants: the inexact accelerated proximal gradient method
//! with its explicit parameter schedule, the non-accelerated composite
//! gradient method, and a Catalyst outer loop.

use serde::Serialize;

use crate::error::{Result, SolverError};
use crate::fgm::{run_fgm, FgmState, SmoothProx};
use crate::objective::{
    certify, CompositeObjective, FirstOrder, IsotropicQuadratic, PlusQuadratic, ProxTerm,
    SetIndicator, SmoothOracle, SumOracle,
};
use crate::problem::{FeasibleSet, Vector};
use crate::report::{Clock, HistoryRow, SolveReport};
use crate::tally::OracleTally;

/// Constants of P = r + g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlidingSpec {
    pub l_r: f64,
    pub l_g: f64,
    pub mu_r: f64,
    pub mu_g: f64,
    /// Inexactness of the oracles as supplied; the solver requests its own.
    pub delta_r: f64,
    pub delta_g: f64,
}

impl SlidingSpec {
    pub fn new(l_r: f64, l_g: f64, mu_r: f64, mu_g: f64) -> Self {
        SlidingSpec {
            l_r,
            l_g,
            mu_r,
            mu_g,
            delta_r: 0.0,
            delta_g: 0.0,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu_r + self.mu_g
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("l_r", self.l_r), ("l_g", self.l_g)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::InvalidSpec(format!("{name} = {v}")));
            }
        }
        for (name, v) in [("mu_r", self.mu_r), ("mu_g", self.mu_g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SolverError::InvalidSpec(format!("{name} = {v}")));
            }
        }
        if !(self.mu() > 0.0) {
            return Err(SolverError::InvalidSpec("P is not strongly convex".into()));
        }
        if self.mu_r > self.l_r || self.mu_g > self.l_g {
            return Err(SolverError::InvalidSpec("modulus above smoothness".into()));
        }
        Ok(())
    }

    fn swapped(&self) -> SlidingSpec {
        SlidingSpec {
            l_r: self.l_g,
            l_g: self.l_r,
            mu_r: self.mu_g,
            mu_g: self.mu_r,
            delta_r: self.delta_g,
            delta_g: self.delta_r,
        }
    }
}

/// How the caller's spec was normalized: roles swapped so l_r <= l_g, then
/// `shift`/2 |x|^2 moved from r to g when only r was strongly convex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub spec: SlidingSpec,
    pub swapped: bool,
    pub shift: f64,
}

pub fn normalize(spec: &SlidingSpec) -> Normalization {
    let swapped = spec.l_r > spec.l_g;
    let mut s = if swapped { spec.swapped() } else { *spec };
    let mut shift = 0.0;
    if s.mu_g == 0.0 && s.mu_r > 0.0 {
        shift = 0.5 * s.mu_r;
        s.mu_r -= shift;
        s.l_r -= shift;
        s.mu_g += shift;
        s.l_g += shift;
    }
    Normalization {
        spec: s,
        swapped,
        shift,
    }
}

/// Parameters of the inexact accelerated proximal gradient method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alg5Params {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Relative accuracy of the inner prox solve.
    pub delta_rel_inner: f64,
    /// Inner iterations per restart, ceil(3 sqrt(2 kappa_sub)).
    pub inner_per_restart: usize,
    /// Inner restarts, ceil(log2(1/delta_rel_inner)).
    pub inner_restarts: usize,
    /// Inner iterations per outer step; one g-gradient each.
    pub t_inner: usize,
    pub k_outer: usize,
    pub delta_r: f64,
    pub delta_g: f64,
    /// Upper bound on P(x0) - P* the outer count was computed from.
    pub gap_bound: f64,
}

impl Alg5Params {
    pub fn new(spec: &SlidingSpec, epsilon: f64, gap_bound: f64) -> Result<Self> {
        spec.validate()?;
        if !(epsilon > 0.0) {
            return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}")));
        }
        if !(gap_bound >= 0.0) {
            return Err(SolverError::InvalidArgument(format!("gap bound = {gap_bound}")));
        }
        let SlidingSpec { l_r, l_g, mu_g, .. } = *spec;
        let mu = spec.mu();
        let lm = l_r + mu_g;
        let alpha = 0.25 * (mu / lm).sqrt();
        let eta = 2.0 * lm / (8.0 * alpha * lm + (1.0 - alpha) * mu);
        let beta = 1.0 - eta * mu / (2.0 * lm);
        let c1 = 2.0 * (l_r / mu + 1.0) * (l_g * l_g / (l_r * l_r) + 1.0);
        let c2 = 2.0 * eta * beta / (alpha * lm);
        let c3 = 0.25 * eta * (beta * (1.0 - alpha) / alpha + 1.0);
        let c4 = 4.0 * (l_r + l_g).sqrt() / (lm * lm.sqrt());
        let delta_rel_inner = 1.0 / (32.0 * c1);
        let kappa_sub = (l_r + l_g) / lm;
        let inner_per_restart = ((3.0 * (2.0 * kappa_sub).sqrt()).ceil() as usize).max(1);
        let inner_restarts = ((1.0 / delta_rel_inner).log2().ceil() as usize).max(1);
        let ratio = 4.0 * gap_bound / epsilon;
        let k_outer = if ratio > 1.0 {
            ((ratio.ln() / alpha).ceil() as usize).max(1)
        } else {
            1
        };
        Ok(Alg5Params {
            alpha,
            beta,
            eta,
            c1,
            c2,
            c3,
            c4,
            delta_rel_inner,
            inner_per_restart,
            inner_restarts,
            t_inner: inner_per_restart * inner_restarts,
            k_outer,
            delta_r: alpha * epsilon / 16.0,
            delta_g: (alpha * c2 * epsilon / (8.0 * c3 * c4))
                .min(epsilon / 12.0 * (mu / (l_r + l_g)).sqrt()),
            gap_bound,
        })
    }

    /// 1/2 <= beta <= 1 - alpha and alpha <= 1/4.
    pub fn ranges_hold(&self) -> bool {
        self.alpha <= 0.25 && self.beta >= 0.5 && self.beta <= 1.0 - self.alpha
    }
}

pub fn alg5_params(spec: &SlidingSpec, epsilon: f64, gap_bound: f64) -> Result<Alg5Params> {
    Alg5Params::new(spec, epsilon, gap_bound)
}

/// Exact objective data for logging: P itself, P* and the minimizer.
pub struct ApgMonitor<'m> {
    pub p_value: &'m dyn Fn(&Vector) -> f64,
    pub p_star: f64,
    pub x_star: Vector,
}

/// Solver for the prox subproblem argmin g(u) + l_r/2 |u - v|^2.
pub enum InnerProx<'a> {
    /// `t_inner` fast gradient iterations (the default).
    Fgm,
    /// A caller-supplied exact solver, called with v.
    Exact(&'a mut dyn FnMut(&Vector) -> Vector),
}

pub struct ApgOptions<'a> {
    /// Known bound on P(x0) - P*; estimated from a certificate otherwise.
    pub gap_bound: Option<f64>,
    pub monitor: Option<&'a ApgMonitor<'a>>,
    pub inner: InnerProx<'a>,
    /// Apply the strong-convexity shift when only r is strongly convex.
    pub shift: bool,
}

impl Default for ApgOptions<'_> {
    fn default() -> Self {
        ApgOptions {
            gap_bound: None,
            monitor: None,
            inner: InnerProx::Fgm,
            shift: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApgOutcome {
    /// `smooth_queries` counts grad r and `composite_queries` counts grad g,
    /// both in the caller's roles.
    pub report: SolveReport,
    pub params: Alg5Params,
    pub normalization: Normalization,
    /// |z_k - x*|^2 + c2 (P(y_k) - P*) for k = 0..k_outer, when monitored.
    pub lyapunov: Vec<f64>,
    /// Oracle calls spent estimating the initial gap, not part of the loop.
    pub setup_r_calls: u64,
    pub setup_g_calls: u64,
}

// Counts queries to an oracle.
struct Counting<'a> {
    inner: &'a mut dyn SmoothOracle,
    calls: u64,
}

impl SmoothOracle for Counting<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        self.calls += 1;
        self.inner.query(x, delta)
    }
    fn grad_error(&self, delta: f64) -> f64 {
        self.inner.grad_error(delta)
    }
    fn delta_for_grad_error(&self, err: f64) -> f64 {
        self.inner.delta_for_grad_error(err)
    }
    fn tally(&self) -> OracleTally {
        self.inner.tally()
    }
}

/// Runs the inexact accelerated proximal gradient method for P = r + g on
/// `set`. Each outer step makes exactly one r-gradient query and, with the
/// default inner solver, exactly `t_inner` g-gradient queries.
#[allow(clippy::too_many_arguments)]
pub fn apg_inexact_solve(
    spec: &SlidingSpec,
    r: &mut dyn SmoothOracle,
    g: &mut dyn SmoothOracle,
    set: &FeasibleSet,
    x0: &Vector,
    epsilon: f64,
    mut opts: ApgOptions,
) -> Result<ApgOutcome> {
    spec.validate()?;
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}")));
    }
    crate::error::check_dim(r.dim(), x0)?;
    let clock = Clock::start();
    let norm = if opts.shift {
        normalize(spec)
    } else {
        let swapped = spec.l_r > spec.l_g;
        Normalization {
            spec: if swapped { spec.swapped() } else { *spec },
            swapped,
            shift: 0.0,
        }
    };
    let (r_raw, g_raw): (&mut dyn SmoothOracle, &mut dyn SmoothOracle) =
        if norm.swapped { (g, r) } else { (r, g) };
    let mut r_sh = PlusQuadratic { inner: r_raw, c: -norm.shift };
    let mut g_sh = PlusQuadratic { inner: g_raw, c: norm.shift };
    let mut r_o = Counting { inner: &mut r_sh, calls: 0 };
    let mut g_o = Counting { inner: &mut g_sh, calls: 0 };
    let t0 = r_o.tally() + g_o.tally();
    let ns = norm.spec;

    // initial gap bound and start point
    let (start, gap_bound) = match opts.gap_bound {
        Some(b) => (set.project(x0), b),
        None => {
            let mut sum = SumOracle { a: &mut r_o, b: &mut g_o };
            let mut ind = SetIndicator { set: set.clone() };
            let mut obj = CompositeObjective::new(&mut sum, &mut ind, ns.l_r + ns.l_g, ns.mu());
            let c = certify(&mut obj, x0, 0.0)?;
            (c.point, c.gap_bound)
        }
    };
    let (setup_r, setup_g) = (r_o.calls, g_o.calls);
    let params = Alg5Params::new(&ns, epsilon, gap_bound)?;
    let Alg5Params { alpha, beta, eta, c2, .. } = params;

    let mut report = SolveReport::new(start.clone());
    let mut lyapunov = Vec::new();
    let lyap = |z: &Vector, y: &Vector| -> Option<f64> {
        opts.monitor.map(|m| (z - &m.x_star).norm_squared() + c2 * ((m.p_value)(y) - m.p_star))
    };
    let gap_of = |y: &Vector| opts.monitor.map(|m| (m.p_value)(y) - m.p_star).unwrap_or(f64::NAN);
    let mut y = start.clone();
    let mut z = start;
    if let Some(v) = lyap(&z, &y) {
        lyapunov.push(v);
    }
    report.push_row(HistoryRow {
        iter: 0,
        gap: gap_of(&y),
        tally: OracleTally::new(),
        wall_ms: clock.elapsed_ms(),
    });
    let l_r = ns.l_r;
    for k in 0..params.k_outer {
        let x = &z * alpha + &y * (1.0 - alpha);
        let gr = r_o.query(&x, params.delta_r)?.grad;
        let v = &x - gr / l_r;
        let y_next = match &mut opts.inner {
            InnerProx::Exact(solve) => set.project(&solve(&v)),
            InnerProx::Fgm => {
                let mut quad = IsotropicQuadratic {
                    weight: l_r,
                    center: v.clone(),
                    set: set.clone(),
                };
                let mut obj = CompositeObjective::new(&mut g_o, &mut quad, ns.l_g, l_r + ns.mu_g);
                let mut u = set.project(&x);
                for _ in 0..params.inner_restarts {
                    let mut st = FgmState::new(&u);
                    for _ in 0..params.inner_per_restart {
                        st.step(&mut obj, params.delta_g)?;
                    }
                    u = st.x;
                }
                u
            }
        };
        z = set.project(&(&z * beta + &x * (1.0 - beta) + (&y_next - &x) * eta));
        y = y_next;
        if let Some(v) = lyap(&z, &y) {
            lyapunov.push(v);
        }
        report.push_row(HistoryRow {
            iter: k + 1,
            gap: gap_of(&y),
            tally: (r_o.tally() + g_o.tally()).since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
    }
    let (r_calls, g_calls) = (r_o.calls - setup_r, g_o.calls - setup_g);
    report.x_final = y;
    report.iterations = params.k_outer;
    (report.smooth_queries, report.composite_queries) = if norm.swapped {
        (g_calls, r_calls)
    } else {
        (r_calls, g_calls)
    };
    report.tally = (r_o.tally() + g_o.tally()).since(&t0);
    report.certified_gap = epsilon;
    report.converged = true;
    report.notes.push(format!(
        "k_outer {} t_inner {} gap bound {:.3e}{}{}",
        params.k_outer,
        params.t_inner,
        gap_bound,
        if norm.swapped { ", roles swapped" } else { "" },
        if norm.shift > 0.0 { ", modulus shifted" } else { "" }
    ));
    report.wall_ms = clock.elapsed_ms();
    let (setup_r_calls, setup_g_calls) = if norm.swapped { (setup_g, setup_r) } else { (setup_r, setup_g) };
    Ok(ApgOutcome {
        report,
        params,
        normalization: norm,
        lyapunov,
        setup_r_calls,
        setup_g_calls,
    })
}

/// Non-accelerated composite gradient method: `n` steps
/// x+ = argmin <grad s(x), u> + c(u) + L/2 |u - x|^2, returning the average
/// of x^1..x^n. Exactly `n` smooth-part queries.
pub fn composite_gm_solve(
    obj: &mut CompositeObjective,
    x0: &Vector,
    n: usize,
    monitor: Option<&dyn Fn(&Vector) -> f64>,
) -> Result<SolveReport> {
    crate::error::check_dim(obj.dim(), x0)?;
    if n == 0 {
        return Err(SolverError::ZeroBudget);
    }
    let clock = Clock::start();
    let t0 = obj.tally();
    let l = obj.l_smooth;
    let mut x = x0.clone();
    let mut sum = Vector::zeros(x0.len());
    let mut report = SolveReport::new(x0.clone());
    for k in 1..=n {
        let q = obj.smooth.query(&x, 0.0)?;
        x = obj.composite.prox(&(&x - q.grad / l), 1.0 / l)?;
        sum += &x;
        let avg = &sum / k as f64;
        report.push_row(HistoryRow {
            iter: k,
            gap: monitor.map(|m| m(&avg)).unwrap_or(f64::NAN),
            tally: obj.tally().since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
    }
    report.x_final = sum / n as f64;
    report.iterations = n;
    report.smooth_queries = n as u64;
    report.composite_queries = n as u64;
    report.tally = obj.tally().since(&t0);
    report.converged = true;
    report.notes.push(format!("last iterate {:?}", x.as_slice()));
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

// s(x) + w/2 |x - c|^2.
struct Anchored<'a> {
    inner: &'a mut dyn SmoothOracle,
    weight: f64,
    center: Vector,
}

impl SmoothOracle for Anchored<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        let q = self.inner.query(x, delta)?;
        let d = x - &self.center;
        Ok(FirstOrder {
            value: q.value + 0.5 * self.weight * d.norm_squared(),
            grad: q.grad + d * self.weight,
        })
    }
    fn grad_error(&self, delta: f64) -> f64 {
        self.inner.grad_error(delta)
    }
    fn delta_for_grad_error(&self, err: f64) -> f64 {
        self.inner.delta_for_grad_error(err)
    }
    fn tally(&self) -> OracleTally {
        self.inner.tally()
    }
}

#[derive(Debug, Clone)]
pub struct CatalystOptions {
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for CatalystOptions {
    fn default() -> Self {
        CatalystOptions {
            max_outer: 100_000,
            max_inner: 10_000,
        }
    }
}

/// Catalyst outer loop with momentum (1 - sqrt q)/(1 + sqrt q), q = mu/(mu + reg).
/// Each regularized subproblem r + g + reg/2 |x - y|^2 is solved by composite
/// gradient steps on r, treating g plus the regularizer as the composite whose
/// prox is computed by the restarted fast gradient method. Subproblems stop
/// once their certified gap is at most q/10 of the regularization term (or
/// eps/10); the loop stops on a certified P-gap <= eps.
///
/// `smooth_queries` counts grad r and `composite_queries` counts grad g.
#[allow(clippy::too_many_arguments)]
pub fn catalyst_solve(
    spec: &SlidingSpec,
    r: &mut dyn SmoothOracle,
    g: &mut dyn SmoothOracle,
    set: &FeasibleSet,
    x0: &Vector,
    reg: f64,
    epsilon: f64,
    opts: &CatalystOptions,
) -> Result<SolveReport> {
    spec.validate()?;
    if !(reg > 0.0) || !(epsilon > 0.0) {
        return Err(SolverError::InvalidArgument(format!("reg = {reg}, epsilon = {epsilon}")));
    }
    let clock = Clock::start();
    let mu = spec.mu();
    let q = mu / (mu + reg);
    let beta = (1.0 - q.sqrt()) / (1.0 + q.sqrt());
    let mut r_o = Counting { inner: r, calls: 0 };
    let mut g_o = Counting { inner: g, calls: 0 };
    let t0 = r_o.tally() + g_o.tally();
    let mut report = SolveReport::new(x0.clone());
    let mut x_prev = set.project(x0);
    let mut y = x_prev.clone();
    for k in 0..=opts.max_outer {
        // outer certificate on P at the current point
        let cert = {
            let mut sum = SumOracle { a: &mut r_o, b: &mut g_o };
            let mut ind = SetIndicator { set: set.clone() };
            let mut obj = CompositeObjective::new(&mut sum, &mut ind, spec.l_r + spec.l_g, mu);
            certify(&mut obj, &x_prev, 0.0)?
        };
        report.push_row(HistoryRow {
            iter: k,
            gap: cert.gap_bound,
            tally: (r_o.tally() + g_o.tally()).since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
        if cert.gap_bound <= epsilon {
            report.x_final = cert.point;
            report.certified_gap = cert.gap_bound;
            report.converged = true;
            report.iterations = k;
            break;
        }
        if k == opts.max_outer {
            return Err(SolverError::BudgetExceeded {
                iterations: k,
                certified: cert.gap_bound,
                best: Box::new(cert.point),
            });
        }
        // subproblem around y by composite gradient steps from x_prev
        let mut xs = x_prev.clone();
        let mut solved = None;
        for _ in 0..opts.max_inner {
            let gr = r_o.query(&xs, 0.0)?.grad;
            let v = &xs - gr / spec.l_r;
            let target_abs = 0.1 * epsilon;
            let step_acc = 1e-3 * target_abs / spec.l_r;
            let mut anchored = Anchored {
                inner: &mut g_o,
                weight: reg,
                center: y.clone(),
            };
            let mut sp = SmoothProx::new(&mut anchored, spec.l_g + reg, spec.mu_g + reg, set.clone(), step_acc);
            xs = sp.prox(&v, 1.0 / spec.l_r)?;
            // certificate of the regularized subproblem
            let mut anchored = Anchored {
                inner: &mut g_o,
                weight: reg,
                center: y.clone(),
            };
            let mut sum = SumOracle { a: &mut r_o, b: &mut anchored };
            let mut ind = SetIndicator { set: set.clone() };
            let mut obj = CompositeObjective::new(&mut sum, &mut ind, spec.l_r + spec.l_g + reg, mu + reg);
            let c = certify(&mut obj, &xs, 0.0)?;
            let rel = q / 10.0 * 0.5 * reg * (&c.point - &y).norm_squared();
            if c.gap_bound <= rel.max(target_abs) {
                solved = Some(c.point);
                break;
            }
        }
        let xk = solved.ok_or(SolverError::BudgetExceeded {
            iterations: k,
            certified: cert.gap_bound,
            best: Box::new(x_prev.clone()),
        })?;
        y = set.project(&(&xk + (&xk - &x_prev) * beta));
        x_prev = xk;
    }
    report.smooth_queries = r_o.calls;
    report.composite_queries = g_o.calls;
    report.tally = (r_o.tally() + g_o.tally()).since(&t0);
    report.notes.push(format!("q {q:.3e}, momentum {beta:.6}"));
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlidingEngine {
    #[default]
    Apg,
    Catalyst,
}

/// Minimizes r + g to accuracy eps with the chosen engine. Catalyst uses
/// the regularization reg = l_r of the smaller-constant term.
#[allow(clippy::too_many_arguments)]
pub fn sliding_solve(
    spec: &SlidingSpec,
    r: &mut dyn SmoothOracle,
    g: &mut dyn SmoothOracle,
    set: &FeasibleSet,
    x0: &Vector,
    epsilon: f64,
    engine: SlidingEngine,
    gap_bound: Option<f64>,
) -> Result<SolveReport> {
    match engine {
        SlidingEngine::Apg => {
            let opts = ApgOptions {
                gap_bound,
                ..Default::default()
            };
            let mut out = apg_inexact_solve(spec, r, g, set, x0, epsilon, opts)?;
            out.report.smooth_queries += out.setup_r_calls;
            out.report.composite_queries += out.setup_g_calls;
            Ok(out.report)
        }
        SlidingEngine::Catalyst => {
            let reg = spec.l_r.min(spec.l_g);
            catalyst_solve(spec, r, g, set, x0, reg, epsilon, &CatalystOptions::default())
        }
    }
}

/// Runs `restarts` blocks of `per_restart` fast-gradient iterations, each
/// block restarted from the previous output. Exactly restarts * per_restart
/// smooth queries.
pub fn run_fixed_restarts(
    obj: &mut CompositeObjective,
    x0: &Vector,
    per_restart: usize,
    restarts: usize,
    delta: f64,
) -> Result<Vector> {
    let mut x = x0.clone();
    for _ in 0..restarts {
        x = run_fgm(obj, &x, per_restart, delta, None)?.x_final;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticOracle;
    use crate::problem::Matrix;
    use crate::tally::OracleKind;
    use approx::assert_relative_eq;

    #[test]
    fn params_reference_values() {
        let spec = SlidingSpec::new(1.0, 1.0, 0.0, 1.0);
        let p = alg5_params(&spec, 0.16, 1.0).unwrap();
        assert_eq!(p.c1, 8.0);
        assert_relative_eq!(p.alpha, 0.25 * 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.alpha, 0.17678, epsilon = 1e-5);
        assert_relative_eq!(p.eta, 1.09540, epsilon = 1e-5);
        assert_relative_eq!(p.beta, 0.72615, epsilon = 1e-5);
        assert_relative_eq!(p.c4, 2.0, epsilon = 1e-14);
        assert_relative_eq!(p.delta_rel_inner, 1.0 / 256.0);
        assert_relative_eq!(p.delta_r, 1.7678e-3, epsilon = 1e-7);
        assert!(p.ranges_hold());
    }

    #[test]
    fn params_at_modulus_limit() {
        // mu = l_r + mu_g
        let spec = SlidingSpec::new(1.0, 2.0, 1.0, 0.0);
        let p = alg5_params(&spec, 1e-3, 1.0).unwrap();
        assert_relative_eq!(p.alpha, 0.25, epsilon = 1e-15);
        assert!(p.beta >= 0.5);
    }

    #[test]
    fn normalization_swaps_and_shifts() {
        let n = normalize(&SlidingSpec::new(10.0, 1.0, 0.0, 0.5));
        assert!(n.swapped);
        assert_eq!(n.spec.l_r, 0.75);
        assert_eq!(n.spec.l_g, 10.25);
        // after the swap only r is strongly convex, so half its modulus moves to g
        assert_eq!(n.shift, 0.25);
        assert_eq!(n.spec.mu_g, 0.25);
        assert_eq!(n.spec.mu(), 0.5);
    }

    fn quad(diag: &[f64], b: &[f64], kind: OracleKind) -> QuadraticOracle {
        QuadraticOracle::counted(
            Matrix::from_diagonal(&Vector::from_column_slice(diag)),
            Vector::from_column_slice(b),
            kind,
        )
    }

    #[test]
    fn gm_counts_and_monotone_history() {
        let mut s = quad(&[1.0, 2.0], &[1.0, 1.0], OracleKind::GradR);
        let mut c = IsotropicQuadratic {
            weight: 1.0,
            center: Vector::zeros(2),
            set: FeasibleSet::AllSpace,
        };
        // f = r + |x|^2/2, minimizer b/(diag + 1)
        let xs = Vector::from_vec(vec![0.5, 1.0 / 3.0]);
        let f = |x: &Vector| 0.5 * (2.0 * x[0] * x[0] + 3.0 * x[1] * x[1]) - x.sum();
        let fstar = f(&xs);
        let mon = |x: &Vector| f(x) - fstar;
        let mut obj = CompositeObjective::new(&mut s, &mut c, 2.0, 1.0);
        let rep = composite_gm_solve(&mut obj, &Vector::from_vec(vec![3.0, -3.0]), 50, Some(&mon)).unwrap();
        assert_eq!(rep.tally.get(OracleKind::GradR), 50);
        for w in rep.history.windows(2) {
            assert!(w[1].gap <= w[0].gap + 1e-15);
        }
        let rep = composite_gm_solve(&mut obj, &xs, 5, None).unwrap();
        assert!((rep.x_final - &xs).norm() < 1e-14);
        let rep = composite_gm_solve(&mut obj, &xs, 1, None).unwrap();
        assert_eq!(rep.tally.get(OracleKind::GradR), 1);
    }

    #[test]
    fn apg_counts_match_schedule() {
        let spec = SlidingSpec::new(1.0, 100.0, 0.5, 0.5);
        let mut r = quad(&[1.0, 0.5], &[1.0, 0.0], OracleKind::GradR);
        let mut g = quad(&[100.0, 0.5], &[0.0, 1.0], OracleKind::GradH);
        let opts = ApgOptions {
            gap_bound: Some(10.0),
            ..Default::default()
        };
        let out = apg_inexact_solve(&spec, &mut r, &mut g, &FeasibleSet::AllSpace, &Vector::zeros(2), 1e-6, opts).unwrap();
        let p = out.params;
        assert_eq!(out.report.smooth_queries as usize, p.k_outer);
        assert_eq!(out.report.composite_queries as usize, p.k_outer * p.t_inner);
        assert_eq!(r.tally().get(OracleKind::GradR) as usize, p.k_outer);
        assert_eq!(g.tally().get(OracleKind::GradH) as usize, p.k_outer * p.t_inner);
        // minimizer of the sum
        let xs = Vector::from_vec(vec![1.0 / 101.0, 1.0]);
        assert!((&out.report.x_final - &xs).norm() < 1e-2);
    }

    #[test]
    fn apg_fixed_point() {
        let spec = SlidingSpec::new(1.0, 4.0, 1.0, 1.0);
        let mut r = quad(&[1.0], &[1.0], OracleKind::GradR);
        let mut g = quad(&[4.0], &[4.0], OracleKind::GradH);
        let xs = Vector::from_vec(vec![1.0]);
        let opts = ApgOptions {
            gap_bound: Some(1.0),
            ..Default::default()
        };
        let out = apg_inexact_solve(&spec, &mut r, &mut g, &FeasibleSet::AllSpace, &xs, 1e-6, opts).unwrap();
        assert!((out.report.x_final[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn catalyst_well_conditioned() {
        let spec = SlidingSpec::new(1.0, 1.0, 0.5, 0.5);
        let mut r = quad(&[1.0, 1.0], &[1.0, 2.0], OracleKind::GradR);
        let mut g = quad(&[1.0, 1.0], &[0.0, 0.0], OracleKind::GradH);
        let rep = catalyst_solve(&spec, &mut r, &mut g, &FeasibleSet::AllSpace, &Vector::zeros(2), 1.0, 1e-6, &Default::default()).unwrap();
        assert!(rep.iterations <= 5, "{} outer iterations", rep.iterations);
        assert!((rep.x_final - Vector::from_vec(vec![0.5, 1.0])).norm() < 1e-3);
    }

    #[test]
    fn sliding_one_dimensional_exact() {
        let spec = SlidingSpec::new(1.0, 3.0, 1.0, 3.0);
        let mut r = quad(&[1.0], &[1.0], OracleKind::GradR);
        let mut g = quad(&[3.0], &[0.0], OracleKind::GradH);
        let rep = sliding_solve(&spec, &mut r, &mut g, &FeasibleSet::AllSpace, &Vector::zeros(1), 1e-10, SlidingEngine::Apg, None).unwrap();
        let x = rep.x_final[0];
        let gap = 2.0 * x * x - x - (-1.0 / 8.0);
        assert!(gap <= 1e-10, "gap {gap}");
    }
}
