//! Fast gradient method for composite problems with a (delta, L)-oracle and
//! its restarted version for strongly convex objectives.

use crate::error::{Result, SolverError};
use crate::objective::{
    certify, CompositeObjective, IsotropicQuadratic, ProxTerm, Scaled, SmoothOracle,
};
use crate::problem::{FeasibleSet, Vector};
use crate::report::{Clock, HistoryRow, SolveReport};
use crate::tally::OracleTally;

/// Larger root of l a^2 = big_a + a.
pub fn next_alpha(big_a: f64, l: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * l * big_a).sqrt()) / (2.0 * l)
}

#[derive(Debug, Clone)]
pub struct FgmState {
    pub x: Vector,
    pub y: Vector,
    pub u: Vector,
    pub big_a: f64,
    pub iteration: usize,
}

impl FgmState {
    pub fn new(x0: &Vector) -> Self {
        FgmState {
            x: x0.clone(),
            y: x0.clone(),
            u: x0.clone(),
            big_a: 0.0,
            iteration: 0,
        }
    }

    /// One iteration: a single smooth query at y and one prox step.
    pub fn step(&mut self, obj: &mut CompositeObjective, delta: f64) -> Result<()> {
        let alpha = next_alpha(self.big_a, obj.l_smooth);
        let a_next = self.big_a + alpha;
        self.y = (&self.u * alpha + &self.x * self.big_a) / a_next;
        let q = obj.smooth.query(&self.y, delta)?;
        self.u = obj.composite.prox(&(&self.u - q.grad * alpha), alpha)?;
        self.x = (&self.u * alpha + &self.x * self.big_a) / a_next;
        self.big_a = a_next;
        self.iteration += 1;
        Ok(())
    }
}

fn check_constants(obj: &CompositeObjective) -> Result<()> {
    if !(obj.l_smooth > 0.0 && obj.l_smooth.is_finite()) {
        return Err(SolverError::InvalidSpec(format!("l_smooth = {}", obj.l_smooth)));
    }
    Ok(())
}

/// Runs `n` iterations of the fast gradient method from `x0` with per-call
/// inexactness `delta`. When `monitor` is given, it maps an iterate to its
/// objective gap and the history records it at every iteration.
pub fn run_fgm(
    obj: &mut CompositeObjective,
    x0: &Vector,
    n: usize,
    delta: f64,
    monitor: Option<&dyn Fn(&Vector) -> f64>,
) -> Result<SolveReport> {
    check_constants(obj)?;
    crate::error::check_dim(obj.dim(), x0)?;
    if n == 0 {
        return Err(SolverError::ZeroBudget);
    }
    let clock = Clock::start();
    let t0 = obj.tally();
    let mut st = FgmState::new(x0);
    let mut report = SolveReport::new(x0.clone());
    if let Some(m) = monitor {
        report.push_row(HistoryRow {
            iter: 0,
            gap: m(x0),
            tally: OracleTally::new(),
            wall_ms: clock.elapsed_ms(),
        });
    }
    for _ in 0..n {
        st.step(obj, delta)?;
        report.push_row(HistoryRow {
            iter: st.iteration,
            gap: monitor.map(|m| m(&st.x)).unwrap_or(f64::NAN),
            tally: obj.tally().since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
    }
    report.iterations = n;
    report.smooth_queries = n as u64;
    report.composite_queries = n as u64;
    report.tally = obj.tally().since(&t0);
    report.wall_ms = clock.elapsed_ms();
    report.x_final = st.x;
    Ok(report)
}

/// Restart budgets and counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestartSchedule {
    /// N = ceil(3 sqrt(2L/mu)) iterations, ceil(log2(mu R^2/eps)) restarts.
    #[default]
    Header,
    /// N = ceil(3e sqrt(L/mu)) iterations, ceil(ln(mu R^2/eps)/2) restarts.
    Text,
}

impl RestartSchedule {
    pub fn iterations_per_restart(self, l: f64, mu: f64) -> usize {
        let n = match self {
            RestartSchedule::Header => 3.0 * (2.0 * l / mu).sqrt(),
            RestartSchedule::Text => 3.0 * std::f64::consts::E * (l / mu).sqrt(),
        };
        (n.ceil() as usize).max(1)
    }

    /// Restart count for mu R^2 / eps, with R^2 = |x0 - x*|^2 / 2.
    pub fn restarts(self, mu: f64, r2: f64, eps: f64) -> usize {
        let ratio = mu * r2 / eps;
        if ratio <= 1.0 {
            return 1;
        }
        let p = match self {
            RestartSchedule::Header => ratio.log2(),
            RestartSchedule::Text => 0.5 * ratio.ln(),
        };
        (p.ceil() as usize).max(1)
    }
}

/// Per-call inexactness for a restart of `n` iterations started at distance
/// at most `dist` from the minimizer: L R^2 / (4 N^3) with R^2 = dist^2 / 2.
pub fn restart_delta(l: f64, dist: f64, n: usize) -> f64 {
    let r2 = 0.5 * dist * dist;
    l * r2 / (4.0 * (n as f64).powi(3))
}

/// Factor by which one restart of `n` iterations shrinks the squared distance
/// bound under the schedule of `restart_delta`.
pub fn restart_contraction(l: f64, mu: f64, n: usize) -> f64 {
    8.5 * l / (mu * (n as f64).powi(2))
}

#[derive(Default)]
pub struct RestartOptions<'m> {
    pub schedule: RestartSchedule,
    /// Known bound on |x0 - x*|. Without it, one certificate query at x0 is spent.
    pub radius: Option<f64>,
    pub monitor: Option<&'m dyn Fn(&Vector) -> f64>,
}

/// Restarted fast gradient method with an a-priori schedule.
///
/// The restart count follows from the initial distance bound; the returned
/// `certified_gap` is the a-priori bound on f(x) - f* after the last restart.
pub fn run_restarted_fgm(
    obj: &mut CompositeObjective,
    x0: &Vector,
    epsilon: f64,
    opts: RestartOptions,
) -> Result<SolveReport> {
    check_constants(obj)?;
    if !(obj.mu > 0.0) {
        return Err(SolverError::InvalidSpec(format!("mu = {}", obj.mu)));
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}")));
    }
    let clock = Clock::start();
    let t0 = obj.tally();
    let (l, mu) = (obj.l_smooth, obj.mu);
    let mut report = SolveReport::new(x0.clone());
    let (mut x, mut dist) = match opts.radius {
        Some(r) => (x0.clone(), r),
        None => {
            let c = certify(obj, x0, 0.0)?;
            report.smooth_queries += 1;
            report.composite_queries += 1;
            (c.point, c.dist_bound)
        }
    };
    let n = opts.schedule.iterations_per_restart(l, mu);
    let rho = restart_contraction(l, mu, n);
    let p = opts.schedule.restarts(mu, 0.5 * dist * dist, epsilon);
    report.notes.push(format!("restarts {p} x {n} iterations"));
    let mut last_bound = f64::INFINITY;
    for _ in 0..p {
        let delta = restart_delta(l, dist, n);
        let offset = obj.tally().since(&t0);
        let ms = clock.elapsed_ms();
        let sub = run_fgm(obj, &x, n, delta, opts.monitor)?;
        report.append_history(&sub, offset, ms);
        report.smooth_queries += sub.smooth_queries;
        report.composite_queries += sub.composite_queries;
        report.iterations += sub.iterations;
        x = sub.x_final;
        last_bound = 4.25 * l / (n as f64).powi(2) * dist * dist;
        dist *= rho.sqrt();
    }
    report.x_final = x;
    report.certified_gap = last_bound;
    report.converged = last_bound <= epsilon;
    report.tally = obj.tally().since(&t0);
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct CertifiedOptions {
    pub schedule: RestartSchedule,
    pub max_restarts: usize,
}

impl Default for CertifiedOptions {
    fn default() -> Self {
        CertifiedOptions {
            schedule: RestartSchedule::Header,
            max_restarts: 200,
        }
    }
}

/// Restarted fast gradient method that stops on an a-posteriori certificate
/// f(x) - f* <= tol, checked before the first restart and after every one.
///
/// Each restart starts from the last certified point, so the certificate's
/// distance bound fixes the inexactness schedule of the restart.
pub fn minimize_certified(
    obj: &mut CompositeObjective,
    x0: &Vector,
    tol: f64,
    opts: CertifiedOptions,
) -> Result<SolveReport> {
    check_constants(obj)?;
    if !(obj.mu > 0.0) {
        return Err(SolverError::InvalidSpec(format!("mu = {}", obj.mu)));
    }
    if !(tol > 0.0) {
        return Err(SolverError::InvalidArgument(format!("tolerance = {tol}")));
    }
    let clock = Clock::start();
    let t0 = obj.tally();
    let (l, mu) = (obj.l_smooth, obj.mu);
    let n = opts.schedule.iterations_per_restart(l, mu);
    // keep the certificate's gradient error well inside the tolerance
    let cert_delta = {
        let d = obj.smooth.delta_for_grad_error(0.25 * (2.0 * mu * tol).sqrt());
        if d.is_finite() {
            d
        } else {
            tol
        }
    };
    let mut report = SolveReport::new(x0.clone());
    let mut x = x0.clone();
    let mut best: Option<(f64, Vector)> = None;
    for restart in 0..=opts.max_restarts {
        let cert = certify(obj, &x, cert_delta)?;
        report.smooth_queries += 1;
        report.composite_queries += 1;
        report.push_row(HistoryRow {
            iter: report.iterations,
            gap: cert.gap_bound,
            tally: obj.tally().since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
        if best.as_ref().map_or(true, |(b, _)| cert.gap_bound < *b) {
            best = Some((cert.gap_bound, cert.point.clone()));
        }
        if cert.gap_bound <= tol {
            report.x_final = cert.point;
            report.certified_gap = cert.gap_bound;
            report.converged = true;
            report.tally = obj.tally().since(&t0);
            report.wall_ms = clock.elapsed_ms();
            return Ok(report);
        }
        if restart == opts.max_restarts {
            break;
        }
        let delta = restart_delta(l, cert.dist_bound, n).min(cert_delta.max(0.0));
        let sub = run_fgm(obj, &cert.point, n, delta, None)?;
        report.iterations += sub.iterations;
        report.smooth_queries += sub.smooth_queries;
        report.composite_queries += sub.composite_queries;
        x = sub.x_final;
    }
    let (b, bx) = best.expect("at least one certificate");
    Err(SolverError::BudgetExceeded {
        iterations: report.iterations,
        certified: b,
        best: Box::new(bx),
    })
}

/// Smooth term used as a composite: its prox is computed by
/// `minimize_certified` to absolute accuracy `accuracy` on the prox objective.
pub struct SmoothProx<'a> {
    pub oracle: &'a mut dyn SmoothOracle,
    pub l: f64,
    pub mu: f64,
    pub set: FeasibleSet,
    pub accuracy: f64,
    /// Smooth-oracle queries spent inside prox steps.
    pub queries: u64,
}

impl<'a> SmoothProx<'a> {
    pub fn new(oracle: &'a mut dyn SmoothOracle, l: f64, mu: f64, set: FeasibleSet, accuracy: f64) -> Self {
        SmoothProx {
            oracle,
            l,
            mu,
            set,
            accuracy,
            queries: 0,
        }
    }
}

impl ProxTerm for SmoothProx<'_> {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        let mut scaled = Scaled {
            inner: &mut *self.oracle,
            scale: step,
        };
        let mut quad = IsotropicQuadratic {
            weight: 1.0,
            center: v.clone(),
            set: self.set.clone(),
        };
        // the prox objective is (1 + step mu)-strongly convex; a floor on the
        // smoothness keeps the step finite when the term is affine
        let mu = 1.0 + step * self.mu;
        let l = (step * self.l).max(1e-9 * mu);
        let mut obj = CompositeObjective::new(&mut scaled, &mut quad, l, mu);
        let rep = minimize_certified(&mut obj, &self.set.project(v), self.accuracy, CertifiedOptions::default())?;
        self.queries += rep.smooth_queries;
        Ok(rep.x_final)
    }

    fn tally(&self) -> OracleTally {
        self.oracle.tally()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{QuadraticOracle, SetIndicator};
    use crate::problem::Matrix;
    use approx::assert_relative_eq;

    #[test]
    fn next_alpha_examples() {
        assert_relative_eq!(next_alpha(0.0, 1.0), 1.0);
        assert_relative_eq!(next_alpha(1.0, 1.0), (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(next_alpha(0.0, 2.0), 0.5);
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(RestartSchedule::Header.iterations_per_restart(2.0, 1.0), 6);
        assert_eq!(RestartSchedule::Header.restarts(1.0, 1.0, 0.01), 7);
        assert_eq!(RestartSchedule::Text.iterations_per_restart(1.0, 1.0), 9);
        assert_eq!(RestartSchedule::Text.restarts(1.0, 1.0, 0.01), 3);
    }

    fn scalar_quadratic() -> QuadraticOracle {
        QuadraticOracle::new(Matrix::from_element(1, 1, 1.0), Vector::zeros(1))
    }

    #[test]
    fn one_dimensional_rate() {
        let mut s = scalar_quadratic();
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut s, &mut c, 1.0, 0.0);
        let rep = run_fgm(&mut obj, &Vector::from_element(1, 1.0), 10, 0.0, None).unwrap();
        let f = 0.5 * rep.x_final[0].powi(2);
        assert!(f <= 8.0 * 0.5 / 121.0);
        assert_eq!(rep.smooth_queries, 10);
    }

    #[test]
    fn fixed_point_at_minimizer() {
        let mut s = QuadraticOracle::new(
            Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 3.0])),
            Vector::from_vec(vec![1.0, 3.0]),
        );
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut s, &mut c, 3.0, 1.0);
        let xs = Vector::from_vec(vec![1.0, 1.0]);
        let mut st = FgmState::new(&xs);
        for _ in 0..20 {
            st.step(&mut obj, 0.0).unwrap();
            assert!((&st.x - &xs).norm() < 1e-14);
        }
    }

    #[test]
    fn big_a_growth() {
        let mut s = scalar_quadratic();
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let l = 1.0;
        let mut obj = CompositeObjective::new(&mut s, &mut c, l, 0.0);
        let mut st = FgmState::new(&Vector::from_element(1, 1.0));
        let mut prev = 0.0;
        for k in 1..200 {
            st.step(&mut obj, 0.0).unwrap();
            assert!(st.big_a > prev);
            assert!(st.big_a >= (k * k) as f64 / (4.0 * l));
            prev = st.big_a;
        }
    }

    #[test]
    fn zero_budget_is_error() {
        let mut s = scalar_quadratic();
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut s, &mut c, 1.0, 0.0);
        assert!(matches!(
            run_fgm(&mut obj, &Vector::zeros(1), 0, 0.0, None),
            Err(SolverError::ZeroBudget)
        ));
    }

    #[test]
    fn restarted_reaches_tolerance_on_2d_quadratic() {
        let h = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let b = Vector::from_vec(vec![1.0, -1.0]);
        let xs = h.clone().lu().solve(&b).unwrap();
        let fstar = -0.5 * b.dot(&xs);
        let eig = h.clone().symmetric_eigenvalues();
        let (lmax, lmin) = (eig.max(), eig.min());
        let mut s = QuadraticOracle::new(h.clone(), b.clone());
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut s, &mut c, lmax, lmin);
        let rep = run_restarted_fgm(&mut obj, &Vector::from_vec(vec![5.0, 5.0]), 1e-8, RestartOptions::default()).unwrap();
        let f = 0.5 * rep.x_final.dot(&(&h * &rep.x_final)) - b.dot(&rep.x_final);
        assert!(f - fstar <= 1e-8, "gap {}", f - fstar);
        assert!(rep.converged);
    }

    #[test]
    fn restarted_rejects_zero_modulus() {
        let mut s = scalar_quadratic();
        let mut c = SetIndicator { set: FeasibleSet::AllSpace };
        let mut obj = CompositeObjective::new(&mut s, &mut c, 1.0, 0.0);
        assert!(matches!(
            run_restarted_fgm(&mut obj, &Vector::zeros(1), 1e-3, RestartOptions::default()),
            Err(SolverError::InvalidSpec(_))
        ));
    }

    #[test]
    fn certified_minimization_on_ball() {
        // minimizer (2, 0) lies outside the unit ball; constrained one is (1, 0)
        let h = Matrix::identity(2, 2);
        let b = Vector::from_vec(vec![2.0, 0.0]);
        let mut s = QuadraticOracle::new(h, b);
        let mut c = SetIndicator { set: FeasibleSet::origin_ball(2, 1.0) };
        let mut obj = CompositeObjective::new(&mut s, &mut c, 1.0, 1.0);
        let rep = minimize_certified(&mut obj, &Vector::zeros(2), 1e-10, CertifiedOptions::default()).unwrap();
        assert!((rep.x_final[0] - 1.0).abs() < 1e-4);
        assert!(rep.certified_gap <= 1e-10);
    }

    #[test]
    fn smooth_prox_solves_prox_subproblem() {
        let mut s = QuadraticOracle::new(Matrix::from_element(1, 1, 4.0), Vector::from_element(1, 2.0));
        let mut p = SmoothProx::new(&mut s, 4.0, 4.0, FeasibleSet::AllSpace, 1e-14);
        // argmin t(2x^2 - 2x) + (x - v)^2/2 = (v + 2t)/(1 + 4t)
        let got = p.prox(&Vector::from_element(1, 3.0), 0.5).unwrap();
        assert_relative_eq!(got[0], 4.0 / 3.0, epsilon = 1e-6);
    }
}
