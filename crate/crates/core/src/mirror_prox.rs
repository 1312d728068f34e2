//! Extragradient (Mirror Prox with Euclidean prox) for monotone variational
//! inequalities, and its restarted form for strongly monotone operators.

use crate::error::{Result, SolverError};
use crate::problem::{FeasibleSet, SaddleProblem, Vector};
use crate::report::{Clock, HistoryRow, SolveReport};
use crate::tally::OracleTally;

/// Monotone operator on a product of feasible sets.
pub trait ViOperator {
    fn dim(&self) -> usize;
    fn evaluate(&mut self, z: &Vector) -> Result<Vector>;
    fn lipschitz(&self) -> f64;
    /// Strong-monotonicity modulus; 0 for merely monotone operators.
    fn modulus(&self) -> f64;
    fn project(&self, z: &Vector) -> Vector;
    fn tally(&self) -> OracleTally {
        OracleTally::new()
    }
}

/// Operator given by a closure on a single feasible set.
pub struct FnOperator<F> {
    f: F,
    dim: usize,
    l: f64,
    mu: f64,
    set: FeasibleSet,
}

impl<F: FnMut(&Vector) -> Vector> FnOperator<F> {
    pub fn new(dim: usize, l: f64, mu: f64, f: F) -> Self {
        FnOperator {
            f,
            dim,
            l,
            mu,
            set: FeasibleSet::AllSpace,
        }
    }

    pub fn on_set(mut self, set: FeasibleSet) -> Self {
        self.set = set;
        self
    }
}

impl<F: FnMut(&Vector) -> Vector> ViOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn evaluate(&mut self, z: &Vector) -> Result<Vector> {
        crate::error::check_dim(self.dim, z)?;
        Ok((self.f)(z))
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
    fn modulus(&self) -> f64 {
        self.mu
    }
    fn project(&self, z: &Vector) -> Vector {
        self.set.project(z)
    }
}

/// G(x,y) = (grad r(x) + grad_x F(x,y), -grad_y F(x,y) + grad h(y)) on Q_x x Q_y.
pub struct SaddleOperator<'p> {
    problem: &'p SaddleProblem,
    l: f64,
    mu: f64,
    tally: OracleTally,
}

impl<'p> SaddleOperator<'p> {
    /// Overrides the declared Lipschitz bound, e.g. with an exact spectral one.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    pub fn split(&self, z: &Vector) -> (Vector, Vector) {
        let n = self.problem.spec.dim_x;
        let m = self.problem.spec.dim_y;
        (z.rows(0, n).into_owned(), z.rows(n, m).into_owned())
    }
}

pub fn stack(x: &Vector, y: &Vector) -> Vector {
    let mut z = Vector::zeros(x.len() + y.len());
    z.rows_mut(0, x.len()).copy_from(x);
    z.rows_mut(x.len(), y.len()).copy_from(y);
    z
}

/// Builds the VI operator of a saddle problem. Needs gradients of r and h.
pub fn assemble_saddle_operator(problem: &SaddleProblem) -> Result<SaddleOperator<'_>> {
    let s = &problem.spec;
    if problem.r.grad.is_none() || problem.h.grad.is_none() {
        return Err(SolverError::Unsupported(
            "the VI operator needs gradient oracles of r and h".into(),
        ));
    }
    let (lx, ly) = match (s.l_x, s.l_y) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(SolverError::Unsupported(
                "the VI operator needs declared l_x and l_y".into(),
            ))
        }
    };
    Ok(SaddleOperator {
        problem,
        l: (s.l_xx + lx).max(s.l_yy + ly) + s.l_xy,
        mu: s.mu_x.min(s.mu_y),
        tally: OracleTally::new(),
    })
}

impl ViOperator for SaddleOperator<'_> {
    fn dim(&self) -> usize {
        self.problem.spec.dim_x + self.problem.spec.dim_y
    }

    fn evaluate(&mut self, z: &Vector) -> Result<Vector> {
        crate::error::check_dim(self.dim(), z)?;
        let (x, y) = self.split(z);
        let p = self.problem;
        let gx = p.grad_r(&x, &mut self.tally)? + p.grad_x_f(&x, &y, &mut self.tally)?;
        let gy = p.grad_h(&y, &mut self.tally)? - p.grad_y_f(&x, &y, &mut self.tally)?;
        Ok(stack(&gx, &gy))
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn modulus(&self) -> f64 {
        self.mu
    }

    fn project(&self, z: &Vector) -> Vector {
        let (x, y) = self.split(z);
        stack(&self.problem.spec.set_x.project(&x), &self.problem.spec.set_y.project(&y))
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

#[derive(Debug, Clone, Default)]
pub struct MpOptions {
    /// Known solution; enables the averaged-residual history.
    pub reference: Option<Vector>,
    /// One projected step per iteration instead of the extragradient pair.
    pub single_step: bool,
}

/// `n` iterations with step 1/L from `z0`. Returns the average of the leading
/// points. With a reference solution z*, history row k holds
/// (1/k) sum_{i<=k} <G(w_i), w_i - z*>.
pub fn run_mirror_prox(op: &mut dyn ViOperator, z0: &Vector, n: usize, opts: &MpOptions) -> Result<SolveReport> {
    crate::error::check_dim(op.dim(), z0)?;
    if n == 0 {
        return Err(SolverError::ZeroBudget);
    }
    let l = op.lipschitz();
    if !(l > 0.0 && l.is_finite()) {
        return Err(SolverError::InvalidSpec(format!("operator Lipschitz constant {l}")));
    }
    let clock = Clock::start();
    let t0 = op.tally();
    let mut z = op.project(z0);
    let mut sum = Vector::zeros(z.len());
    let mut acc = 0.0;
    let mut evals = 0u64;
    let mut report = SolveReport::new(z0.clone());
    for k in 1..=n {
        let g = op.evaluate(&z)?;
        evals += 1;
        let w = op.project(&(&z - &g / l));
        let gw = if opts.single_step {
            z = w.clone();
            None
        } else {
            let gw = op.evaluate(&w)?;
            evals += 1;
            z = op.project(&(&z - &gw / l));
            Some(gw)
        };
        sum += &w;
        let gap = match &opts.reference {
            Some(zs) => {
                let gw = match gw {
                    Some(v) => v,
                    None => {
                        evals += 1;
                        op.evaluate(&w)?
                    }
                };
                acc += gw.dot(&(&w - zs));
                acc / k as f64
            }
            None => f64::NAN,
        };
        report.push_row(HistoryRow {
            iter: k,
            gap,
            tally: op.tally().since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
    }
    report.x_final = sum / n as f64;
    report.iterations = n;
    report.smooth_queries = evals;
    report.tally = op.tally().since(&t0);
    report.converged = true;
    let mu = op.modulus();
    if let (Some(zs), true) = (&opts.reference, mu > 0.0) {
        report.certified_gap = l * (zs - z0).norm_squared() / (2.0 * mu * n as f64);
    }
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

/// Bound on |z - z*| from the natural residual z - P(z - G(z)/L):
/// |z - z*| <= |d| (1 + 2L/mu). Costs one evaluation.
pub fn residual_distance_bound(op: &mut dyn ViOperator, z: &Vector) -> Result<f64> {
    let l = op.lipschitz();
    let g = op.evaluate(z)?;
    let d = z - op.project(&(z - g / l));
    Ok(d.norm() * (1.0 + 2.0 * l / op.modulus()))
}

#[derive(Debug, Clone)]
pub struct RestartedMpOptions {
    pub max_restarts: usize,
    pub single_step: bool,
}

impl Default for RestartedMpOptions {
    fn default() -> Self {
        RestartedMpOptions {
            max_restarts: 500,
            single_step: false,
        }
    }
}

/// Restarts of ceil(L/mu) iterations, each halving the squared distance
/// bound, until mu |z - z*|^2 <= epsilon is certified. The bound is refreshed
/// from the natural residual after every restart.
pub fn run_restarted_mp(
    op: &mut dyn ViOperator,
    z0: &Vector,
    epsilon: f64,
    opts: &RestartedMpOptions,
) -> Result<SolveReport> {
    let mu = op.modulus();
    if !(mu > 0.0) {
        return Err(SolverError::InvalidSpec(format!("operator modulus {mu}")));
    }
    if !(epsilon > 0.0) {
        return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}")));
    }
    let l = op.lipschitz();
    let n = ((l / mu).ceil() as usize).max(1);
    let clock = Clock::start();
    let t0 = op.tally();
    let mut report = SolveReport::new(z0.clone());
    let mut z = op.project(z0);
    let mut r = residual_distance_bound(op, &z)?;
    report.smooth_queries += 1;
    let mp_opts = MpOptions {
        reference: None,
        single_step: opts.single_step,
    };
    for restart in 0..=opts.max_restarts {
        report.push_row(HistoryRow {
            iter: restart,
            gap: mu * r * r,
            tally: op.tally().since(&t0),
            wall_ms: clock.elapsed_ms(),
        });
        if mu * r * r <= epsilon {
            report.x_final = z;
            report.certified_gap = mu * r * r;
            report.converged = true;
            report.tally = op.tally().since(&t0);
            report.notes.push(format!("{restart} restarts of {n} iterations"));
            report.wall_ms = clock.elapsed_ms();
            return Ok(report);
        }
        if restart == opts.max_restarts {
            break;
        }
        let sub = run_mirror_prox(op, &z, n, &mp_opts)?;
        report.iterations += sub.iterations;
        report.smooth_queries += sub.smooth_queries;
        z = sub.x_final;
        let post = residual_distance_bound(op, &z)?;
        report.smooth_queries += 1;
        r = post.min(r / std::f64::consts::SQRT_2);
    }
    Err(SolverError::BudgetExceeded {
        iterations: report.iterations,
        certified: mu * r * r,
        best: Box::new(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Component, Coupling, Matrix, SaddleSpec};
    use crate::tally::OracleKind;

    fn b1() -> SaddleProblem {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        let spec = SaddleSpec {
            l_xx: 0.0,
            l_xy: 2.0,
            l_yy: 0.0,
            l_x: Some(1.0),
            l_y: Some(1.0),
            mu_x: 1.0,
            mu_y: 1.0,
            dim_x: 2,
            dim_y: 2,
            set_x: FeasibleSet::AllSpace,
            set_y: FeasibleSet::AllSpace,
            spectral: None,
            bilinear: true,
        };
        SaddleProblem::new(
            spec,
            Component::isotropic_quadratic(1.0, Vector::from_vec(vec![1.0, 1.0]), FeasibleSet::AllSpace),
            Component::isotropic_quadratic(1.0, Vector::zeros(2), FeasibleSet::AllSpace),
            Coupling::bilinear(a),
        )
        .unwrap()
    }

    #[test]
    fn b1_operator_values() {
        let p = b1();
        let mut op = assemble_saddle_operator(&p).unwrap();
        let g = op.evaluate(&Vector::from_vec(vec![1.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.0, -1.0, -2.0]);
        let g = op.evaluate(&Vector::from_vec(vec![0.5, 0.2, 0.5, 0.4])).unwrap();
        assert!(g.norm() < 1e-15);
        assert_eq!(op.modulus(), 1.0);
        assert_eq!(op.tally().get(OracleKind::Matvec), 4);
    }

    #[test]
    fn decoupled_operator_is_identity() {
        let mut p = b1();
        p.f = Coupling::zero();
        p.r = Component::isotropic_quadratic(1.0, Vector::zeros(2), FeasibleSet::AllSpace);
        let mut op = assemble_saddle_operator(&p).unwrap();
        let z = Vector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        assert_eq!(op.evaluate(&z).unwrap(), z);
    }

    #[test]
    fn prox_only_problem_is_unsupported() {
        let mut p = b1();
        p.r.grad = None;
        assert!(matches!(assemble_saddle_operator(&p), Err(SolverError::Unsupported(_))));
    }

    #[test]
    fn identity_operator_one_step() {
        let mut op = FnOperator::new(3, 1.0, 1.0, |z: &Vector| z.clone());
        let rep = run_mirror_prox(&mut op, &Vector::from_vec(vec![1.0, 2.0, 3.0]), 5, &MpOptions::default()).unwrap();
        assert!(rep.x_final.norm() < 1e-15);
        let rep = run_restarted_mp(&mut op, &Vector::from_vec(vec![1.0, 2.0, 3.0]), 1e-10, &Default::default()).unwrap();
        assert!(rep.history.len() <= 3);
        assert!(rep.x_final.norm() < 1e-10);
    }

    #[test]
    fn zero_budget() {
        let mut op = FnOperator::new(1, 1.0, 1.0, |z: &Vector| z.clone());
        assert!(matches!(
            run_mirror_prox(&mut op, &Vector::zeros(1), 0, &MpOptions::default()),
            Err(SolverError::ZeroBudget)
        ));
    }

    #[test]
    fn b1_averaged_bound_and_restarts() {
        let p = b1();
        let zs = Vector::from_vec(vec![0.5, 0.2, 0.5, 0.4]);
        let mut op = assemble_saddle_operator(&p).unwrap();
        let l = op.lipschitz();
        let z0 = Vector::zeros(4);
        let rep = run_mirror_prox(&mut op, &z0, 100, &MpOptions { reference: Some(zs.clone()), single_step: false }).unwrap();
        for row in &rep.history {
            assert!(row.gap <= l * zs.norm_squared() / (2.0 * row.iter as f64) + 1e-12);
        }
        let rep = run_restarted_mp(&mut op, &z0, 1e-8, &Default::default()).unwrap();
        assert!((&rep.x_final - &zs).norm() <= 1e-4);
    }

    #[test]
    fn monotonicity_on_random_pairs() {
        let p = b1();
        let mut op = assemble_saddle_operator(&p).unwrap();
        let mut seed = 1u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let z1 = Vector::from_fn(4, |_, _| next());
            let z2 = Vector::from_fn(4, |_, _| next());
            let d = &z1 - &z2;
            let lhs = (op.evaluate(&z1).unwrap() - op.evaluate(&z2).unwrap()).dot(&d);
            assert!(lhs >= op.modulus() * d.norm_squared() - 1e-9);
        }
    }
}
