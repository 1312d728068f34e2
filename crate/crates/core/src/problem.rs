//! Problem data: constants, feasible sets and the oracle bundle.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, SolverError};
use crate::tally::{OracleKind, OracleTally};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Feasible set of one block of variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    #[default]
    AllSpace,
    Ball { center: Vec<f64>, radius: f64 },
}

impl FeasibleSet {
    pub fn ball(center: &Vector, radius: f64) -> Self {
        FeasibleSet::Ball {
            center: center.iter().copied().collect(),
            radius,
        }
    }

    /// Origin-centred ball.
    pub fn origin_ball(dim: usize, radius: f64) -> Self {
        FeasibleSet::Ball {
            center: vec![0.0; dim],
            radius,
        }
    }

    pub fn is_all_space(&self) -> bool {
        matches!(self, FeasibleSet::AllSpace)
    }

    pub fn project(&self, v: &Vector) -> Vector {
        match self {
            FeasibleSet::AllSpace => v.clone(),
            FeasibleSet::Ball { center, radius } => {
                let c = Vector::from_column_slice(center);
                let d = v - &c;
                let n = d.norm();
                if n <= *radius {
                    v.clone()
                } else {
                    c + d * (*radius / n)
                }
            }
        }
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        match self {
            FeasibleSet::AllSpace => true,
            FeasibleSet::Ball { center, radius } => {
                let c = Vector::from_column_slice(center);
                (v - c).norm() <= radius + tol
            }
        }
    }

    /// Intersection with an origin-centred ball, when it is again a ball or the
    /// whole space. Returns `None` for a genuine lens.
    pub fn intersect_origin_ball(&self, dim: usize, radius: f64) -> Option<FeasibleSet> {
        if !radius.is_finite() {
            return Some(self.clone());
        }
        match self {
            FeasibleSet::AllSpace => Some(FeasibleSet::origin_ball(dim, radius)),
            FeasibleSet::Ball { center, radius: r } => {
                let cn = center.iter().map(|c| c * c).sum::<f64>().sqrt();
                if cn + r <= radius {
                    Some(self.clone())
                } else if cn == 0.0 {
                    Some(FeasibleSet::origin_ball(dim, r.min(radius)))
                } else {
                    None
                }
            }
        }
    }

    fn validate(&self, dim: usize, name: &str) -> Result<()> {
        if let FeasibleSet::Ball { center, radius } = self {
            if center.len() != dim {
                return Err(SolverError::InvalidSpec(format!(
                    "{name}: ball center has dimension {}, expected {dim}",
                    center.len()
                )));
            }
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(SolverError::InvalidSpec(format!(
                    "{name}: ball radius must be positive, got {radius}"
                )));
            }
            if center.iter().any(|c| !c.is_finite()) {
                return Err(SolverError::InvalidSpec(format!("{name}: non-finite center")));
            }
        }
        Ok(())
    }
}

/// Eigendata of AᵀA for bilinear couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda_max: f64,
    pub lambda_min_plus: f64,
    /// Rank of A; equals `dim_x` when A has a trivial kernel.
    pub rank: usize,
}

/// Declared constants of min_x max_y r(x) + F(x,y) - h(y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpec {
    pub l_xx: f64,
    pub l_xy: f64,
    pub l_yy: f64,
    #[serde(default)]
    pub l_x: Option<f64>,
    #[serde(default)]
    pub l_y: Option<f64>,
    pub mu_x: f64,
    pub mu_y: f64,
    pub dim_x: usize,
    pub dim_y: usize,
    #[serde(default)]
    pub set_x: FeasibleSet,
    #[serde(default)]
    pub set_y: FeasibleSet,
    #[serde(default)]
    pub spectral: Option<SpectralData>,
    /// F(x,y) = <Ax, y>; each partial gradient then costs one matvec.
    #[serde(default)]
    pub bilinear: bool,
}

impl SaddleSpec {
    /// Checks finiteness and signs. Zero moduli are allowed here; solvers that
    /// need strong convexity check that separately.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("l_xx", self.l_xx),
            ("l_xy", self.l_xy),
            ("l_yy", self.l_yy),
            ("mu_x", self.mu_x),
            ("mu_y", self.mu_y),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SolverError::InvalidSpec(format!("{name} = {v}")));
            }
        }
        for (name, v) in [("l_x", self.l_x), ("l_y", self.l_y)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(SolverError::InvalidSpec(format!("{name} = {v}")));
                }
            }
        }
        if self.dim_x == 0 || self.dim_y == 0 {
            return Err(SolverError::InvalidSpec("dimensions must be positive".into()));
        }
        self.set_x.validate(self.dim_x, "set_x")?;
        self.set_y.validate(self.dim_y, "set_y")?;
        if let Some(s) = &self.spectral {
            if !(s.lambda_max.is_finite() && s.lambda_max >= 0.0)
                || !(s.lambda_min_plus.is_finite() && s.lambda_min_plus >= 0.0)
            {
                return Err(SolverError::InvalidSpec("bad spectral data".into()));
            }
        }
        Ok(())
    }

    pub fn require_strong(&self) -> Result<()> {
        if !(self.mu_x > 0.0 && self.mu_y > 0.0) {
            return Err(SolverError::InvalidSpec(format!(
                "mu_x = {}, mu_y = {}; regularize first",
                self.mu_x, self.mu_y
            )));
        }
        Ok(())
    }

    /// Role-swapped constants: x <-> y, r <-> h.
    pub fn swapped(&self) -> SaddleSpec {
        SaddleSpec {
            l_xx: self.l_yy,
            l_xy: self.l_xy,
            l_yy: self.l_xx,
            l_x: self.l_y,
            l_y: self.l_x,
            mu_x: self.mu_y,
            mu_y: self.mu_x,
            dim_x: self.dim_y,
            dim_y: self.dim_x,
            set_x: self.set_y.clone(),
            set_y: self.set_x.clone(),
            spectral: self.spectral.clone(),
            bilinear: self.bilinear,
        }
    }
}

/// L = l_xx + 2 l_xy^2 / mu_y, the smoothness of g(x) = max_y F(x,y) - h(y).
pub fn effective_smoothness(spec: &SaddleSpec) -> Result<f64> {
    if !(spec.mu_y > 0.0) || !spec.mu_y.is_finite() {
        return Err(SolverError::InvalidSpec(format!("mu_y = {}", spec.mu_y)));
    }
    Ok(spec.l_xx + 2.0 * spec.l_xy * spec.l_xy / spec.mu_y)
}

/// Moduli (eps / 2r_x^2, eps / 2r_y^2) of the quadratic regularizers that make
/// an eps-accurate problem strongly convex-concave on balls of radii r_x, r_y.
pub fn regularize(epsilon: f64, r_x: f64, r_y: f64) -> Result<(f64, f64)> {
    for (name, v) in [("epsilon", epsilon), ("r_x", r_x), ("r_y", r_y)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(SolverError::InvalidArgument(format!("{name} = {v}")));
        }
    }
    Ok((epsilon / (2.0 * r_x * r_x), epsilon / (2.0 * r_y * r_y)))
}

pub type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
/// `prox(v, t)` = argmin over the feasible set of t c(x) + |x - v|^2 / 2.
pub type ProxFn = Arc<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;
pub type PairScalarFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
pub type PairVectorFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// Oracles of one composite term (r or h).
#[derive(Clone)]
pub struct Component {
    pub value: ScalarFn,
    pub grad: Option<VectorFn>,
    pub prox: Option<ProxFn>,
}

impl Component {
    pub fn new(value: ScalarFn) -> Self {
        Component {
            value,
            grad: None,
            prox: None,
        }
    }

    pub fn with_grad(mut self, grad: VectorFn) -> Self {
        self.grad = Some(grad);
        self
    }

    pub fn with_prox(mut self, prox: ProxFn) -> Self {
        self.prox = Some(prox);
        self
    }

    /// mu/2 |x|^2 - <b, x> with gradient and closed-form prox over `set`.
    pub fn isotropic_quadratic(mu: f64, b: Vector, set: FeasibleSet) -> Self {
        let bv = b.clone();
        let bg = b.clone();
        Component {
            value: Arc::new(move |x| 0.5 * mu * x.norm_squared() - bv.dot(x)),
            grad: Some(Arc::new(move |x| x * mu - &bg)),
            prox: Some(Arc::new(move |v, t| {
                // argmin t(mu/2 |x|^2 - <b,x>) + |x - v|^2/2 over all space, then
                // projected; exact because the objective is isotropic.
                let u = (v + &b * t) / (1.0 + t * mu);
                set.project(&u)
            })),
        }
    }

    /// The zero function restricted to `set`.
    pub fn indicator(set: FeasibleSet) -> Self {
        Component {
            value: Arc::new(|_| 0.0),
            grad: Some(Arc::new(|x| Vector::zeros(x.len()))),
            prox: Some(Arc::new(move |v, _| set.project(v))),
        }
    }

    /// Adds c/2 |x|^2 to the term, keeping whichever oracles exist.
    pub fn plus_quadratic(&self, c: f64) -> Component {
        if c == 0.0 {
            return self.clone();
        }
        let value = self.value.clone();
        let grad = self.grad.clone();
        let prox = self.prox.clone();
        Component {
            value: Arc::new(move |x| value(x) + 0.5 * c * x.norm_squared()),
            grad: grad.map(|g| -> VectorFn { Arc::new(move |x| g(x) + x * c) }),
            prox: prox.map(|p| -> ProxFn {
                Arc::new(move |v, t| {
                    let s = 1.0 + t * c;
                    p(&(v / s), t / s)
                })
            }),
        }
    }
}

/// Oracles of the coupling F.
#[derive(Clone)]
pub struct Coupling {
    pub value: PairScalarFn,
    pub grad_x: PairVectorFn,
    pub grad_y: PairVectorFn,
}

impl Coupling {
    /// F(x,y) = <Ax, y>.
    pub fn bilinear(a: Matrix) -> Self {
        let a = Arc::new(a);
        let (a1, a2, a3) = (a.clone(), a.clone(), a);
        Coupling {
            value: Arc::new(move |x, y| (&*a1 * x).dot(y)),
            grad_x: Arc::new(move |_, y| a2.tr_mul(y)),
            grad_y: Arc::new(move |x, _| &*a3 * x),
        }
    }

    pub fn zero() -> Self {
        Coupling {
            value: Arc::new(|_, _| 0.0),
            grad_x: Arc::new(|x, _| Vector::zeros(x.len())),
            grad_y: Arc::new(|_, y| Vector::zeros(y.len())),
        }
    }
}

/// min_x max_y r(x) + F(x,y) - h(y) with metered oracles.
#[derive(Clone)]
pub struct SaddleProblem {
    pub spec: SaddleSpec,
    pub r: Component,
    pub h: Component,
    pub f: Coupling,
    swapped: bool,
}

impl SaddleProblem {
    pub fn new(spec: SaddleSpec, r: Component, h: Component, f: Coupling) -> Result<Self> {
        spec.validate()?;
        if r.grad.is_none() && r.prox.is_none() {
            return Err(SolverError::InvalidSpec("r has neither gradient nor prox".into()));
        }
        if h.grad.is_none() && h.prox.is_none() {
            return Err(SolverError::InvalidSpec("h has neither gradient nor prox".into()));
        }
        if r.grad.is_some() && r.prox.is_none() && spec.l_x.is_none() {
            return Err(SolverError::InvalidSpec("smooth r needs l_x".into()));
        }
        if h.grad.is_some() && h.prox.is_none() && spec.l_y.is_none() {
            return Err(SolverError::InvalidSpec("smooth h needs l_y".into()));
        }
        Ok(SaddleProblem {
            spec,
            r,
            h,
            f,
            swapped: false,
        })
    }

    pub fn prox_friendly_r(&self) -> bool {
        self.r.prox.is_some()
    }

    pub fn prox_friendly_h(&self) -> bool {
        self.h.prox.is_some()
    }

    /// True for the role-swapped view produced by `dual_view`.
    pub fn is_dual_view(&self) -> bool {
        self.swapped
    }

    /// Maps a call kind of this view to the kind of the original problem, so
    /// tallies of a dual view stay comparable with the primal ones.
    fn kind(&self, k: OracleKind) -> OracleKind {
        if !self.swapped {
            return k;
        }
        match k {
            OracleKind::GradR => OracleKind::GradH,
            OracleKind::GradH => OracleKind::GradR,
            OracleKind::GradXF => OracleKind::GradYF,
            OracleKind::GradYF => OracleKind::GradXF,
            OracleKind::ProxR => OracleKind::ProxH,
            OracleKind::ProxH => OracleKind::ProxR,
            OracleKind::Matvec => OracleKind::Matvec,
        }
    }

    fn record(&self, tally: &mut OracleTally, k: OracleKind) {
        tally.record(self.kind(k));
    }

    pub fn r_value(&self, x: &Vector) -> f64 {
        (self.r.value)(x)
    }

    pub fn h_value(&self, y: &Vector) -> f64 {
        (self.h.value)(y)
    }

    pub fn f_value(&self, x: &Vector, y: &Vector) -> f64 {
        (self.f.value)(x, y)
    }

    /// S(x,y) = r(x) + F(x,y) - h(y).
    pub fn objective(&self, x: &Vector, y: &Vector) -> f64 {
        self.r_value(x) + self.f_value(x, y) - self.h_value(y)
    }

    pub fn grad_r(&self, x: &Vector, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_x, x)?;
        let g = self.r.grad.as_ref().ok_or_else(|| {
            SolverError::Unsupported("r has no gradient oracle".into())
        })?;
        self.record(tally, OracleKind::GradR);
        Ok(g(x))
    }

    pub fn grad_h(&self, y: &Vector, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_y, y)?;
        let g = self.h.grad.as_ref().ok_or_else(|| {
            SolverError::Unsupported("h has no gradient oracle".into())
        })?;
        self.record(tally, OracleKind::GradH);
        Ok(g(y))
    }

    pub fn grad_x_f(&self, x: &Vector, y: &Vector, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_x, x)?;
        check_dim(self.spec.dim_y, y)?;
        self.record(tally, OracleKind::GradXF);
        if self.spec.bilinear {
            self.record(tally, OracleKind::Matvec);
        }
        Ok((self.f.grad_x)(x, y))
    }

    pub fn grad_y_f(&self, x: &Vector, y: &Vector, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_x, x)?;
        check_dim(self.spec.dim_y, y)?;
        self.record(tally, OracleKind::GradYF);
        if self.spec.bilinear {
            self.record(tally, OracleKind::Matvec);
        }
        Ok((self.f.grad_y)(x, y))
    }

    /// argmin over Q_x of t r(x) + |x - v|^2 / 2.
    pub fn prox_r(&self, v: &Vector, t: f64, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_x, v)?;
        let p = self.r.prox.as_ref().ok_or_else(|| {
            SolverError::Unsupported("r is not prox-friendly".into())
        })?;
        self.record(tally, OracleKind::ProxR);
        Ok(p(v, t))
    }

    /// argmin over Q_y of t h(y) + |y - v|^2 / 2.
    pub fn prox_h(&self, v: &Vector, t: f64, tally: &mut OracleTally) -> Result<Vector> {
        check_dim(self.spec.dim_y, v)?;
        let p = self.h.prox.as_ref().ok_or_else(|| {
            SolverError::Unsupported("h is not prox-friendly".into())
        })?;
        self.record(tally, OracleKind::ProxH);
        Ok(p(v, t))
    }

    /// The problem seen from the maximizing player: min_y max_x h(y) - F(x,y) - r(x).
    /// Tallies recorded through the view use the kinds of the original problem.
    pub fn dual_view(&self) -> SaddleProblem {
        let f = self.f.clone();
        let (fv, fx, fy) = (f.value.clone(), f.grad_x.clone(), f.grad_y.clone());
        let coupling = Coupling {
            value: Arc::new(move |u, v| -fv(v, u)),
            grad_x: Arc::new(move |u, v| -fy(v, u)),
            grad_y: Arc::new(move |u, v| -fx(v, u)),
        };
        SaddleProblem {
            spec: self.spec.swapped(),
            r: self.h.clone(),
            h: self.r.clone(),
            f: coupling,
            swapped: !self.swapped,
        }
    }

    /// Adds just enough quadratic regularization that mu_x >= eps/(2 r_x^2) and
    /// mu_y >= eps/(2 r_y^2). Each regularized side biases the objective by at
    /// most eps/4 on the balls of radii r_x, r_y.
    pub fn regularized(&self, epsilon: f64, r_x: f64, r_y: f64) -> Result<SaddleProblem> {
        let (tx, ty) = regularize(epsilon, r_x, r_y)?;
        let cx = (tx - self.spec.mu_x).max(0.0);
        let cy = (ty - self.spec.mu_y).max(0.0);
        let mut spec = self.spec.clone();
        spec.mu_x += cx;
        spec.mu_y += cy;
        spec.l_x = spec.l_x.map(|l| l + cx);
        spec.l_y = spec.l_y.map(|l| l + cy);
        Ok(SaddleProblem {
            spec,
            r: self.r.plus_quadratic(cx),
            h: self.h.plus_quadratic(cy),
            f: self.f.clone(),
            swapped: self.swapped,
        })
    }
}

impl std::fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("spec", &self.spec)
            .field("prox_friendly_r", &self.prox_friendly_r())
            .field("prox_friendly_h", &self.prox_friendly_h())
            .field("dual_view", &self.swapped)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(l_xx: f64, l_xy: f64, mu_y: f64) -> SaddleSpec {
        SaddleSpec {
            l_xx,
            l_xy,
            l_yy: 0.0,
            l_x: None,
            l_y: None,
            mu_x: 1.0,
            mu_y,
            dim_x: 1,
            dim_y: 1,
            set_x: FeasibleSet::AllSpace,
            set_y: FeasibleSet::AllSpace,
            spectral: None,
            bilinear: false,
        }
    }

    #[test]
    fn effective_smoothness_examples() {
        assert_eq!(effective_smoothness(&spec(0.0, 2.0, 1.0)).unwrap(), 8.0);
        assert_eq!(effective_smoothness(&spec(5.0, 0.0, 3.0)).unwrap(), 5.0);
        assert_eq!(effective_smoothness(&spec(1.0, 3.0, 2.0)).unwrap(), 10.0);
        assert!(matches!(
            effective_smoothness(&spec(1.0, 1.0, 0.0)),
            Err(SolverError::InvalidSpec(_))
        ));
        assert!(effective_smoothness(&spec(1.0, 1.0, -1.0)).is_err());
    }

    #[test]
    fn regularize_examples() {
        let (a, b) = regularize(0.01, 1.0, 1.0).unwrap();
        assert_relative_eq!(a, 0.005);
        assert_relative_eq!(b, 0.005);
        let (a, b) = regularize(0.02, 2.0, 1.0).unwrap();
        assert_relative_eq!(a, 0.0025);
        assert_relative_eq!(b, 0.01);
        assert!(matches!(
            regularize(0.0, 1.0, 1.0),
            Err(SolverError::InvalidArgument(_))
        ));
        assert!(regularize(0.1, -1.0, 1.0).is_err());
    }

    fn tiny_problem(mu: f64) -> SaddleProblem {
        let mut s = spec(0.0, 1.0, mu);
        s.mu_x = mu;
        s.l_x = Some(mu);
        s.l_y = Some(mu);
        s.bilinear = true;
        SaddleProblem::new(
            s,
            Component::isotropic_quadratic(mu, Vector::from_element(1, 1.0), FeasibleSet::AllSpace),
            Component::isotropic_quadratic(mu, Vector::zeros(1), FeasibleSet::AllSpace),
            Coupling::bilinear(Matrix::from_element(1, 1, 1.0)),
        )
        .unwrap()
    }

    #[test]
    fn regularized_is_noop_when_already_strong() {
        let p = tiny_problem(1.0);
        let q = p.regularized(0.01, 1.0, 1.0).unwrap();
        assert_eq!(q.spec, p.spec);
        let x = Vector::from_element(1, 0.3);
        assert_eq!(q.r_value(&x), p.r_value(&x));
    }

    #[test]
    fn regularized_raises_weak_moduli() {
        let p = tiny_problem(0.001);
        let q = p.regularized(0.04, 1.0, 1.0).unwrap();
        assert_relative_eq!(q.spec.mu_x, 0.02);
        assert_relative_eq!(q.spec.mu_y, 0.02);
        // prox of the regularized term against a direct minimization
        let v = Vector::from_element(1, 2.0);
        let mut t = OracleTally::new();
        let got = q.prox_r(&v, 0.5, &mut t).unwrap()[0];
        // argmin 0.5 (0.02/2 x^2 - x) + (x - 2)^2/2  => x = (2 + 0.5)/(1 + 0.01)
        assert_relative_eq!(got, 2.5 / 1.01, epsilon = 1e-12);
    }

    #[test]
    fn dual_view_is_involution_and_swaps_kinds() {
        let p = tiny_problem(1.0);
        let d = p.dual_view();
        let dd = d.dual_view();
        assert_eq!(dd.spec, p.spec);
        assert!(!dd.is_dual_view());
        let x = Vector::from_element(1, 0.7);
        let y = Vector::from_element(1, -1.3);
        assert_eq!(dd.objective(&x, &y), p.objective(&x, &y));
        assert_eq!(d.objective(&y, &x), -p.objective(&x, &y));
        let mut t = OracleTally::new();
        d.grad_x_f(&y, &x, &mut t).unwrap();
        assert_eq!(t.get(OracleKind::GradYF), 1);
        assert_eq!(t.get(OracleKind::Matvec), 1);
    }

    #[test]
    fn ball_projection_and_intersection() {
        let set = FeasibleSet::origin_ball(2, 1.0);
        let p = set.project(&Vector::from_vec(vec![3.0, 4.0]));
        assert_relative_eq!(p[0], 0.6);
        assert_relative_eq!(p[1], 0.8);
        assert_eq!(
            FeasibleSet::AllSpace.intersect_origin_ball(2, 5.0),
            Some(FeasibleSet::origin_ball(2, 5.0))
        );
        let off = FeasibleSet::Ball { center: vec![1.0, 0.0], radius: 1.0 };
        assert_eq!(off.intersect_origin_ball(2, 10.0), Some(off.clone()));
        assert_eq!(off.intersect_origin_ball(2, 1.5), None);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut s = spec(0.0, 1.0, 1.0);
        s.l_xy = f64::NAN;
        assert!(s.validate().is_err());
        let mut s = spec(0.0, 1.0, 1.0);
        s.set_x = FeasibleSet::Ball { center: vec![0.0], radius: 0.0 };
        assert!(s.validate().is_err());
        let mut s = spec(0.0, 1.0, 1.0);
        s.dim_y = 0;
        assert!(s.validate().is_err());
    }

    proptest! {
        #[test]
        fn effective_smoothness_monotone(l_xx in 0.0..10.0f64, l_xy in 0.0..10.0f64,
                                         mu in 0.01..10.0f64, d in 0.0..5.0f64) {
            let base = effective_smoothness(&spec(l_xx, l_xy, mu)).unwrap();
            prop_assert!(effective_smoothness(&spec(l_xx + d, l_xy, mu)).unwrap() >= base);
            prop_assert!(effective_smoothness(&spec(l_xx, l_xy + d, mu)).unwrap() >= base);
            prop_assert!(effective_smoothness(&spec(l_xx, l_xy, mu + d)).unwrap() <= base);
        }
    }
}
