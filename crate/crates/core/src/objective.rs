//! Oracles for composite minimization f = s + c: a smooth part queried for
//! first-order information and a composite part accessed through its prox.

use crate::error::Result;
use crate::problem::{FeasibleSet, Vector};
use crate::tally::{OracleKind, OracleTally};

/// Value and gradient returned by a smooth oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrder {
    pub value: f64,
    pub grad: Vector,
}

/// First-order oracle of a smooth convex function, possibly inexact.
pub trait SmoothOracle {
    fn dim(&self) -> usize;

    /// Model value and gradient at `x`. `delta` is the envelope inexactness the
    /// caller tolerates; exact oracles ignore it.
    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder>;

    /// Bound on |grad - true gradient| for a query made at accuracy `delta`.
    fn grad_error(&self, _delta: f64) -> f64 {
        0.0
    }

    /// Largest `delta` whose gradient error stays below `err`.
    fn delta_for_grad_error(&self, _err: f64) -> f64 {
        f64::INFINITY
    }

    /// Cumulative problem-oracle calls made through this oracle.
    fn tally(&self) -> OracleTally;
}

/// Composite term accessed through prox(v, t) = argmin t c(x) + |x - v|^2/2.
pub trait ProxTerm {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector>;

    fn tally(&self) -> OracleTally {
        OracleTally::new()
    }

    /// True when the term is identically zero on the whole space, so the
    /// gradient itself certifies optimality.
    fn is_free(&self) -> bool {
        false
    }
}

/// Exact oracle from a closure, recording one call of `kind` per query.
pub struct FnSmooth<F> {
    f: F,
    dim: usize,
    kind: Option<OracleKind>,
    tally: OracleTally,
}

impl<F> FnSmooth<F>
where
    F: FnMut(&Vector) -> (f64, Vector),
{
    pub fn new(dim: usize, f: F) -> Self {
        FnSmooth {
            f,
            dim,
            kind: None,
            tally: OracleTally::new(),
        }
    }

    pub fn counted(dim: usize, kind: OracleKind, f: F) -> Self {
        FnSmooth {
            f,
            dim,
            kind: Some(kind),
            tally: OracleTally::new(),
        }
    }
}

impl<F> SmoothOracle for FnSmooth<F>
where
    F: FnMut(&Vector) -> (f64, Vector),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&mut self, x: &Vector, _delta: f64) -> Result<FirstOrder> {
        crate::error::check_dim(self.dim, x)?;
        if let Some(k) = self.kind {
            self.tally.record(k);
        }
        let (value, grad) = (self.f)(x);
        Ok(FirstOrder { value, grad })
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// Quadratic 1/2 x'Hx - <b,x> with an exact gradient.
pub struct QuadraticOracle {
    pub h: crate::problem::Matrix,
    pub b: Vector,
    kind: Option<OracleKind>,
    tally: OracleTally,
}

impl QuadraticOracle {
    pub fn new(h: crate::problem::Matrix, b: Vector) -> Self {
        QuadraticOracle {
            h,
            b,
            kind: None,
            tally: OracleTally::new(),
        }
    }

    pub fn counted(h: crate::problem::Matrix, b: Vector, kind: OracleKind) -> Self {
        QuadraticOracle {
            kind: Some(kind),
            ..Self::new(h, b)
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.h * x)) - self.b.dot(x)
    }
}

impl SmoothOracle for QuadraticOracle {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn query(&mut self, x: &Vector, _delta: f64) -> Result<FirstOrder> {
        crate::error::check_dim(self.b.len(), x)?;
        if let Some(k) = self.kind {
            self.tally.record(k);
        }
        let hx = &self.h * x;
        Ok(FirstOrder {
            value: 0.5 * x.dot(&hx) - self.b.dot(x),
            grad: hx - &self.b,
        })
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// t * s(x).
pub struct Scaled<'a> {
    pub inner: &'a mut dyn SmoothOracle,
    pub scale: f64,
}

impl SmoothOracle for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        let q = self.inner.query(x, delta / self.scale)?;
        Ok(FirstOrder {
            value: q.value * self.scale,
            grad: q.grad * self.scale,
        })
    }

    fn grad_error(&self, delta: f64) -> f64 {
        self.scale * self.inner.grad_error(delta / self.scale)
    }

    fn delta_for_grad_error(&self, err: f64) -> f64 {
        self.scale * self.inner.delta_for_grad_error(err / self.scale)
    }

    fn tally(&self) -> OracleTally {
        self.inner.tally()
    }
}

/// s(x) + c/2 |x|^2; `c` may be negative as long as the sum stays convex.
pub struct PlusQuadratic<'a> {
    pub inner: &'a mut dyn SmoothOracle,
    pub c: f64,
}

impl SmoothOracle for PlusQuadratic<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        let q = self.inner.query(x, delta)?;
        Ok(FirstOrder {
            value: q.value + 0.5 * self.c * x.norm_squared(),
            grad: q.grad + x * self.c,
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

/// Sum of two smooth oracles; queries both once.
pub struct SumOracle<'a> {
    pub a: &'a mut dyn SmoothOracle,
    pub b: &'a mut dyn SmoothOracle,
}

impl SmoothOracle for SumOracle<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn query(&mut self, x: &Vector, delta: f64) -> Result<FirstOrder> {
        let qa = self.a.query(x, delta / 2.0)?;
        let qb = self.b.query(x, delta / 2.0)?;
        Ok(FirstOrder {
            value: qa.value + qb.value,
            grad: qa.grad + qb.grad,
        })
    }

    fn grad_error(&self, delta: f64) -> f64 {
        self.a.grad_error(delta / 2.0) + self.b.grad_error(delta / 2.0)
    }

    fn delta_for_grad_error(&self, err: f64) -> f64 {
        2.0 * self
            .a
            .delta_for_grad_error(err / 2.0)
            .min(self.b.delta_for_grad_error(err / 2.0))
    }

    fn tally(&self) -> OracleTally {
        self.a.tally() + self.b.tally()
    }
}

/// Indicator of a feasible set; prox is the projection.
#[derive(Debug, Clone)]
pub struct SetIndicator {
    pub set: FeasibleSet,
}

impl ProxTerm for SetIndicator {
    fn prox(&mut self, v: &Vector, _step: f64) -> Result<Vector> {
        Ok(self.set.project(v))
    }

    fn is_free(&self) -> bool {
        self.set.is_all_space()
    }
}

/// weight/2 |x - center|^2 restricted to `set`.
#[derive(Debug, Clone)]
pub struct IsotropicQuadratic {
    pub weight: f64,
    pub center: Vector,
    pub set: FeasibleSet,
}

impl ProxTerm for IsotropicQuadratic {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        let tw = step * self.weight;
        Ok(self.set.project(&((v + &self.center * tw) / (1.0 + tw))))
    }
}

/// c(x) + weight/2 |x - center|^2 for a prox-friendly c.
pub struct ProxPlusQuadratic<'a> {
    pub inner: &'a mut dyn ProxTerm,
    pub weight: f64,
    pub center: Vector,
}

impl ProxTerm for ProxPlusQuadratic<'_> {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        let s = 1.0 + step * self.weight;
        let w = (v + &self.center * (step * self.weight)) / s;
        self.inner.prox(&w, step / s)
    }

    fn tally(&self) -> OracleTally {
        self.inner.tally()
    }
}

/// Prox from a closure, recording one call of `kind` per step.
pub struct FnProx<F> {
    f: F,
    kind: Option<OracleKind>,
    tally: OracleTally,
}

impl<F> FnProx<F>
where
    F: FnMut(&Vector, f64) -> Vector,
{
    pub fn new(f: F) -> Self {
        FnProx {
            f,
            kind: None,
            tally: OracleTally::new(),
        }
    }

    pub fn counted(kind: OracleKind, f: F) -> Self {
        FnProx {
            f,
            kind: Some(kind),
            tally: OracleTally::new(),
        }
    }
}

impl<F> ProxTerm for FnProx<F>
where
    F: FnMut(&Vector, f64) -> Vector,
{
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        if let Some(k) = self.kind {
            self.tally.record(k);
        }
        Ok((self.f)(v, step))
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// f = s + c with the smoothness constant of s and the modulus of f.
pub struct CompositeObjective<'a> {
    pub smooth: &'a mut dyn SmoothOracle,
    pub composite: &'a mut dyn ProxTerm,
    pub l_smooth: f64,
    pub mu: f64,
}

impl<'a> CompositeObjective<'a> {
    pub fn new(
        smooth: &'a mut dyn SmoothOracle,
        composite: &'a mut dyn ProxTerm,
        l_smooth: f64,
        mu: f64,
    ) -> Self {
        CompositeObjective {
            smooth,
            composite,
            l_smooth,
            mu,
        }
    }

    pub fn tally(&self) -> OracleTally {
        self.smooth.tally() + self.composite.tally()
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }
}

/// A-posteriori optimality bound from one gradient-mapping step.
#[derive(Debug, Clone)]
pub struct MappingCertificate {
    /// Point the bounds refer to.
    pub point: Vector,
    /// Upper bound on f(point) - f*.
    pub gap_bound: f64,
    /// Upper bound on |point - x*|.
    pub dist_bound: f64,
}

/// Certifies a point near `x` using one smooth query at accuracy `delta`.
///
/// With y+ = prox_{c/L}(x - g/L) and G = L (x - y+), f has a subgradient at y+
/// of norm at most 2|G| + e, where e bounds the gradient error, so strong
/// convexity gives the gap and distance bounds. A free composite skips the
/// prox step and bounds x directly by |g| + e.
pub fn certify(obj: &mut CompositeObjective, x: &Vector, delta: f64) -> Result<MappingCertificate> {
    let q = obj.smooth.query(x, delta)?;
    let e = obj.smooth.grad_error(delta);
    let mu = obj.mu;
    if obj.composite.is_free() {
        let s = q.grad.norm() + e;
        return Ok(MappingCertificate {
            point: x.clone(),
            gap_bound: s * s / (2.0 * mu),
            dist_bound: s / mu,
        });
    }
    let l = obj.l_smooth;
    let step = x - &q.grad / l;
    let yp = obj.composite.prox(&step, 1.0 / l)?;
    let g_norm = l * (x - &yp).norm();
    let s = 2.0 * g_norm + e;
    Ok(MappingCertificate {
        point: yp,
        gap_bound: s * s / (2.0 * mu),
        dist_bound: s / mu,
    })
}
