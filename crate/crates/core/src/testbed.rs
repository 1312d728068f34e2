//! Instances with closed-form saddles, an inexact oracle with known
//! inexactness, and numerical checks of the envelope and argmax properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, SolverError};
use crate::inner_max::{inexact_grad_g, probe_envelope, solve_inner_max, InnerOptions};
use crate::objective::{FirstOrder, SmoothOracle};
use crate::problem::{Component, Coupling, FeasibleSet, Matrix, SaddleProblem, SaddleSpec, Vector};
use crate::spectral::spectral_norm;
use crate::tally::{OracleKind, OracleTally};

pub use crate::spectral::{spectral, Spectrum};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut impl Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

/// Seeded orthogonal matrix: Q of a Gaussian matrix with R's diagonal made positive.
pub fn orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// min(m, n) singular values log-spaced over [1, sqrt(cond)], largest first.
pub fn log_spaced(count: usize, cond: f64) -> Vec<f64> {
    let top = cond.sqrt();
    if count == 1 {
        return vec![top];
    }
    (0..count)
        .map(|i| top.powf(1.0 - i as f64 / (count - 1) as f64))
        .collect()
}

/// U diag(sigma) Vᵀ with seeded orthogonal U (m×m) and V (n×n).
pub fn factored_matrix(rng: &mut impl Rng, m: usize, n: usize, cond: f64) -> Matrix {
    let u = orthogonal(rng, m);
    let v = orthogonal(rng, n);
    let k = m.min(n);
    let mut s = Matrix::zeros(m, n);
    for (i, sv) in log_spaced(k, cond).into_iter().enumerate() {
        s[(i, i)] = sv;
    }
    u * s * v.transpose()
}

/// r(x) = mu_x/2 |x|^2 - <b,x>, F = <Ax,y>, h(y) = mu_y/2 |y|^2 on all space.
#[derive(Debug, Clone, Serialize)]
pub struct BilinearInstance {
    pub a: Matrix,
    pub b: Vector,
    pub mu_x: f64,
    pub mu_y: f64,
    pub closed_form_x: Vector,
    pub closed_form_y: Vector,
    #[serde(skip)]
    pub spectrum: Spectrum,
    pub cond: f64,
}

impl BilinearInstance {
    pub fn new(a: Matrix, b: Vector, mu_x: f64, mu_y: f64, cond: f64) -> Result<Self> {
        if !(mu_x > 0.0 && mu_y > 0.0) {
            return Err(SolverError::InvalidArgument(format!("mu_x = {mu_x}, mu_y = {mu_y}")));
        }
        if b.len() != a.ncols() {
            return Err(SolverError::DimensionMismatch {
                expected: a.ncols(),
                got: b.len(),
            });
        }
        let spectrum = spectral(&a)?;
        let n = a.ncols();
        let k = Matrix::identity(n, n) * mu_x + a.tr_mul(&a) / mu_y;
        let x = k
            .cholesky()
            .ok_or_else(|| SolverError::Degenerate("closed-form system not positive definite".into()))?
            .solve(&b);
        let y = &a * &x / mu_y;
        Ok(BilinearInstance {
            a,
            b,
            mu_x,
            mu_y,
            closed_form_x: x,
            closed_form_y: y,
            spectrum,
            cond,
        })
    }

    /// A = diag(1,2), b = (1,1), mu_x = mu_y = 1; saddle ((0.5,0.2),(0.5,0.4)).
    pub fn b1() -> Self {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        BilinearInstance::new(a, Vector::from_vec(vec![1.0, 1.0]), 1.0, 1.0, 4.0)
            .expect("b1 is well posed")
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Spec with l_x = mu_x, l_y = mu_y and the attached spectral data.
    pub fn spec(&self) -> SaddleSpec {
        SaddleSpec {
            l_xx: 0.0,
            l_xy: self.spectrum.lambda_max.sqrt(),
            l_yy: 0.0,
            l_x: Some(self.mu_x),
            l_y: Some(self.mu_y),
            mu_x: self.mu_x,
            mu_y: self.mu_y,
            dim_x: self.n(),
            dim_y: self.m(),
            set_x: FeasibleSet::AllSpace,
            set_y: FeasibleSet::AllSpace,
            spectral: Some(self.spectrum.data()),
            bilinear: true,
        }
    }

    /// Both terms with gradients and prox.
    pub fn to_problem(&self) -> SaddleProblem {
        SaddleProblem::new(
            self.spec(),
            Component::isotropic_quadratic(self.mu_x, self.b.clone(), FeasibleSet::AllSpace),
            Component::isotropic_quadratic(self.mu_y, Vector::zeros(self.m()), FeasibleSet::AllSpace),
            Coupling::bilinear(self.a.clone()),
        )
        .expect("instance spec is valid")
    }

    /// Exact Lipschitz constant of the VI operator: the spectral norm of its Jacobian.
    pub fn operator_lipschitz(&self) -> f64 {
        let (n, m) = (self.n(), self.m());
        let mut j = Matrix::zeros(n + m, n + m);
        j.view_mut((0, 0), (n, n)).fill_diagonal(self.mu_x);
        j.view_mut((n, n), (m, m)).fill_diagonal(self.mu_y);
        j.view_mut((0, n), (n, m)).copy_from(&self.a.transpose());
        j.view_mut((n, 0), (m, n)).copy_from(&(-&self.a));
        spectral_norm(&j)
    }
}

/// Seeded bilinear instance with mu_x = mu_y = 1.
pub fn gen_bilinear(n: usize, m: usize, cond: f64, seed: u64) -> Result<BilinearInstance> {
    gen_bilinear_with(n, m, cond, 1.0, 1.0, seed)
}

pub fn gen_bilinear_with(n: usize, m: usize, cond: f64, mu_x: f64, mu_y: f64, seed: u64) -> Result<BilinearInstance> {
    if n == 0 || m == 0 || !(cond >= 1.0) {
        return Err(SolverError::InvalidArgument(format!("n = {n}, m = {m}, cond = {cond}")));
    }
    let mut r = rng(seed);
    let a = factored_matrix(&mut r, m, n, cond);
    let b = gaussian_vector(&mut r, n);
    BilinearInstance::new(a, b, mu_x, mu_y, cond)
}

/// Square game whose x-modulus is 1/sqrt(kappa) and y-modulus 1, with
/// singular values over [1, sqrt(kappa)]: λmax/λmin = kappa.
pub fn gen_matrix_game(n: usize, kappa: f64, seed: u64) -> Result<BilinearInstance> {
    gen_bilinear_with(n, n, kappa, 1.0 / kappa.sqrt(), 1.0, seed)
}

/// S = mu_x/2 |x|^2 - <b,x> + <Ax,y> + ½xᵀPx - ½yᵀQy - mu_y/2 |y|^2 with
/// diagonal P, Q >= 0; the quadratic parts of F are not prox-friendly.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticSaddleInstance {
    pub a: Matrix,
    pub b: Vector,
    pub p: Vector,
    pub q: Vector,
    pub mu_x: f64,
    pub mu_y: f64,
    pub closed_form_x: Vector,
    pub closed_form_y: Vector,
    pub cond: f64,
}

impl QuadraticSaddleInstance {
    pub fn new(a: Matrix, b: Vector, p: Vector, q: Vector, mu_x: f64, mu_y: f64, cond: f64) -> Result<Self> {
        if !(mu_x > 0.0 && mu_y > 0.0) || p.iter().chain(q.iter()).any(|v| !(*v >= 0.0)) {
            return Err(SolverError::InvalidArgument("moduli must be positive, P and Q PSD".into()));
        }
        let dq = q.map(|v| 1.0 / (v + mu_y));
        let n = a.ncols();
        // (mu_x + P + Aᵀ(Q + mu_y)⁻¹A) x = b, y = (Q + mu_y)⁻¹ A x
        let mut k = a.tr_mul(&Matrix::from_diagonal(&dq)) * &a;
        for i in 0..n {
            k[(i, i)] += mu_x + p[i];
        }
        let x = k
            .cholesky()
            .ok_or_else(|| SolverError::Degenerate("closed-form system not positive definite".into()))?
            .solve(&b);
        let y = (&a * &x).component_mul(&dq);
        Ok(QuadraticSaddleInstance {
            a,
            b,
            p,
            q,
            mu_x,
            mu_y,
            closed_form_x: x,
            closed_form_y: y,
            cond,
        })
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn spec(&self) -> SaddleSpec {
        SaddleSpec {
            l_xx: self.p.max(),
            l_xy: spectral_norm(&self.a),
            l_yy: self.q.max(),
            l_x: Some(self.mu_x),
            l_y: Some(self.mu_y),
            mu_x: self.mu_x,
            mu_y: self.mu_y,
            dim_x: self.n(),
            dim_y: self.m(),
            set_x: FeasibleSet::AllSpace,
            set_y: FeasibleSet::AllSpace,
            spectral: spectral(&self.a).ok().map(|s| s.data()),
            bilinear: false,
        }
    }

    pub fn to_problem(&self) -> SaddleProblem {
        let (a1, p1, q1) = (self.a.clone(), self.p.clone(), self.q.clone());
        let (a2, p2) = (self.a.clone(), self.p.clone());
        let (a3, q3) = (self.a.clone(), self.q.clone());
        let coupling = Coupling {
            value: std::sync::Arc::new(move |x: &Vector, y: &Vector| {
                (&a1 * x).dot(y) + 0.5 * x.dot(&x.component_mul(&p1)) - 0.5 * y.dot(&y.component_mul(&q1))
            }),
            grad_x: std::sync::Arc::new(move |x: &Vector, y: &Vector| a2.tr_mul(y) + x.component_mul(&p2)),
            grad_y: std::sync::Arc::new(move |x: &Vector, y: &Vector| &a3 * x - y.component_mul(&q3)),
        };
        SaddleProblem::new(
            self.spec(),
            Component::isotropic_quadratic(self.mu_x, self.b.clone(), FeasibleSet::AllSpace),
            Component::isotropic_quadratic(self.mu_y, Vector::zeros(self.m()), FeasibleSet::AllSpace),
            coupling,
        )
        .expect("instance spec is valid")
    }

    /// g(x) = max_y F(x,y) - h(y) = ½xᵀPx + ½(Ax)ᵀ(Q + mu_y)⁻¹(Ax).
    pub fn envelope(&self, x: &Vector) -> f64 {
        let ax = &self.a * x;
        let w = ax.zip_map(&self.q, |v, q| v * v / (q + self.mu_y));
        0.5 * x.dot(&x.component_mul(&self.p)) + 0.5 * w.sum()
    }

    pub fn envelope_grad(&self, x: &Vector) -> Vector {
        x.component_mul(&self.p) + self.a.tr_mul(&self.argmax(x))
    }

    /// y*(x) = (Q + mu_y)⁻¹ A x.
    pub fn argmax(&self, x: &Vector) -> Vector {
        (&self.a * x).zip_map(&self.q, |v, q| v / (q + self.mu_y))
    }

    pub fn operator_lipschitz(&self) -> f64 {
        let (n, m) = (self.n(), self.m());
        let mut j = Matrix::zeros(n + m, n + m);
        for i in 0..n {
            j[(i, i)] = self.mu_x + self.p[i];
        }
        for i in 0..m {
            j[(n + i, n + i)] = self.mu_y + self.q[i];
        }
        j.view_mut((0, n), (n, m)).copy_from(&self.a.transpose());
        j.view_mut((n, 0), (m, n)).copy_from(&(-&self.a));
        spectral_norm(&j)
    }
}

/// Seeded quadratic saddle; P and Q diagonals uniform on [0, p_max], [0, q_max].
#[allow(clippy::too_many_arguments)]
pub fn gen_quadratic_saddle(
    n: usize,
    m: usize,
    cond: f64,
    mu_x: f64,
    mu_y: f64,
    p_max: f64,
    q_max: f64,
    seed: u64,
) -> Result<QuadraticSaddleInstance> {
    if n == 0 || m == 0 || !(cond >= 1.0) || !(p_max >= 0.0 && q_max >= 0.0) {
        return Err(SolverError::InvalidArgument(format!("n = {n}, m = {m}, cond = {cond}")));
    }
    let mut r = rng(seed);
    let a = factored_matrix(&mut r, m, n, cond);
    let b = gaussian_vector(&mut r, n);
    let p = Vector::from_fn(n, |_, _| p_max * r.random::<f64>());
    let q = Vector::from_fn(m, |_, _| q_max * r.random::<f64>());
    QuadraticSaddleInstance::new(a, b, p, q, mu_x, mu_y, cond)
}

/// Either instance family, for code that handles both.
#[derive(Debug, Clone)]
pub enum Instance {
    Bilinear(BilinearInstance),
    Quadratic(QuadraticSaddleInstance),
}

impl Instance {
    pub fn to_problem(&self) -> SaddleProblem {
        match self {
            Instance::Bilinear(b) => b.to_problem(),
            Instance::Quadratic(q) => q.to_problem(),
        }
    }

    pub fn closed_form(&self) -> (&Vector, &Vector) {
        match self {
            Instance::Bilinear(b) => (&b.closed_form_x, &b.closed_form_y),
            Instance::Quadratic(q) => (&q.closed_form_x, &q.closed_form_y),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Instance::Bilinear(b) => (b.n(), b.m()),
            Instance::Quadratic(q) => (q.n(), q.m()),
        }
    }

    pub fn moduli(&self) -> (f64, f64) {
        match self {
            Instance::Bilinear(b) => (b.mu_x, b.mu_y),
            Instance::Quadratic(q) => (q.mu_x, q.mu_y),
        }
    }

    pub fn cond(&self) -> f64 {
        match self {
            Instance::Bilinear(b) => b.cond,
            Instance::Quadratic(q) => q.cond,
        }
    }

    /// Bilinear instances as quadratic saddles with P = Q = 0.
    pub fn as_quadratic(&self) -> QuadraticSaddleInstance {
        match self {
            Instance::Bilinear(b) => QuadraticSaddleInstance::new(
                b.a.clone(),
                b.b.clone(),
                Vector::zeros(b.n()),
                Vector::zeros(b.m()),
                b.mu_x,
                b.mu_y,
                b.cond,
            )
            .expect("bilinear instance is a valid quadratic saddle"),
            Instance::Quadratic(q) => q.clone(),
        }
    }
}

/// Quadratic ½xᵀHx - <b,x> whose oracle returns grad + e and value - |e|^2/(2 mu)
/// with |e| = sqrt(mu delta) along a seeded random direction. This is a
/// (delta, L + mu)-oracle: the lower envelope needs |e|^2/(2 mu) of value
/// shift and the upper one absorbs the cross term into mu/2 |z-x|^2.
pub struct NoisyQuadratic {
    pub h: Matrix,
    pub b: Vector,
    pub l: f64,
    pub mu: f64,
    pub delta: f64,
    rng: ChaCha8Rng,
    tally: OracleTally,
}

impl NoisyQuadratic {
    pub fn new(h: Matrix, b: Vector, delta: f64, seed: u64) -> Result<Self> {
        let eig = h.clone().symmetric_eigen();
        let (mu, l) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if !(mu > 0.0) {
            return Err(SolverError::InvalidArgument("H must be positive definite".into()));
        }
        Ok(NoisyQuadratic {
            h,
            b,
            l,
            mu,
            delta,
            rng: rng(seed),
            tally: OracleTally::new(),
        })
    }

    /// Envelope constant of the inexact oracle.
    pub fn l_declared(&self) -> f64 {
        self.l + self.mu
    }

    pub fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.h * x)) - self.b.dot(x)
    }

    pub fn minimizer(&self) -> Vector {
        self.h.clone().cholesky().expect("positive definite").solve(&self.b)
    }
}

impl SmoothOracle for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn query(&mut self, x: &Vector, _delta: f64) -> Result<FirstOrder> {
        self.tally.record(OracleKind::GradR);
        let mut dir = gaussian_vector(&mut self.rng, x.len());
        let norm = dir.norm();
        if norm > 0.0 {
            dir /= norm;
        }
        let e = (self.mu * self.delta).sqrt();
        Ok(FirstOrder {
            value: self.value(x) - 0.5 * self.delta,
            grad: &self.h * x - &self.b + dir * e,
        })
    }

    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// Seeded strongly convex quadratic with eigenvalues log-spaced in [mu, L].
pub fn gen_quadratic(n: usize, mu: f64, l: f64, seed: u64) -> (Matrix, Vector) {
    let mut r = rng(seed);
    let q = orthogonal(&mut r, n);
    let eig: Vec<f64> = if n == 1 {
        vec![l]
    } else {
        (0..n).map(|i| mu * (l / mu).powf(i as f64 / (n - 1) as f64)).collect()
    };
    let h = &q * Matrix::from_diagonal(&Vector::from_vec(eig)) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    (h, gaussian_vector(&mut r, n))
}

/// Empirical constants of grad g for h(y) = ½yᵀDy with D spanning [mu_y, l_y].
#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub samples: usize,
    pub lipschitz_estimate: f64,
    pub predicted_lipschitz: f64,
    /// Infimum over pairs in (Ker A)^⊥; zero when A = 0.
    pub modulus_estimate: f64,
    pub predicted_modulus: f64,
    /// Largest |Kᵀ grad g(x)| over sampled x, K a kernel basis.
    pub kernel_component: f64,
}

impl Lemma1Report {
    pub fn violations(&self) -> usize {
        let mut v = 0;
        if self.lipschitz_estimate > self.predicted_lipschitz * (1.0 + 1e-6) + 1e-12 {
            v += 1;
        }
        if self.modulus_estimate < self.predicted_modulus * (1.0 - 1e-3) {
            v += 1;
        }
        if self.kernel_component > 1e-9 {
            v += 1;
        }
        v
    }
}

/// Samples grad g(x) = AᵀD⁻¹Ax for h(y) = ½yᵀDy with D's diagonal seeded in
/// [mu_y, l_y] (both ends attained).
pub fn lemma1_check(a: &Matrix, mu_y: f64, l_y: f64, samples: usize, seed: u64) -> Result<Lemma1Report> {
    if !(mu_y > 0.0 && l_y >= mu_y) {
        return Err(SolverError::InvalidArgument(format!("mu_y = {mu_y}, l_y = {l_y}")));
    }
    let (m, n) = a.shape();
    let mut r = rng(seed);
    let mut d = Vector::from_fn(m, |_, _| mu_y + (l_y - mu_y) * r.random::<f64>());
    d[0] = mu_y;
    if m > 1 {
        d[m - 1] = l_y;
    }
    let dinv = d.map(|v| 1.0 / v);
    let grad = |x: &Vector| a.tr_mul(&(a * x).component_mul(&dinv));
    let spec = spectral(a);
    let (lmax, lmin, kernel) = match &spec {
        Ok(s) => (s.lambda_max, s.lambda_min_plus, s.kernel_basis.clone()),
        Err(_) => (0.0, 0.0, Matrix::identity(n, n)),
    };
    let mut lip: f64 = 0.0;
    let mut modulus = f64::INFINITY;
    let mut kernel_component: f64 = 0.0;
    for _ in 0..samples {
        let x1 = gaussian_vector(&mut r, n);
        let mut dx = gaussian_vector(&mut r, n);
        let g1 = grad(&x1);
        let g2 = grad(&(&x1 + &dx));
        lip = lip.max((&g2 - &g1).norm() / dx.norm());
        if kernel.ncols() > 0 {
            kernel_component = kernel_component.max(kernel.tr_mul(&g1).amax());
            dx -= &kernel * kernel.tr_mul(&dx);
        }
        let nd = dx.norm();
        if nd > 1e-12 {
            let g3 = grad(&(&x1 + &dx));
            modulus = modulus.min((&g3 - &g1).dot(&dx) / (nd * nd));
        }
    }
    if spec.is_err() {
        modulus = 0.0;
    }
    Ok(Lemma1Report {
        samples,
        lipschitz_estimate: lip,
        predicted_lipschitz: lmax / mu_y,
        modulus_estimate: modulus,
        predicted_modulus: lmin / l_y,
        kernel_component,
    })
}

/// Counts of a sampled property check.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest amount by which any inequality was exceeded (negative if none).
    pub worst_excess: f64,
}

impl CheckReport {
    fn new(suite: &str) -> Self {
        CheckReport {
            suite: suite.to_string(),
            samples: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    fn observe(&mut self, excess: f64, slack: f64) {
        self.worst_excess = self.worst_excess.max(excess);
        if excess > slack {
            self.violations += 1;
        }
    }
}

/// Instance families the sampled checks cycle through.
pub fn check_instances(seed: u64, count: usize) -> Result<Vec<QuadraticSaddleInstance>> {
    let mut out = vec![Instance::Bilinear(BilinearInstance::b1()).as_quadratic()];
    for i in 0..count {
        let s = seed.wrapping_mul(1000).wrapping_add(i as u64);
        let mut r = rng(s);
        let n = r.random_range(1..=6);
        let m = r.random_range(1..=6);
        let cond = 10f64.powf(r.random_range(0.0..3.0));
        let mu_y = 10f64.powf(r.random_range(-1.0..1.0));
        let inst = if i % 2 == 0 {
            gen_bilinear_with(n, m, cond, 1.0, mu_y, s)?.as_instance().as_quadratic()
        } else {
            gen_quadratic_saddle(n, m, cond, 1.0, mu_y, 2.0, 2.0, s)?
        };
        out.push(inst);
    }
    Ok(out)
}

impl BilinearInstance {
    pub fn as_instance(self) -> Instance {
        Instance::Bilinear(self)
    }
}

/// Envelope property of the inexact oracle of g at `samples` seeded
/// (x, z, delta) triples, plus |grad~ - grad g| <= L_xy sqrt(2 delta / mu_y).
pub fn lemma2_check(samples: usize, seed: u64) -> Result<CheckReport> {
    let instances = check_instances(seed, 8)?;
    let problems: Vec<_> = instances.iter().map(|i| i.to_problem()).collect();
    let mut r = rng(seed);
    let mut rep = CheckReport::new("lemma2");
    for k in 0..samples {
        let idx = k % instances.len();
        let (inst, problem) = (&instances[idx], &problems[idx]);
        let n = inst.n();
        let x = gaussian_vector(&mut r, n) * 2.0;
        let z = &x + gaussian_vector(&mut r, n) * 10f64.powf(r.random_range(-3.0..1.0));
        let delta = 10f64.powf(r.random_range(-10.0..-2.0));
        let ig = inexact_grad_g(problem, &x, delta, &InnerOptions::default())?;
        let g = |v: &Vector| inst.envelope(v);
        let probe = probe_envelope(&g, &ig, &x, &z);
        let d2 = (&z - &x).norm_squared();
        let lower = -probe.excess;
        let upper = probe.excess - (0.5 * ig.l_env * d2 + ig.delta);
        rep.observe(lower.max(upper), 1e-8);
        let err = (&ig.grad - inst.envelope_grad(&x)).norm();
        let bound = problem.spec.l_xy * (2.0 * delta / inst.mu_y).sqrt();
        rep.observe(err - bound, 1e-8);
        rep.samples += 1;
    }
    Ok(rep)
}

/// |y*(x1) - y*(x2)| <= (2 L_xy / mu_y) |x1 - x2| with y* from the inner solver.
pub fn argmax_lipschitz_check(samples: usize, seed: u64) -> Result<CheckReport> {
    let instances = check_instances(seed, 8)?;
    let problems: Vec<_> = instances.iter().map(|i| i.to_problem()).collect();
    let mut r = rng(seed ^ 0x5eed);
    let mut rep = CheckReport::new("argmax_lipschitz");
    let opts = InnerOptions::default();
    for k in 0..samples {
        let idx = k % instances.len();
        let (inst, problem) = (&instances[idx], &problems[idx]);
        let n = inst.n();
        let x1 = gaussian_vector(&mut r, n);
        let x2 = &x1 + gaussian_vector(&mut r, n) * 10f64.powf(r.random_range(-2.0..1.0));
        let y1 = solve_inner_max(problem, &x1, 1e-16, &opts)?.witness;
        let y2 = solve_inner_max(problem, &x2, 1e-16, &opts)?.witness;
        let ratio = (&y1 - &y2).norm() / (&x1 - &x2).norm();
        rep.observe(ratio - 2.0 * problem.spec.l_xy / problem.spec.mu_y, 1e-7);
        rep.samples += 1;
    }
    Ok(rep)
}

/// Lemma-1 constants on `count` seeded bilinear instances, some rank deficient.
pub fn lemma1_suite(count: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("lemma1");
    for i in 0..count {
        let s = seed.wrapping_mul(7919).wrapping_add(i as u64);
        let mut r = rng(s);
        let n = r.random_range(2..=8);
        let m = r.random_range(1..=8);
        let cond = 10f64.powf(r.random_range(0.0..3.0));
        let a = factored_matrix(&mut r, m, n, cond);
        let mu_y = 10f64.powf(r.random_range(-1.0..1.0));
        let l_y = mu_y * 10f64.powf(r.random_range(0.0..2.0));
        let l1 = lemma1_check(&a, mu_y, l_y, samples, s)?;
        rep.samples += samples;
        rep.violations += l1.violations();
        rep.worst_excess = rep
            .worst_excess
            .max(l1.lipschitz_estimate / l1.predicted_lipschitz - 1.0)
            .max(1.0 - l1.modulus_estimate / l1.predicted_modulus)
            .max(l1.kernel_component);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror_prox::{assemble_saddle_operator, stack, ViOperator};
    use approx::assert_relative_eq;

    #[test]
    fn b1_closed_form() {
        let b = BilinearInstance::b1();
        assert!((&b.closed_form_x - Vector::from_vec(vec![0.5, 0.2])).norm() < 1e-15);
        assert!((&b.closed_form_y - Vector::from_vec(vec![0.5, 0.4])).norm() < 1e-15);
    }

    #[test]
    fn generated_saddles_zero_the_operator() {
        for seed in 0..5 {
            let b = gen_bilinear(7, 4, 100.0, seed).unwrap();
            let q = gen_quadratic_saddle(5, 6, 50.0, 0.3, 0.7, 2.0, 3.0, seed).unwrap();
            for (p, x, y) in [
                (b.to_problem(), &b.closed_form_x, &b.closed_form_y),
                (q.to_problem(), &q.closed_form_x, &q.closed_form_y),
            ] {
                let mut op = assemble_saddle_operator(&p).unwrap();
                assert!(op.evaluate(&stack(x, y)).unwrap().norm() < 1e-8);
            }
        }
    }

    #[test]
    fn isotropic_when_cond_one() {
        let b = gen_bilinear(4, 4, 1.0, 3).unwrap();
        assert_relative_eq!(b.spectrum.lambda_max, b.spectrum.lambda_min_plus, epsilon = 1e-10);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = gen_bilinear(6, 5, 30.0, 11).unwrap();
        let b = gen_bilinear(6, 5, 30.0, 11).unwrap();
        assert_eq!(a.a.as_slice(), b.a.as_slice());
        assert_eq!(a.b.as_slice(), b.b.as_slice());
        let c = gen_bilinear(6, 5, 30.0, 12).unwrap();
        assert_ne!(a.a.as_slice(), c.a.as_slice());
    }

    #[test]
    fn singular_values_span_range() {
        let b = gen_bilinear(5, 8, 1e4, 1).unwrap();
        assert_relative_eq!(b.spectrum.lambda_max, 1e4, max_relative = 1e-10);
        assert_relative_eq!(b.spectrum.lambda_min_plus, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn spectra_match_eigendecomposition() {
        let b = gen_bilinear(6, 4, 100.0, 5).unwrap();
        let ev = (b.a.transpose() * &b.a).symmetric_eigen().eigenvalues;
        assert!((ev.max() - b.spectrum.lambda_max).abs() < 1e-8);
        assert_eq!(b.spectrum.rank, 4);
        assert_eq!(b.spectrum.kernel_basis.ncols(), 2);
    }

    #[test]
    fn lemma1_examples() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0]));
        let r = lemma1_check(&a, 1.0, 1.0, 200, 1).unwrap();
        assert!(r.lipschitz_estimate <= 4.0 + 1e-6);
        assert!(r.modulus_estimate >= 1.0 - 1e-6);
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let r = lemma1_check(&a, 1.0, 1.0, 200, 2).unwrap();
        assert!(r.modulus_estimate >= 1.0 - 1e-6);
        assert!(r.kernel_component <= 1e-12);
        let r = lemma1_check(&Matrix::zeros(2, 2), 1.0, 1.0, 50, 3).unwrap();
        assert_eq!(r.lipschitz_estimate, 0.0);
        assert_eq!(r.modulus_estimate, 0.0);
    }

    #[test]
    fn noisy_oracle_envelope() {
        let (h, b) = gen_quadratic(4, 0.5, 3.0, 9);
        let mut o = NoisyQuadratic::new(h, b, 1e-2, 4).unwrap();
        let mut r = rng(5);
        for _ in 0..200 {
            let x = gaussian_vector(&mut r, 4);
            let z = gaussian_vector(&mut r, 4);
            let q = o.query(&x, 0.0).unwrap();
            let ex = o.value(&z) - q.value - q.grad.dot(&(&z - &x));
            assert!(ex >= -1e-12);
            assert!(ex <= 0.5 * o.l_declared() * (&z - &x).norm_squared() + o.delta + 1e-12);
        }
    }

    #[test]
    fn quadratic_envelope_matches_inner_solver() {
        let q = gen_quadratic_saddle(3, 4, 10.0, 1.0, 0.5, 1.0, 1.0, 2).unwrap();
        let p = q.to_problem();
        let x = Vector::from_vec(vec![0.3, -1.0, 2.0]);
        let sol = solve_inner_max(&p, &x, 1e-14, &InnerOptions::default()).unwrap();
        assert!((sol.value - q.envelope(&x)).abs() < 1e-10);
        assert!((sol.witness - q.argmax(&x)).norm() < 1e-6);
    }

    #[test]
    fn operator_lipschitz_of_b1() {
        // Jacobian [[I, A], [-A, I]] with A = diag(1,2): singular values sqrt(1 + s^2)
        assert_relative_eq!(BilinearInstance::b1().operator_lipschitz(), 5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        assert_eq!(lemma2_check(300, 1).unwrap().violations, 0);
        assert_eq!(argmax_lipschitz_check(100, 1).unwrap().violations, 0);
        assert_eq!(lemma1_suite(5, 50, 1).unwrap().violations, 0);
    }
}
