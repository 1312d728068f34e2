//! Saddle problems solved as minimization of f(x) = r(x) + g(x) with
//! g(x) = max_y F(x,y) - h(y), certified by a duality gap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::fgm::{minimize_certified, CertifiedOptions};
use crate::inner_max::{solve_inner_max, EnvelopeOracle, InnerOptions};
use crate::mirror_prox::{assemble_saddle_operator, run_restarted_mp, stack, RestartedMpOptions, ViOperator};
use crate::objective::{CompositeObjective, FirstOrder, ProxTerm, SmoothOracle};
use crate::problem::{
    effective_smoothness, Component, Coupling, FeasibleSet, Matrix, SaddleProblem, SaddleSpec, Vector,
};
use crate::report::{Clock, GapCertificate, HistoryRow, SolveReport};
use crate::sliding::{sliding_solve, SlidingEngine, SlidingSpec};
use crate::spectral::spectral;
use crate::tally::{OracleKind, OracleTally};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Picks a case from the prox-friendliness of r and h.
    #[default]
    Auto,
    /// r and h prox-friendly: fast gradient method on r + g.
    Case1,
    /// r smooth only: sliding between grad r and the inexact grad g.
    Case2,
    /// h smooth only: the inner problem runs on grad h.
    Case3,
    /// Both smooth only.
    Case4,
    /// Restarted extragradient on the VI operator.
    MirrorProx,
}

impl Engine {
    pub const ALL: [Engine; 6] = [
        Engine::Auto,
        Engine::Case1,
        Engine::Case2,
        Engine::Case3,
        Engine::Case4,
        Engine::MirrorProx,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Case1 => "case1",
            Engine::Case2 => "case2",
            Engine::Case3 => "case3",
            Engine::Case4 => "case4",
            Engine::MirrorProx => "mirror_prox",
        }
    }

    /// The engine with the same treatment of each term on the dual view.
    pub fn for_dual(self) -> Engine {
        match self {
            Engine::Case2 => Engine::Case3,
            Engine::Case3 => Engine::Case2,
            e => e,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Engine {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.label() == s.to_ascii_lowercase())
            .ok_or_else(|| SolverError::InvalidArgument(format!("unknown engine '{s}'")))
    }
}

/// Case by prox-friendliness of (r, h).
pub fn select_engine(problem: &SaddleProblem) -> Engine {
    match (problem.prox_friendly_r(), problem.prox_friendly_h()) {
        (true, true) => Engine::Case1,
        (false, true) => Engine::Case2,
        (true, false) => Engine::Case3,
        (false, false) => Engine::Case4,
    }
}

#[derive(Debug, Clone)]
pub struct SaddleOptions {
    /// Radii (r_x, r_y) of the balls around the origin the gap is restricted
    /// to. Without them the gap is taken over the full sets.
    pub radii: Option<(f64, f64)>,
    /// Tightening rounds before giving up.
    pub max_rounds: usize,
    pub x0: Option<Vector>,
    pub y0: Option<Vector>,
    pub sliding: SlidingEngine,
    /// Restart cap of the outer certified fast gradient method.
    pub max_restarts: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        SaddleOptions {
            radii: None,
            max_rounds: 6,
            x0: None,
            y0: None,
            sliding: SlidingEngine::Apg,
            max_restarts: 100_000,
        }
    }
}

// r as a smooth oracle.
struct RSmooth<'p> {
    problem: &'p SaddleProblem,
    tally: OracleTally,
}

impl SmoothOracle for RSmooth<'_> {
    fn dim(&self) -> usize {
        self.problem.spec.dim_x
    }
    fn query(&mut self, x: &Vector, _delta: f64) -> Result<FirstOrder> {
        let grad = self.problem.grad_r(x, &mut self.tally)?;
        Ok(FirstOrder {
            value: self.problem.r_value(x),
            grad,
        })
    }
    fn tally(&self) -> OracleTally {
        self.tally
    }
}

// r through its prox.
struct RProx<'p> {
    problem: &'p SaddleProblem,
    tally: OracleTally,
}

impl ProxTerm for RProx<'_> {
    fn prox(&mut self, v: &Vector, step: f64) -> Result<Vector> {
        self.problem.prox_r(v, step, &mut self.tally)
    }
    fn tally(&self) -> OracleTally {
        self.tally
    }
}

/// Modulus of g granted by a bilinear coupling with an injective A and an
/// l_y-smooth h on all of R^m: lambda_min(AᵀA)/l_y, when it beats mu_x.
pub fn envelope_modulus(spec: &SaddleSpec) -> Option<f64> {
    if !spec.bilinear || !spec.set_y.is_all_space() {
        return None;
    }
    let (ly, sp) = (spec.l_y?, spec.spectral.as_ref()?);
    if sp.rank != spec.dim_x || !(ly > 0.0) {
        return None;
    }
    let m = sp.lambda_min_plus / ly;
    (m > spec.mu_x).then_some(m)
}

struct Outer {
    x: Vector,
    witness: Option<Vector>,
    report: SolveReport,
}

fn minimize_outer(
    problem: &SaddleProblem,
    epsilon: f64,
    engine: Engine,
    x0: &Vector,
    warm_y: Option<Vector>,
    opts: &SaddleOptions,
) -> Result<Outer> {
    let spec = &problem.spec;
    let l_env = 2.0 * effective_smoothness(spec)?;
    let g_mu = envelope_modulus(spec);
    let inner = InnerOptions {
        warm_start: warm_y,
        force_smooth_h: matches!(engine, Engine::Case3 | Engine::Case4),
        ..Default::default()
    };
    match engine {
        Engine::Case1 | Engine::Case3 => {
            if !problem.prox_friendly_r() {
                return Err(SolverError::Unsupported(format!("{engine} needs a prox of r")));
            }
            if engine == Engine::Case1 && !problem.prox_friendly_h() {
                return Err(SolverError::Unsupported("case1 needs a prox of h".into()));
            }
            let mu = g_mu.unwrap_or(spec.mu_x);
            let mut env = EnvelopeOracle::new(problem, inner);
            let mut rp = RProx {
                problem,
                tally: OracleTally::new(),
            };
            let mut obj = CompositeObjective::new(&mut env, &mut rp, l_env.max(1e-9 * mu), mu);
            let copts = CertifiedOptions {
                max_restarts: opts.max_restarts,
                ..Default::default()
            };
            let report = minimize_certified(&mut obj, x0, epsilon, copts)?;
            Ok(Outer {
                x: report.x_final.clone(),
                witness: env.last_witness.clone(),
                report,
            })
        }
        Engine::Case2 | Engine::Case4 => {
            let l_x = spec
                .l_x
                .ok_or_else(|| SolverError::Unsupported(format!("{engine} needs l_x")))?;
            if problem.r.grad.is_none() {
                return Err(SolverError::Unsupported(format!("{engine} needs a gradient of r")));
            }
            let sspec = SlidingSpec::new(l_x.max(spec.mu_x), l_env.max(1e-9 * spec.mu_x), spec.mu_x, g_mu.unwrap_or(0.0).min(l_env));
            let mut rs = RSmooth {
                problem,
                tally: OracleTally::new(),
            };
            let mut env = EnvelopeOracle::new(problem, inner);
            let report = sliding_solve(&sspec, &mut rs, &mut env, &spec.set_x, x0, epsilon, opts.sliding, None)?;
            Ok(Outer {
                x: report.x_final.clone(),
                witness: env.last_witness.clone(),
                report,
            })
        }
        Engine::Auto | Engine::MirrorProx => Err(SolverError::InvalidArgument(format!(
            "{engine} is not an outer minimization engine"
        ))),
    }
}

fn restricted_set(problem: &SaddleProblem, radius: Option<f64>) -> Option<FeasibleSet> {
    // a ball can only replace Q_y when h is handled as a smooth term
    if problem.prox_friendly_h() {
        return None;
    }
    radius.and_then(|r| problem.spec.set_y.intersect_origin_ball(problem.spec.dim_y, 2.0 * r))
}

/// Duality gap certificate of (x, y) over the balls of radii 2 r_x, 2 r_y
/// around the origin. Each side is maximized to accuracy `inner_eps`; where a
/// side's ball cannot be imposed (prox-friendly term) the full set is used,
/// which only enlarges the gap.
pub fn duality_gap(
    problem: &SaddleProblem,
    x: &Vector,
    y: &Vector,
    r_x: f64,
    r_y: f64,
    inner_eps: f64,
) -> Result<GapCertificate> {
    let mut tally = OracleTally::new();
    gap_certificate(problem, x, y, Some((r_x, r_y)), inner_eps, &mut tally)
}

/// `duality_gap` with optional radii, adding the oracle calls to `tally`.
pub fn gap_certificate(
    problem: &SaddleProblem,
    x: &Vector,
    y: &Vector,
    radii: Option<(f64, f64)>,
    inner_eps: f64,
    tally: &mut OracleTally,
) -> Result<GapCertificate> {
    let spec = &problem.spec;
    crate::error::check_dim(spec.dim_x, x)?;
    crate::error::check_dim(spec.dim_y, y)?;
    if let Some((a, b)) = radii {
        if !(a > 0.0 && b > 0.0) {
            return Err(SolverError::InvalidArgument(format!("radii ({a}, {b})")));
        }
    }
    if !spec.set_x.contains(x, 1e-9) || !spec.set_y.contains(y, 1e-9) {
        return Err(SolverError::InvalidArgument("point outside the feasible set".into()));
    }
    let primal_opts = InnerOptions {
        warm_start: Some(y.clone()),
        set_override: restricted_set(problem, radii.map(|r| r.1)),
        ..Default::default()
    };
    let p = solve_inner_max(problem, x, inner_eps, &primal_opts)?;
    *tally += p.tally;
    let dual_problem = problem.dual_view();
    let dual_opts = InnerOptions {
        warm_start: Some(x.clone()),
        set_override: restricted_set(&dual_problem, radii.map(|r| r.0)),
        ..Default::default()
    };
    let d = solve_inner_max(&dual_problem, y, inner_eps, &dual_opts)?;
    *tally += d.tally;
    let primal_value = problem.r_value(x) + p.value;
    let dual_value = -d.value - problem.h_value(y);
    let (r_x, r_y) = radii.unwrap_or((f64::INFINITY, f64::INFINITY));
    Ok(GapCertificate {
        primal_value,
        dual_value,
        gap: primal_value - dual_value + 2.0 * inner_eps,
        r_x,
        r_y,
        inner_accuracy: inner_eps,
    })
}

/// Solves the saddle problem to duality gap `epsilon` with default options.
pub fn solve_saddle(problem: &SaddleProblem, epsilon: f64, engine: Engine) -> Result<SolveReport> {
    solve_saddle_with(problem, epsilon, engine, &SaddleOptions::default())
}

/// Solves to a certified duality gap <= epsilon.
///
/// Case engines minimize f to eps'/4, take the inner witness at x̂ and check
/// the gap. If the dual side is too loose, the dual view is minimized from
/// that witness; if the gap still exceeds epsilon, eps' shrinks by 16.
pub fn solve_saddle_with(
    problem: &SaddleProblem,
    epsilon: f64,
    engine: Engine,
    opts: &SaddleOptions,
) -> Result<SolveReport> {
    problem.spec.require_strong()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}")));
    }
    let engine = if engine == Engine::Auto {
        select_engine(problem)
    } else {
        engine
    };
    let spec = &problem.spec;
    let x0 = spec
        .set_x
        .project(&opts.x0.clone().unwrap_or_else(|| Vector::zeros(spec.dim_x)));
    let y0 = spec
        .set_y
        .project(&opts.y0.clone().unwrap_or_else(|| Vector::zeros(spec.dim_y)));
    crate::error::check_dim(spec.dim_x, &x0)?;
    crate::error::check_dim(spec.dim_y, &y0)?;
    if engine == Engine::MirrorProx {
        return solve_mirror_prox(problem, epsilon, &x0, &y0, opts);
    }
    let clock = Clock::start();
    let mut report = SolveReport::new(x0.clone());
    let mut tally = OracleTally::new();
    let mut step = 0usize;
    let mut push = |report: &mut SolveReport, gap: f64, tally: &OracleTally| {
        step += 1;
        report.push_row(HistoryRow {
            iter: step,
            gap,
            tally: *tally,
            wall_ms: clock.elapsed_ms(),
        });
    };
    let inner_eps = epsilon / 8.0;
    let mut eps_outer = epsilon / 4.0;
    let mut x = x0;
    let mut y = y0;
    let mut best: Option<(f64, Vector, Vector, GapCertificate)> = None;
    for round in 0..opts.max_rounds {
        let out = minimize_outer(problem, eps_outer, engine, &x, Some(y.clone()), opts)?;
        tally += out.report.tally;
        report.smooth_queries += out.report.smooth_queries;
        report.composite_queries += out.report.composite_queries;
        report.iterations += out.report.iterations;
        push(&mut report, out.report.certified_gap, &tally);
        x = out.x;
        let wit = solve_inner_max(
            problem,
            &x,
            eps_outer,
            &InnerOptions {
                warm_start: out.witness.or(Some(y.clone())),
                force_smooth_h: matches!(engine, Engine::Case3 | Engine::Case4),
                ..Default::default()
            },
        )?;
        tally += wit.tally;
        y = wit.witness;
        let mut cert = gap_certificate(problem, &x, &y, opts.radii, inner_eps, &mut tally)?;
        push(&mut report, cert.gap, &tally);
        if cert.gap > epsilon {
            let dual = problem.dual_view();
            let dout = minimize_outer(&dual, eps_outer, engine.for_dual(), &y, Some(x.clone()), opts)?;
            tally += dout.report.tally;
            report.iterations += dout.report.iterations;
            push(&mut report, dout.report.certified_gap, &tally);
            y = dout.x;
            cert = gap_certificate(problem, &x, &y, opts.radii, inner_eps, &mut tally)?;
            push(&mut report, cert.gap, &tally);
        }
        if best.as_ref().map_or(true, |b| cert.gap < b.0) {
            best = Some((cert.gap, x.clone(), y.clone(), cert.clone()));
        }
        if cert.gap <= epsilon {
            report.notes.push(format!("{engine}, {} rounds", round + 1));
            break;
        }
        eps_outer /= 16.0;
    }
    let (gap, bx, by, cert) = best.ok_or(SolverError::ZeroBudget)?;
    if gap > epsilon {
        return Err(SolverError::BudgetExceeded {
            iterations: report.iterations,
            certified: gap,
            best: Box::new(bx),
        });
    }
    report.x_final = bx;
    report.y_final = Some(by);
    report.certified_gap = gap;
    report.certificate = Some(cert);
    report.converged = true;
    report.tally = tally;
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

fn solve_mirror_prox(
    problem: &SaddleProblem,
    epsilon: f64,
    x0: &Vector,
    y0: &Vector,
    opts: &SaddleOptions,
) -> Result<SolveReport> {
    let clock = Clock::start();
    let mut op = assemble_saddle_operator(problem)?;
    let (l, mu) = (op.lipschitz(), op.modulus());
    let mut target = 2.0 * mu * mu * epsilon / (l * l);
    let mut z = stack(x0, y0);
    let mut report = SolveReport::new(x0.clone());
    let mut extra = OracleTally::new();
    let mut step = 0usize;
    let mut best: Option<(f64, Vector, Vector, GapCertificate)> = None;
    let inner_eps = epsilon / 8.0;
    for round in 0..opts.max_rounds.max(1) * 2 {
        let sub = run_restarted_mp(&mut op, &z, target, &RestartedMpOptions::default())?;
        report.iterations += sub.iterations;
        report.smooth_queries += sub.smooth_queries;
        z = sub.x_final;
        let (x, y) = op.split(&z);
        let cert = gap_certificate(problem, &x, &y, opts.radii, inner_eps, &mut extra)?;
        step += 1;
        report.push_row(HistoryRow {
            iter: step,
            gap: cert.gap,
            tally: op.tally() + extra,
            wall_ms: clock.elapsed_ms(),
        });
        if best.as_ref().map_or(true, |b| cert.gap < b.0) {
            best = Some((cert.gap, x, y, cert.clone()));
        }
        if cert.gap <= epsilon {
            report.notes.push(format!("mirror prox, {} rounds", round + 1));
            break;
        }
        target /= 16.0;
    }
    let (gap, bx, by, cert) = best.ok_or(SolverError::ZeroBudget)?;
    if gap > epsilon {
        return Err(SolverError::BudgetExceeded {
            iterations: report.iterations,
            certified: gap,
            best: Box::new(bx),
        });
    }
    report.x_final = bx;
    report.y_final = Some(by);
    report.certified_gap = gap;
    report.certificate = Some(cert);
    report.converged = true;
    report.tally = op.tally() + extra;
    report.wall_ms = clock.elapsed_ms();
    Ok(report)
}

/// Which terms are prox-friendly, plus whether spectral formulas are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProxFlags {
    pub prox_r: bool,
    pub prox_h: bool,
    /// Fail with `MissingSpectralData` instead of skipping spectral formulas.
    #[serde(default)]
    pub require_spectral: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaValue {
    pub id: &'static str,
    pub base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindPrediction {
    pub kind: OracleKind,
    pub base: f64,
    pub formula: &'static str,
}

/// Base oracle counts without logarithmic factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityPrediction {
    pub case: Engine,
    /// mu_x after the spectral substitution.
    pub mu_x: f64,
    pub substituted: bool,
    pub per_kind: Vec<KindPrediction>,
    /// Every formula that applies to the spec, by identifier.
    pub formulas: Vec<FormulaValue>,
}

impl ComplexityPrediction {
    pub fn formula(&self, id: &str) -> Option<f64> {
        self.formulas.iter().find(|f| f.id == id).map(|f| f.base)
    }

    pub fn for_kind(&self, kind: OracleKind) -> Option<&KindPrediction> {
        self.per_kind.iter().find(|k| k.kind == kind)
    }
}

impl fmt::Display for ComplexityPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case {} mu_x {}{}", self.case, self.mu_x, if self.substituted { " (spectral)" } else { "" })?;
        for k in &self.per_kind {
            writeln!(f, "{} {} base {}", k.kind.label(), k.formula, k.base)?;
        }
        for v in &self.formulas {
            writeln!(f, "{} base {}", v.id, v.base)?;
        }
        Ok(())
    }
}

/// Formula identifiers used by `predict_complexity`.
pub mod formula {
    /// L_xy / sqrt(mu_x mu_y): both terms prox-friendly, bilinear coupling.
    pub const PROX_BILINEAR: &str = "prox_bilinear";
    /// max{L_xx, L_xy, L_yy} / min{mu_x, mu_y}: both prox-friendly, general.
    pub const PROX_GENERAL: &str = "prox_general";
    /// sqrt((L_xx + L_xy^2/mu_y) / mu_x): outer grad_x F count.
    pub const OUTER: &str = "outer";
    /// OUTER * sqrt(max{L_yy/mu_y, 1}): grad_y F and prox h count.
    pub const INNER: &str = "inner";
    /// OUTER * sqrt(L_y/mu_y): grad h count when h is only smooth.
    pub const INNER_SMOOTH_H: &str = "inner_smooth_h";
    /// sqrt(L_x/mu_x): grad r count when r is only smooth.
    pub const SMOOTH_R: &str = "smooth_r";
    /// sqrt(L_xx/mu_x + 2 L_xy^2/(mu_x mu_y)): outer calls with exact constants.
    pub const OUTER_TOTAL: &str = "outer_total";
    /// sqrt(L_yy/mu_y) * OUTER_TOTAL: inner calls.
    pub const INNER_TOTAL: &str = "inner_total";
    /// sqrt(L_yy/mu_y + 2 L_xy^2/(mu_x mu_y)): outer calls of the dual problem.
    pub const DUAL_OUTER_TOTAL: &str = "dual_outer_total";
    /// sqrt(L_x L_y λmax / (mu_x mu_y λmin⁺)).
    pub const SPECTRAL: &str = "spectral";
    /// L / min{mu_x, mu_y} for the extragradient baseline.
    pub const MIRROR_PROX: &str = "mirror_prox";
}

/// Base counts per oracle kind for the case implied by `flags`, together
/// with every applicable formula. When the coupling is bilinear, Q_y = R^m,
/// h is l_y-smooth and λmin(AᵀA)/l_y > mu_x, that ratio replaces mu_x.
pub fn predict_complexity(spec: &SaddleSpec, flags: ProxFlags) -> Result<ComplexityPrediction> {
    use formula::*;
    spec.validate()?;
    spec.require_strong()?;
    if flags.require_spectral && spec.spectral.is_none() {
        return Err(SolverError::MissingSpectralData("λmax(AᵀA) and λmin⁺(AᵀA)"));
    }
    let substituted_mu = envelope_modulus(spec);
    let mu_x = substituted_mu.unwrap_or(spec.mu_x);
    let mu_y = spec.mu_y;
    let (lxx, lxy, lyy) = (spec.l_xx, spec.l_xy, spec.l_yy);
    let outer = ((lxx + lxy * lxy / mu_y) / mu_x).sqrt();
    let inner = outer * (lyy / mu_y).max(1.0).sqrt();
    let prox_bilinear = lxy / (mu_x * mu_y).sqrt();
    let prox_general = lxx.max(lxy).max(lyy) / mu_x.min(mu_y);
    let outer_total = (lxx / mu_x + 2.0 * lxy * lxy / (mu_x * mu_y)).sqrt();
    let mut formulas = vec![
        FormulaValue { id: PROX_BILINEAR, base: prox_bilinear },
        FormulaValue { id: PROX_GENERAL, base: prox_general },
        FormulaValue { id: OUTER, base: outer },
        FormulaValue { id: INNER, base: inner },
        FormulaValue { id: OUTER_TOTAL, base: outer_total },
        FormulaValue { id: INNER_TOTAL, base: (lyy / mu_y).sqrt() * outer_total },
        FormulaValue {
            id: DUAL_OUTER_TOTAL,
            base: (lyy / mu_y + 2.0 * lxy * lxy / (mu_x * mu_y)).sqrt(),
        },
    ];
    let inner_h = spec.l_y.map(|ly| outer * (ly / mu_y).sqrt());
    let smooth_r = spec.l_x.map(|lx| (lx / mu_x).sqrt());
    if let Some(v) = inner_h {
        formulas.push(FormulaValue { id: INNER_SMOOTH_H, base: v });
    }
    if let Some(v) = smooth_r {
        formulas.push(FormulaValue { id: SMOOTH_R, base: v });
    }
    let l_op = (lxx + spec.l_x.unwrap_or(0.0)).max(lyy + spec.l_y.unwrap_or(0.0)) + lxy;
    formulas.push(FormulaValue {
        id: MIRROR_PROX,
        base: l_op / spec.mu_x.min(mu_y),
    });
    if let (Some(sp), Some(lx), Some(ly)) = (&spec.spectral, spec.l_x, spec.l_y) {
        if spec.bilinear && sp.lambda_min_plus > 0.0 {
            formulas.push(FormulaValue {
                id: SPECTRAL,
                base: (lx * ly * sp.lambda_max / (mu_x * mu_y * sp.lambda_min_plus)).sqrt(),
            });
        }
    } else if flags.require_spectral {
        return Err(SolverError::MissingSpectralData("l_x and l_y for the spectral formula"));
    }
    let need = |v: Option<f64>, what: &'static str| {
        v.ok_or_else(|| SolverError::InvalidSpec(format!("{what} is required for this case")))
    };
    let case = match (flags.prox_r, flags.prox_h) {
        (true, true) => Engine::Case1,
        (false, true) => Engine::Case2,
        (true, false) => Engine::Case3,
        (false, false) => Engine::Case4,
    };
    let kp = |kind, base, formula| KindPrediction { kind, base, formula };
    let mut per_kind = Vec::new();
    match case {
        Engine::Case1 => {
            let (b, id) = if spec.bilinear {
                (prox_bilinear, PROX_BILINEAR)
            } else {
                (prox_general, PROX_GENERAL)
            };
            for k in [OracleKind::ProxR, OracleKind::GradXF, OracleKind::ProxH, OracleKind::GradYF] {
                per_kind.push(kp(k, b, id));
            }
        }
        _ => {
            if flags.prox_r {
                per_kind.push(kp(OracleKind::ProxR, outer, OUTER));
            } else {
                per_kind.push(kp(OracleKind::GradR, need(smooth_r, "l_x")?, SMOOTH_R));
            }
            per_kind.push(kp(OracleKind::GradXF, outer, OUTER));
            if flags.prox_h {
                per_kind.push(kp(OracleKind::ProxH, inner, INNER));
            } else {
                per_kind.push(kp(OracleKind::GradH, need(inner_h, "l_y")?, INNER_SMOOTH_H));
            }
            per_kind.push(kp(OracleKind::GradYF, inner, INNER));
        }
    }
    Ok(ComplexityPrediction {
        case,
        mu_x,
        substituted: substituted_mu.is_some(),
        per_kind,
        formulas,
    })
}

/// A smoothed matrix game and any warnings raised while building it.
#[derive(Debug, Clone)]
pub struct SmoothedGame {
    pub problem: SaddleProblem,
    pub warnings: Vec<String>,
}

/// F(x,y) = <Ax,y> with h(y) = eps |y|^2 / (4 r_y^2) on all space, so that
/// mu_y = eps / (2 r_y^2) and L_xy = sqrt(λmax(AᵀA)). r is zero; regularize
/// the x side before solving.
pub fn smooth_matrix_game(a: &Matrix, epsilon: f64, r_y: f64) -> Result<SmoothedGame> {
    if !(epsilon > 0.0) || !(r_y > 0.0) {
        return Err(SolverError::InvalidArgument(format!("epsilon = {epsilon}, r_y = {r_y}")));
    }
    let (m, n) = a.shape();
    let mu_y = epsilon / (2.0 * r_y * r_y);
    let mut warnings = Vec::new();
    let (l_xy, spectral_data, coupling) = match spectral(a) {
        Ok(s) => (s.lambda_max.sqrt(), Some(s.data()), Coupling::bilinear(a.clone())),
        Err(SolverError::Degenerate(_)) => {
            warnings.push("zero matrix: L_xy = 0 and the problem decouples".to_string());
            (0.0, None, Coupling::zero())
        }
        Err(e) => return Err(e),
    };
    let spec = SaddleSpec {
        l_xx: 0.0,
        l_xy,
        l_yy: 0.0,
        l_x: Some(0.0),
        l_y: Some(mu_y),
        mu_x: 0.0,
        mu_y,
        dim_x: n,
        dim_y: m,
        set_x: FeasibleSet::AllSpace,
        set_y: FeasibleSet::AllSpace,
        spectral: spectral_data,
        bilinear: l_xy > 0.0,
    };
    let problem = SaddleProblem::new(
        spec,
        Component::indicator(FeasibleSet::AllSpace),
        Component::isotropic_quadratic(mu_y, Vector::zeros(m), FeasibleSet::AllSpace),
        coupling,
    )?;
    Ok(SmoothedGame { problem, warnings })
}
