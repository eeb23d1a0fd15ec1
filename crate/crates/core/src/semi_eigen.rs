//! First positive and negative semi-eigenvalues on an interval, with their
//! one-signed eigenfunctions.
//!
//! Convention: `F(u'', u', u, t) = -lambda * u`, so the linear case yields
//! positive eigenvalues.
//!
//! The primary method shoots on lambda: integrate from `u(t1) = 0`,
//! `u'(t1) = sign`, and bisect lambda until the first interior zero lands on
//! `t2`. The first-zero location decreases as lambda grows (interval
//! monotonicity of the semi-eigenvalues), which the bisection verifies by
//! maintaining its bracket at every step rather than assuming silently.
//! A Krein-Rutman inverse iteration on the kappa-shifted solution operator
//! is kept as the second, proof-faithful route and as a cross-check.
//!
//! Concave operators are never solved directly: the machinery runs on the
//! flipped operator and results are sign-flipped.

use crate::bvp::{choose_kappa, shoot_boundary, ShootSetup};
use crate::error::{Error, Result};
use crate::ivp::{first_zero, integrate, IvpConfig, Trajectory};
use crate::operator::{EvalPoint, OperatorSpec};
use crate::real::Real;

/// Sign of the eigenfunction on the (first) interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn scalar<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of piece `i` when piece 0 carries `self`.
    pub fn piece(self, i: usize) -> Self {
        if i % 2 == 0 {
            self
        } else {
            self.flipped()
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Shoot,
    InverseIteration,
}

/// One semi-eigenvalue with its one-signed eigenfunction (normalized to
/// `sup |u| = 1`) and convergence metadata.
#[derive(Debug, Clone)]
pub struct SemiEigenResult<T> {
    pub lambda: T,
    pub sign: Sign,
    pub interval: (T, T),
    pub eigenfunction: Trajectory<T>,
    pub method: Method,
    pub iterations: usize,
    /// Max equation residual over 64 interior probes.
    pub residual: T,
}

/// Shoots the eigen equation at a fixed lambda from `u(t1) = 0`,
/// `u'(t1) = sign`. Returns the first interior zero past `t1` (none when
/// the solution keeps its sign through `t2`) along with the trajectory.
pub fn shoot_lambda<T: Real>(
    spec: &OperatorSpec<T>,
    t1: T,
    t2: T,
    sign: Sign,
    lambda: T,
    cfg: &IvpConfig<T>,
) -> Result<(Option<T>, Trajectory<T>)> {
    if !(t1 < t2) {
        return Err(Error::InvalidParameter { name: "interval", reason: "needs t1 < t2".into() });
    }
    // F = -lambda*u written as the shifted form with q = 0, kappa = -lambda.
    // Integrating a little past t2 turns a zero sitting exactly on the end
    // into a sharp interior crossing instead of a sign-noise knife edge.
    let span = t2 - t1;
    let overshoot = t2 + span * T::c(0.02);
    let traj = integrate(spec, |_| T::zero(), -lambda, t1, overshoot, T::zero(), sign.scalar(), cfg)?;
    let z = first_zero(&traj, t1).filter(|&z| z <= t2 + T::c(1e-11) * span);
    Ok((z, traj))
}

struct LambdaBisection<T> {
    target: T,
    z_tol: T,
    width_rel: T,
}

impl<T: Real> LambdaBisection<T> {
    fn new(t1: T, t2: T) -> Self {
        Self { target: t2, z_tol: T::c(1e-11) * (t2 - t1), width_rel: T::c(1e-10) }
    }

    /// Runs the bisection over `shoot(lambda) -> first zero`.
    fn run(
        &self,
        mut shoot: impl FnMut(T) -> Result<Option<T>>,
        lambda_lo_seed: T,
        lambda_hi_seed: T,
    ) -> Result<(T, usize)> {
        let mut iterations = 0usize;
        let mut lo = lambda_lo_seed;
        // The lower seed sits below every semi-eigenvalue (mu = kappa +
        // lambda is positive); widen defensively if shooting still crosses.
        for _ in 0..8 {
            iterations += 1;
            match shoot(lo)? {
                None => break,
                Some(_) => lo = lo - (T::one() + lo.abs()),
            }
        }
        if shoot(lo)?.is_some() {
            return Err(Error::Solver("no lower lambda bracket: zero persists".into()));
        }

        let mut hi = lambda_hi_seed.max(lo + T::one());
        let mut z_hi = None;
        for _ in 0..=60 {
            iterations += 1;
            match shoot(hi)? {
                Some(z) => {
                    z_hi = Some(z);
                    break;
                }
                None => hi = hi * T::c(2.0),
            }
        }
        let Some(mut z_hi) = z_hi else {
            return Err(Error::BracketNotFound { context: "lambda expansion", attempts: 60 });
        };

        // Bisection; the bracket invariant (no crossing at lo, crossing at
        // hi) is re-established from the classification at every step.
        for _ in 0..500 {
            if (z_hi - self.target).abs() <= self.z_tol
                && hi - lo <= self.width_rel * (T::one() + hi.abs())
            {
                return Ok((hi, iterations));
            }
            iterations += 1;
            let mid = lo + (hi - lo) * T::c(0.5);
            match shoot(mid)? {
                Some(z) => {
                    debug_assert!(
                        z <= self.target + self.z_tol,
                        "first zero escaped the interval"
                    );
                    hi = mid;
                    z_hi = z;
                }
                None => lo = mid,
            }
            if hi - lo <= T::epsilon() * T::c(4.0) * (T::one() + hi.abs()) {
                // Bracket exhausted at machine precision.
                return Ok((hi, iterations));
            }
        }
        Err(Error::NonConvergence { method: "lambda bisection", iterations: 500 })
    }
}

/// Shared by the interval and radial eigen solvers.
pub(crate) fn lambda_search<T: Real>(
    shoot: impl FnMut(T) -> Result<Option<T>>,
    t1: T,
    t2: T,
    lambda_lo: T,
    lambda_hi_seed: T,
) -> Result<(T, usize)> {
    LambdaBisection::new(t1, t2).run(shoot, lambda_lo, lambda_hi_seed)
}

pub(crate) fn upper_seed<T: Real>(spec: &OperatorSpec<T>, t1: T, t2: T) -> T {
    // Exact for Pucci on an interval; any seed works, expansion doubles it.
    let span = t2 - t1;
    T::c(std::f64::consts::PI * std::f64::consts::PI) * spec.lambda_max / (span * span)
}

/// Max residual of `F(u'',u',u,t) + lambda*u` over 64 interior probes.
pub(crate) fn eigen_residual<T: Real>(
    spec: &OperatorSpec<T>,
    traj: &Trajectory<T>,
    lambda: T,
    lo: T,
    hi: T,
) -> T {
    let mut worst = T::zero();
    for k in 1..=64 {
        let t = lo + (hi - lo) * T::from_usize(k).unwrap() / T::c(65.0);
        let p = traj.p_at(t);
        let u = traj.u_at(t);
        let ell = if spec.dim >= 2 { p / t } else { T::zero() };
        let pt = EvalPoint { m: traj.m_at(t), ell, p, u, r: t };
        if let Ok(f) = spec.evaluate(&pt) {
            worst = worst.max((f + lambda * u).abs());
        }
    }
    worst
}

fn normalized<T: Real>(mut traj: Trajectory<T>) -> Trajectory<T> {
    let sup = traj.sup_abs_u();
    if sup > T::zero() {
        traj.scale(T::one() / sup);
    }
    traj
}

fn negated<T: Real>(mut res: SemiEigenResult<T>) -> SemiEigenResult<T> {
    res.eigenfunction.scale(-T::one());
    res.sign = res.sign.flipped();
    res
}

/// The unique lambda whose shooting solution first vanishes exactly at
/// `t2`, with the one-signed eigenfunction normalized to `sup|u| = 1`.
pub fn semi_eigenvalue<T: Real>(
    spec: &OperatorSpec<T>,
    t1: T,
    t2: T,
    sign: Sign,
    cfg: &IvpConfig<T>,
) -> Result<SemiEigenResult<T>> {
    if spec.is_concave() {
        return Ok(negated(semi_eigenvalue(&spec.flip(), t1, t2, sign.flipped(), cfg)?));
    }
    spec.validate()?;
    if !(t1 < t2) {
        return Err(Error::InvalidParameter { name: "interval", reason: "needs t1 < t2".into() });
    }
    let (lambda, iterations) = lambda_search(
        |lam| Ok(shoot_lambda(spec, t1, t2, sign, lam, cfg)?.0),
        t1,
        t2,
        -choose_kappa(spec),
        upper_seed(spec, t1, t2),
    )?;
    let traj = integrate(spec, |_| T::zero(), -lambda, t1, t2, T::zero(), sign.scalar(), cfg)?;
    let eigenfunction = normalized(traj);
    let residual = eigen_residual(spec, &eigenfunction, lambda, t1, t2);
    Ok(SemiEigenResult {
        lambda,
        sign,
        interval: (t1, t2),
        eigenfunction,
        method: Method::Shoot,
        iterations,
        residual,
    })
}

/// Krein-Rutman route: inverse iteration on the positive solution operator
/// `L(g)` solving `F - kappa*u = -g`, normalized in the sup norm each step;
/// `mu = lim ||v|| / ||L(v)||` and `lambda = mu - kappa`.
pub fn inverse_iteration<T: Real>(
    spec: &OperatorSpec<T>,
    t1: T,
    t2: T,
    sign: Sign,
    cfg: &IvpConfig<T>,
) -> Result<SemiEigenResult<T>> {
    if spec.is_concave() {
        return Ok(negated(inverse_iteration(&spec.flip(), t1, t2, sign.flipped(), cfg)?));
    }
    spec.validate()?;
    // The negative eigenfunction of a convex operator is the flipped
    // positive eigenfunction of its (concave) reflection; the shooting
    // sub-solver does not depend on convexity.
    if sign == Sign::Minus {
        return Ok(negated(inverse_iteration_positive(&spec.flip(), t1, t2, cfg)?));
    }
    inverse_iteration_positive(spec, t1, t2, cfg)
}

fn inverse_iteration_positive<T: Real>(
    spec: &OperatorSpec<T>,
    t1: T,
    t2: T,
    cfg: &IvpConfig<T>,
) -> Result<SemiEigenResult<T>> {
    const MAX_ITER: usize = 500;
    // Tight boundary tolerance so successive mu estimates settle well below
    // the stopping threshold; the systematic integrator bias cancels in the
    // mu differences.
    const INNER_TOL: f64 = 1e-13;

    let mut kappa = choose_kappa(spec);
    'kappa_retry: for _ in 0..4 {
        let apply = |g: &dyn Fn(T) -> T| -> Result<Trajectory<T>> {
            shoot_boundary(
                spec,
                &|t| -g(t),
                kappa,
                ShootSetup {
                    t0: t1,
                    t1: t2,
                    init: |d| (T::zero(), d),
                    boundary_tol: INNER_TOL,
                    seed_width: 1.0,
                },
                cfg,
            )
        };

        // Start vector: the Dirichlet solution with f = -1 (positive).
        let start = match apply(&|_| T::one()) {
            Ok(v) => v,
            Err(Error::BracketNotFound { .. }) => {
                kappa = kappa * T::c(2.0);
                continue 'kappa_retry;
            }
            Err(e) => return Err(e),
        };
        let mut v = normalized(start);
        let mut mu_prev = T::zero();

        for it in 1..=MAX_ITER {
            let w = match apply(&|t| v.u_at(t)) {
                Ok(w) => w,
                Err(Error::BracketNotFound { .. }) => {
                    kappa = kappa * T::c(2.0);
                    continue 'kappa_retry;
                }
                Err(e) => return Err(e),
            };
            let norm = w.sup_abs_u();
            if !(norm > T::zero()) {
                return Err(Error::Solver("solution operator annihilated the iterate".into()));
            }
            let mu = T::one() / norm;
            v = normalized(w);
            if it > 1 && (mu - mu_prev).abs() < T::c(1e-10) * mu {
                let lambda = mu - kappa;
                let residual = eigen_residual(spec, &v, lambda, t1, t2);
                return Ok(SemiEigenResult {
                    lambda,
                    sign: Sign::Plus,
                    interval: (t1, t2),
                    eigenfunction: v,
                    method: Method::InverseIteration,
                    iterations: it,
                    residual,
                });
            }
            mu_prev = mu;
        }
        return Err(Error::NonConvergence { method: "inverse iteration", iterations: MAX_ITER });
    }
    Err(Error::Solver("inverse iteration: no kappa admitted a shooting bracket".into()))
}

/// One row of the interval-shrinking table.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityRow<T> {
    pub interval: (T, T),
    pub lambda_plus: T,
    pub lambda_minus: T,
    /// ABP-derived lower bound `1/(B * length) - kappa`.
    pub blowup_lower_bound: T,
}

#[derive(Debug, Clone)]
pub struct MonotonicityTable<T> {
    pub rows: Vec<MonotonicityRow<T>>,
    /// Strict increase of both families across the shrinking rows.
    pub strictly_increasing: bool,
    /// Every row respects the quantitative blow-up bound.
    pub blowup_consistent: bool,
}

/// Semi-eigenvalues on the shrinking family `(a + k*eps, b - k*eps)` for
/// `k = 0 .. shrink_steps-1`.
pub fn monotonicity_table<T: Real>(
    spec: &OperatorSpec<T>,
    base: (T, T),
    shrink_steps: usize,
    eps: T,
    cfg: &IvpConfig<T>,
) -> Result<MonotonicityTable<T>> {
    if shrink_steps < 2 {
        return Err(Error::InvalidParameter {
            name: "shrink_steps",
            reason: "needs at least two rows".into(),
        });
    }
    let (a, b) = base;
    let kappa = choose_kappa(spec);
    let mut rows = Vec::with_capacity(shrink_steps);
    for k in 0..shrink_steps {
        let off = eps * T::from_usize(k).unwrap();
        let (lo, hi) = (a + off, b - off);
        if !(lo < hi) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "shrinking family collapsed".into(),
            });
        }
        let lp = semi_eigenvalue(spec, lo, hi, Sign::Plus, cfg)?.lambda;
        let lm = semi_eigenvalue(spec, lo, hi, Sign::Minus, cfg)?.lambda;
        let len = hi - lo;
        let bound = T::one()
            / (crate::diagnostics::abp_constant(spec.lambda_min, spec.gamma, len, 1) * len)
            - kappa;
        rows.push(MonotonicityRow {
            interval: (lo, hi),
            lambda_plus: lp,
            lambda_minus: lm,
            blowup_lower_bound: bound,
        });
    }
    let strictly_increasing = rows.windows(2).all(|w| {
        w[1].lambda_plus > w[0].lambda_plus && w[1].lambda_minus > w[0].lambda_minus
    });
    let blowup_consistent = rows.iter().all(|r| {
        r.lambda_plus >= r.blowup_lower_bound && r.lambda_minus >= r.blowup_lower_bound
    });
    Ok(MonotonicityTable { rows, strictly_increasing, blowup_consistent })
}
