//! Boundary value problems by shooting: the shifted Dirichlet problem
//! `F(u'', u', u, t) - kappa*u = f` with `u(a) = u(b) = 0`, and the mixed
//! problem with `u'(c) = u(b) = 0`.
//!
//! The shooting parameter is bracketed by geometric expansion (the
//! sub/supersolution construction guarantees the end values escape to
//! either sign once the parameter is large) and then refined by bisection
//! with secant acceleration.

use crate::error::{Error, Result};
use crate::ivp::{integrate, IvpConfig, Trajectory};
use crate::operator::OperatorSpec;
use crate::real::Real;
use crate::sampled::SampledFn;
use crate::scalar_root::{expand_bracket, refine_root};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind<T> {
    DirichletDirichlet,
    /// Zero slope at the clamp point `c`, zero value at the right end.
    NeumannDirichlet { clamp: T },
}

/// The shifted problem `F(u'',u',u,t) - kappa*u = f` on an interval.
#[derive(Debug, Clone)]
pub struct BvpProblem<T> {
    pub spec: OperatorSpec<T>,
    pub f: SampledFn<T>,
    pub interval: (T, T),
    pub kappa: T,
    pub bc: BoundaryKind<T>,
}

impl<T: Real> BvpProblem<T> {
    pub fn dirichlet(spec: OperatorSpec<T>, f: SampledFn<T>, interval: (T, T), kappa: T) -> Self {
        Self { spec, f, interval, kappa, bc: BoundaryKind::DirichletDirichlet }
    }

    pub fn neumann_dirichlet(
        spec: OperatorSpec<T>,
        f: SampledFn<T>,
        interval: (T, T),
        kappa: T,
        clamp: T,
    ) -> Self {
        Self { spec, f, interval, kappa, bc: BoundaryKind::NeumannDirichlet { clamp } }
    }

    fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let (a, b) = self.interval;
        if !(a < b) {
            return Err(Error::InvalidParameter { name: "interval", reason: "needs a < b".into() });
        }
        if let BoundaryKind::NeumannDirichlet { clamp } = self.bc {
            if !(a <= clamp && clamp < b) {
                return Err(Error::InvalidParameter {
                    name: "clamp",
                    reason: "clamp point must satisfy a <= c < b".into(),
                });
            }
        }
        Ok(())
    }
}

/// The shift that makes `(m,p,u) -> F - kappa*u` strictly decreasing in `u`:
/// one more than the zero-order Lipschitz constant.
pub fn choose_kappa<T: Real>(spec: &OperatorSpec<T>) -> T {
    spec.delta + T::one()
}

/// Relative stopping tolerance on the boundary mismatch, scale-free under
/// positive homogeneity.
const SHOOT_TOL: f64 = 1e-10;
const EXPANSION_BUDGET: usize = 60;

pub(crate) struct ShootSetup<T> {
    /// Integration start, end and initial data as functions of the
    /// shooting parameter d.
    pub t0: T,
    pub t1: T,
    pub init: fn(T) -> (T, T),
    pub boundary_tol: f64,
    /// Starting half-width of the bracket expansion; the converged
    /// parameter is independent of this seed.
    pub seed_width: f64,
}

/// Shooting core shared by the Dirichlet and mixed solvers and by the
/// Krein-Rutman iteration (which feeds dense-output right-hand sides).
pub(crate) fn shoot_boundary<T: Real>(
    spec: &OperatorSpec<T>,
    q: &impl Fn(T) -> T,
    kappa: T,
    setup: ShootSetup<T>,
    cfg: &IvpConfig<T>,
) -> Result<Trajectory<T>> {
    let ShootSetup { t0, t1, init, boundary_tol, seed_width } = setup;
    let mut evaluate = |d: T| -> Result<T> {
        let (u0, p0) = init(d);
        let traj = integrate(spec, q, kappa, t0, t1, u0, p0, cfg)?;
        Ok(traj.end().0)
    };

    let bracket = expand_bracket(
        &mut evaluate,
        T::zero(),
        T::c(seed_width),
        T::c(4.0),
        EXPANSION_BUDGET,
        "boundary shooting",
    )?;
    let tol = T::c(boundary_tol);
    let sup_cell = std::cell::Cell::new(T::one());
    let mut evaluate2 = |d: T| -> Result<T> {
        let (u0, p0) = init(d);
        let traj = integrate(spec, q, kappa, t0, t1, u0, p0, cfg)?;
        sup_cell.set(traj.sup_abs_u());
        Ok(traj.end().0)
    };
    let out = refine_root(
        &mut evaluate2,
        bracket,
        |d| T::epsilon() * T::c(4.0) * (T::one() + d.abs()),
        |_, fb| fb.abs() <= tol * (T::one() + sup_cell.get()),
        300,
        "boundary shooting",
    )?;
    let (u0, p0) = init(out.root);
    integrate(spec, q, kappa, t0, t1, u0, p0, cfg)
}

/// Solves the Dirichlet problem by shooting on the initial slope.
pub fn solve_dirichlet<T: Real>(prob: &BvpProblem<T>, cfg: &IvpConfig<T>) -> Result<Trajectory<T>> {
    prob.validate()?;
    if prob.bc != BoundaryKind::DirichletDirichlet {
        return Err(Error::InvalidParameter {
            name: "bc",
            reason: "solve_dirichlet needs Dirichlet-Dirichlet conditions".into(),
        });
    }
    let (a, b) = prob.interval;
    let f = &prob.f;
    shoot_boundary(
        &prob.spec,
        &|t| f.eval(t),
        prob.kappa,
        ShootSetup {
            t0: a,
            t1: b,
            init: |d| (num_traits::zero(), d),
            boundary_tol: SHOOT_TOL,
            seed_width: 1.0,
        },
        cfg,
    )
}

/// Solves the mixed problem `u'(c) = u(b) = 0` by shooting on the value at
/// the clamp point. The segment `(a, c)` carries no condition and is not
/// integrated; the solution trajectory lives on `(c, b)`.
pub fn solve_neumann_dirichlet<T: Real>(
    prob: &BvpProblem<T>,
    cfg: &IvpConfig<T>,
) -> Result<Trajectory<T>> {
    prob.validate()?;
    let BoundaryKind::NeumannDirichlet { clamp } = prob.bc else {
        return Err(Error::InvalidParameter {
            name: "bc",
            reason: "solve_neumann_dirichlet needs a clamp point".into(),
        });
    };
    let (_, b) = prob.interval;
    let f = &prob.f;
    shoot_boundary(
        &prob.spec,
        &|t| f.eval(t),
        prob.kappa,
        ShootSetup {
            t0: clamp,
            t1: b,
            init: |d| (d, num_traits::zero()),
            boundary_tol: SHOOT_TOL,
            seed_width: 1.0,
        },
        cfg,
    )
}

/// Dispatches on the boundary kind.
pub fn solve<T: Real>(prob: &BvpProblem<T>, cfg: &IvpConfig<T>) -> Result<Trajectory<T>> {
    match prob.bc {
        BoundaryKind::DirichletDirichlet => solve_dirichlet(prob, cfg),
        BoundaryKind::NeumannDirichlet { .. } => solve_neumann_dirichlet(prob, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::LinearCoeffs;
    use approx::assert_relative_eq;

    fn line_op() -> OperatorSpec<f64> {
        OperatorSpec::linear(LinearCoeffs::constant(1.0, 0.0, 0.0), 1)
    }

    fn cfg() -> IvpConfig<f64> {
        IvpConfig::default()
    }

    #[test]
    fn dirichlet_cosh_closed_form() {
        // u'' - u = -1, u(0) = u(1) = 0: u = 1 - cosh(t - 1/2)/cosh(1/2).
        let prob = BvpProblem::dirichlet(line_op(), SampledFn::constant(-1.0), (0.0, 1.0), 1.0);
        let u = solve_dirichlet(&prob, &cfg()).unwrap();
        let exact = |t: f64| 1.0 - (t - 0.5).cosh() / 0.5f64.cosh();
        assert_relative_eq!(u.u_at(0.5), exact(0.5), epsilon = 1e-9);
        assert_relative_eq!(u.u_at(0.25), exact(0.25), epsilon = 1e-9);
        assert!((u.u_at(0.5) - 0.113181).abs() < 1e-6);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let prob = BvpProblem::dirichlet(
            OperatorSpec::pucci_plus(1.0, 2.0),
            SampledFn::constant(0.0),
            (0.0, 1.0),
            1.0,
        );
        let u = solve_dirichlet(&prob, &cfg()).unwrap();
        assert!(u.sup_abs_u() <= 1e-10);
        assert!(u.start().1.abs() <= 1e-10, "shooting slope should be zero");
    }

    #[test]
    fn neumann_dirichlet_cosh_closed_form() {
        // u'' - u = -1, u'(0) = u(1) = 0: u = 1 - cosh(t)/cosh(1).
        let prob = BvpProblem::neumann_dirichlet(
            line_op(),
            SampledFn::constant(-1.0),
            (0.0, 1.0),
            1.0,
            0.0,
        );
        let u = solve_neumann_dirichlet(&prob, &cfg()).unwrap();
        assert_relative_eq!(u.u_at(0.0), 1.0 - 1.0 / 1f64.cosh(), epsilon = 1e-9);
        assert!((u.u_at(0.0) - 0.351945).abs() < 1e-6);
        assert!(u.start().1.abs() <= 1e-9, "clamped slope");
    }

    #[test]
    fn neumann_zero_data() {
        let prob = BvpProblem::neumann_dirichlet(
            OperatorSpec::pucci_plus(1.0, 2.0).with_gamma(0.1),
            SampledFn::constant(0.0),
            (0.0, 1.0),
            1.0,
            0.25,
        );
        let u = solve_neumann_dirichlet(&prob, &cfg()).unwrap();
        assert!(u.sup_abs_u() <= 1e-10);
    }

    #[test]
    fn mixed_solution_matches_reflected_dirichlet() {
        // The mixed solution on (c, b) coincides with the restriction of
        // the even-reflected Dirichlet problem on (2c - b, b) when the
        // operator and data are t-independent.
        let spec = OperatorSpec::pucci_plus(1.0, 2.0);
        let c = 0.0;
        let b = 1.0;
        let mixed = solve_neumann_dirichlet(
            &BvpProblem::neumann_dirichlet(
                spec.clone(),
                SampledFn::constant(-1.0),
                (c, b),
                1.0,
                c,
            ),
            &cfg(),
        )
        .unwrap();
        let reflected = solve_dirichlet(
            &BvpProblem::dirichlet(spec, SampledFn::constant(-1.0), (2.0 * c - b, b), 1.0),
            &cfg(),
        )
        .unwrap();
        for &t in &[0.0, 0.3, 0.7, 1.0] {
            assert_relative_eq!(mixed.u_at(t), reflected.u_at(t), epsilon = 1e-8);
        }
    }

    #[test]
    fn comparison_principle_direction() {
        // F - kappa*u = f: a larger right-hand side gives a smaller solution.
        let spec = OperatorSpec::pucci_plus(1.0, 2.0).with_gamma(0.2);
        let f_small = SampledFn::from_fn(0.0, 1.0, 33, |t: f64| -1.0 - (3.0 * t).sin().powi(2));
        let f_large = f_small.map(|v| v + 0.5);
        let u_small = solve_dirichlet(
            &BvpProblem::dirichlet(spec.clone(), f_large, (0.0, 1.0), 1.0),
            &cfg(),
        )
        .unwrap();
        let u_big =
            solve_dirichlet(&BvpProblem::dirichlet(spec, f_small, (0.0, 1.0), 1.0), &cfg()).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!(
                u_small.u_at(t) <= u_big.u_at(t) + 1e-9,
                "comparison failed at t = {t}"
            );
        }
    }

    #[test]
    fn pucci_dirichlet_positive_solution() {
        let spec = OperatorSpec::pucci_plus(1.0, 2.0);
        let prob = BvpProblem::dirichlet(spec, SampledFn::constant(-1.0), (0.0, 1.0), 1.0);
        let u = solve_dirichlet(&prob, &cfg()).unwrap();
        for k in 1..20 {
            let t = k as f64 / 20.0;
            assert!(u.u_at(t) > 0.0, "solution should be positive inside");
        }
    }

    #[test]
    fn kappa_margin_rule() {
        assert_eq!(choose_kappa(&OperatorSpec::pucci_plus(1.0, 2.0)), 1.0);
        assert_eq!(choose_kappa(&OperatorSpec::pucci_plus(1.0, 2.0).with_delta(2.5)), 3.5);
    }

    #[test]
    fn shifted_operator_is_decreasing_in_u() {
        // With kappa = delta + 1, u -> F(0,0,0,u,t) - kappa*u decreases on a
        // grid, for a catalog operator with zero-order slope delta.
        let spec = OperatorSpec::linear(LinearCoeffs::constant(1.0, 0.0, 0.7), 1);
        let kappa = choose_kappa(&spec);
        let g = |u: f64| {
            spec.evaluate(&crate::operator::EvalPoint::line(0.0, 0.0, u, 0.5)).unwrap() - kappa * u
        };
        let mut prev = g(-2.0);
        for k in 1..=40 {
            let u = -2.0 + 4.0 * k as f64 / 40.0;
            let cur = g(u);
            assert!(cur < prev, "not strictly decreasing at u = {u}");
            prev = cur;
        }
    }

    #[test]
    fn uniqueness_across_bracket_seeds() {
        // Expansions started from different widths walk different brackets
        // but converge to the same shooting slope.
        let spec = OperatorSpec::pucci_plus(1.0, 2.0).with_gamma(0.3);
        let f = SampledFn::from_fn(0.0, 1.0, 17, |t: f64| (2.0 * t).cos() - 1.5);
        let shoot = |seed_width: f64| {
            shoot_boundary(
                &spec,
                &|t| f.eval(t),
                1.0,
                ShootSetup {
                    t0: 0.0,
                    t1: 1.0,
                    init: |d| (0.0, d),
                    boundary_tol: SHOOT_TOL,
                    seed_width,
                },
                &cfg(),
            )
            .unwrap()
        };
        let u1 = shoot(1.0);
        let u2 = shoot(0.17);
        assert!((u1.start().1 - u2.start().1).abs() <= 1e-10 * (1.0 + u1.start().1.abs()));
    }
}
