//! Initial value problems for `u'' = G(u', u, q(t) + kappa*u, t)` and the
//! radial variant with the `u'/r` curvature slot: an adaptive embedded
//! Runge-Kutta 5(4) pair with cubic-Hermite dense output and zero-crossing
//! detection on the dense output.
//!
//! G is only Lipschitz (it has kinks where the second derivative changes
//! sign and where a Bellman branch switches), so there is no payoff in
//! higher-order smoothness; the pair with a tight step cap handles kink
//! crossings through its error control alone.

use crate::error::{Error, Result};
use crate::operator::OperatorSpec;
use crate::real::Real;

/// Integrator tolerances. `max_step` is a fraction of the interval length;
/// `event_tol` is the abscissa tolerance for zero crossings.
#[derive(Debug, Clone, Copy)]
pub struct IvpConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    pub event_tol: T,
}

impl<T: Real> Default for IvpConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::c(1e-10),
            abs_tol: T::c(1e-12),
            max_step: T::c(1e-3),
            event_tol: T::c(1e-12),
        }
    }
}

impl<T: Real> IvpConfig<T> {
    /// Looser settings for survey work such as grid scans.
    pub fn coarse() -> Self {
        Self {
            rel_tol: T::c(1e-8),
            abs_tol: T::c(1e-10),
            max_step: T::c(4e-3),
            event_tol: T::c(1e-10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_pos = self.rel_tol > T::zero()
            && self.abs_tol > T::zero()
            && self.max_step > T::zero()
            && self.event_tol > T::zero();
        if !all_pos {
            return Err(Error::InvalidParameter {
                name: "ivp config",
                reason: "tolerances must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Dense-output solution sample of a second-order ODE: abscissae, values,
/// first and second derivatives at the accepted step ends, interpolated by
/// cubic Hermite pieces in between.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    ts: Vec<T>,
    us: Vec<T>,
    ps: Vec<T>,
    ms: Vec<T>,
    event_tol: T,
    pub meta: StepStats,
}

impl<T: Real> Trajectory<T> {
    /// Builds a trajectory from explicit samples (tests, merging). The
    /// abscissae must be strictly increasing.
    pub fn from_samples(ts: Vec<T>, us: Vec<T>, ps: Vec<T>, ms: Vec<T>) -> Self {
        assert!(ts.len() >= 2, "trajectory needs at least two nodes");
        assert!(ts.len() == us.len() && ts.len() == ps.len() && ts.len() == ms.len());
        assert!(ts.windows(2).all(|w| w[1] > w[0]), "abscissae must increase");
        Self { ts, us, ps, ms, event_tol: T::c(1e-12), meta: StepStats::default() }
    }

    pub fn span(&self) -> (T, T) {
        (self.ts[0], *self.ts.last().unwrap())
    }

    pub fn nodes(&self) -> &[T] {
        &self.ts
    }

    pub fn values(&self) -> &[T] {
        &self.us
    }

    pub fn derivatives(&self) -> &[T] {
        &self.ps
    }

    pub fn second_derivatives(&self) -> &[T] {
        &self.ms
    }

    pub fn start(&self) -> (T, T, T) {
        (self.us[0], self.ps[0], self.ms[0])
    }

    pub fn end(&self) -> (T, T, T) {
        let k = self.ts.len() - 1;
        (self.us[k], self.ps[k], self.ms[k])
    }

    fn segment_of(&self, t: T) -> usize {
        // Largest i with ts[i] <= t, clamped to a valid segment start.
        let n = self.ts.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.ts[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn hermite(&self, t: T, y: &[T], dy: &[T]) -> T {
        let i = self.segment_of(t);
        let h = self.ts[i + 1] - self.ts[i];
        let s = (t - self.ts[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::c(2.0);
        let three = T::c(3.0);
        (two * s3 - three * s2 + T::one()) * y[i]
            + (s3 - two * s2 + s) * h * dy[i]
            + (-two * s3 + three * s2) * y[i + 1]
            + (s3 - s2) * h * dy[i + 1]
    }

    fn hermite_deriv(&self, t: T, y: &[T], dy: &[T]) -> T {
        let i = self.segment_of(t);
        let h = self.ts[i + 1] - self.ts[i];
        let s = (t - self.ts[i]) / h;
        let s2 = s * s;
        let three = T::c(3.0);
        let four = T::c(4.0);
        let six = T::c(6.0);
        ((six * s2 - six * s) * y[i]
            + (three * s2 - four * s + T::one()) * h * dy[i]
            + (six * s - six * s2) * y[i + 1]
            + (three * s2 - T::c(2.0) * s) * h * dy[i + 1])
            / h
    }

    /// Value of `u` at `t` (clamped to the span).
    pub fn u_at(&self, t: T) -> T {
        let (a, b) = self.span();
        if t <= a {
            return self.us[0];
        }
        if t >= b {
            return *self.us.last().unwrap();
        }
        self.hermite(t, &self.us, &self.ps)
    }

    /// First derivative at `t`, from the Hermite piece of `p` with slopes `m`.
    pub fn p_at(&self, t: T) -> T {
        let (a, b) = self.span();
        if t <= a {
            return self.ps[0];
        }
        if t >= b {
            return *self.ps.last().unwrap();
        }
        self.hermite(t, &self.ps, &self.ms)
    }

    /// Second derivative at `t`, reconstructed from the interpolant of `p`.
    pub fn m_at(&self, t: T) -> T {
        let (a, b) = self.span();
        if t <= a {
            return self.ms[0];
        }
        if t >= b {
            return *self.ms.last().unwrap();
        }
        self.hermite_deriv(t, &self.ps, &self.ms)
    }

    /// Supremum of `|u|` over nodes and dense subsamples.
    pub fn sup_abs_u(&self) -> T {
        let mut sup = T::zero();
        let sub = T::c(0.25);
        for i in 0..self.ts.len() - 1 {
            sup = sup.max(self.us[i].abs());
            let h = self.ts[i + 1] - self.ts[i];
            for k in 1..4 {
                let t = self.ts[i] + h * sub * T::from_usize(k).unwrap();
                sup = sup.max(self.u_at(t).abs());
            }
        }
        sup.max(self.us.last().unwrap().abs())
    }

    pub fn sup_abs_p(&self) -> T {
        self.ps.iter().fold(T::zero(), |acc, p| acc.max(p.abs()))
    }

    /// Scales the solution by `s` in place; under positive 1-homogeneity a
    /// scaled solution still solves the scaled equation.
    pub fn scale(&mut self, s: T) {
        for v in self.us.iter_mut().chain(self.ps.iter_mut()).chain(self.ms.iter_mut()) {
            *v = *v * s;
        }
    }

    /// Appends another trajectory that starts where this one ends. The
    /// shared abscissa keeps this trajectory's sample.
    pub fn extend_with(&mut self, other: &Trajectory<T>) {
        let (end, _, _) = (self.span().1, 0, 0);
        let gap = (other.ts[0] - end).abs();
        assert!(
            gap <= T::c(1e-9) * (T::one() + end.abs()),
            "trajectories do not share an endpoint"
        );
        for i in 1..other.ts.len() {
            self.ts.push(other.ts[i]);
            self.us.push(other.us[i]);
            self.ps.push(other.ps[i]);
            self.ms.push(other.ms[i]);
        }
        self.meta.steps += other.meta.steps;
        self.meta.rejected += other.meta.rejected;
        self.meta.rhs_evals += other.meta.rhs_evals;
    }

    /// CSV export with columns `t,u,u_prime,u_second` (or an `r` abscissa
    /// label for radial data).
    pub fn write_csv(&self, out: &mut impl std::io::Write, abscissa: &str) -> std::io::Result<()> {
        writeln!(out, "{abscissa},u,u_prime,u_second")?;
        for i in 0..self.ts.len() {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                self.ts[i], self.us[i], self.ps[i], self.ms[i]
            )?;
        }
        Ok(())
    }
}

/// Right-hand sides `(u, p)' = (p, G(...))` used by the integrator.
pub(crate) trait SecondOrderRhs<T: Real> {
    fn accel(&self, t: T, u: T, p: T) -> Result<T>;
}

/// `u'' = G(u', u, q(t) + kappa*u, t)`, with the curvature slot `u'/t` when
/// the operator lives in dimension two or more.
pub(crate) struct ShiftedRhs<'a, T, Q> {
    pub spec: &'a OperatorSpec<T>,
    pub q: Q,
    pub kappa: T,
}

impl<T: Real, Q: Fn(T) -> T> SecondOrderRhs<T> for ShiftedRhs<'_, T, Q> {
    fn accel(&self, t: T, u: T, p: T) -> Result<T> {
        let ell = if self.spec.dim >= 2 { p / t } else { T::zero() };
        self.spec.invert_m(ell, p, u, (self.q)(t) + self.kappa * u, t)
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

pub(crate) fn integrate_rhs<T: Real>(
    rhs: &impl SecondOrderRhs<T>,
    t0: T,
    t1: T,
    u0: T,
    p0: T,
    cfg: &IvpConfig<T>,
) -> Result<Trajectory<T>> {
    assert!(t1 > t0, "integration interval must be increasing");
    cfg.validate()?;
    let span = t1 - t0;
    let h_max = cfg.max_step * span;
    let a: Vec<Vec<T>> = A.iter().map(|row| row.iter().map(|&x| T::c(x)).collect()).collect();
    let c: Vec<T> = C.iter().map(|&x| T::c(x)).collect();
    let e: Vec<T> = E.iter().map(|&x| T::c(x)).collect();

    let mut stats = StepStats::default();
    let mut t = t0;
    let mut u = u0;
    let mut p = p0;
    let mut m = rhs.accel(t, u, p)?;
    stats.rhs_evals += 1;

    let mut ts = vec![t];
    let mut us = vec![u];
    let mut ps = vec![p];
    let mut ms = vec![m];

    let mut h = h_max;
    let order_exp = T::c(-0.2);
    let safety = T::c(0.9);

    loop {
        let min_h = T::epsilon() * T::c(16.0) * (T::one() + t.abs());
        let remaining = t1 - t;
        if remaining <= min_h {
            break;
        }
        if t + h > t1 {
            h = remaining;
        }
        if h < min_h {
            return Err(Error::StepSizeUnderflow { at: t.to_f64_lossy() });
        }

        // Stage derivatives for (u, p); k[i] = (p_i, m_i).
        let mut ku = [T::zero(); 7];
        let mut kp = [T::zero(); 7];
        ku[0] = p;
        kp[0] = m;
        let mut failed = false;
        for i in 0..6 {
            let mut du = T::zero();
            let mut dp = T::zero();
            for j in 0..=i {
                du = du + a[i][j] * ku[j];
                dp = dp + a[i][j] * kp[j];
            }
            let ti = t + c[i] * h;
            let ui = u + h * du;
            let pi = p + h * dp;
            match rhs.accel(ti, ui, pi) {
                Ok(mi) => {
                    ku[i + 1] = pi;
                    kp[i + 1] = mi;
                }
                Err(_) => {
                    failed = true;
                    break;
                }
            }
            stats.rhs_evals += 1;
        }
        if failed {
            // Retry on a shorter step; a stage left the finite domain.
            stats.rejected += 1;
            h = h * T::c(0.25);
            continue;
        }

        // 5th-order solution is stage 6 (FSAL layout: last A row = b).
        let u_new = {
            let mut du = T::zero();
            for j in 0..6 {
                du = du + a[5][j] * ku[j];
            }
            u + h * du
        };
        let p_new = {
            let mut dp = T::zero();
            for j in 0..6 {
                dp = dp + a[5][j] * kp[j];
            }
            p + h * dp
        };

        let mut err_u = T::zero();
        let mut err_p = T::zero();
        for j in 0..7 {
            err_u = err_u + e[j] * ku[j];
            err_p = err_p + e[j] * kp[j];
        }
        err_u = err_u * h;
        err_p = err_p * h;
        let tol_u = cfg.abs_tol + cfg.rel_tol * u.abs().max(u_new.abs());
        let tol_p = cfg.abs_tol + cfg.rel_tol * p.abs().max(p_new.abs());
        let err_norm = (err_u / tol_u).abs().max((err_p / tol_p).abs());

        if err_norm <= T::one() {
            t = t + h;
            u = u_new;
            p = p_new;
            m = rhs.accel(t, u, p)?;
            stats.rhs_evals += 1;
            stats.steps += 1;
            ts.push(t);
            us.push(u);
            ps.push(p);
            ms.push(m);
        } else {
            stats.rejected += 1;
        }

        let scale = if err_norm > T::zero() {
            (safety * err_norm.powf(order_exp)).max(T::c(0.2)).min(T::c(5.0))
        } else {
            T::c(5.0)
        };
        h = (h * scale).min(h_max);
    }

    // The loop may stop within machine epsilon of the requested end; snap
    // the terminal node there.
    if let Some(last) = ts.last_mut() {
        *last = t1;
    }

    let mut traj = Trajectory::from_samples(ts, us, ps, ms);
    traj.event_tol = cfg.event_tol;
    traj.meta = stats;
    Ok(traj)
}

/// Integrates `u'' = G(u', u, q(t) + kappa*u, t)` from `(u0, p0)` on
/// `[t0, t1]`. Global existence holds because G grows at most linearly.
///
/// For operators in dimension two and higher the curvature slot is `u'/t`,
/// so `t0 > 0` is required there; start at the origin through the radial
/// module's Taylor step instead.
pub fn integrate<T: Real>(
    spec: &OperatorSpec<T>,
    q: impl Fn(T) -> T,
    kappa: T,
    t0: T,
    t1: T,
    u0: T,
    p0: T,
    cfg: &IvpConfig<T>,
) -> Result<Trajectory<T>> {
    spec.validate()?;
    if spec.dim >= 2 && t0 <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "t0",
            reason: "radial integration must start at a positive radius".into(),
        });
    }
    let rhs = ShiftedRhs { spec, q, kappa };
    integrate_rhs(&rhs, t0, t1, u0, p0, cfg)
}

/// Convenience wrapper for a sampled right-hand side.
pub fn integrate_sampled<T: Real>(
    spec: &OperatorSpec<T>,
    q: &crate::sampled::SampledFn<T>,
    kappa: T,
    t0: T,
    t1: T,
    u0: T,
    p0: T,
    cfg: &IvpConfig<T>,
) -> Result<Trajectory<T>> {
    integrate(spec, |t| q.eval(t), kappa, t0, t1, u0, p0, cfg)
}

/// Smallest `t > from` where `u` crosses zero with a sign change, refined
/// on the dense output by bisection to the trajectory's event tolerance
/// followed by one secant polish. Touching zero without a sign change does
/// not count.
pub fn first_zero<T: Real>(traj: &Trajectory<T>, from: T) -> Option<T> {
    crossings(traj, from, true).into_iter().next()
}

/// All sign-changing zeros with `t > from`.
pub fn zeros<T: Real>(traj: &Trajectory<T>, from: T) -> Vec<T> {
    crossings(traj, from, false)
}

fn crossings<T: Real>(traj: &Trajectory<T>, from: T, first_only: bool) -> Vec<T> {
    const SUBSAMPLES: usize = 8;
    let (_, t_end) = traj.span();
    let mut found = Vec::new();
    let mut prev_t: Option<T> = None;
    let mut prev_sign = T::zero();

    let ts = traj.nodes();
    for i in 0..ts.len() - 1 {
        if ts[i + 1] <= from {
            continue;
        }
        let h = ts[i + 1] - ts[i];
        for k in 0..=SUBSAMPLES {
            let t = if k == SUBSAMPLES {
                ts[i + 1]
            } else {
                ts[i] + h * T::from_usize(k).unwrap() / T::from_usize(SUBSAMPLES).unwrap()
            };
            if t <= from {
                continue;
            }
            let ut = if k == 0 {
                traj.values()[i]
            } else if k == SUBSAMPLES {
                traj.values()[i + 1]
            } else {
                traj.u_at(t)
            };
            let sign = if ut > T::zero() {
                T::one()
            } else if ut < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
            if sign != T::zero() {
                if prev_sign != T::zero() && sign != prev_sign {
                    let lo = prev_t.unwrap();
                    let z = refine_crossing(traj, lo, t);
                    if z > from {
                        found.push(z);
                        if first_only {
                            return found;
                        }
                    }
                }
                prev_sign = sign;
                prev_t = Some(t);
            } else if t >= t_end && prev_sign != T::zero() {
                // An exact zero at the right endpoint counts as a crossing
                // when the solution was nonzero just before.
                found.push(t);
                if first_only {
                    return found;
                }
            }
        }
    }
    found
}

fn refine_crossing<T: Real>(traj: &Trajectory<T>, mut lo: T, mut hi: T) -> T {
    let mut f_lo = traj.u_at(lo);
    let mut f_hi = traj.u_at(hi);
    debug_assert!(f_lo * f_hi <= T::zero());
    let tol = traj.event_tol;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) * T::c(0.5);
        let f_mid = traj.u_at(mid);
        if f_mid == T::zero() {
            return mid;
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // One secant polish on the final bracket.
    if f_hi != f_lo {
        let z = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if z >= lo && z <= hi {
            return z;
        }
    }
    lo + (hi - lo) * T::c(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{LinearCoeffs, OperatorSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn line_op() -> OperatorSpec<f64> {
        // F = m on the line.
        OperatorSpec::linear(LinearCoeffs::constant(1.0, 0.0, 0.0), 1)
    }

    #[test]
    fn straight_line_solution() {
        let cfg = IvpConfig { max_step: 0.05, ..IvpConfig::default() };
        let traj = integrate(&line_op(), |_| 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, &cfg).unwrap();
        for &t in &[0.25, 0.5, 0.9] {
            assert_relative_eq!(traj.u_at(t), t, epsilon = 1e-10);
            assert_relative_eq!(traj.p_at(t), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cosh_closed_form() {
        // u'' = u - 1 with u(0) = u'(0) = 0 has u = 1 - cosh(t).
        let traj =
            integrate(&line_op(), |_| -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, &IvpConfig::default()).unwrap();
        assert_relative_eq!(traj.u_at(1.0), 1.0 - 1f64.cosh(), epsilon = 1e-10);
        assert_relative_eq!(traj.u_at(0.5), 1.0 - 0.5f64.cosh(), epsilon = 1e-10);
    }

    #[test]
    fn pucci_sine_solution() {
        // M+(u'') = -pi^2 u with u0 = 0, p0 = 1 stays concave-positive, so
        // M+ acts as lam*u'' and u = sin(pi t)/pi.
        let spec = OperatorSpec::pucci_plus(1.0, 2.0);
        let traj =
            integrate(&spec, |_| 0.0, -PI * PI, 0.0, 1.0, 0.0, 1.0, &IvpConfig::default()).unwrap();
        for &t in &[0.2, 0.5, 0.8, 1.0] {
            assert_relative_eq!(traj.u_at(t), (PI * t).sin() / PI, epsilon = 1e-8);
        }
    }

    #[test]
    fn residual_at_random_interior_points() {
        let spec = OperatorSpec::pucci_plus(1.0, 2.0);
        let cfg = IvpConfig::default();
        let kappa = -PI * PI;
        let traj = integrate(&spec, |_| 0.0, kappa, 0.0, 1.0, 0.0, 1.0, &cfg).unwrap();
        let scale = 1.0 + traj.sup_abs_u() * kappa.abs();
        use crate::operator::EvalPoint;
        for k in 1..64 {
            let t = k as f64 / 64.0;
            let pt = EvalPoint::line(traj.m_at(t), traj.p_at(t), traj.u_at(t), t);
            let res = spec.evaluate(&pt).unwrap() - kappa * traj.u_at(t);
            assert!(
                res.abs() <= 100.0 * cfg.rel_tol * scale,
                "residual {res:.3e} too large at t = {t}"
            );
        }
    }

    #[test]
    fn homogeneity_transport() {
        let spec = OperatorSpec::pucci_plus(1.0, 2.0).with_gamma(0.2);
        let cfg = IvpConfig::default();
        let base = integrate(&spec, |_| -1.0, 1.0, 0.0, 1.0, 0.3, 0.7, &cfg).unwrap();
        let s = 2.5;
        let scaled = integrate(&spec, |_| -s, 1.0, 0.0, 1.0, s * 0.3, s * 0.7, &cfg).unwrap();
        for &t in &[0.3, 0.6, 1.0] {
            assert_relative_eq!(scaled.u_at(t), s * base.u_at(t), epsilon = 1e-9);
        }
    }

    #[test]
    fn reversal_consistency_under_flip() {
        let spec = OperatorSpec::pucci_plus(1.0, 2.0).with_gamma(0.1).with_delta(0.2);
        let cfg = IvpConfig::default();
        let fwd = integrate(&spec, |_| -1.0, 1.5, 0.0, 1.0, 0.2, -0.4, &cfg).unwrap();
        let rev =
            integrate(&spec.flip(), |_| 1.0, 1.5, 0.0, 1.0, -0.2, 0.4, &cfg).unwrap();
        for &t in &[0.25, 0.5, 1.0] {
            assert_relative_eq!(rev.u_at(t), -fwd.u_at(t), epsilon = 1e-9);
        }
    }

    #[test]
    fn first_zero_of_sampled_sine() {
        // u(t) = sin(pi t) on (0, 1.5], sampled finely enough that the
        // Hermite interpolant locates the zero to 1e-12.
        let n = 3000;
        let ts: Vec<f64> = (0..=n).map(|i| 1.5 * i as f64 / n as f64).collect();
        let us: Vec<f64> = ts.iter().map(|&t| (PI * t).sin()).collect();
        let ps: Vec<f64> = ts.iter().map(|&t| PI * (PI * t).cos()).collect();
        let ms: Vec<f64> = ts.iter().map(|&t| -PI * PI * (PI * t).sin()).collect();
        let traj = Trajectory::from_samples(ts, us, ps, ms);
        let z = first_zero(&traj, 0.1).unwrap();
        assert!((z - 1.0).abs() <= 1e-12, "z = {z:.15}");
    }

    #[test]
    fn no_crossing_on_monotone_data() {
        let ts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let us = ts.clone();
        let ps = vec![1.0; ts.len()];
        let ms = vec![0.0; ts.len()];
        let traj = Trajectory::from_samples(ts, us, ps, ms);
        assert_eq!(first_zero(&traj, 0.0), None);
    }

    #[test]
    fn first_zero_of_fast_sine() {
        let n = 4000;
        let ts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let us: Vec<f64> = ts.iter().map(|&t| (3.0 * PI * t).sin()).collect();
        let ps: Vec<f64> = ts.iter().map(|&t| 3.0 * PI * (3.0 * PI * t).cos()).collect();
        let ms: Vec<f64> = ts.iter().map(|&t| -(3.0 * PI).powi(2) * (3.0 * PI * t).sin()).collect();
        let traj = Trajectory::from_samples(ts, us, ps, ms);
        let z = first_zero(&traj, 0.01).unwrap();
        assert!((z - 1.0 / 3.0).abs() <= 1e-12, "z = {z:.15}");
        assert_eq!(zeros(&traj, 0.01).len(), 2);
    }

    #[test]
    fn single_precision_instantiation() {
        // The whole pipeline is generic; f32 works at loose tolerances.
        let spec: OperatorSpec<f32> = OperatorSpec::pucci_plus(1.0, 2.0);
        let cfg = IvpConfig { rel_tol: 1e-6_f32, abs_tol: 1e-7, max_step: 1e-2, event_tol: 1e-6 };
        let traj = integrate(&spec, |_| 0.0_f32, 1.0, 0.0, 1.0, 0.0, 0.0, &cfg).unwrap();
        assert!(traj.sup_abs_u() <= 1e-5);
        let q = spec.evaluate(&crate::operator::EvalPoint::line(-2.0_f32, 0.5, 1.0, 0.0)).unwrap();
        let m = spec.invert_m(0.0, 0.5, 1.0, q, 0.0).unwrap();
        assert!((m + 2.0).abs() < 1e-5);
    }

    #[test]
    fn csv_export_schema() {
        let traj = Trajectory::from_samples(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.25, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![2.0, 2.0, 2.0],
        );
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, "t").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,u,u_prime,u_second\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
