//! Test-side oracles, independent of the shooting/integration pipeline:
//! finite-difference boundary value solvers (nonlinear Newton over the
//! difference stencil with a tridiagonal Jacobian) and a finite-difference
//! radial eigensolver (inverse power iteration).

use fneig::operator::{EvalPoint, OperatorSpec};
use fneig::sampled::SampledFn;

/// Thomas algorithm for a tridiagonal system (sub, diag, sup).
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Finite-difference solution of `F(u'',u',u,t) - kappa*u = f` with
/// `u(a) = u(b) = 0` on a uniform grid, by damped Newton over the central
/// difference stencil. Returns the grid and interior-inclusive values.
pub fn fd_dirichlet_interval(
    spec: &OperatorSpec<f64>,
    f: &SampledFn<f64>,
    interval: (f64, f64),
    kappa: f64,
    points: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = interval;
    let m = points;
    let h = (b - a) / m as f64;
    let ts: Vec<f64> = (0..=m).map(|i| a + i as f64 * h).collect();

    // Start from the solution of a linear surrogate so the Newton
    // iteration begins on a coherent branch of the piecewise-linear
    // operator instead of exactly on its kink.
    let a_mid = 0.5 * (spec.lambda_min + spec.lambda_max);
    let mut u = vec![0.0; m + 1];
    {
        let sub = vec![a_mid / (h * h); m - 1];
        let sup = vec![a_mid / (h * h); m - 1];
        let diag = vec![-2.0 * a_mid / (h * h) - kappa; m - 1];
        let rhs: Vec<f64> = (1..m).map(|i| f.eval(ts[i])).collect();
        let interior = thomas(&sub, &diag, &sup, &rhs);
        u[1..m].copy_from_slice(&interior);
    }

    let residual = |u: &[f64], i: usize| -> f64 {
        let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let up = (u[i + 1] - u[i - 1]) / (2.0 * h);
        let pt = EvalPoint::line(upp, up, u[i], ts[i]);
        spec.evaluate(&pt).unwrap() - kappa * u[i] - f.eval(ts[i])
    };

    // Semismooth Newton. The Jacobian differentiates F in its own slots
    // (one-sided, a valid generalized derivative at the kinks) and chains
    // through the stencil weights; differencing in u directly would move m
    // by delta/h^2 and hop across branches.
    for _ in 0..200 {
        let mut res = vec![0.0; m - 1];
        let mut sub = vec![0.0; m - 1];
        let mut diag = vec![0.0; m - 1];
        let mut sup = vec![0.0; m - 1];
        let mut norm: f64 = 0.0;
        for i in 1..m {
            let r0 = residual(&u, i);
            res[i - 1] = r0;
            norm = norm.max(r0.abs());
            let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let up = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let base = EvalPoint::line(upp, up, u[i], ts[i]);
            let f0 = spec.evaluate(&base).unwrap();
            let dm = 1e-6 * (1.0 + upp.abs());
            let dfdm = (spec
                .evaluate(&EvalPoint::line(upp + dm, up, u[i], ts[i]))
                .unwrap()
                - f0)
                / dm;
            let dp = 1e-6 * (1.0 + up.abs());
            let dfdp = (spec
                .evaluate(&EvalPoint::line(upp, up + dp, u[i], ts[i]))
                .unwrap()
                - f0)
                / dp;
            let du = 1e-6 * (1.0 + u[i].abs());
            let dfdu = (spec
                .evaluate(&EvalPoint::line(upp, up, u[i] + du, ts[i]))
                .unwrap()
                - f0)
                / du;
            sub[i - 1] = dfdm / (h * h) - dfdp / (2.0 * h);
            diag[i - 1] = -2.0 * dfdm / (h * h) + dfdu - kappa;
            sup[i - 1] = dfdm / (h * h) + dfdp / (2.0 * h);
        }
        if norm <= 1e-12 {
            break;
        }
        let step = thomas(&sub, &diag, &sup, &res.iter().map(|r| -r).collect::<Vec<_>>());
        // Damped update.
        let mut factor = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = u.clone();
            for i in 1..m {
                cand[i] = u[i] + factor * step[i - 1];
            }
            let new_norm =
                (1..m).map(|i| residual(&cand, i).abs()).fold(0.0f64, f64::max);
            if new_norm < norm {
                u = cand;
                accepted = true;
                break;
            }
            factor *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (ts, u)
}

/// Finite-difference solution of the radial problem
/// `F(u'', u'/r, u', u, r) - kappa*u = f` with `u'(0) = u(R) = 0`.
pub fn fd_dirichlet_ball(
    spec: &OperatorSpec<f64>,
    f: &SampledFn<f64>,
    radius: f64,
    kappa: f64,
    points: usize,
) -> (Vec<f64>, Vec<f64>) {
    let m = points;
    let h = radius / m as f64;
    let rs: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let nm1 = (spec.dim - 1) as f64;

    // Linear surrogate start, as in the interval oracle.
    let a_mid = 0.5 * (spec.lambda_min + spec.lambda_max);
    let mut u = vec![0.0; m + 1];
    {
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        diag[0] = -2.0 * a_mid * spec.dim as f64 / (h * h) - kappa;
        sup[0] = 2.0 * a_mid * spec.dim as f64 / (h * h);
        rhs[0] = f.eval(0.0);
        for i in 1..m {
            let r = rs[i];
            sub[i] = a_mid * (1.0 / (h * h) - nm1 / (2.0 * h * r));
            diag[i] = -2.0 * a_mid / (h * h) - kappa;
            sup[i] = a_mid * (1.0 / (h * h) + nm1 / (2.0 * h * r));
            rhs[i] = f.eval(r);
        }
        let interior = thomas(&sub, &diag, &sup, &rhs);
        u[..m].copy_from_slice(&interior);
    }

    // Unknowns u_0 .. u_{m-1}; u_m = 0. Row 0 encodes the origin: all
    // curvatures equal, u''(0) = 2(u_1 - u_0)/h^2 under u'(0) = 0.
    let residual = |u: &[f64], i: usize| -> f64 {
        if i == 0 {
            let ell0 = 2.0 * (u[1] - u[0]) / (h * h);
            let pt = EvalPoint { m: ell0, ell: ell0, p: 0.0, u: u[0], r: 0.0 };
            spec.evaluate(&pt).unwrap() - kappa * u[0] - f.eval(0.0)
        } else {
            let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let up = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let pt = EvalPoint { m: upp, ell: up / rs[i], p: up, u: u[i], r: rs[i] };
            spec.evaluate(&pt).unwrap() - kappa * u[i] - f.eval(rs[i])
        }
    };

    for _ in 0..200 {
        let mut res = vec![0.0; m];
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut norm: f64 = 0.0;
        for i in 0..m {
            let r0 = residual(&u, i);
            res[i] = r0;
            norm = norm.max(r0.abs());
            if i == 0 {
                let ell0 = 2.0 * (u[1] - u[0]) / (h * h);
                let base = EvalPoint { m: ell0, ell: ell0, p: 0.0, u: u[0], r: 0.0 };
                let f0 = spec.evaluate(&base).unwrap();
                let dl = 1e-6 * (1.0 + ell0.abs());
                let dfdll = (spec
                    .evaluate(&EvalPoint { m: ell0 + dl, ell: ell0 + dl, ..base })
                    .unwrap()
                    - f0)
                    / dl;
                let du0 = 1e-6 * (1.0 + u[0].abs());
                let dfdu = (spec.evaluate(&EvalPoint { u: u[0] + du0, ..base }).unwrap() - f0)
                    / du0;
                diag[0] = dfdll * (-2.0 / (h * h)) + dfdu - kappa;
                sup[0] = dfdll * (2.0 / (h * h));
            } else {
                let upp = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
                let up = (u[i + 1] - u[i - 1]) / (2.0 * h);
                let r = rs[i];
                let base = EvalPoint { m: upp, ell: up / r, p: up, u: u[i], r };
                let f0 = spec.evaluate(&base).unwrap();
                let dm = 1e-6 * (1.0 + upp.abs());
                let dfdm =
                    (spec.evaluate(&EvalPoint { m: upp + dm, ..base }).unwrap() - f0) / dm;
                let dp = 1e-6 * (1.0 + up.abs());
                let dfdp = (spec
                    .evaluate(&EvalPoint { ell: (up + dp) / r, p: up + dp, ..base })
                    .unwrap()
                    - f0)
                    / dp;
                let du = 1e-6 * (1.0 + u[i].abs());
                let dfdu =
                    (spec.evaluate(&EvalPoint { u: u[i] + du, ..base }).unwrap() - f0) / du;
                sub[i] = dfdm / (h * h) - dfdp / (2.0 * h);
                diag[i] = -2.0 * dfdm / (h * h) + dfdu - kappa;
                sup[i] = dfdm / (h * h) + dfdp / (2.0 * h);
            }
        }
        if norm <= 1e-12 {
            break;
        }
        let step = thomas(&sub, &diag, &sup, &res.iter().map(|r| -r).collect::<Vec<_>>());
        let mut factor = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = u.clone();
            for i in 0..m {
                cand[i] = u[i] + factor * step[i];
            }
            let new_norm = (0..m).map(|i| residual(&cand, i).abs()).fold(0.0f64, f64::max);
            if new_norm < norm {
                u = cand;
                accepted = true;
                break;
            }
            factor *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (rs, u)
}

/// Smallest eigenvalue of `-(u'' + (dim-1) u'/r)` with `u'(0) = 0`,
/// `u(R) = 0`, by inverse power iteration on the difference matrix.
fn fd_radial_eigen_once(dim: usize, radius: f64, m: usize) -> f64 {
    let h = radius / m as f64;
    let nm1 = (dim - 1) as f64;
    // Unknowns u_0 .. u_{m-1}; matrix A u = -(u'' + (N-1) u'/r) u.
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    diag[0] = 2.0 * dim as f64 / (h * h);
    sup[0] = -2.0 * dim as f64 / (h * h);
    for i in 1..m {
        let r = i as f64 * h;
        sub[i] = -(1.0 / (h * h) - nm1 / (2.0 * h * r));
        diag[i] = 2.0 / (h * h);
        sup[i] = -(1.0 / (h * h) + nm1 / (2.0 * h * r));
    }
    let mut v = vec![1.0; m];
    let mut lambda = 0.0;
    for _ in 0..400 {
        let w = thomas(&sub, &diag, &sup, &v);
        let norm = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let lambda_new = 1.0 / norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (lambda_new - lambda).abs() <= 1e-13 * lambda_new {
            return lambda_new;
        }
        lambda = lambda_new;
    }
    lambda
}

/// Richardson-refined finite-difference radial eigenvalue.
pub fn fd_radial_eigen(dim: usize, radius: f64, points: usize) -> f64 {
    let coarse = fd_radial_eigen_once(dim, radius, points / 2);
    let fine = fd_radial_eigen_once(dim, radius, points);
    (4.0 * fine - coarse) / 3.0
}
