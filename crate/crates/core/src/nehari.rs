//! Sign-changing eigenpairs through interior nodes: the node map V on the
//! ordered simplex, its zero, and the C1 gluing of one-signed pieces.
//!
//! For nodes `a < t_1 < ... < t_n < b` and a first-piece sign, component
//! `i` of the node map is the semi-eigenvalue of the piece left of `t_i`
//! minus the one right of `t_i`, each taken with that piece's sign. A zero
//! of V means all pieces share one eigenvalue, and scaling the pieces to
//! match derivatives at the nodes glues them into an eigenfunction with
//! exactly `n` interior zeros.
//!
//! V blows up toward the simplex boundary (the semi-eigenvalue of a
//! collapsing piece diverges), which guarantees a zero inside; here that
//! solution is found by damped Newton iterations with a finite-difference
//! Jacobian, projected into a slightly shrunken simplex, with a cyclic
//! per-node bisection fallback. Component `i` decreases in `t_i` (moving a
//! node right grows the left piece and shrinks the right one), which makes
//! the per-node bisection well posed.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ivp::{IvpConfig, Trajectory};
use crate::operator::OperatorSpec;
use crate::real::Real;
use crate::semi_eigen::{semi_eigenvalue, SemiEigenResult, Sign};

/// Ordered interior nodes inside an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVector<T> {
    nodes: Vec<T>,
    endpoints: (T, T),
}

impl<T: Real> NodeVector<T> {
    /// Minimum admissible gap between consecutive nodes, relative to the
    /// interval length.
    pub const MIN_GAP: f64 = 1e-8;

    pub fn new(nodes: Vec<T>, endpoints: (T, T)) -> Result<Self> {
        let (a, b) = endpoints;
        if !(a < b) {
            return Err(Error::InvalidParameter { name: "endpoints", reason: "needs a < b".into() });
        }
        let gap = T::c(Self::MIN_GAP) * (b - a);
        let mut prev = a;
        for &t in &nodes {
            if !(t - prev > gap) {
                return Err(Error::InvalidParameter {
                    name: "nodes",
                    reason: format!("nodes must increase with gaps above {:e}", gap),
                });
            }
            prev = t;
        }
        if !nodes.is_empty() && !(b - prev > gap) {
            return Err(Error::InvalidParameter {
                name: "nodes",
                reason: "last node too close to the right endpoint".into(),
            });
        }
        Ok(Self { nodes, endpoints })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn endpoints(&self) -> (T, T) {
        self.endpoints
    }

    /// Sub-interval `i` for `i = 0 ..= n`.
    pub fn piece(&self, i: usize) -> (T, T) {
        let lo = if i == 0 { self.endpoints.0 } else { self.nodes[i - 1] };
        let hi = if i == self.nodes.len() { self.endpoints.1 } else { self.nodes[i] };
        (lo, hi)
    }
}

/// Source of semi-eigenvalues over sub-intervals; the interval machinery
/// and the radial machinery (with its origin-aware first piece) both
/// implement this, so the node solver is shared.
pub trait SemiEigenSolve<T: Real> {
    fn solve(&self, lo: T, hi: T, sign: Sign) -> Result<SemiEigenResult<T>>;

    /// Ellipticity pair used for the initial node guess.
    fn ellipticity(&self) -> (T, T);
}

/// Interval solver backed by lambda shooting.
pub struct LineSolver<'a, T> {
    pub spec: &'a OperatorSpec<T>,
    pub cfg: IvpConfig<T>,
}

impl<T: Real> SemiEigenSolve<T> for LineSolver<'_, T> {
    fn solve(&self, lo: T, hi: T, sign: Sign) -> Result<SemiEigenResult<T>> {
        semi_eigenvalue(self.spec, lo, hi, sign, &self.cfg)
    }

    fn ellipticity(&self) -> (T, T) {
        (self.spec.lambda_min, self.spec.lambda_max)
    }
}

/// Cache of piece eigenvalues keyed by endpoints rounded to 1e-12; V is
/// expensive (two semi-eigenvalue solves per component), and Newton
/// re-evaluates mostly unchanged pieces.
struct LambdaCache<T> {
    map: HashMap<(i64, i64, Sign), T>,
}

const CACHE_QUANTUM: f64 = 1e12;

impl<T: Real> LambdaCache<T> {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn key(x: T) -> i64 {
        (x.to_f64_lossy() * CACHE_QUANTUM).round() as i64
    }

    fn lambda(
        &mut self,
        solver: &impl SemiEigenSolve<T>,
        lo: T,
        hi: T,
        sign: Sign,
    ) -> Result<T> {
        let key = (Self::key(lo), Self::key(hi), sign);
        if let Some(&v) = self.map.get(&key) {
            return Ok(v);
        }
        let v = solver.solve(lo, hi, sign)?.lambda;
        self.map.insert(key, v);
        Ok(v)
    }
}

fn v_components<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    cache: &mut LambdaCache<T>,
    nodes: &[T],
    endpoints: (T, T),
    sign: Sign,
) -> Result<(Vec<T>, T)> {
    let n = nodes.len();
    let (a, b) = endpoints;
    let at = |i: usize| -> T {
        if i == 0 {
            a
        } else if i == n + 1 {
            b
        } else {
            nodes[i - 1]
        }
    };
    let mut lambdas = Vec::with_capacity(n + 1);
    for i in 0..=n {
        lambdas.push(cache.lambda(solver, at(i), at(i + 1), sign.piece(i))?);
    }
    let scale = lambdas.iter().fold(T::zero(), |acc, l| acc.max(l.abs()));
    let v = (0..n).map(|i| lambdas[i] - lambdas[i + 1]).collect();
    Ok((v, scale))
}

/// The node map. For `sign = Minus` this is the map whose zero glues an
/// eigenfunction starting negative; `sign = Plus` is the index-shifted
/// variant starting positive.
pub fn v_map<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    nodes: &NodeVector<T>,
    sign: Sign,
) -> Result<Vec<T>> {
    let mut cache = LambdaCache::new();
    v_components(solver, &mut cache, nodes.nodes(), nodes.endpoints(), sign).map(|(v, _)| v)
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Dense Gaussian elimination with partial pivoting; the systems here are
/// tiny (n x n for n interior nodes).
fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Result<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot][col].abs() < T::c(1e-300) {
            return Err(Error::Solver("singular Newton system".into()));
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            let r = rhs[col];
            rhs[row] = rhs[row] - factor * r;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Clamps a candidate node vector into the shrunken simplex with the given
/// minimum gap.
fn project_into_simplex<T: Real>(nodes: &mut [T], endpoints: (T, T), gap: T) {
    let (a, b) = endpoints;
    let n = nodes.len();
    let mut prev = a;
    for (i, t) in nodes.iter_mut().enumerate() {
        let remaining = T::from_usize(n - i).unwrap();
        let hi = b - gap * remaining;
        *t = t.max(prev + gap).min(hi);
        prev = *t;
    }
}

/// Initial guess: piece lengths proportional to the square root of the
/// ellipticity constant that drives each piece (exact for Pucci operators,
/// equispaced in the linear case).
fn initial_nodes<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    n: usize,
    sign: Sign,
    endpoints: (T, T),
) -> Vec<T> {
    let (lam, lam_up) = solver.ellipticity();
    let weight = |i: usize| match sign.piece(i) {
        Sign::Plus => lam.sqrt(),
        Sign::Minus => lam_up.sqrt(),
    };
    let total: T = (0..=n).fold(T::zero(), |acc, i| acc + weight(i));
    let (a, b) = endpoints;
    let span = b - a;
    let mut nodes = Vec::with_capacity(n);
    let mut acc = T::zero();
    for i in 0..n {
        acc = acc + weight(i);
        nodes.push(a + span * acc / total);
    }
    nodes
}

const NEWTON_MAX_ITER: usize = 60;
const DAMPING_HALVINGS: usize = 20;
const FALLBACK_SWEEPS: usize = 40;

/// Residual tolerance for `||V||`: a notch tighter than the contract so
/// piece eigenvalues agree to 1e-7 relative after assembly.
fn v_tolerance<T: Real>(scale: T) -> T {
    T::c(1e-8) * (T::one() + scale)
}

/// Finds the node vector where all adjacent piece semi-eigenvalues agree.
pub fn solve_nodes<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    n: usize,
    sign: Sign,
    interval: (T, T),
) -> Result<NodeVector<T>> {
    let start = initial_nodes(solver, n, sign, interval);
    solve_nodes_from(solver, sign, interval, start)
}

/// As [`solve_nodes`], from an explicit starting vector. The zero found
/// from different starts must coincide (uniqueness of the eigenpairs),
/// which the tests exercise rather than assume.
pub fn solve_nodes_from<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    sign: Sign,
    interval: (T, T),
    start: Vec<T>,
) -> Result<NodeVector<T>> {
    let n = start.len();
    if n == 0 {
        return NodeVector::new(Vec::new(), interval);
    }
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::InvalidParameter { name: "interval", reason: "needs a < b".into() });
    }
    let span = b - a;
    let gap = T::c(1e-6) * span;
    let fd_step = T::c(1e-6) * span;
    let mut cache = LambdaCache::new();
    let mut t = start;
    project_into_simplex(&mut t, interval, gap);

    let eval =
        |cache: &mut LambdaCache<T>, t: &[T]| v_components(solver, cache, t, interval, sign);

    let (mut v, mut scale) = eval(&mut cache, &t)?;
    for _ in 0..NEWTON_MAX_ITER {
        if sup_norm(&v) <= v_tolerance(scale) {
            return NodeVector::new(t, interval);
        }

        // Finite-difference Jacobian, column by column; the cache keeps the
        // cost at two fresh solves per column.
        let mut jac = vec![vec![T::zero(); n]; n];
        for j in 0..n {
            let mut tj = t.clone();
            let upper = if j + 1 < n { tj[j + 1] } else { b };
            let h = if tj[j] + fd_step < upper - gap { fd_step } else { -fd_step };
            tj[j] = tj[j] + h;
            let (vj, _) = eval(&mut cache, &tj)?;
            for i in 0..n {
                jac[i][j] = (vj[i] - v[i]) / h;
            }
        }

        let step = match solve_linear(jac, v.iter().map(|&x| -x).collect()) {
            Ok(s) => s,
            Err(_) => break,
        };

        // Damped update: halve until the residual drops.
        let norm_old = sup_norm(&v);
        let mut accepted = false;
        let mut factor = T::one();
        for _ in 0..=DAMPING_HALVINGS {
            let mut cand: Vec<T> = t
                .iter()
                .zip(&step)
                .map(|(&ti, &si)| ti + si * factor)
                .collect();
            project_into_simplex(&mut cand, interval, gap);
            let (vc, sc) = eval(&mut cache, &cand)?;
            if sup_norm(&vc) < norm_old {
                t = cand;
                v = vc;
                scale = sc;
                accepted = true;
                break;
            }
            factor = factor * T::c(0.5);
        }
        if !accepted {
            break;
        }
    }

    if sup_norm(&v) <= v_tolerance(scale) {
        return NodeVector::new(t, interval);
    }

    // Newton stagnated; cyclic one-dimensional bisection on each node,
    // using that V_i is monotone (decreasing) in t_i.
    for _ in 0..FALLBACK_SWEEPS {
        for j in 0..n {
            let lo_wall = if j == 0 { a } else { t[j - 1] } + gap;
            let hi_wall = if j + 1 == n { b } else { t[j + 1] } - gap;
            let component = |cache: &mut LambdaCache<T>, x: T| -> Result<T> {
                let mut tj = t.clone();
                tj[j] = x;
                let (vj, _) = eval(cache, &tj)?;
                Ok(vj[j])
            };
            let mut lo = lo_wall;
            let mut hi = hi_wall;
            let f_lo = component(&mut cache, lo)?;
            let f_hi = component(&mut cache, hi)?;
            if f_lo <= T::zero() || f_hi >= T::zero() {
                continue;
            }
            for _ in 0..80 {
                let mid = lo + (hi - lo) * T::c(0.5);
                let fm = component(&mut cache, mid)?;
                if fm > T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::c(1e-13) * span {
                    break;
                }
            }
            t[j] = lo + (hi - lo) * T::c(0.5);
        }
        let (vc, sc) = eval(&mut cache, &t)?;
        v = vc;
        scale = sc;
        if sup_norm(&v) <= v_tolerance(scale) {
            return NodeVector::new(t, interval);
        }
    }

    Err(Error::Solver(format!(
        "node solve stalled at ||V|| = {:e} (tolerance {:e}); best nodes {:?}",
        sup_norm(&v).to_f64_lossy(),
        v_tolerance(scale).to_f64_lossy(),
        t.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>(),
    )))
}

/// An assembled n-node eigenpair.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    /// Interior zero count.
    pub n: usize,
    /// Sign of the first piece.
    pub sign: Sign,
    pub lambda: T,
    pub nodes: NodeVector<T>,
    pub pieces: Vec<SemiEigenResult<T>>,
    /// Derivative-matching ratios at the nodes, all positive.
    pub alphas: Vec<T>,
    /// Glued eigenfunction, normalized to `sup|u| = 1`.
    pub global: Trajectory<T>,
}

/// Glues the piecewise one-signed eigenfunctions over a solved node vector
/// by matching derivatives at every node; the result is normalized to
/// sup-norm one and keeps the first piece's eigenvalue.
pub fn assemble<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    nodes: &NodeVector<T>,
    sign: Sign,
) -> Result<EigenPair<T>> {
    let n = nodes.n();
    let mut pieces = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (lo, hi) = nodes.piece(i);
        pieces.push(solver.solve(lo, hi, sign.piece(i))?);
    }
    let lambda = pieces[0].lambda;

    let derivative_floor = T::c(1e-10);
    let mut alphas = Vec::with_capacity(n);
    let mut global = pieces[0].eigenfunction.clone();
    let mut scale_acc = T::one();
    for i in 1..=n {
        let left_slope = global.end().1;
        let right_slope = pieces[i].eigenfunction.start().1;
        if left_slope.abs() < derivative_floor || right_slope.abs() < derivative_floor {
            return Err(Error::Assembly(format!(
                "vanishing endpoint derivative at node {}; node vector not converged",
                i
            )));
        }
        let alpha = left_slope / right_slope;
        if alpha <= T::zero() {
            return Err(Error::Assembly(format!(
                "derivative ratio at node {} is not positive; adjacent pieces do not alternate",
                i
            )));
        }
        // Ratio relative to the previous piece's current scaling.
        alphas.push(alpha / scale_acc);
        let mut piece = pieces[i].eigenfunction.clone();
        piece.scale(alpha);
        global.extend_with(&piece);
        scale_acc = alpha;
    }

    let sup = global.sup_abs_u();
    if !(sup > T::zero()) {
        return Err(Error::Assembly("glued eigenfunction vanished".into()));
    }
    global.scale(T::one() / sup);

    Ok(EigenPair { n, sign, lambda, nodes: nodes.clone(), pieces, alphas, global })
}

/// Number of sign-changing zeros strictly inside the span, ignoring a
/// small margin at both ends.
pub fn interior_zero_count<T: Real>(traj: &Trajectory<T>) -> usize {
    let (a, b) = traj.span();
    let margin = T::c(1e-7) * (b - a);
    crate::ivp::zeros(traj, a + margin).into_iter().filter(|&z| z < b - margin).count()
}

/// The eigenpairs `(lambda_n^sign, u_n^sign)` for `n = 0 ..= n_max` over
/// both sign families, ordered by `n` with the positive family first.
pub fn spectrum<T: Real>(
    solver: &impl SemiEigenSolve<T>,
    n_max: usize,
    interval: (T, T),
) -> Result<Vec<EigenPair<T>>> {
    let mut out = Vec::with_capacity(2 * (n_max + 1));
    for n in 0..=n_max {
        for sign in [Sign::Plus, Sign::Minus] {
            let nodes = solve_nodes(solver, n, sign, interval)?;
            out.push(assemble(solver, &nodes, sign)?);
        }
    }
    Ok(out)
}
