//! Registry of test problems with known optima.
//!
//! Besides the one-dimensional quadratic used to demonstrate that the
//! adaptive (Nesterov) step sizes are not monotone, the registry ships a
//! negative-sqrt objective on the floored simplex whose subgradients blow up
//! near the boundary (so no Lipschitz bound exists over the set), seeded
//! piecewise-linear max problems with a planted optimum, and seeded
//! lasso-on-a-box instances whose optima are precomputed by two independent
//! reference methods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{CompositeTerm, FeasibleSet, MirrorMap, NormPair, Vector};
use crate::schedule::{StepSizeRule, WeightScheme};
use crate::solver::{solve, Objective, RunTrace, SolverConfig};

/// Default floor keeping entropy-geometry iterates away from the simplex
/// boundary so the entropy gradient stays finite.
pub const DEFAULT_SIMPLEX_FLOOR: f64 = 1e-12;

/// Reference trajectory of the quadratic box problem under the adaptive
/// (Nesterov) step sizes, `(k, x_k, gamma_k)`, printed to 15 significant
/// digits. Rows 13/14 and 24/25 witness that the step sizes increase.
pub const EXAMPLE1_REFERENCE: &[(usize, f64, f64)] = &[
    (1, 10.0, 0.141421356237310),
    (2, 8.58578643762690, 0.116471566962991),
    (3, 7.58578643762690, 0.107635060338339),
    (4, 6.76928985669918, 0.104458044515078),
    (5, 6.06218307551263, 0.104328015857587),
    (13, 2.06458695099841, 0.189980988733214),
    (14, 1.67235468072204, 0.226007363967817),
    (24, 0.209552285731976, 1.37758046201432),
    (25, -0.0791228488628367, 3.57472862187939),
    (48, 0.166305589462573, 1.22740399701280),
    (49, -0.0378185557693590, 5.34210005645243),
    (60, 0.155379438403268, 1.17502153252226),
    (61, -0.0271947474317873, 6.65832593368331),
    (80, 0.143015997988010, 1.10556780523025),
    (81, -0.0150978850204088, 10.4077385707513),
];

/// Known optimum of a test problem.
#[derive(Debug, Clone)]
pub struct KnownOptimum {
    pub x_star: Vector,
    pub f_star: f64,
    /// `f* + h(x*)` when the problem is composite.
    pub big_f_star: Option<f64>,
}

/// A fully specified problem instance: objective, optional composite term,
/// feasible set, geometry, and a canonical starting point.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: String,
    pub objective: Objective,
    pub composite: Option<CompositeTerm>,
    pub feasible: FeasibleSet,
    pub map: MirrorMap,
    pub norms: NormPair,
    pub start: Vector,
    pub known_opt: Option<KnownOptimum>,
    /// Whether the subgradients admit a uniform bound over the feasible set
    /// (diagnostic only; no solver path requires it).
    pub lipschitz_on_q: bool,
}

impl TestProblem {
    pub fn dim(&self) -> usize {
        self.feasible.dim()
    }

    /// `f(x)` plus the composite term when present.
    pub fn total_objective(&self, x: &Vector) -> f64 {
        let mut v = self.objective.eval(x);
        if let Some(h) = &self.composite {
            v += h.eval(x);
        }
        v
    }

    /// Gap of `x` against the registered optimum (`F` gap for composite
    /// problems).
    pub fn objective_gap(&self, x: &Vector) -> Result<f64> {
        let opt = self.known_opt.as_ref().ok_or(Error::MissingOptimum)?;
        let reference = match (&self.composite, opt.big_f_star) {
            (Some(_), Some(big_f)) => big_f,
            _ => opt.f_star,
        };
        Ok(self.total_objective(x) - reference)
    }

    /// Runs the solver from the canonical start with this problem's geometry.
    pub fn run(
        &self,
        rule: StepSizeRule,
        weights: WeightScheme,
        max_iters: usize,
    ) -> Result<RunTrace> {
        let mut cfg = SolverConfig::new(max_iters, rule, weights, self.map, self.feasible.clone());
        cfg.norms = self.norms;
        cfg.composite = self.composite.clone();
        solve(&self.objective, &self.start, &cfg)
    }
}

/// One-dimensional `f(x) = x^2 / 2` on `[-10, 10]` with Euclidean geometry,
/// starting at 10. With this distance generating function the mirror step is
/// an ordinary projected subgradient step.
pub fn example1() -> TestProblem {
    let objective = Objective::new("half-square", |x| 0.5 * x[0] * x[0], |x| vec![x[0]]);
    TestProblem {
        name: "example1".into(),
        objective,
        composite: None,
        feasible: FeasibleSet::symmetric_box(1, 10.0).expect("static"),
        map: MirrorMap::EuclideanHalfSq,
        norms: NormPair::L2,
        start: Vector::scalar(10.0).expect("static"),
        known_opt: Some(KnownOptimum {
            x_star: Vector::scalar(0.0).expect("static"),
            f_star: 0.0,
            big_f_star: None,
        }),
        lipschitz_on_q: true,
    }
}

/// `f(x) = -sum_i sqrt(x_i)` on the floored simplex with entropy geometry.
///
/// Convex and continuous on the closed simplex, but the subgradient
/// component `-1 / (2 sqrt(x_i))` is unbounded as a coordinate approaches
/// zero, so no Lipschitz constant exists over the unfloored set. The
/// canonical start sits against the floor, where the gradient magnitude is
/// `1 / (2 sqrt(floor))`. The optimum is the uniform point with value
/// `-sqrt(n)`.
pub fn non_lipschitz_sqrt_simplex(n: usize, floor: f64) -> Result<TestProblem> {
    if n < 2 {
        return Err(Error::Domain("needs dimension >= 2".into()));
    }
    if floor <= 0.0 || !floor.is_finite() {
        return Err(Error::Domain(
            "the sqrt objective needs a positive simplex floor".into(),
        ));
    }
    let feasible = FeasibleSet::floored_simplex(n, floor)?;
    let objective = Objective::new(
        "neg-sqrt-sum",
        |x| -x.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>(),
        |x| {
            x.iter()
                .map(|v| -0.5 / v.max(f64::MIN_POSITIVE).sqrt())
                .collect()
        },
    );
    let mut start = vec![floor; n];
    start[0] = 1.0 - (n as f64 - 1.0) * floor;
    Ok(TestProblem {
        name: format!("sqrt-simplex-n{n}"),
        objective,
        composite: None,
        feasible,
        map: MirrorMap::NegEntropy,
        norms: NormPair::L1Linf,
        start: Vector::new(start)?,
        known_opt: Some(KnownOptimum {
            x_star: Vector::new(vec![1.0 / n as f64; n])?,
            f_star: -(n as f64).sqrt(),
            big_f_star: None,
        }),
        lipschitz_on_q: false,
    })
}

/// `f(x) = max_j <a_j, x>` over `[-1, 1]^n` with a planted optimum.
///
/// The pieces come in `+/-` pairs (including scaled coordinate directions),
/// so all hyperplanes are active at the origin, zero lies in the convex hull
/// of the active gradients, and `f* = 0` at `x* = 0` with `f > 0` elsewhere.
/// Ties in the active piece resolve to the smallest index.
pub fn piecewise_linear_max(n: usize, seed: u64) -> Result<TestProblem> {
    if n == 0 {
        return Err(Error::Domain("needs dimension >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7077_6c6d);
    let mut pieces: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 0.5;
        pieces.push(e.clone());
        e[i] = -0.5;
        pieces.push(e);
    }
    for _ in 0..=n {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        pieces.push(a.iter().map(|v| -v).collect());
        pieces.push(a);
    }
    let eval_pieces = pieces.clone();
    let grad_pieces = pieces;
    let objective = Objective::new(
        "piecewise-linear-max",
        move |x| {
            eval_pieces
                .iter()
                .map(|a| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        },
        move |x| {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (j, a) in grad_pieces.iter().enumerate() {
                let v: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
                if v > best {
                    best = v;
                    arg = j;
                }
            }
            grad_pieces[arg].clone()
        },
    );
    let start: Vec<f64> = (0..n)
        .map(|_| {
            let magnitude = rng.random_range(0.3..0.9);
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    Ok(TestProblem {
        name: format!("pwl-max-n{n}-s{seed}"),
        objective,
        composite: None,
        feasible: FeasibleSet::symmetric_box(n, 1.0)?,
        map: MirrorMap::EuclideanHalfSq,
        norms: NormPair::L2,
        start: Vector::new(start)?,
        known_opt: Some(KnownOptimum {
            x_star: Vector::new(vec![0.0; n])?,
            f_star: 0.0,
            big_f_star: None,
        }),
        lipschitz_on_q: true,
    })
}

/// `f(x) = 0.5 ||Ax - b||^2` with `h(x) = lambda ||x||_1` over `[-1, 1]^n`.
///
/// The reference optimum is computed at construction by proximal gradient
/// iteration and independently by exact coordinate descent; the two must
/// agree to 1e-10 in objective value. The seeded pair `(n, seed) = (1, 0)`
/// is the fixed instance `A = 1, b = 0.5`, whose optimum for `lambda = 1`
/// is `x* = 0` with `F* = 0.125`.
pub fn lasso_on_box(n: usize, lambda: f64, seed: u64) -> Result<TestProblem> {
    if n == 0 {
        return Err(Error::Domain("needs dimension >= 1".into()));
    }
    if n > 64 {
        return Err(Error::Domain(
            "reference-optimum computation is sized for n <= 64".into(),
        ));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain("lambda must be >= 0".into()));
    }
    let (a, b) = if n == 1 && seed == 0 {
        (vec![vec![1.0]], vec![0.5])
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c61_7373);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (a, b)
    };

    let residual = {
        let a = a.clone();
        let b = b.clone();
        move |x: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b.iter())
                .map(|(row, bi)| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi)
                .collect()
        }
    };
    let eval = {
        let residual = residual.clone();
        move |x: &[f64]| 0.5 * residual(x).iter().map(|r| r * r).sum::<f64>()
    };
    let grad = {
        let a = a.clone();
        let residual = residual.clone();
        move |x: &[f64]| -> Vec<f64> {
            let r = residual(x);
            (0..x.len())
                .map(|j| a.iter().zip(r.iter()).map(|(row, ri)| row[j] * ri).sum())
                .collect()
        }
    };

    let x_ista = lasso_reference_proximal(&a, &b, lambda);
    let x_cd = lasso_reference_coordinate(&a, &b, lambda);
    let h = CompositeTerm::l1(lambda)?;
    let total = |x: &[f64]| eval(x) + lambda * x.iter().map(|v| v.abs()).sum::<f64>();
    let f_ista = total(&x_ista);
    let f_cd = total(&x_cd);
    if (f_ista - f_cd).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "reference methods disagree: {f_ista} vs {f_cd}"
        )));
    }
    let x_star = if f_cd <= f_ista { x_cd } else { x_ista };
    let f_star = eval(&x_star);
    let big_f_star = total(&x_star);

    // the start must keep grad f nonzero so the adaptive rules are defined
    let mut start = vec![0.75; n];
    let grad_norm = |x: &[f64]| grad(x).iter().map(|g| g * g).sum::<f64>().sqrt();
    if grad_norm(&start) <= 1e-9 {
        start = vec![0.6; n];
    }
    if grad_norm(&start) <= 1e-9 {
        return Err(Error::Domain(
            "could not find a start with nonzero gradient".into(),
        ));
    }

    let objective = Objective::new("half-least-squares", eval, grad);
    Ok(TestProblem {
        name: format!("lasso-box-n{n}-l{lambda}-s{seed}"),
        objective,
        composite: Some(h),
        feasible: FeasibleSet::symmetric_box(n, 1.0)?,
        map: MirrorMap::EuclideanHalfSq,
        norms: NormPair::L2,
        start: Vector::new(start)?,
        known_opt: Some(KnownOptimum {
            x_star: Vector::new(x_star)?,
            f_star,
            big_f_star: Some(big_f_star),
        }),
        lipschitz_on_q: true,
    })
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Proximal-gradient reference solver for the boxed lasso.
fn lasso_reference_proximal(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Vec<f64> {
    let n = b.len();
    // row-sum bound on ||A^T A|| dominates the spectral radius
    let mut lip: f64 = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let v: f64 = a.iter().map(|arow| arow[i] * arow[j]).sum();
            row += v.abs();
        }
        lip = lip.max(row);
    }
    let step = 1.0 / lip.max(1e-12);
    let mut x = vec![0.0; n];
    for _ in 0..500_000 {
        let r: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(row, bi)| row.iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi)
            .collect();
        let mut delta: f64 = 0.0;
        let mut next = vec![0.0; n];
        for j in 0..n {
            let gj: f64 = a.iter().zip(&r).map(|(row, ri)| row[j] * ri).sum();
            let v = soft(x[j] - step * gj, step * lambda).clamp(-1.0, 1.0);
            delta = delta.max((v - x[j]).abs());
            next[j] = v;
        }
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    x
}

/// Exact coordinate-descent reference solver for the boxed lasso.
fn lasso_reference_coordinate(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for _ in 0..500_000 {
        let mut delta: f64 = 0.0;
        for j in 0..n {
            let col_sq: f64 = a.iter().map(|row| row[j] * row[j]).sum();
            if col_sq == 0.0 {
                continue;
            }
            // residual with coordinate j removed
            let z: f64 = a
                .iter()
                .zip(b)
                .map(|(row, bi)| {
                    let partial: f64 = row
                        .iter()
                        .zip(&x)
                        .enumerate()
                        .filter(|(idx, _)| *idx != j)
                        .map(|(_, (aij, xj))| aij * xj)
                        .sum();
                    row[j] * (bi - partial)
                })
                .sum();
            let v = (soft(z, lambda) / col_sq).clamp(-1.0, 1.0);
            delta = delta.max((v - x[j]).abs());
            x[j] = v;
        }
        if delta < 1e-15 {
            break;
        }
    }
    x
}

/// Worst-case `R` with `V(x*, x) <= R` guaranteed for all `x, x*` in the set,
/// in closed form for the Euclidean map: half the squared Euclidean diameter.
/// The entropy map admits no uniform bound over the open simplex, so `R`
/// must be supplied explicitly there (see [`floored_simplex_r`]).
pub fn safe_r(feasible: &FeasibleSet, map: MirrorMap) -> Result<f64> {
    match map {
        MirrorMap::NegEntropy => Err(Error::NeedsExplicitR),
        MirrorMap::EuclideanHalfSq => Ok(match feasible {
            FeasibleSet::Box { lower, upper } => {
                0.5 * lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| (u - l) * (u - l))
                    .sum::<f64>()
            }
            FeasibleSet::Ball2 { radius, .. } => 2.0 * radius * radius,
            FeasibleSet::Simplex { .. } => 1.0,
        }),
    }
}

/// Valid `R` for entropy geometry on the floored simplex: for any `x` with
/// `x_i >= floor` and any simplex point `x*`, the divergence satisfies
/// `KL(x*, x) <= ln(1 / floor)`.
pub fn floored_simplex_r(floor: f64) -> Result<f64> {
    if floor <= 0.0 || floor >= 1.0 || !floor.is_finite() {
        return Err(Error::Domain("floor must lie in (0, 1)".into()));
    }
    Ok((1.0 / floor).ln())
}

/// Brute-force grid minimum over a box, for cross-checking planted optima.
/// Only feasible for dimension at most 3.
pub fn verify_by_grid(problem: &TestProblem, points_per_axis: usize) -> Result<f64> {
    let n = problem.dim();
    if n > 3 {
        return Err(Error::OracleUnavailable(format!(
            "grid search over dimension {n} is not tractable"
        )));
    }
    if points_per_axis < 2 {
        return Err(Error::Domain("need at least 2 grid points per axis".into()));
    }
    let (lower, upper) = match &problem.feasible {
        FeasibleSet::Box { lower, upper } => (lower, upper),
        _ => {
            return Err(Error::OracleUnavailable(
                "grid oracle is implemented for boxes only".into(),
            ))
        }
    };
    let mut best = f64::INFINITY;
    let mut index = vec![0usize; n];
    loop {
        let point: Vec<f64> = (0..n)
            .map(|i| {
                let t = index[i] as f64 / (points_per_axis - 1) as f64;
                lower[i] + t * (upper[i] - lower[i])
            })
            .collect();
        best = best.min(problem.total_objective(&Vector::new(point)?));
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(best);
            }
            index[axis] += 1;
            if index[axis] < points_per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// Looks up a problem by its registry name.
///
/// Recognized forms: `example1`, `sqrt-simplex-n{n}`, `pwl-max-n{n}-s{seed}`,
/// and `lasso-box-n{n}-l{lambda}-s{seed}`.
pub fn by_name(name: &str) -> Result<TestProblem> {
    by_name_with(name, None, None)
}

/// [`by_name`] with optional overrides: a simplex floor for the entropy
/// problems and a replacement seed for the generated ones.
pub fn by_name_with(
    name: &str,
    floor_override: Option<f64>,
    seed_override: Option<u64>,
) -> Result<TestProblem> {
    if name == "example1" {
        return Ok(example1());
    }
    if let Some(rest) = name.strip_prefix("sqrt-simplex-n") {
        let n: usize = rest
            .parse()
            .map_err(|_| Error::UnknownProblem(name.into()))?;
        return non_lipschitz_sqrt_simplex(n, floor_override.unwrap_or(DEFAULT_SIMPLEX_FLOOR));
    }
    if let Some(rest) = name.strip_prefix("pwl-max-n") {
        let (n, seed) = parse_n_seed(rest).ok_or_else(|| Error::UnknownProblem(name.into()))?;
        return piecewise_linear_max(n, seed_override.unwrap_or(seed));
    }
    if let Some(rest) = name.strip_prefix("lasso-box-n") {
        let (n, lambda, seed) =
            parse_n_lambda_seed(rest).ok_or_else(|| Error::UnknownProblem(name.into()))?;
        return lasso_on_box(n, lambda, seed_override.unwrap_or(seed));
    }
    Err(Error::UnknownProblem(name.into()))
}

fn parse_n_seed(rest: &str) -> Option<(usize, u64)> {
    let (n_str, s_str) = rest.split_once("-s")?;
    Some((n_str.parse().ok()?, s_str.parse().ok()?))
}

fn parse_n_lambda_seed(rest: &str) -> Option<(usize, f64, u64)> {
    let (n_str, rest) = rest.split_once("-l")?;
    let (l_str, s_str) = rest.split_once("-s")?;
    Some((
        n_str.parse().ok()?,
        l_str.parse().ok()?,
        s_str.parse().ok()?,
    ))
}
