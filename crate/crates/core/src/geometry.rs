//! Primal/dual norm pairs, feasible sets with exact projections, distance
//! generating functions with their Bregman divergences, and exact solvers for
//! the mirror-step subproblems.
//!
//! Everything here is immutable after construction and every operation is a
//! pure function of its inputs, so values can be shared freely across threads.

use rand::Rng;

use crate::error::{Error, Result};

/// Maximum exponent fed to `exp` in the exponentiated-gradient update.
/// Exponents are pre-shifted so that the largest is zero; anything beyond
/// this magnitude before shifting signals a malformed step.
const EXP_OVERFLOW_LIMIT: f64 = 700.0;

/// A finite-dimensional point or (sub)gradient with all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting empty input and NaN/infinite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("vector must have dimension >= 1".into()));
        }
        for (i, v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { entries })
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Inner product; dimensions must already agree.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    b.check_dim(a.dim())?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x * y).sum())
}

/// A primal norm together with its dual norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormPair {
    /// Euclidean norm, self-dual.
    L2,
    /// Primal l1 paired with dual l-infinity.
    L1Linf,
}

impl NormPair {
    pub fn primal(&self, v: &Vector) -> f64 {
        match self {
            NormPair::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormPair::L1Linf => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn dual(&self, v: &Vector) -> f64 {
        match self {
            NormPair::L2 => self.primal(v),
            NormPair::L1Linf => v.iter().fold(0.0, |acc, x| acc.max(x.abs())),
        }
    }
}

/// A compact convex feasible set with an exact Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Box {
        lower: Vector,
        upper: Vector,
    },
    Ball2 {
        center: Vector,
        radius: f64,
    },
    /// Probability simplex, optionally floored away from the boundary:
    /// `{ x : x_i >= floor, sum x = 1 }`.
    Simplex {
        dim: usize,
        floor: f64,
    },
}

impl FeasibleSet {
    pub fn box_set(lower: Vector, upper: Vector) -> Result<Self> {
        upper.check_dim(lower.dim())?;
        for (l, u) in lower.iter().zip(upper.iter()) {
            if l > u {
                return Err(Error::Domain(format!("box has lower {l} above upper {u}")));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Axis-aligned cube `[-half, half]^n`.
    pub fn symmetric_box(dim: usize, half: f64) -> Result<Self> {
        if half <= 0.0 || !half.is_finite() {
            return Err(Error::Domain("box half-width must be positive".into()));
        }
        Self::box_set(
            Vector::new(vec![-half; dim])?,
            Vector::new(vec![half; dim])?,
        )
    }

    pub fn ball2(center: Vector, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::Domain("ball radius must be positive".into()));
        }
        Ok(FeasibleSet::Ball2 { center, radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        Self::floored_simplex(dim, 0.0)
    }

    pub fn floored_simplex(dim: usize, floor: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("simplex needs dimension >= 1".into()));
        }
        if floor < 0.0 || !floor.is_finite() {
            return Err(Error::Domain("simplex floor must be >= 0".into()));
        }
        if floor * dim as f64 >= 1.0 {
            return Err(Error::Domain(format!(
                "simplex floor {floor} infeasible for dimension {dim}"
            )));
        }
        Ok(FeasibleSet::Simplex { dim, floor })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.dim(),
            FeasibleSet::Ball2 { center, .. } => center.dim(),
            FeasibleSet::Simplex { dim, .. } => *dim,
        }
    }

    /// Membership up to an absolute tolerance.
    pub fn member(&self, x: &Vector, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter())
                .zip(upper.iter())
                .all(|((v, l), u)| *v >= l - tol && *v <= u + tol),
            FeasibleSet::Ball2 { center, radius } => {
                let d2: f64 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum();
                d2.sqrt() <= radius + tol
            }
            FeasibleSet::Simplex { floor, .. } => {
                let sum: f64 = x.iter().sum();
                (sum - 1.0).abs() <= tol && x.iter().all(|v| *v >= floor - tol)
            }
        })
    }

    /// Exact Euclidean projection onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let out = match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter())
                .zip(upper.iter())
                .map(|((v, l), u)| v.max(*l).min(*u))
                .collect(),
            FeasibleSet::Ball2 { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(center.iter()).map(|(v, c)| v - c).collect();
                let norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
                if norm <= *radius {
                    x.as_slice().to_vec()
                } else {
                    let scale = radius / norm;
                    center
                        .iter()
                        .zip(diff.iter())
                        .map(|(c, d)| c + scale * d)
                        .collect()
                }
            }
            FeasibleSet::Simplex { floor, .. } => project_simplex(x.as_slice(), *floor),
        };
        Vector::new(out)
    }

    /// Draws a point from the set; uniform for boxes and balls, Dirichlet(1)
    /// (shifted by the floor) for simplices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let out = match self {
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .map(|(l, u)| {
                    let t: f64 = rng.random();
                    l + t * (u - l)
                })
                .collect(),
            FeasibleSet::Ball2 { center, radius } => {
                let n = center.dim();
                // Gaussian direction via Box-Muller pairs, then radial rescale.
                let mut dir = Vec::with_capacity(n);
                while dir.len() < n {
                    let u1: f64 = rng.random::<f64>().max(1e-18);
                    let u2: f64 = rng.random();
                    let r = (-2.0 * u1.ln()).sqrt();
                    dir.push(r * (std::f64::consts::TAU * u2).cos());
                    if dir.len() < n {
                        dir.push(r * (std::f64::consts::TAU * u2).sin());
                    }
                }
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-300);
                let t: f64 = rng.random();
                let scale = radius * t.powf(1.0 / n as f64) / norm;
                center
                    .iter()
                    .zip(dir.iter())
                    .map(|(c, d)| c + scale * d)
                    .collect()
            }
            FeasibleSet::Simplex { dim, floor } => {
                let mut e: Vec<f64> = (0..*dim)
                    .map(|_| -rng.random::<f64>().max(1e-18).ln())
                    .collect();
                let total: f64 = e.iter().sum();
                let mass = 1.0 - *dim as f64 * floor;
                for v in &mut e {
                    *v = floor + mass * (*v / total);
                }
                e
            }
        };
        Vector::new(out).expect("sampled point is finite")
    }
}

/// Exact sort-based projection onto `{ y : y_i >= floor, sum y = 1 }`.
/// Ties are broken by index so the result is deterministic.
fn project_simplex(x: &[f64], floor: f64) -> Vec<f64> {
    let n = x.len();
    let mass = 1.0 - n as f64 * floor;
    let shifted: Vec<f64> = x.iter().map(|v| v - floor).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        shifted[j]
            .partial_cmp(&shifted[i])
            .expect("finite entries")
            .then(i.cmp(&j))
    });
    let mut css = 0.0;
    let mut theta = 0.0;
    for (r, &i) in idx.iter().enumerate() {
        css += shifted[i];
        let t = (css - mass) / (r as f64 + 1.0);
        if shifted[i] - t > 0.0 {
            theta = t;
        }
    }
    shifted
        .iter()
        .map(|v| (v - theta).max(0.0) + floor)
        .collect()
}

/// A distance generating function: differentiable and 1-strongly convex with
/// respect to its canonical norm pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorMap {
    /// `psi(x) = 0.5 ||x||_2^2`, strongly convex w.r.t. the Euclidean norm.
    EuclideanHalfSq,
    /// `psi(x) = sum x_i ln x_i` on the simplex, strongly convex w.r.t. l1.
    NegEntropy,
}

impl MirrorMap {
    /// Strong-convexity modulus under the canonical norm pair.
    pub fn sigma(&self) -> f64 {
        1.0
    }

    pub fn canonical_norms(&self) -> NormPair {
        match self {
            MirrorMap::EuclideanHalfSq => NormPair::L2,
            MirrorMap::NegEntropy => NormPair::L1Linf,
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        match self {
            MirrorMap::EuclideanHalfSq => Ok(0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            MirrorMap::NegEntropy => {
                let mut s = 0.0;
                for v in x.iter() {
                    if *v < 0.0 {
                        return Err(Error::Domain(
                            "negative entry outside the entropy domain".into(),
                        ));
                    }
                    if *v > 0.0 {
                        s += v * v.ln();
                    }
                    // 0 ln 0 := 0
                }
                Ok(s)
            }
        }
    }

    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        match self {
            MirrorMap::EuclideanHalfSq => Ok(x.clone()),
            MirrorMap::NegEntropy => {
                let mut g = Vec::with_capacity(x.dim());
                for v in x.iter() {
                    if *v <= 0.0 {
                        return Err(Error::Domain(
                            "entropy gradient needs strictly positive entries".into(),
                        ));
                    }
                    g.push(1.0 + v.ln());
                }
                Vector::new(g)
            }
        }
    }

    /// Bregman divergence `V(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>`,
    /// evaluated through its algebraically equivalent per-coordinate form so
    /// that it is exactly zero at `x = y` and never rounds negative.
    pub fn bregman(&self, x: &Vector, y: &Vector) -> Result<f64> {
        y.check_dim(x.dim())?;
        match self {
            MirrorMap::EuclideanHalfSq => Ok(0.5
                * x.iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()),
            MirrorMap::NegEntropy => {
                let mut s = 0.0;
                for (a, b) in x.iter().zip(y.iter()) {
                    if *a < 0.0 || *b < 0.0 {
                        return Err(Error::Domain(
                            "negative entry outside the entropy domain".into(),
                        ));
                    }
                    if *b == 0.0 {
                        return Err(Error::Domain(
                            "entropy divergence undefined for zero reference entry".into(),
                        ));
                    }
                    // a ln(a/b) - a + b, with the a = 0 limit equal to b
                    s += if *a == 0.0 {
                        *b
                    } else {
                        a * (a / b).ln() - a + b
                    };
                }
                Ok(s)
            }
        }
    }

    /// Residual of the three-point identity
    /// `<grad psi(b) - grad psi(a), c - a> - [V(c,a) + V(a,b) - V(c,b)]`,
    /// which is zero up to rounding for any valid triple.
    pub fn three_point_residual(&self, a: &Vector, b: &Vector, c: &Vector) -> Result<f64> {
        let ga = self.grad(a)?;
        let gb = self.grad(b)?;
        let mut lhs = 0.0;
        for i in 0..a.dim() {
            lhs += (gb[i] - ga[i]) * (c[i] - a[i]);
        }
        let rhs = self.bregman(c, a)? + self.bregman(a, b)? - self.bregman(c, b)?;
        Ok(lhs - rhs)
    }
}

/// A nonnegative convex term added to the objective in the composite setting.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositeTerm {
    Zero,
    /// `h(x) = lambda ||x||_1`.
    L1Scaled {
        lambda: f64,
    },
    /// `h(x) = <c, x>`; the caller guarantees nonnegativity over the
    /// feasible set.
    Linear {
        coeffs: Vector,
    },
}

impl CompositeTerm {
    pub fn l1(lambda: f64) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::Domain("l1 weight must be >= 0".into()));
        }
        Ok(CompositeTerm::L1Scaled { lambda })
    }

    pub fn linear(coeffs: Vector) -> Self {
        CompositeTerm::Linear { coeffs }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        match self {
            CompositeTerm::Zero => 0.0,
            CompositeTerm::L1Scaled { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            CompositeTerm::Linear { coeffs } => {
                x.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum()
            }
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "step size must be positive, got {gamma}"
        )));
    }
    Ok(())
}

/// Exact minimizer of the mirror-step subproblem
/// `argmin_{u in Q} { gamma <g, u> + V(u, x) }`.
///
/// Supported pairs: the Euclidean map with any built-in set (a plain
/// projected-gradient step) and the entropy map on the simplex (the
/// exponentiated-gradient update, floored exactly when the set has a floor).
pub fn mirror_step(
    map: MirrorMap,
    set: &FeasibleSet,
    x: &Vector,
    g: &Vector,
    gamma: f64,
) -> Result<Vector> {
    check_gamma(gamma)?;
    x.check_dim(set.dim())?;
    g.check_dim(set.dim())?;
    match (map, set) {
        (MirrorMap::EuclideanHalfSq, _) => {
            let moved: Vec<f64> = x
                .iter()
                .zip(g.iter())
                .map(|(xi, gi)| xi - gamma * gi)
                .collect();
            set.project(&Vector::new(moved)?)
        }
        (MirrorMap::NegEntropy, FeasibleSet::Simplex { floor, .. }) => {
            entropy_simplex_step(x.as_slice(), g.as_slice(), gamma, *floor)
        }
        (MirrorMap::NegEntropy, _) => Err(Error::UnsupportedGeometry(
            "entropy map is only paired with the simplex".into(),
        )),
    }
}

/// Exact minimizer of the composite subproblem
/// `argmin_{u in Q} { gamma <g, u> + gamma h(u) + V(u, x) }`.
///
/// With `h = Zero` this calls [`mirror_step`] and is therefore identical to
/// it bit for bit. Linear terms fold into the gradient; the scaled l1 term is
/// solved in closed form per coordinate (soft-threshold, then clamp), which
/// requires the Euclidean map on a box.
pub fn composite_mirror_step(
    map: MirrorMap,
    set: &FeasibleSet,
    h: &CompositeTerm,
    x: &Vector,
    g: &Vector,
    gamma: f64,
) -> Result<Vector> {
    match h {
        CompositeTerm::Zero => mirror_step(map, set, x, g, gamma),
        CompositeTerm::Linear { coeffs } => {
            check_gamma(gamma)?;
            g.check_dim(coeffs.dim())?;
            let folded: Vec<f64> = g
                .iter()
                .zip(coeffs.iter())
                .map(|(gi, ci)| gi + ci)
                .collect();
            mirror_step(map, set, x, &Vector::new(folded)?, gamma)
        }
        CompositeTerm::L1Scaled { lambda } => {
            check_gamma(gamma)?;
            x.check_dim(set.dim())?;
            g.check_dim(set.dim())?;
            match (map, set) {
                (MirrorMap::EuclideanHalfSq, FeasibleSet::Box { lower, upper }) => {
                    let threshold = gamma * lambda;
                    let out: Vec<f64> = x
                        .iter()
                        .zip(g.iter())
                        .zip(lower.iter().zip(upper.iter()))
                        .map(|((xi, gi), (l, u))| {
                            soft_threshold(xi - gamma * gi, threshold).max(*l).min(*u)
                        })
                        .collect();
                    Vector::new(out)
                }
                _ => Err(Error::UnsupportedGeometry(
                    "scaled l1 composite step requires the Euclidean map on a box".into(),
                )),
            }
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Exponentiated-gradient update on the (possibly floored) simplex.
///
/// Exponents are shifted by their maximum before `exp`, which the
/// renormalization cancels exactly and which rules out overflow. With a
/// positive floor the exact minimizer has the water-filling form
/// `y_i = max(floor, c t_i)` with `c` chosen so the coordinates sum to one;
/// `c` is found by scanning clamp counts in sorted order.
fn entropy_simplex_step(x: &[f64], g: &[f64], gamma: f64, floor: f64) -> Result<Vector> {
    let n = x.len();
    let mut exponents = Vec::with_capacity(n);
    for gi in g {
        let e = -gamma * gi;
        if !e.is_finite() || e.abs() > EXP_OVERFLOW_LIMIT * 1e6 {
            return Err(Error::NumericalOverflow);
        }
        exponents.push(e);
    }
    let shift = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t: Vec<f64> = x
        .iter()
        .zip(exponents.iter())
        .map(|(xi, ei)| xi * (ei - shift).exp())
        .collect();

    if floor == 0.0 {
        let z: f64 = t.iter().sum();
        if z <= 0.0 {
            return Err(Error::NumericalOverflow);
        }
        return Vector::new(t.iter().map(|ti| ti / z).collect());
    }

    // Coordinates clamp to the floor in order of increasing t_i.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| t[i].partial_cmp(&t[j]).expect("finite").then(i.cmp(&j)));
    let mut suffix = vec![0.0; n + 1];
    for pos in (0..n).rev() {
        suffix[pos] = suffix[pos + 1] + t[order[pos]];
    }
    for clamped in 0..n {
        let free_sum = suffix[clamped];
        if free_sum <= 0.0 {
            continue;
        }
        let c = (1.0 - clamped as f64 * floor) / free_sum;
        let smallest_free_ok = c * t[order[clamped]] >= floor;
        let largest_clamped_ok = clamped == 0 || c * t[order[clamped - 1]] <= floor;
        if smallest_free_ok && largest_clamped_ok {
            return Vector::new(t.iter().map(|ti| (c * ti).max(floor)).collect());
        }
    }
    // Degenerate rounding corner: put all free mass on the dominant coordinate.
    let mut y = vec![floor; n];
    y[order[n - 1]] = 1.0 - (n as f64 - 1.0) * floor;
    Vector::new(y)
}
