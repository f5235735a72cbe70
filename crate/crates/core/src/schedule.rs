//! Step-size rules and weak-ergodic averaging.
//!
//! Three rules are provided. `Fixed` emits a constant step. `NesterovAdaptive`
//! emits `sqrt(2 sigma) / (||g_k||_* sqrt(k))`, which carries no monotonicity
//! guarantee. `LipschitzFree` emits `sqrt(2 sigma R) / (G_k k^{a/2})` where
//! `G_k = max(G_{k-1}, ||g_k||_* k^{(1-a)/2})`; because `G_k` and `k^{a/2}`
//! are both non-decreasing, the emitted sequence is positive and
//! non-increasing, and no Lipschitz constant is ever consulted.

use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Dual-norm threshold below which a subgradient is treated as zero. For a
/// convex objective a zero subgradient certifies global optimality, and the
/// adaptive rules would otherwise divide by it.
pub const ZERO_GRADIENT_THRESHOLD: f64 = 1e-15;

/// Which step-size formula a [`StepSizeRule`] applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    Fixed { gamma0: f64 },
    NesterovAdaptive { sigma: f64 },
    LipschitzFree { a: f64, r: f64, sigma: f64 },
}

impl RuleKind {
    /// Short stable name used in reports and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            RuleKind::Fixed { .. } => "fixed",
            RuleKind::NesterovAdaptive { .. } => "nesterov",
            RuleKind::LipschitzFree { .. } => "lipschitz-free",
        }
    }
}

/// A stateful step-size generator. One solver run owns one instance and
/// mutates it sequentially; `G_0 = -inf` is represented by an unset state
/// rather than a sentinel float.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeRule {
    kind: RuleKind,
    g_stat: Option<f64>,
    next_k: usize,
    last_gamma: Option<f64>,
}

impl StepSizeRule {
    pub fn fixed(gamma0: f64) -> Result<Self> {
        if gamma0 <= 0.0 || !gamma0.is_finite() {
            return Err(Error::Domain("fixed step size must be positive".into()));
        }
        Ok(Self::with_kind(RuleKind::Fixed { gamma0 }))
    }

    pub fn nesterov(sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be positive".into()));
        }
        Ok(Self::with_kind(RuleKind::NesterovAdaptive { sigma }))
    }

    pub fn lipschitz_free(a: f64, r: f64, sigma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("a must lie in [0, 1], got {a}")));
        }
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::Domain("R must be positive".into()));
        }
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::Domain("sigma must be positive".into()));
        }
        Ok(Self::with_kind(RuleKind::LipschitzFree { a, r, sigma }))
    }

    fn with_kind(kind: RuleKind) -> Self {
        Self {
            kind,
            g_stat: None,
            next_k: 1,
            last_gamma: None,
        }
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    /// A pristine copy with the same formula and cleared state.
    pub fn fresh(&self) -> Self {
        Self::with_kind(self.kind)
    }

    /// True until the running statistic has been seeded by a first call.
    /// Only meaningful for the Lipschitz-free rule.
    pub fn statistic_unset(&self) -> bool {
        self.g_stat.is_none()
    }

    /// Emits the step size for iteration `k`. Calls must arrive with
    /// consecutive `k` starting at 1.
    pub fn next_gamma(&mut self, k: usize, grad_dual_norm: f64) -> Result<f64> {
        if k != self.next_k {
            return Err(Error::NonMonotonicCall {
                expected: self.next_k,
                got: k,
            });
        }
        if grad_dual_norm < 0.0 || !grad_dual_norm.is_finite() {
            return Err(Error::Domain(
                "gradient dual norm must be finite and >= 0".into(),
            ));
        }
        let kf = k as f64;
        let gamma = match self.kind {
            RuleKind::Fixed { gamma0 } => gamma0,
            RuleKind::NesterovAdaptive { sigma } => {
                if grad_dual_norm <= ZERO_GRADIENT_THRESHOLD {
                    return Err(Error::ZeroGradient { k });
                }
                (2.0 * sigma).sqrt() / (grad_dual_norm * kf.sqrt())
            }
            RuleKind::LipschitzFree { a, r, sigma } => {
                let candidate = grad_dual_norm * kf.powf((1.0 - a) / 2.0);
                let g = match self.g_stat {
                    None => {
                        if grad_dual_norm <= ZERO_GRADIENT_THRESHOLD {
                            return Err(Error::ZeroGradient { k });
                        }
                        candidate
                    }
                    Some(prev) => prev.max(candidate),
                };
                self.g_stat = Some(g);
                (2.0 * sigma * r).sqrt() / (g * kf.powf(a / 2.0))
            }
        };
        self.next_k += 1;
        self.last_gamma = Some(gamma);
        Ok(gamma)
    }

    /// Current value of the running statistic `G_k`, equal to
    /// `max_{j<=k} ||g_j||_* j^{(1-a)/2}` over the norms seen so far.
    pub fn g_statistic(&self) -> Result<f64> {
        match self.kind {
            RuleKind::LipschitzFree { .. } => self.g_stat.ok_or(Error::Unset),
            _ => Err(Error::Config(
                "the running statistic exists only for the lipschitz-free rule".into(),
            )),
        }
    }

    pub fn last_gamma(&self) -> Option<f64> {
        self.last_gamma
    }
}

/// Weak-ergodic averaging weights parameterized by `m >= -1`:
/// `omega_k = gamma_k^{-m}` for `-1 <= m <= 0` and `omega_k = k^{m/2}` for
/// `m > 0`. The piecewise definition is applied literally; both branches
/// agree (identically one) at `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    m: f64,
}

impl WeightScheme {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidM(m, "m must be finite"));
        }
        if m < -1.0 {
            return Err(Error::InvalidM(m, "m must be >= -1"));
        }
        Ok(Self { m })
    }

    /// Uniform averaging, `m = 0`.
    pub fn uniform() -> Self {
        Self { m: 0.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// The composite analysis covers only `-1 <= m <= 0`.
    pub fn composite_compatible(&self) -> bool {
        self.m <= 0.0
    }

    /// Weight for iteration `k` given the step size actually used there.
    pub fn weight(&self, k: usize, gamma_k: f64) -> f64 {
        debug_assert!(k >= 1);
        debug_assert!(gamma_k > 0.0);
        if self.m <= 0.0 {
            gamma_k.powf(-self.m)
        } else {
            (k as f64).powf(self.m / 2.0)
        }
    }
}

/// Online weighted average of iterates,
/// `x_hat = (sum omega_k x_k) / (sum omega_k)`.
#[derive(Debug, Clone)]
pub struct ErgodicAverager {
    weighted_sum: Vec<f64>,
    weight_total: f64,
}

impl ErgodicAverager {
    pub fn new(dim: usize) -> Self {
        Self {
            weighted_sum: vec![0.0; dim],
            weight_total: 0.0,
        }
    }

    pub fn update(&mut self, x: &Vector, omega: f64) -> Result<()> {
        x.check_dim(self.weighted_sum.len())?;
        if omega <= 0.0 || !omega.is_finite() {
            return Err(Error::Domain("averaging weight must be positive".into()));
        }
        for (acc, v) in self.weighted_sum.iter_mut().zip(x.iter()) {
            *acc += omega * v;
        }
        self.weight_total += omega;
        Ok(())
    }

    pub fn average(&self) -> Result<Vector> {
        if self.weight_total <= 0.0 {
            return Err(Error::EmptyAverage);
        }
        Vector::new(
            self.weighted_sum
                .iter()
                .map(|v| v / self.weight_total)
                .collect(),
        )
    }

    pub fn weight_total(&self) -> f64 {
        self.weight_total
    }
}
