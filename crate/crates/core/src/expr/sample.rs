//! Seeded rejection sampling of guarded points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Expr, Point};

/// Consecutive rejections after which sampling gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("invalid sample domain: {0}")]
    Invalid(String),
    #[error("domain exhausted: {rejections} consecutive rejections after {accepted} accepted points")]
    DomainExhausted { accepted: usize, rejections: usize },
}

/// A box of coordinates together with guard expressions. A point is
/// accepted only when every guard evaluates and `|guard| > guard_eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDomain {
    bounds: Vec<(f64, f64)>,
    guards: Vec<Expr>,
    guard_eps: f64,
    seed: u64,
}

impl SampleDomain {
    pub const DEFAULT_GUARD_EPS: f64 = 1e-3;

    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Result<Self, SampleError> {
        if bounds.is_empty() {
            return Err(SampleError::Invalid("empty box".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SampleError::Invalid(format!("interval {i} is [{lo}, {hi}]")));
            }
        }
        Ok(Self { bounds, guards: Vec::new(), guard_eps: Self::DEFAULT_GUARD_EPS, seed })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, seed: u64) -> Result<Self, SampleError> {
        Self::new(vec![(lo, hi); dim], seed)
    }

    pub fn with_guard(mut self, guard: Expr) -> Self {
        self.guards.push(guard);
        self
    }

    pub fn with_guards(mut self, guards: impl IntoIterator<Item = Expr>) -> Self {
        self.guards.extend(guards);
        self
    }

    /// Panics unless `eps` is positive and finite.
    pub fn with_guard_eps(mut self, eps: f64) -> Self {
        assert!(eps > 0.0 && eps.is_finite(), "guard_eps must be positive");
        self.guard_eps = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn guards(&self) -> &[Expr] {
        &self.guards
    }

    pub fn guard_eps(&self) -> f64 {
        self.guard_eps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn accepts(&self, p: &[f64]) -> bool {
        self.guards
            .iter()
            .all(|g| g.eval(p).is_ok_and(|v| v.abs() > self.guard_eps))
    }

    /// Draws `count` accepted points. Pure in `(self, count)`.
    pub fn sample_points(&self, count: usize) -> Result<Vec<Point>, SampleError> {
        if count == 0 {
            return Err(SampleError::Invalid("count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(count);
        let mut rejections = 0;
        while out.len() < count {
            let p: Vec<f64> = self
                .bounds
                .iter()
                .map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) })
                .collect();
            if self.accepts(&p) {
                out.push(Point::new(p).expect("box coordinates are finite"));
                rejections = 0;
            } else {
                rejections += 1;
                if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(SampleError::DomainExhausted { accepted: out.len(), rejections });
                }
            }
        }
        Ok(out)
    }
}
