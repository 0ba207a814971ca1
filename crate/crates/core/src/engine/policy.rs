//! Seeded sources of non-determinism: sum branch choice and star delays.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

/// Uniform choice among `items`, which must not be empty.
pub fn choose<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    assert!(!items.is_empty(), "choose needs at least one item");
    &items[rng.random_range(0..items.len())]
}

/// How long `star P` waits before installing `P`.
#[derive(Debug, Clone, PartialEq)]
pub enum StarPolicy {
    Fixed(u64),
    /// `P(d) = p (1-p)^d`
    Geometric(f64),
    /// Delays taken in order, cycling.
    Schedule(Vec<u64>),
}

impl Default for StarPolicy {
    fn default() -> Self {
        StarPolicy::Geometric(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid star policy `{0}` (expected fixed:K, geometric:P with 0 < P <= 1, or schedule:K1,K2,...)")]
pub struct PolicyParseError(pub String);

impl FromStr for StarPolicy {
    type Err = PolicyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PolicyParseError(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(err)?;
        match kind.trim() {
            "fixed" => arg.trim().parse().map(StarPolicy::Fixed).map_err(|_| err()),
            "geometric" => {
                let p: f64 = arg.trim().parse().map_err(|_| err())?;
                if p > 0.0 && p <= 1.0 {
                    Ok(StarPolicy::Geometric(p))
                } else {
                    Err(err())
                }
            }
            "schedule" => {
                let ds: Result<Vec<u64>, _> = arg.split(',').map(|d| d.trim().parse()).collect();
                match ds {
                    Ok(ds) if !ds.is_empty() => Ok(StarPolicy::Schedule(ds)),
                    _ => Err(err()),
                }
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for StarPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarPolicy::Fixed(k) => write!(f, "fixed:{k}"),
            StarPolicy::Geometric(p) => write!(f, "geometric:{p}"),
            StarPolicy::Schedule(ds) => {
                let parts: Vec<String> = ds.iter().map(u64::to_string).collect();
                write!(f, "schedule:{}", parts.join(","))
            }
        }
    }
}

/// A star policy plus the cursor a schedule needs.
#[derive(Debug, Clone)]
pub struct StarSampler {
    policy: StarPolicy,
    cursor: usize,
}

impl StarSampler {
    pub fn new(policy: StarPolicy) -> Self {
        StarSampler { policy, cursor: 0 }
    }

    pub fn policy(&self) -> &StarPolicy {
        &self.policy
    }

    pub fn delay<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        match &self.policy {
            StarPolicy::Fixed(k) => *k,
            StarPolicy::Geometric(p) => Geometric::new(*p)
                .expect("probability validated on construction")
                .sample(rng),
            StarPolicy::Schedule(ds) => {
                let d = ds[self.cursor % ds.len()];
                self.cursor += 1;
                d
            }
        }
    }
}
