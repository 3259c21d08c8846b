//! Catalog of base laws, their standardization to mean 0 and variance 1, and
//! the norming constants `(a_n, b_n)` under which `a_n (M_n - b_n)` has an
//! extreme value limit.
//!
//! Norming constants are catalogued for the raw variable `W` and carried over
//! to `X = (W - mu) / sigma` by `a_n = sigma a_n^W`, `b_n = (b_n^W - mu) / sigma`,
//! so that `a_n (M_n^X - b_n) = a_n^W (M_n^W - b_n^W)` for coupled samples.
//!
//! All samplers use inversion of the distribution function.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::limits::EvLimit;
use crate::params::Descriptor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDistribution {
    Exponential {
        rate: f64,
    },
    /// Pareto law `P(W > w) = w^{-alpha}` on `[1, inf)`.
    ParetoTail {
        alpha: f64,
    },
    Uniform01,
    StdNormal,
}

impl BaseDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        let d = BaseDistribution::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        let d = BaseDistribution::ParetoTail { alpha };
        d.validate()?;
        Ok(d)
    }

    /// Checks parameter ranges; Pareto tails need `alpha > 2`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseDistribution::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(Error::invalid(format!(
                        "exponential rate must be > 0, got {rate}"
                    )));
                }
            }
            BaseDistribution::ParetoTail { alpha } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::invalid(format!(
                        "Pareto alpha must be > 0, got {alpha}"
                    )));
                }
                if alpha <= 2.0 {
                    return Err(Error::InfiniteOrCriticalVariance { alpha });
                }
            }
            BaseDistribution::Uniform01 | BaseDistribution::StdNormal => {}
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            BaseDistribution::Exponential { rate } => 1.0 / rate,
            BaseDistribution::ParetoTail { alpha } => alpha / (alpha - 1.0),
            BaseDistribution::Uniform01 => 0.5,
            BaseDistribution::StdNormal => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            BaseDistribution::Exponential { rate } => 1.0 / (rate * rate),
            BaseDistribution::ParetoTail { alpha } => {
                alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0))
            }
            BaseDistribution::Uniform01 => 1.0 / 12.0,
            BaseDistribution::StdNormal => 1.0,
        }
    }

    /// `x_F = sup{w : F(w) < 1}`.
    pub fn upper_endpoint(&self) -> f64 {
        match self {
            BaseDistribution::Uniform01 => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// The extreme value law whose domain of attraction contains this law.
    pub fn mda(&self) -> EvLimit {
        match *self {
            BaseDistribution::Exponential { .. } | BaseDistribution::StdNormal => EvLimit::Gumbel,
            BaseDistribution::ParetoTail { alpha } => EvLimit::Frechet { alpha },
            BaseDistribution::Uniform01 => EvLimit::Weibull { alpha: 1.0 },
        }
    }

    pub fn cdf(&self, w: f64) -> f64 {
        match *self {
            BaseDistribution::Exponential { rate } => {
                if w <= 0.0 {
                    0.0
                } else {
                    -(-rate * w).exp_m1()
                }
            }
            BaseDistribution::ParetoTail { alpha } => {
                if w <= 1.0 {
                    0.0
                } else {
                    1.0 - w.powf(-alpha)
                }
            }
            BaseDistribution::Uniform01 => w.clamp(0.0, 1.0),
            BaseDistribution::StdNormal => 0.5 * erfc(-w / std::f64::consts::SQRT_2),
        }
    }

    /// `1 - F(w)`, evaluated without cancellation in the upper tail.
    pub fn sf(&self, w: f64) -> f64 {
        match *self {
            BaseDistribution::Exponential { rate } => {
                if w <= 0.0 {
                    1.0
                } else {
                    (-rate * w).exp()
                }
            }
            BaseDistribution::ParetoTail { alpha } => {
                if w <= 1.0 {
                    1.0
                } else {
                    w.powf(-alpha)
                }
            }
            BaseDistribution::Uniform01 => (1.0 - w).clamp(0.0, 1.0),
            BaseDistribution::StdNormal => 0.5 * erfc(w / std::f64::consts::SQRT_2),
        }
    }

    /// Inverse distribution function on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            BaseDistribution::Exponential { rate } => -(-u).ln_1p() / rate,
            BaseDistribution::ParetoTail { alpha } => ((-u).ln_1p() / -alpha).exp(),
            BaseDistribution::Uniform01 => u,
            BaseDistribution::StdNormal => -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u),
        }
    }

    /// Norming constants `(a_n^W, b_n^W)` for the raw variable.
    pub fn raw_norming(&self, n: u64) -> (f64, f64) {
        let nf = n as f64;
        match *self {
            BaseDistribution::Exponential { rate } => (rate, nf.ln() / rate),
            BaseDistribution::ParetoTail { alpha } => (nf.powf(-1.0 / alpha), 0.0),
            BaseDistribution::Uniform01 => (nf, 1.0),
            BaseDistribution::StdNormal => {
                // classical constants; ln ln n needs n >= 2
                let ln_n = nf.max(2.0).ln();
                let root = (2.0 * ln_n).sqrt();
                let b = root - (ln_n.ln() + (4.0 * std::f64::consts::PI).ln()) / (2.0 * root);
                (root, b)
            }
        }
    }

    pub fn standardize(self) -> Result<StandardizedDistribution> {
        StandardizedDistribution::new(self)
    }
}

impl fmt::Display for BaseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseDistribution::Exponential { rate } => write!(f, "exp:rate={rate}"),
            BaseDistribution::ParetoTail { alpha } => write!(f, "pareto:alpha={alpha}"),
            BaseDistribution::Uniform01 => write!(f, "uniform"),
            BaseDistribution::StdNormal => write!(f, "normal"),
        }
    }
}

impl FromStr for BaseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, "distribution")?;
        match d.name.as_str() {
            "exp" | "exponential" => {
                d.only(&["rate"])?;
                BaseDistribution::exponential(d.real("rate", Some(1.0))?)
            }
            "pareto" => {
                d.only(&["alpha"])?;
                BaseDistribution::pareto(d.real("alpha", None)?)
            }
            "uniform" | "uniform01" => {
                d.only(&[])?;
                Ok(BaseDistribution::Uniform01)
            }
            "normal" | "stdnormal" | "gaussian" => {
                d.only(&[])?;
                Ok(BaseDistribution::StdNormal)
            }
            _ => Err(d.unknown_name()),
        }
    }
}

/// `(a_n, b_n)` for a fixed sample size, defining `u_n(x) = x / a_n + b_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormingConstants {
    pub n: u64,
    pub a: f64,
    pub b: f64,
}

impl NormingConstants {
    /// The level `u_n(x)`.
    pub fn level(&self, x: f64) -> f64 {
        x / self.a + self.b
    }

    /// `a_n (m - b_n)`.
    pub fn normalize(&self, m: f64) -> f64 {
        self.a * (m - self.b)
    }
}

/// `X = (W - mu) / sigma` for a catalog law `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedDistribution {
    base: BaseDistribution,
    mu: f64,
    sigma: f64,
}

impl StandardizedDistribution {
    pub fn new(base: BaseDistribution) -> Result<Self> {
        base.validate()?;
        let var = base.variance();
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::invalid(format!(
                "variance must be finite and positive, got {var}"
            )));
        }
        Ok(StandardizedDistribution {
            base,
            mu: base.mean(),
            sigma: var.sqrt(),
        })
    }

    pub fn base(&self) -> &BaseDistribution {
        &self.base
    }

    pub fn shift(&self) -> f64 {
        self.mu
    }

    pub fn scale(&self) -> f64 {
        self.sigma
    }

    pub fn limit(&self) -> EvLimit {
        self.base.mda()
    }

    /// Maps a raw value to the standardized scale.
    #[inline]
    pub fn standardize_value(&self, w: f64) -> f64 {
        (w - self.mu) / self.sigma
    }

    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        self.standardize_value(self.base.quantile(u))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(self.mu + self.sigma * x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.base.sf(self.mu + self.sigma * x)
    }

    pub fn upper_endpoint(&self) -> f64 {
        self.standardize_value(self.base.upper_endpoint())
    }

    pub fn norming_constants(&self, n: u64) -> NormingConstants {
        let n = n.max(1);
        let (a_raw, b_raw) = self.base.raw_norming(n);
        NormingConstants {
            n,
            a: self.sigma * a_raw,
            b: (b_raw - self.mu) / self.sigma,
        }
    }

    /// `n (1 - F(u_n(x)))`, which tends to `tau(x) = -ln G(x)`.
    pub fn validate_norming(&self, n: u64, x: f64) -> f64 {
        let c = self.norming_constants(n);
        n as f64 * self.sf(c.level(x))
    }

    /// `F^n(u_n(x))`, the exact law of the normalized maximum.
    pub fn max_cdf(&self, n: u64, x: f64) -> f64 {
        let c = self.norming_constants(n);
        let sf = self.sf(c.level(x));
        if sf >= 1.0 {
            return 0.0;
        }
        (n as f64 * (-sf).ln_1p()).exp()
    }
}

impl fmt::Display for StandardizedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.base.fmt(f)
    }
}

impl FromStr for StandardizedDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<BaseDistribution>()?.standardize()
    }
}

/// One representative per domain of attraction, plus the normal law.
pub fn catalog() -> Vec<StandardizedDistribution> {
    [
        BaseDistribution::Exponential { rate: 1.0 },
        BaseDistribution::Uniform01,
        BaseDistribution::ParetoTail { alpha: 3.0 },
        BaseDistribution::StdNormal,
    ]
    .into_iter()
    .map(|b| b.standardize().expect("catalog laws are valid"))
    .collect()
}

/// `len` equally spaced points spanning the 1% to 99% quantiles of `G`.
pub fn default_x_grid(limit: &EvLimit, len: usize) -> Vec<f64> {
    let lo = limit.quantile(0.01);
    let hi = limit.quantile(0.99);
    if len == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..len)
        .map(|i| lo + (hi - lo) * i as f64 / (len - 1) as f64)
        .collect()
}
