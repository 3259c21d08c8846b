//! Exact evaluation of the limit laws.
//!
//! Three extreme value families are supported:
//!
//! ```text
//! Gumbel      G(x) = exp(-e^{-x})
//! Frechet(a)  G(x) = exp(-x^{-a})       x > 0,  0 otherwise   (a > 2)
//! Weibull(a)  G(x) = exp(-(-x)^{a})     x <= 0, 1 otherwise   (a > 0)
//! ```
//!
//! The intensity `tau(x) = -ln G(x)` is the mean number of exceedances of
//! the level `u_n(x)` in the Poisson limit. Joint laws of several order
//! statistics reduce to probabilities of count constraints on nested Poisson
//! processes, which [`count_constraint_prob`] evaluates exactly by dynamic
//! programming over independent Poisson increments.

use std::fmt;
use std::str::FromStr;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::params::Descriptor;
use crate::stats::poisson_pmf_table;

/// One of the three extreme value limit laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvLimit {
    Gumbel,
    Frechet { alpha: f64 },
    Weibull { alpha: f64 },
}

impl EvLimit {
    /// Frechet law with tail index `alpha`; only `alpha > 2` is admitted.
    pub fn frechet(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "Frechet alpha must be a positive finite number, got {alpha}"
            )));
        }
        if alpha <= 2.0 {
            return Err(Error::InfiniteOrCriticalVariance { alpha });
        }
        Ok(EvLimit::Frechet { alpha })
    }

    pub fn weibull(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "Weibull alpha must be a positive finite number, got {alpha}"
            )));
        }
        Ok(EvLimit::Weibull { alpha })
    }

    /// `G(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            EvLimit::Gumbel => (-(-x).exp()).exp(),
            EvLimit::Frechet { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-alpha)).exp()
                }
            }
            EvLimit::Weibull { alpha } => {
                if x > 0.0 {
                    1.0
                } else {
                    (-(-x).powf(alpha)).exp()
                }
            }
        }
    }

    /// `tau(x) = -ln G(x)`, computed directly so that it stays accurate in
    /// both tails. `+inf` where `G(x) = 0`, `0` where `G(x) = 1`.
    pub fn tau(&self, x: f64) -> f64 {
        match *self {
            EvLimit::Gumbel => (-x).exp(),
            EvLimit::Frechet { alpha } => {
                if x <= 0.0 {
                    f64::INFINITY
                } else {
                    x.powf(-alpha)
                }
            }
            EvLimit::Weibull { alpha } => {
                if x > 0.0 {
                    0.0
                } else {
                    (-x).powf(alpha)
                }
            }
        }
    }

    /// The level `x` with `tau(x) = t`, for `t > 0`.
    pub fn level_for_tau(&self, t: f64) -> f64 {
        match *self {
            EvLimit::Gumbel => -t.ln(),
            EvLimit::Frechet { alpha } => t.powf(-1.0 / alpha),
            EvLimit::Weibull { alpha } => -t.powf(1.0 / alpha),
        }
    }

    /// Quantile of `G` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        self.level_for_tau(-p.ln())
    }
}

impl fmt::Display for EvLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvLimit::Gumbel => write!(f, "gumbel"),
            EvLimit::Frechet { alpha } => write!(f, "frechet:alpha={alpha}"),
            EvLimit::Weibull { alpha } => write!(f, "weibull:alpha={alpha}"),
        }
    }
}

impl FromStr for EvLimit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let d = Descriptor::parse(s, "limit")?;
        match d.name.as_str() {
            "gumbel" | "lambda" => {
                d.only(&[])?;
                Ok(EvLimit::Gumbel)
            }
            "frechet" | "phi" => {
                d.only(&["alpha"])?;
                EvLimit::frechet(d.real("alpha", None)?)
            }
            "weibull" | "psi" => {
                d.only(&["alpha"])?;
                EvLimit::weibull(d.real("alpha", None)?)
            }
            _ => Err(d.unknown_name()),
        }
    }
}

/// Standard normal distribution function, absolute error below 1e-15.
pub fn std_normal_cdf(y: f64) -> f64 {
    0.5 * erfc(-y / std::f64::consts::SQRT_2)
}

/// Limit of `P(a_n(M_n^(k) - b_n) <= x, S_n/sqrt(n) <= y)`:
/// `G(x) * sum_{i<k} tau(x)^i / i! * Phi(y)`.
///
/// `y = +inf` gives the marginal law of the k-th maximum; `k = 0` is the
/// empty event and returns 0.
pub fn kth_max_joint_cdf(limit: &EvLimit, k: u32, x: f64, y: f64) -> f64 {
    let g = limit.cdf(x);
    if g == 0.0 || k == 0 {
        return 0.0;
    }
    let tau = limit.tau(x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..k {
        term *= tau / f64::from(i);
        sum += term;
    }
    (g * sum * std_normal_cdf(y)).min(1.0)
}

/// Levels `x_1 >= ... >= x_s` together with their intensities
/// `tau_1 <= ... <= tau_s`, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelVector {
    xs: Option<Vec<f64>>,
    taus: Vec<f64>,
}

impl LevelVector {
    pub fn new(limit: &EvLimit, xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Empty("level vector"));
        }
        if let Some(w) = xs.windows(2).find(|w| w[0] < w[1]) {
            return Err(Error::NonMonotoneLevels(format!("{} < {}", w[0], w[1])));
        }
        let mut taus = Vec::with_capacity(xs.len());
        for &x in xs {
            let t = limit.tau(x);
            if !t.is_finite() {
                return Err(Error::InfiniteIntensity { x });
            }
            taus.push(t);
        }
        Ok(LevelVector {
            xs: Some(xs.to_vec()),
            taus,
        })
    }

    /// Levels given directly by their intensities.
    pub fn from_taus(taus: &[f64]) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::Empty("level vector"));
        }
        for &t in taus {
            if !t.is_finite() {
                return Err(Error::InfiniteIntensity { x: f64::NAN });
            }
            if t < 0.0 {
                return Err(Error::invalid(format!("negative intensity {t}")));
            }
        }
        if let Some(w) = taus.windows(2).find(|w| w[0] > w[1]) {
            return Err(Error::NonMonotoneLevels(format!(
                "intensity {} > {}",
                w[0], w[1]
            )));
        }
        Ok(LevelVector {
            xs: None,
            taus: taus.to_vec(),
        })
    }

    pub fn xs(&self) -> Option<&[f64]> {
        self.xs.as_deref()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Exact `P(N^(1) <= c_1, ..., N^(s) <= c_s)` for the nested Poisson counts
/// on `(0, 1]`.
///
/// The increments `D_1 = N^(1)`, `D_j = N^(j) - N^(j-1)` are independent
/// Poisson with means `tau_1, tau_2 - tau_1, ...`, so the event is tracked by
/// the distribution of the running total, truncated at each cap. There is no
/// truncation error: states above a cap carry no probability for the event.
pub fn count_constraint_prob(levels: &LevelVector, caps: &[u32]) -> Result<f64> {
    if caps.len() != levels.len() {
        return Err(Error::ShapeMismatch {
            left: levels.len(),
            right: caps.len(),
        });
    }
    if caps.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NonMonotoneCaps(caps.to_vec()));
    }
    let taus = levels.taus();
    let top = caps[caps.len() - 1] as usize;

    let mut mass = vec![0.0; top + 1];
    let first = poisson_pmf_table(taus[0], caps[0] as usize);
    mass[..first.len()].copy_from_slice(&first);
    let mut reach = caps[0] as usize;

    let mut next = vec![0.0; top + 1];
    for j in 1..taus.len() {
        let cap = caps[j] as usize;
        let inc = poisson_pmf_table(taus[j] - taus[j - 1], cap);
        for (t_new, slot) in next.iter_mut().enumerate().take(cap + 1) {
            let mut acc = 0.0;
            for t in 0..=t_new.min(reach) {
                acc += mass[t] * inc[t_new - t];
            }
            *slot = acc;
        }
        next[cap + 1..].iter_mut().for_each(|v| *v = 0.0);
        std::mem::swap(&mut mass, &mut next);
        reach = cap;
    }
    Ok(mass.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// Limit of `P(a_n(M_n^(1) - b_n) <= x_1, ..., a_n(M_n^(k) - b_n) <= x_k,
/// S_n/sqrt(n) <= y)`, i.e. `H(x_1, ..., x_k) * Phi(y)`.
///
/// Thresholds are first replaced by their running minima; since the order
/// statistics are nonincreasing this leaves the event unchanged and makes
/// the levels nested. `H` is then the probability that the j-th level is
/// exceeded at most `j - 1` times.
pub fn top_k_joint_cdf(limit: &EvLimit, xs: &[f64], y: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("top-k thresholds"));
    }
    let mut effective = Vec::with_capacity(xs.len());
    let mut running = f64::INFINITY;
    for &x in xs {
        running = running.min(x);
        effective.push(running);
    }
    if limit.cdf(running) == 0.0 {
        return Ok(0.0);
    }
    let levels = LevelVector::new(limit, &effective)?;
    let caps: Vec<u32> = (0..xs.len() as u32).collect();
    Ok(count_constraint_prob(&levels, &caps)? * std_normal_cdf(y))
}

/// Closed form for the pair (k-th, l-th maximum) jointly with the sum:
///
/// ```text
/// sum_{i<k} sum_{i<=j<l} G(x2) tau1^i (tau2 - tau1)^(j-i) / (i! (j-i)!) * Phi(y)
/// ```
///
/// with `0^0 = 1`. Requires `l > k >= 1` and `x1 >= x2`.
pub fn two_level_joint_cdf(
    limit: &EvLimit,
    k: u32,
    l: u32,
    x1: f64,
    x2: f64,
    y: f64,
) -> Result<f64> {
    if k < 1 || l <= k {
        return Err(Error::invalid(format!("need l > k >= 1, got k={k}, l={l}")));
    }
    if x1 < x2 {
        return Err(Error::NonMonotoneLevels(format!("x1 = {x1} < x2 = {x2}")));
    }
    let g2 = limit.cdf(x2);
    if g2 == 0.0 {
        return Ok(0.0);
    }
    let tau1 = limit.tau(x1);
    let gap = (limit.tau(x2) - tau1).max(0.0);

    // inner[m] = gap^m / m!
    let mut inner = Vec::with_capacity(l as usize);
    let mut term = 1.0;
    for m in 0..l {
        if m > 0 {
            term *= gap / f64::from(m);
        }
        inner.push(term);
    }

    let mut total = 0.0;
    let mut outer = 1.0;
    for i in 0..k {
        if i > 0 {
            outer *= tau1 / f64::from(i);
        }
        let tail: f64 = inner[..(l - i) as usize].iter().sum();
        total += outer * tail;
    }
    Ok((g2 * total * std_normal_cdf(y)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    const EM1: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn cdf_examples() {
        assert_abs_diff_eq!(EvLimit::Gumbel.cdf(0.0), EM1, epsilon = 1e-15);
        assert_eq!(EvLimit::frechet(3.0).unwrap().cdf(-1.0), 0.0);
        assert_eq!(EvLimit::weibull(1.0).unwrap().cdf(0.5), 1.0);
    }

    #[test]
    fn tau_examples() {
        assert_abs_diff_eq!(EvLimit::Gumbel.tau(0.0), 1.0);
        assert_abs_diff_eq!(
            EvLimit::frechet(3.0).unwrap().tau(2.0),
            0.125,
            epsilon = 1e-15
        );
        let w = EvLimit::weibull(1.0).unwrap();
        assert_abs_diff_eq!(w.tau(-1.0), 1.0);
        assert_eq!(w.tau(0.5), 0.0);
        assert_eq!(EvLimit::frechet(3.0).unwrap().tau(0.0), f64::INFINITY);
    }

    #[test]
    fn frechet_restriction() {
        assert_eq!(
            EvLimit::frechet(2.0),
            Err(Error::InfiniteOrCriticalVariance { alpha: 2.0 })
        );
        assert!(matches!(
            "frechet:alpha=1.5".parse::<EvLimit>(),
            Err(Error::InfiniteOrCriticalVariance { .. })
        ));
        assert!(EvLimit::weibull(0.0).is_err());
        assert!("frechet".parse::<EvLimit>().is_err());
        assert!("gamma".parse::<EvLimit>().is_err());
        assert_eq!(
            "weibull:alpha=1".parse::<EvLimit>().unwrap(),
            EvLimit::Weibull { alpha: 1.0 }
        );
    }

    #[test]
    fn quantile_inverts_cdf() {
        for limit in [
            EvLimit::Gumbel,
            EvLimit::frechet(3.0).unwrap(),
            EvLimit::weibull(1.5).unwrap(),
        ] {
            for p in [0.01, 0.3, 0.5, 0.99] {
                assert_abs_diff_eq!(limit.cdf(limit.quantile(p)), p, epsilon = 1e-12);
            }
        }
    }

    /// Composite Simpson on the normal density, the independent route for Phi.
    fn phi_by_quadrature(y: f64) -> f64 {
        let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let steps = 200_000;
        let h = y / steps as f64;
        let mut s = density(0.0) + density(y);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn std_normal_cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_abs_diff_eq!(std_normal_cdf(40.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(std_normal_cdf(1.959964), 0.975, epsilon = 1e-6);
        for y in [-3.0, -1.0, 0.3, 1.959964, 2.5] {
            assert_abs_diff_eq!(std_normal_cdf(y), phi_by_quadrature(y), epsilon = 1e-10);
        }
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn kth_max_examples() {
        let g = EvLimit::Gumbel;
        assert_abs_diff_eq!(
            kth_max_joint_cdf(&g, 1, 0.0, f64::INFINITY),
            EM1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(kth_max_joint_cdf(&g, 2, 0.0, 0.0), EM1, epsilon = 1e-15);
        let w = EvLimit::weibull(1.0).unwrap();
        assert_eq!(kth_max_joint_cdf(&w, 3, 0.1, 0.0), 0.5);
        assert_eq!(kth_max_joint_cdf(&g, 0, 0.0, 0.0), 0.0);
        let f = EvLimit::frechet(3.0).unwrap();
        assert_eq!(kth_max_joint_cdf(&f, 2, -1.0, 1.0), 0.0);
    }

    /// Direct enumeration over increment tuples with explicit factorial pmfs.
    fn enumerate(taus: &[f64], caps: &[u32]) -> f64 {
        fn pmf(lambda: f64, m: u32) -> f64 {
            let fact: f64 = (1..=m).map(f64::from).product();
            if lambda == 0.0 {
                return if m == 0 { 1.0 } else { 0.0 };
            }
            lambda.powi(m as i32) * (-lambda).exp() / fact
        }
        fn rec(taus: &[f64], caps: &[u32], j: usize, prev_tau: f64, total: u32) -> f64 {
            if j == taus.len() {
                return 1.0;
            }
            let lambda = taus[j] - prev_tau;
            let mut acc = 0.0;
            let mut d = 0;
            loop {
                let p = pmf(lambda, d);
                if total + d <= caps[j] {
                    acc += p * rec(taus, caps, j + 1, taus[j], total + d);
                } else {
                    break;
                }
                if p < 1e-15 && f64::from(d) > lambda {
                    break;
                }
                d += 1;
            }
            acc
        }
        rec(taus, caps, 0, 0.0, 0)
    }

    #[test]
    fn count_constraint_examples() {
        let one = LevelVector::from_taus(&[1.0]).unwrap();
        assert_abs_diff_eq!(
            count_constraint_prob(&one, &[0]).unwrap(),
            EM1,
            epsilon = 1e-15
        );

        let gl = LevelVector::new(&EvLimit::Gumbel, &[1.0, 0.0]).unwrap();
        let expect = EM1 * (2.0 - EM1);
        assert_abs_diff_eq!(expect, 0.600_423, epsilon = 1e-6);
        assert_abs_diff_eq!(
            count_constraint_prob(&gl, &[0, 1]).unwrap(),
            expect,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(enumerate(gl.taus(), &[0, 1]), expect, epsilon = 1e-14);

        let eq = LevelVector::from_taus(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            count_constraint_prob(&eq, &[0, 5]).unwrap(),
            EM1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn count_constraint_errors() {
        let lv = LevelVector::from_taus(&[0.5, 1.0]).unwrap();
        assert_eq!(
            count_constraint_prob(&lv, &[2, 1]),
            Err(Error::NonMonotoneCaps(vec![2, 1]))
        );
        assert!(count_constraint_prob(&lv, &[1]).is_err());
        assert!(LevelVector::from_taus(&[f64::INFINITY]).is_err());
        assert!(LevelVector::from_taus(&[1.0, 0.5]).is_err());
        let f = EvLimit::frechet(3.0).unwrap();
        assert!(matches!(
            LevelVector::new(&f, &[1.0, -0.5]),
            Err(Error::InfiniteIntensity { .. })
        ));
        assert!(LevelVector::new(&f, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn dp_matches_enumeration_small_cases() {
        let tau_sets: [&[f64]; 5] = [
            &[0.3],
            &[0.2, 1.1],
            &[0.5, 0.5, 2.0],
            &[0.1, 0.9, 1.7],
            &[1.0, 2.5, 4.0],
        ];
        for taus in tau_sets {
            let lv = LevelVector::from_taus(taus).unwrap();
            let s = taus.len();
            // every nondecreasing cap vector with entries <= 4
            let mut caps = vec![0u32; s];
            loop {
                if caps.windows(2).all(|w| w[0] <= w[1]) {
                    let dp = count_constraint_prob(&lv, &caps).unwrap();
                    let brute = enumerate(taus, &caps);
                    assert_abs_diff_eq!(dp, brute, epsilon = 1e-12);
                }
                let mut i = 0;
                while i < s {
                    caps[i] += 1;
                    if caps[i] <= 4 {
                        break;
                    }
                    caps[i] = 0;
                    i += 1;
                }
                if i == s {
                    break;
                }
            }
        }
    }

    #[test]
    fn top_k_examples() {
        let g = EvLimit::Gumbel;
        for y in [-1.0, 0.0, 2.0] {
            assert_abs_diff_eq!(
                top_k_joint_cdf(&g, &[0.7], y).unwrap(),
                kth_max_joint_cdf(&g, 1, 0.7, y),
                epsilon = 1e-15
            );
        }
        // a later, looser threshold is dominated by the earlier one
        assert_abs_diff_eq!(
            top_k_joint_cdf(&g, &[0.0, 5.0], f64::INFINITY).unwrap(),
            EM1,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            top_k_joint_cdf(&g, &[f64::INFINITY, 0.0], f64::INFINITY).unwrap(),
            2.0 / E,
            epsilon = 1e-14
        );
        let v = top_k_joint_cdf(&g, &[1.0, 0.0], f64::INFINITY).unwrap();
        assert_abs_diff_eq!(v, EM1 * (2.0 - EM1), epsilon = 1e-14);
        let cf = two_level_joint_cdf(&g, 1, 2, 1.0, 0.0, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(v, cf, epsilon = 1e-14);
        let f = EvLimit::frechet(3.0).unwrap();
        assert_eq!(top_k_joint_cdf(&f, &[1.0, -1.0], 0.0).unwrap(), 0.0);
        assert!(top_k_joint_cdf(&g, &[], 0.0).is_err());
    }

    #[test]
    fn two_level_examples() {
        let g = EvLimit::Gumbel;
        assert_abs_diff_eq!(
            two_level_joint_cdf(&g, 1, 2, 0.0, 0.0, f64::INFINITY).unwrap(),
            EM1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            two_level_joint_cdf(&g, 1, 2, 1.0, 0.0, f64::INFINITY).unwrap(),
            EM1 * (2.0 - EM1),
            epsilon = 1e-14
        );
        let w = EvLimit::weibull(1.0).unwrap();
        assert_eq!(two_level_joint_cdf(&w, 1, 2, 0.5, 0.2, 0.0).unwrap(), 0.5);
        assert!(two_level_joint_cdf(&g, 1, 2, 0.0, 1.0, 0.0).is_err());
        assert!(two_level_joint_cdf(&g, 2, 2, 1.0, 0.0, 0.0).is_err());
        assert!(two_level_joint_cdf(&g, 0, 2, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn dp_closed_form_agree_on_grid() {
        let limits = [
            EvLimit::Gumbel,
            EvLimit::frechet(3.0).unwrap(),
            EvLimit::weibull(1.0).unwrap(),
        ];
        for limit in limits {
            let pts: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|&p| limit.quantile(p)).collect();
            for k in 1..5u32 {
                for l in (k + 1)..=5 {
                    for &x1 in &pts {
                        for &x2 in &pts {
                            let (hi, lo) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
                            let lv = LevelVector::new(&limit, &[hi, lo]).unwrap();
                            let dp = count_constraint_prob(&lv, &[k - 1, l - 1]).unwrap();
                            let cf =
                                two_level_joint_cdf(&limit, k, l, hi, lo, f64::INFINITY).unwrap();
                            assert_abs_diff_eq!(dp, cf, epsilon = 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn collapse_to_kth_max() {
        let limits = [
            EvLimit::Gumbel,
            EvLimit::frechet(4.0).unwrap(),
            EvLimit::weibull(2.0).unwrap(),
        ];
        for limit in limits {
            for p in [0.05, 0.4, 0.8] {
                let x = limit.quantile(p);
                for k in 1..=5usize {
                    // equal thresholds bind only through the largest
                    let equal = vec![x; k];
                    // only the last threshold binds
                    let mut last = vec![f64::INFINITY; k];
                    last[k - 1] = x;
                    for y in [-1.0, 0.5] {
                        assert_abs_diff_eq!(
                            top_k_joint_cdf(&limit, &equal, y).unwrap(),
                            kth_max_joint_cdf(&limit, 1, x, y),
                            epsilon = 1e-12
                        );
                        assert_abs_diff_eq!(
                            top_k_joint_cdf(&limit, &last, y).unwrap(),
                            kth_max_joint_cdf(&limit, k as u32, x, y),
                            epsilon = 1e-12
                        );
                    }
                }
            }
        }
    }
}
