//! Catalog of sampling laws with exact moment formulas.
//!
//! Closed forms cover every family's truncated second moment. Absolute
//! central moments are analytic except for Pareto, which falls back to
//! adaptive quadrature. The density-based numeric routines are public so the
//! closed forms can be cross-checked against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::special::{self, gamma, standard_normal_cdf, standard_normal_pdf, standard_normal_quantile};

/// Absolute tolerance for quadrature fallbacks.
pub const QUAD_TOL: f64 = 1e-10;

/// An i.i.d. law, serialized as `{"family": "...", ...parameters}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Bernoulli { p: f64 },
    Rademacher,
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma2: f64 },
    Exponential { lambda: f64 },
    /// `offset + scale * X` for `X ~ base`. A zero scale gives a point mass.
    Shifted {
        base: Box<DistributionSpec>,
        offset: f64,
        scale: f64,
    },
    /// Pareto with unit scale: density `α x^{-α-1}` on `[1, ∞)`.
    Pareto { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportKind {
    DiscreteFinite,
    Continuous,
}

impl DistributionSpec {
    pub fn bernoulli(p: f64) -> Result<Self> {
        let d = Self::Bernoulli { p };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mu: f64, sigma2: f64) -> Result<Self> {
        let d = Self::Normal { mu, sigma2 };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        let d = Self::Exponential { lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        let d = Self::Pareto { alpha };
        d.validate()?;
        Ok(d)
    }

    pub fn shifted(base: DistributionSpec, offset: f64, scale: f64) -> Result<Self> {
        let d = Self::Shifted { base: Box::new(base), offset, scale };
        d.validate()?;
        Ok(d)
    }

    /// Point mass at `c`.
    pub fn point_mass(c: f64) -> Self {
        Self::Shifted { base: Box::new(Self::Rademacher), offset: c, scale: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            Self::Bernoulli { p } if !(*p > 0.0 && *p < 1.0) => bad(format!("bernoulli p must lie in (0, 1), got {p}")),
            Self::Uniform { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad(format!("uniform requires finite a < b, got a = {a}, b = {b}"))
            }
            Self::Normal { mu, sigma2 } if !(mu.is_finite() && sigma2.is_finite() && *sigma2 > 0.0) => {
                bad(format!("normal requires finite mu and sigma2 > 0, got mu = {mu}, sigma2 = {sigma2}"))
            }
            Self::Exponential { lambda } if !(lambda.is_finite() && *lambda > 0.0) => {
                bad(format!("exponential lambda must be positive, got {lambda}"))
            }
            Self::Pareto { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                bad(format!("pareto alpha must be positive, got {alpha}"))
            }
            Self::Shifted { base, offset, scale } => {
                if !(offset.is_finite() && scale.is_finite()) {
                    return bad(format!("shifted requires finite offset and scale, got {offset}, {scale}"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable name, e.g. `Normal(2, 1)`.
    pub fn name(&self) -> String {
        match self {
            Self::Bernoulli { p } => format!("Bernoulli({p})"),
            Self::Rademacher => "Rademacher".to_string(),
            Self::Uniform { a, b } => format!("Uniform({a}, {b})"),
            Self::Normal { mu, sigma2 } => format!("Normal({mu}, {sigma2})"),
            Self::Exponential { lambda } => format!("Exponential({lambda})"),
            Self::Shifted { base, offset, scale } => format!("{offset} + {scale}*{}", base.name()),
            Self::Pareto { alpha } => format!("Pareto({alpha})"),
        }
    }

    pub fn support_kind(&self) -> SupportKind {
        match self {
            Self::Bernoulli { .. } | Self::Rademacher => SupportKind::DiscreteFinite,
            Self::Shifted { scale, .. } if *scale == 0.0 => SupportKind::DiscreteFinite,
            Self::Shifted { base, .. } => base.support_kind(),
            _ => SupportKind::Continuous,
        }
    }

    /// Mean; `+∞` when it diverges (Pareto with `α ≤ 1`).
    pub fn mean(&self) -> f64 {
        match self {
            Self::Bernoulli { p } => *p,
            Self::Rademacher => 0.0,
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Normal { mu, .. } => *mu,
            Self::Exponential { lambda } => 1.0 / lambda,
            Self::Shifted { scale, offset, .. } if *scale == 0.0 => *offset,
            Self::Shifted { base, offset, scale } => offset + scale * base.mean(),
            Self::Pareto { alpha } => {
                if *alpha > 1.0 {
                    alpha / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Variance; `+∞` flags an infinite variance (Pareto with `α ≤ 2`).
    pub fn variance(&self) -> f64 {
        match self {
            Self::Bernoulli { p } => p * (1.0 - p),
            Self::Rademacher => 1.0,
            Self::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Self::Normal { sigma2, .. } => *sigma2,
            Self::Exponential { lambda } => 1.0 / (lambda * lambda),
            Self::Shifted { scale, .. } if *scale == 0.0 => 0.0,
            Self::Shifted { base, scale, .. } => scale * scale * base.variance(),
            Self::Pareto { alpha } => {
                if *alpha > 2.0 {
                    alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0))
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn has_finite_mean(&self) -> bool {
        self.mean().is_finite()
    }

    pub fn has_finite_variance(&self) -> bool {
        self.variance().is_finite()
    }

    pub fn require_mean(&self) -> Result<f64> {
        let m = self.mean();
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::MeanRequired(self.name()))
        }
    }

    pub fn require_variance(&self) -> Result<f64> {
        let v = self.variance();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::VarianceRequired(format!("{} has infinite variance", self.name())))
        }
    }

    /// Atoms `(value, probability)` of a finitely supported law.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            Self::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            Self::Shifted { offset, scale, .. } if *scale == 0.0 => Some(vec![(*offset, 1.0)]),
            Self::Shifted { base, offset, scale } => base
                .atoms()
                .map(|atoms| atoms.into_iter().map(|(v, q)| (offset + scale * v, q)).collect()),
            _ => None,
        }
    }

    /// Support interval `(lo, hi)`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Bernoulli { .. } => (0.0, 1.0),
            Self::Rademacher => (-1.0, 1.0),
            Self::Uniform { a, b } => (*a, *b),
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Pareto { .. } => (1.0, f64::INFINITY),
            Self::Shifted { base, offset, scale } => {
                let (lo, hi) = base.support();
                if *scale == 0.0 {
                    (*offset, *offset)
                } else if *scale > 0.0 {
                    (offset + scale * lo, offset + scale * hi)
                } else {
                    (offset + scale * hi, offset + scale * lo)
                }
            }
        }
    }

    /// Density of a continuous law; `None` for discrete laws.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Self::Bernoulli { .. } | Self::Rademacher => None,
            Self::Uniform { a, b } => Some(if x >= *a && x <= *b { 1.0 / (b - a) } else { 0.0 }),
            Self::Normal { mu, sigma2 } => {
                let s = sigma2.sqrt();
                Some(standard_normal_pdf((x - mu) / s) / s)
            }
            Self::Exponential { lambda } => Some(if x >= 0.0 { lambda * (-lambda * x).exp() } else { 0.0 }),
            Self::Pareto { alpha } => Some(if x >= 1.0 { alpha * x.powf(-alpha - 1.0) } else { 0.0 }),
            Self::Shifted { scale, .. } if *scale == 0.0 => None,
            Self::Shifted { base, offset, scale } => base.density((x - offset) / scale).map(|d| d / scale.abs()),
        }
    }

    /// One variate from exactly one uniform draw.
    #[inline]
    pub fn draw(&self, stream: &mut Stream) -> f64 {
        let u = stream.next_open01();
        self.from_uniform(u)
    }

    /// Quantile-style transform of a uniform on (0, 1).
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        match self {
            Self::Bernoulli { p } => {
                if u < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            Self::Uniform { a, b } => a + (b - a) * u,
            Self::Normal { mu, sigma2 } => mu + sigma2.sqrt() * standard_normal_quantile(u),
            Self::Exponential { lambda } => -u.ln() / lambda,
            Self::Pareto { alpha } => u.powf(-1.0 / alpha),
            Self::Shifted { scale, offset, .. } if *scale == 0.0 => *offset,
            Self::Shifted { base, offset, scale } => offset + scale * base.from_uniform(u),
        }
    }

    /// Fill `out` with i.i.d. draws from `stream`.
    pub fn fill(&self, stream: &mut Stream, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.draw(stream);
        }
    }

    /// `n` i.i.d. draws, deterministic in `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        self.validate()?;
        let mut stream = Stream::derive(seed, "sample", 0);
        let mut out = vec![0.0; n];
        self.fill(&mut stream, &mut out);
        Ok(out)
    }

    /// `E[(X - μ)² · 1{|X - μ| > t}]`, strict inequality.
    pub fn truncated_second_moment(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("truncation level must be >= 0, got {t}")));
        }
        let mu = self.mean();
        self.require_variance()?;
        if let Some(atoms) = self.atoms() {
            return Ok(atoms
                .iter()
                .filter(|(v, _)| (v - mu).abs() > t)
                .map(|(v, q)| q * (v - mu) * (v - mu))
                // An empty f64 sum is -0.0.
                .fold(0.0, |a, b| a + b));
        }
        Ok(match self {
            Self::Uniform { a, b } => {
                let h = 0.5 * (b - a);
                if t >= h {
                    0.0
                } else {
                    (h * h * h - t * t * t) / (3.0 * h)
                }
            }
            Self::Normal { sigma2, .. } => {
                let s = t / sigma2.sqrt();
                2.0 * sigma2 * (s * standard_normal_pdf(s) + standard_normal_cdf(-s))
            }
            Self::Exponential { lambda } => {
                // Y = λX ~ Exp(1), ∫_c^∞ (y-1)² e^{-y} dy = e^{-c}(c² + 1).
                let s = lambda * t;
                let tail = |c: f64| (-c).exp() * (c * c + 1.0);
                let upper = tail(1.0 + s);
                let lower = if s < 1.0 { 1.0 - tail(1.0 - s) } else { 0.0 };
                (upper + lower) / (lambda * lambda)
            }
            Self::Pareto { alpha } => {
                let a = *alpha;
                let anti = |x: f64| {
                    a * (x.powf(2.0 - a) / (2.0 - a) - 2.0 * mu * x.powf(1.0 - a) / (1.0 - a) - mu * mu * x.powf(-a) / a)
                };
                let upper = -anti((mu + t).max(1.0));
                let lower = if mu - t > 1.0 { anti(mu - t) - anti(1.0) } else { 0.0 };
                upper + lower
            }
            Self::Shifted { base, scale, .. } => scale * scale * base.truncated_second_moment(t / scale.abs())?,
            Self::Bernoulli { .. } | Self::Rademacher => unreachable!("discrete laws handled above"),
        })
    }

    /// `E|X - μ|^order` for `order > 2`.
    pub fn abs_central_moment(&self, order: f64) -> Result<f64> {
        if !(order > 2.0) || !order.is_finite() {
            return Err(Error::InvalidArgument(format!("moment order must be a finite real > 2, got {order}")));
        }
        self.abs_central_moment_unchecked(order)
    }

    fn abs_central_moment_unchecked(&self, order: f64) -> Result<f64> {
        let mu = self.mean();
        if let Some(atoms) = self.atoms() {
            return Ok(atoms.iter().map(|(v, q)| q * (v - mu).abs().powf(order)).sum());
        }
        Ok(match self {
            Self::Uniform { a, b } => (0.5 * (b - a)).powf(order) / (order + 1.0),
            Self::Normal { sigma2, .. } => {
                sigma2.powf(0.5 * order) * 2f64.powf(0.5 * order) * gamma(0.5 * (order + 1.0))
                    / std::f64::consts::PI.sqrt()
            }
            Self::Exponential { lambda } => {
                // E|Y - 1|^r = e^{-1}[Γ(r + 1) + Σ_j 1 / (j! (r + j + 1))] for Y ~ Exp(1).
                let mut series = 0.0;
                let mut fact = 1.0;
                for j in 0..60 {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    series += 1.0 / (fact * (order + j as f64 + 1.0));
                }
                (gamma(order + 1.0) + series) / std::f64::consts::E / lambda.powf(order)
            }
            Self::Pareto { alpha } => {
                if order >= *alpha {
                    return Err(Error::DivergentMoment { family: self.name(), order });
                }
                self.numeric_abs_central_moment(order)?
            }
            Self::Shifted { base, scale, .. } => scale.abs().powf(order) * base.abs_central_moment_unchecked(order)?,
            Self::Bernoulli { .. } | Self::Rademacher => unreachable!("discrete laws handled above"),
        })
    }

    /// Density-based quadrature for `E[(X - μ)² · 1{|X - μ| > t}]`.
    pub fn numeric_truncated_second_moment(&self, t: f64) -> Result<f64> {
        self.require_variance()?;
        let mu = self.mean();
        let (lo, hi) = self.support();
        let f = |x: f64| (x - mu) * (x - mu) * self.density(x).unwrap_or(0.0);
        let left = integrate_region(&f, lo, (mu - t).min(hi));
        let right = integrate_region(&f, (mu + t).max(lo), hi);
        self.continuous_or_err()?;
        Ok(left + right)
    }

    /// Density-based quadrature for `E|X - μ|^order`.
    pub fn numeric_abs_central_moment(&self, order: f64) -> Result<f64> {
        self.continuous_or_err()?;
        let mu = self.require_mean()?;
        let (lo, hi) = self.support();
        let f = |x: f64| (x - mu).abs().powf(order) * self.density(x).unwrap_or(0.0);
        Ok(integrate_region(&f, lo, mu.min(hi)) + integrate_region(&f, mu.max(lo), hi))
    }

    fn continuous_or_err(&self) -> Result<()> {
        match self.support_kind() {
            SupportKind::Continuous => Ok(()),
            SupportKind::DiscreteFinite => Err(Error::Unsupported(format!("{} has no density", self.name()))),
        }
    }
}

fn integrate_region<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => special::integrate(f, a, b, QUAD_TOL).value,
        (true, false) => special::integrate_to_infinity(f, a, QUAD_TOL).value,
        (false, true) => special::integrate_from_neg_infinity(f, b, QUAD_TOL).value,
        (false, false) => {
            special::integrate_from_neg_infinity(f, 0.0, QUAD_TOL).value
                + special::integrate_to_infinity(f, 0.0, QUAD_TOL).value
        }
    }
}

/// A triangular array of independent, non-identical rows `ξ_i ~ row(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriangularArraySpec {
    /// Every row has the same law.
    Iid { law: DistributionSpec },
    /// Row `i` (1-based) uses `laws[(i - 1) % laws.len()]`.
    Cyclic { laws: Vec<DistributionSpec> },
    /// Row `i` is `μ + i^{exponent/2} (X - μ)` for `X ~ law`: the mean is fixed
    /// and `σ_i² = σ² i^{exponent}`.
    VariancePower { law: DistributionSpec, exponent: f64 },
}

impl TriangularArraySpec {
    pub fn iid(law: DistributionSpec) -> Self {
        Self::Iid { law }
    }

    pub fn validate(&self) -> Result<()> {
        let laws: Vec<&DistributionSpec> = match self {
            Self::Iid { law } | Self::VariancePower { law, .. } => vec![law],
            Self::Cyclic { laws } => {
                if laws.is_empty() {
                    return Err(Error::InvalidArgument("cyclic array needs at least one law".into()));
                }
                laws.iter().collect()
            }
        };
        if let Self::VariancePower { exponent, .. } = self {
            if !exponent.is_finite() {
                return Err(Error::InvalidArgument(format!("variance exponent must be finite, got {exponent}")));
            }
        }
        for law in &laws {
            law.validate()?;
            law.require_mean()?;
            law.require_variance()?;
        }
        if !(self.row(1).variance() > 0.0) {
            return Err(Error::InvalidArgument("B_n^2 must be positive: first row has zero variance".into()));
        }
        Ok(())
    }

    pub fn description(&self) -> String {
        match self {
            Self::Iid { law } => format!("iid {}", law.name()),
            Self::Cyclic { laws } => {
                let names: Vec<String> = laws.iter().map(|l| l.name()).collect();
                format!("cyclic [{}]", names.join(", "))
            }
            Self::VariancePower { law, exponent } => format!("{} scaled to variance ~ i^{exponent}", law.name()),
        }
    }

    /// Law of row `i` (1-based).
    pub fn row(&self, i: usize) -> DistributionSpec {
        debug_assert!(i >= 1);
        match self {
            Self::Iid { law } => law.clone(),
            Self::Cyclic { laws } => laws[(i - 1) % laws.len()].clone(),
            Self::VariancePower { law, exponent } => {
                let s = (i as f64).powf(0.5 * exponent);
                let mu = law.mean();
                DistributionSpec::Shifted { base: Box::new(law.clone()), offset: mu * (1.0 - s), scale: s }
            }
        }
    }

    /// The common law when every row is identical.
    pub fn as_iid(&self) -> Option<&DistributionSpec> {
        match self {
            Self::Iid { law } => Some(law),
            Self::Cyclic { laws } if laws.len() == 1 => Some(&laws[0]),
            _ => None,
        }
    }

    /// `B_n² = Σ_{i ≤ n} σ_i²`.
    pub fn b_n2(&self, n: usize) -> f64 {
        match self.as_iid() {
            Some(law) => n as f64 * law.variance(),
            None => (1..=n).map(|i| self.row(i).variance()).sum(),
        }
    }

    /// `Σ_{i ≤ n} μ_i`.
    pub fn mean_sum(&self, n: usize) -> f64 {
        match self.as_iid() {
            Some(law) => n as f64 * law.mean(),
            None => (1..=n).map(|i| self.row(i).mean()).sum(),
        }
    }

    /// Draw rows `1..=out.len()` from `stream`, one uniform per row.
    pub fn fill(&self, stream: &mut Stream, out: &mut [f64]) {
        match self.as_iid() {
            Some(law) => law.fill(stream, out),
            None => {
                for (i, x) in out.iter_mut().enumerate() {
                    *x = self.row(i + 1).draw(stream);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::bernoulli(0.3).unwrap(),
            DistributionSpec::Rademacher,
            DistributionSpec::uniform(-1.0, 3.0).unwrap(),
            DistributionSpec::normal(2.0, 1.5).unwrap(),
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::shifted(DistributionSpec::exponential(1.0).unwrap(), -1.0, 0.5).unwrap(),
            DistributionSpec::pareto(4.5).unwrap(),
        ]
    }

    #[test]
    fn rademacher_support_and_determinism() {
        let d = DistributionSpec::Rademacher;
        let x = d.sample(5, 11).unwrap();
        assert!(x.iter().all(|v| *v == 1.0 || *v == -1.0));
        let a = DistributionSpec::normal(0.0, 1.0).unwrap().sample(1000, 3).unwrap();
        let b = DistributionSpec::normal(0.0, 1.0).unwrap().sample(1000, 3).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn bernoulli_mean_within_chebyshev_budget() {
        let x = DistributionSpec::bernoulli(0.5).unwrap().sample(1_000_000, 2024).unwrap();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        assert!((m - 0.5).abs() < 0.002, "mean {m}");
    }

    #[test]
    fn sample_rejects_empty() {
        assert!(DistributionSpec::Rademacher.sample(0, 1).is_err());
    }

    #[test]
    fn sample_moments_match_analytic_within_five_se() {
        let n = 1_000_000;
        for (j, d) in catalog().into_iter().enumerate() {
            let x = d.sample(n, 100 + j as u64).unwrap();
            let nf = n as f64;
            let m = x.iter().sum::<f64>() / nf;
            let v = x.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (nf - 1.0);
            let mu = d.mean();
            let s2 = d.variance();
            assert!((m - mu).abs() < 5.0 * (s2 / nf).sqrt(), "{}: mean {m} vs {mu}", d.name());
            // SE of the sample variance: sqrt((μ4 - σ⁴) / n).
            let mu4 = x.iter().map(|y| (y - m).powi(4)).sum::<f64>() / nf;
            let se_v = ((mu4 - v * v).max(0.0) / nf).sqrt();
            // The second term covers laws with μ4 = σ⁴ (Rademacher), where the
            // only fluctuation left is the (m - μ)² correction.
            assert!((v - s2).abs() < 5.0 * se_v + 25.0 * s2 / nf, "{}: var {v} vs {s2}", d.name());
        }
    }

    #[test]
    fn truncated_moment_examples() {
        assert_eq!(DistributionSpec::Rademacher.truncated_second_moment(1.1).unwrap(), 0.0);
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        let closed = 2.0 * (2.0 * standard_normal_pdf(2.0) + 1.0 - standard_normal_cdf(2.0));
        assert!((n01.truncated_second_moment(2.0).unwrap() - closed).abs() < 1e-15);
        assert!((closed - 0.26146).abs() < 1e-5);
        let quad = n01.numeric_truncated_second_moment(2.0).unwrap();
        assert!((quad - closed).abs() < 1e-9);
    }

    #[test]
    fn truncated_moment_at_zero_is_variance_minus_central_atom() {
        for d in catalog() {
            let t0 = d.truncated_second_moment(0.0).unwrap();
            assert!((t0 - d.variance()).abs() < 1e-12 * (1.0 + d.variance()), "{}", d.name());
        }
        // A three-point law with an atom at its mean loses nothing at t = 0 either,
        // since the atom contributes zero squared deviation.
        let centred = DistributionSpec::shifted(DistributionSpec::Rademacher, 1.0, 2.0).unwrap();
        assert_eq!(centred.truncated_second_moment(0.0).unwrap(), 4.0);
        assert_eq!(DistributionSpec::point_mass(3.0).truncated_second_moment(0.0).unwrap(), 0.0);
    }

    #[test]
    fn truncated_moment_boundary_is_strict() {
        // |ξ - μ| = 1 exactly is not > 1.
        assert_eq!(DistributionSpec::Rademacher.truncated_second_moment(1.0).unwrap(), 0.0);
        assert_eq!(DistributionSpec::Rademacher.truncated_second_moment(0.999).unwrap(), 1.0);
    }

    #[test]
    fn truncated_moment_rejects_infinite_variance() {
        let err = DistributionSpec::pareto(1.5).unwrap().truncated_second_moment(1.0).unwrap_err();
        assert!(matches!(err, Error::VarianceRequired(_)));
        assert!(err.to_string().contains("variance required"));
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        for d in catalog() {
            if d.support_kind() != SupportKind::Continuous {
                continue;
            }
            for t in [0.0, 0.1, 0.5, 1.0, 2.0, 3.5] {
                let c = d.truncated_second_moment(t).unwrap();
                let q = d.numeric_truncated_second_moment(t).unwrap();
                assert!((c - q).abs() < 1e-8, "{} t={t}: {c} vs {q}", d.name());
            }
            for order in [2.5, 3.0, 4.0] {
                let c = d.abs_central_moment(order).unwrap();
                let q = d.numeric_abs_central_moment(order).unwrap();
                assert!((c - q).abs() < 1e-8 * (1.0 + c), "{} r={order}: {c} vs {q}", d.name());
            }
        }
    }

    #[test]
    fn truncated_moment_monotone_and_vanishes_past_support() {
        for d in catalog() {
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let t = 0.1 * i as f64;
                let v = d.truncated_second_moment(t).unwrap();
                assert!(v <= prev + 1e-15, "{} t={t}", d.name());
                prev = v;
            }
        }
        let u = DistributionSpec::uniform(-1.0, 3.0).unwrap();
        assert_eq!(u.truncated_second_moment(2.0).unwrap(), 0.0);
        let b = DistributionSpec::bernoulli(0.3).unwrap();
        assert_eq!(b.truncated_second_moment(0.7).unwrap(), 0.0);
    }

    #[test]
    fn abs_moment_examples() {
        assert_eq!(DistributionSpec::Rademacher.abs_central_moment(3.0).unwrap(), 1.0);
        assert_eq!(DistributionSpec::bernoulli(0.5).unwrap().abs_central_moment(3.0).unwrap(), 0.125);
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        let expect = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((n01.abs_central_moment(3.0).unwrap() - expect).abs() < 1e-14);
        assert!((n01.numeric_abs_central_moment(3.0).unwrap() - expect).abs() < 1e-9);
        assert!((expect - 1.59577).abs() < 1e-5);
    }

    #[test]
    fn abs_moment_divergence_names_family_and_order() {
        let err = DistributionSpec::pareto(2.5).unwrap().abs_central_moment(3.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Pareto(2.5)") && msg.contains('3'), "{msg}");
        assert!(DistributionSpec::Rademacher.abs_central_moment(2.0).is_err());
    }

    #[test]
    fn pareto_flags() {
        let p = DistributionSpec::pareto(1.5).unwrap();
        assert!(p.has_finite_mean());
        assert!(!p.has_finite_variance());
        assert!(DistributionSpec::pareto(0.9).unwrap().require_mean().is_err());
    }

    #[test]
    fn json_schema() {
        let d: DistributionSpec = serde_json::from_str(r#"{"family":"bernoulli","p":0.5}"#).unwrap();
        assert_eq!(d, DistributionSpec::Bernoulli { p: 0.5 });
        let s: DistributionSpec =
            serde_json::from_str(r#"{"family":"shifted","base":{"family":"rademacher"},"offset":1,"scale":2}"#).unwrap();
        assert_eq!(s.mean(), 1.0);
        let err = serde_json::from_str::<DistributionSpec>(r#"{"family":"cauchy"}"#).unwrap_err().to_string();
        assert!(err.contains("bernoulli") && err.contains("pareto"), "{err}");
    }

    #[test]
    fn triangular_array_aggregates() {
        let arr = TriangularArraySpec::VariancePower { law: DistributionSpec::normal(0.0, 1.0).unwrap(), exponent: 1.0 };
        arr.validate().unwrap();
        assert!((arr.b_n2(4) - 10.0).abs() < 1e-12);
        assert!((arr.row(3).variance() - 3.0).abs() < 1e-12);
        assert_eq!(arr.row(3).mean(), 0.0);
        let bad = TriangularArraySpec::iid(DistributionSpec::point_mass(1.0));
        assert!(bad.validate().is_err());
    }
}
