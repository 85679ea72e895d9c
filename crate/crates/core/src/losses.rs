//! Loss integrands, their signed combination into the three losses and the
//! final verdict `total + 2·total_err < 1`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::buchstab::{self, BuchstabTable};
use crate::error::{Error, Result};
use crate::params::SieveParams;
use crate::quadrature::{integrate, IntegralEstimate, IntegrationOptions};
use crate::regions::{domain_with, DomainName, RegionOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// Published bounds for the A, B and C losses, and for their sum.
pub const BOUND_A: f64 = 0.002515;
pub const BOUND_B: f64 = 0.006249;
pub const BOUND_C: f64 = 0.990258;
pub const BOUND_TOTAL: f64 = 0.9991;

/// Which ω evaluator a kernel factor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Solved table.
    Exact,
    /// ω₀.
    Lower,
    /// ω₁.
    Upper,
    /// `max(1/u, 0.5672)`.
    Simple,
}

impl Kernel {
    /// Kernel used by each domain's integrand as published.
    pub fn default_for(name: DomainName) -> Kernel {
        use DomainName::*;
        match name {
            SA51 | SA53 | SB51 | SB53 => Kernel::Upper,
            SA52 | SB52 => Kernel::Lower,
            SA54 => Kernel::Simple,
            SC | SC2 | SC4 => Kernel::Exact,
        }
    }
}

/// The integrand of one domain. Counts ω arguments that fall below 1.
#[derive(Debug)]
pub struct Integrand<'a> {
    pub name: DomainName,
    pub kernel: Kernel,
    table: &'a BuchstabTable,
    violations: AtomicU64,
}

impl<'a> Integrand<'a> {
    pub fn new(name: DomainName, table: &'a BuchstabTable) -> Self {
        Self::with_kernel(name, table, Kernel::default_for(name))
    }

    pub fn with_kernel(name: DomainName, table: &'a BuchstabTable, kernel: Kernel) -> Self {
        Self {
            name,
            kernel,
            table,
            violations: AtomicU64::new(0),
        }
    }

    pub fn violations(&self) -> u64 {
        self.violations.load(Ordering::Relaxed)
    }

    #[inline]
    fn omega(&self, u: f64) -> f64 {
        if u < 1.0 - 1e-12 {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
        let u = u.max(1.0);
        match self.kernel {
            Kernel::Exact => self.table.eval(u),
            Kernel::Lower => buchstab::lower_unchecked(u),
            Kernel::Upper => buchstab::upper_unchecked(u),
            Kernel::Simple => buchstab::simple_upper_unchecked(u),
        }
    }

    /// The ω arguments this integrand evaluates at `t`.
    pub fn omega_arguments(&self, t: &[f64]) -> Vec<f64> {
        use DomainName::*;
        let rest = |k: usize| 1.0 - t[..k].iter().sum::<f64>();
        match self.name {
            SA51 | SA52 | SA53 | SA54 | SC | SC2 | SC4 => {
                let k = t.len();
                vec![rest(k) / t[k - 1]]
            }
            SB51 | SB52 | SB53 => {
                let k = t.len();
                let inner = t[0] - t[3..].iter().sum::<f64>();
                vec![inner / t[k - 1], rest(3) / t[2]]
            }
        }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        use DomainName::*;
        let k = t.len();
        let last = t[k - 1];
        match self.name {
            // ω(rest/t_k) / (t₁ ⋯ t_{k−1} · t_k²)
            SA51 | SA52 | SA53 | SA54 | SC | SC2 | SC4 => {
                let rest = 1.0 - t.iter().sum::<f64>();
                let denom: f64 = t.iter().product::<f64>() * last;
                self.omega(rest / last) / denom
            }
            // ω((t₁ − t₄ − …)/t_k) · ω((1 − t₁ − t₂ − t₃)/t₃) / (t₂ t₃² t₄ ⋯ t_k²)
            SB51 | SB52 | SB53 => {
                let inner = t[0] - t[3..].iter().sum::<f64>();
                let outer = 1.0 - t[0] - t[1] - t[2];
                let denom = t[1] * t[2] * t[2] * t[3..].iter().product::<f64>() * last;
                self.omega(inner / last) * self.omega(outer / t[2]) / denom
            }
        }
    }
}

/// A signed combination of estimates with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Combined {
    pub value: f64,
    pub std_err: f64,
}

impl Combined {
    pub fn variance(&self) -> f64 {
        self.std_err * self.std_err
    }
}

fn combine(
    estimates: &BTreeMap<DomainName, IntegralEstimate>,
    terms: &[(f64, DomainName)],
) -> Result<Combined> {
    let mut value = 0.0;
    let mut var = 0.0;
    for &(sign, name) in terms {
        let e = estimates
            .get(&name)
            .ok_or_else(|| Error::MissingEstimate(name.to_string()))?;
        value += sign * e.value;
        var += e.std_err * e.std_err;
    }
    Ok(Combined {
        value,
        std_err: var.sqrt(),
    })
}

/// `I(SA51) − I(SA52) + I(SA53) + I(SA54)`.
pub fn loss_a(estimates: &BTreeMap<DomainName, IntegralEstimate>) -> Result<Combined> {
    use DomainName::*;
    combine(
        estimates,
        &[(1.0, SA51), (-1.0, SA52), (1.0, SA53), (1.0, SA54)],
    )
}

/// `J(SB51) − J(SB52) + J(SB53)`.
pub fn loss_b(estimates: &BTreeMap<DomainName, IntegralEstimate>) -> Result<Combined> {
    use DomainName::*;
    combine(estimates, &[(1.0, SB51), (-1.0, SB52), (1.0, SB53)])
}

/// `K(SC) − K(SC2) − K(SC4)`.
pub fn loss_c(estimates: &BTreeMap<DomainName, IntegralEstimate>) -> Result<Combined> {
    use DomainName::*;
    combine(estimates, &[(1.0, SC), (-1.0, SC2), (-1.0, SC4)])
}

/// Per-domain evaluation budgets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets(pub BTreeMap<DomainName, u64>);

impl Default for Budgets {
    /// 10⁶ for dimensions up to 4, 4·10⁶ for 5–6, 2·10⁷ for 8.
    fn default() -> Self {
        Budgets(
            DomainName::ALL
                .iter()
                .map(|&d| {
                    let b = match d.dim() {
                        0..=4 => 1_000_000,
                        5..=6 => 4_000_000,
                        _ => 20_000_000,
                    };
                    (d, b)
                })
                .collect(),
        )
    }
}

impl Budgets {
    pub fn uniform(n: u64) -> Self {
        Budgets(DomainName::ALL.iter().map(|&d| (d, n)).collect())
    }

    /// Every default budget multiplied by `factor` (at least the minimum).
    pub fn scaled(factor: f64) -> Self {
        let mut b = Self::default();
        for v in b.0.values_mut() {
            *v = ((*v as f64 * factor) as u64).max(crate::quadrature::MIN_BUDGET);
        }
        b
    }

    pub fn get(&self, name: DomainName) -> Result<u64> {
        self.0
            .get(&name)
            .copied()
            .ok_or_else(|| Error::MissingEstimate(format!("budget for {name}")))
    }
}

/// Seed of one domain, derived from the run seed.
pub fn domain_seed(seed: u64, name: DomainName) -> u64 {
    seed ^ (name.index() + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Everything a verification run needs besides the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub budgets: Budgets,
    pub seed: u64,
    pub integration: IntegrationOptions,
    pub regions: RegionOptions,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            budgets: Budgets::default(),
            seed: 20_310_700,
            integration: IntegrationOptions::default(),
            regions: RegionOptions::default(),
        }
    }
}

/// Integrals of all ten domains plus the count of ω arguments below 1.
pub fn integrate_all(
    p: &SieveParams,
    table: &BuchstabTable,
    settings: &RunSettings,
) -> Result<(BTreeMap<DomainName, IntegralEstimate>, u64)> {
    let mut out = BTreeMap::new();
    let mut violations = 0;
    for name in DomainName::ALL {
        let spec = domain_with(p, name, settings.regions);
        let f = Integrand::new(name, table);
        let budget = settings.budgets.get(name)?;
        let est = integrate(
            &spec,
            &|t: &[f64]| f.eval(t),
            budget,
            domain_seed(settings.seed, name),
            &settings.integration,
        )?;
        violations += f.violations();
        out.insert(name, est);
    }
    Ok((out, violations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedBounds {
    pub loss_a: f64,
    pub loss_b: f64,
    pub loss_c: f64,
    pub total: f64,
}

impl Default for PublishedBounds {
    fn default() -> Self {
        Self {
            loss_a: BOUND_A,
            loss_b: BOUND_B,
            loss_c: BOUND_C,
            total: BOUND_TOTAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainReport {
    pub dim: usize,
    #[serde(flatten)]
    pub estimate: IntegralEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub schema_version: u32,
    pub params: SieveParams,
    pub settings: RunSettings,
    pub loss_a: Combined,
    pub loss_b: Combined,
    pub loss_c: Combined,
    pub total: f64,
    pub total_err: f64,
    pub published_bounds: PublishedBounds,
    pub verdict: bool,
    pub omega_argument_violations: u64,
    pub domains: BTreeMap<DomainName, DomainReport>,
}

impl LossReport {
    pub fn from_estimates(
        p: &SieveParams,
        settings: &RunSettings,
        estimates: &BTreeMap<DomainName, IntegralEstimate>,
        violations: u64,
    ) -> Result<Self> {
        let a = loss_a(estimates)?;
        let b = loss_b(estimates)?;
        let c = loss_c(estimates)?;
        let total = a.value + b.value + c.value;
        let total_err = (a.variance() + b.variance() + c.variance()).sqrt();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            params: *p,
            settings: settings.clone(),
            loss_a: a,
            loss_b: b,
            loss_c: c,
            total,
            total_err,
            published_bounds: PublishedBounds::default(),
            verdict: total + 2.0 * total_err < 1.0,
            omega_argument_violations: violations,
            domains: estimates
                .iter()
                .map(|(&n, &e)| {
                    (
                        n,
                        DomainReport {
                            dim: n.dim(),
                            estimate: e,
                        },
                    )
                })
                .collect(),
        })
    }

    /// One row per domain: name, dim, estimate, std_err, samples.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,dim,estimate,std_err,samples\n");
        for (name, d) in &self.domains {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                name, d.dim, d.estimate.value, d.estimate.std_err, d.estimate.samples
            ));
        }
        s
    }
}

/// Full pipeline: validate, integrate all domains, combine.
pub fn verify(
    p: &SieveParams,
    table: &BuchstabTable,
    settings: &RunSettings,
) -> Result<LossReport> {
    p.validate()?;
    let (estimates, violations) = integrate_all(p, table, settings)?;
    LossReport::from_estimates(p, settings, &estimates, violations)
}
