//! Declarative job configuration (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisOptions, PairingVariant};
use crate::error::{Error, Result};
use crate::field::{parse_rational, FieldElement, FieldSpec, NumberField};
use crate::lattice::EnumParams;
use crate::master::{Backend, MasterOptions};
use crate::poly::PolyOptions;
use crate::quat::{QuatElement, QuatOrder, QuaternionAlgebra};
use crate::reduce::PrecisionBudget;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    /// Monic defining polynomial, leading coefficient first.
    pub coefficients: Vec<i64>,
    /// Rows of rational strings on the power basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminant: Option<i64>,
    /// `[re, im]` of the distinguished complex root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
    /// Residue degrees of the primes above `p`, for `p` dividing the index.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub index_primes: BTreeMap<String, Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta2: Option<f64>,
    #[serde(default = "default_zeta_bound")]
    pub zeta_prime_bound: u64,
}

fn default_zeta_bound() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraBlock {
    /// Field elements as rational strings on the power basis.
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// `M_2(Z_F)`.
    #[default]
    Matrix,
    /// An explicit basis in the algebra block's algebra.
    Explicit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderBlock {
    #[serde(default)]
    pub kind: OrderKind,
    /// `4n` rows, each four field elements `x, y, z, t` of `x + y i + z j + t ij`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<[Vec<String>; 4]>,
    #[serde(default = "yes")]
    pub maximal: bool,
    #[serde(default)]
    pub ramified_prime_norms: Vec<u64>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumBlock {
    pub backend: Backend,
    #[serde(flatten)]
    pub params: EnumParams,
}

impl Default for EnumBlock {
    fn default() -> Self {
        Self { backend: Backend::Deterministic, params: EnumParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetBlock {
    pub max_outer: usize,
    pub max_inner: usize,
    pub conjugation_retries: usize,
    /// Exit slack of the reduction test.
    pub reduction_slack: f64,
    pub pairing_slack: f64,
    pub pairing: PairingVariant,
    pub edge_samples: usize,
    pub angle_tol: f64,
    pub vertex_tol: f64,
}

impl Default for BudgetBlock {
    fn default() -> Self {
        let b = BasisOptions::default();
        Self {
            max_outer: b.max_outer,
            max_inner: b.max_inner,
            conjugation_retries: MasterOptions::default().conjugation_retries,
            reduction_slack: b.budget.slack,
            pairing_slack: b.pairing_slack,
            pairing: b.pairing,
            edge_samples: b.edge_samples,
            angle_tol: b.angle_tol,
            vertex_tol: b.poly.vertex_tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presentation: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_eps")]
    pub precision: f64,
    #[serde(default)]
    pub seed: u64,
    pub field: FieldBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraBlock>,
    #[serde(default)]
    pub order: OrderBlock,
    #[serde(default)]
    pub enumeration: EnumBlock,
    #[serde(default)]
    pub budget: BudgetBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

fn default_eps() -> f64 {
    1e-15
}

fn field_element(items: &[String], n: usize, what: &str) -> Result<FieldElement> {
    if items.len() != n {
        return Err(Error::Config(format!("{what}: expected {n} coordinates, found {}", items.len())));
    }
    FieldElement::from_strings(items)
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.precision > 0.0 && self.precision < 1e-9) {
            return Err(Error::Config(format!("precision must lie in (0, 1e-9), got {}", self.precision)));
        }
        if self.field.coefficients.len() < 3 || self.field.coefficients[0] != 1 {
            return Err(Error::Config("defining polynomial must be monic of degree at least 2".into()));
        }
        if self.order.kind == OrderKind::Explicit && self.algebra.is_none() {
            return Err(Error::Config("an explicit order needs an algebra block".into()));
        }
        if self.budget.max_outer == 0 || self.budget.max_inner == 0 {
            return Err(Error::Config("iteration budgets must be positive".into()));
        }
        Ok(())
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        let f = &self.field;
        let integral_basis = f
            .integral_basis
            .as_ref()
            .map(|rows| rows.iter().map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>())
            .transpose()?;
        let index_primes = f
            .index_primes
            .iter()
            .map(|(p, d)| p.parse::<u64>().map(|p| (p, d.clone())).map_err(|e| Error::Config(format!("index prime {p}: {e}"))))
            .collect::<Result<_>>()?;
        Ok(FieldSpec {
            coefficients: f.coefficients.clone(),
            integral_basis,
            discriminant: f.discriminant.map(BigInt::from),
            sigma_hint: f.sigma.map(|[re, im]| Complex64::new(re, im)),
            index_primes,
            zeta2_override: f.zeta2,
        })
    }

    pub fn number_field(&self) -> Result<NumberField> {
        NumberField::new(&self.field_spec()?)
    }

    pub fn order(&self) -> Result<QuatOrder> {
        let field = self.number_field()?;
        let n = field.degree();
        match self.order.kind {
            OrderKind::Matrix => QuatOrder::matrix_order(field),
            OrderKind::Explicit => {
                let alg = self.algebra.as_ref().expect("validated");
                let a = field_element(&alg.a, n, "algebra.a")?;
                let b = field_element(&alg.b, n, "algebra.b")?;
                let algebra = QuaternionAlgebra::new(field, a, b)?;
                let basis = self
                    .order
                    .basis
                    .iter()
                    .map(|[x, y, z, t]| {
                        Ok(QuatElement::new(
                            field_element(x, n, "order.basis")?,
                            field_element(y, n, "order.basis")?,
                            field_element(z, n, "order.basis")?,
                            field_element(t, n, "order.basis")?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                QuatOrder::new(algebra, basis, self.order.maximal, self.order.ramified_prime_norms.clone())
            }
        }
    }

    pub fn budget(&self) -> Result<PrecisionBudget> {
        Ok(PrecisionBudget::new(self.precision)?.with_slack(self.budget.reduction_slack))
    }

    pub fn master_options(&self) -> Result<MasterOptions> {
        let budget = self.budget()?;
        let b = &self.budget;
        let basis = BasisOptions {
            poly: PolyOptions { vertex_tol: b.vertex_tol },
            budget,
            pairing_slack: b.pairing_slack,
            pairing: b.pairing,
            edge_samples: b.edge_samples,
            angle_tol: b.angle_tol,
            max_outer: b.max_outer,
            max_inner: b.max_inner,
            order_cap: (2.0 * budget.norm_cap * budget.norm_cap) as usize,
            ..BasisOptions::default()
        };
        Ok(MasterOptions {
            backend: self.enumeration.backend,
            params: self.enumeration.params,
            seed: self.seed,
            basis,
            zeta_prime_bound: self.field.zeta_prime_bound,
            conjugation_retries: b.conjugation_retries,
            ..MasterOptions::default()
        })
    }
}
