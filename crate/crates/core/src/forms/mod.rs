//! Built-in newforms given as eta quotients, their exact q-expansions and the
//! normalized coefficients `λ_f(n) = a_f(n) / n^{(k-1)/2}`.

pub mod cache;
pub mod checks;

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::normalize;
use crate::series::{eta_power_series, mul, mul_sparse, pow, IntSeries};

/// One factor `η(d·z)^e` of an eta quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EtaFactor {
    pub multiplier: usize,
    pub exponent: u32,
}

impl fmt::Display for EtaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.multiplier, self.exponent)
    }
}

/// A newform described by an eta-quotient recipe `Π η(d·z)^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormDescriptor {
    name: String,
    weight: u32,
    level: u64,
    cm: bool,
    eta_recipe: Vec<EtaFactor>,
}

impl FormDescriptor {
    /// Validates the recipe against the weight and level.
    ///
    /// The q-prefactor `q^{Σ d·e / 24}` must be exactly `q^1` so that the
    /// expansion starts at `a(1) = 1`.
    pub fn new(
        name: impl Into<String>,
        weight: u32,
        level: u64,
        cm: bool,
        eta_recipe: Vec<EtaFactor>,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.len() > 255 {
            return Err(Error::InvalidRecipe("form name must be 1..=255 bytes".into()));
        }
        if eta_recipe.is_empty() {
            return Err(Error::InvalidRecipe("recipe has no eta factors".into()));
        }
        if level == 0 {
            return Err(Error::InvalidRecipe("level must be positive".into()));
        }
        for f in &eta_recipe {
            if f.multiplier == 0 || f.exponent == 0 {
                return Err(Error::InvalidRecipe(format!(
                    "factor {f}: multiplier and exponent must be positive"
                )));
            }
            if level % f.multiplier as u64 != 0 {
                return Err(Error::InvalidRecipe(format!(
                    "factor {f}: multiplier does not divide the level {level}"
                )));
            }
        }
        let twisted: usize = eta_recipe
            .iter()
            .map(|f| f.multiplier * f.exponent as usize)
            .sum();
        if twisted % 24 != 0 {
            return Err(Error::InvalidRecipe(format!(
                "Σ d·e = {twisted} is not divisible by 24, so the q-prefactor is fractional"
            )));
        }
        if twisted != 24 {
            return Err(Error::InvalidRecipe(format!(
                "q-prefactor is q^{}, a normalized form needs q^1",
                twisted / 24
            )));
        }
        let total: u32 = eta_recipe.iter().map(|f| f.exponent).sum();
        if total % 2 != 0 || total / 2 != weight {
            return Err(Error::InvalidRecipe(format!(
                "weight {weight} does not match Σ e / 2 = {total}/2"
            )));
        }
        if weight == 0 || weight % 2 != 0 {
            return Err(Error::InvalidRecipe(format!(
                "weight {weight} must be even and positive"
            )));
        }
        Ok(FormDescriptor {
            name,
            weight,
            level,
            cm,
            eta_recipe,
        })
    }

    /// `Δ = η(z)^24`, weight 12, level 1.
    pub fn delta() -> Self {
        Self::builtin("delta", 12, 1, false, &[(1, 24)])
    }

    /// `η(z)^2 η(11z)^2`, weight 2, level 11.
    pub fn lvl11() -> Self {
        Self::builtin("lvl11", 2, 11, false, &[(1, 2), (11, 2)])
    }

    /// `η(3z)^2 η(9z)^2`, weight 2, level 27, CM by `Q(√-3)`.
    pub fn lvl27() -> Self {
        Self::builtin("lvl27", 2, 27, true, &[(3, 2), (9, 2)])
    }

    /// `η(4z)^2 η(8z)^2`, weight 2, level 32, CM by `Q(i)`.
    pub fn lvl32() -> Self {
        Self::builtin("lvl32", 2, 32, true, &[(4, 2), (8, 2)])
    }

    fn builtin(name: &str, k: u32, n: u64, cm: bool, recipe: &[(usize, u32)]) -> Self {
        let recipe = recipe
            .iter()
            .map(|&(multiplier, exponent)| EtaFactor {
                multiplier,
                exponent,
            })
            .collect();
        Self::new(name, k, n, cm, recipe).expect("built-in recipes are valid")
    }

    pub fn builtins() -> Vec<Self> {
        vec![Self::delta(), Self::lvl11(), Self::lvl27(), Self::lvl32()]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::builtins()
            .into_iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownForm(name.to_string()))
    }

    /// Parses `"4^2.8^2"` style recipes (factors separated by `.` or `,`).
    pub fn parse_recipe(text: &str) -> Result<Vec<EtaFactor>> {
        text.split(['.', ','])
            .filter(|s| !s.trim().is_empty())
            .map(|part| {
                let (d, e) = part.trim().split_once('^').ok_or_else(|| {
                    Error::InvalidRecipe(format!("factor `{part}` is not of the form d^e"))
                })?;
                let bad = |_| Error::InvalidRecipe(format!("factor `{part}` is not numeric"));
                Ok(EtaFactor {
                    multiplier: d.trim().parse().map_err(bad)?,
                    exponent: e.trim().parse().map_err(bad)?,
                })
            })
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn is_cm(&self) -> bool {
        self.cm
    }

    pub fn eta_recipe(&self) -> &[EtaFactor] {
        &self.eta_recipe
    }

    /// `(k - 1) / 2`, the normalizing exponent.
    pub fn half_weight_shift(&self) -> f64 {
        (self.weight as f64 - 1.0) / 2.0
    }

    pub fn divides_level(&self, p: u64) -> bool {
        self.level % p == 0
    }
}

/// Exact coefficients `a_f(1..=X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSeries {
    form: FormDescriptor,
    /// index `n` holds `a_f(n)`; index 0 is unused and zero
    coeffs: Vec<BigInt>,
}

impl CoefficientSeries {
    /// Wraps precomputed coefficients `a_f(1..=X)` (e.g. from the cache).
    pub fn from_parts(form: FormDescriptor, a: Vec<BigInt>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient table".into()));
        }
        let mut coeffs = Vec::with_capacity(a.len() + 1);
        coeffs.push(BigInt::from(0));
        coeffs.extend(a);
        Ok(CoefficientSeries { form, coeffs })
    }

    pub fn form(&self) -> &FormDescriptor {
        &self.form
    }

    /// Precision `X`: coefficients are known for `1 <= n <= X`.
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn a(&self, n: usize) -> Result<&BigInt> {
        if n == 0 || n > self.precision() {
            return Err(Error::OutOfRange {
                index: n,
                bound: self.precision(),
            });
        }
        Ok(&self.coeffs[n])
    }

    /// `a_f(1..=X)` as a slice.
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs[1..]
    }

    /// `λ_f(n) = a_f(n) / n^{(k-1)/2}`.
    pub fn lambda_at(&self, n: usize) -> Result<f64> {
        let a = self.a(n)?;
        Ok(normalize(a, n as u64, self.form.half_weight_shift()))
    }
}

/// Expands `a_f(n)` for `1 <= n <= X`.
pub fn expand(form: &FormDescriptor, x: usize) -> Result<CoefficientSeries> {
    if x < 1 {
        return Err(Error::InvalidArgument("precision X must be at least 1".into()));
    }
    // The prefactor is q^1, so a_f(n) is the coefficient of q^{n-1}.
    let prec = x - 1;
    let mut product = IntSeries::one(prec);
    for factor in form.eta_recipe() {
        let inner = prec / factor.multiplier;
        if inner == 0 {
            continue;
        }
        let dense = eta_power_dense(factor.exponent, inner)?;
        let dilated = dense.dilate(factor.multiplier, prec);
        product = mul(&product, &dilated)?;
    }
    CoefficientSeries::from_parts(form.clone(), product.into_coeffs())
}

/// `Π (1 - q^n)^e` up to `q^prec` as a dense series: powers of the cubic
/// Jacobi series, then the leftover linear factors.
fn eta_power_dense(e: u32, prec: usize) -> Result<IntSeries> {
    let mut acc = if e >= 3 {
        let cube = eta_power_series(3, prec)?.to_dense(prec);
        pow(&cube, e / 3)?
    } else {
        IntSeries::one(prec)
    };
    let linear = eta_power_series(1, prec)?;
    for _ in 0..e % 3 {
        let direct = acc.nonzero_count() as u64 * linear.len() as u64;
        let transform = 64 * (prec as u64 + 1) * (usize::BITS - prec.leading_zeros()) as u64;
        acc = if direct <= transform {
            mul_sparse(&acc, &linear)
        } else {
            mul(&acc, &linear.to_dense(prec))?
        };
    }
    Ok(acc)
}
