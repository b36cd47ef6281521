//! Seeded instance generators: independent uniform values, correlated
//! values with a shared component, and identical values.
//!
//! Draws are integer surrogates for Unif[0,1): `round(scale * U)` sampled
//! exactly on the grid `{0, ..., scale}`, so a (seed, parameters) pair
//! determines the matrix bit-for-bit with no floating point involved.
//! Correlated instances fix a draw order, shared values first (ascending
//! good index) and then personal values row-major, so seeds stay portable.

use rand::Rng;

use crate::descent::IdenticalInstance;
use crate::error::Error;
use crate::model::Instance;
use crate::rng::generator_rng;

/// Default value grid: draws land in [0, 10^6].
pub const DEFAULT_SCALE: u64 = 1_000_000;

/// Fixed-point denominator for the correlation strength.
pub const RHO_DENOM: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Uniform,
    Correlated,
    Identical,
}

/// A fully-specified generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub m: usize,
    /// Correlation strength in [0,1]; ignored unless `kind` is Correlated.
    pub rho: f64,
    pub seed: u64,
    pub scale: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::NoAgents);
        }
        if self.scale == 0 {
            return Err(Error::InvalidParams("scale must be at least 1".into()));
        }
        if self.kind == GenKind::Correlated && !(self.rho.is_finite() && (0.0..=1.0).contains(&self.rho)) {
            return Err(Error::InvalidParams(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Generates the full valuation matrix; identical instances are lifted
    /// to equal rows.
    pub fn generate(&self) -> Result<Instance, Error> {
        self.validate()?;
        match self.kind {
            GenKind::Uniform => gen_uniform(self.n, self.m, self.seed, self.scale),
            GenKind::Correlated => gen_correlated(self.n, self.m, self.rho, self.seed, self.scale),
            GenKind::Identical => {
                Ok(gen_identical(self.n, self.m, self.seed, self.scale)?.to_instance())
            }
        }
    }

    /// Generates the common-value form; only identical instances have one.
    pub fn generate_identical(&self) -> Result<IdenticalInstance, Error> {
        self.validate()?;
        if self.kind != GenKind::Identical {
            return Err(Error::InvalidParams(
                "only identical-kind specs have a common-value form".into(),
            ));
        }
        gen_identical(self.n, self.m, self.seed, self.scale)
    }
}

/// Independent values: each entry is `round(scale * U)`, U ~ Unif[0,1).
pub fn gen_uniform(n: usize, m: usize, seed: u64, scale: u64) -> Result<Instance, Error> {
    check_bounds(n, m, scale)?;
    let mut rng = generator_rng(seed);
    let values = (0..n * m).map(|_| scaled_unit_draw(&mut rng, scale)).collect();
    Instance::from_flat(n, m, values)
}

/// Correlated values `v = rho * w_j + (1 - rho) * u_ij` mixing a shared
/// per-good draw with a personal draw, both uniform on the value grid.
/// `rho = 0` reproduces independent uniforms; `rho = 1` gives every agent
/// the shared row.
pub fn gen_correlated(
    n: usize,
    m: usize,
    rho: f64,
    seed: u64,
    scale: u64,
) -> Result<Instance, Error> {
    check_bounds(n, m, scale)?;
    if !(rho.is_finite() && (0.0..=1.0).contains(&rho)) {
        return Err(Error::InvalidParams(format!(
            "rho must lie in [0, 1], got {rho}"
        )));
    }
    let rho_fixed = (rho * RHO_DENOM as f64).round() as u64;
    let mut rng = generator_rng(seed);
    let shared: Vec<u64> = (0..m).map(|_| scaled_unit_draw(&mut rng, scale)).collect();
    let mut values = Vec::with_capacity(n * m);
    for _agent in 0..n {
        for &w in &shared {
            let personal = scaled_unit_draw(&mut rng, scale);
            values.push(mix(rho_fixed, w, personal));
        }
    }
    Instance::from_flat(n, m, values)
}

/// Common values `w_g = 1 + round((scale - 1) * U)`, strictly positive.
pub fn gen_identical(n: usize, m: usize, seed: u64, scale: u64) -> Result<IdenticalInstance, Error> {
    check_bounds(n, m, scale)?;
    let mut rng = generator_rng(seed);
    let weights = (0..m).map(|_| 1 + scaled_unit_draw(&mut rng, scale - 1)).collect();
    IdenticalInstance::new(n, weights)
}

/// Draws can reach `scale`, so the mass guard is enforced on the worst
/// case up front rather than after materializing the matrix.
fn check_bounds(n: usize, m: usize, scale: u64) -> Result<(), Error> {
    if scale == 0 {
        return Err(Error::InvalidParams("scale must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::NoAgents);
    }
    let product = n as u128 * m as u128 * scale as u128;
    if product >= crate::model::VALUE_MASS_LIMIT {
        return Err(Error::OverflowGuard { product });
    }
    Ok(())
}

/// `round(scale * U)` for U ~ Unif[0,1), drawn exactly: a uniform integer
/// on {0, ..., 2*scale - 1} folded onto the half-grid.
fn scaled_unit_draw(rng: &mut impl Rng, scale: u64) -> u64 {
    if scale == 0 {
        return 0;
    }
    rng.random_range(0..2 * scale).div_ceil(2)
}

/// Convex mix in fixed point, rounding half-up.
fn mix(rho_fixed: u64, shared: u64, personal: u64) -> u64 {
    let num = rho_fixed as u128 * shared as u128 + (RHO_DENOM - rho_fixed) as u128 * personal as u128;
    ((num + RHO_DENOM as u128 / 2) / RHO_DENOM as u128) as u64
}
