//! Prime sieving, arithmetic functions, and Dirichlet character algebra.

mod characters;
mod sieve;

pub use characters::{characters_mod, conductor_decompose, DirichletCharacter, Rotation};
pub use sieve::{euler_phi_u64, SieveTable};

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use num_integer::Integer;

/// Optional Siegel-zero test configuration. The pair is user-supplied only;
/// no zero search is ever performed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalZeroConfig {
    pub r_tilde: u64,
    pub beta_tilde: f64,
}

impl ExceptionalZeroConfig {
    pub fn new(r_tilde: u64, beta_tilde: f64) -> Result<Self> {
        if !(0.5 < beta_tilde && beta_tilde < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta_tilde = {beta_tilde} must lie in (1/2, 1)"
            )));
        }
        Ok(ExceptionalZeroConfig { r_tilde, beta_tilde })
    }
}

/// `Σ_{m|x} μ(m)·log(x/m)`; agrees with `Λ(x)` (the identity `Λ = μ ∗ log`).
pub fn mu_log_convolution(table: &SieveTable, x: u64) -> f64 {
    let mut acc = Kahan::new();
    let lx = (x as f64).ln();
    table.for_each_divisor(x, |m| {
        let mu = table.moebius(m);
        if mu != 0 {
            acc.add(mu as f64 * (lx - (m as f64).ln()));
        }
    });
    acc.value()
}

/// `Σ_{x₁,…,x_h ≤ B} φ(x₁)⋯φ(x_h) / lcm(x₁,…,x_h)^t` with compensated
/// accumulation. Enumerates `B^h` tuples; errors out beyond the budget.
pub fn divisor_lcm_sum(
    table: &SieveTable,
    big_b: u64,
    h: u32,
    t: f64,
    budget: crate::error::Budget,
) -> Result<f64> {
    if big_b == 0 || h == 0 {
        return Err(Error::InvalidParameter("need B ≥ 1 and h ≥ 1".into()));
    }
    if big_b > table.limit() {
        return Err(Error::InvalidParameter("sieve does not cover B".into()));
    }
    budget.check("divisor_lcm_sum", (big_b as u128).pow(h))?;
    let mut acc = Kahan::new();
    let mut tuple = vec![1u64; h as usize];
    loop {
        let mut l: u64 = 1;
        let mut phi_prod: f64 = 1.0;
        for &x in &tuple {
            l = l.lcm(&x);
            phi_prod *= table.euler_phi(x) as f64;
        }
        acc.add(phi_prod / (l as f64).powf(t));
        // odometer increment
        let mut k = 0;
        loop {
            if k == tuple.len() {
                return Ok(acc.value());
            }
            tuple[k] += 1;
            if tuple[k] <= big_b {
                break;
            }
            tuple[k] = 1;
            k += 1;
        }
    }
}
