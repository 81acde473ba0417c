//! Exponential sums: `S(α)`, `S*(α)`, complete character sums `A(q,a;…)`,
//! dyadic block sums, Weyl-differenced sums, and lattice counters.

mod blocks;
mod lattice;

pub use blocks::{dyadic_block_s, weyl_chain_check, BlockContext};
pub use lattice::{
    lattice_count_m, rational_approx_from_gamma, shrink_count_y, LatticeCountSpec,
};

use crate::arithmetic::{DirichletCharacter, SieveTable};
use crate::error::{Budget, Error, Result};
use crate::forms::IntegerForm;
use crate::numeric::{e_alpha_times_f64, e_unit, KahanComplex};
use crate::oracle::{lambda_support, LambdaMode};
use crate::weights::WeightFamily;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

/// Everything needed to evaluate the weighted prime exponential sums on one
/// form at one scale. Immutable; shared freely across threads.
pub struct ExpSumContext<'a> {
    pub form: &'a IntegerForm,
    pub family: &'a WeightFamily,
    pub sieve: &'a SieveTable,
    pub budget: Budget,
}

impl<'a> ExpSumContext<'a> {
    pub fn new(
        form: &'a IntegerForm,
        family: &'a WeightFamily,
        sieve: &'a SieveTable,
        budget: Budget,
    ) -> Result<Self> {
        if family.n() != form.nvars() {
            return Err(Error::DimensionMismatch {
                expected: form.nvars(),
                got: family.n(),
            });
        }
        let (_, b) = family.support(form.nvars() - 1);
        if (sieve.limit() as f64) < b {
            return Err(Error::InvalidParameter(
                "sieve does not cover the weight support".into(),
            ));
        }
        Ok(ExpSumContext {
            form,
            family,
            sieve,
            budget,
        })
    }

    fn supports(&self, mode: LambdaMode) -> Result<Vec<Vec<(u64, f64)>>> {
        let n = self.form.nvars();
        let sup: Vec<Vec<(u64, f64)>> = (0..n)
            .map(|i| lambda_support(self.family, self.sieve, i, mode))
            .collect();
        let total: u128 = sup.iter().map(|s| s.len() as u128).product();
        self.budget.check("exponential sum enumeration", total)?;
        Ok(sup)
    }
}

/// Phase protocols for the exponential sum: a real `α`, or an exact rational
/// `a/q` evaluated without rounding in the phase reduction.
#[derive(Debug, Clone, Copy)]
enum Phase {
    Real(f64),
    Rational { a: i64, q: i64 },
}

fn exp_sum(ctx: &ExpSumContext<'_>, phase: Phase, mode: LambdaMode) -> Result<Complex64> {
    let supports = ctx.supports(mode)?;
    if supports.iter().any(Vec::is_empty) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = ctx.form.nvars();
    let shards: Vec<Complex64> = supports[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = KahanComplex::new();
            let mut pos = vec![0usize; n];
            let mut point = vec![0i64; n];
            point[0] = x0 as i64;
            loop {
                let mut w = w0;
                for k in 1..n {
                    let (x, wx) = supports[k][pos[k]];
                    point[k] = x as i64;
                    w *= wx;
                }
                let f = ctx
                    .form
                    .eval_i64(&point)
                    .expect("desk-scale form values fit i64");
                let z = match phase {
                    Phase::Real(alpha) => e_alpha_times_f64(alpha, f as f64),
                    Phase::Rational { a, q } => {
                        let r = (f.rem_euclid(q) * (a.rem_euclid(q))).rem_euclid(q);
                        e_unit(r as f64 / q as f64)
                    }
                };
                acc.add(w * z);
                let mut k = 1;
                loop {
                    if k == n {
                        return acc.value();
                    }
                    pos[k] += 1;
                    if pos[k] < supports[k].len() {
                        break;
                    }
                    pos[k] = 0;
                    k += 1;
                }
            }
        })
        .collect();
    let mut total = KahanComplex::new();
    for s in shards {
        total.add(s);
    }
    Ok(total.value())
}

/// `S(α) = Σ_x Πᵢ ψᵢ(xᵢ)Λ(xᵢ) · e(αF(x))` over the weighted support.
pub fn s_alpha(ctx: &ExpSumContext<'_>, alpha: f64) -> Result<Complex64> {
    exp_sum(ctx, Phase::Real(alpha), LambdaMode::PrimePowers)
}

/// `S(a/q)` with the phase reduced exactly in integer arithmetic.
pub fn s_alpha_rational(ctx: &ExpSumContext<'_>, a: i64, q: i64) -> Result<Complex64> {
    if q <= 0 {
        return Err(Error::InvalidParameter("need q ≥ 1".into()));
    }
    exp_sum(ctx, Phase::Rational { a, q }, LambdaMode::PrimePowers)
}

/// `S*(α)`: the same sum with `Λ*` (primes only).
pub fn s_star_alpha(ctx: &ExpSumContext<'_>, alpha: f64) -> Result<Complex64> {
    exp_sum(ctx, Phase::Real(alpha), LambdaMode::PrimesOnly)
}

/// Per-coordinate character slots for the complete sum `A(q,a;…)`.
///
/// A coordinate may carry no character (the `i`-block), a character modulo
/// `q` whose conjugate multiplies the sum (the `(j,χ)` pairs), which also
/// covers the `k`-block since those coordinates simply carry `χ̃χ⁰`.
#[derive(Clone)]
pub struct CharSlots<'a> {
    pub per_coord: Vec<Option<&'a DirichletCharacter>>,
}

impl<'a> CharSlots<'a> {
    pub fn empty(n: usize) -> Self {
        CharSlots {
            per_coord: vec![None; n],
        }
    }
}

/// Complete sum `A(q, a; …) = Σ_{h∈U_qⁿ} Π conj(χ)(h_j) · e(aF(h)/q)`,
/// exact up to the final root-of-unity evaluations.
pub fn complete_sum_a(
    q: u64,
    a: i64,
    form: &IntegerForm,
    slots: &CharSlots<'_>,
    budget: Budget,
) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    let n = form.nvars();
    if slots.per_coord.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: slots.per_coord.len(),
        });
    }
    let a_red = a.rem_euclid(q as i64) as u64;
    if num_integer::gcd(a_red.max(1), q) != 1 && q > 1 {
        return Err(Error::InvalidParameter(format!("gcd(a={a}, q={q}) must be 1")));
    }
    for chi in slots.per_coord.iter().flatten() {
        if chi.modulus() != q {
            return Err(Error::InvalidParameter(
                "character modulus must equal q".into(),
            ));
        }
    }
    if q == 1 {
        // single term h = (1,…,1)ish: U₁ has one residue class
        return Ok(Complex64::new(1.0, 0.0));
    }
    let units: Vec<u64> = (1..q).filter(|&h| num_integer::gcd(h, q) == 1).collect();

    if let Some(coeffs) = form.diagonal_coeffs() {
        // diagonal forms factor into n one-dimensional twisted sums
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            let ci = c.to_i64().expect("desk-scale coefficient").rem_euclid(q as i64) as u64;
            let mut s = KahanComplex::new();
            for &h in &units {
                let mut hp: u64 = 1;
                for _ in 0..form.degree() {
                    hp = hp * h % q;
                }
                let r = (a_red as u128 * ci as u128 % q as u128 * hp as u128 % q as u128) as u64;
                let phase = e_unit(r as f64 / q as f64);
                let chi_val = match slots.per_coord[i] {
                    Some(chi) => chi.value_conj(h),
                    None => Complex64::new(1.0, 0.0),
                };
                s.add(chi_val * phase);
            }
            prod *= s.value();
        }
        return Ok(prod);
    }

    let total = (units.len() as u128).pow(n as u32);
    budget.check("complete_sum_A", total)?;
    let mut acc = KahanComplex::new();
    let mut pos = vec![0usize; n];
    let mut point = vec![0i64; n];
    loop {
        let mut chi_factor = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let h = units[pos[k]];
            point[k] = h as i64;
            if let Some(chi) = slots.per_coord[k] {
                chi_factor *= chi.value_conj(h);
            }
        }
        let f = form.eval_i64(&point).expect("values fit i64");
        let r = (f.rem_euclid(q as i64) as u64 * a_red) % q;
        acc.add(chi_factor * e_unit(r as f64 / q as f64));
        let mut k = 0;
        loop {
            if k == n {
                return Ok(acc.value());
            }
            pos[k] += 1;
            if pos[k] < units.len() {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

/// Observed-versus-bound report for the complete-sum estimate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundCheckReport {
    pub q: u64,
    pub max_abs: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Max `|A(q,a;…)|` over every `a ∈ U_q` and over sampled character tuples,
/// against `q^{n − codim/(2(2d−1)4^d)}` with externally supplied `codim`.
pub fn complete_sum_bound_check(
    q: u64,
    form: &IntegerForm,
    codim: u32,
    char_samples: u32,
    seed: u64,
    budget: Budget,
) -> Result<BoundCheckReport> {
    use rand::{Rng, SeedableRng};
    let n = form.nvars() as f64;
    let d = form.degree();
    let exponent = n - codim as f64 / (2.0 * (2 * d - 1) as f64 * 4f64.powi(d as i32));
    let bound = (q as f64).powf(exponent);
    let chars = crate::arithmetic::characters_mod(q);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs: f64 = 0.0;
    let units: Vec<i64> = (1..=q as i64)
        .filter(|&a| num_integer::gcd(a as u64, q) == 1)
        .collect();
    for &a in &units {
        // principal tuple
        let v = complete_sum_a(q, a, form, &CharSlots::empty(form.nvars()), budget)?;
        max_abs = max_abs.max(v.norm());
        for _ in 0..char_samples {
            let slots: Vec<Option<&DirichletCharacter>> = (0..form.nvars())
                .map(|_| Some(&chars[rng.gen_range(0..chars.len())]))
                .collect();
            let v = complete_sum_a(q, a, form, &CharSlots { per_coord: slots }, budget)?;
            max_abs = max_abs.max(v.norm());
        }
    }
    Ok(BoundCheckReport {
        q,
        max_abs,
        bound,
        ratio: max_abs / bound,
    })
}
