//! Ground-truth brute-force computations: weighted prime counts, the
//! discrete-orthogonality keystone check, fast diagonal-form counting, and
//! finite-field singular-locus probes.

use crate::arithmetic::SieveTable;
use crate::error::{Budget, Error, Result};
use crate::forms::{IntegerForm, IntegerPolynomial};
use crate::numeric::{Kahan, KahanComplex};
use crate::weights::WeightFamily;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

/// Which von Mangoldt weight rides on each coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMode {
    /// `Λ`: all prime powers.
    PrimePowers,
    /// `Λ*`: primes only.
    PrimesOnly,
}

/// Weighted support of coordinate `i`: all `x` in `[aᵢX, bᵢX]` carrying a
/// nonzero `ψᵢ(x)·Λ(x)` (or `Λ*`) weight.
pub fn lambda_support(
    family: &WeightFamily,
    sieve: &SieveTable,
    i: usize,
    mode: LambdaMode,
) -> Vec<(u64, f64)> {
    let (a, b) = family.support(i);
    let lo = a.floor().max(2.0) as u64;
    let hi = b.ceil() as u64;
    let mut out = Vec::new();
    for x in lo..=hi {
        let lam = match mode {
            LambdaMode::PrimePowers => sieve.von_mangoldt(x),
            LambdaMode::PrimesOnly => sieve.lambda_star(x),
        };
        if lam == 0.0 {
            continue;
        }
        let w = family.psi(i, x as f64) * lam;
        if w != 0.0 {
            out.push((x, w));
        }
    }
    out
}

/// Result of an exact weighted count.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub x_scale: f64,
    pub weighted_count: f64,
    pub raw_count: u64,
    pub enumeration_size: u64,
    pub wall_ms: u128,
}

/// Exact `Σ_x Πᵢ ψᵢ(xᵢ)Λ(xᵢ) · [F(x) = 0]` over the weighted support.
pub fn brute_count(
    form: &IntegerForm,
    family: &WeightFamily,
    sieve: &SieveTable,
    mode: LambdaMode,
    budget: Budget,
) -> Result<CountReport> {
    let start = Instant::now();
    let n = form.nvars();
    if family.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: family.n(),
        });
    }
    let supports: Vec<Vec<(u64, f64)>> = (0..n)
        .map(|i| lambda_support(family, sieve, i, mode))
        .collect();
    let total: u128 = supports.iter().map(|s| s.len() as u128).product();
    budget.check("brute_count", total)?;
    if supports.iter().any(Vec::is_empty) {
        return Ok(CountReport {
            x_scale: family.x_scale(),
            weighted_count: 0.0,
            raw_count: 0,
            enumeration_size: 0,
            wall_ms: start.elapsed().as_millis(),
        });
    }
    // shard on the leading coordinate; ordered reduction keeps results
    // independent of the thread count
    let shards: Vec<(f64, u64)> = supports[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = Kahan::new();
            let mut raw = 0u64;
            let mut idx = vec![0usize; n];
            let mut point = vec![0i64; n];
            let mut weight = vec![0.0f64; n];
            point[0] = x0 as i64;
            weight[0] = w0;
            // odometer over coordinates 1..n
            loop {
                for k in 1..n {
                    let (x, w) = supports[k][idx[k]];
                    point[k] = x as i64;
                    weight[k] = w;
                }
                let zero = match form.eval_i64(&point) {
                    Some(v) => v == 0,
                    None => {
                        let big: Vec<num_bigint::BigInt> =
                            point.iter().map(|&v| v.into()).collect();
                        form.eval(&big).map(|v| v == 0.into()).unwrap_or(false)
                    }
                };
                if zero {
                    raw += 1;
                    acc.add(weight.iter().product());
                }
                let mut k = 1;
                loop {
                    if k == n {
                        return (acc.value(), raw);
                    }
                    idx[k] += 1;
                    if idx[k] < supports[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .collect();
    let mut weighted = Kahan::new();
    let mut raw = 0u64;
    for (w, r) in shards {
        weighted.add(w);
        raw += r;
    }
    Ok(CountReport {
        x_scale: family.x_scale(),
        weighted_count: weighted.value(),
        raw_count: raw,
        enumeration_size: total as u64,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Meet-in-the-middle count for diagonal forms `Σ cᵢxᵢ^d = 0`: hash-join on
/// partial sums, halving the enumeration exponent. Output contract matches
/// [`brute_count`].
pub fn diagonal_fast_count(
    form: &IntegerForm,
    family: &WeightFamily,
    sieve: &SieveTable,
    mode: LambdaMode,
    budget: Budget,
) -> Result<CountReport> {
    let start = Instant::now();
    let coeffs = form
        .diagonal_coeffs()
        .ok_or_else(|| Error::InvalidParameter("diagonal_fast_count needs a diagonal form".into()))?;
    let coeffs: Vec<i128> = coeffs
        .iter()
        .map(|c| c.to_i128().expect("desk-scale coefficient"))
        .collect();
    let n = form.nvars();
    if family.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: family.n(),
        });
    }
    let d = form.degree();
    let supports: Vec<Vec<(u64, f64)>> = (0..n)
        .map(|i| lambda_support(family, sieve, i, mode))
        .collect();
    let split = n / 2;
    let half_product = |range: std::ops::Range<usize>| -> u128 {
        range.map(|i| supports[i].len() as u128).product()
    };
    let left_n = half_product(0..split);
    let right_n = half_product(split..n);
    budget.check("diagonal_fast_count", left_n + right_n)?;

    // value → (summed weight, tuple count); BTreeMap keeps the merge ordered
    let build_side = |range: std::ops::Range<usize>| -> BTreeMap<i128, (Kahan, u64)> {
        let mut map: BTreeMap<i128, (Kahan, u64)> = BTreeMap::new();
        let idxs: Vec<usize> = range.collect();
        if idxs.iter().any(|&i| supports[i].is_empty()) {
            return map;
        }
        let mut pos = vec![0usize; idxs.len()];
        loop {
            let mut key: i128 = 0;
            let mut w = 1.0f64;
            for (slot, &i) in idxs.iter().enumerate() {
                let (x, wx) = supports[i][pos[slot]];
                let mut pw: i128 = 1;
                for _ in 0..d {
                    pw *= x as i128;
                }
                key += coeffs[i] * pw;
                w *= wx;
            }
            let ent = map.entry(key).or_insert_with(|| (Kahan::new(), 0));
            ent.0.add(w);
            ent.1 += 1;
            let mut k = 0;
            loop {
                if k == pos.len() {
                    return map;
                }
                pos[k] += 1;
                if pos[k] < supports[idxs[k]].len() {
                    break;
                }
                pos[k] = 0;
                k += 1;
            }
        }
    };
    let left = build_side(0..split);
    let right = build_side(split..n);
    let mut weighted = Kahan::new();
    let mut raw = 0u64;
    for (key, (wl, cl)) in &left {
        if let Some((wr, cr)) = right.get(&(-key)) {
            weighted.add(wl.value() * wr.value());
            raw += cl * cr;
        }
    }
    Ok(CountReport {
        x_scale: family.x_scale(),
        weighted_count: weighted.value(),
        raw_count: raw,
        enumeration_size: (left_n + right_n) as u64,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Upper bound for `|F|` over the weighted support box (coefficient sums
/// against per-coordinate maxima).
pub fn sup_f_bound(form: &IntegerForm, family: &WeightFamily) -> u64 {
    let n = form.nvars();
    let maxima: Vec<f64> = (0..n).map(|i| family.support(i).1.ceil()).collect();
    let mut bound = 0.0f64;
    for m in form.base().monomials() {
        let mut t = m.coeff.to_f64().unwrap().abs();
        for (i, &e) in m.exponents.iter().enumerate() {
            t *= maxima[i].powi(e as i32);
        }
        bound += t;
    }
    bound.ceil() as u64
}

/// The keystone exactness check: finite Fourier inversion of the exponential
/// sum recovers the brute-force weighted count.
///
/// With `Q > 2·max|F|` over the support, `(1/Q) Σ_{j<Q} S(j/Q)` counts
/// exactly the weighted solutions of `F = 0`.
pub fn discrete_orthogonality_check(
    form: &IntegerForm,
    family: &WeightFamily,
    sieve: &SieveTable,
    mode: LambdaMode,
    budget: Budget,
) -> Result<(f64, f64, f64)> {
    let n = form.nvars();
    let bound = sup_f_bound(form, family);
    if bound == 0 {
        return Err(Error::InvalidParameter(
            "degenerate form: F vanishes identically on the support box".into(),
        ));
    }
    let q = 2 * bound + 1;
    let supports: Vec<Vec<(u64, f64)>> = (0..n)
        .map(|i| lambda_support(family, sieve, i, mode))
        .collect();
    let tuples: u128 = supports.iter().map(|s| s.len() as u128).product();
    budget.check("discrete_orthogonality_check", tuples * q as u128)?;

    // flatten the tuple grid once: residue of F mod q and the weight
    let mut residues: Vec<u32> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    if supports.iter().all(|s| !s.is_empty()) {
        let mut pos = vec![0usize; n];
        let mut point = vec![0i64; n];
        'outer: loop {
            let mut w = 1.0;
            for k in 0..n {
                let (x, wx) = supports[k][pos[k]];
                point[k] = x as i64;
                w *= wx;
            }
            let f = form
                .eval_i64(&point)
                .expect("support values fit i64 at desk scale");
            residues.push(f.rem_euclid(q as i64) as u32);
            weights.push(w);
            let mut k = 0;
            loop {
                if k == n {
                    break 'outer;
                }
                pos[k] += 1;
                if pos[k] < supports[k].len() {
                    break;
                }
                pos[k] = 0;
                k += 1;
            }
        }
    }

    // phase table e(k/q), k < q
    let phases: Vec<Complex64> = (0..q)
        .map(|k| crate::numeric::e_unit(k as f64 / q as f64))
        .collect();
    let partials: Vec<Complex64> = (0..q)
        .into_par_iter()
        .map(|j| {
            let mut s = KahanComplex::new();
            for (&r, &w) in residues.iter().zip(&weights) {
                let idx = (j as u64 * r as u64 % q) as usize;
                s.add(w * phases[idx]);
            }
            s.value()
        })
        .collect();
    let mut total = KahanComplex::new();
    for p in partials {
        total.add(p);
    }
    let lhs = total.value().re / q as f64;

    let rhs = brute_count(form, family, sieve, mode, budget)?.weighted_count;
    let rel = if rhs != 0.0 {
        (lhs - rhs).abs() / rhs.abs()
    } else {
        lhs.abs()
    };
    Ok((lhs, rhs, rel))
}

/// Finite-field probe of a polynomial system's zero locus.
#[derive(Debug, Clone, Serialize)]
pub struct CodimProbe {
    pub p: u64,
    pub nvars: usize,
    pub points: u64,
    pub exhaustive: bool,
    pub dim_estimate: i32,
    pub codim_estimate: i32,
}

#[derive(Debug, Clone, Copy)]
pub enum ProbeMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

fn eval_mod_p(poly: &IntegerPolynomial, point: &[u64], p: u64) -> u64 {
    let mut acc: u64 = 0;
    for m in poly.monomials() {
        let c = m
            .coeff
            .to_i64()
            .expect("desk-scale coefficient")
            .rem_euclid(p as i64) as u64;
        let mut t = c;
        for (&x, &e) in point.iter().zip(&m.exponents) {
            for _ in 0..e {
                t = t * x % p;
            }
        }
        acc = (acc + t) % p;
    }
    acc
}

/// Counts 𝔽_p points where every polynomial of the system vanishes; the
/// dimension estimate is `round(log_p count)`. A heuristic probe, not a
/// certificate.
pub fn codim_probe_system(
    system: &[IntegerPolynomial],
    nvars: usize,
    p: u64,
    mode: ProbeMode,
    budget: Budget,
) -> Result<CodimProbe> {
    assert!(system.iter().all(|q| q.nvars() == nvars));
    let (points, exhaustive) = match mode {
        ProbeMode::Exhaustive => {
            let total = (p as u128).checked_pow(nvars as u32).ok_or(Error::BudgetExceeded {
                what: "codim_probe",
                needed: u128::MAX,
                budget: budget.0,
            })?;
            budget.check("codim_probe", total)?;
            let mut count = 0u64;
            let mut point = vec![0u64; nvars];
            'outer: loop {
                if system.iter().all(|q| eval_mod_p(q, &point, p) == 0) {
                    count += 1;
                }
                let mut k = 0;
                loop {
                    if k == nvars {
                        break 'outer;
                    }
                    point[k] += 1;
                    if point[k] < p {
                        break;
                    }
                    point[k] = 0;
                    k += 1;
                }
            }
            (count, true)
        }
        ProbeMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            let mut point = vec![0u64; nvars];
            for _ in 0..samples {
                for slot in point.iter_mut() {
                    *slot = rng.gen_range(0..p);
                }
                if system.iter().all(|q| eval_mod_p(q, &point, p) == 0) {
                    hits += 1;
                }
            }
            // scale the hit fraction back to p^nvars
            let est = (hits as f64 / samples as f64) * (p as f64).powi(nvars as i32);
            (est.round().max(1.0) as u64, false)
        }
    };
    let dim = if points == 0 {
        0
    } else {
        ((points as f64).ln() / (p as f64).ln()).round() as i32
    };
    Ok(CodimProbe {
        p,
        nvars,
        points,
        exhaustive,
        dim_estimate: dim,
        codim_estimate: nvars as i32 - dim,
    })
}

/// Probes the singular locus `V* = {∇F = 0}` of a form over 𝔽_p.
pub fn codim_probe_form(
    form: &IntegerForm,
    p: u64,
    mode: ProbeMode,
    budget: Budget,
) -> Result<CodimProbe> {
    codim_probe_system(&form.gradient(), form.nvars(), p, mode, budget)
}

/// Runs the probe at two primes and keeps the larger dimension estimate.
pub fn codim_probe_two_primes(
    form: &IntegerForm,
    p1: u64,
    p2: u64,
    budget: Budget,
) -> Result<CodimProbe> {
    let a = codim_probe_form(form, p1, ProbeMode::Exhaustive, budget)?;
    let b = codim_probe_form(form, p2, ProbeMode::Exhaustive, budget)?;
    Ok(if a.dim_estimate >= b.dim_estimate { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::SmoothWeight;

    fn quadric() -> IntegerForm {
        IntegerForm::diagonal(&[1, 1, -1, -1], 2)
    }

    fn family(x: f64, x0: &[f64], delta: f64) -> WeightFamily {
        let w = SmoothWeight::make_bump(delta, 2).unwrap();
        WeightFamily::new(x, x0.to_vec(), w).unwrap()
    }

    #[test]
    fn brute_count_finds_permutation_solutions() {
        // X=30 with wide weights: tuples like (3,5,5,3) solve the quadric
        let sieve = SieveTable::build(100).unwrap();
        let fam = family(30.0, &[0.2, 0.2, 0.2, 0.2], 0.15);
        let rep = brute_count(&quadric(), &fam, &sieve, LambdaMode::PrimePowers, Budget::default())
            .unwrap();
        assert!(rep.raw_count > 0);
        assert!(rep.weighted_count > 0.0);
        // (3,5,5,3): check it is inside the support and counted
        let w = fam.psi(0, 3.0);
        assert!(w > 0.0, "3 lies in the support window");
    }

    #[test]
    fn positive_form_counts_zero() {
        let sieve = SieveTable::build(100).unwrap();
        let fam = family(30.0, &[0.2, 0.2], 0.15);
        let f = IntegerForm::diagonal(&[1, 1], 2);
        let rep = brute_count(&f, &fam, &sieve, LambdaMode::PrimePowers, Budget::default()).unwrap();
        assert_eq!(rep.raw_count, 0);
        assert_eq!(rep.weighted_count, 0.0);
    }

    #[test]
    fn weighted_bounded_by_raw_times_logs() {
        let sieve = SieveTable::build(200).unwrap();
        let fam = family(100.0, &[0.3, 0.4, 0.4, 0.3], 0.08);
        let rep = brute_count(&quadric(), &fam, &sieve, LambdaMode::PrimePowers, Budget::default())
            .unwrap();
        let cap = (100.0f64.ln().powi(4)) * rep.raw_count as f64;
        assert!(rep.weighted_count <= cap);
        assert!(rep.raw_count as u64 <= rep.enumeration_size);
    }

    #[test]
    fn diagonal_fast_count_matches_brute() {
        let sieve = SieveTable::build(200).unwrap();
        let fam = family(100.0, &[0.3, 0.4, 0.4, 0.3], 0.08);
        let f = quadric();
        for mode in [LambdaMode::PrimePowers, LambdaMode::PrimesOnly] {
            let a = brute_count(&f, &fam, &sieve, mode, Budget::default()).unwrap();
            let b = diagonal_fast_count(&f, &fam, &sieve, mode, Budget::default()).unwrap();
            assert_eq!(a.raw_count, b.raw_count);
            assert!((a.weighted_count - b.weighted_count).abs() <= 1e-9 * a.weighted_count.max(1.0));
        }
        // n=2: x₁² − x₂² counts the diagonal pairs p = q
        let fam2 = family(100.0, &[0.3, 0.3], 0.08);
        let f2 = IntegerForm::diagonal(&[1, -1], 2);
        let rep = diagonal_fast_count(&f2, &fam2, &sieve, LambdaMode::PrimesOnly, Budget::default())
            .unwrap();
        let primes_in_window = sieve
            .primes(38)
            .into_iter()
            .filter(|&p| p >= 22 && fam2.psi(0, p as f64) > 0.0)
            .count() as u64;
        assert_eq!(rep.raw_count, primes_in_window);
        // rejects non-diagonal forms
        let xy = IntegerForm::new(IntegerPolynomial::parse_text(2, "1:1,1").unwrap(), 2).unwrap();
        assert!(diagonal_fast_count(&xy, &fam2, &sieve, LambdaMode::PrimesOnly, Budget::default())
            .is_err());
    }

    #[test]
    fn orthogonality_small_quadric() {
        let sieve = SieveTable::build(200).unwrap();
        let fam = family(100.0, &[0.3, 0.4, 0.4, 0.3], 0.08);
        let (lhs, rhs, rel) = discrete_orthogonality_check(
            &quadric(),
            &fam,
            &sieve,
            LambdaMode::PrimePowers,
            Budget::default(),
        )
        .unwrap();
        assert!(rhs > 0.0);
        assert!(rel <= 1e-6, "lhs={lhs} rhs={rhs} rel={rel}");
    }

    #[test]
    fn orthogonality_univariate_square_is_zero() {
        // n=1, F=x², X=50: no prime-power zeros of F on the support
        let sieve = SieveTable::build(100).unwrap();
        let fam = family(50.0, &[0.5], 0.2);
        let f = IntegerForm::diagonal(&[1], 2);
        let (lhs, rhs, _) =
            discrete_orthogonality_check(&f, &fam, &sieve, LambdaMode::PrimePowers, Budget::default())
                .unwrap();
        assert_eq!(rhs, 0.0);
        assert!(lhs.abs() < 1e-9);
    }

    #[test]
    fn orthogonality_rejects_degenerate_form() {
        let sieve = SieveTable::build(100).unwrap();
        let fam = family(50.0, &[0.5], 0.2);
        let zero = IntegerForm::new(IntegerPolynomial::zero(1), 2).unwrap();
        assert!(matches!(
            discrete_orthogonality_check(&zero, &fam, &sieve, LambdaMode::PrimePowers, Budget::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn codim_probe_examples() {
        let budget = Budget::default();
        // diagonal quadric, p=5: V* = {0}, codim 4
        let probe = codim_probe_form(&quadric(), 5, ProbeMode::Exhaustive, budget).unwrap();
        assert_eq!(probe.points, 1);
        assert_eq!(probe.dim_estimate, 0);
        assert_eq!(probe.codim_estimate, 4);
        // F = x₁x₂, p=7: gradient (x₂,x₁), V* = {0}, codim 2
        let xy = IntegerForm::new(IntegerPolynomial::parse_text(2, "1:1,1").unwrap(), 2).unwrap();
        let probe = codim_probe_form(&xy, 7, ProbeMode::Exhaustive, budget).unwrap();
        assert_eq!(probe.points, 1);
        assert_eq!(probe.codim_estimate, 2);
        // diagonal forms give codim n for every p ≥ 3 tested
        for p in [3u64, 5, 7, 11] {
            let probe = codim_probe_form(&quadric(), p, ProbeMode::Exhaustive, budget).unwrap();
            assert_eq!(probe.codim_estimate, 4, "p={p}");
        }
        // two-prime wrapper takes the max dimension estimate
        let two = codim_probe_two_primes(&quadric(), 3, 5, budget).unwrap();
        assert_eq!(two.codim_estimate, 4);
    }

    #[test]
    fn sampled_probe_is_reasonable() {
        // the plane x₁ = 0 inside 𝔽_p³ has dimension 2
        let budget = Budget::default();
        let sys = vec![IntegerPolynomial::variable(3, 0)];
        let probe = codim_probe_system(
            &sys,
            3,
            11,
            ProbeMode::Sampled {
                samples: 20_000,
                seed: 7,
            },
            budget,
        )
        .unwrap();
        assert_eq!(probe.dim_estimate, 2);
        assert!(!probe.exhaustive);
    }
}
