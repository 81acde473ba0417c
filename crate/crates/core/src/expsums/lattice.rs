//! Lattice counters for the geometry-of-numbers step: the counts
//! `𝓜(α; U′; V′; P)` and `M(û; v̂)`, the shrinking-lemma count `𝔜(Z)`, and
//! the rational-approximation extraction of the minor-arc dichotomy.

use crate::error::{Budget, Error, Result};
use crate::forms::MultilinearTensor;
use crate::numeric::dist_to_int;

/// Specification of a lattice count against `‖αΓ(·; ·, eᵢ)‖ < P`.
pub struct LatticeCountSpec<'a> {
    pub tensor: &'a MultilinearTensor,
    pub alpha: f64,
    /// `U′`: the `u`-slots range over `[−U′, U′]^h` each
    pub u_bound: f64,
    /// `V′`: the free `v`-slots range over `[−V′, V′]^h` each
    pub v_bound: f64,
    /// `P`: the distance-to-integer threshold (must be positive)
    pub threshold: f64,
    /// When set, only the last `u`-slot scans: `M(û; v̂)` with the listed
    /// `d−1` fixed `u`-vectors and `d−1` fixed `v`-vectors.
    pub fixed: Option<FixedSlots>,
}

pub struct FixedSlots {
    pub u_hat: Vec<Vec<i64>>,
    pub v_hat: Vec<Vec<i64>>,
}

fn symmetric_range(bound: f64) -> Vec<i64> {
    let top = bound.floor().max(0.0) as i64;
    (-top..=top).collect()
}

/// Walks every assignment of `free` vectors (length-`h` each over `range`)
/// calling `visit`; returns early when `visit` says stop.
fn for_each_point(
    slots: usize,
    h: usize,
    range: &[i64],
    mut visit: impl FnMut(&[Vec<i64>]) -> bool,
) {
    let dims = slots * h;
    if dims == 0 {
        let empty: Vec<Vec<i64>> = Vec::new();
        visit(&empty);
        return;
    }
    let mut idx = vec![0usize; dims];
    let mut vecs = vec![vec![range[0]; h]; slots];
    loop {
        for s in 0..slots {
            for c in 0..h {
                vecs[s][c] = range[idx[s * h + c]];
            }
        }
        if !visit(&vecs) {
            return;
        }
        let mut k = 0;
        loop {
            if k == dims {
                return;
            }
            idx[k] += 1;
            if idx[k] < range.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn passes(spec: &LatticeCountSpec<'_>, us: &[&[i64]], v_hat: &[&[i64]]) -> bool {
    let h = spec.tensor.h();
    for i in 0..h {
        let mut ei = vec![0i64; h];
        ei[i] = 1;
        let mut vs: Vec<&[i64]> = v_hat.to_vec();
        vs.push(&ei);
        let gamma = spec
            .tensor
            .eval_i64(us, &vs)
            .expect("lattice boxes stay in i64 range");
        if dist_to_int(spec.alpha * gamma as f64) >= spec.threshold {
            return false;
        }
    }
    true
}

/// Exact count of integral points satisfying `‖αΓ(u̲; v̂, eᵢ)‖ < P` for all
/// `i`. Full-range mode counts `(u̲, v̂)`; fixed mode counts only the last
/// `u`-slot (`M(û; v̂)`).
pub fn lattice_count_m(spec: &LatticeCountSpec<'_>, budget: Budget) -> Result<u64> {
    if spec.threshold <= 0.0 {
        return Err(Error::InvalidParameter("threshold P must be positive".into()));
    }
    let h = spec.tensor.h();
    let d = spec.tensor.d() as usize;
    let u_range = symmetric_range(spec.u_bound);
    let v_range = symmetric_range(spec.v_bound);
    match &spec.fixed {
        Some(fx) => {
            if fx.u_hat.len() != d - 1 || fx.v_hat.len() != d - 1 {
                return Err(Error::DimensionMismatch {
                    expected: d - 1,
                    got: fx.u_hat.len().min(fx.v_hat.len()),
                });
            }
            budget.check("lattice_count_M", (u_range.len() as u128).pow(h as u32))?;
            let v_hat: Vec<&[i64]> = fx.v_hat.iter().map(Vec::as_slice).collect();
            let mut count = 0u64;
            for_each_point(1, h, &u_range, |last| {
                let mut us: Vec<&[i64]> = fx.u_hat.iter().map(Vec::as_slice).collect();
                us.push(&last[0]);
                if passes(spec, &us, &v_hat) {
                    count += 1;
                }
                true
            });
            Ok(count)
        }
        None => {
            let total = (u_range.len() as u128)
                .pow((h * d) as u32)
                .saturating_mul((v_range.len() as u128).pow((h * (d - 1)) as u32));
            budget.check("lattice_count_M", total)?;
            let mut count = 0u64;
            for_each_point(d, h, &u_range, |us| {
                let us_refs: Vec<&[i64]> = us.iter().map(Vec::as_slice).collect();
                for_each_point(d - 1, h, &v_range, |vh| {
                    let vh_refs: Vec<&[i64]> = vh.iter().map(Vec::as_slice).collect();
                    if passes(spec, &us_refs, &vh_refs) {
                        count += 1;
                    }
                    true
                });
                true
            });
            Ok(count)
        }
    }
}

/// The shrinking-lemma count `𝔜(Z)`: integer solutions of `|yᵢ| < γᵢZ` and
/// `|𝔏ᵢ(y₁..y_h) − y_{h+i}| < γᵢ⁻¹Z` for symmetric linear forms
/// `𝔏ᵢ = Σⱼ cᵢⱼ yⱼ`.
pub fn shrink_count_y(c: &[Vec<i64>], gammas: &[f64], z: f64) -> Result<u64> {
    let h = gammas.len();
    if c.len() != h || c.iter().any(|row| row.len() != h) {
        return Err(Error::DimensionMismatch {
            expected: h,
            got: c.len(),
        });
    }
    for i in 0..h {
        for j in 0..h {
            if c[i][j] != c[j][i] {
                return Err(Error::InvalidParameter("matrix must be symmetric".into()));
            }
        }
    }
    if z <= 0.0 || gammas.iter().any(|&g| g <= 1.0) {
        return Err(Error::InvalidParameter(
            "need Z > 0 and every γᵢ > 1".into(),
        ));
    }
    // integers strictly inside (a, b): ceil(b) − floor(a) − 1
    let open_count = |a: f64, b: f64| -> u64 {
        let c = b.ceil() as i64 - a.floor() as i64 - 1;
        c.max(0) as u64
    };
    let first_range: Vec<Vec<i64>> = gammas
        .iter()
        .map(|&g| {
            let b = g * z;
            let top = if b.fract() == 0.0 {
                b as i64 - 1
            } else {
                b.floor() as i64
            };
            (-top.max(0)..=top.max(0)).collect()
        })
        .collect();
    let mut total = 0u64;
    let mut idx = vec![0usize; h];
    loop {
        let y: Vec<i64> = (0..h).map(|i| first_range[i][idx[i]]).collect();
        let mut prod = 1u64;
        for i in 0..h {
            let l: i64 = (0..h).map(|j| c[i][j] * y[j]).sum();
            let half = z / gammas[i];
            prod *= open_count(l as f64 - half, l as f64 + half);
            if prod == 0 {
                break;
            }
        }
        total += prod;
        let mut k = 0;
        loop {
            if k == h {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < first_range[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Scans the points counted by `𝓜(α; U′; V′; P)` for one with
/// `Γ(u̲; v̂, e_{i₀}) ≠ 0`; returns `(q, a, |qα − a|)` with `q = |Γ|` and `a`
/// the nearest integer to `αq`. `None` signals that every counted point lies
/// on the variety (the `𝒩(𝒵)` branch of the dichotomy).
pub fn rational_approx_from_gamma(
    spec: &LatticeCountSpec<'_>,
    budget: Budget,
) -> Result<Option<(u64, i64, f64)>> {
    if spec.fixed.is_some() {
        return Err(Error::InvalidParameter(
            "rational approximation extraction uses full-range mode".into(),
        ));
    }
    let h = spec.tensor.h();
    let d = spec.tensor.d() as usize;
    let u_range = symmetric_range(spec.u_bound);
    let v_range = symmetric_range(spec.v_bound);
    let total = (u_range.len() as u128)
        .pow((h * d) as u32)
        .saturating_mul((v_range.len() as u128).pow((h * (d - 1)) as u32));
    budget.check("rational_approx_from_gamma", total)?;
    let mut found: Option<(u64, i64, f64)> = None;
    for_each_point(d, h, &u_range, |us| {
        let us_refs: Vec<&[i64]> = us.iter().map(Vec::as_slice).collect();
        let mut keep_going = true;
        for_each_point(d - 1, h, &v_range, |vh| {
            let vh_refs: Vec<&[i64]> = vh.iter().map(Vec::as_slice).collect();
            if !passes(spec, &us_refs, &vh_refs) {
                return true;
            }
            for i in 0..h {
                let mut ei = vec![0i64; h];
                ei[i] = 1;
                let mut vs: Vec<&[i64]> = vh_refs.clone();
                vs.push(&ei);
                let gamma = spec.tensor.eval_i64(&us_refs, &vs).expect("i64 range");
                if gamma != 0 {
                    let q = gamma.unsigned_abs();
                    let a = (spec.alpha * q as f64).round() as i64;
                    found = Some((q, a, (q as f64 * spec.alpha - a as f64).abs()));
                    keep_going = false;
                    return false;
                }
            }
            true
        });
        keep_going
    });
    Ok(found)
}
