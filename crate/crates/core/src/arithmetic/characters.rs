//! Dirichlet characters with exact root-of-unity arithmetic.
//!
//! The unit group `(ℤ/qℤ)*` is split by CRT into cyclic components with
//! explicit generators (odd prime powers are cyclic; `2^e` splits as
//! `⟨−1⟩ × ⟨3⟩` for `e ≥ 3`). A character is a tuple of exponents against
//! those generators, and every value is stored as an exact rational rotation
//! `a/m`, i.e. `e(a/m)`, so products of character values never round.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_integer::Integer;

/// An exact rotation `e(num/den)`, kept reduced with `0 ≤ num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rotation {
    num: u64,
    den: u64,
}

impl Rotation {
    pub fn zero() -> Self {
        Rotation { num: 0, den: 1 }
    }

    /// `e(num/den)` reduced modulo 1.
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0);
        let n = num.rem_euclid(den as i64) as u64;
        let g = n.gcd(&den);
        Rotation {
            num: n / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    /// Rotation product = exact fraction addition mod 1.
    pub fn mul(&self, other: &Rotation) -> Rotation {
        let den = self.den.lcm(&other.den);
        let num = (self.num * (den / self.den) + other.num * (den / other.den)) % den;
        let g = num.gcd(&den);
        Rotation {
            num: num / g,
            den: den / g,
        }
    }

    pub fn conj(&self) -> Rotation {
        if self.num == 0 {
            *self
        } else {
            Rotation {
                num: self.den - self.num,
                den: self.den,
            }
        }
    }

    pub fn pow(&self, k: u64) -> Rotation {
        Rotation::new(((self.num as u128 * k as u128) % self.den as u128) as i64, self.den)
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Multiplicative order as a root of unity.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> Complex64 {
        let (s, c) = (std::f64::consts::TAU * self.num as f64 / self.den as f64).sin_cos();
        Complex64::new(c, s)
    }
}

/// One cyclic CRT component of `(ℤ/qℤ)*`: modulus `p^e`, component order,
/// and the discrete-log table against the chosen generator. For `2^e`
/// (`e ≥ 3`) there are two components sharing the modulus.
#[derive(Debug, Clone)]
struct CyclicComponent {
    prime_power: u64,
    order: u64,
    /// dlog[x mod p^e] = exponent of the generator, for units only
    dlog: Vec<u32>,
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mm = m as u128;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo an odd prime power.
fn primitive_root(p: u64, e: u32) -> u64 {
    let order_p = p - 1;
    let factors = distinct_prime_factors(order_p);
    let mut g = 0;
    'outer: for cand in 2..p {
        for &f in &factors {
            if mod_pow(cand, order_p / f, p) == 1 {
                continue 'outer;
            }
        }
        g = cand;
        break;
    }
    assert!(g != 0, "no primitive root mod {p}");
    if e == 1 {
        return g;
    }
    // lift: g generates mod p^e unless g^{p-1} ≡ 1 mod p²
    if mod_pow(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn components_of(q: u64) -> Vec<CyclicComponent> {
    let mut out = Vec::new();
    for (p, e) in factorize_u64(q) {
        let pe = p.pow(e);
        if p == 2 {
            match e {
                1 => {} // trivial group
                2 => {
                    // ⟨3⟩ of order 2 mod 4
                    let mut dlog = vec![u32::MAX; 4];
                    dlog[1] = 0;
                    dlog[3] = 1;
                    out.push(CyclicComponent {
                        prime_power: 4,
                        order: 2,
                        dlog,
                    });
                }
                _ => {
                    // ⟨−1⟩ × ⟨3⟩, orders 2 and 2^{e−2}
                    let half = pe / 4;
                    let mut dlog_sign = vec![u32::MAX; pe as usize];
                    let mut dlog_three = vec![u32::MAX; pe as usize];
                    let mut x = 1u64;
                    for j in 0..half {
                        dlog_sign[x as usize] = 0;
                        dlog_three[x as usize] = j as u32;
                        let neg = pe - x;
                        dlog_sign[neg as usize] = 1;
                        dlog_three[neg as usize] = j as u32;
                        x = x * 3 % pe;
                    }
                    out.push(CyclicComponent {
                        prime_power: pe,
                        order: 2,
                        dlog: dlog_sign,
                    });
                    out.push(CyclicComponent {
                        prime_power: pe,
                        order: half,
                        dlog: dlog_three,
                    });
                }
            }
        } else {
            let g = primitive_root(p, e);
            let order = pe / p * (p - 1);
            let mut dlog = vec![u32::MAX; pe as usize];
            let mut x = 1u64;
            for j in 0..order {
                dlog[x as usize] = j as u32;
                x = x * g % pe;
            }
            out.push(CyclicComponent {
                prime_power: pe,
                order,
                dlog,
            });
        }
    }
    out
}

/// A Dirichlet character modulo `q`, stored as its full rotation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    /// `table[r]` for `0 ≤ r < q`: `Some(e(a/m))` when `gcd(r,q)=1`
    table: Vec<Option<Rotation>>,
    principal: bool,
    conductor: u64,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.principal
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Exact value at `x`; `None` encodes 0 (non-coprime argument).
    pub fn rotation(&self, x: u64) -> Option<Rotation> {
        self.table[(x % self.modulus) as usize]
    }

    pub fn value(&self, x: u64) -> Complex64 {
        match self.rotation(x) {
            Some(r) => r.value(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn value_conj(&self, x: u64) -> Complex64 {
        match self.rotation(x) {
            Some(r) => r.conj().value(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        self.table
            .iter()
            .flatten()
            .map(|r| r.order())
            .fold(1u64, |a, b| a.lcm(&b))
    }

    fn from_table(modulus: u64, table: Vec<Option<Rotation>>) -> Self {
        let principal = table.iter().flatten().all(Rotation::is_one);
        let conductor = conductor_of(modulus, &table);
        DirichletCharacter {
            modulus,
            table,
            principal,
            conductor,
        }
    }
}

/// Smallest `r | q` such that the character is constant on residues that
/// agree modulo `r` (equivalently, trivial on the kernel of `U_q → U_r`).
fn conductor_of(q: u64, table: &[Option<Rotation>]) -> u64 {
    if q == 1 {
        return 1;
    }
    for r in (1..=q).filter(|d| q % d == 0) {
        let trivial_on_kernel = (1..=q)
            .filter(|&x| x % r == 1 % r && x.gcd(&q) == 1)
            .all(|x| table[(x % q) as usize].map(|t| t.is_one()).unwrap_or(false));
        if trivial_on_kernel {
            return r;
        }
    }
    q
}

/// All `φ(q)` Dirichlet characters modulo `q` (principal character first).
pub fn characters_mod(q: u64) -> Vec<DirichletCharacter> {
    assert!(q >= 1);
    if q == 1 {
        return vec![DirichletCharacter::from_table(1, vec![Some(Rotation::zero())])];
    }
    let comps = components_of(q);
    // exponent odometer over the component orders
    let orders: Vec<u64> = comps.iter().map(|c| c.order).collect();
    let mut exps = vec![0u64; comps.len()];
    let mut out = Vec::new();
    loop {
        let mut table: Vec<Option<Rotation>> = vec![None; q as usize];
        for (x, slot) in table.iter_mut().enumerate().take(q as usize).skip(1) {
            let xu = x as u64;
            if xu.gcd(&q) != 1 {
                continue;
            }
            let mut rot = Rotation::zero();
            for (c, &k) in comps.iter().zip(&exps) {
                let d = c.dlog[(xu % c.prime_power) as usize];
                debug_assert!(d != u32::MAX);
                rot = rot.mul(&Rotation::new((k as i64) * (d as i64), c.order));
            }
            *slot = Some(rot);
        }
        if q == 2 {
            table[1] = Some(Rotation::zero());
        }
        out.push(DirichletCharacter::from_table(q, table));
        // increment odometer
        let mut i = 0;
        loop {
            if i == exps.len() {
                out.sort_by_key(|c| !c.is_principal());
                return out;
            }
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// The primitive character modulo the conductor `r` that induces `chi`,
/// together with `r`. The principal character decomposes to modulus 1.
pub fn conductor_decompose(chi: &DirichletCharacter) -> Result<(DirichletCharacter, u64)> {
    let q = chi.modulus;
    let r = chi.conductor;
    if r == q {
        return Ok((chi.clone(), r));
    }
    let mut table: Vec<Option<Rotation>> = vec![None; r as usize];
    if r == 1 {
        table[0] = Some(Rotation::zero());
        return Ok((DirichletCharacter::from_table(1, table), 1));
    }
    for y in 1..r {
        if y.gcd(&r) != 1 {
            continue;
        }
        // lift y to a residue coprime to q
        let mut x = y;
        while x.gcd(&q) != 1 {
            x += r;
            if x > q + r {
                return Err(Error::InvalidParameter(
                    "no coprime lift found during conductor decomposition".into(),
                ));
            }
        }
        table[y as usize] = chi.table[(x % q) as usize];
    }
    let prim = DirichletCharacter::from_table(r, table);
    debug_assert_eq!(prim.conductor(), r, "induced character must be primitive");
    Ok((prim, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::sieve::euler_phi_u64;
    use num_complex::Complex64;

    #[test]
    fn group_sizes_match_phi() {
        for q in 1..=60 {
            assert_eq!(characters_mod(q).len() as u64, euler_phi_u64(q), "q={q}");
        }
    }

    #[test]
    fn q1_trivial_character() {
        let chars = characters_mod(1);
        assert_eq!(chars.len(), 1);
        assert!(chars[0].is_principal());
        assert_eq!(chars[0].value(17), Complex64::new(1.0, 0.0));
        assert_eq!(chars[0].conductor(), 1);
    }

    #[test]
    fn q5_generator_rotation() {
        // (ℤ/5)* = ⟨2⟩; some character sends 2 ↦ e(1/4)
        let chars = characters_mod(5);
        assert_eq!(chars.len(), 4);
        assert!(chars
            .iter()
            .any(|c| c.rotation(2) == Some(Rotation::new(1, 4))));
    }

    #[test]
    fn q8_exponent_two() {
        let chars = characters_mod(8);
        assert_eq!(chars.len(), 4);
        for c in &chars {
            assert!(c.order() <= 2, "group exponent of (ℤ/8)* is 2");
        }
    }

    #[test]
    fn character_multiplicativity_exact() {
        for q in [5u64, 8, 12, 36, 49] {
            for chi in characters_mod(q) {
                for a in 1..q {
                    for b in 1..q {
                        if a.gcd(&q) == 1 && b.gcd(&q) == 1 {
                            let lhs = chi.rotation(a).unwrap().mul(&chi.rotation(b).unwrap());
                            let rhs = chi.rotation(a * b % q).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
                assert!(chi.rotation(1).unwrap().is_one());
            }
        }
    }

    #[test]
    fn orthogonality_to_q50() {
        for q in 1..=50u64 {
            let chars = characters_mod(q);
            let phi = chars.len() as f64;
            for a in 1..=q {
                for b in 1..=q {
                    if a.gcd(&q) != 1 || b.gcd(&q) != 1 {
                        continue;
                    }
                    let mut s = Complex64::new(0.0, 0.0);
                    for chi in &chars {
                        s += chi.value(a) * chi.value(b).conj();
                    }
                    let expect = if a % q == b % q { phi } else { 0.0 };
                    assert!(
                        (s - Complex64::new(expect, 0.0)).norm() <= 1e-9,
                        "q={q} a={a} b={b} got {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn conductor_examples() {
        // principal mod 6 → (trivial, 1)
        let chars = characters_mod(6);
        let principal = chars.iter().find(|c| c.is_principal()).unwrap();
        let (prim, r) = conductor_decompose(principal).unwrap();
        assert_eq!(r, 1);
        assert!(prim.is_principal());

        // the character mod 8 determined by x mod 4 has conductor 4
        let chars8 = characters_mod(8);
        let half = Some(Rotation::new(1, 2));
        let one = Some(Rotation::zero());
        let lifted = chars8
            .iter()
            .find(|c| c.rotation(3) == half && c.rotation(5) == one)
            .expect("χ₄ lifted to mod 8 exists");
        assert_eq!(lifted.conductor(), 4);
        let (prim, r) = conductor_decompose(lifted).unwrap();
        assert_eq!(r, 4);
        // induced values agree on residues coprime to 8
        for x in [1u64, 3, 5, 7] {
            assert_eq!(prim.rotation(x % 4), lifted.rotation(x));
        }

        // a primitive character decomposes to itself
        let chars5 = characters_mod(5);
        for c in &chars5 {
            if !c.is_principal() {
                let (p, r) = conductor_decompose(c).unwrap();
                assert_eq!(r, 5);
                assert_eq!(&p, c);
            }
        }
    }

    #[test]
    fn induced_character_matches_on_lifts() {
        // every character mod 12 is induced by its conductor decomposition
        for chi in characters_mod(12) {
            let (prim, r) = conductor_decompose(&chi).unwrap();
            for x in 1..12u64 {
                if x.gcd(&12) == 1 {
                    assert_eq!(chi.rotation(x), prim.rotation(x % r), "x={x} r={r}");
                }
            }
        }
    }
}
