//! Dirichlet characters mod q: group structure, all character sums at once by a
//! DFT over the index lattice, Gauss sums, Pólya's expansion and exact
//! resonance ratios.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{budget, domain, Error, Result};
use crate::numeric::{KahanComplex, KahanSum};
use crate::primes::{factorize, gcd, pow_mod};
use crate::resonators::Resonator;
use crate::Complex64;

/// Largest modulus with full tables.
pub const MAX_MODULUS: u64 = 10_000_000;
/// Largest modulus for resonance-ratio sweeps.
pub const MAX_RATIO_MODULUS: u64 = 100_000;

const NON_UNIT: u32 = u32::MAX;

/// One cyclic factor of (ℤ/qℤ)*.
#[derive(Debug, Clone, Serialize)]
pub struct Component {
    /// prime of the prime-power factor it lives in
    pub prime: u64,
    /// the prime power itself
    pub modulus: u64,
    /// generator mod `modulus` (−1 or 5 for the two 2-adic factors)
    pub generator: u64,
    pub order: usize,
    #[serde(skip)]
    dlog: Vec<u32>,
}

/// The character group mod q with discrete-log tables.
///
/// Characters are indexed row-major over exponent vectors (j₁, …, j_k), the
/// first component varying slowest; χ₀ has index 0 and
/// χ_j(n) = e(Σ j_c ind_c(n)/d_c).
#[derive(Debug, Clone, Serialize)]
pub struct CharacterGroup {
    pub q: u64,
    pub factors: Vec<(u64, u32)>,
    pub components: Vec<Component>,
    pub phi: u64,
    /// group exponent (lcm of the component orders)
    pub exponent: u64,
    #[serde(skip)]
    index: Vec<u32>,
    #[serde(skip)]
    strides: Vec<usize>,
}

fn primitive_root_mod_p(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs: Vec<u64> = factorize(p - 1).into_iter().map(|f| f.0).collect();
    (2..p).find(|&g| fs.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1)).expect("primitive root exists")
}

fn cyclic_dlog(modulus: u64, g: u64, order: usize) -> Vec<u32> {
    let mut t = vec![NON_UNIT; modulus as usize];
    let mut x = 1u64 % modulus;
    for i in 0..order {
        t[x as usize] = i as u32;
        x = x * g % modulus;
    }
    t
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Builds the group for 3 ≤ q ≤ 10⁷.
pub fn build_group(q: u64) -> Result<CharacterGroup> {
    if q < 3 {
        return domain("character group needs q ≥ 3");
    }
    if q > MAX_MODULUS {
        return budget(format!("modulus {q} exceeds the table budget {MAX_MODULUS}"));
    }
    let factors = factorize(q);
    let mut components = Vec::new();
    for &(p, k) in &factors {
        let m = p.pow(k);
        if p == 2 {
            if k >= 2 {
                // n ≡ (−1)^a 5^b mod 2^k
                let half = if k >= 3 { 1usize << (k - 2) } else { 1 };
                let mut da = vec![NON_UNIT; m as usize];
                let mut db = vec![NON_UNIT; m as usize];
                let mut x5 = 1u64;
                for b in 0..half {
                    for a in 0..2u32 {
                        let v = if a == 0 { x5 } else { (m - x5) % m };
                        da[v as usize] = a;
                        db[v as usize] = b as u32;
                    }
                    x5 = x5 * 5 % m;
                }
                components.push(Component { prime: 2, modulus: m, generator: m - 1, order: 2, dlog: da });
                if k >= 3 {
                    components.push(Component { prime: 2, modulus: m, generator: 5, order: half, dlog: db });
                }
            }
        } else {
            let mut g = primitive_root_mod_p(p);
            if k >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            let order = (m / p * (p - 1)) as usize;
            components.push(Component { prime: p, modulus: m, generator: g, order, dlog: cyclic_dlog(m, g, order) });
        }
    }
    let dims: Vec<usize> = components.iter().map(|c| c.order).collect();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let phi: u64 = dims.iter().map(|&d| d as u64).product();
    let exponent = dims.iter().fold(1u64, |a, &d| lcm(a, d as u64));
    let index: Vec<u32> = (0..q)
        .into_par_iter()
        .map(|n| {
            if gcd(n, q) != 1 {
                return NON_UNIT;
            }
            let mut flat = 0usize;
            for (c, s) in components.iter().zip(&strides) {
                flat += c.dlog[(n % c.modulus) as usize] as usize * s;
            }
            flat as u32
        })
        .collect();
    Ok(CharacterGroup { q, factors, components, phi, exponent, index, strides })
}

impl CharacterGroup {
    pub fn orders(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn len(&self) -> usize {
        self.phi as usize
    }

    pub fn is_empty(&self) -> bool {
        self.phi == 0
    }

    /// Flat index vector position of the unit n, or None for gcd(n, q) > 1.
    pub fn index_of(&self, n: u64) -> Option<usize> {
        let v = self.index[(n % self.q) as usize];
        (v != NON_UNIT).then_some(v as usize)
    }

    /// Exponent vector of a flat position.
    pub fn digits(&self, flat: usize) -> Vec<usize> {
        self.strides.iter().zip(&self.components).map(|(s, c)| flat / s % c.order).collect()
    }

    fn from_digits(&self, d: &[usize]) -> usize {
        d.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Index of the conjugate character.
    pub fn conj_index(&self, j: usize) -> usize {
        let d: Vec<usize> = self.digits(j).iter().zip(&self.components).map(|(&a, c)| (c.order - a) % c.order).collect();
        self.from_digits(&d)
    }

    /// χ_j(n) as k with χ_j(n) = e(k/exponent), or None for non-units.
    pub fn chi_exponent(&self, j: usize, n: u64) -> Option<u64> {
        let e = self.index_of(n)?;
        let jd = self.digits(j);
        let ed = self.digits(e);
        let l = self.exponent as u128;
        let mut k: u128 = 0;
        for ((a, b), c) in jd.iter().zip(&ed).zip(&self.components) {
            k += (*a as u128) * (*b as u128) * (l / c.order as u128);
        }
        Some((k % l) as u64)
    }

    pub fn chi(&self, j: usize, n: u64) -> Complex64 {
        match self.chi_exponent(j, n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => unit_root(k, self.exponent),
        }
    }

    /// χ_j(−1) = ±1, computed from exponent digits.
    pub fn parity(&self, j: usize) -> i32 {
        let minus = self.index_of(self.q - 1).expect("−1 is a unit");
        let jd = self.digits(j);
        let md = self.digits(minus);
        // ind(−1) is 0 or d/2 in every component
        let odd: usize = jd.iter().zip(&md).filter(|(_, &m)| m != 0).map(|(&a, _)| a).sum();
        if odd % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Whether χ_j is primitive mod q.
    pub fn is_primitive(&self, j: usize) -> bool {
        let jd = self.digits(j);
        for &(p, k) in &self.factors {
            let ok = if p == 2 {
                let pos: Vec<usize> = (0..self.components.len()).filter(|&i| self.components[i].prime == 2).collect();
                match k {
                    1 => false,
                    2 => jd[pos[0]] == 1,
                    3 => jd[pos[1]] != 0,
                    _ => jd[pos[1]] % 2 == 1,
                }
            } else {
                let i = self.components.iter().position(|c| c.prime == p).expect("odd component");
                if k == 1 {
                    jd[i] != 0
                } else {
                    jd[i] as u64 % p != 0
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Σ_n w(n) χ(n) for every character, with w given on a list of n.
    /// Non-units are skipped.
    pub fn transform<I: IntoIterator<Item = (u64, f64)>>(&self, weights: I) -> Vec<Complex64> {
        let mut hist = vec![0.0f64; self.len()];
        let mut comp = vec![0.0f64; self.len()];
        for (n, w) in weights {
            if let Some(e) = self.index_of(n) {
                // Neumaier per bin
                let s = hist[e];
                let t = s + w;
                if s.abs() >= w.abs() {
                    comp[e] += (s - t) + w;
                } else {
                    comp[e] += (w - t) + s;
                }
                hist[e] = t;
            }
        }
        let h: Vec<f64> = hist.iter().zip(&comp).map(|(a, b)| a + b).collect();
        self.dft_real(&h)
    }

    /// Σ_e h[e] e(⟨j, e⟩) for every j, then made exactly conjugate-symmetric.
    pub fn dft_real(&self, hist: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = hist.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let dims = self.orders();
        let mut planner = FftPlanner::<f64>::new();
        for (axis, &len) in dims.iter().enumerate() {
            if len == 1 {
                continue;
            }
            let inner: usize = dims[axis + 1..].iter().product();
            let fft = planner.plan_fft_inverse(len);
            data.par_chunks_mut(len * inner).for_each(|block| {
                if inner == 1 {
                    fft.process(block);
                } else {
                    let mut line = vec![Complex64::new(0.0, 0.0); len];
                    for i in 0..inner {
                        for k in 0..len {
                            line[k] = block[k * inner + i];
                        }
                        fft.process(&mut line);
                        for k in 0..len {
                            block[k * inner + i] = line[k];
                        }
                    }
                }
            });
        }
        for j in 0..data.len() {
            let c = self.conj_index(j);
            if c == j {
                data[j].im = 0.0;
            } else if c < j {
                data[j] = data[c].conj();
            }
        }
        data
    }
}

fn unit_root(k: u64, l: u64) -> Complex64 {
    // reduce to the first octant-free form for accuracy
    let g = gcd(k, l);
    let (k, l) = (k / g, l / g);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == l {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == l {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * l {
        return Complex64::new(0.0, -1.0);
    }
    let x = 2.0 * PI * (k as f64 / l as f64);
    Complex64::new(x.cos(), x.sin())
}

/// All character sums Σ_{n ≤ N} χ(n).
#[derive(Debug, Clone, Serialize)]
pub struct CharSumTable {
    pub q: u64,
    pub n: u64,
    pub sums: Vec<Complex64>,
}

/// Every Σ_{n ≤ N} χ(n) from one histogram pass and one DFT.
pub fn all_char_sums(group: &CharacterGroup, n: u64) -> Result<CharSumTable> {
    if n == 0 {
        return domain("character sums need N ≥ 1");
    }
    let q = group.q;
    let full = (n / q) as f64;
    let rem = n % q;
    let mut hist = vec![0.0f64; group.len()];
    for m in 0..q {
        if let Some(e) = group.index_of(m) {
            hist[e] = full + if m >= 1 && m <= rem { 1.0 } else { 0.0 };
        }
    }
    let mut sums = group.dft_real(&hist);
    sums[0] = Complex64::new(hist.iter().sum(), 0.0);
    Ok(CharSumTable { q, n, sums })
}

/// max over χ ≠ χ₀ of |Σ_{n ≤ N} χ(n)| with its (smallest-index) witness.
pub fn delta_from_values(values: &[Complex64]) -> (f64, usize) {
    let mods: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let max = mods.iter().skip(1).copied().fold(0.0, f64::max);
    let tol = 1e-12 * max.max(1.0);
    let j = (1..mods.len()).find(|&j| mods[j] >= max - tol).unwrap_or(0);
    (max, j)
}

/// Exact Δ(N, q) with a witness character index.
pub fn delta_exact(q: u64, n: u64) -> Result<(f64, usize)> {
    let g = build_group(q)?;
    delta_exact_in(&g, n)
}

pub fn delta_exact_in(group: &CharacterGroup, n: u64) -> Result<(f64, usize)> {
    if group.len() < 2 {
        return domain("no nontrivial character");
    }
    Ok(delta_from_values(&all_char_sums(group, n)?.sums))
}

/// τ(χ) = Σ_{n mod q} χ(n) e(n/q), summed directly.
pub fn gauss_sum(group: &CharacterGroup, j: usize) -> Complex64 {
    let mut acc = KahanComplex::default();
    let l = group.exponent;
    for n in 1..group.q {
        if let Some(k) = group.chi_exponent(j, n) {
            let angle = 2.0 * PI * ((k as f64 / l as f64) + (n as f64 / group.q as f64));
            acc.add(Complex64::new(angle.cos(), angle.sin()));
        }
    }
    acc.value()
}

/// Both sides of Pólya's expansion for Σ_{n ≤ q/N} χ(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyaReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// 1 + q log q / H
    pub bound: f64,
}

fn require_primitive(group: &CharacterGroup, j: usize) -> Result<()> {
    if !group.is_primitive(j) {
        return Err(Error::Domain(format!("character {j} mod {} is not primitive", group.q)));
    }
    Ok(())
}

pub fn polya_check(group: &CharacterGroup, j: usize, n: u64, h: u64) -> Result<PolyaReport> {
    require_primitive(group, j)?;
    if n == 0 || h == 0 {
        return domain("Pólya check needs N, H ≥ 1");
    }
    let q = group.q;
    let mut lhs = KahanComplex::default();
    for m in 1..=q / n {
        lhs.add(group.chi(j, m));
    }
    let mut acc = KahanComplex::default();
    let nf = n as f64;
    for k in 1..=h {
        let c = group.chi(j, k).conj();
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let hf = k as f64;
        // ±h together: χ̄(−h) = χ̄(−1) χ̄(h)
        let e_minus = |x: f64| Complex64::new((2.0 * PI * x).cos(), -(2.0 * PI * x).sin());
        let plus = c / hf * (Complex64::new(1.0, 0.0) - e_minus(hf / nf));
        let minus = c * group.parity(j) as f64 / (-hf) * (Complex64::new(1.0, 0.0) - e_minus(-hf / nf));
        acc.add(plus + minus);
    }
    let tau = gauss_sum(group, j);
    let rhs = tau / Complex64::new(0.0, 2.0 * PI) * acc.value();
    let lhs = lhs.value();
    Ok(PolyaReport { lhs, rhs, residual: (lhs - rhs).norm(), bound: 1.0 + q as f64 * (q as f64).ln() / h as f64 })
}

/// H = ⌈√(Nq) log q⌉.
pub fn polya_h(q: u64, n: u64) -> u64 {
    ((n as f64 * q as f64).sqrt() * (q as f64).ln()).ceil() as u64
}

/// S(χ) = Σ_{0 < |h| ≤ H} χ̄(h)/h (1 − cos(2πh/N)), computed directly.
pub fn s_chi(group: &CharacterGroup, j: usize, n: u64, h: u64) -> Result<Complex64> {
    require_primitive(group, j)?;
    Ok(s_chi_any(group, j, n, h))
}

fn s_chi_any(group: &CharacterGroup, j: usize, n: u64, h: u64) -> Complex64 {
    if group.parity(j) == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = KahanComplex::default();
    for k in 1..=h {
        let c = group.chi(j, k).conj();
        let kf = k as f64;
        acc.add(c * ((1.0 - (2.0 * PI * kf / n as f64).cos()) / kf));
    }
    acc.value() * 2.0
}

/// S(χ) for every character via one weighted transform.
pub fn all_s_chi(group: &CharacterGroup, n: u64, h: u64) -> Vec<Complex64> {
    let nf = n as f64;
    let t = group.transform((1..=h).map(|k| (k, (1.0 - (2.0 * PI * k as f64 / nf).cos()) / k as f64)));
    t.iter()
        .enumerate()
        .map(|(j, z)| if group.parity(j) == 1 { Complex64::new(0.0, 0.0) } else { z.conj() * 2.0 })
        .collect()
}

/// Which weighted mean to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// |Σ_{χ≠χ₀} |R|² S_N(χ)| / Σ_χ |R|², bounded by Δ(N, q)
    FirstMoment,
    /// Σ_{χ≠χ₀} |R|² |S_N(χ)|² / Σ_χ |R|², bounded by Δ(N, q)²
    SecondMoment,
    /// first moment with S(χ) from Pólya's expansion, bounded by sup |S(χ)|
    DualFirst,
    /// second moment with S(χ), bounded by sup |S(χ)|²
    DualSecond,
}

impl std::str::FromStr for RatioMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first_moment" | "first" => RatioMode::FirstMoment,
            "second_moment" | "second" => RatioMode::SecondMoment,
            "dual_first" => RatioMode::DualFirst,
            "dual_second" => RatioMode::DualSecond,
            _ => return Err(Error::Parse(format!("unknown mode `{s}`"))),
        })
    }
}

/// A weighted mean and the maximum it must not exceed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioReport {
    pub mode: RatioMode,
    pub ratio: f64,
    /// Δ or sup|S| (squared in second-moment modes)
    pub ceiling: f64,
    pub witness: usize,
    /// ratio ≤ ceiling up to 1e−9 relative
    pub holds: bool,
}

/// Exact weighted mean with weights |R(χ)|², R(χ) = φ(q)^{−1/2} Σ_{n ≤ x} r(n)χ(n).
pub fn resonance_ratio_exact(group: &CharacterGroup, res: &Resonator, x: u64, n: u64, mode: RatioMode) -> Result<RatioReport> {
    if group.q > MAX_RATIO_MODULUS {
        return budget(format!("resonance ratios limited to q ≤ {MAX_RATIO_MODULUS}"));
    }
    if x == 0 || n == 0 {
        return domain("resonance ratio needs x, N ≥ 1");
    }
    let list = res.supported_list(x)?;
    let r = group.transform(list.iter().map(|&(m, v, _)| (m, v)));
    let inv_phi = 1.0 / group.phi as f64;
    let w: Vec<f64> = r.iter().map(|z| z.norm_sqr() * inv_phi).collect();
    let values = match mode {
        RatioMode::FirstMoment | RatioMode::SecondMoment => all_char_sums(group, n)?.sums,
        RatioMode::DualFirst | RatioMode::DualSecond => all_s_chi(group, n, polya_h(group.q, n)),
    };
    let den: f64 = w.iter().copied().collect::<KahanSum>().value();
    if !(den > 0.0) {
        return Err(Error::Divergence("resonator vanishes on every character".into()));
    }
    let (sup, witness) = delta_from_values(&values);
    let (ratio, ceiling) = match mode {
        RatioMode::FirstMoment | RatioMode::DualFirst => {
            let mut acc = KahanComplex::default();
            for j in 1..values.len() {
                acc.add(values[j] * w[j]);
            }
            (acc.value().norm() / den, sup)
        }
        RatioMode::SecondMoment | RatioMode::DualSecond => {
            let s: f64 = (1..values.len()).map(|j| values[j].norm_sqr() * w[j]).collect::<KahanSum>().value();
            (s / den, sup * sup)
        }
    };
    let holds = ratio <= ceiling * (1.0 + 1e-9) + 1e-12;
    Ok(RatioReport { mode, ratio, ceiling, witness, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonators::ResonatorSpec;

    #[test]
    fn group_shapes() {
        assert_eq!(build_group(5).unwrap().orders(), vec![4]);
        assert_eq!(build_group(8).unwrap().orders(), vec![2, 2]);
        let g = build_group(15).unwrap();
        let mut o = g.orders();
        o.sort();
        assert_eq!(o, vec![2, 4]);
        assert_eq!(build_group(4).unwrap().orders(), vec![2]);
        assert_eq!(build_group(6).unwrap().orders(), vec![2]);
        assert!(build_group(2).is_err());
        assert!(matches!(build_group(10_000_019), Err(Error::Budget(_))));
        for q in [9u64, 27, 32, 100, 1001] {
            let g = build_group(q).unwrap();
            assert_eq!(g.phi, crate::primes::euler_phi(q));
        }
    }

    #[test]
    fn small_examples() {
        let t = all_char_sums(&build_group(5).unwrap(), 2).unwrap();
        assert_eq!(t.sums[0], Complex64::new(2.0, 0.0));
        let mut mods: Vec<f64> = t.sums[1..].iter().map(|z| z.norm()).collect();
        mods.sort_by(f64::total_cmp);
        assert!(mods[0].abs() < 1e-12 && (mods[2] - 2f64.sqrt()).abs() < 1e-12);
        assert!((delta_exact(5, 2).unwrap().0 - 2f64.sqrt()).abs() < 1e-12);
        assert!((delta_exact(7, 3).unwrap().0 - 2.0).abs() < 1e-12);
        assert!(delta_exact(101, 100).unwrap().0 < 1e-9);
    }

    #[test]
    fn dft_matches_direct() {
        for q in [3u64, 8, 12, 16, 45, 64, 97, 120] {
            let g = build_group(q).unwrap();
            for n in [1, q / 3 + 1, q - 1, 2 * q + 5] {
                let t = all_char_sums(&g, n).unwrap();
                for j in 0..g.len() {
                    let direct: Complex64 = (1..=n).map(|m| g.chi(j, m)).sum();
                    assert!((t.sums[j] - direct).norm() < 1e-9, "q={q} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn parity_and_conjugates() {
        let g = build_group(63).unwrap();
        for j in 0..g.len() {
            let v = g.chi(j, 62);
            assert!((v.re - g.parity(j) as f64).abs() < 1e-12);
            let c = g.conj_index(j);
            assert!((g.chi(c, 5) - g.chi(j, 5).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn primitivity_counts() {
        // number of primitive characters is multiplicative: q=p gives p−2,
        // 4 gives 1, 8 gives 2, 9 gives 4, 16 gives 4, 2·odd gives 0
        let count = |q| {
            let g = build_group(q).unwrap();
            (0..g.len()).filter(|&j| g.is_primitive(j)).count()
        };
        assert_eq!(count(7), 5);
        assert_eq!(count(4), 1);
        assert_eq!(count(8), 2);
        assert_eq!(count(9), 4);
        assert_eq!(count(16), 4);
        assert_eq!(count(14), 0);
        assert_eq!(count(36), 4);
    }

    #[test]
    fn gauss_sum_magnitudes() {
        let g = build_group(5).unwrap();
        assert!((gauss_sum(&g, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let quad = (1..g.len()).find(|&j| g.conj_index(j) == j).unwrap();
        assert!((gauss_sum(&g, quad) - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let g = build_group(16).unwrap();
        for j in (0..g.len()).filter(|&j| g.is_primitive(j)) {
            assert!((gauss_sum(&g, j).norm() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn s_chi_transform_matches_direct() {
        let g = build_group(101).unwrap();
        let (n, h) = (10, 500);
        let all = all_s_chi(&g, n, h);
        for j in 1..g.len() {
            assert!((all[j] - s_chi(&g, j, n, h).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn empty_resonator_ratio() {
        let g = build_group(5).unwrap();
        let res = Resonator::build(&ResonatorSpec::empty()).unwrap();
        let r = resonance_ratio_exact(&g, &res, 1, 2, RatioMode::FirstMoment).unwrap();
        assert!((r.ratio - 0.5).abs() < 1e-12);
        assert!(r.holds);
    }
}
