//! Resonator coefficient families, their multiplicative extensions, and the
//! weighted sums built from them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{budget, domain, Error, Result};
use crate::numeric::KahanSum;
use crate::parallel::{combine, with_threads};
use crate::primes::{self, factorize, gcd};
use crate::specfun::{FGrid, FSigma};

/// Largest prime that may enter a support.
pub const SUPPORT_PRIME_LIMIT: u64 = 100_000_000;
/// Default ceiling on the F_SIGMA truncation point.
pub const F_SIGMA_P_MAX_CAP: u64 = 10_000_000;
/// Largest N for the dense (sieve) summation path.
pub const DENSE_SUM_LIMIT: u64 = 10_000_000;
/// Largest number of supported integers a single enumeration may visit.
pub const ENUMERATION_LIMIT: u64 = 50_000_000;

/// Coefficient family on primes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum Family {
    /// r(p) = f_σ(p/M) for p ≤ p_max.
    #[serde(rename = "F_SIGMA")]
    FSigma { sigma: f64, m: f64, p_max: u64 },
    /// r(p) = L log p / p on P < p < P².
    #[serde(rename = "WINDOW_LLOGP")]
    WindowLlogp { p: f64, l: f64 },
    /// r(p) = λ / p^σ on M < p < M².
    #[serde(rename = "WINDOW_PSIGMA")]
    WindowPsigma { m: f64, sigma: f64, lambda: f64 },
    /// r(p) = λ / (√p log p) on λ² < p ≤ exp(log² λ).
    #[serde(rename = "SQRT_WINDOW")]
    SqrtWindow { lambda: f64 },
    /// r(p) = value on p ≤ p_upper.
    #[serde(rename = "TINY_N")]
    TinyN { value: f64, p_upper: f64 },
    /// No primes: r(1) = 1 and nothing else.
    #[serde(rename = "EMPTY")]
    Empty,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::FSigma { .. } => "F_SIGMA",
            Family::WindowLlogp { .. } => "WINDOW_LLOGP",
            Family::WindowPsigma { .. } => "WINDOW_PSIGMA",
            Family::SqrtWindow { .. } => "SQRT_WINDOW",
            Family::TinyN { .. } => "TINY_N",
            Family::Empty => "EMPTY",
        }
    }
}

/// A resonator: coefficient family, extension rule and excluded primes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonatorSpec {
    pub family: Family,
    /// Squarefree extension (r(p^k) = 0 for k ≥ 2) instead of completely multiplicative.
    pub squarefree_only: bool,
    /// Primes forced to r(p) = 0.
    pub excluded_primes: Vec<u64>,
    /// All primes p ≤ this bound are forced to r(p) = 0.
    pub exclude_up_to: u64,
}

impl ResonatorSpec {
    fn new(family: Family) -> Self {
        Self { family, squarefree_only: false, excluded_primes: Vec::new(), exclude_up_to: 0 }
    }

    pub fn empty() -> Self {
        Self::new(Family::Empty)
    }

    /// f_σ(p/M) truncated where f_σ drops below 1e−14 (capped at 10⁷).
    pub fn f_sigma(sigma: f64, m: f64) -> Result<Self> {
        let c = crate::specfun::sigma_params(sigma)?.c_sigma;
        if !(m >= 1.0) {
            return domain("F_SIGMA needs M ≥ 1");
        }
        // f ≤ (cM/p)^σ, so f < 1e−14 once p > cM·10^{14/σ}
        let cut = c * m * 10f64.powf(14.0 / sigma);
        let p_max = if cut >= F_SIGMA_P_MAX_CAP as f64 { F_SIGMA_P_MAX_CAP } else { cut.ceil() as u64 };
        Ok(Self::new(Family::FSigma { sigma, m, p_max }))
    }

    pub fn f_sigma_truncated(sigma: f64, m: f64, p_max: u64) -> Self {
        Self::new(Family::FSigma { sigma, m, p_max })
    }

    /// L log p / p on P < p < P² with L = √(MP) / (log P (1 + ε) √2).
    pub fn window_llogp(m: f64, p: f64, eps: f64) -> Result<Self> {
        if !(p > 1.0 && m > 0.0 && eps > -1.0) {
            return domain("WINDOW_LLOGP needs P > 1, M > 0, ε > −1");
        }
        let l = (m * p).sqrt() / (p.ln() * (1.0 + eps) * std::f64::consts::SQRT_2);
        Ok(Self::new(Family::WindowLlogp { p, l }))
    }

    /// λ/p^σ on M < p < M² with λ = (1 − ε) √((2σ − 1)/(2σ)) M^σ.
    pub fn window_psigma(m: f64, sigma: f64, eps: f64) -> Result<Self> {
        if !(sigma > 0.5 && sigma < 1.0 && m > 1.0 && eps < 1.0) {
            return domain("WINDOW_PSIGMA needs 1/2 < σ < 1, M > 1, ε < 1");
        }
        let lambda = (1.0 - eps) * ((2.0 * sigma - 1.0) / (2.0 * sigma)).sqrt() * m.powf(sigma);
        Ok(Self::new(Family::WindowPsigma { m, sigma, lambda }))
    }

    /// λ/(√p log p) on λ² < p ≤ exp(log² λ).
    pub fn sqrt_window(lambda: f64) -> Result<Self> {
        if !(lambda > std::f64::consts::E) {
            return domain("SQRT_WINDOW needs λ > e");
        }
        Ok(Self::new(Family::SqrtWindow { lambda }))
    }

    /// 1 − (log₂ q)^{−2} on p ≤ log q / (log₂ q)^5, from log q.
    pub fn tiny_n(log_q: f64) -> Result<Self> {
        let l2 = log_q.ln();
        if !(l2 > 1.0) {
            return domain("TINY_N needs log log q > 1");
        }
        Ok(Self::new(Family::TinyN { value: 1.0 - l2.powi(-2), p_upper: log_q / l2.powi(5) }))
    }

    /// Constant value on p ≤ p_upper, for desk-scale experiments.
    pub fn tiny_n_desk(value: f64, p_upper: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return domain("TINY_N value must lie in (0, 1)");
        }
        Ok(Self::new(Family::TinyN { value, p_upper }))
    }

    pub fn squarefree(mut self, on: bool) -> Self {
        self.squarefree_only = on;
        self
    }

    pub fn excluding(mut self, primes: &[u64]) -> Self {
        self.excluded_primes.extend_from_slice(primes);
        self.excluded_primes.sort_unstable();
        self.excluded_primes.dedup();
        self
    }

    /// Zeroes r(p) for every prime p | q.
    pub fn excluding_divisors_of(self, q: u64) -> Self {
        let ps: Vec<u64> = factorize(q).into_iter().map(|(p, _)| p).collect();
        self.excluding(&ps)
    }

    pub fn excluding_up_to(mut self, bound: u64) -> Self {
        self.exclude_up_to = self.exclude_up_to.max(bound);
        self
    }

    fn is_excluded(&self, p: u64) -> bool {
        p <= self.exclude_up_to || self.excluded_primes.binary_search(&p).is_ok()
    }

    /// Closed range of primes that can carry a nonzero coefficient.
    pub fn prime_range(&self) -> Option<(u64, u64)> {
        let r = match &self.family {
            Family::Empty => return None,
            Family::FSigma { p_max, .. } => (2, *p_max),
            Family::WindowLlogp { p, .. } => (p.floor() as u64 + 1, ceil_minus(p * p)),
            Family::WindowPsigma { m, .. } => (m.floor() as u64 + 1, ceil_minus(m * m)),
            Family::SqrtWindow { lambda } => ((lambda * lambda).floor() as u64 + 1, lambda.ln().powi(2).exp().floor() as u64),
            Family::TinyN { p_upper, .. } => (2, p_upper.floor() as u64),
        };
        if r.1 < r.0.max(2) {
            None
        } else {
            Some((r.0.max(2), r.1))
        }
    }

    /// Support window as reals (no integer overflow for huge windows).
    pub fn real_range(&self) -> Option<(f64, f64)> {
        self.prime_range()?;
        Some(match &self.family {
            Family::WindowLlogp { p, .. } => (*p, p * p),
            Family::WindowPsigma { m, .. } => (*m, m * m),
            Family::SqrtWindow { lambda } => (lambda * lambda, lambda.ln().powi(2).exp()),
            _ => {
                let (lo, hi) = self.prime_range()?;
                (lo as f64, hi as f64)
            }
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

// largest integer strictly below x
fn ceil_minus(x: f64) -> u64 {
    let c = x.ceil();
    if c == x {
        c as u64 - 1
    } else {
        x.floor() as u64
    }
}

impl fmt::Display for ResonatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family.name())?;
        match &self.family {
            Family::FSigma { sigma, m, p_max } => write!(f, ";sigma={sigma};m={m};p_max={p_max}")?,
            Family::WindowLlogp { p, l } => write!(f, ";p={p};l={l}")?,
            Family::WindowPsigma { m, sigma, lambda } => write!(f, ";m={m};sigma={sigma};lambda={lambda}")?,
            Family::SqrtWindow { lambda } => write!(f, ";lambda={lambda}")?,
            Family::TinyN { value, p_upper } => write!(f, ";value={value};p_upper={p_upper}")?,
            Family::Empty => {}
        }
        if self.squarefree_only {
            write!(f, ";squarefree=1")?;
        }
        if !self.excluded_primes.is_empty() {
            let list: Vec<String> = self.excluded_primes.iter().map(|p| p.to_string()).collect();
            write!(f, ";exclude={}", list.join(","))?;
        }
        if self.exclude_up_to > 0 {
            write!(f, ";exclude_up_to={}", self.exclude_up_to)?;
        }
        Ok(())
    }
}

impl FromStr for ResonatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv: HashMap<&str, &str> = HashMap::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            if kv.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::Parse(format!("duplicate key `{k}`")));
            }
        }
        let num = |k: &str| -> Result<f64> {
            kv.get(k)
                .ok_or_else(|| Error::Parse(format!("missing key `{k}`")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        let int = |k: &str| -> Result<u64> {
            kv.get(k)
                .ok_or_else(|| Error::Parse(format!("missing key `{k}`")))?
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        let family = match *kv.get("family").ok_or_else(|| Error::Parse("missing key `family`".into()))? {
            "F_SIGMA" => Family::FSigma { sigma: num("sigma")?, m: num("m")?, p_max: int("p_max")? },
            "WINDOW_LLOGP" => Family::WindowLlogp { p: num("p")?, l: num("l")? },
            "WINDOW_PSIGMA" => Family::WindowPsigma { m: num("m")?, sigma: num("sigma")?, lambda: num("lambda")? },
            "SQRT_WINDOW" => Family::SqrtWindow { lambda: num("lambda")? },
            "TINY_N" => Family::TinyN { value: num("value")?, p_upper: num("p_upper")? },
            "EMPTY" => Family::Empty,
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        let mut spec = ResonatorSpec::new(family);
        if let Some(v) = kv.get("squarefree") {
            spec.squarefree_only = match *v {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(Error::Parse(format!("squarefree: `{v}`"))),
            };
        }
        if let Some(v) = kv.get("exclude") {
            let ps = v
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse(format!("exclude: {e}"))))
                .collect::<Result<Vec<u64>>>()?;
            spec = spec.excluding(&ps);
        }
        if kv.contains_key("exclude_up_to") {
            spec.exclude_up_to = int("exclude_up_to")?;
        }
        let known = ["family", "sigma", "m", "p_max", "p", "l", "lambda", "value", "p_upper", "squarefree", "exclude", "exclude_up_to"];
        if let Some(k) = kv.keys().find(|k| !known.contains(k)) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        Ok(spec)
    }
}

static F_CACHE: OnceLock<Mutex<HashMap<u64, Arc<FSigma>>>> = OnceLock::new();

/// Shared f_σ tables keyed by the bits of σ.
pub fn cached_f_sigma(sigma: f64) -> Result<Arc<FSigma>> {
    let cache = F_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().expect("f_σ cache poisoned").get(&sigma.to_bits()) {
        return Ok(f.clone());
    }
    let built = Arc::new(FSigma::build(sigma, FGrid::default())?);
    let mut guard = cache.lock().expect("f_σ cache poisoned");
    if guard.len() >= 256 {
        guard.clear();
    }
    guard.insert(sigma.to_bits(), built.clone());
    Ok(built)
}

/// Summation weight for [`sum_r`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Weight {
    /// Σ r(n)
    One,
    /// Σ n r(n)
    N,
    /// Σ r(n)²
    Square,
    /// Σ t(n)/√n with t(p^k) = r(p^k)/(1 + r(p^k)²)
    TOverSqrt,
}

/// A spec with its support primes and values materialized.
#[derive(Debug, Clone)]
pub struct Resonator {
    spec: ResonatorSpec,
    primes: Vec<u64>,
    values: Vec<f64>,
}

/// Coefficient of a single prime under `spec` (0 outside the support).
fn family_value(family: &Family, p: u64, fs: Option<&FSigma>) -> f64 {
    family_value_at(family, p as f64, fs)
}

/// The prime-value rule evaluated at a real point t (F_SIGMA needs its table).
pub fn family_value_at(family: &Family, pf: f64, fs: Option<&FSigma>) -> f64 {
    match family {
        Family::Empty => 0.0,
        Family::FSigma { m, p_max, .. } => {
            if pf > *p_max as f64 {
                0.0
            } else {
                fs.map_or(0.0, |f| f.value(pf / m))
            }
        }
        Family::WindowLlogp { p: big_p, l } => {
            if pf > *big_p && pf < big_p * big_p {
                l * pf.ln() / pf
            } else {
                0.0
            }
        }
        Family::WindowPsigma { m, sigma, lambda } => {
            if pf > *m && pf < m * m {
                lambda * pf.powf(-sigma)
            } else {
                0.0
            }
        }
        Family::SqrtWindow { lambda } => {
            if pf > lambda * lambda && pf <= lambda.ln().powi(2).exp() {
                lambda / (pf.sqrt() * pf.ln())
            } else {
                0.0
            }
        }
        Family::TinyN { value, p_upper } => {
            if pf <= *p_upper {
                *value
            } else {
                0.0
            }
        }
    }
}

impl Resonator {
    pub fn build(spec: &ResonatorSpec) -> Result<Self> {
        let fs = match &spec.family {
            Family::FSigma { sigma, .. } => Some(cached_f_sigma(*sigma)?),
            _ => None,
        };
        let mut primes = Vec::new();
        let mut values = Vec::new();
        if let Some((lo, hi)) = spec.prime_range() {
            if hi > SUPPORT_PRIME_LIMIT {
                return budget(format!("support reaches p = {hi} > {SUPPORT_PRIME_LIMIT}"));
            }
            primes::for_each_prime(lo, hi, |p| {
                if !spec.is_excluded(p) {
                    let v = family_value(&spec.family, p, fs.as_deref());
                    if v > 0.0 {
                        primes.push(p);
                        values.push(v);
                    }
                }
            });
        }
        Ok(Self { spec: spec.clone(), primes, values })
    }

    pub fn spec(&self) -> &ResonatorSpec {
        &self.spec
    }

    pub fn support(&self) -> (&[u64], &[f64]) {
        (&self.primes, &self.values)
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn max_prime(&self) -> Option<u64> {
        self.primes.last().copied()
    }

    /// r(p) for a prime p.
    pub fn prime_value(&self, p: u64) -> f64 {
        self.primes.binary_search(&p).map_or(0.0, |i| self.values[i])
    }

    /// r(p^k) under the spec's extension rule.
    pub fn prime_power_value(&self, p: u64, k: u32) -> f64 {
        if k == 0 {
            1.0
        } else if self.spec.squarefree_only && k > 1 {
            0.0
        } else {
            self.prime_value(p).powi(k as i32)
        }
    }

    /// r(n) by factorization.
    pub fn r_value(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return domain("r(n) needs n ≥ 1");
        }
        Ok(factorize(n).iter().map(|&(p, k)| self.prime_power_value(p, k)).product())
    }

    /// t(n) = Π_{p^k ∥ n} r(p^k)/(1 + r(p^k)²).
    pub fn t_value(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return domain("t(n) needs n ≥ 1");
        }
        Ok(factorize(n)
            .iter()
            .map(|&(p, k)| {
                let r = self.prime_power_value(p, k);
                r / (1.0 + r * r)
            })
            .product())
    }

    fn max_exponent(&self) -> u32 {
        if self.spec.squarefree_only {
            1
        } else {
            64
        }
    }

    /// Visits every supported n ≤ x (r(n) ≠ 0) with (n, r(n), t(n)) in
    /// lexicographic order of prime-power factorizations; n = 1 first.
    pub fn for_each_supported<F: FnMut(u64, f64, f64)>(&self, x: u64, mut f: F) -> Result<()> {
        if x == 0 {
            return Ok(());
        }
        f(1, 1.0, 1.0);
        let mut visited = 1u64;
        for i in 0..self.primes.len() {
            if self.primes[i] > x {
                break;
            }
            self.dfs_branch(x, i, &mut f, &mut visited)?;
        }
        Ok(())
    }

    // all supported n ≤ x whose smallest prime factor is primes[i]
    fn dfs_branch<F: FnMut(u64, f64, f64)>(&self, x: u64, i: usize, f: &mut F, visited: &mut u64) -> Result<()> {
        let p = self.primes[i];
        let rp = self.values[i];
        let mut pk = 1u64;
        let mut rk = 1.0;
        for k in 1..=self.max_exponent() {
            if pk > x / p {
                break;
            }
            pk *= p;
            rk *= rp;
            let tk = rk / (1.0 + rk * rk);
            self.dfs(x, pk, rk, tk, i + 1, f, visited)?;
            let _ = k;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs<F: FnMut(u64, f64, f64)>(
        &self,
        x: u64,
        n: u64,
        r: f64,
        t: f64,
        start: usize,
        f: &mut F,
        visited: &mut u64,
    ) -> Result<()> {
        f(n, r, t);
        *visited += 1;
        if *visited > ENUMERATION_LIMIT {
            return budget(format!("more than {ENUMERATION_LIMIT} supported integers"));
        }
        for j in start..self.primes.len() {
            let p = self.primes[j];
            if n > x / p {
                break;
            }
            let rp = self.values[j];
            let mut m = n;
            let mut rk = 1.0;
            for _ in 0..self.max_exponent() {
                if m > x / p {
                    break;
                }
                m *= p;
                rk *= rp;
                let tk = rk / (1.0 + rk * rk);
                self.dfs(x, m, r * rk, t * tk, j + 1, f, visited)?;
            }
        }
        Ok(())
    }

    /// Supported n ≤ x as (n, r(n), t(n)), sorted by n.
    pub fn supported_list(&self, x: u64) -> Result<Vec<(u64, f64, f64)>> {
        let mut v = Vec::new();
        self.for_each_supported(x, |n, r, t| v.push((n, r, t)))?;
        v.sort_unstable_by_key(|e| e.0);
        Ok(v)
    }

    fn dense_applicable(&self, n: u64) -> bool {
        n <= DENSE_SUM_LIMIT
            && matches!(self.spec.family, Family::FSigma { .. } | Family::TinyN { .. })
            && self.primes.len() as u64 > n.min(1 << 20) / 16
    }

    /// r(n) for every n ≤ N from a smallest-prime-factor sieve.
    pub fn dense_values(&self, n: u64) -> Result<Vec<f64>> {
        if n > DENSE_SUM_LIMIT {
            return budget(format!("dense tabulation limited to N ≤ {DENSE_SUM_LIMIT}"));
        }
        let n = n as usize;
        let spf = primes::spf_table(n);
        let mut r = vec![0.0f64; n + 1];
        if n >= 1 {
            r[1] = 1.0;
        }
        for k in 2..=n {
            let p = spf[k] as usize;
            let m = k / p;
            r[k] = if self.spec.squarefree_only && m % p == 0 {
                0.0
            } else {
                r[m] * self.prime_value(p as u64)
            };
        }
        Ok(r)
    }
}

/// Σ_{n ≤ N} w(n) r(n) with `threads` workers; bit-identical for any count.
pub fn sum_r(res: &Resonator, n: u64, weight: Weight, threads: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if weight != Weight::TOverSqrt && res.dense_applicable(n) {
        return sum_r_dense(res, n, weight, threads);
    }
    sum_r_dfs(res, n, weight, threads)
}

fn weigh(weight: Weight, n: u64, r: f64, t: f64) -> f64 {
    match weight {
        Weight::One => r,
        Weight::N => n as f64 * r,
        Weight::Square => r * r,
        Weight::TOverSqrt => t / (n as f64).sqrt(),
    }
}

/// Enumeration path: one branch per smallest prime, branches summed in order.
pub fn sum_r_dfs(res: &Resonator, n: u64, weight: Weight, threads: usize) -> Result<f64> {
    let top = res.primes.partition_point(|&p| p <= n);
    let branches: Vec<usize> = (0..top).collect();
    let parts: Vec<Result<f64>> = with_threads(threads, || {
        branches
            .par_iter()
            .map(|&i| {
                let mut acc = KahanSum::new();
                let mut visited = 0u64;
                res.dfs_branch(n, i, &mut |m, r, t| acc.add(weigh(weight, m, r, t)), &mut visited)?;
                Ok(acc.value())
            })
            .collect()
    });
    let mut partials = Vec::with_capacity(parts.len() + 1);
    partials.push(weigh(weight, 1, 1.0, 1.0));
    for p in parts {
        partials.push(p?);
    }
    Ok(combine(&partials))
}

/// Sieve path: r tabulated to N, then summed in fixed chunks.
pub fn sum_r_dense(res: &Resonator, n: u64, weight: Weight, threads: usize) -> Result<f64> {
    if weight == Weight::TOverSqrt {
        return domain("dense path does not carry t(n)");
    }
    let r = res.dense_values(n)?;
    const CHUNK: usize = 1 << 16;
    let chunks: Vec<(usize, usize)> = (1..=n as usize)
        .step_by(CHUNK)
        .map(|lo| (lo, (lo + CHUNK).min(n as usize + 1)))
        .collect();
    let partials: Vec<f64> = with_threads(threads, || {
        chunks
            .par_iter()
            .map(|&(lo, hi)| {
                let mut acc = KahanSum::new();
                for (k, rv) in r[lo..hi].iter().enumerate() {
                    if *rv != 0.0 {
                        acc.add(weigh(weight, (lo + k) as u64, *rv, 0.0));
                    }
                }
                acc.value()
            })
            .collect()
    });
    Ok(combine(&partials))
}

/// Loss factor B = (Σ_n r(n)²) / (Σ_{n ≤ x/N} r(n)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BRatio {
    /// log of the full square sum (Euler product).
    pub log_numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

pub fn b_ratio(res: &Resonator, x: f64, n: f64, threads: usize) -> Result<BRatio> {
    if !(x >= 1.0 && n >= 1.0) {
        return domain("B-ratio needs x, N ≥ 1");
    }
    let log_num = log_square_mass(res)?;
    let limit = (x / n).floor() as u64;
    let den = sum_r(res, limit.max(1), Weight::Square, threads)?;
    Ok(BRatio { log_numerator: log_num, denominator: den, ratio: (log_num - den.ln()).exp() })
}

/// log Σ_n r(n)² as an Euler product.
pub fn log_square_mass(res: &Resonator) -> Result<f64> {
    let mut acc = KahanSum::new();
    for &v in &res.values {
        let v2 = v * v;
        if res.spec.squarefree_only {
            acc.add(v2.ln_1p());
        } else {
            if v2 >= 1.0 {
                return Err(Error::Divergence(format!("r(p)² = {v2} ≥ 1 in a completely multiplicative square sum")));
            }
            acc.add(-(-v2).ln_1p());
        }
    }
    Ok(acc.value())
}

/// Outcome of the two-part tail condition on f(p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub log_y: f64,
    pub alpha: f64,
    pub cond1_lhs: f64,
    pub cond1_rhs: f64,
    pub margin1: f64,
    pub cond2_sum: f64,
    pub cond2_threshold: f64,
    pub margin2: f64,
    pub pass: bool,
}

/// Numerical stand-in for the "o(1)" in the second tail condition.
pub const TAIL_COND2_THRESHOLD: f64 = 0.1;

/// Checks, for f(p) on primes and α = (log log y)²/log y,
/// (1) Σ log p · f/(1 − f) < log y − log y/log log y, and
/// (2) Σ_p Σ_{k log p > log y/(log log y)⁴} f(p)^k p^{kα} below a fixed threshold.
pub fn tail_condition_check(f_values: &[(u64, f64)], log_y: f64) -> Result<TailReport> {
    if !(log_y > 1.0) {
        return domain("tail check needs log y > 1");
    }
    let ll = log_y.ln();
    let alpha = ll * ll / log_y;
    let rhs = log_y - log_y / ll;
    let kcut = log_y / ll.powi(4);
    let mut s1 = KahanSum::new();
    let mut s2 = KahanSum::new();
    let mut diverged = false;
    for &(p, f) in f_values {
        if f <= 0.0 {
            continue;
        }
        let lp = (p as f64).ln();
        if f >= 1.0 {
            diverged = true;
            break;
        }
        s1.add(lp * f / (1.0 - f));
        // geometric tail from the first admissible k
        let ratio_log = f.ln() + alpha * lp;
        if ratio_log >= 0.0 {
            diverged = true;
            break;
        }
        let k0 = ((kcut / lp).floor() + 1.0).max(1.0);
        let log_term = k0 * ratio_log - (-ratio_log.exp_m1()).ln();
        s2.add(log_term.exp());
    }
    let (lhs, sum2) = if diverged { (f64::INFINITY, f64::INFINITY) } else { (s1.value(), s2.value()) };
    let margin1 = rhs - lhs;
    let margin2 = TAIL_COND2_THRESHOLD - sum2;
    Ok(TailReport {
        log_y,
        alpha,
        cond1_lhs: lhs,
        cond1_rhs: rhs,
        margin1,
        cond2_sum: sum2,
        cond2_threshold: TAIL_COND2_THRESHOLD,
        margin2,
        pass: margin1 > 0.0 && margin2 > 0.0,
    })
}

impl Resonator {
    /// Tail check for f = r² (the square-sum weights).
    pub fn tail_check(&self, log_y: f64) -> Result<TailReport> {
        let fv: Vec<(u64, f64)> = self.primes.iter().zip(&self.values).map(|(&p, &v)| (p, v * v)).collect();
        tail_condition_check(&fv, log_y)
    }
}

/// Kernel of a coprime double sum over m₁, m₂ ≤ z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kernel {
    /// r(m₁) r(m₂)/max(m₁, m₂) · G(x/max; m₁m₂)
    FundSecond,
    /// r(m₁) r(m₂) m₁m₂/max³ · G(x/max; m₁m₂)
    FundSecondDual,
    /// t(m₁) t(m₂) m₁m₂/max³
    MainExtraction,
}

/// How the inner square sums over g were evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InnerSum {
    /// Σ_{g ≤ Y, (g, m₁m₂) = 1} r(g)², divided by the full Euler product.
    Finite,
    /// The limit Y → ∞: 1 / Π_{p | m₁m₂} (local factor).
    Complete,
    /// Kernel without an inner sum.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleSum {
    pub value: f64,
    pub terms: u64,
    pub inner: InnerSum,
}

/// Largest number of m-values in a double sum (pairs grow quadratically).
pub const DOUBLE_SUM_MAX_TERMS: usize = 20_000;
/// Largest x for which inner sums are enumerated exactly.
pub const INNER_SUM_MAX_X: f64 = 1e8;

struct InnerTable<'a> {
    res: &'a Resonator,
    gs: Vec<u64>,
    prefix: Vec<f64>,
}

impl InnerTable<'_> {
    // Σ_{g ≤ y, (g, P) = 1} r(g)², P given as a list of distinct primes
    fn coprime_sum(&self, y: f64, avoid: &[u64]) -> f64 {
        if y < 1.0 {
            return 0.0;
        }
        match avoid.split_last() {
            None => {
                let k = self.gs.partition_point(|&g| (g as f64) <= y);
                if k == 0 {
                    0.0
                } else {
                    self.prefix[k - 1]
                }
            }
            Some((&p, rest)) => {
                let r2 = self.res.prime_value(p).powi(2);
                if r2 == 0.0 {
                    return self.coprime_sum(y, rest);
                }
                if self.res.spec.squarefree_only {
                    // C(Y, P ∪ p) = C(Y, P) − r(p)² C(Y/p, P ∪ p)
                    self.coprime_sum(y, rest) - r2 * self.coprime_sum(y / p as f64, avoid)
                } else {
                    // C(Y, P ∪ p) = C(Y, P) − r(p)² C(Y/p, P)
                    self.coprime_sum(y, rest) - r2 * self.coprime_sum(y / p as f64, rest)
                }
            }
        }
    }
}

fn distinct_primes(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Σ_{m₁, m₂ ≤ z, (m₁, m₂) = 1} K(m₁, m₂). `x = None` takes the complete
/// (Y → ∞) inner sums.
pub fn coprime_double_sum(res: &Resonator, z: u64, kernel: Kernel, x: Option<f64>, threads: usize) -> Result<DoubleSum> {
    let ms = res.supported_list(z)?;
    if ms.len() > DOUBLE_SUM_MAX_TERMS {
        return budget(format!("{} supported m ≤ z exceeds {DOUBLE_SUM_MAX_TERMS}", ms.len()));
    }
    let facs: Vec<Vec<u64>> = ms.iter().map(|m| distinct_primes(m.0)).collect();
    let log_total = if kernel == Kernel::MainExtraction { 0.0 } else { log_square_mass(res)? };
    let inner_mode = match (kernel, x) {
        (Kernel::MainExtraction, _) => InnerSum::None,
        (_, None) => InnerSum::Complete,
        (_, Some(xv)) => {
            if xv > INNER_SUM_MAX_X {
                return budget(format!("inner sums enumerated only for x ≤ {INNER_SUM_MAX_X:e}"));
            }
            InnerSum::Finite
        }
    };
    let table = if inner_mode == InnerSum::Finite {
        let xv = x.unwrap_or(1.0).floor() as u64;
        let list = res.supported_list(xv)?;
        let mut acc = KahanSum::new();
        let mut prefix = Vec::with_capacity(list.len());
        let mut gs = Vec::with_capacity(list.len());
        for (g, r, _) in list {
            acc.add(r * r);
            prefix.push(acc.value());
            gs.push(g);
        }
        Some(InnerTable { res, gs, prefix })
    } else {
        None
    };
    let local = |p: u64| {
        let r2 = res.prime_value(p).powi(2);
        if res.spec.squarefree_only {
            1.0 / (1.0 + r2)
        } else {
            1.0 - r2
        }
    };
    let rows: Vec<(f64, u64)> = with_threads(threads, || {
        (0..ms.len())
            .into_par_iter()
            .map(|i| {
                let (m1, r1, t1) = ms[i];
                let mut acc = KahanSum::new();
                let mut count = 0u64;
                for (j, &(m2, r2, t2)) in ms.iter().enumerate() {
                    if gcd(m1, m2) != 1 {
                        continue;
                    }
                    count += 1;
                    let mx = m1.max(m2) as f64;
                    let base = match kernel {
                        Kernel::FundSecond => r1 * r2 / mx,
                        Kernel::FundSecondDual => r1 * r2 * (m1 as f64) * (m2 as f64) / (mx * mx * mx),
                        Kernel::MainExtraction => t1 * t2 * (m1 as f64) * (m2 as f64) / (mx * mx * mx),
                    };
                    let inner = match inner_mode {
                        InnerSum::None => 1.0,
                        InnerSum::Complete => facs[i].iter().chain(&facs[j]).map(|&p| local(p)).product(),
                        InnerSum::Finite => {
                            let mut avoid: Vec<u64> = facs[i].iter().chain(&facs[j]).copied().collect();
                            avoid.sort_unstable();
                            let t = table.as_ref().expect("finite inner table");
                            (t.coprime_sum(x.unwrap_or(1.0) / mx, &avoid).ln() - log_total).exp()
                        }
                    };
                    acc.add(base * inner);
                }
                (acc.value(), count)
            })
            .collect()
    });
    let value = combine(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let terms = rows.iter().map(|r| r.1).sum();
    Ok(DoubleSum { value, terms, inner: inner_mode })
}

/// Σ_{d ≤ y, (d, k) = 1} μ(d) t(d)²/d over squarefree supported d.
pub fn mobius_t_sum(res: &Resonator, y: f64, k: u64) -> Result<f64> {
    if !(y >= 1.0) || k == 0 {
        return domain("Möbius sum needs y ≥ 1 and k ≥ 1");
    }
    let y = y.floor() as u64;
    let ps: Vec<(u64, f64)> = res
        .primes
        .iter()
        .zip(&res.values)
        .filter(|(&p, _)| k % p != 0)
        .map(|(&p, &r)| (p, r / (1.0 + r * r)))
        .collect();
    let mut acc = KahanSum::new();
    acc.add(1.0);
    let mut visited = 0u64;
    mobius_dfs(&ps, y, 1, 1.0, 0, &mut acc, &mut visited)?;
    Ok(acc.value())
}

fn mobius_dfs(ps: &[(u64, f64)], y: u64, d: u64, val: f64, start: usize, acc: &mut KahanSum, visited: &mut u64) -> Result<()> {
    for i in start..ps.len() {
        let (p, t) = ps[i];
        if d > y / p {
            break;
        }
        let nd = d * p;
        let nv = -val * t * t / p as f64;
        acc.add(nv);
        *visited += 1;
        if *visited > ENUMERATION_LIMIT {
            return budget("Möbius enumeration too large");
        }
        mobius_dfs(ps, y, nd, nv, i + 1, acc, visited)?;
    }
    Ok(())
}

/// Σ_{m₁, m₂ ≤ z} t t m₁m₂/max³ · Σ_{d ≤ z/max, (d, m₁m₂) = 1} μ(d) t(d)²/d,
/// the Möbius expansion of the coprime main-extraction sum.
pub fn main_extraction_mobius_form(res: &Resonator, z: u64) -> Result<f64> {
    let ms = res.supported_list(z)?;
    if ms.len() > DOUBLE_SUM_MAX_TERMS {
        return budget("too many supported m ≤ z");
    }
    let mut acc = KahanSum::new();
    for &(m1, _, t1) in &ms {
        for &(m2, _, t2) in &ms {
            let mx = m1.max(m2);
            let kern = t1 * t2 * (m1 as f64) * (m2 as f64) / (mx as f64).powi(3);
            if kern == 0.0 {
                continue;
            }
            let inner = mobius_t_sum(res, (z / mx) as f64, m1 * m2)?;
            acc.add(kern * inner);
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_text_round_trip() {
        let specs = vec![
            ResonatorSpec::empty(),
            ResonatorSpec::window_psigma(20.0, 0.75, 0.1).unwrap().excluding(&[23, 29]),
            ResonatorSpec::sqrt_window(30.0).unwrap().squarefree(true),
            ResonatorSpec::window_llogp(100.0, 120.0, 0.0).unwrap().excluding_up_to(100),
            ResonatorSpec::tiny_n_desk(0.8, 7.0).unwrap(),
            ResonatorSpec::f_sigma(0.75, 10.0).unwrap(),
        ];
        for s in specs {
            let text = s.to_text();
            let back: ResonatorSpec = text.parse().unwrap();
            assert_eq!(back, s, "{text}");
        }
        assert!("family=NOPE".parse::<ResonatorSpec>().is_err());
        assert!("family=SQRT_WINDOW".parse::<ResonatorSpec>().is_err());
        assert!("family=EMPTY;bogus=1".parse::<ResonatorSpec>().is_err());
    }

    #[test]
    fn r_value_is_multiplicative() {
        let res = Resonator::build(&ResonatorSpec::window_psigma(20.0, 0.75, 0.1).unwrap()).unwrap();
        let (a, b) = (23u64, 29u64);
        assert_eq!(res.r_value(a * b).unwrap(), res.r_value(a).unwrap() * res.r_value(b).unwrap());
        assert_eq!(res.r_value(7).unwrap(), 0.0);
        assert_eq!(res.r_value(1).unwrap(), 1.0);
        let sq = Resonator::build(&ResonatorSpec::window_psigma(20.0, 0.75, 0.1).unwrap().squarefree(true)).unwrap();
        assert_eq!(sq.r_value(23 * 23).unwrap(), 0.0);
        assert!(res.r_value(23 * 23).unwrap() > 0.0);
    }

    #[test]
    fn window_edges_are_strict() {
        let res = Resonator::build(&ResonatorSpec::window_psigma(11.0, 0.75, 0.0).unwrap()).unwrap();
        assert_eq!(res.prime_value(11), 0.0);
        assert!(res.prime_value(13) > 0.0);
        assert!(res.prime_value(113) > 0.0);
        assert_eq!(res.prime_value(127), 0.0);
    }

    #[test]
    fn empty_support_sums() {
        let res = Resonator::build(&ResonatorSpec::empty()).unwrap();
        assert_eq!(sum_r(&res, 1000, Weight::One, 1).unwrap(), 1.0);
        assert_eq!(sum_r(&res, 1000, Weight::TOverSqrt, 1).unwrap(), 1.0);
    }

    #[test]
    fn dense_and_enumeration_paths_agree() {
        let res = Resonator::build(&ResonatorSpec::tiny_n_desk(0.6, 30.0).unwrap()).unwrap();
        for w in [Weight::One, Weight::N, Weight::Square] {
            let a = sum_r_dense(&res, 20_000, w, 2).unwrap();
            let b = sum_r_dfs(&res, 20_000, w, 2).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{w:?}: {a} {b}");
        }
    }

    #[test]
    fn sums_match_brute_force() {
        let res = Resonator::build(&ResonatorSpec::sqrt_window(10.0).unwrap()).unwrap();
        let n = 50_000u64;
        let mut brute = [0.0; 4];
        for k in 1..=n {
            let r = res.r_value(k).unwrap();
            let t = res.t_value(k).unwrap();
            brute[0] += r;
            brute[1] += k as f64 * r;
            brute[2] += r * r;
            brute[3] += t / (k as f64).sqrt();
        }
        for (i, w) in [Weight::One, Weight::N, Weight::Square, Weight::TOverSqrt].iter().enumerate() {
            let v = sum_r(&res, n, *w, 3).unwrap();
            assert!((v - brute[i]).abs() < 1e-10 * brute[i], "{w:?}");
        }
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let res = Resonator::build(&ResonatorSpec::window_psigma(30.0, 0.7, 0.1).unwrap()).unwrap();
        let a = sum_r(&res, 1_000_000, Weight::One, 1).unwrap();
        let b = sum_r(&res, 1_000_000, Weight::One, 4).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn b_ratio_at_least_one() {
        let res = Resonator::build(&ResonatorSpec::window_psigma(20.0, 0.75, 0.1).unwrap()).unwrap();
        let b = b_ratio(&res, 1e6, 10.0, 1).unwrap();
        assert!(b.ratio >= 1.0);
        let big = b_ratio(&res, 1e12, 1.0, 1).unwrap();
        assert!(big.ratio >= 1.0 && big.ratio < b.ratio);
    }

    #[test]
    fn tail_check_gross_violation() {
        let bad: Vec<(u64, f64)> = primes::primes_up_to(1000).into_iter().map(|p| (p, 0.99)).collect();
        let rep = tail_condition_check(&bad, 50.0).unwrap();
        assert!(!rep.pass);
        assert!(rep.margin1 < 0.0);
    }

    #[test]
    fn finite_inner_sum_matches_brute_force() {
        let res = Resonator::build(&ResonatorSpec::tiny_n_desk(0.5, 11.0).unwrap().squarefree(true)).unwrap();
        let z = 40u64;
        let x = 3000.0;
        let fast = coprime_double_sum(&res, z, Kernel::FundSecond, Some(x), 2).unwrap();
        let total: f64 = res.support().1.iter().map(|r| 1.0 + r * r).product();
        let mut brute = 0.0;
        for m1 in 1..=z {
            for m2 in 1..=z {
                if gcd(m1, m2) != 1 {
                    continue;
                }
                let r1 = res.r_value(m1).unwrap();
                let r2 = res.r_value(m2).unwrap();
                if r1 * r2 == 0.0 {
                    continue;
                }
                let mx = m1.max(m2);
                let mut g_sum = 0.0;
                for g in 1..=(x as u64 / mx) {
                    if gcd(g, m1 * m2) == 1 {
                        g_sum += res.r_value(g).unwrap().powi(2);
                    }
                }
                brute += r1 * r2 / mx as f64 * g_sum / total;
            }
        }
        assert!((fast.value - brute).abs() < 1e-12 * brute, "{} {brute}", fast.value);
    }

    #[test]
    fn mobius_form_equals_coprime_sum() {
        let res = Resonator::build(&ResonatorSpec::tiny_n_desk(0.7, 13.0).unwrap().squarefree(true)).unwrap();
        let z = 500;
        let a = coprime_double_sum(&res, z, Kernel::MainExtraction, None, 1).unwrap().value;
        let b = main_extraction_mobius_form(&res, z).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs(), "{a} {b}");
    }
}
