//! Regime pipelines for the lower bounds on Δ(N, q) and Δ(q/N, q): parameter
//! solving, log-scale bounds, regime selection, and exact desk comparison.
//!
//! Every bound is the main term of its display with the (1 + o(1)) factors
//! dropped; such reports carry `asymptotic = true`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::characters::{build_group, delta_exact_in, polya_h, resonance_ratio_exact, RatioMode, MAX_RATIO_MODULUS};
use crate::error::{domain, Error, Result};
use crate::primes::{euler_phi, theta_first_exceeding};
use crate::resonators::{
    b_ratio, coprime_double_sum, sum_r, Family, Kernel, Resonator, ResonatorSpec, TailReport, Weight, INNER_SUM_MAX_X,
};
use crate::saddle::{report_at, solve_implicit_system, solve_implicit_system_relaxed, solve_sigma, ImplicitSystemSolution, PhiSource};
use crate::smooth::{log_psi_saddle, Method};
use crate::specfun::{exp_integral_tau, kappa_limit_at_one, ln_c_sigma, sigma_params, solve_a, solve_a_dual, SIGMA_GUARD};

/// A number together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub method: Method,
}

impl Tagged {
    pub fn new(value: f64, method: Method) -> Self {
        Self { value, method }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, Method::Exact)
    }

    pub fn saddle(value: f64) -> Self {
        Self::new(value, Method::Saddle)
    }

    pub fn asymptotic(value: f64) -> Self {
        Self::new(value, Method::Asymptotic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "TINY_N")]
    TinyN,
    #[serde(rename = "THM1")]
    Thm1,
    #[serde(rename = "THM1_DUAL")]
    Thm1Dual,
    #[serde(rename = "THM2_SMALL")]
    Thm2Small,
    #[serde(rename = "THM2_LARGE")]
    Thm2Large,
    #[serde(rename = "THM3")]
    Thm3,
    #[serde(rename = "THM3_DUAL")]
    Thm3Dual,
    #[serde(rename = "THM4")]
    Thm4,
    #[serde(rename = "THM4_DUAL")]
    Thm4Dual,
    /// Exact desk comparison with an empty resonator.
    #[serde(rename = "EXACT")]
    Exact,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::TinyN => "TINY_N",
            Regime::Thm1 => "THM1",
            Regime::Thm1Dual => "THM1_DUAL",
            Regime::Thm2Small => "THM2_SMALL",
            Regime::Thm2Large => "THM2_LARGE",
            Regime::Thm3 => "THM3",
            Regime::Thm3Dual => "THM3_DUAL",
            Regime::Thm4 => "THM4",
            Regime::Thm4Dual => "THM4_DUAL",
            Regime::Exact => "EXACT",
        }
    }

    pub fn is_dual(self) -> bool {
        matches!(self, Regime::Thm1Dual | Regime::Thm3Dual | Regime::Thm4Dual)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Regime::TinyN,
            Regime::Thm1,
            Regime::Thm1Dual,
            Regime::Thm2Small,
            Regime::Thm2Large,
            Regime::Thm3,
            Regime::Thm3Dual,
            Regime::Thm4,
            Regime::Thm4Dual,
            Regime::Exact,
        ];
        all.into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown regime `{s}`")))
    }
}

/// The bound read as Δ ≥ Ψ(N, y) (times a prefactor in the dual case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessClaim {
    pub log_n: Tagged,
    pub y_effective: Tagged,
}

/// ratio ≤ ceiling for an exact weighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub mode: RatioMode,
    pub ratio: Tagged,
    pub ceiling: Tagged,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Tagged>,
    pub log_q: Tagged,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<Tagged>,
    pub log_n: Tagged,
    pub dual: bool,
    pub log_lower_bound: Tagged,
    pub parameters: BTreeMap<String, Tagged>,
    pub smoothness_claim: Option<SmoothnessClaim>,
    pub exact_delta: Option<Tagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalityCheck>,
    pub asymptotic: bool,
    pub predicted_form: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(regime: Regime, log_q: f64, log_n: f64, bound: Tagged, form: &str) -> Self {
        Self {
            regime,
            q: None,
            log_q: Tagged::exact(log_q),
            n: None,
            log_n: Tagged::exact(log_n),
            dual: regime.is_dual(),
            log_lower_bound: bound,
            parameters: BTreeMap::new(),
            smoothness_claim: None,
            exact_delta: None,
            inequality: None,
            asymptotic: true,
            predicted_form: form.to_string(),
            notes: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, v: Tagged) {
        self.parameters.insert(key.to_string(), v);
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).map(|t| t.value)
    }

    /// log-bound minus the trivial ½ log N (main) or ½ log(q/N) (dual).
    pub fn main_exponent(&self) -> f64 {
        let half = if self.dual { 0.5 * (self.log_q.value - self.log_n.value) } else { 0.5 * self.log_n.value };
        self.log_lower_bound.value - half
    }
}

/// Tunables shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConfig {
    /// B in log^B q < N for the second theorem.
    pub b_exponent: f64,
    /// ε = C / log log q in the window resonators.
    pub eps_constant: f64,
    /// θ ≤ 1 − ε_θ for the fourth theorem.
    pub eps_theta: f64,
    pub is_prime: bool,
    /// Take the closest grid point when the implicit system has no solution.
    pub relaxed_implicit: bool,
    pub threads: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { b_exponent: 20.0, eps_constant: 10.0, eps_theta: 0.01, is_prime: true, relaxed_implicit: false, threads: 0 }
    }
}

fn regime_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Regime(msg.into()))
}

#[derive(Debug, Clone, Copy)]
struct Logs {
    l: f64,
    l2: f64,
    l3: f64,
}

fn logs(log_q: f64) -> Result<Logs> {
    if !(log_q.is_finite() && log_q > std::f64::consts::E.exp()) {
        return regime_err(format!("log q = {log_q} too small: the pipelines need log log log q > 0"));
    }
    let l2 = log_q.ln();
    Ok(Logs { l: log_q, l2, l3: l2.ln() })
}

/// log N below which the tiny-N construction replaces the first theorem.
pub fn tiny_threshold(log_q: f64) -> Result<f64> {
    let g = logs(log_q)?;
    Ok(g.l2 * g.l2 / g.l3.powi(10))
}

/// log N at and above which the fourth theorem applies.
pub fn theorem4_gate(log_q: f64) -> Result<f64> {
    let g = logs(log_q)?;
    Ok(4.0 * (g.l * g.l2).sqrt() * g.l3)
}

/// log N splitting the small and large sub-regimes of the second theorem.
pub fn theorem2_split(log_q: f64) -> Result<f64> {
    let g = logs(log_q)?;
    Ok(g.l2.powi(3) * g.l3)
}

// ---------------------------------------------------------------- M

/// Largest log q for which θ(M) is accumulated exactly.
pub const THETA_EXACT_MAX_LOG_Q: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MMinimal {
    pub m: f64,
    /// θ(M), or the guaranteed lower bound on the asymptotic path
    pub theta: f64,
    pub method: Method,
}

/// Smallest prime M with θ(M) > log q. Above 10⁹ an upper estimate from
/// θ(x) > x(1 − 1/log x) (x ≥ 41) is returned instead.
pub fn m_minimal(log_q: f64) -> Result<MMinimal> {
    if !(log_q >= 3f64.ln() - 1e-12) || !log_q.is_finite() {
        return domain("m_minimal needs q ≥ 3");
    }
    if log_q <= THETA_EXACT_MAX_LOG_Q {
        let limit = (2.0 * log_q + 100.0) as u64;
        let (m, theta) = theta_first_exceeding(log_q, limit)
            .ok_or_else(|| Error::Convergence(format!("θ scan passed {limit} without exceeding {log_q}")))?;
        return Ok(MMinimal { m: m as f64, theta, method: Method::Exact });
    }
    let m = log_q / (1.0 - 1.0 / log_q.ln());
    Ok(MMinimal { m, theta: m * (1.0 - 1.0 / m.ln()), method: Method::Asymptotic })
}

// ---------------------------------------------------------------- THM1

/// log of (log q)^{1−σ} G(σ)^σ / (2(1−σ)), or with 2^{2−σ} in the dual case.
pub fn theorem1_rhs_log(log_q: f64, sigma: f64, dual: bool) -> Result<f64> {
    let ln_g = -ln_c_sigma(sigma)?;
    let two = if dual { (2.0 - sigma) * LN_2 } else { LN_2 };
    Ok((1.0 - sigma) * log_q.ln() - two - (1.0 - sigma).ln() + sigma * ln_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Sigma {
    pub sigma: f64,
    pub kappa: f64,
    /// |RHS(σ)/log N − 1|
    pub residual: f64,
    /// log N lies below the minimum of the right-hand side; σ → 1 and κ(1⁻) taken
    pub clamped: bool,
    /// where the right-hand side is smallest
    pub sigma_min: f64,
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Solves the first theorem's σ equation on its decreasing branch (σ below
/// the minimizer of the right-hand side).
pub fn theorem1_sigma(log_q: f64, log_n: f64, dual: bool) -> Result<Theorem1Sigma> {
    if !(log_n > 0.0 && log_q > 1.0) {
        return domain("σ equation needs log N > 0, log q > 1");
    }
    let lo = 0.5 + 2.0 * SIGMA_GUARD;
    let hi = 1.0 - 2.0 * SIGMA_GUARD;
    let h = |s: f64| theorem1_rhs_log(log_q, s, dual).unwrap_or(f64::INFINITY);
    // coarse grid, then golden refinement around the best node
    let grid = 400;
    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..=grid {
        let s = lo + (hi - lo) * i as f64 / grid as f64;
        let v = h(s);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / grid as f64;
    let a = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let b = (lo + step * (best_i as f64 + 1.0)).min(hi);
    let s_min = golden_min(h, a, b, 100);
    let target = log_n.ln();
    if target <= h(s_min) {
        return Ok(Theorem1Sigma { sigma: 1.0, kappa: kappa_limit_at_one(), residual: f64::NAN, clamped: true, sigma_min: s_min });
    }
    if target > h(lo) {
        return regime_err(format!("log N = {log_n} beyond the σ equation's range at log q = {log_q}"));
    }
    let sigma = crate::numeric::bisect(|s| h(s) - target, lo, s_min, 200)?;
    let residual = (h(sigma) - target).exp_m1().abs();
    Ok(Theorem1Sigma { sigma, kappa: sigma_params(sigma)?.kappa, residual, clamped: false, sigma_min: s_min })
}

pub fn bound_theorem1(log_q: f64, log_n: f64, dual: bool) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let tiny = tiny_threshold(log_q)?;
    if !(log_n < g.l.sqrt()) {
        return regime_err(format!("first theorem needs log N < √log q = {}", g.l.sqrt()));
    }
    if !(log_n > tiny) {
        return regime_err(format!("log N ≤ {tiny}: the tiny-N construction applies"));
    }
    let sol = theorem1_sigma(log_q, log_n, dual)?;
    let y = if dual { 0.5 * sol.kappa * log_q } else { sol.kappa * log_q };
    let (alpha, log_psi) = if log_n < LN_2 { (1.0, 0.0) } else { log_psi_saddle(log_n, y)? };
    let (regime, bound, form) = if dual {
        (
            Regime::Thm1Dual,
            0.5 * log_q - log_n + log_psi,
            "Δ(q/N,q) ≫ (√q/N)·Ψ(N, (1/2)κ(σ′)·log q)",
        )
    } else {
        (Regime::Thm1, log_psi, "Δ(N,q) ≥ Ψ(N, κ(σ)·log q)")
    };
    let mut rep = BoundReport::new(regime, log_q, log_n, Tagged::saddle(bound), form);
    let sigma_tag = if sol.clamped { Tagged::asymptotic(sol.sigma) } else { Tagged::exact(sol.sigma) };
    rep.set(if dual { "sigma_prime" } else { "sigma" }, sigma_tag);
    rep.set("kappa", Tagged::new(sol.kappa, sigma_tag.method));
    rep.set("sigma_residual", Tagged::exact(sol.residual));
    rep.set("alpha", Tagged::saddle(alpha));
    rep.set("log_psi", Tagged::saddle(log_psi));
    if dual {
        rep.set("M", Tagged::asymptotic(0.5 * log_q));
    }
    if sol.clamped {
        rep.notes.push(format!(
            "log N below the minimum of the σ equation (at σ = {:.6}); κ(1⁻) = 8/e³ used",
            sol.sigma_min
        ));
    }
    rep.smoothness_claim = Some(SmoothnessClaim { log_n: Tagged::exact(log_n), y_effective: Tagged::asymptotic(y) });
    Ok(rep)
}

// ---------------------------------------------------------------- TINY_N

/// ½ log q − log N + log(log log q / log(log N / log log q)). Undefined unless
/// log N > log log q.
pub fn tiny_dual_prefactor(log_q: f64, log_n: f64) -> Result<f64> {
    let g = logs(log_q)?;
    let inner = (log_n / g.l2).ln();
    if !(inner > 0.0) {
        return regime_err(format!("dual tiny-N prefactor undefined: log N = {log_n} ≤ log log q = {}", g.l2));
    }
    Ok(0.5 * g.l - log_n + (g.l2 / inner).ln())
}

pub fn bound_tiny_n(log_q: f64, log_n: f64, dual: bool) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let tiny = tiny_threshold(log_q)?;
    if !(log_n > 0.0 && log_n < tiny) {
        return regime_err(format!("tiny-N construction needs 0 < log N < {tiny}"));
    }
    let spec = ResonatorSpec::tiny_n(log_q)?;
    let res = Resonator::build(&spec)?;
    let tail = res.tail_check(g.l - 2.0 * log_n)?;
    // Ψ(N, log q) with N tiny: every n ≤ N is (log q)-smooth once N ≤ log q
    let (log_psi, method) = if log_n < LN_2 {
        (0.0, Method::Exact)
    } else if log_n <= g.l.ln() {
        ((log_n.exp().floor()).ln(), Method::Exact)
    } else {
        (log_psi_saddle(log_n, g.l)?.1, Method::Saddle)
    };
    let mut rep = if dual {
        let pre = tiny_dual_prefactor(log_q, log_n)?;
        let mut r = BoundReport::new(
            Regime::TinyN,
            log_q,
            log_n,
            Tagged::new(pre + log_psi, method),
            "Δ(q/N,q) ≫ √q·(log log q / log(log N/log log q))·Ψ(N, log q)/N",
        );
        r.dual = true;
        r.set("dual_prefactor", Tagged::exact(pre));
        r
    } else {
        BoundReport::new(Regime::TinyN, log_q, log_n, Tagged::new(log_psi, method), "Δ(N,q) ≥ Ψ(N, log q)")
    };
    if let Family::TinyN { value, p_upper } = spec.family {
        rep.set("r_p", Tagged::exact(value));
        rep.set("p_upper", Tagged::exact(p_upper));
    }
    rep.set("log_psi", Tagged::new(log_psi, method));
    add_tail(&mut rep, &tail);
    rep.smoothness_claim = Some(SmoothnessClaim { log_n: Tagged::exact(log_n), y_effective: Tagged::exact(log_q) });
    Ok(rep)
}

fn add_tail(rep: &mut BoundReport, t: &TailReport) {
    rep.set("tail_log_y", Tagged::exact(t.log_y));
    rep.set("tail_margin1", Tagged::exact(t.margin1));
    rep.set("tail_margin2", Tagged::exact(t.margin2));
    rep.set("tail_pass", Tagged::exact(if t.pass { 1.0 } else { 0.0 }));
    if !t.pass {
        rep.notes.push("tail condition fails at these parameters".into());
    }
}

// ---------------------------------------------------------------- THM2

/// ε = C / log log q.
pub fn window_epsilon(log_q: f64, c: f64) -> Result<f64> {
    Ok(c / logs(log_q)?.l2)
}

/// Small-regime log bound from a solved implicit system.
pub fn theorem2_small_value(log_n: f64, sol: &ImplicitSystemSolution) -> f64 {
    let u_prime = sol.eta / (1.0 + sol.eta) * sol.u;
    let ub = sol.u_bar as f64;
    (0.5 + ub / (2.0 * u_prime)) * log_n - ub * log_n.ln() + ub * (1.0 - 0.5 * LN_2)
}

/// Large-regime log bound: log N − u log log N + u(1 − ½ log(2σ′(2σ′ − 1))),
/// u = log N / log log q, σ′ from log N = (log q)^{1−σ′}.
pub fn theorem2_large_value(log_q: f64, log_n: f64) -> Result<(f64, f64, f64)> {
    let g = logs(log_q)?;
    let sp = 1.0 - log_n.ln() / g.l2;
    if !(sp > 0.5 && sp < 1.0) {
        return regime_err(format!("σ′ = {sp} outside (1/2, 1)"));
    }
    let u = log_n / g.l2;
    let v = log_n - u * log_n.ln() + u * (1.0 - 0.5 * (2.0 * sp * (2.0 * sp - 1.0)).ln());
    Ok((v, sp, u))
}

fn theorem2_small_core(log_q: f64, log_n: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    let mm = m_minimal(log_q)?;
    let eps = window_epsilon(log_q, cfg.eps_constant)?;
    let u = log_n / mm.m.ln();
    let solve = |e: f64| {
        if cfg.relaxed_implicit {
            solve_implicit_system_relaxed(mm.m, u, e)
        } else {
            solve_implicit_system(mm.m, u, e)
        }
    };
    let sol = solve(eps)?;
    let value = theorem2_small_value(log_n, &sol);
    let mut rep = BoundReport::new(
        Regime::Thm2Small,
        log_q,
        log_n,
        Tagged::asymptotic(value),
        "Δ(N,q) ≥ N^{1/2 + ⌊u′⌋/2u′}·(log N)^{−⌊u′⌋}·(e/√2)^{⌊u′⌋}",
    );
    rep.set("M", Tagged::new(mm.m, mm.method));
    rep.set("u", Tagged::exact(u));
    rep.set("P", Tagged::exact(sol.p));
    rep.set("eta", Tagged::exact(sol.eta));
    rep.set("sigma", Tagged::exact(sol.sigma));
    rep.set("u_bar", Tagged::exact(sol.u_bar as f64));
    rep.set("u_prime", Tagged::exact(sol.eta / (1.0 + sol.eta) * u));
    rep.set("omega", Tagged::exact(sol.omega));
    rep.set("epsilon", Tagged::exact(eps));
    rep.set("B", Tagged::exact(cfg.b_exponent));
    rep.set("relaxed", Tagged::exact(if sol.relaxed { 1.0 } else { 0.0 }));
    if sol.relaxed {
        rep.notes.push(format!("implicit system unsolved; closest point taken (violations {:?})", sol.violations()));
    }
    if let Ok(s0) = solve(0.0) {
        rep.set("log_lower_bound_eps0", Tagged::asymptotic(theorem2_small_value(log_n, &s0)));
    }
    Ok(rep)
}

/// σ on the decreasing branch of φ₁ for WINDOW_PSIGMA(M, σ, ε): φ₁ rises from 0
/// near σ = ½, peaks, then falls.
pub fn theorem2_window_sigma(m: f64, eps: f64, log_n: f64) -> Result<crate::saddle::SaddleReport> {
    let build = |s: f64| PhiSource::for_spec(&ResonatorSpec::window_psigma(m, s, eps)?);
    let phi1 = |s: f64| build(s).and_then(|src| src.phi_real(s)).map(|p| p[1]);
    let (lo, hi) = (0.5 + 1e-3, 1.0 - 1e-6);
    let peak = golden_min(|s| -phi1(s).unwrap_or(f64::NEG_INFINITY), lo, hi, 60);
    let top = phi1(peak)?;
    if log_n > top {
        return Err(Error::NoSolution(format!("log N = {log_n} above max φ₁ = {top} of the window resonator")));
    }
    solve_sigma(build, log_n, (peak, hi))
}

fn theorem2_large_core(log_q: f64, log_n: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    let (value, sp, u) = theorem2_large_value(log_q, log_n)?;
    let mm = m_minimal(log_q)?;
    let eps = window_epsilon(log_q, cfg.eps_constant)?;
    let mut rep = BoundReport::new(
        Regime::Thm2Large,
        log_q,
        log_n,
        Tagged::asymptotic(value),
        "Δ(N,q) ≥ N·(log N)^{−u}·(e/√(2σ′(2σ′−1)))^u",
    );
    rep.set("M", Tagged::new(mm.m, mm.method));
    rep.set("sigma_prime", Tagged::exact(sp));
    rep.set("u", Tagged::exact(u));
    rep.set("epsilon", Tagged::exact(eps));
    rep.set("B", Tagged::exact(cfg.b_exponent));
    match theorem2_window_sigma(mm.m, eps, log_n) {
        Ok(sr) => {
            let t = sr.phi_method;
            rep.set("sigma", Tagged::new(sr.sigma, t));
            if let Family::WindowPsigma { lambda, .. } = sr.spec.family {
                rep.set("lambda", Tagged::new(lambda, t));
            }
            rep.set("phi0", Tagged::new(sr.phi[0], t));
            rep.set("phi2", Tagged::new(sr.phi[2], t));
            rep.set("saddle_log_sum", Tagged::saddle(sr.log_sum_estimate));
        }
        Err(e) => rep.notes.push(format!("window saddle unsolved: {e}")),
    }
    Ok(rep)
}

pub fn bound_theorem2(log_q: f64, log_n: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let lo = cfg.b_exponent * g.l2;
    if !(log_n > lo && log_n < g.l.sqrt()) {
        return regime_err(format!("second theorem needs {lo} < log N < {}", g.l.sqrt()));
    }
    if log_n < theorem2_split(log_q)? {
        theorem2_small_core(log_q, log_n, cfg)
    } else {
        theorem2_large_core(log_q, log_n, cfg)
    }
}

// ---------------------------------------------------------------- THM3

/// τ = log N / √(log q · log log q).
pub fn theorem3_tau(log_q: f64, log_n: f64) -> Result<f64> {
    let g = logs(log_q)?;
    Ok(log_n / (g.l * g.l2).sqrt())
}

/// log x and λ = √(log x · log log x).
fn x_lambda(log_x: f64) -> Result<(f64, f64)> {
    if !(log_x > std::f64::consts::E) {
        return regime_err(format!("log x = {log_x} too small for λ"));
    }
    Ok((log_x, (log_x * log_x.ln()).sqrt()))
}

fn theorem3_core(log_q: f64, log_n: f64, dual: bool) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let tau = theorem3_tau(log_q, log_n)?;
    let a = if dual { solve_a_dual(tau)? } else { solve_a(tau)? };
    let tp = exp_integral_tau(a)?;
    let scale = (g.l / g.l2).sqrt();
    let (regime, value, coef, log_x, form) = if dual {
        let c = a * (tau + tp.tau_prime / SQRT_2);
        (
            Regime::Thm3Dual,
            0.5 * (g.l - log_n) + c * scale,
            c,
            0.5 * (g.l - log_n) - g.l.ln(),
            "Δ(q/N,q) ≥ √(q/N)·exp(A(τ + τ′/√2)·√(log q/log log q))",
        )
    } else {
        let c = a * (tau + tp.tau_prime);
        (Regime::Thm3, 0.5 * log_n + c * scale, c, g.l - log_n, "Δ(N,q) ≥ √N·exp(A(τ + τ′)·√(log q/log log q))")
    };
    let mut rep = BoundReport::new(regime, log_q, log_n, Tagged::asymptotic(value), form);
    rep.set("tau", Tagged::exact(tau));
    rep.set("A", Tagged::exact(a));
    rep.set("tau_prime", Tagged::exact(tp.tau_prime));
    rep.set("coefficient", Tagged::exact(coef));
    if let Ok((lx, lam)) = x_lambda(log_x) {
        rep.set("log_x", Tagged::exact(lx));
        rep.set("lambda", Tagged::exact(lam));
    }
    Ok(rep)
}

pub fn bound_theorem3(log_q: f64, log_n: f64, dual: bool) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let tau = theorem3_tau(log_q, log_n)?;
    let lo = (-g.l3 * g.l3).exp();
    let gate = theorem4_gate(log_q)?;
    if !(tau >= lo && log_n <= gate) {
        return regime_err(format!("third theorem needs τ ≥ {lo} and log N ≤ {gate}; τ = {tau}"));
    }
    theorem3_core(log_q, log_n, dual)
}

/// Desk check that the solved A matches (2σ − 1) log λ at the SQRT_WINDOW saddle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ACheck {
    pub lambda: f64,
    pub a: f64,
    pub log_n: f64,
    pub sigma: f64,
    pub a_prime: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// With log N = λ·E₁(A), solves φ₁(σ) = log N for SQRT_WINDOW(λ) and compares
/// A′ = (2σ − 1) log λ to A against exp(−½√log λ).
pub fn theorem3_a_consistency(lambda: f64, a: f64) -> Result<ACheck> {
    let tp = exp_integral_tau(a)?;
    let log_n = lambda * tp.tau;
    let src = PhiSource::for_spec(&ResonatorSpec::sqrt_window(lambda)?)?;
    let sr = crate::saddle::solve_sigma_fixed(&src, log_n, (0.5 + 1e-9, 4.0))?;
    let a_prime = (2.0 * sr.sigma - 1.0) * lambda.ln();
    let tolerance = (-0.5 * lambda.ln().sqrt()).exp();
    let difference = (a - a_prime).abs();
    Ok(ACheck { lambda, a, log_n, sigma: sr.sigma, a_prime, difference, tolerance, holds: difference <= tolerance })
}

// ---------------------------------------------------------------- THM4

/// Desk-scale certificate for the double-sum estimate of the fourth theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem4Certificate {
    pub lambda: f64,
    pub z: u64,
    /// coprime double sum with inner square sums, over the Euler product
    pub double_sum: f64,
    /// t t m₁m₂/max³ double sum
    pub main_extraction: f64,
    /// (Σ_{m ≤ z} t(m)/√m)² / log z
    pub cauchy_schwarz: f64,
    /// 0.5·λ/log λ
    pub log_target: f64,
    pub holds: bool,
}

/// Certificate for squarefree SQRT_WINDOW(λ) at cutoff z; `x = None` takes the
/// complete inner sums.
pub fn theorem4_certificate(lambda: f64, z: u64, x: Option<f64>, threads: usize) -> Result<Theorem4Certificate> {
    let res = Resonator::build(&ResonatorSpec::sqrt_window(lambda)?.squarefree(true))?;
    let ds = coprime_double_sum(&res, z, Kernel::FundSecondDual, x, threads)?;
    let me = coprime_double_sum(&res, z, Kernel::MainExtraction, None, threads)?;
    let s = sum_r(&res, z, Weight::TOverSqrt, threads)?;
    let cs = s * s / (z as f64).ln();
    let log_target = 0.5 * lambda / lambda.ln();
    Ok(Theorem4Certificate {
        lambda,
        z,
        double_sum: ds.value,
        main_extraction: me.value,
        cauchy_schwarz: cs,
        log_target,
        holds: ds.value.ln() >= log_target,
    })
}

fn theorem4_core(log_q: f64, log_n: f64, dual: bool, cfg: &BoundConfig) -> Result<BoundReport> {
    let g = logs(log_q)?;
    let theta = log_n / g.l;
    let (regime, value, log_x, form) = if dual {
        (
            Regime::Thm4Dual,
            0.5 * (g.l - log_n) + ((1.0 - theta) * g.l / (2.0 * g.l2)).sqrt(),
            0.5 * (g.l - log_n) - (2.0 * g.l).ln(),
            "Δ(q/N,q) ≥ √(q/N)·exp(√((1−θ)·log q/(2 log log q)))",
        )
    } else {
        (
            Regime::Thm4,
            0.5 * log_n + ((1.0 - theta) * g.l / g.l2).sqrt(),
            g.l - log_n,
            "Δ(N,q) ≥ √N·exp(√((1−θ)·log q/log log q))",
        )
    };
    let mut rep = BoundReport::new(regime, log_q, log_n, Tagged::asymptotic(value), form);
    rep.set("theta", Tagged::exact(theta));
    rep.set("eps_theta", Tagged::exact(cfg.eps_theta));
    if let Ok((lx, lam)) = x_lambda(log_x) {
        let log_z = 0.8 * log_n.min(lx);
        rep.set("log_x", Tagged::exact(lx));
        rep.set("lambda", Tagged::exact(lam));
        rep.set("log_z", Tagged::exact(log_z));
        if !dual && !cfg.is_prime {
            rep.set("lambda_sq_over_2logq", Tagged::exact(lam * lam / (2.0 * g.l)));
            if lam * lam <= 2.0 * g.l {
                rep.notes.push("composite q: λ² ≤ 2 log q, the support does not clear M".into());
            }
        }
        if lam <= 40.0 && log_z <= 1e5f64.ln() && lx <= INNER_SUM_MAX_X.ln() {
            let cert = theorem4_certificate(lam, log_z.exp().floor() as u64, Some(lx.exp()), cfg.threads)?;
            rep.set("certificate_double_sum", Tagged::exact(cert.double_sum));
            rep.set("certificate_log_target", Tagged::exact(cert.log_target));
        }
    }
    Ok(rep)
}

pub fn bound_theorem4(log_q: f64, theta: f64, dual: bool, cfg: &BoundConfig) -> Result<BoundReport> {
    let log_n = theta * log_q;
    let gate = theorem4_gate(log_q)?;
    if !(log_n >= gate) {
        return regime_err(format!("fourth theorem needs log N ≥ {gate}"));
    }
    if !(theta <= 1.0 - cfg.eps_theta + 1e-12) {
        return regime_err(format!("θ = {theta} > 1 − ε_θ"));
    }
    theorem4_core(log_q, log_n, dual, cfg)
}

// ---------------------------------------------------------------- selection

/// The regime for (log q, log N). Boundaries, in increasing log N:
/// TINY_N up to [`tiny_threshold`], then the first theorem
/// (prime q) or the second (composite q, above B·log log q) up to √log q,
/// the third up to the fourth's gate, the fourth above.
pub fn select_regime(log_q: f64, log_n: f64, dual: bool, cfg: &BoundConfig) -> Result<Regime> {
    let g = logs(log_q)?;
    if !(log_n > 0.0 && log_n < g.l) {
        return regime_err(format!("log N = {log_n} outside (0, log q)"));
    }
    if dual && !cfg.is_prime {
        return regime_err("dual bounds need prime q");
    }
    if log_n >= theorem4_gate(log_q)? {
        if !(log_n / g.l <= 1.0 - cfg.eps_theta + 1e-12) {
            return regime_err(format!("θ = {} > 1 − ε_θ", log_n / g.l));
        }
        return Ok(if dual { Regime::Thm4Dual } else { Regime::Thm4 });
    }
    if log_n >= g.l.sqrt() {
        return Ok(if dual { Regime::Thm3Dual } else { Regime::Thm3 });
    }
    if !cfg.is_prime && log_n > cfg.b_exponent * g.l2 {
        return Ok(if log_n < theorem2_split(log_q)? { Regime::Thm2Small } else { Regime::Thm2Large });
    }
    if log_n <= tiny_threshold(log_q)? {
        return Ok(Regime::TinyN);
    }
    Ok(if dual { Regime::Thm1Dual } else { Regime::Thm1 })
}

/// Runs the selected pipeline.
pub fn bound(log_q: f64, log_n: f64, dual: bool, cfg: &BoundConfig) -> Result<BoundReport> {
    let regime = select_regime(log_q, log_n, dual, cfg)?;
    let mut rep = if regime == Regime::TinyN { bound_tiny_n(log_q, log_n, dual)? } else { run_regime(regime, log_q, log_n, cfg)? };
    if !cfg.is_prime && matches!(regime, Regime::Thm1 | Regime::TinyN) {
        rep.notes.push("composite q below log^B q: prime-q construction used".into());
    }
    Ok(rep)
}

/// Runs one named pipeline, checking its range.
pub fn run_regime(regime: Regime, log_q: f64, log_n: f64, cfg: &BoundConfig) -> Result<BoundReport> {
    match regime {
        Regime::TinyN => bound_tiny_n(log_q, log_n, false),
        Regime::Thm1 => bound_theorem1(log_q, log_n, false),
        Regime::Thm1Dual => bound_theorem1(log_q, log_n, true),
        Regime::Thm2Small | Regime::Thm2Large => bound_theorem2(log_q, log_n, cfg),
        Regime::Thm3 => bound_theorem3(log_q, log_n, false),
        Regime::Thm3Dual => bound_theorem3(log_q, log_n, true),
        Regime::Thm4 => bound_theorem4(log_q, log_n / log_q, false, cfg),
        Regime::Thm4Dual => bound_theorem4(log_q, log_n / log_q, true, cfg),
        Regime::Exact => regime_err("EXACT reports come from verify_against_exact"),
    }
}

/// Adjacent pipelines evaluated at one shared boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub boundary: String,
    pub log_q: f64,
    pub log_n: f64,
    pub left: Regime,
    pub left_bound: f64,
    pub right: Regime,
    pub right_bound: f64,
    /// larger of the two main exponents (bound − ½ log N)
    pub exponent: f64,
    /// |left − right| / exponent
    pub ratio: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn boundary_row(name: &str, log_n: f64, l: BoundReport, r: BoundReport) -> BoundaryRow {
    let exponent = l.main_exponent().max(r.main_exponent());
    let ratio = (l.log_lower_bound.value - r.log_lower_bound.value).abs() / exponent;
    let mut notes = l.notes.clone();
    notes.extend(r.notes.iter().cloned());
    BoundaryRow {
        boundary: name.to_string(),
        log_q: l.log_q.value,
        log_n,
        left: l.regime,
        left_bound: l.log_lower_bound.value,
        right: r.regime,
        right_bound: r.log_lower_bound.value,
        exponent,
        ratio,
        pass: exponent > 0.0 && ratio <= 1.0,
        notes,
    }
}

/// THM2/THM3 at log N = √log q (composite q) and THM3/THM4 at the fourth
/// theorem's gate, main case.
pub fn boundary_table(log_q: f64, cfg: &BoundConfig) -> Result<Vec<BoundaryRow>> {
    let g = logs(log_q)?;
    let b23 = g.l.sqrt();
    let left = if b23 < theorem2_split(log_q)? {
        theorem2_small_core(log_q, b23, cfg)?
    } else {
        theorem2_large_core(log_q, b23, cfg)?
    };
    let r23 = boundary_row("THM2/THM3", b23, left, theorem3_core(log_q, b23, false)?);
    let b34 = theorem4_gate(log_q)?;
    let r34 = boundary_row("THM3/THM4", b34, theorem3_core(log_q, b34, false)?, theorem4_core(log_q, b34, false, cfg)?);
    Ok(vec![r23, r34])
}

// ---------------------------------------------------------------- desk

/// Regime label for an exact comparison with a given spec.
pub fn regime_for_family(spec: &ResonatorSpec) -> Regime {
    match spec.family {
        Family::FSigma { .. } => Regime::Thm1,
        Family::WindowLlogp { .. } => Regime::Thm2Small,
        Family::WindowPsigma { .. } => Regime::Thm2Large,
        Family::SqrtWindow { .. } if spec.squarefree_only => Regime::Thm4,
        Family::SqrtWindow { .. } => Regime::Thm3,
        Family::TinyN { .. } => Regime::TinyN,
        Family::Empty => Regime::Exact,
    }
}

/// Default resonator length for an exact comparison: φ(q)/N (main modes) or
/// √(q/N)/(2 log q) (dual modes), at least 1.
pub fn default_x(q: u64, n: u64, mode: RatioMode) -> u64 {
    let v = match mode {
        RatioMode::FirstMoment | RatioMode::SecondMoment => euler_phi(q) as f64 / n as f64,
        RatioMode::DualFirst | RatioMode::DualSecond => (q as f64 / n as f64).sqrt() / (2.0 * (q as f64).ln()),
    };
    (v.floor() as u64).max(1)
}

/// Exact weighted mean against the exact maximum for one (q, N, spec, mode).
pub fn verify_against_exact(q: u64, n: u64, spec: &ResonatorSpec, mode: RatioMode, x: Option<u64>, threads: usize) -> Result<BoundReport> {
    if q > MAX_RATIO_MODULUS {
        return Err(Error::Budget(format!("exact comparison limited to q ≤ {MAX_RATIO_MODULUS}")));
    }
    if !(n >= 1 && n < q) {
        return domain("exact comparison needs 1 ≤ N < q");
    }
    let x = x.unwrap_or_else(|| default_x(q, n, mode));
    let group = build_group(q)?;
    let res = Resonator::build(spec)?;
    let rr = crate::parallel::with_threads(threads, || resonance_ratio_exact(&group, &res, x, n, mode))?;
    let second = matches!(mode, RatioMode::SecondMoment | RatioMode::DualSecond);
    let dual = matches!(mode, RatioMode::DualFirst | RatioMode::DualSecond);
    let log_bound = if second { 0.5 * rr.ratio.ln() } else { rr.ratio.ln() };
    let (delta, _) = if dual { delta_exact_in(&group, (q / n).max(1).min(q - 1))? } else { delta_exact_in(&group, n)? };
    let form = match mode {
        RatioMode::FirstMoment => "Δ(N,q) ≥ |Σ_χ |R(χ)|² S_N(χ)| / Σ_χ |R(χ)|²",
        RatioMode::SecondMoment => "Δ(N,q)² ≥ Σ_χ |R(χ)|² |S_N(χ)|² / Σ_χ |R(χ)|²",
        RatioMode::DualFirst => "sup|S(χ)| ≥ |Σ_χ |R(χ)|² S(χ)| / Σ_χ |R(χ)|²",
        RatioMode::DualSecond => "sup|S(χ)|² ≥ Σ_χ |R(χ)|² |S(χ)|² / Σ_χ |R(χ)|²",
    };
    let mut rep = BoundReport::new(regime_for_family(spec), (q as f64).ln(), (n as f64).ln(), Tagged::exact(log_bound), form);
    rep.q = Some(Tagged::exact(q as f64));
    rep.n = Some(Tagged::exact(n as f64));
    rep.dual = dual;
    rep.asymptotic = false;
    rep.exact_delta = Some(Tagged::exact(delta));
    rep.inequality = Some(InequalityCheck { mode, ratio: Tagged::exact(rr.ratio), ceiling: Tagged::exact(rr.ceiling), holds: rr.holds });
    rep.set("x", Tagged::exact(x as f64));
    rep.set("ratio", Tagged::exact(rr.ratio));
    rep.set("ceiling", Tagged::exact(rr.ceiling));
    rep.set("witness", Tagged::exact(rr.witness as f64));
    if dual {
        rep.set("H", Tagged::exact(polya_h(q, n) as f64));
    }
    if mode == RatioMode::FirstMoment {
        // fundamental estimate: (1/B) Σ_{n ≤ N} r(n)
        if let (Ok(b), Ok(s)) = (b_ratio(&res, x as f64 * n as f64, n as f64, threads), sum_r(&res, n, Weight::One, threads)) {
            rep.set("B", Tagged::exact(b.ratio));
            rep.set("fundamental_estimate", Tagged::exact(s / b.ratio));
        }
        if let Ok(src) = PhiSource::for_spec(spec) {
            if let Ok(sr) = crate::saddle::solve_sigma_fixed(&src, (n as f64).ln(), (0.05, 8.0)) {
                rep.set("saddle_sigma", Tagged::exact(sr.sigma));
                rep.set("saddle_log_sum", Tagged::saddle(report_at(sr.spec.clone(), sr.sigma, sr.phi, sr.log_n, sr.phi_method).log_sum_estimate));
            }
        }
    }
    Ok(rep)
}

/// One exact-comparison configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub q: u64,
    pub n: u64,
    pub spec: ResonatorSpec,
    pub mode: RatioMode,
}

/// Moduli of the default sweep: two primes, a squarefree composite and a power of 2.
pub const SWEEP_MODULI: [u64; 4] = [101, 1001, 4096, 9973];

/// Desk resonators for modulus q: four families plus the empty spec, all with
/// the primes dividing q removed.
pub fn desk_specs(q: u64) -> Result<Vec<ResonatorSpec>> {
    let m = m_minimal((q as f64).ln())?.m;
    let specs = vec![
        ResonatorSpec::f_sigma_truncated(0.75, m, q),
        ResonatorSpec::window_llogp(m, m, 0.1)?,
        ResonatorSpec::window_psigma(m, 0.75, 0.1)?,
        ResonatorSpec::sqrt_window(10.0)?.squarefree(true),
        ResonatorSpec::empty(),
    ];
    Ok(specs.into_iter().map(|s| s.excluding_divisors_of(q)).collect())
}

/// N ∈ {2, ⌊q^0.3⌋, ⌊q^0.5⌋, ⌊q^0.7⌋, q − 1}, each at least 1.
pub fn desk_lengths(q: u64) -> [u64; 5] {
    let p = |e: f64| ((q as f64).powf(e).floor() as u64).max(1);
    [2.min(q - 1), p(0.3), p(0.5), p(0.7), q - 1]
}

/// The 200-row default sweep: moduli × lengths × specs × {first, second moment}.
pub fn default_sweep() -> Result<Vec<SweepConfig>> {
    let mut out = Vec::new();
    for q in SWEEP_MODULI {
        let specs = desk_specs(q)?;
        for n in desk_lengths(q) {
            for spec in &specs {
                for mode in [RatioMode::FirstMoment, RatioMode::SecondMoment] {
                    out.push(SweepConfig { q, n, spec: spec.clone(), mode });
                }
            }
        }
    }
    Ok(out)
}

/// Runs the configurations in parallel; results come back in input order.
pub fn run_sweep(configs: &[SweepConfig], threads: usize) -> Vec<Result<BoundReport>> {
    crate::parallel::with_threads(threads, || {
        crate::parallel::ordered_map(configs, |c| verify_against_exact(c.q, c.n, &c.spec, c.mode, None, 1))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BoundConfig {
        BoundConfig::default()
    }

    #[test]
    fn m_minimal_small_cases() {
        assert_eq!(m_minimal(3f64.ln()).unwrap().m, 3.0);
        assert_eq!(m_minimal(100f64.ln()).unwrap().m, 7.0);
        let mut prev = 0.0;
        for k in 1..200 {
            let m = m_minimal(k as f64 * 0.7 + 1.1).unwrap().m;
            assert!(m >= prev);
            prev = m;
        }
        let big = m_minimal(1e12).unwrap();
        assert_eq!(big.method, Method::Asymptotic);
        assert!(big.m > 1e12 && big.m < 1.05e12);
    }

    #[test]
    fn theorem1_sigma_residual() {
        let s = theorem1_sigma(1e6, 100.0, false).unwrap();
        assert!(!s.clamped);
        assert!(s.residual < 1e-8, "{}", s.residual);
        assert!(s.sigma < s.sigma_min);
        let d = theorem1_sigma(1e6, 100.0, true).unwrap();
        assert!(d.residual < 1e-8);
    }

    #[test]
    fn theorem1_report() {
        let r = bound_theorem1(1e6, 100.0, false).unwrap();
        assert_eq!(r.regime, Regime::Thm1);
        let y = r.smoothness_claim.unwrap().y_effective.value;
        assert!((y / 1e6 - r.param("kappa").unwrap()).abs() < 1e-12);
        assert!(r.log_lower_bound.value > 0.0 && r.log_lower_bound.value < 100.0);
        let d = bound_theorem1(1e6, 100.0, true).unwrap();
        assert_eq!(d.regime, Regime::Thm1Dual);
        assert!(bound_theorem1(1e6, 2000.0, false).is_err());
    }

    #[test]
    fn theorem1_clamps_to_kappa_limit() {
        let r = bound_theorem1(1e6, 2.0, false).unwrap();
        assert!((r.param("kappa").unwrap() - 8.0 * (-3.0f64).exp()).abs() < 1e-6);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn tiny_dual_prefactor_arithmetic() {
        let lq = 1e30f64;
        let ln = 10.0 * lq.ln();
        let l2 = lq.ln();
        let want = 0.5 * lq - ln + (l2 / (ln / l2).ln()).ln();
        assert!((tiny_dual_prefactor(lq, ln).unwrap() - want).abs() < 1e-6 * want.abs());
        assert!(matches!(tiny_dual_prefactor(1e6, 1.0), Err(Error::Regime(_))));
    }

    #[test]
    fn tiny_n_main_is_log_psi() {
        let lq = 1e8;
        let t = tiny_threshold(lq).unwrap();
        let ln = 0.5 * t;
        let r = bound_tiny_n(lq, ln, false).unwrap();
        assert_eq!(r.smoothness_claim.unwrap().y_effective.value, lq);
        assert_eq!(r.log_lower_bound.value, r.param("log_psi").unwrap());
    }

    #[test]
    fn theorem2_small_u_bar() {
        let sol = solve_implicit_system_relaxed(1e4, 50.0, 0.1).unwrap();
        let ub = (sol.u * sol.eta / (1.0 + sol.eta)).floor();
        assert_eq!(sol.u_bar as f64, ub);
    }

    #[test]
    fn theorem2_large_exponent() {
        let lq = 1e14f64;
        let (_, sp, _) = theorem2_large_value(lq, 1e5).unwrap();
        assert!((lq.powf(1.0 - sp) - 1e5).abs() < 1e-6);
    }

    #[test]
    fn theorem3_dual_coefficient_smaller() {
        let lq = 1e6;
        let ln = 2000.0;
        let m = bound_theorem3(lq, ln, false).unwrap();
        let tau = m.param("tau").unwrap();
        let a = solve_a(tau).unwrap();
        let tp = exp_integral_tau(a).unwrap().tau_prime;
        assert!(a * (tau + tp / SQRT_2) < a * (tau + tp));
        assert!((m.param("coefficient").unwrap() - a * (tau + tp)).abs() < 1e-12);
        let d = bound_theorem3(lq, ln, true).unwrap();
        assert_eq!(d.regime, Regime::Thm3Dual);
    }

    #[test]
    fn theorem4_ratio_and_limit() {
        let lq = 1e8f64;
        let c = cfg();
        let m = bound_theorem4(lq, 0.5, false, &c).unwrap();
        let d = bound_theorem4(lq, 0.5, true, &c).unwrap();
        let em = m.log_lower_bound.value - 0.5 * 0.5 * lq;
        let ed = d.log_lower_bound.value - 0.5 * 0.5 * lq;
        assert!((ed / em - 1.0 / SQRT_2).abs() < 1e-8);
        assert!(bound_theorem4(lq, 0.995, false, &c).is_err());
    }

    #[test]
    fn selector_is_total_on_quadrant() {
        let mut c = cfg();
        for &lq in &[1e3, 1e4, 1e6, 1e9] {
            for prime in [true, false] {
                c.is_prime = prime;
                for k in 0..=60 {
                    let ln = (1.0f64).max(0.99 * lq * k as f64 / 60.0);
                    let ln = ln.min(0.99 * lq - 1e-9);
                    let r = select_regime(lq, ln, false, &c);
                    assert!(r.is_ok(), "lq {lq} ln {ln}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn selector_routes() {
        let c = cfg();
        assert_eq!(select_regime(1e6, 100.0, false, &c).unwrap(), Regime::Thm1);
        assert_eq!(select_regime(1e6, 5e5, false, &c).unwrap(), Regime::Thm4);
        assert_eq!(select_regime(1e6, 2000.0, false, &c).unwrap(), Regime::Thm3);
        let comp = BoundConfig { is_prime: false, ..c };
        assert_eq!(select_regime(1e6, 500.0, false, &comp).unwrap(), Regime::Thm2Small);
        assert!(select_regime(1e6, 500.0, true, &comp).is_err());
    }

    #[test]
    fn sweep_shape() {
        let s = default_sweep().unwrap();
        assert_eq!(s.len(), 200);
        assert!(s.iter().all(|c| c.n >= 1 && c.n < c.q));
    }

    #[test]
    fn verify_small_empty() {
        let r = verify_against_exact(101, 10, &ResonatorSpec::empty(), RatioMode::FirstMoment, None, 1).unwrap();
        assert!(r.inequality.unwrap().holds);
        assert_eq!(r.regime, Regime::Exact);
    }
}
