//! Erasure exponents of random linear codes under zero-undetected-error
//! decoding, with the uniform input distribution P on Z_q.
//!
//! All rates and exponents are in nats.
//!
//! * `e0_tilde(rho) = -ln sum_y (PW)(y) P(X(y))^rho`
//! * `E(R) = sup_{0 < rho <= rho_hi} e0_tilde(rho) - rho R`
//! * `R_max = sum_y (PW)(y) ln 1/P(X(y))`

use crate::channel::Channel;
use crate::error::{domain, Result};
use crate::stats::binary_entropy;

/// Default upper end of the rho search interval.
pub const DEFAULT_RHO_HI: f64 = 64.0;
/// Default golden-section tolerance on rho.
pub const DEFAULT_RHO_TOL: f64 = 1e-10;

/// Per-output quantities entering every exponent formula.
#[derive(Debug, Clone)]
struct OutputProfile {
    // (PW)(y), normalised to sum to one
    weight: Vec<f64>,
    // ln P(X(y)) = ln(|X(y)| / q); only meaningful where weight > 0
    log_support: Vec<f64>,
}

impl OutputProfile {
    fn new(ch: &Channel) -> Self {
        let q = ch.input_size();
        let mut weight: Vec<f64> = (0..ch.output_size())
            .map(|y| (0..q).map(|x| ch.prob(x, y)).sum::<f64>() / q as f64)
            .collect();
        let total: f64 = weight.iter().sum();
        weight.iter_mut().for_each(|w| *w /= total);
        let log_support = (0..ch.output_size())
            .map(|y| {
                let size = (0..q).filter(|&x| ch.in_support(x, y)).count();
                (size as f64 / q as f64).ln()
            })
            .collect();
        OutputProfile { weight, log_support }
    }

    fn e0(&self, rho: f64) -> f64 {
        // -ln(1 - s) with s = sum_y w(y) (1 - P(X(y))^rho). For small s the
        // expm1/ln_1p form keeps full precision; once s is large, 1 - s is
        // formed directly as a log-sum-exp so it cannot cancel to zero.
        let terms = || {
            self.weight
                .iter()
                .zip(&self.log_support)
                .filter(|(w, _)| **w > 0.0)
        };
        let s: f64 = terms().map(|(w, ls)| -w * (rho * ls).exp_m1()).sum();
        if s <= 0.5 {
            return -(-s).ln_1p();
        }
        let top = terms().map(|(_, ls)| rho * ls).fold(f64::NEG_INFINITY, f64::max);
        let rest: f64 = terms().map(|(w, ls)| w * (rho * ls - top).exp()).sum();
        -(top + rest.ln())
    }

    fn r_max(&self) -> f64 {
        // Every term is non-negative; abs only turns -0 into 0.
        self.weight
            .iter()
            .zip(&self.log_support)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, ls)| -w * ls)
            .sum::<f64>()
            .abs()
    }
}

/// Options for the rho maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentOptions {
    pub rho_hi: f64,
    pub rho_tol: f64,
}

impl Default for ExponentOptions {
    fn default() -> Self {
        ExponentOptions {
            rho_hi: DEFAULT_RHO_HI,
            rho_tol: DEFAULT_RHO_TOL,
        }
    }
}

impl ExponentOptions {
    pub fn with_rho_hi(rho_hi: f64) -> Self {
        ExponentOptions {
            rho_hi,
            ..Default::default()
        }
    }
}

/// One evaluation of `E(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPoint {
    pub rate: f64,
    pub exponent: f64,
    pub rho_star: f64,
    /// The maximiser sits on the `rho_hi` boundary, so the reported value is a
    /// lower estimate of the supremum.
    pub saturated: bool,
}

/// `E(R)` sampled on a rate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentCurve {
    pub points: Vec<ExponentPoint>,
}

/// `e0_tilde(rho)` for the uniform input distribution.
pub fn e0_tilde(ch: &Channel, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return domain(format!("rho must be finite and non-negative, got {rho}"));
    }
    Ok(OutputProfile::new(ch).e0(rho))
}

/// Closed-form maximal rate with a positive erasure exponent.
pub fn r_max(ch: &Channel) -> f64 {
    OutputProfile::new(ch).r_max()
}

/// `E(R) = sup_rho e0_tilde(rho) - rho R` by golden-section search.
pub fn erasure_exponent(ch: &Channel, rate: f64, opts: ExponentOptions) -> Result<ExponentPoint> {
    if !rate.is_finite() {
        return domain(format!("rate must be finite, got {rate}"));
    }
    if rate < 0.0 {
        return domain(format!("rate must be non-negative, got {rate}"));
    }
    if !(opts.rho_hi > 0.0) || !opts.rho_hi.is_finite() || !(opts.rho_tol > 0.0) {
        return domain("rho_hi and rho_tol must be positive and finite");
    }
    let profile = OutputProfile::new(ch);
    Ok(maximise(&profile, rate, opts))
}

fn maximise(profile: &OutputProfile, rate: f64, opts: ExponentOptions) -> ExponentPoint {
    let f = |rho: f64| profile.e0(rho) - rho * rate;
    let (rho, val) = golden_section_max(f, 0.0, opts.rho_hi, opts.rho_tol);
    let at_hi = f(opts.rho_hi);
    let (rho, val) = if at_hi >= val { (opts.rho_hi, at_hi) } else { (rho, val) };
    if val <= 0.0 {
        return ExponentPoint {
            rate,
            exponent: 0.0,
            rho_star: 0.0,
            saturated: false,
        };
    }
    ExponentPoint {
        rate,
        exponent: val,
        rho_star: rho,
        saturated: opts.rho_hi - rho <= 2.0 * opts.rho_tol,
    }
}

/// Maximise a unimodal `f` on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Evaluate `E(R)` over an ascending rate grid.
pub fn exponent_sweep(ch: &Channel, rates: &[f64], opts: ExponentOptions) -> Result<ExponentCurve> {
    if rates.is_empty() {
        return domain("rate grid is empty");
    }
    if rates.windows(2).any(|w| !(w[0] <= w[1])) {
        return domain("rate grid must be sorted ascending");
    }
    let points = rates
        .iter()
        .map(|&r| erasure_exponent(ch, r, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentCurve { points })
}

/// Lower bound `ln 2 - h(eps)/2` on the zero-undetected-error capacity of the
/// typewriter channel.
pub fn typewriter_c0u_lower_bound(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return domain(format!("eps must lie in [0, 1], got {eps}"));
    }
    Ok(std::f64::consts::LN_2 - 0.5 * binary_entropy(eps))
}
