//! Histogram codebooks over T molecule types and the minimum-KL outer decoder.
//!
//! A message is stored as a pool holding `floor(M P_m(l))` copies of inner
//! codeword `l`, where `P_m` is drawn uniformly from the probability simplex.
//! The decoder picks the codeword whose empirical PMF is closest in KL
//! divergence to the observed frequency vector.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{domain, Result};
use crate::exponents::r_max;
use crate::rng::{label, SeedTree};

/// Point on the (T-1)-dimensional probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Wrap a probability vector, checking non-negativity and normalisation.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return domain("simplex point has a negative or non-finite entry");
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return domain(format!("simplex point sums to {sum}"));
        }
        Ok(SimplexPoint(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Uniform draw from the simplex over `t` types (Dirichlet(1, ..., 1)),
/// obtained by normalising `t` i.i.d. unit exponentials.
pub fn sample_dirichlet_uniform<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Result<SimplexPoint> {
    if t < 2 {
        return domain(format!("need at least 2 types, got {t}"));
    }
    let mut x: Vec<f64> = (0..t).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= sum);
    Ok(SimplexPoint(x))
}

/// One outer codeword: pool composition and its empirical PMF.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterCodeword {
    counts: Vec<u64>,
    pmf: Vec<f64>,
    log_pmf: Vec<f64>,
}

impl OuterCodeword {
    /// Build from pool counts with a positive total.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return domain("codeword pool is empty");
        }
        let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let log_pmf = pmf.iter().map(|p| p.ln()).collect();
        Ok(OuterCodeword { counts, pmf, log_pmf })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Number of molecules in the pool.
    pub fn pool_size(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn divergence_from(&self, q_hat: &[f64]) -> f64 {
        let mut d = 0.0;
        for ((&qv, &lp), &p) in q_hat.iter().zip(&self.log_pmf).zip(&self.pmf) {
            if qv > 0.0 {
                if p == 0.0 {
                    return f64::INFINITY;
                }
                d += qv * (qv.ln() - lp);
            }
        }
        d.max(0.0)
    }
}

/// Floor-quantise `p` to a pool of at most `m` molecules.
pub fn quantize(p: &SimplexPoint, m: u64) -> Result<OuterCodeword> {
    let t = p.0.len() as u64;
    if m <= t {
        return domain(format!("pool bound M={m} must exceed the number of types T={t}"));
    }
    let counts = p.0.iter().map(|&v| (m as f64 * v).floor() as u64).collect();
    OuterCodeword::from_counts(counts)
}

/// An in-memory outer codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterCodebook {
    pool_bound: u64,
    types: usize,
    seed: u64,
    codewords: Vec<OuterCodeword>,
}

impl OuterCodebook {
    /// Assemble a codebook from explicit count vectors (e.g. read from a file).
    pub fn from_counts(pool_bound: u64, types: usize, seed: u64, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.is_empty() {
            return domain("codebook is empty");
        }
        let codewords = counts
            .into_iter()
            .map(|c| {
                if c.len() != types {
                    return domain(format!("codeword has {} counts, expected T={types}", c.len()));
                }
                if c.iter().sum::<u64>() > pool_bound {
                    return domain("codeword uses more than M molecules");
                }
                OuterCodeword::from_counts(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OuterCodebook {
            pool_bound,
            types,
            seed,
            codewords,
        })
    }

    /// Pool size bound M.
    pub fn pool_bound(&self) -> u64 {
        self.pool_bound
    }

    /// Number of molecule types T.
    pub fn types(&self) -> usize {
        self.types
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, m: usize) -> &OuterCodeword {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[OuterCodeword] {
        &self.codewords
    }
}

/// Draw `size` codewords independently. Codeword `i` uses its own substream
/// below `seed`, so the result is independent of thread count.
pub fn build_codebook(size: usize, t: usize, m: u64, seed: u64) -> Result<OuterCodebook> {
    if size == 0 {
        return domain("codebook size must be at least 1");
    }
    if m <= t as u64 {
        return domain(format!("pool bound M={m} must exceed the number of types T={t}"));
    }
    let tree = SeedTree::new(seed).child(label::CODEBOOK);
    let codewords = (0..size as u64)
        .into_par_iter()
        .map(|i| quantize(&sample_dirichlet_uniform(t, &mut tree.stream(i))?, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(OuterCodebook {
        pool_bound: m,
        types: t,
        seed,
        codewords,
    })
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return domain(format!("distributions have different lengths: {} vs {}", a.len(), b.len()));
    }
    Ok(())
}

/// `D(Q || P) = sum Q ln(Q/P)` in nats; `+inf` when Q puts mass where P has none.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    same_len(q, p)?;
    let mut d = 0.0;
    for (&qv, &pv) in q.iter().zip(p) {
        if qv > 0.0 {
            if pv == 0.0 {
                return Ok(f64::INFINITY);
            }
            d += qv * (qv / pv).ln();
        }
    }
    Ok(d.max(0.0))
}

/// `chi^2(Q || P) = sum (Q - P)^2 / P`; `+inf` when Q puts mass where P has none.
pub fn chi_square(q: &[f64], p: &[f64]) -> Result<f64> {
    same_len(q, p)?;
    let mut c = 0.0;
    for (&qv, &pv) in q.iter().zip(p) {
        if pv == 0.0 {
            if qv > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        c += (qv - pv).powi(2) / pv;
    }
    Ok(c)
}

/// Outcome of minimum-divergence decoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDecision {
    pub index: usize,
    /// `+inf` when no codeword covers the support of the observation.
    pub divergence: f64,
    /// Other codewords at exactly the same divergence as `index`.
    pub ties: usize,
}

/// `argmin_m D(q_hat || P_m)`, lowest index on ties.
pub fn kl_decode(codebook: &OuterCodebook, q_hat: &[f64]) -> Result<KlDecision> {
    if q_hat.len() != codebook.types {
        return domain(format!(
            "frequency vector has {} entries, codebook has T={}",
            q_hat.len(),
            codebook.types
        ));
    }
    let mut best = KlDecision {
        index: 0,
        divergence: f64::INFINITY,
        ties: 0,
    };
    for (m, cw) in codebook.codewords.iter().enumerate() {
        let d = cw.divergence_from(q_hat);
        if m == 0 || d < best.divergence {
            best = KlDecision {
                index: m,
                divergence: d,
                ties: 0,
            };
        } else if d == best.divergence {
            best.ties += 1;
        }
    }
    Ok(best)
}

/// Log-cardinality `(1/2 - sigma) T ln(M/T)` of the codebook used in the
/// scaling-law argument. Reported only; never materialised.
pub fn theorem3_codebook_size(m: f64, t: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return domain(format!("sigma must lie in (0, 1/2), got {sigma}"));
    }
    if !(m > t as f64) || !m.is_finite() {
        return domain(format!("need M > T, got M={m}, T={t}"));
    }
    Ok((0.5 - sigma) * t as f64 * (m / t as f64).ln())
}

/// `(1 - beta R_max)/2 * M^(beta R_max) * ln M`.
pub fn psi_lower_bound(m: f64, beta: f64, ch: &Channel) -> Result<f64> {
    let beta_max = 1.0 / (ch.input_size() as f64).ln();
    if !(beta > 0.0 && beta < beta_max) {
        return domain(format!("beta must lie in (0, 1/ln q) = (0, {beta_max}), got {beta}"));
    }
    if !(m >= 2.0) {
        return domain(format!("M must be at least 2, got {m}"));
    }
    let r = r_max(ch);
    Ok((1.0 - beta * r) / 2.0 * m.powf(beta * r) * m.ln())
}
