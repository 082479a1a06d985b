//! Linear block codes over Z_q and zero-undetected-error (ZUE) decoding.
//!
//! A ZUE decoder returns the unique codeword whose likelihood is positive,
//! or an erasure when zero or several codewords remain feasible. Feasibility
//! of a codeword is read off the channel's support mask position by position,
//! so the decoder never outputs a wrong codeword.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{domain, Error, Result};
use crate::exponents::{erasure_exponent, ExponentOptions};
use crate::rng::{label, SeedTree};
use crate::stats::{mean_and_se, wilson_half_width};

/// Largest codebook `q^K` that is materialised.
pub const MAX_CODEWORDS: usize = 1 << 20;
/// Largest `|Y|^L` that exact enumeration will walk.
pub const MAX_ENUMERATION: f64 = 1e7;
/// Attempts made by full-rank rejection sampling before giving up.
const MAX_RANK_ATTEMPTS: usize = 10_000;
/// Trials per random substream in Monte Carlo loops.
const TRIAL_BLOCK: u64 = 1024;

/// Result of decoding one read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZueOutcome {
    Decoded(usize),
    Erasure,
}

/// A `K x L` generator over Z_q with its `q^K` codewords precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    q: usize,
    k: usize,
    l: usize,
    generator: Vec<usize>,
    codewords: Vec<usize>,
    full_rank: bool,
}

impl LinearCode {
    /// Build a code from a row-major `K x L` generator.
    pub fn new(q: usize, k: usize, l: usize, generator: Vec<usize>) -> Result<Self> {
        if q < 2 {
            return domain(format!("q must be at least 2, got {q}"));
        }
        if k < 1 || k > l {
            return domain(format!("need 1 <= K <= L, got K={k}, L={l}"));
        }
        if generator.len() != k * l {
            return domain(format!("generator has {} entries, expected K*L = {}", generator.len(), k * l));
        }
        if let Some(&g) = generator.iter().find(|&&g| g >= q) {
            return domain(format!("generator entry {g} outside Z_{q}"));
        }
        let size = code_size(q, k)?;
        let mut codewords = vec![0usize; size * l];
        let mut digits = vec![0usize; k];
        for m in 1..size {
            // little-endian base-q counter
            for d in digits.iter_mut() {
                *d += 1;
                if *d < q {
                    break;
                }
                *d = 0;
            }
            let word = &mut codewords[m * l..(m + 1) * l];
            for (i, &d) in digits.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                for (w, &g) in word.iter_mut().zip(&generator[i * l..(i + 1) * l]) {
                    *w = (*w + d * g) % q;
                }
            }
        }
        let full_rank = if is_prime(q) {
            rank_mod_prime(&generator, k, l, q) == k
        } else {
            all_distinct(&codewords, l)
        };
        Ok(LinearCode {
            q,
            k,
            l,
            generator,
            codewords,
            full_rank,
        })
    }

    /// Draw a generator with i.i.d. uniform entries on Z_q. With
    /// `require_full_rank` the draw is repeated until the rank over the
    /// field Z_q is K, which needs q prime.
    pub fn sample<R: Rng + ?Sized>(
        q: usize,
        k: usize,
        l: usize,
        rng: &mut R,
        require_full_rank: bool,
    ) -> Result<Self> {
        if k > l {
            return domain(format!("K={k} exceeds L={l}"));
        }
        if require_full_rank && !is_prime(q) {
            return domain(format!("full-rank sampling needs a prime alphabet size, got q={q}"));
        }
        code_size(q, k)?;
        for _ in 0..MAX_RANK_ATTEMPTS {
            let generator: Vec<usize> = (0..k * l).map(|_| rng.random_range(0..q)).collect();
            if require_full_rank && rank_mod_prime(&generator, k, l, q) < k {
                continue;
            }
            return LinearCode::new(q, k, l, generator);
        }
        Err(Error::Capability("no full-rank generator found".into()))
    }

    pub fn alphabet(&self) -> usize {
        self.q
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn length(&self) -> usize {
        self.l
    }

    /// Number of messages `T = q^K`.
    pub fn size(&self) -> usize {
        self.codewords.len() / self.l
    }

    /// Whether all `q^K` codewords are distinct.
    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn generator(&self) -> &[usize] {
        &self.generator
    }

    /// Code rate `K ln q / L` in nats per channel use.
    pub fn rate(&self) -> f64 {
        self.k as f64 * (self.q as f64).ln() / self.l as f64
    }

    #[inline]
    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codewords[m * self.l..(m + 1) * self.l]
    }

    /// Codeword of message `m`: its little-endian base-q digits times G.
    pub fn encode(&self, m: usize) -> Result<Vec<usize>> {
        if m >= self.size() {
            return domain(format!("message {m} outside [0, {})", self.size()));
        }
        Ok(self.codeword(m).to_vec())
    }

    /// Little-endian base-q digits of `m`.
    pub fn digits(&self, mut m: usize) -> Vec<usize> {
        (0..self.k)
            .map(|_| {
                let d = m % self.q;
                m /= self.q;
                d
            })
            .collect()
    }

    fn check_channel(&self, ch: &Channel) -> Result<()> {
        if ch.input_size() != self.q {
            return domain(format!(
                "channel input alphabet {} does not match code alphabet {}",
                ch.input_size(),
                self.q
            ));
        }
        Ok(())
    }
}

fn code_size(q: usize, k: usize) -> Result<usize> {
    u32::try_from(k)
        .ok()
        .and_then(|k| q.checked_pow(k))
        .filter(|&t| t <= MAX_CODEWORDS)
        .ok_or_else(|| Error::Capability(format!("codebook q^K = {q}^{k} exceeds {MAX_CODEWORDS}")))
}

pub(crate) fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn inverse_mod_prime(a: usize, p: usize) -> usize {
    // a^(p-2) mod p
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1usize);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Rank of a row-major `rows x cols` matrix over the prime field Z_p.
pub(crate) fn rank_mod_prime(matrix: &[usize], rows: usize, cols: usize, p: usize) -> usize {
    let mut a = matrix.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        for c in 0..cols {
            a.swap(pivot * cols + c, rank * cols + c);
        }
        let inv = inverse_mod_prime(a[rank * cols + col], p);
        for c in 0..cols {
            a[rank * cols + c] = a[rank * cols + c] * inv % p;
        }
        for r in 0..rows {
            let f = a[r * cols + col];
            if r != rank && f != 0 {
                for c in 0..cols {
                    a[r * cols + c] = (a[r * cols + c] + p * p - f * a[rank * cols + c]) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn all_distinct(codewords: &[usize], l: usize) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(codewords.len() / l);
    codewords.chunks(l).all(|w| seen.insert(w))
}

/// ZUE-decode one received sequence.
pub fn zue_decode(code: &LinearCode, ch: &Channel, y: &[usize]) -> Result<ZueOutcome> {
    code.check_channel(ch)?;
    if y.len() != code.l {
        return domain(format!("received sequence has length {}, expected {}", y.len(), code.l));
    }
    if let Some(&bad) = y.iter().find(|&&s| s >= ch.output_size()) {
        return domain(format!("output symbol {bad} outside alphabet of size {}", ch.output_size()));
    }
    Ok(decode_unchecked(code, ch, y))
}

#[inline]
pub(crate) fn decode_unchecked(code: &LinearCode, ch: &Channel, y: &[usize]) -> ZueOutcome {
    let mut found = None;
    for m in 0..code.size() {
        let feasible = code.codeword(m).iter().zip(y).all(|(&x, &s)| ch.in_support(x, s));
        if feasible {
            if found.is_some() {
                return ZueOutcome::Erasure;
            }
            found = Some(m);
        }
    }
    match found {
        Some(m) => ZueOutcome::Decoded(m),
        None => ZueOutcome::Erasure,
    }
}

fn check_enumerable(ch: &Channel, l: usize) -> Result<()> {
    let total = (ch.output_size() as f64).powi(l as i32);
    if total > MAX_ENUMERATION {
        return Err(Error::Capability(format!(
            "exact enumeration over |Y|^L = {}^{l} outputs exceeds the budget of {MAX_ENUMERATION:e}",
            ch.output_size()
        )));
    }
    Ok(())
}

/// Exact `P_er|m`: total probability of received sequences that erase when
/// codeword `m` is sent. Only sequences with positive likelihood are visited;
/// the rest contribute zero.
pub fn erasure_prob_exact(code: &LinearCode, ch: &Channel, transmitted: usize) -> Result<f64> {
    code.check_channel(ch)?;
    if transmitted >= code.size() {
        return domain(format!("message {transmitted} outside [0, {})", code.size()));
    }
    check_enumerable(ch, code.l)?;
    let x = code.codeword(transmitted);
    let options: Vec<Vec<(usize, f64)>> = x
        .iter()
        .map(|&s| (0..ch.output_size()).filter(|&y| ch.in_support(s, y)).map(|y| (y, ch.prob(s, y))).collect())
        .collect();
    let mut y = vec![0usize; code.l];
    let mut undetected = None;
    let mut total = 0.0;
    walk(&options, 0, 1.0, &mut y, &mut |y, p| match decode_unchecked(code, ch, y) {
        ZueOutcome::Erasure => total += p,
        ZueOutcome::Decoded(m) if m != transmitted => undetected = Some(m),
        ZueOutcome::Decoded(_) => {}
    });
    if let Some(m) = undetected {
        return Err(Error::Invariant(format!(
            "ZUE decoder returned message {m} while {transmitted} was sent"
        )));
    }
    Ok(total)
}

fn walk(options: &[Vec<(usize, f64)>], pos: usize, prob: f64, y: &mut [usize], visit: &mut impl FnMut(&[usize], f64)) {
    if pos == options.len() {
        visit(y, prob);
        return;
    }
    for &(sym, p) in &options[pos] {
        y[pos] = sym;
        walk(options, pos + 1, prob * p, y, visit);
    }
}

/// Exact conditional erasure probability of every message.
pub fn conditional_erasure_probs(code: &LinearCode, ch: &Channel) -> Result<Vec<f64>> {
    (0..code.size()).map(|m| erasure_prob_exact(code, ch, m)).collect()
}

/// Largest pairwise gap between exact conditional erasure probabilities.
/// Refuses channels without a verified symmetry witness.
pub fn message_independence_check(code: &LinearCode, ch: &Channel) -> Result<f64> {
    ch.symmetry_witness()?;
    let probs = conditional_erasure_probs(code, ch)?;
    let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = probs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// Monte Carlo estimate of a conditional erasure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub erasures: u64,
    pub estimate: f64,
    /// Wilson 95% half-width.
    pub half_width: f64,
    /// Reads decoded to a message other than the one sent. Always zero.
    pub undetected: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    trials: u64,
    erasures: u64,
    undetected: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            erasures: self.erasures + o.erasures,
            undetected: self.undetected + o.undetected,
        }
    }
}

fn simulate<R: Rng + ?Sized>(code: &LinearCode, ch: &Channel, m: usize, trials: u64, rng: &mut R) -> Tally {
    let x = code.codeword(m);
    let mut y = vec![0usize; code.l];
    let mut t = Tally {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        ch.sequence_into(x, &mut y, rng);
        match decode_unchecked(code, ch, &y) {
            ZueOutcome::Erasure => t.erasures += 1,
            ZueOutcome::Decoded(d) if d != m => t.undetected += 1,
            ZueOutcome::Decoded(_) => {}
        }
    }
    t
}

/// Encode, sequence and ZUE-decode message `transmitted` `trials` times.
///
/// Trials are grouped in fixed blocks, block `b` drawing from `seeds.stream(b)`,
/// so the result does not depend on the number of worker threads.
pub fn erasure_prob_mc(
    code: &LinearCode,
    ch: &Channel,
    transmitted: usize,
    trials: u64,
    seeds: &SeedTree,
) -> Result<McEstimate> {
    code.check_channel(ch)?;
    if transmitted >= code.size() {
        return domain(format!("message {transmitted} outside [0, {})", code.size()));
    }
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = TRIAL_BLOCK.min(trials - b * TRIAL_BLOCK);
            simulate(code, ch, transmitted, n, &mut seeds.stream(b))
        })
        .collect();
    let t = tallies.into_iter().fold(Tally::default(), Tally::add);
    if t.undetected > 0 {
        return Err(Error::Invariant(format!("{} undetected inner decoding errors", t.undetected)));
    }
    Ok(McEstimate {
        trials: t.trials,
        erasures: t.erasures,
        estimate: t.erasures as f64 / t.trials as f64,
        half_width: wilson_half_width(t.erasures, t.trials),
        undetected: t.undetected,
    })
}

/// Average erasure probability over independently drawn codes.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Standard error of `mean` across codes.
    pub standard_error: f64,
    pub per_code: Vec<f64>,
    /// Total inner decodes performed.
    pub decodes: u64,
    pub undetected: u64,
}

impl EnsembleEstimate {
    fn from_parts(per_code: Vec<f64>, decodes: u64, undetected: u64) -> Self {
        let (mean, standard_error) = mean_and_se(&per_code);
        EnsembleEstimate {
            mean,
            standard_error,
            per_code,
            decodes,
            undetected,
        }
    }
}

fn ensemble_code(q: usize, k: usize, l: usize, full_rank: bool, seeds: &SeedTree, index: u64) -> Result<LinearCode> {
    LinearCode::sample(q, k, l, &mut seeds.child(label::GENERATOR).stream(index), full_rank)
}

/// Monte Carlo estimate of the ensemble-average erasure probability of random
/// `(L, K)` linear codes with i.i.d. uniform generators. The bound-matching
/// ensemble keeps rank-deficient draws (`full_rank = false`). Message 0 is
/// sent, which is representative on symmetric channels; asymmetric channels
/// are refused.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_erasure_prob(
    q: usize,
    k: usize,
    l: usize,
    ch: &Channel,
    n_codes: u64,
    trials_per_code: u64,
    full_rank: bool,
    seeds: &SeedTree,
) -> Result<EnsembleEstimate> {
    ch.symmetry_witness()?;
    if ch.input_size() != q {
        return domain("channel input alphabet does not match q");
    }
    if n_codes == 0 || trials_per_code == 0 {
        return domain("n_codes and trials_per_code must be positive");
    }
    let trial_tree = seeds.child(label::TRIALS);
    let results: Vec<Result<Tally>> = (0..n_codes)
        .into_par_iter()
        .map(|g| {
            let code = ensemble_code(q, k, l, full_rank, seeds, g)?;
            Ok(simulate(&code, ch, 0, trials_per_code, &mut trial_tree.stream(g)))
        })
        .collect();
    let tallies = results.into_iter().collect::<Result<Vec<_>>>()?;
    let per_code = tallies.iter().map(|t| t.erasures as f64 / t.trials as f64).collect();
    let decodes = tallies.iter().map(|t| t.trials).sum();
    let undetected: u64 = tallies.iter().map(|t| t.undetected).sum();
    if undetected > 0 {
        return Err(Error::Invariant(format!("{undetected} undetected inner decoding errors")));
    }
    Ok(EnsembleEstimate::from_parts(per_code, decodes, undetected))
}

/// Same ensemble as [`ensemble_erasure_prob`] (identical codes for identical
/// seeds) with each code's `P_er|0` computed by exact enumeration.
pub fn ensemble_erasure_prob_exact(
    q: usize,
    k: usize,
    l: usize,
    ch: &Channel,
    n_codes: u64,
    full_rank: bool,
    seeds: &SeedTree,
) -> Result<EnsembleEstimate> {
    ch.symmetry_witness()?;
    if n_codes == 0 {
        return domain("n_codes must be positive");
    }
    check_enumerable(ch, l)?;
    let per_code = (0..n_codes)
        .into_par_iter()
        .map(|g| erasure_prob_exact(&ensemble_code(q, k, l, full_rank, seeds, g)?, ch, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleEstimate::from_parts(per_code, 0, 0))
}

/// `exp(-L E(R))`, clamped to `[0, 1]`.
pub fn theorem2_bound(ch: &Channel, l: usize, rate: f64, opts: ExponentOptions) -> Result<f64> {
    if l == 0 {
        return Ok(1.0);
    }
    let pt = erasure_exponent(ch, rate, opts)?;
    Ok((-(l as f64) * pt.exponent).exp().clamp(0.0, 1.0))
}
