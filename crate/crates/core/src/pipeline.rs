//! End-to-end storage and retrieval of one message per trial.
//!
//! Storage: the outer codeword fixes how many copies of each inner codeword
//! sit in the pool. Retrieval: `N = round(xi M)` reads are sampled with
//! replacement (multinomially over types), each read passes through the
//! sequencing channel and is ZUE-decoded, and the survivors' frequency vector
//! is matched against the codebook by minimum KL divergence. A trial with no
//! surviving read is counted as an error.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{domain, Error, Result};
use crate::inner_code::{decode_unchecked, erasure_prob_exact, erasure_prob_mc, LinearCode, ZueOutcome, MAX_ENUMERATION};
use crate::outer_code::{build_codebook, chi_square, kl_decode, OuterCodebook};
use crate::rng::{label, SeedTree, Stream};
use crate::stats::{mean_and_se, wilson_half_width};

/// How the inner code of an experiment is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerCodeSpec {
    /// Draw a full-rank generator from the experiment seed (q must be prime).
    Random { q: usize, k: usize, l: usize },
    /// Use the given code, which must have distinct codewords.
    Explicit(LinearCode),
}

/// Parameters of one end-to-end experiment.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub channel: Channel,
    pub code: InnerCodeSpec,
    /// Pool size bound M.
    pub pool_bound: u64,
    /// Coverage depth N / M.
    pub xi: f64,
    pub codebook_size: usize,
    pub trials: u64,
    pub seed: u64,
    /// Only used for the reported log-cardinality of the scaling-law codebook.
    pub sigma: Option<f64>,
}

/// Quantities implied by a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub q: usize,
    pub k: usize,
    pub l: usize,
    /// Number of molecule types `T = q^K`.
    pub types: usize,
    /// Number of reads `N`.
    pub reads: u64,
    /// `L / ln M`.
    pub beta_implied: f64,
    /// `K ln q / L` in nats.
    pub rate: f64,
}

/// Shared read-only state of all trials of one experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub channel: Channel,
    pub code: LinearCode,
    pub codebook: OuterCodebook,
    pub params: DerivedParams,
    pub seed: u64,
    pub trials: u64,
}

impl Experiment {
    /// Validate a configuration and materialise its code and codebook.
    pub fn prepare(cfg: &SimulationConfig) -> Result<Self> {
        if cfg.trials == 0 {
            return domain("trials must be at least 1");
        }
        if !(cfg.xi > 0.0) || !cfg.xi.is_finite() {
            return domain(format!("coverage depth must be positive, got {}", cfg.xi));
        }
        if cfg.pool_bound < 2 {
            return domain("pool bound M must be at least 2");
        }
        let reads = (cfg.xi * cfg.pool_bound as f64).round() as u64;
        if reads == 0 {
            return domain("coverage depth yields N = 0 reads");
        }
        let seeds = SeedTree::new(cfg.seed);
        let code = match &cfg.code {
            InnerCodeSpec::Random { q, k, l } => {
                LinearCode::sample(*q, *k, *l, &mut seeds.child(label::GENERATOR).stream(0), true)?
            }
            InnerCodeSpec::Explicit(code) => {
                if !code.is_full_rank() {
                    return domain("the end-to-end pipeline needs an inner code with distinct codewords");
                }
                code.clone()
            }
        };
        if code.alphabet() != cfg.channel.input_size() {
            return domain(format!(
                "code alphabet {} does not match channel input alphabet {}",
                code.alphabet(),
                cfg.channel.input_size()
            ));
        }
        let types = code.size();
        if types as u64 >= cfg.pool_bound {
            return domain(format!("need T = q^K < M, got T={types}, M={}", cfg.pool_bound));
        }
        let codebook = build_codebook(cfg.codebook_size, types, cfg.pool_bound, cfg.seed)?;
        let params = DerivedParams {
            q: code.alphabet(),
            k: code.dimension(),
            l: code.length(),
            types,
            reads,
            beta_implied: code.length() as f64 / (cfg.pool_bound as f64).ln(),
            rate: code.rate(),
        };
        Ok(Experiment {
            channel: cfg.channel.clone(),
            code,
            codebook,
            params,
            seed: cfg.seed,
            trials: cfg.trials,
        })
    }
}

/// Multinomial read counts: `n` draws over types with probabilities
/// `counts / sum(counts)`, via sequential conditional binomials.
pub fn sample_reads<R: Rng + ?Sized>(counts: &[u64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return domain("cannot sample from an empty pool");
    }
    let mut out = vec![0u64; counts.len()];
    let mut left_mass = total;
    let mut left_reads = n;
    for (u, &c) in out.iter_mut().zip(counts) {
        if left_reads == 0 {
            break;
        }
        if c == left_mass {
            *u = left_reads;
            left_reads = 0;
        } else if c > 0 {
            let p = c as f64 / left_mass as f64;
            *u = Binomial::new(left_reads, p).expect("p in [0, 1]").sample(rng);
            left_reads -= *u;
        }
        left_mass -= c;
    }
    Ok(out)
}

/// What the outer decoder concluded in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOutcome {
    Decoded { index: usize, divergence: f64 },
    /// No read survived inner decoding.
    NoSurvivors,
}

/// Record of one storage/retrieval trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub transmitted: usize,
    /// Reads recovered by the inner decoder (S).
    pub survivors: u64,
    pub erased: u64,
    pub outcome: TrialOutcome,
    pub tie: bool,
    /// Reads decoded to the wrong inner codeword. Always zero.
    pub undetected: u64,
}

impl TrialRecord {
    pub fn is_error(&self) -> bool {
        match self.outcome {
            TrialOutcome::Decoded { index, .. } => index != self.transmitted,
            TrialOutcome::NoSurvivors => true,
        }
    }

    pub fn decoded(&self) -> Option<usize> {
        match self.outcome {
            TrialOutcome::Decoded { index, .. } => Some(index),
            TrialOutcome::NoSurvivors => None,
        }
    }
}

/// Store a uniformly drawn message and try to retrieve it.
pub fn run_trial<R: Rng + ?Sized>(exp: &Experiment, rng: &mut R) -> Result<TrialRecord> {
    let transmitted = rng.random_range(0..exp.codebook.len());
    let reads = sample_reads(exp.codebook.codeword(transmitted).counts(), exp.params.reads, rng)?;
    let types = exp.params.types;
    let mut tally = vec![0u64; types];
    let mut y = vec![0usize; exp.params.l];
    let mut undetected = 0u64;
    let mut erased = 0u64;
    for (ell, &u) in reads.iter().enumerate() {
        let x = exp.code.codeword(ell);
        for _ in 0..u {
            exp.channel.sequence_into(x, &mut y, rng);
            match decode_unchecked(&exp.code, &exp.channel, &y) {
                ZueOutcome::Erasure => erased += 1,
                ZueOutcome::Decoded(d) => {
                    if d != ell {
                        undetected += 1;
                    }
                    tally[d] += 1;
                }
            }
        }
    }
    let survivors: u64 = tally.iter().sum();
    if survivors == 0 {
        return Ok(TrialRecord {
            transmitted,
            survivors,
            erased,
            outcome: TrialOutcome::NoSurvivors,
            tie: false,
            undetected,
        });
    }
    let q_hat: Vec<f64> = tally.iter().map(|&c| c as f64 / survivors as f64).collect();
    let decision = kl_decode(&exp.codebook, &q_hat)?;
    Ok(TrialRecord {
        transmitted,
        survivors,
        erased,
        outcome: TrialOutcome::Decoded {
            index: decision.index,
            divergence: decision.divergence,
        },
        tie: decision.ties > 0,
        undetected,
    })
}

/// Aggregate statistics of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub params: DerivedParams,
    pub pool_bound: u64,
    pub xi: f64,
    pub codebook_size: usize,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    /// Wilson 95% half-width of `error_rate`.
    pub error_ci: f64,
    pub mean_erasure_fraction: f64,
    pub s_zero: u64,
    pub s_min: u64,
    pub s_max: u64,
    pub s_mean: f64,
    pub ties: u64,
    pub undetected: u64,
    /// Inner decodes performed over all trials.
    pub decodes: u64,
}

impl SimulationReport {
    pub fn s_zero_fraction(&self) -> f64 {
        self.s_zero as f64 / self.trials as f64
    }
}

/// Run every trial of `exp`. Trial `t` draws from its own substream, and the
/// records are reduced in trial order, so the report is independent of the
/// number of worker threads.
pub fn run_experiment(exp: &Experiment) -> Result<(SimulationReport, Vec<TrialRecord>)> {
    if exp.trials == 0 {
        return domain("trials must be at least 1");
    }
    let tree = SeedTree::new(exp.seed).child(label::TRIALS);
    let records = (0..exp.trials)
        .into_par_iter()
        .map(|t| run_trial(exp, &mut tree.stream(t)))
        .collect::<Result<Vec<_>>>()?;
    let n = exp.params.reads;
    let erasure_fracs: Vec<f64> = records.iter().map(|r| r.erased as f64 / n as f64).collect();
    let survivors: Vec<f64> = records.iter().map(|r| r.survivors as f64).collect();
    let errors = records.iter().filter(|r| r.is_error()).count() as u64;
    let report = SimulationReport {
        params: exp.params,
        pool_bound: exp.codebook.pool_bound(),
        xi: n as f64 / exp.codebook.pool_bound() as f64,
        codebook_size: exp.codebook.len(),
        seed: exp.seed,
        trials: exp.trials,
        errors,
        error_rate: errors as f64 / exp.trials as f64,
        error_ci: wilson_half_width(errors, exp.trials),
        mean_erasure_fraction: mean_and_se(&erasure_fracs).0,
        s_zero: records.iter().filter(|r| r.survivors == 0).count() as u64,
        s_min: records.iter().map(|r| r.survivors).min().unwrap_or(0),
        s_max: records.iter().map(|r| r.survivors).max().unwrap_or(0),
        s_mean: mean_and_se(&survivors).0,
        ties: records.iter().filter(|r| r.tie).count() as u64,
        undetected: records.iter().map(|r| r.undetected).sum(),
        decodes: exp.trials * n,
    };
    Ok((report, records))
}

/// Convenience wrapper: prepare and run.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulationReport> {
    let exp = Experiment::prepare(cfg)?;
    Ok(run_experiment(&exp)?.0)
}

/// Outcome of the lower-tail Chernoff check on the survivor count S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffCheck {
    /// Per-read probability of surviving inner decoding.
    pub p_survive: f64,
    /// `N P_c (1 - kappa)`.
    pub threshold: f64,
    /// Fraction of trials with `S <= threshold`.
    pub empirical: f64,
    /// `exp(-kappa^2 N P_c / 2)`.
    pub bound: f64,
    pub standard_error: f64,
    pub holds: bool,
    pub decodes: u64,
    pub undetected: u64,
}

/// Simulate `trials` batches of `n_reads` reads (types drawn uniformly from
/// the code) and compare `P[S <= N P_c (1 - kappa)]` with the multiplicative
/// Chernoff bound. `P_c` comes from exact enumeration when it fits the budget,
/// otherwise from 10^5 Monte Carlo trials.
pub fn chernoff_s_bound_check(
    code: &LinearCode,
    ch: &Channel,
    n_reads: u64,
    trials: u64,
    kappa: f64,
    seeds: &SeedTree,
) -> Result<ChernoffCheck> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return domain(format!("kappa must lie in (0, 1), got {kappa}"));
    }
    if trials == 0 || n_reads == 0 {
        return domain("trials and n_reads must be positive");
    }
    ch.symmetry_witness()?;
    let enumerable = (ch.output_size() as f64).powi(code.length() as i32) <= MAX_ENUMERATION;
    let p_er = if enumerable {
        erasure_prob_exact(code, ch, 0)?
    } else {
        erasure_prob_mc(code, ch, 0, 100_000, &seeds.child(label::MC))?.estimate
    };
    let p_c = 1.0 - p_er;
    let threshold = n_reads as f64 * p_c * (1.0 - kappa);
    let bound = (-0.5 * kappa * kappa * n_reads as f64 * p_c).exp();
    let tree = seeds.child(label::CHECK);
    let per_trial: Vec<(u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng: Stream = tree.stream(t);
            let mut y = vec![0usize; code.length()];
            let (mut s, mut bad) = (0u64, 0u64);
            for _ in 0..n_reads {
                let m = rng.random_range(0..code.size());
                ch.sequence_into(code.codeword(m), &mut y, &mut rng);
                if let ZueOutcome::Decoded(d) = decode_unchecked(code, ch, &y) {
                    s += 1;
                    if d != m {
                        bad += 1;
                    }
                }
            }
            (s, bad)
        })
        .collect();
    let undetected: u64 = per_trial.iter().map(|p| p.1).sum();
    if undetected > 0 {
        return Err(Error::Invariant(format!("{undetected} undetected inner decoding errors")));
    }
    let hits = per_trial.iter().filter(|p| p.0 as f64 <= threshold).count();
    let empirical = hits as f64 / trials as f64;
    let standard_error = (empirical * (1.0 - empirical) / trials as f64).sqrt();
    Ok(ChernoffCheck {
        p_survive: p_c,
        threshold,
        empirical,
        bound,
        standard_error,
        holds: empirical <= bound + 4.0 * standard_error,
        decodes: trials * n_reads,
        undetected,
    })
}

/// Outcome of the multinomial chi-square mean check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2MeanCheck {
    pub empirical_mean: f64,
    /// `(T - 1) / N`.
    pub analytic: f64,
    pub standard_error: f64,
    pub holds: bool,
}

/// Empirical mean of `chi^2(U/N || p)` for `U ~ Multinomial(N, p)` with `p`
/// uniform over `t` types, against `(T - 1)/N`; passes within 5 standard errors.
pub fn multinomial_chi2_mean_check(t: usize, n: u64, trials: u64, seeds: &SeedTree) -> Result<Chi2MeanCheck> {
    if t < 2 {
        return domain("need at least 2 types");
    }
    if n < t as u64 {
        return domain(format!("need N >= T, got N={n}, T={t}"));
    }
    if trials < 2 {
        return domain("need at least 2 trials");
    }
    let counts = vec![1u64; t];
    let p = vec![1.0 / t as f64; t];
    let values = (0..trials)
        .into_par_iter()
        .map(|i| {
            let u = sample_reads(&counts, n, &mut seeds.stream(i))?;
            let q_hat: Vec<f64> = u.iter().map(|&c| c as f64 / n as f64).collect();
            chi_square(&q_hat, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    let (empirical_mean, standard_error) = mean_and_se(&values);
    let analytic = (t as f64 - 1.0) / n as f64;
    Ok(Chi2MeanCheck {
        empirical_mean,
        analytic,
        standard_error,
        holds: (empirical_mean - analytic).abs() <= 5.0 * standard_error,
    })
}
