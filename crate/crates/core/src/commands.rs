//! Table-producing analyses behind each command-line subcommand.
//!
//! Every function here is pure given its configuration and seed; the binary
//! only adds the metadata header and writes the file.

use std::f64::consts::LN_2;

use crate::config::{ChannelFile, ChannelKind, EndToEndConfig, ExponentSweepConfig, InnerErasureConfig};
use crate::error::{Error, Result};
use crate::exponents::{self, ExponentOptions};
use crate::inner_code::{ensemble_erasure_prob, ensemble_erasure_prob_exact, theorem2_bound};
use crate::outer_code::{psi_lower_bound, theorem3_codebook_size};
use crate::pipeline::{run_experiment, Experiment, InnerCodeSpec, SimulationConfig, TrialOutcome};
use crate::report::{Cell, CsvTable};
use crate::rng::{label, SeedTree};
use crate::stats::Z95;

/// Property/value summary of a channel.
pub fn channel_info(cfg: &ChannelFile) -> Result<CsvTable> {
    let ch = cfg.channel.build()?;
    let kind = cfg.channel.kind()?;
    let mut t = CsvTable::new(["property", "value"]);
    let mut row = |k: &str, v: Cell| t.push(vec![k.into(), v]);

    row("channel", ch.name().into());
    row("inputs", ch.input_size().into());
    row("outputs", ch.output_size().into());

    let source = match (ch.witness(), &cfg.channel.witness) {
        (Some(_), Some(_)) => "config",
        (Some(_), None) => "builtin",
        (None, _) => "search",
    };
    let symmetric = match ch.symmetry_witness() {
        Ok(_) => true,
        Err(Error::NotSymmetric(_)) => false,
        Err(e) => return Err(e),
    };
    row("symmetric", symmetric.into());
    row("witness_source", source.into());

    let r = exponents::r_max(&ch);
    row("r_max_nats", r.into());
    row("r_max_bits", (r / LN_2).into());
    if ch.is_full_support() {
        row("warning", "full support: every read is erased and R_max = 0".into());
    }
    match kind {
        ChannelKind::Erasure { q, p } => {
            let c = (1.0 - p) * (q as f64).ln();
            row("shannon_capacity_nats", c.into());
            row("shannon_capacity_bits", (c / LN_2).into());
            row("note", "for the erasure channel R_max equals the Shannon capacity".into());
        }
        ChannelKind::Typewriter { eps } => {
            let lb = exponents::typewriter_c0u_lower_bound(eps)?;
            row("c0u_lower_bound_nats", lb.into());
            row("c0u_lower_bound_bits", (lb / LN_2).into());
            row("c0u_lower_bound_exceeds_r_max", (lb > r).into());
        }
        _ => {}
    }
    Ok(t)
}

/// `E(R)` on the configured rate grid, in nats with bit-valued copies.
pub fn exponent_sweep(cfg: &ExponentSweepConfig) -> Result<CsvTable> {
    let ch = cfg.channel.build()?;
    let rates = cfg.sweep.grid()?;
    let opts = cfg.sweep.rho_hi.map(ExponentOptions::with_rho_hi).unwrap_or_default();
    let curve = exponents::exponent_sweep(&ch, &rates, opts)?;
    let mut t = CsvTable::new(["rate_nats", "exponent_nats", "rho_star", "saturated", "rate_bits", "exponent_bits"]);
    for p in curve.points {
        t.push(vec![
            p.rate.into(),
            p.exponent.into(),
            p.rho_star.into(),
            p.saturated.into(),
            (p.rate / LN_2).into(),
            (p.exponent / LN_2).into(),
        ]);
    }
    Ok(t)
}

/// Ensemble erasure probability of random inner codes over an `(L, K)` grid,
/// next to the exponential bound at the realised rate. Grid point `i` uses
/// the seed subtree `ENSEMBLE / i`.
pub fn inner_erasure(cfg: &InnerErasureConfig, seed: u64) -> Result<CsvTable> {
    let ch = cfg.channel.build()?;
    ch.symmetry_witness()?;
    let spec = &cfg.inner;
    let q = ch.input_size();
    let ln_q = (q as f64).ln();
    if spec.lengths.is_empty() {
        return Err(Error::Config("`lengths` must not be empty".into()));
    }
    let dims: Vec<usize> = match (&spec.dims, spec.rate_fraction) {
        (Some(d), None) if d.len() == spec.lengths.len() => d.clone(),
        (Some(_), None) => return Err(Error::Config("`dims` must have one entry per length".into())),
        (None, Some(f)) if f > 0.0 => {
            let r = exponents::r_max(&ch);
            spec.lengths
                .iter()
                .map(|&l| ((f * r * l as f64 / ln_q).floor() as usize).max(1))
                .collect()
        }
        _ => return Err(Error::Config("give exactly one of `dims` or a positive `rate_fraction`".into())),
    };
    let opts = spec.rho_hi.map(ExponentOptions::with_rho_hi).unwrap_or_default();
    let opts_rho1 = ExponentOptions::with_rho_hi(1.0);

    let mut columns = vec![
        "L",
        "K",
        "rate_nats",
        "p_er_mc",
        "ci_half_width",
        "theorem2_bound",
        "theorem2_bound_rho1",
    ];
    if spec.exact {
        columns.push("p_er_exact");
    }
    let mut t = CsvTable::new(columns);
    let root = SeedTree::new(seed).child(label::ENSEMBLE);
    for (i, (&l, &k)) in spec.lengths.iter().zip(&dims).enumerate() {
        let seeds = root.child(i as u64);
        let rate = k as f64 * ln_q / l as f64;
        let est = ensemble_erasure_prob(q, k, l, &ch, spec.codes, spec.trials, spec.full_rank, &seeds)?;
        let mut cells: Vec<Cell> = vec![
            l.into(),
            k.into(),
            rate.into(),
            est.mean.into(),
            (Z95 * est.standard_error).into(),
            theorem2_bound(&ch, l, rate, opts)?.into(),
            theorem2_bound(&ch, l, rate, opts_rho1)?.into(),
        ];
        if spec.exact {
            let exact = ensemble_erasure_prob_exact(q, k, l, &ch, spec.codes, spec.full_rank, &seeds)?;
            cells.push(exact.mean.into());
        }
        t.push(cells);
    }
    Ok(t)
}

/// Output of [`end_to_end`].
#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndOutput {
    pub summary: CsvTable,
    pub trial_log: CsvTable,
}

/// Full storage/retrieval simulation over the configured grid of pool size
/// bounds. Every grid point shares the master seed.
pub fn end_to_end(cfg: &EndToEndConfig, seed: u64) -> Result<EndToEndOutput> {
    let ch = cfg.channel.build()?;
    let exp_spec = &cfg.experiment;
    if exp_spec.m.is_empty() {
        return Err(Error::Config("`M` grid must not be empty".into()));
    }
    let code = match cfg.code.to_code()? {
        Some(c) => InnerCodeSpec::Explicit(c),
        None => InnerCodeSpec::Random {
            q: cfg.code.q,
            k: cfg.code.k,
            l: cfg.code.l,
        },
    };
    let mut summary = CsvTable::new([
        "M",
        "L",
        "K",
        "q",
        "beta_implied",
        "rate_nats",
        "xi",
        "codebook_size",
        "trials",
        "err_rate",
        "err_ci",
        "mean_erasure_frac",
        "s_zero_frac",
        "ties",
        "undetected_inner_errors",
        "psi_lower_bound",
        "theorem3_log_codebook_size",
    ]);
    let mut log = CsvTable::new([
        "M",
        "trial",
        "transmitted",
        "decoded",
        "divergence",
        "survivors",
        "erased",
        "tie",
        "error",
    ]);
    for &m in &exp_spec.m {
        let sim = SimulationConfig {
            channel: ch.clone(),
            code: code.clone(),
            pool_bound: m,
            xi: exp_spec.xi,
            codebook_size: exp_spec.codebook_size,
            trials: exp_spec.trials,
            seed,
            sigma: exp_spec.sigma,
        };
        let exp = Experiment::prepare(&sim)?;
        let (rep, records) = run_experiment(&exp)?;
        let p = rep.params;
        let psi = psi_lower_bound(m as f64, p.beta_implied, &ch).unwrap_or(f64::NAN);
        let log_size = match exp_spec.sigma {
            Some(s) => theorem3_codebook_size(m as f64, p.types, s)?,
            None => f64::NAN,
        };
        summary.push(vec![
            m.into(),
            p.l.into(),
            p.k.into(),
            p.q.into(),
            p.beta_implied.into(),
            p.rate.into(),
            exp_spec.xi.into(),
            rep.codebook_size.into(),
            rep.trials.into(),
            rep.error_rate.into(),
            rep.error_ci.into(),
            rep.mean_erasure_fraction.into(),
            rep.s_zero_fraction().into(),
            rep.ties.into(),
            rep.undetected.into(),
            psi.into(),
            log_size.into(),
        ]);
        for (i, r) in records.iter().enumerate() {
            let (decoded, divergence) = match r.outcome {
                TrialOutcome::Decoded { index, divergence } => (Cell::from(index), Cell::from(divergence)),
                TrialOutcome::NoSurvivors => (Cell::from(""), Cell::from("")),
            };
            log.push(vec![
                m.into(),
                i.into(),
                r.transmitted.into(),
                decoded,
                divergence,
                r.survivors.into(),
                r.erased.into(),
                r.tie.into(),
                r.is_error().into(),
            ]);
        }
    }
    Ok(EndToEndOutput { summary, trial_log: log })
}
