//! Fast invariant suite run by the `selfcheck` subcommand.

use std::f64::consts::LN_2;

use rand_distr::{Distribution, Uniform};

use crate::channel::Channel;
use crate::error::Result;
use crate::exponents::{e0_tilde, r_max};
use crate::inner_code::{erasure_prob_mc, message_independence_check, LinearCode};
use crate::outer_code::{chi_square, kl_divergence, sample_dirichlet_uniform};
use crate::pipeline::multinomial_chi2_mean_check;
use crate::rng::{label, SeedTree};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

/// Channels exercised by the suite. Tests swap in broken channels here.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub channels: Vec<Channel>,
    pub seed: u64,
}

impl Fixture {
    pub fn standard() -> Result<Self> {
        Ok(Fixture {
            channels: vec![
                Channel::erasure(2, 0.2)?,
                Channel::erasure(3, 0.6)?,
                Channel::typewriter(0.5)?,
                Channel::identity(2)?,
            ],
            seed: 0,
        })
    }
}

/// Every full-rank generator over `Z_q` with the given shape.
pub fn full_rank_codes(q: usize, k: usize, l: usize) -> Vec<LinearCode> {
    let n = k * l;
    let total = q.pow(n as u32);
    (0..total)
        .filter_map(|mut idx| {
            let mut g = vec![0; n];
            for v in g.iter_mut() {
                *v = idx % q;
                idx /= q;
            }
            LinearCode::new(q, k, l, g).ok().filter(LinearCode::is_full_rank)
        })
        .collect()
}

fn prop1(fx: &Fixture) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut codes = 0usize;
    for ch in &fx.channels {
        let q = ch.input_size();
        for k in 1..=2 {
            for l in k..=3 {
                for code in full_rank_codes(q, k, l) {
                    worst = worst.max(message_independence_check(&code, ch)?);
                    codes += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("{codes} codes, max gap {worst:e}")))
}

fn kl_below_chi2(fx: &Fixture) -> Result<(bool, String)> {
    let seeds = SeedTree::new(fx.seed).child(label::CHECK).child(1);
    let mut violations = 0;
    for i in 0..10_000u64 {
        let mut rng = seeds.stream(i);
        let t = 2 + (i % 7) as usize;
        let q = sample_dirichlet_uniform(t, &mut rng)?;
        let p = sample_dirichlet_uniform(t, &mut rng)?;
        let d = kl_divergence(q.as_slice(), p.as_slice())?;
        let c = chi_square(q.as_slice(), p.as_slice())?;
        if d > c * (1.0 + 1e-12) + 1e-15 {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("{violations} violations in 10000 pairs")))
}

fn e0_properties(fx: &Fixture) -> Result<(bool, String)> {
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    for ch in &fx.channels {
        let v = grid.iter().map(|&r| e0_tilde(ch, r)).collect::<Result<Vec<_>>>()?;
        if v[0] != 0.0 {
            return Ok((false, format!("{}: e0(0) = {}", ch.name(), v[0])));
        }
        for i in 1..v.len() {
            if v[i] < v[i - 1] - 1e-12 {
                return Ok((false, format!("{}: decreasing at rho = {}", ch.name(), grid[i])));
            }
        }
        for i in 1..v.len() - 1 {
            if v[i - 1] + v[i + 1] - 2.0 * v[i] > 1e-10 {
                return Ok((false, format!("{}: not concave at rho = {}", ch.name(), grid[i])));
            }
        }
        let slope = (v[1] - v[0]) / grid[1];
        if slope > r_max(ch) + 1e-9 {
            return Ok((false, format!("{}: initial slope above R_max", ch.name())));
        }
    }
    Ok((true, format!("{} channels", fx.channels.len())))
}

fn chi2_mean(fx: &Fixture) -> Result<(bool, String)> {
    let seeds = SeedTree::new(fx.seed).child(label::CHECK).child(2);
    let c = multinomial_chi2_mean_check(5, 50, 10_000, &seeds)?;
    Ok((
        c.holds,
        format!("mean {} vs {} (se {})", c.empirical_mean, c.analytic, c.standard_error),
    ))
}

fn r_max_closed_forms(_: &Fixture) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for q in [2usize, 4] {
        for p in [0.0, 0.1, 0.5] {
            let got = r_max(&Channel::erasure(q, p)?);
            worst = worst.max((got - (1.0 - p) * (q as f64).ln()).abs());
        }
    }
    for eps in [0.1, 0.5, 0.9] {
        worst = worst.max((r_max(&Channel::typewriter(eps)?) - 1.5f64.ln()).abs());
    }
    Ok((worst <= 1e-12, format!("max error {worst:e} nats ({:e} bits)", worst / LN_2)))
}

fn zue_structural(fx: &Fixture) -> Result<(bool, String)> {
    let seeds = SeedTree::new(fx.seed).child(label::CHECK).child(3);
    let mut decodes = 0;
    let mut undetected = 0;
    for (i, ch) in fx.channels.iter().enumerate() {
        let q = ch.input_size();
        let mut rng = seeds.child(i as u64).stream(0);
        let code = LinearCode::sample(q, 2, 6, &mut rng, true)?;
        let dist = Uniform::new(0, code.size()).expect("non-empty message set");
        let m = dist.sample(&mut rng);
        let est = erasure_prob_mc(&code, ch, m, 20_000, &seeds.child(i as u64).child(1))?;
        decodes += est.trials;
        undetected += est.undetected;
    }
    Ok((undetected == 0, format!("{decodes} decodes, {undetected} undetected")))
}

type Check = (&'static str, fn(&Fixture) -> Result<(bool, String)>);

const CHECKS: [Check; 6] = [
    ("prop1-message-independence", prop1),
    ("kl-below-chi-square", kl_below_chi2),
    ("e0-properties", e0_properties),
    ("chi-square-mean", chi2_mean),
    ("r-max-closed-forms", r_max_closed_forms),
    ("zue-no-undetected-errors", zue_structural),
];

pub fn run(fx: &Fixture) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, f)| CheckOutcome::from_result(name, f(fx)))
        .collect()
}

pub fn run_standard() -> Result<Vec<CheckOutcome>> {
    Ok(run(&Fixture::standard()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SymmetryWitness;

    #[test]
    fn pristine_fixture_passes() {
        for c in run_standard().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn corrupted_witness_is_named() {
        let mut fx = Fixture::standard().unwrap();
        let bad = SymmetryWitness::cyclic(3).with_entry(0, 1, 0).unwrap();
        fx.channels[2] = Channel::typewriter(0.5).unwrap().with_witness(bad).unwrap();
        let out = run(&fx);
        let failed: Vec<_> = out.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert_eq!(failed, vec!["prop1-message-independence"]);
    }

    #[test]
    fn generator_enumeration_counts() {
        // Full-rank 2x2 matrices over GF(2) and GF(3).
        assert_eq!(full_rank_codes(2, 2, 2).len(), 6);
        assert_eq!(full_rank_codes(3, 2, 2).len(), 48);
        assert_eq!(full_rank_codes(2, 1, 3).len(), 7);
    }
}
