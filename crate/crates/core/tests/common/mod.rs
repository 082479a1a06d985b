//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical routines.
#![allow(dead_code)]

use dnazue::Channel;

/// Matrix of a channel as plain rows.
pub fn matrix(ch: &Channel) -> Vec<Vec<f64>> {
    (0..ch.input_size()).map(|x| ch.row(x).to_vec()).collect()
}

/// `e0_tilde` by direct summation of `sum_y (PW)(y) P(X(y))^rho`.
pub fn e0_direct(w: &[Vec<f64>], rho: f64) -> f64 {
    let q = w.len();
    let outputs = w[0].len();
    let mut total = 0.0;
    for y in 0..outputs {
        let pw: f64 = w.iter().map(|row| row[y]).sum::<f64>() / q as f64;
        if pw == 0.0 {
            continue;
        }
        let frac = w.iter().filter(|row| row[y] > 0.0).count() as f64 / q as f64;
        total += pw * frac.powf(rho);
    }
    -total.ln()
}

pub fn r_max_direct(w: &[Vec<f64>]) -> f64 {
    let q = w.len();
    let mut total = 0.0;
    for y in 0..w[0].len() {
        let pw: f64 = w.iter().map(|row| row[y]).sum::<f64>() / q as f64;
        let frac = w.iter().filter(|row| row[y] > 0.0).count() as f64 / q as f64;
        if pw > 0.0 {
            total -= pw * frac.ln();
        }
    }
    total
}

/// Values of `e0` on the grid `rho_i = i * rho_hi / (points - 1)`.
pub fn e0_grid(w: &[Vec<f64>], rho_hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let rhos: Vec<f64> = (0..points).map(|i| rho_hi * i as f64 / (points - 1) as f64).collect();
    let vals = rhos.iter().map(|&r| e0_direct(w, r)).collect();
    (rhos, vals)
}

/// `max(0, max_i e0(rho_i) - rho_i R)` over a precomputed grid.
pub fn grid_exponent(rhos: &[f64], e0: &[f64], rate: f64) -> f64 {
    rhos.iter()
        .zip(e0)
        .map(|(r, e)| e - r * rate)
        .fold(0.0, f64::max)
}

/// All codewords of the code with generator `g` (row-major `k x l`), message
/// `m` having little-endian base-`q` digits, built by explicit linear
/// combination.
pub fn brute_codewords(q: usize, k: usize, l: usize, g: &[usize]) -> Vec<Vec<usize>> {
    let t = q.pow(k as u32);
    (0..t)
        .map(|m| {
            let mut word = vec![0; l];
            let mut rest = m;
            for i in 0..k {
                let u = rest % q;
                rest /= q;
                for (j, w) in word.iter_mut().enumerate() {
                    *w = (*w + u * g[i * l + j]) % q;
                }
            }
            word
        })
        .collect()
}

/// Every sequence in `{0..outputs}^l`, in lexicographic order.
pub fn all_sequences(outputs: usize, l: usize) -> Vec<Vec<usize>> {
    let total = outputs.pow(l as u32);
    (0..total)
        .map(|mut i| {
            let mut s = vec![0; l];
            for v in s.iter_mut() {
                *v = i % outputs;
                i /= outputs;
            }
            s
        })
        .collect()
}

/// Feasible messages for a received sequence, without early exit.
pub fn feasible(codewords: &[Vec<usize>], w: &[Vec<f64>], y: &[usize]) -> Vec<usize> {
    codewords
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().zip(y).all(|(&x, &yy)| w[x][yy] > 0.0))
        .map(|(m, _)| m)
        .collect()
}

/// Exact conditional erasure probability by visiting every output sequence.
pub fn erasure_prob_oracle(codewords: &[Vec<usize>], w: &[Vec<f64>], m: usize) -> f64 {
    let l = codewords[0].len();
    let mut total = 0.0;
    for y in all_sequences(w[0].len(), l) {
        let like: f64 = codewords[m].iter().zip(&y).map(|(&x, &yy)| w[x][yy]).product();
        if like == 0.0 {
            continue;
        }
        let f = feasible(codewords, w, &y);
        assert!(f.contains(&m), "transmitted codeword infeasible on its own output");
        if f.len() != 1 {
            total += like;
        }
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Ensemble-average erasure probability of uniformly random `K x L`
/// generators over GF(q) on the q-ary erasure channel. With `n` unerased
/// positions, decoding erases exactly when the `K x n` submatrix has rank
/// below `K`, and a uniform `K x n` matrix has full row rank with probability
/// `prod_{i<K} (1 - q^(i - n))`.
pub fn bec_ensemble_erasure(q: usize, k: usize, l: usize, p: f64) -> f64 {
    (0..=l)
        .map(|n| {
            let b = binomial(l, n) * (1.0 - p).powi(n as i32) * p.powi((l - n) as i32);
            let full = if n < k {
                0.0
            } else {
                (0..k).map(|i| 1.0 - (q as f64).powi(i as i32 - n as i32)).product()
            };
            b * (1.0 - full)
        })
        .sum()
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn kl_direct(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(qi, _)| **qi > 0.0)
        .map(|(qi, pi)| if *pi == 0.0 { f64::INFINITY } else { qi * (qi / pi).ln() })
        .sum()
}

pub fn binary_entropy_direct(t: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(t) + h(1.0 - t)
}
