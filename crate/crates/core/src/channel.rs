//! Discrete memoryless sequencing channels over the input alphabet Z_q.
//!
//! A [`Channel`] stores its transition matrix together with a support mask
//! that is fixed when the matrix is configured: an entry is in the support
//! exactly when its configured value is non-zero. Zero-undetected-error
//! decoding depends only on that mask, so it is never re-derived from
//! computed probabilities.

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Largest output alphabet for which [`Channel::find_symmetry_witness`]
/// will run its backtracking search.
pub const WITNESS_SEARCH_MAX_OUTPUTS: usize = 12;

/// Tolerance on row sums of a configured transition matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Shift function `T(y, x)` certifying channel symmetry.
///
/// For every input shift `x` the map `y -> T(y, x)` must be a bijection on the
/// output alphabet, and `W(y | x1) = W(T(y, x2 - x1) | x2)` for all inputs
/// `x1, x2` and outputs `y` (subtraction mod q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryWitness {
    q: usize,
    outputs: usize,
    // table[y * q + x] = T(y, x)
    table: Vec<usize>,
}

impl SymmetryWitness {
    /// Build a witness from `rows[y][x] = T(y, x)`.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let outputs = rows.len();
        if outputs == 0 {
            return domain("witness table has no rows");
        }
        let q = rows[0].len();
        if q == 0 {
            return domain("witness table has no columns");
        }
        let mut table = Vec::with_capacity(outputs * q);
        for (y, row) in rows.iter().enumerate() {
            if row.len() != q {
                return domain(format!("witness row {y} has {} entries, expected {q}", row.len()));
            }
            for &t in row {
                if t >= outputs {
                    return domain(format!("witness entry {t} in row {y} is not an output index"));
                }
            }
            table.extend_from_slice(row);
        }
        Ok(SymmetryWitness { q, outputs, table })
    }

    /// `T(y, x) = (y + x) mod q` on a square alphabet.
    pub fn cyclic(q: usize) -> Self {
        Self::from_fn(q, q, |y, x| (y + x) % q)
    }

    fn from_fn(q: usize, outputs: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut table = Vec::with_capacity(q * outputs);
        for y in 0..outputs {
            for x in 0..q {
                table.push(f(y, x));
            }
        }
        SymmetryWitness { q, outputs, table }
    }

    pub fn input_size(&self) -> usize {
        self.q
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn apply(&self, y: usize, x: usize) -> usize {
        self.table[y * self.q + x]
    }

    /// The table as `rows[y][x]`, the same layout accepted by [`Self::from_rows`].
    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.q).map(|c| c.to_vec()).collect()
    }

    /// Replace one entry; used to build deliberately broken fixtures.
    pub fn with_entry(mut self, y: usize, x: usize, value: usize) -> Result<Self> {
        if y >= self.outputs || x >= self.q || value >= self.outputs {
            return domain("witness entry out of range");
        }
        self.table[y * self.q + x] = value;
        Ok(self)
    }
}

/// A finite-alphabet memoryless channel `W(y|x)` with inputs `0..q`.
#[derive(Debug, Clone)]
pub struct Channel {
    name: String,
    q: usize,
    outputs: usize,
    matrix: Vec<f64>,
    support: Vec<bool>,
    cumulative: Vec<f64>,
    witness: Option<SymmetryWitness>,
}

impl Channel {
    /// Build a channel from row-stochastic `rows[x][y] = W(y|x)`.
    pub fn new(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.len();
        if q < 2 {
            return domain(format!("input alphabet must have at least 2 symbols, got {q}"));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return domain("output alphabet is empty");
        }
        let mut matrix = Vec::with_capacity(q * outputs);
        let mut support = Vec::with_capacity(q * outputs);
        let mut cumulative = Vec::with_capacity(q * outputs);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return domain(format!("row {x} has {} entries, expected {outputs}", row.len()));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return domain(format!("row {x} has invalid probability {v}"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return domain(format!("row {x} sums to {sum}, not 1"));
            }
            let last_support = row.iter().rposition(|&v| v > 0.0).expect("row sums to 1");
            let mut acc = 0.0;
            for (y, &v) in row.iter().enumerate() {
                matrix.push(v);
                support.push(v > 0.0);
                acc += v;
                // The final supported entry absorbs rounding so that a
                // uniform draw in [0, 1) can never land past the support.
                cumulative.push(if y >= last_support { f64::INFINITY } else { acc });
            }
        }
        Ok(Channel {
            name: name.into(),
            q,
            outputs,
            matrix,
            support,
            cumulative,
            witness: None,
        })
    }

    /// Attach a symmetry witness. Only its dimensions are checked here; see
    /// [`Self::verify_symmetry`] and [`Self::symmetry_witness`].
    pub fn with_witness(mut self, witness: SymmetryWitness) -> Result<Self> {
        self.check_witness_dims(&witness)?;
        self.witness = Some(witness);
        Ok(self)
    }

    /// q-ary erasure channel; output `q` is the erasure symbol.
    pub fn erasure(q: usize, p: f64) -> Result<Self> {
        check_unit("erasure probability", p)?;
        if q < 2 {
            return domain("erasure channel needs q >= 2");
        }
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|x| {
                let mut row = vec![0.0; q + 1];
                row[x] = 1.0 - p;
                row[q] = p;
                row
            })
            .collect();
        let witness = SymmetryWitness::from_fn(q, q + 1, |y, x| if y == q { q } else { (y + x) % q });
        Channel::new(format!("erasure(q={q},p={p})"), &rows)?.with_witness(witness)
    }

    /// Ternary typewriter channel: `x -> x` w.p. `1 - eps`, `x -> x + 1 mod 3` w.p. `eps`.
    pub fn typewriter(eps: f64) -> Result<Self> {
        check_unit("typewriter crossover", eps)?;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|x| {
                let mut row = vec![0.0; 3];
                row[x] = 1.0 - eps;
                row[(x + 1) % 3] = eps;
                row
            })
            .collect();
        Channel::new(format!("typewriter(eps={eps})"), &rows)?.with_witness(SymmetryWitness::cyclic(3))
    }

    /// Noiseless channel on q symbols.
    pub fn identity(q: usize) -> Result<Self> {
        if q < 2 {
            return domain("identity channel needs q >= 2");
        }
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|x| (0..q).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Channel::new(format!("identity(q={q})"), &rows)?.with_witness(SymmetryWitness::cyclic(q))
    }

    /// q-ary symmetric channel with total crossover probability `delta`
    /// spread evenly over the other `q - 1` symbols. Full support for
    /// `0 < delta < 1`, which makes every read an erasure.
    pub fn qary_symmetric(q: usize, delta: f64) -> Result<Self> {
        check_unit("crossover probability", delta)?;
        if q < 2 {
            return domain("q-ary symmetric channel needs q >= 2");
        }
        let off = delta / (q - 1) as f64;
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|x| (0..q).map(|y| if x == y { 1.0 - delta } else { off }).collect())
            .collect();
        Channel::new(format!("qary_symmetric(q={q},delta={delta})"), &rows)?
            .with_witness(SymmetryWitness::cyclic(q))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Input alphabet size q.
    pub fn input_size(&self) -> usize {
        self.q
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    pub fn witness(&self) -> Option<&SymmetryWitness> {
        self.witness.as_ref()
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.outputs + y]
    }

    /// Whether `W(y|x)` was configured non-zero.
    #[inline]
    pub fn in_support(&self, x: usize, y: usize) -> bool {
        self.support[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.outputs..(x + 1) * self.outputs]
    }

    /// `X(y)`: inputs that reach `y` with positive probability.
    pub fn support_set(&self, y: usize) -> Result<Vec<usize>> {
        if y >= self.outputs {
            return domain(format!("output {y} outside alphabet of size {}", self.outputs));
        }
        Ok((0..self.q).filter(|&x| self.in_support(x, y)).collect())
    }

    /// Whether every entry of the matrix is in the support.
    pub fn is_full_support(&self) -> bool {
        self.support.iter().all(|&s| s)
    }

    /// Draw one output symbol for input `x`.
    #[inline]
    pub fn sample_output<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let cum = &self.cumulative[x * self.outputs..(x + 1) * self.outputs];
        cum.iter().position(|&c| u < c).expect("last supported entry is +inf")
    }

    /// Pass a whole molecule through the channel, one independent draw per symbol.
    pub fn sequence_molecule<R: Rng + ?Sized>(&self, x: &[usize], rng: &mut R) -> Result<Vec<usize>> {
        if let Some(&bad) = x.iter().find(|&&s| s >= self.q) {
            return domain(format!("input symbol {bad} outside Z_{}", self.q));
        }
        let mut out = vec![0; x.len()];
        self.sequence_into(x, &mut out, rng);
        Ok(out)
    }

    /// Unchecked variant of [`Self::sequence_molecule`] writing into `out`.
    pub(crate) fn sequence_into<R: Rng + ?Sized>(&self, x: &[usize], out: &mut [usize], rng: &mut R) {
        for (o, &s) in out.iter_mut().zip(x) {
            *o = self.sample_output(s, rng);
        }
    }

    /// `W^(L)(y|x) = prod_i W(y_i|x_i)`.
    pub fn block_likelihood(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&a, &b)| self.prob(a, b)).product()
    }

    fn check_witness_dims(&self, w: &SymmetryWitness) -> Result<()> {
        if w.q != self.q || w.outputs != self.outputs {
            return domain(format!(
                "witness is {}x{} (outputs x inputs) but channel is {}x{}",
                w.outputs, w.q, self.outputs, self.q
            ));
        }
        Ok(())
    }

    /// Exhaustively check both symmetry properties for `witness`.
    pub fn verify_symmetry(&self, witness: &SymmetryWitness) -> Result<bool> {
        self.check_witness_dims(witness)?;
        let (q, ny) = (self.q, self.outputs);
        let mut seen = vec![false; ny];
        for x in 0..q {
            seen.iter_mut().for_each(|s| *s = false);
            for y in 0..ny {
                let t = witness.apply(y, x);
                if seen[t] {
                    return Ok(false);
                }
                seen[t] = true;
            }
        }
        for x1 in 0..q {
            for x2 in 0..q {
                let shift = (x2 + q - x1) % q;
                for y in 0..ny {
                    if self.prob(x1, y) != self.prob(x2, witness.apply(y, shift)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Search for a symmetry witness with `T(., 0)` fixed to the identity.
    ///
    /// Property 2 only couples `T(., d)` with itself for each shift `d`, so
    /// every shift is solved by an independent backtracking search for a
    /// bijection `pi` with `W(y|x) = W(pi(y)|x + d)` for all `x`.
    pub fn find_symmetry_witness(&self) -> Result<Option<SymmetryWitness>> {
        if self.outputs > WITNESS_SEARCH_MAX_OUTPUTS {
            return Err(Error::Capability(format!(
                "witness search supports at most {WITNESS_SEARCH_MAX_OUTPUTS} outputs (channel has {}); supply a witness in the configuration",
                self.outputs
            )));
        }
        let (q, ny) = (self.q, self.outputs);
        let mut table = vec![0usize; ny * q];
        for y in 0..ny {
            table[y * q] = y;
        }
        for d in 1..q {
            // compat[y][y'] iff column y under input x equals column y' under x + d
            let compat: Vec<Vec<bool>> = (0..ny)
                .map(|y| {
                    (0..ny)
                        .map(|yp| (0..q).all(|x| self.prob(x, y) == self.prob((x + d) % q, yp)))
                        .collect()
                })
                .collect();
            let mut perm = vec![usize::MAX; ny];
            let mut used = vec![false; ny];
            if !assign(0, &compat, &mut perm, &mut used) {
                return Ok(None);
            }
            for y in 0..ny {
                table[y * q + d] = perm[y];
            }
        }
        let w = SymmetryWitness { q, outputs: ny, table };
        debug_assert!(self.verify_symmetry(&w).unwrap_or(false));
        Ok(Some(w))
    }

    /// A verified witness for this channel: the attached one if present
    /// (which must pass verification), otherwise one found by search.
    pub fn symmetry_witness(&self) -> Result<SymmetryWitness> {
        match &self.witness {
            Some(w) => {
                if self.verify_symmetry(w)? {
                    Ok(w.clone())
                } else {
                    Err(Error::NotSymmetric(format!(
                        "the witness supplied for {} fails verification",
                        self.name
                    )))
                }
            }
            None => self.find_symmetry_witness()?.ok_or_else(|| {
                Error::NotSymmetric(format!("no symmetry witness exists for {}", self.name))
            }),
        }
    }
}

fn assign(y: usize, compat: &[Vec<bool>], perm: &mut [usize], used: &mut [bool]) -> bool {
    if y == perm.len() {
        return true;
    }
    for yp in 0..perm.len() {
        if !used[yp] && compat[y][yp] {
            used[yp] = true;
            perm[y] = yp;
            if assign(y + 1, compat, perm, used) {
                return true;
            }
            used[yp] = false;
        }
    }
    false
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("{what} must lie in [0, 1], got {v}"));
    }
    Ok(())
}
