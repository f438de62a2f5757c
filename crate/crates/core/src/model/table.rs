use super::ModelError;

/// A binary spin, `-1` or `+1`.
pub type Spin = i8;

/// Non-negative table over `arity` binary variables.
///
/// Entries are indexed lexicographically over assignments with `-1` before
/// `+1` and the first variable most significant, i.e. variable `j` of an
/// arity-`k` table sits at bit `k - 1 - j` and `+1` sets the bit.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    arity: usize,
    values: Vec<f64>,
}

impl FactorTable {
    pub fn new(arity: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        let expected = 1usize << arity;
        if values.len() != expected {
            return Err(ModelError::TableSize {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ModelError::InvalidEntry(bad));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(ModelError::AllZeroTable);
        }
        Ok(FactorTable { arity, values })
    }

    /// Infers the arity from the number of entries.
    pub fn from_values(values: Vec<f64>) -> Result<Self, ModelError> {
        let n = values.len();
        if !n.is_power_of_two() {
            return Err(ModelError::TableSize {
                expected: n.next_power_of_two(),
                found: n,
            });
        }
        Self::new(n.trailing_zeros() as usize, values)
    }

    pub fn uniform(arity: usize) -> Self {
        FactorTable {
            arity,
            values: vec![1.0; 1 << arity],
        }
    }

    /// Characteristic function of "all variables equal".
    pub fn equality(arity: usize) -> Self {
        Self::weighted_equality(arity, 1.0, 1.0)
    }

    pub fn weighted_equality(arity: usize, minus: f64, plus: f64) -> Self {
        let mut values = vec![0.0; 1 << arity];
        values[0] = minus;
        values[(1 << arity) - 1] = plus;
        FactorTable { arity, values }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn value(&self, spins: &[Spin]) -> f64 {
        self.values[encode(spins)]
    }

    /// True if all mass sits on the all-`-1` and all-`+1` assignments.
    pub fn is_diagonal(&self) -> bool {
        let last = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .all(|(i, &v)| i == 0 || i == last || v == 0.0)
    }

    /// Multiplies `leaf` into variable `pos` and sums that variable out.
    pub(crate) fn absorb(&self, pos: usize, leaf: [f64; 2]) -> Vec<f64> {
        let k = self.arity;
        let shift = k - 1 - pos;
        let mut out = vec![0.0; 1 << (k - 1)];
        for (i, &v) in self.values.iter().enumerate() {
            let bit = (i >> shift) & 1;
            let high = (i >> (shift + 1)) << shift;
            let low = i & ((1 << shift) - 1);
            out[high | low] += v * leaf[bit];
        }
        out
    }

    /// Reorders variables: new variable `j` is old variable `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> FactorTable {
        let k = self.arity;
        debug_assert_eq!(order.len(), k);
        let mut values = vec![0.0; self.values.len()];
        for (new_index, slot) in values.iter_mut().enumerate() {
            let mut old_index = 0;
            for (j, &old_pos) in order.iter().enumerate() {
                let bit = (new_index >> (k - 1 - j)) & 1;
                old_index |= bit << (k - 1 - old_pos);
            }
            *slot = self.values[old_index];
        }
        FactorTable { arity: k, values }
    }

    pub(crate) fn scaled(&self, factor: f64) -> FactorTable {
        FactorTable {
            arity: self.arity,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Spin of variable `pos` in assignment `index` of an arity-`arity` table.
#[inline]
pub fn spin_at(index: usize, arity: usize, pos: usize) -> Spin {
    if (index >> (arity - 1 - pos)) & 1 == 1 {
        1
    } else {
        -1
    }
}

pub fn encode(spins: &[Spin]) -> usize {
    spins
        .iter()
        .fold(0, |acc, &s| (acc << 1) | usize::from(s > 0))
}

pub fn decode(index: usize, arity: usize) -> Vec<Spin> {
    (0..arity).map(|pos| spin_at(index, arity, pos)).collect()
}
