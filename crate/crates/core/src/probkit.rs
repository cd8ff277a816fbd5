//! Dense discrete probability tables and the information functionals over them.
//!
//! A [`JointPmf`] is a row-major table over a product of finite alphabets, one
//! axis per named [`Variable`]. A [`Channel`] is a conditional table whose rows
//! are indexed by input configurations and whose columns are output
//! configurations. Entropies are in bits, with `0 log 0 = 0`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{plogp, Scalar};

/// Largest table (number of entries) any constructor will build.
pub const DEFAULT_TABLE_CAP: usize = 1 << 24;

/// A finite symbol set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::BadLabels(labels.join(",")));
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

/// A named random variable with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Variable {
    /// Unlabeled variable over `{0, .., size-1}`.
    ///
    /// # Panics
    /// If `size` is zero.
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            alphabet: Alphabet::new(size).expect("alphabet size must be positive"),
        }
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }
}

// ---------------------------------------------------------------------------
// mixed-radix helpers
// ---------------------------------------------------------------------------

/// Number of entries of a row-major table over `sizes`, or `None` on overflow.
pub fn table_len(sizes: &[usize]) -> Option<usize> {
    sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s))
}

/// Writes the row-major digits of `index` into `digits`.
#[inline]
pub fn decode_index(mut index: usize, sizes: &[usize], digits: &mut [usize]) {
    for pos in (0..sizes.len()).rev() {
        digits[pos] = index % sizes[pos];
        index /= sizes[pos];
    }
}

/// Row-major flat index of `digits`.
#[inline]
pub fn encode_index(digits: &[usize], sizes: &[usize]) -> usize {
    digits.iter().zip(sizes).fold(0usize, |acc, (&d, &s)| acc * s + d)
}

/// Compensated summation; tables can have millions of tiny entries.
pub fn stable_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}

fn check_entries<T: Scalar>(table: &[T]) -> Result<()> {
    for (index, &value) in table.iter().enumerate() {
        if !(value >= T::zero()) || !value.is_finite() {
            return Err(Error::InvalidEntry {
                index,
                value: value.as_f64(),
            });
        }
    }
    Ok(())
}

fn check_distinct_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::DuplicateVariable(n.to_string()));
        }
    }
    Ok(())
}

fn sizes_of(vars: &[Variable]) -> Vec<usize> {
    vars.iter().map(Variable::size).collect()
}

fn capped_len(sizes: &[usize], cap: usize) -> Result<usize> {
    match table_len(sizes) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::TableCapExceeded { size: n, cap }),
        None => Err(Error::TableCapExceeded { size: usize::MAX, cap }),
    }
}

// ---------------------------------------------------------------------------
// JointPmf
// ---------------------------------------------------------------------------

/// Joint probability mass function over named discrete variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct JointPmf<T> {
    vars: Vec<Variable>,
    table: Vec<T>,
}

impl<T: Scalar> JointPmf<T> {
    /// Validated constructor: distinct names, matching length, nonnegative
    /// entries summing to one.
    pub fn new(vars: Vec<Variable>, table: Vec<T>) -> Result<Self> {
        check_distinct_names(vars.iter().map(|v| v.name.as_str()))?;
        let expected = capped_len(&sizes_of(&vars), DEFAULT_TABLE_CAP)?;
        if table.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: table.len(),
            });
        }
        check_entries(&table)?;
        let sum = stable_sum(table.iter().copied());
        if (sum - T::one()).abs() > T::norm_tol() {
            return Err(Error::NotNormalized { sum: sum.as_f64() });
        }
        Ok(Self { vars, table })
    }

    /// Builds the table from an unnormalized weight function and rescales it.
    pub fn from_weights(vars: Vec<Variable>, weight: impl Fn(&[usize]) -> T) -> Result<Self> {
        let sizes = sizes_of(&vars);
        let len = capped_len(&sizes, DEFAULT_TABLE_CAP)?;
        let mut digits = vec![0; sizes.len()];
        let mut table = Vec::with_capacity(len);
        for i in 0..len {
            decode_index(i, &sizes, &mut digits);
            table.push(weight(&digits));
        }
        check_entries(&table)?;
        let total = stable_sum(table.iter().copied());
        if !(total > T::zero()) {
            return Err(Error::NotNormalized { sum: total.as_f64() });
        }
        for p in &mut table {
            *p = *p / total;
        }
        Self::new(vars, table)
    }

    pub fn uniform(vars: Vec<Variable>) -> Result<Self> {
        Self::from_weights(vars, |_| T::one())
    }

    /// All mass on one configuration.
    pub fn point_mass(vars: Vec<Variable>, at: &[usize]) -> Result<Self> {
        if at.len() != vars.len() || at.iter().zip(&vars).any(|(&d, v)| d >= v.size()) {
            return Err(Error::DimensionMismatch(format!(
                "point {at:?} outside the product alphabet"
            )));
        }
        Self::from_weights(vars, |d| if d == at { T::one() } else { T::zero() })
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn sizes(&self) -> Vec<usize> {
        sizes_of(&self.vars)
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Resolves names to sorted, deduplicated axis indices.
    pub fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx = names.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// Probability of one configuration.
    pub fn prob(&self, digits: &[usize]) -> T {
        self.table[encode_index(digits, &self.sizes())]
    }

    /// Marginal table over the given axes (sorted ascending).
    pub fn marginal_table(&self, keep: &[usize]) -> Vec<T> {
        let sizes = self.sizes();
        if keep.len() == sizes.len() {
            return self.table.clone();
        }
        let keep_sizes: Vec<usize> = keep.iter().map(|&k| sizes[k]).collect();
        let out_len = table_len(&keep_sizes).unwrap_or(1);
        // stride of each original axis inside the marginal table (0 if summed out)
        let mut out_stride = vec![0usize; sizes.len()];
        let mut s = 1;
        for (pos, &axis) in keep.iter().enumerate().rev() {
            out_stride[axis] = s;
            s *= keep_sizes[pos];
        }
        let mut out = vec![T::zero(); out_len];
        let mut digits = vec![0usize; sizes.len()];
        let mut target = 0usize;
        for &p in &self.table {
            out[target] = out[target] + p;
            // odometer increment, updating the marginal index incrementally
            for axis in (0..sizes.len()).rev() {
                digits[axis] += 1;
                target += out_stride[axis];
                if digits[axis] < sizes[axis] {
                    break;
                }
                target -= out_stride[axis] * digits[axis];
                digits[axis] = 0;
            }
        }
        out
    }

    /// Keeps the named variables (original order) and sums out the rest.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let idx = self.indices(keep)?;
        let vars = idx.iter().map(|&i| self.vars[i].clone()).collect();
        Ok(Self {
            vars,
            table: self.marginal_table(&idx),
        })
    }

    /// Entropy in bits of the variables at the given axes.
    pub fn entropy_of(&self, axes: &[usize]) -> T {
        if axes.is_empty() {
            return T::zero();
        }
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        stable_sum(self.marginal_table(&sorted).into_iter().map(plogp))
    }

    /// Entropy in bits of the named variables; the empty set has entropy 0.
    pub fn entropy(&self, vars: &[&str]) -> Result<T> {
        let idx = self.indices(vars)?;
        Ok(self.entropy_of(&idx))
    }

    /// `I(A;B|C)` over axis indices. Sets must be disjoint; not checked here.
    pub fn cmi_of(&self, a: &[usize], b: &[usize], c: &[usize]) -> T {
        let union = |sets: &[&[usize]]| -> Vec<usize> {
            let mut v: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let value = self.entropy_of(&union(&[a, c])) + self.entropy_of(&union(&[b, c]))
            - self.entropy_of(&union(&[a, b, c]))
            - self.entropy_of(c);
        clamp_info(value)
    }

    /// Conditional mutual information `I(A;B|C)` in bits.
    pub fn cmi(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<T> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let (ia, ib, ic) = (self.indices(a)?, self.indices(b)?, self.indices(c)?);
        for (x, y) in [(&ia, &ib), (&ia, &ic), (&ib, &ic)] {
            if let Some(&dup) = x.iter().find(|i| y.contains(i)) {
                return Err(Error::OverlappingSets(self.vars[dup].name.clone()));
            }
        }
        Ok(self.cmi_of(&ia, &ib, &ic))
    }

    /// Independent product; variables of `self` come first.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.product_capped(other, DEFAULT_TABLE_CAP)
    }

    fn product_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let vars: Vec<Variable> = self.vars.iter().chain(&other.vars).cloned().collect();
        check_distinct_names(vars.iter().map(|v| v.name.as_str()))?;
        let len = match self.table.len().checked_mul(other.table.len()) {
            Some(n) if n <= cap => n,
            Some(n) => return Err(Error::TableCapExceeded { size: n, cap }),
            None => return Err(Error::TableCapExceeded { size: usize::MAX, cap }),
        };
        let mut table = Vec::with_capacity(len);
        for &p in &self.table {
            table.extend(other.table.iter().map(|&q| p * q));
        }
        Ok(Self { vars, table })
    }

    /// Renames variables; names absent from `map` are kept.
    pub fn renamed(&self, map: impl Fn(&str) -> String) -> Result<Self> {
        let vars: Vec<Variable> = self
            .vars
            .iter()
            .map(|v| Variable {
                name: map(&v.name),
                alphabet: v.alphabet.clone(),
            })
            .collect();
        check_distinct_names(vars.iter().map(|v| v.name.as_str()))?;
        Ok(Self {
            vars,
            table: self.table.clone(),
        })
    }

    /// Product of `n` independent copies. Copy `s` (1-based) renames every
    /// variable `V` to `V_s`; `n = 1` returns the table unchanged.
    pub fn iid_extension(&self, n: usize) -> Result<Self> {
        self.iid_extension_capped(n, DEFAULT_TABLE_CAP)
    }

    pub fn iid_extension_capped(&self, n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("iid extension needs n >= 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let stage = |s: usize| self.renamed(|name| format!("{name}_{s}"));
        let mut acc = stage(1)?;
        for s in 2..=n {
            acc = acc.product_capped(&stage(s)?, cap)?;
        }
        Ok(acc)
    }

    /// Reorders the axes so that variables appear in the order of `names`
    /// (which must list every variable exactly once).
    pub fn permuted(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation lists {} variables, table has {}",
                names.len(),
                self.vars.len()
            )));
        }
        let order = names.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>>>()?;
        check_distinct_names(names.iter().copied())?;
        let old_sizes = self.sizes();
        let vars: Vec<Variable> = order.iter().map(|&i| self.vars[i].clone()).collect();
        let new_sizes = sizes_of(&vars);
        let mut new_digits = vec![0; vars.len()];
        let mut old_digits = vec![0; vars.len()];
        let mut table = vec![T::zero(); self.table.len()];
        for (i, slot) in table.iter_mut().enumerate() {
            decode_index(i, &new_sizes, &mut new_digits);
            for (pos, &axis) in order.iter().enumerate() {
                old_digits[axis] = new_digits[pos];
            }
            *slot = self.table[encode_index(&old_digits, &old_sizes)];
        }
        Ok(Self { vars, table })
    }
}

/// Rounds tiny negative information values (float drift) up to zero.
#[inline]
pub fn clamp_info<T: Scalar>(value: T) -> T {
    if value < T::zero() && value >= -T::clamp_tol() {
        T::zero()
    } else {
        value
    }
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// Conditional probability table `p(outputs | inputs)`.
///
/// Row `i` (input configuration, row-major over `inputs`) holds the output
/// distribution, row-major over `outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Channel<T> {
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
    table: Vec<T>,
}

impl<T: Scalar> Channel<T> {
    pub fn new(inputs: Vec<Variable>, outputs: Vec<Variable>, table: Vec<T>) -> Result<Self> {
        check_distinct_names(inputs.iter().chain(&outputs).map(|v| v.name.as_str()))?;
        let in_len = capped_len(&sizes_of(&inputs), DEFAULT_TABLE_CAP)?;
        let out_len = capped_len(&sizes_of(&outputs), DEFAULT_TABLE_CAP)?;
        let expected =
            in_len
                .checked_mul(out_len)
                .filter(|&n| n <= DEFAULT_TABLE_CAP)
                .ok_or(Error::TableCapExceeded {
                    size: in_len.saturating_mul(out_len),
                    cap: DEFAULT_TABLE_CAP,
                })?;
        if table.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: table.len(),
            });
        }
        check_entries(&table)?;
        for (row, slice) in table.chunks(out_len).enumerate() {
            let sum = stable_sum(slice.iter().copied());
            if (sum - T::one()).abs() > T::norm_tol() {
                return Err(Error::RowNotNormalized { row, sum: sum.as_f64() });
            }
        }
        Ok(Self { inputs, outputs, table })
    }

    /// Builds each row from an unnormalized weight function and normalizes it.
    pub fn from_weights(
        inputs: Vec<Variable>,
        outputs: Vec<Variable>,
        weight: impl Fn(&[usize], &[usize]) -> T,
    ) -> Result<Self> {
        let in_sizes = sizes_of(&inputs);
        let out_sizes = sizes_of(&outputs);
        let in_len = capped_len(&in_sizes, DEFAULT_TABLE_CAP)?;
        let out_len = capped_len(&out_sizes, DEFAULT_TABLE_CAP)?;
        let mut xd = vec![0; in_sizes.len()];
        let mut yd = vec![0; out_sizes.len()];
        let mut table = Vec::with_capacity(in_len * out_len);
        for i in 0..in_len {
            decode_index(i, &in_sizes, &mut xd);
            let start = table.len();
            for o in 0..out_len {
                decode_index(o, &out_sizes, &mut yd);
                table.push(weight(&xd, &yd));
            }
            check_entries(&table[start..])?;
            let total = stable_sum(table[start..].iter().copied());
            if !(total > T::zero()) {
                return Err(Error::RowNotNormalized {
                    row: i,
                    sum: total.as_f64(),
                });
            }
            for p in &mut table[start..] {
                *p = *p / total;
            }
        }
        Self::new(inputs, outputs, table)
    }

    /// Deterministic channel: all mass on `map(input digits)`.
    pub fn deterministic(
        inputs: Vec<Variable>,
        outputs: Vec<Variable>,
        map: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        Self::from_weights(inputs, outputs, |x, y| if map(x) == y { T::one() } else { T::zero() })
    }

    /// `Y_i = X_i` for every input variable; outputs take the given names.
    pub fn identity(inputs: Vec<Variable>, output_names: &[&str]) -> Result<Self> {
        if output_names.len() != inputs.len() {
            return Err(Error::DimensionMismatch(
                "identity channel needs one output per input".into(),
            ));
        }
        let outputs = inputs
            .iter()
            .zip(output_names)
            .map(|(v, n)| Variable {
                name: n.to_string(),
                alphabet: v.alphabet.clone(),
            })
            .collect();
        Self::deterministic(inputs, outputs, |x| x.to_vec())
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Variable] {
        &self.outputs
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn input_len(&self) -> usize {
        self.table.len() / self.output_len()
    }

    pub fn output_len(&self) -> usize {
        table_len(&sizes_of(&self.outputs)).unwrap_or(1)
    }

    pub fn row(&self, input_index: usize) -> &[T] {
        let n = self.output_len();
        &self.table[input_index * n..(input_index + 1) * n]
    }

    /// Joint over `input`'s variables followed by this channel's outputs,
    /// `p(in, out) = p(in) ch(out | in restricted to the channel inputs)`.
    pub fn compose(&self, input: &JointPmf<T>) -> Result<JointPmf<T>> {
        let mut axes = Vec::with_capacity(self.inputs.len());
        for v in &self.inputs {
            let i = input.index_of(&v.name)?;
            if input.vars[i].size() != v.size() {
                return Err(Error::DimensionMismatch(format!(
                    "variable `{}` has {} symbols in the input but {} in the channel",
                    v.name,
                    input.vars[i].size(),
                    v.size()
                )));
            }
            axes.push(i);
        }
        for v in &self.outputs {
            if input.index_of(&v.name).is_ok() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let in_sizes = input.sizes();
        let ch_sizes = sizes_of(&self.inputs);
        let out_len = self.output_len();
        let len = input
            .table
            .len()
            .checked_mul(out_len)
            .filter(|&n| n <= DEFAULT_TABLE_CAP)
            .ok_or(Error::TableCapExceeded {
                size: input.table.len().saturating_mul(out_len),
                cap: DEFAULT_TABLE_CAP,
            })?;
        let mut digits = vec![0; in_sizes.len()];
        let mut ch_digits = vec![0; axes.len()];
        let mut table = Vec::with_capacity(len);
        for (i, &p) in input.table.iter().enumerate() {
            decode_index(i, &in_sizes, &mut digits);
            for (pos, &a) in axes.iter().enumerate() {
                ch_digits[pos] = digits[a];
            }
            let row = self.row(encode_index(&ch_digits, &ch_sizes));
            table.extend(row.iter().map(|&q| p * q));
        }
        let vars = input.vars.iter().chain(&self.outputs).cloned().collect();
        Ok(JointPmf { vars, table })
    }

    /// Cascade `p(z|x) = sum_y self(y|x) next(z|y)`; `next` must read exactly
    /// this channel's outputs, in order.
    pub fn then(&self, next: &Channel<T>) -> Result<Channel<T>> {
        if next.inputs != self.outputs {
            return Err(Error::DimensionMismatch(
                "cascaded channel must take the previous outputs as inputs".into(),
            ));
        }
        let mid = self.output_len();
        let out = next.output_len();
        let mut table = vec![T::zero(); self.input_len() * out];
        for x in 0..self.input_len() {
            let row = self.row(x);
            let dst = &mut table[x * out..(x + 1) * out];
            for (y, &p) in row.iter().enumerate().take(mid) {
                if p == T::zero() {
                    continue;
                }
                for (slot, &q) in dst.iter_mut().zip(next.row(y)) {
                    *slot = *slot + p * q;
                }
            }
        }
        Channel::new(self.inputs.clone(), next.outputs.clone(), table)
    }

    /// Channels acting independently side by side.
    pub fn parallel(parts: &[Channel<T>]) -> Result<Channel<T>> {
        let inputs: Vec<Variable> = parts.iter().flat_map(|c| c.inputs.clone()).collect();
        let outputs: Vec<Variable> = parts.iter().flat_map(|c| c.outputs.clone()).collect();
        let in_sizes: Vec<usize> = parts.iter().map(|c| c.input_len()).collect();
        let out_sizes: Vec<usize> = parts.iter().map(|c| c.output_len()).collect();
        Channel::from_weights(inputs, outputs, |x, y| {
            // regroup digits per part
            let mut xi = 0;
            let mut yi = 0;
            let mut w = T::one();
            for (k, part) in parts.iter().enumerate() {
                let nx = part.inputs.len();
                let ny = part.outputs.len();
                let xs = encode_index(&x[xi..xi + nx], &sizes_of(&part.inputs));
                let ys = encode_index(&y[yi..yi + ny], &sizes_of(&part.outputs));
                debug_assert!(xs < in_sizes[k] && ys < out_sizes[k]);
                w = w * part.row(xs)[ys];
                xi += nx;
                yi += ny;
            }
            w
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::binary_entropy;

    fn bit(name: &str) -> Variable {
        Variable::new(name, 2)
    }

    fn bsc(p: f64) -> Channel<f64> {
        Channel::new(vec![bit("X")], vec![bit("Y")], vec![1.0 - p, p, p, 1.0 - p]).unwrap()
    }

    #[test]
    fn alphabet_invariants() {
        assert_eq!(Alphabet::new(0), Err(Error::EmptyAlphabet));
        assert!(Alphabet::with_labels(vec!["a".into(), "a".into()]).is_err());
        let a = Alphabet::with_labels(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(a.size(), 2);
    }

    #[test]
    fn constructor_rejects_bad_tables() {
        assert!(matches!(
            JointPmf::new(vec![bit("A")], vec![0.5, 0.4]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointPmf::new(vec![bit("A")], vec![1.5, -0.5]),
            Err(Error::InvalidEntry { index: 1, .. })
        ));
        assert!(matches!(
            JointPmf::new(vec![bit("A"), bit("A")], vec![0.25; 4]),
            Err(Error::DuplicateVariable(_))
        ));
        assert!(matches!(
            Channel::new(vec![bit("X")], vec![bit("Y")], vec![0.5, 0.48, 0.5, 0.5]),
            Err(Error::RowNotNormalized { row: 0, .. })
        ));
    }

    #[test]
    fn marginalize_independent_uniform() {
        let j = JointPmf::<f64>::uniform(vec![bit("W1"), bit("W2")]).unwrap();
        let m = j.marginalize(&["W1"]).unwrap();
        assert_eq!(m.table(), &[0.5, 0.5]);
        assert_eq!(j.marginalize(&["W2", "W1"]).unwrap(), j);
    }

    #[test]
    fn marginalize_diagonal_table() {
        let j = JointPmf::new(vec![bit("W1"), bit("W2")], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(j.marginalize(&["W1"]).unwrap().table(), &[0.5, 0.5]);
    }

    #[test]
    fn marginalize_errors() {
        let j = JointPmf::<f64>::uniform(vec![bit("A")]).unwrap();
        assert_eq!(j.marginalize(&["B"]), Err(Error::UnknownVariable("B".into())));
        assert_eq!(j.marginalize(&[]), Err(Error::EmptyVariableSet));
    }

    #[test]
    fn compose_identity_and_bsc() {
        let u = JointPmf::<f64>::uniform(vec![bit("X")]).unwrap();
        let id = Channel::identity(vec![bit("X")], &["Y"]).unwrap();
        assert_eq!(id.compose(&u).unwrap().table(), &[0.5, 0.0, 0.0, 0.5]);

        let j = bsc(0.11).compose(&u).unwrap();
        let expect = [0.445, 0.055, 0.055, 0.445];
        for (a, b) in j.table().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(j.marginalize(&["X"]).unwrap(), u);
    }

    #[test]
    fn compose_errors() {
        let u = JointPmf::<f64>::uniform(vec![bit("X"), bit("Y")]).unwrap();
        assert!(matches!(bsc(0.1).compose(&u), Err(Error::DuplicateVariable(_))));
        let t = JointPmf::<f64>::uniform(vec![Variable::new("X", 3)]).unwrap();
        assert!(matches!(bsc(0.1).compose(&t), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn entropy_examples() {
        let u = JointPmf::<f64>::uniform(vec![bit("A")]).unwrap();
        assert_eq!(u.entropy(&["A"]).unwrap(), 1.0);
        let d = JointPmf::<f64>::point_mass(vec![bit("A")], &[1]).unwrap();
        assert_eq!(d.entropy(&["A"]).unwrap(), 0.0);
        let p = JointPmf::<f64>::new(vec![bit("A")], vec![0.11, 0.89]).unwrap();
        assert!((p.entropy(&["A"]).unwrap() - 0.499_915_958).abs() < 1e-6);
        assert_eq!(p.entropy(&[]).unwrap(), 0.0);
    }

    #[test]
    fn cmi_examples() {
        let j = JointPmf::<f64>::uniform(vec![bit("A"), bit("B")]).unwrap();
        assert_eq!(j.cmi(&["A"], &["B"], &[]).unwrap(), 0.0);

        let u = JointPmf::<f64>::uniform(vec![bit("X")]).unwrap();
        let same = Channel::identity(vec![bit("X")], &["X2"]).unwrap().compose(&u).unwrap();
        assert!((same.cmi(&["X"], &["X2"], &[]).unwrap() - 1.0).abs() < 1e-15);

        let j = bsc(0.11).compose(&u).unwrap();
        let i = j.cmi(&["X"], &["Y"], &[]).unwrap();
        assert!((i - 0.50009).abs() < 1e-4);
        assert!((i - (1.0 - binary_entropy(0.11))).abs() < 1e-12);
    }

    #[test]
    fn cmi_errors() {
        let j = JointPmf::<f64>::uniform(vec![bit("A"), bit("B")]).unwrap();
        assert!(matches!(j.cmi(&["A"], &["A"], &[]), Err(Error::OverlappingSets(_))));
        assert!(matches!(j.cmi(&["A"], &["B"], &["B"]), Err(Error::OverlappingSets(_))));
        assert!(matches!(j.cmi(&["A"], &["Q"], &[]), Err(Error::UnknownVariable(_))));
        assert_eq!(j.cmi(&[], &["B"], &[]), Err(Error::EmptyVariableSet));
    }

    #[test]
    fn iid_extension_examples() {
        let u = JointPmf::<f64>::uniform(vec![bit("A")]).unwrap();
        assert_eq!(u.iid_extension(1).unwrap(), u);
        let u2 = u.iid_extension(2).unwrap();
        assert_eq!(u2.names(), vec!["A_1", "A_2"]);
        assert_eq!(u2.table(), &[0.25; 4]);

        let p = JointPmf::<f64>::new(vec![bit("A"), bit("B")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let h = p.entropy(&["A", "B"]).unwrap();
        let p2 = p.iid_extension(2).unwrap();
        let h2 = p2.entropy(&p2.names()).unwrap();
        assert!((h2 - 2.0 * h).abs() < 1e-12);
    }

    #[test]
    fn iid_extension_cap() {
        let u = JointPmf::<f64>::uniform(vec![bit("A")]).unwrap();
        assert!(matches!(
            u.iid_extension_capped(5, 16),
            Err(Error::TableCapExceeded { size: 32, cap: 16 })
        ));
    }

    #[test]
    fn cascade_and_parallel() {
        let c = bsc(0.1)
            .then(&Channel::new(vec![bit("Y")], vec![bit("Z")], vec![0.8, 0.2, 0.2, 0.8]).unwrap())
            .unwrap();
        // BSC(0.1) then BSC(0.2) = BSC(0.1*0.8 + 0.9*0.2)
        assert!((c.row(0)[1] - 0.26).abs() < 1e-15);
        let a = Channel::identity(vec![bit("A")], &["A'"]).unwrap();
        let b = bsc(0.3);
        let p = Channel::parallel(&[a, b]).unwrap();
        assert_eq!(p.input_len(), 4);
        // input (A=1, X=0) -> (A'=1, Y=1) with prob 0.3
        assert!((p.row(2)[3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn permuted_reorders_axes() {
        let p = JointPmf::new(vec![bit("A"), bit("B")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = p.permuted(&["B", "A"]).unwrap();
        assert_eq!(q.table(), &[0.1, 0.3, 0.2, 0.4]);
        assert_eq!(q.prob(&[1, 0]), p.prob(&[0, 1]));
    }

    #[test]
    fn single_precision_entropy() {
        let p = JointPmf::<f32>::new(vec![bit("A")], vec![0.11, 0.89]).unwrap();
        assert!((p.entropy(&["A"]).unwrap() - 0.499_916).abs() < 1e-5);
    }
}
