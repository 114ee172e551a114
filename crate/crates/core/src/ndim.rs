//! Critical points of `R -> |sym(R D - 1)|^2` on SO(n) for diagonal `D`.
//!
//! Critical points are block-diagonal up to a permutation: the index set is
//! partitioned into blocks of size one or two, each carrying the sign of its
//! determinant. A `+` pair `{i, j}` is a planar rotation with
//! `cos beta = 2 / (nu_i + nu_j)`, a `-` pair a planar reflection with
//! `cos = 2 / (nu_i - nu_j)`, and singletons are `+-1`.
//!
//! Indices are zero-based in code and one-based in [`std::fmt::Display`]
//! output.

use std::fmt;

use serde::Serialize;

use crate::energy::{absolute_rotation, CosseratWeights, DeformationGradient};
use crate::error::{Error, Result};
use crate::matcore::{identity, Rotation};
use crate::spatial::{classify_sum, Domain};

/// Largest dimension accepted by [`enumerate_critical_partitions`].
pub const MAX_ENUMERATION_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Block {
    Single(usize, Sign),
    /// `i < j`.
    Pair(usize, usize, Sign),
}

impl Block {
    fn first(&self) -> usize {
        match *self {
            Block::Single(i, _) | Block::Pair(i, _, _) => i,
        }
    }

    pub fn sign(&self) -> Sign {
        match *self {
            Block::Single(_, s) | Block::Pair(_, _, s) => s,
        }
    }

    fn pair(i: usize, j: usize, sign: Sign) -> Block {
        Block::Pair(i.min(j), i.max(j), sign)
    }
}

/// A partition of `{0..n}` into signed blocks of size one or two, kept
/// sorted by the smallest index of each block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CriticalPartition {
    blocks: Vec<Block>,
}

impl Serialize for CriticalPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Display for CriticalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            match *b {
                Block::Single(i, s) => write!(f, "{{{}}}{}", i + 1, s.symbol())?,
                Block::Pair(i, j, s) => write!(f, "{{{},{}}}{}", i + 1, j + 1, s.symbol())?,
            }
        }
        Ok(())
    }
}

impl CriticalPartition {
    /// Checks that the blocks cover `{0..n}` exactly once.
    pub fn new(mut blocks: Vec<Block>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if let Block::Pair(i, j, s) = *b {
                *b = Block::pair(i, j, s);
            }
            let idx: &[usize] = match b {
                Block::Single(i, _) => std::slice::from_ref(i),
                Block::Pair(i, j, _) if i == j => {
                    return Err(Error::InadmissiblePartition(format!("pair with repeated index {}", *i + 1)))
                }
                Block::Pair(i, j, _) => &[*i, *j],
            };
            for &i in idx {
                if i >= n || seen[i] {
                    return Err(Error::InadmissiblePartition(format!(
                        "index {} is out of range or repeated",
                        i + 1
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InadmissiblePartition(format!("index {} is not covered", missing + 1)));
        }
        Ok(Self::sorted(blocks))
    }

    fn sorted(mut blocks: Vec<Block>) -> Self {
        blocks.sort_by_key(Block::first);
        CriticalPartition { blocks }
    }

    /// All singletons with sign `+`; realized by the identity.
    pub fn identity(n: usize) -> Self {
        CriticalPartition { blocks: (0..n).map(|i| Block::Single(i, Sign::Plus)).collect() }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| if matches!(b, Block::Pair(..)) { 2 } else { 1 }).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, Sign)> + '_ {
        self.blocks.iter().filter_map(|b| match *b {
            Block::Pair(i, j, s) => Some((i, j, s)),
            _ => None,
        })
    }

    pub fn pair_count(&self) -> usize {
        self.pairs().count()
    }

    /// Product of the block signs, the determinant of any realization.
    pub fn determinant(&self) -> f64 {
        self.blocks.iter().map(|b| b.sign().value()).product()
    }

    /// Pair conditions: `nu_i + nu_j > 2` for `+`, `|nu_i - nu_j| > 2` for `-`.
    pub fn check_admissible(&self, nu: &[f64]) -> Result<()> {
        if nu.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: nu.len() });
        }
        for (i, j, s) in self.pairs() {
            if !pair_admissible(nu[i], nu[j], s) {
                return Err(Error::InadmissiblePartition(format!(
                    "block {{{},{}}}{} violates its sign condition for nu = ({}, {})",
                    i + 1,
                    j + 1,
                    s.symbol(),
                    nu[i],
                    nu[j]
                )));
            }
        }
        Ok(())
    }

    /// Two pairs `{i1, i4}`, `{i2, i3}` with `i1 < i2 < i3 < i4`.
    pub fn has_nested_pairs(&self) -> bool {
        find_nested(&self.pairs().map(|(i, j, _)| (i, j)).collect::<Vec<_>>()).is_some()
    }
}

fn pair_admissible(a: f64, b: f64, sign: Sign) -> bool {
    match sign {
        Sign::Plus => a + b > 2.0,
        Sign::Minus => (a - b).abs() > 2.0,
    }
}

fn check_nu(nu: &[f64]) -> Result<()> {
    if nu.is_empty() {
        return Err(Error::InvalidSingularValues("empty".into()));
    }
    if let Some(v) = nu.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidSingularValues(format!("{v} is not a positive number")));
    }
    Ok(())
}

fn check_descending(nu: &[f64]) -> Result<()> {
    check_nu(nu)?;
    if nu.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidSingularValues("entries must be non-increasing".into()));
    }
    Ok(())
}

/// Every admissible signed partition realizable in SO(n), i.e. with an even
/// number of `-` blocks, in a deterministic order.
pub fn enumerate_critical_partitions(nu: &[f64]) -> Result<Vec<CriticalPartition>> {
    check_nu(nu)?;
    let n = nu.len();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::TooLarge(n));
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut blocks = Vec::with_capacity(n);
    enumerate_rec(nu, &mut used, &mut blocks, 0, &mut out);
    Ok(out)
}

fn enumerate_rec(
    nu: &[f64],
    used: &mut [bool],
    blocks: &mut Vec<Block>,
    minus_count: usize,
    out: &mut Vec<CriticalPartition>,
) {
    let Some(i) = used.iter().position(|u| !u) else {
        if minus_count % 2 == 0 {
            out.push(CriticalPartition { blocks: blocks.clone() });
        }
        return;
    };
    used[i] = true;
    for sign in [Sign::Plus, Sign::Minus] {
        blocks.push(Block::Single(i, sign));
        enumerate_rec(nu, used, blocks, minus_count + (sign == Sign::Minus) as usize, out);
        blocks.pop();
    }
    for j in i + 1..nu.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        for sign in [Sign::Plus, Sign::Minus] {
            if pair_admissible(nu[i], nu[j], sign) {
                blocks.push(Block::Pair(i, j, sign));
                enumerate_rec(nu, used, blocks, minus_count + (sign == Sign::Minus) as usize, out);
                blocks.pop();
            }
        }
        used[j] = false;
    }
    used[i] = false;
}

/// Critical energy of the partition:
/// `sum (nu_i - 1)^2` over `+` singletons, `sum (nu_i + 1)^2` over `-`
/// singletons, `sum (nu_i - nu_j)^2 / 2` over `+` pairs and
/// `sum (nu_i + nu_j)^2 / 2` over `-` pairs.
pub fn critical_value(p: &CriticalPartition, nu: &[f64]) -> Result<f64> {
    p.check_admissible(nu)?;
    Ok(p.blocks
        .iter()
        .map(|b| match *b {
            Block::Single(i, Sign::Plus) => (nu[i] - 1.0).powi(2),
            Block::Single(i, Sign::Minus) => (nu[i] + 1.0).powi(2),
            Block::Pair(i, j, Sign::Plus) => 0.5 * (nu[i] - nu[j]).powi(2),
            Block::Pair(i, j, Sign::Minus) => 0.5 * (nu[i] + nu[j]).powi(2),
        })
        .sum())
}

/// Block-diagonal critical point `R_hat` of `|sym(R_hat D - 1)|^2` for the
/// partition, taking the positive `sin` in every pair.
pub fn realize_rotation(p: &CriticalPartition, nu: &[f64]) -> Result<Rotation> {
    let flips = vec![false; p.pair_count()];
    realize_branch(p, nu, &flips)
}

/// Like [`realize_rotation`], negating the `sin` of the `k`-th pair when
/// `flips[k]` is set.
pub fn realize_branch(p: &CriticalPartition, nu: &[f64], flips: &[bool]) -> Result<Rotation> {
    p.check_admissible(nu)?;
    if p.determinant() < 0.0 {
        return Err(Error::Orientation);
    }
    assert_eq!(flips.len(), p.pair_count());
    let mut r = identity(nu.len());
    let mut k = 0;
    for b in &p.blocks {
        match *b {
            Block::Single(i, s) => r[(i, i)] = s.value(),
            Block::Pair(i, j, sign) => {
                let c = match sign {
                    Sign::Plus => 2.0 / (nu[i] + nu[j]),
                    Sign::Minus => 2.0 / (nu[i] - nu[j]),
                };
                let mut s = (1.0 - c * c).max(0.0).sqrt();
                if flips[k] {
                    s = -s;
                }
                k += 1;
                match sign {
                    Sign::Plus => {
                        r[(i, i)] = c;
                        r[(i, j)] = -s;
                        r[(j, i)] = s;
                        r[(j, j)] = c;
                    }
                    Sign::Minus => {
                        r[(i, i)] = c;
                        r[(i, j)] = s;
                        r[(j, i)] = s;
                        r[(j, j)] = -c;
                    }
                }
            }
        }
    }
    Ok(Rotation::from_matrix_unchecked(r))
}

/// All `2^(pairs)` realizations of the partition, in binary order of the
/// flip pattern.
pub fn realize_all(p: &CriticalPartition, nu: &[f64]) -> Result<Vec<Rotation>> {
    let m = p.pair_count();
    (0..1usize << m)
        .map(|bits| {
            let flips: Vec<bool> = (0..m).map(|k| bits >> k & 1 == 1).collect();
            realize_branch(p, nu, &flips)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraversalStage {
    Start,
    /// Every block sign set to `+`.
    PositiveSigns,
    /// Nested pairs `{i1, i4}, {i2, i3}` replaced by `{i1, i2}, {i3, i4}`.
    Disentangle,
    /// A pair index exchanged with a smaller singleton index.
    Shift,
    /// Crossing pairs `{a, c}, {b, d}` replaced by `{a, b}, {c, d}`.
    Uncross,
    /// Adjacent singletons joined into a pair.
    Merge,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraversalStep {
    pub stage: TraversalStage,
    pub partition: CriticalPartition,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Traversal {
    pub steps: Vec<TraversalStep>,
}

impl Traversal {
    pub fn result(&self) -> &CriticalPartition {
        &self.steps.last().expect("traversal records its start").partition
    }

    pub fn value(&self) -> f64 {
        self.steps.last().expect("traversal records its start").value
    }
}

fn find_nested(pairs: &[(usize, usize)]) -> Option<(usize, usize)> {
    for (a, &(i1, i4)) in pairs.iter().enumerate() {
        for (b, &(i2, i3)) in pairs.iter().enumerate() {
            if i1 < i2 && i3 < i4 {
                return Some((a, b));
            }
        }
    }
    None
}

fn find_crossing(pairs: &[(usize, usize)]) -> Option<(usize, usize)> {
    for (x, &(a, c)) in pairs.iter().enumerate() {
        for (y, &(b, d)) in pairs.iter().enumerate() {
            if a < b && b < c && c < d {
                return Some((x, y));
            }
        }
    }
    None
}

/// Working state of the traversal once all signs are `+`.
struct PlusPartition<'a> {
    nu: &'a [f64],
    pairs: Vec<(usize, usize)>,
}

impl PlusPartition<'_> {
    fn to_partition(&self) -> CriticalPartition {
        let mut in_pair = vec![false; self.nu.len()];
        let mut blocks = Vec::with_capacity(self.nu.len());
        for &(i, j) in &self.pairs {
            in_pair[i] = true;
            in_pair[j] = true;
            blocks.push(Block::pair(i, j, Sign::Plus));
        }
        blocks.extend((0..self.nu.len()).filter(|&i| !in_pair[i]).map(|i| Block::Single(i, Sign::Plus)));
        CriticalPartition::sorted(blocks)
    }

    fn singles(&self) -> Vec<usize> {
        let mut in_pair = vec![false; self.nu.len()];
        for &(i, j) in &self.pairs {
            in_pair[i] = true;
            in_pair[j] = true;
        }
        (0..self.nu.len()).filter(|&i| !in_pair[i]).collect()
    }

    /// Replaces pairs `x` and `y` by `{a, b}` and `{c, d}` for the sorted
    /// indices `a < b < c < d`, dropping `{c, d}` if it is not admissible.
    fn repair(&mut self, x: usize, y: usize) {
        let mut idx = [self.pairs[x].0, self.pairs[x].1, self.pairs[y].0, self.pairs[y].1];
        idx.sort_unstable();
        let (hi, lo) = (x.max(y), x.min(y));
        self.pairs.remove(hi);
        self.pairs.remove(lo);
        self.pairs.push((idx[0], idx[1]));
        if pair_admissible(self.nu[idx[2]], self.nu[idx[3]], Sign::Plus) {
            self.pairs.push((idx[2], idx[3]));
        }
    }

    /// Moves the largest pair index below which a singleton exists onto the
    /// smallest singleton index.
    fn shift(&mut self) -> bool {
        let Some(&s) = self.singles().first() else { return false };
        let mut best: Option<(usize, bool)> = None;
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            if j > s && best.is_none_or(|(b, second)| j > if second { self.pairs[b].1 } else { self.pairs[b].0 }) {
                best = Some((k, true));
            } else if i > s && best.is_none() {
                best = Some((k, false));
            }
        }
        let Some((k, second)) = best else { return false };
        let (i, j) = self.pairs[k];
        self.pairs[k] = if second { (i.min(s), i.max(s)) } else { (s.min(j), s.max(j)) };
        true
    }
}

/// Energy-decreasing walk from `start` to the canonical global minimum:
/// signs to `+`, untangle nested pairs, shift pairs to the lowest indices,
/// then merge adjacent singletons while `nu_i + nu_j > 2`.
///
/// `nu` must be non-increasing; adjacency and "lowest index" refer to that
/// order.
pub fn traversal_minimize(start: &CriticalPartition, nu: &[f64]) -> Result<Traversal> {
    check_descending(nu)?;
    let mut steps = vec![TraversalStep {
        stage: TraversalStage::Start,
        partition: start.clone(),
        value: critical_value(start, nu)?,
    }];
    let mut record = |stage, p: CriticalPartition| -> Result<()> {
        let value = critical_value(&p, nu)?;
        steps.push(TraversalStep { stage, partition: p, value });
        Ok(())
    };

    let mut state = PlusPartition { nu, pairs: start.pairs().map(|(i, j, _)| (i, j)).collect() };
    if start.blocks.iter().any(|b| b.sign() == Sign::Minus) {
        record(TraversalStage::PositiveSigns, state.to_partition())?;
    }

    loop {
        if let Some((x, y)) = find_nested(&state.pairs) {
            state.repair(x, y);
            record(TraversalStage::Disentangle, state.to_partition())?;
        } else if state.shift() {
            record(TraversalStage::Shift, state.to_partition())?;
        } else if let Some((x, y)) = find_crossing(&state.pairs) {
            state.repair(x, y);
            record(TraversalStage::Uncross, state.to_partition())?;
        } else {
            break;
        }
    }

    let mut next = 2 * state.pairs.len();
    while next + 1 < nu.len() && pair_exceeds(nu[next] + nu[next + 1], 2.0) {
        state.pairs.push((next, next + 1));
        record(TraversalStage::Merge, state.to_partition())?;
        next += 2;
    }
    Ok(Traversal { steps })
}

/// `sum > threshold` outside the boundary tolerance shared with the planar
/// and spatial modules.
fn pair_exceeds(sum: f64, threshold: f64) -> bool {
    classify_sum(sum, threshold) == Domain::NonClassical
}

/// Number of leading consecutive pairs `(nu_{2i-1}, nu_{2i})` whose sum
/// exceeds `threshold`.
fn leading_pairs(nu: &[f64], threshold: f64) -> usize {
    nu.chunks_exact(2).take_while(|p| pair_exceeds(p[0] + p[1], threshold)).count()
}

/// `{1,2} ... {2k-1,2k}` followed by singletons, all `+`.
pub fn canonical_partition(n: usize, k: usize) -> CriticalPartition {
    let mut blocks: Vec<Block> = (0..k).map(|i| Block::Pair(2 * i, 2 * i + 1, Sign::Plus)).collect();
    blocks.extend((2 * k..n).map(|i| Block::Single(i, Sign::Plus)));
    CriticalPartition { blocks }
}

/// Global minimum of `|sym(R_hat D - 1)|^2` over SO(n).
#[derive(Debug, Clone, Serialize)]
pub struct NdMinimum {
    pub nu: Vec<f64>,
    /// Largest `k` with `nu_{2k-1} + nu_{2k} > 2`.
    pub k: usize,
    pub partition: CriticalPartition,
    /// `sum (nu_i - 1)^2 - 1/2 sum_{i<=k} (nu_{2i-1} + nu_{2i} - 2)^2`.
    pub wred: f64,
    /// Repeated entries: the minimizers form non-isolated families and
    /// [`NdMinimum::minimizers`] returns representatives.
    pub degenerate: bool,
}

impl NdMinimum {
    pub fn minimizer_count(&self) -> u128 {
        1u128 << self.k
    }

    /// The `2^k` block-diagonal relative rotations `R_hat`.
    pub fn minimizers(&self) -> Vec<Rotation> {
        realize_all(&self.partition, &self.nu).expect("canonical partition is admissible")
    }
}

pub fn global_minimizers_nd(nu: &[f64]) -> Result<NdMinimum> {
    check_descending(nu)?;
    let k = leading_pairs(nu, 2.0);
    let partition = canonical_partition(nu.len(), k);
    let wred = critical_value(&partition, nu)?;
    Ok(NdMinimum {
        nu: nu.to_vec(),
        k,
        partition,
        wred,
        degenerate: has_ties(nu),
    })
}

fn has_ties(nu: &[f64]) -> bool {
    nu.windows(2).any(|w| (w[0] - w[1]).abs() <= 1e-10 * w[0].max(1.0))
}

/// Reduced energy for arbitrary weights from the singular values (any
/// order): `mu |U - 1|^2 - (mu - mu_c)/2 sum (nu_{2i-1} + nu_{2i} - rho)^2`
/// over the leading pairs exceeding `rho`.
pub fn reduced_energy_weighted(w: &CosseratWeights, nu: &[f64]) -> f64 {
    let mut sorted = nu.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let classical = w.mu() * sorted.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
    let Some(rho) = w.singular_radius() else { return classical };
    let k = leading_pairs(&sorted, rho);
    let savings: f64 = (0..k).map(|i| (sorted[2 * i] + sorted[2 * i + 1] - rho).powi(2)).sum();
    classical - 0.5 * (w.mu() - w.muc()) * savings
}

/// Minimizers of `W_{mu,mu_c}(.; F)` in any dimension, as absolute rotations
/// `polar(F) Q R_hat^T Q^T`.
pub fn rpolar_nd(w: &CosseratWeights, f: &DeformationGradient) -> Vec<Rotation> {
    let Some(rho) = w.singular_radius() else {
        return vec![f.polar().rotation.clone()];
    };
    let nu = f.singular_values();
    let k = leading_pairs(nu, rho);
    let partition = canonical_partition(nu.len(), k);
    // R_hat for weights (mu, mu_c) has cos = rho / (nu_i + nu_j), which is the
    // (1, 0) angle on the rescaled values nu / lambda.
    let scaled: Vec<f64> = nu.iter().map(|v| v * 2.0 / rho).collect();
    realize_all(&partition, &scaled)
        .expect("canonical partition is admissible")
        .iter()
        .map(|rel| absolute_rotation(rel, f).expect("dimensions match"))
        .collect()
}
