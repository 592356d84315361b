use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::tensor::SquareMatrix;

/// Ordered sizes of contiguous diagonal blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPartition {
    sizes: Vec<usize>,
}

impl BlockPartition {
    /// Errors unless all sizes are positive.
    pub fn new(sizes: Vec<usize>) -> Result<Self, String> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(format!("invalid block sizes {sizes:?}"));
        }
        Ok(Self { sizes })
    }

    pub fn trivial(n: usize) -> Self {
        Self { sizes: vec![n] }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                start += s;
                start - s..start
            })
            .collect()
    }

    fn block_of(&self) -> Vec<usize> {
        self.sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect()
    }

    /// Largest off-block `|M_ij| / (1 + max|M|)`.
    pub fn off_block_residual(&self, m: &SquareMatrix<f64>) -> f64 {
        let owner = self.block_of();
        let scale = 1.0 + m.max_abs();
        let n = m.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if owner[i] != owner[j] {
                    worst = worst.max(m[(i, j)].abs() / scale);
                }
            }
        }
        worst
    }
}

impl fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("|"))
    }
}

impl FromStr for BlockPartition {
    type Err = String;

    /// Accepts `1,1,2` or `1|1|2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let sizes = s
            .split([',', '|'])
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad block size `{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sizes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDetection {
    pub partition: BlockPartition,
    /// Largest relative off-block entry over all matrices.
    pub residual: f64,
    pub passes: bool,
}

/// Verifies `hint`, or finds the finest contiguous partition whose off-block
/// entries stay within `tol * (1 + max|M|)` in every matrix.
///
/// Panics if `mats` is empty or the dimensions disagree.
pub fn detect_blocks(mats: &[SquareMatrix<f64>], hint: Option<&BlockPartition>, tol: f64) -> BlockDetection {
    assert!(!mats.is_empty(), "at least one matrix is required");
    let n = mats[0].dim();
    assert!(mats.iter().all(|m| m.dim() == n), "matrices differ in size");
    let partition = match hint {
        Some(h) => h.clone(),
        None => {
            // a cut after k is allowed unless a large entry couples both sides
            let mut cut = vec![true; n.saturating_sub(1)];
            for m in mats {
                let thr = tol * (1.0 + m.max_abs());
                for i in 0..n {
                    for j in i + 1..n {
                        if m[(i, j)].abs() > thr || m[(j, i)].abs() > thr {
                            cut[i..j].iter_mut().for_each(|c| *c = false);
                        }
                    }
                }
            }
            let mut sizes = Vec::new();
            let mut len = 1;
            for c in cut {
                if c {
                    sizes.push(len);
                    len = 1;
                } else {
                    len += 1;
                }
            }
            sizes.push(len);
            BlockPartition { sizes }
        }
    };
    let residual = if partition.dim() == n {
        mats.iter().map(|m| partition.off_block_residual(m)).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    BlockDetection { passes: residual <= tol, partition, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_finest() {
        let m = SquareMatrix::from_fn(4, |i, j| if i == j { i as f64 } else { 0.0 });
        let d = detect_blocks(&[m], None, 1e-8);
        assert_eq!(d.partition.to_string(), "1|1|1|1");
        assert!(d.passes);
    }

    #[test]
    fn coupling_merges_and_hint_is_idempotent() {
        let mut a = SquareMatrix::identity(5);
        a[(3, 4)] = 2.0;
        let mut b = SquareMatrix::identity(5);
        b[(2, 0)] = 1e-3;
        let mats = [a, b];
        let d = detect_blocks(&mats, None, 1e-8);
        assert_eq!(d.partition.sizes(), &[3, 2]);
        let again = detect_blocks(&mats, Some(&d.partition), 1e-8);
        assert_eq!(again, d);
        let bad = detect_blocks(&mats, Some(&"1,1,1,2".parse().unwrap()), 1e-8);
        assert!(!bad.passes);
        assert!(!detect_blocks(&mats, Some(&BlockPartition::trivial(4)), 1e-8).passes);
    }
}
