//! External clustering metrics: ACC, NMI, Purity, pairwise
//! precision/recall/F-score and the adjusted Rand index.
//!
//! Everything is computed from the integer contingency table between the
//! predicted clustering and the ground truth, so all scores are invariant
//! to relabeling on either side. ACC aligns cluster ids to classes with a
//! Hungarian assignment on negated counts.

use ndarray::Array2;
use std::collections::BTreeMap;

use crate::{Error, Result};

/// R×C predicted-cluster × true-class co-occurrence counts with marginals.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Array2<u64>,
    pub row_marginals: Vec<u64>,
    pub col_marginals: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn from_labels(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::InvalidInput(format!(
                "label lengths differ: {} vs {}",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::InvalidInput("labels must be non-empty".into()));
        }
        // Dense ids in first-seen-sorted order keep the table deterministic.
        let mut pred_ids = BTreeMap::new();
        for &p in pred {
            let next = pred_ids.len();
            pred_ids.entry(p).or_insert(next);
        }
        let mut truth_ids = BTreeMap::new();
        for &t in truth {
            let next = truth_ids.len();
            truth_ids.entry(t).or_insert(next);
        }
        let (r, c) = (pred_ids.len(), truth_ids.len());
        let mut counts = Array2::<u64>::zeros((r, c));
        for (&p, &t) in pred.iter().zip(truth.iter()) {
            counts[[pred_ids[&p], truth_ids[&t]]] += 1;
        }
        let row_marginals: Vec<u64> = (0..r).map(|i| counts.row(i).sum()).collect();
        let col_marginals: Vec<u64> = (0..c).map(|j| counts.column(j).sum()).collect();
        Ok(Self {
            counts,
            row_marginals,
            col_marginals,
            total: pred.len() as u64,
        })
    }
}

/// The seven scores reported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub ari: f64,
}

/// Minimum-cost one-to-one assignment (Hungarian algorithm with row/column
/// potentials and Dijkstra-style augmentation, O(n³)). Rectangular inputs
/// are padded to square with zero-cost dummy cells. Returns the column
/// assigned to each original row (possibly a dummy index ≥ C) and the total
/// cost over real cells.
pub fn hungarian_assign(cost: &Array2<f64>) -> (Vec<usize>, f64) {
    let (r, c) = cost.dim();
    let n = r.max(c);
    // 1-indexed with virtual column 0 as the augmentation root.
    let at = |i: usize, j: usize| -> f64 {
        if i <= r && j <= c {
            cost[[i - 1, j - 1]]
        } else {
            0.0
        }
    };
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column -> row, 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = at(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }
    let mut row_to_col = vec![n; r];
    for (j0, &i) in matched_row[1..].iter().enumerate() {
        if i >= 1 && i <= r {
            row_to_col[i - 1] = j0;
        }
    }
    let mut total = 0.0;
    for (i, &j) in row_to_col.iter().enumerate() {
        if j < c {
            total += cost[[i, j]];
        }
    }
    (row_to_col, total)
}

/// Clustering accuracy: the best matched fraction over one-to-one
/// cluster-to-class alignments.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    let (r, c) = table.counts.dim();
    let cost = Array2::from_shape_fn((r, c), |(i, j)| -(table.counts[[i, j]] as f64));
    let (assign, _) = hungarian_assign(&cost);
    let mut matched = 0u64;
    for (i, &j) in assign.iter().enumerate() {
        if j < c {
            matched += table.counts[[i, j]];
        }
    }
    Ok(matched as f64 / table.total as f64)
}

fn entropy(marginals: &[u64], total: f64) -> f64 {
    marginals
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| {
            let p = m as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, I(pred; truth) / sqrt(H(pred)·H(truth))
/// with natural logarithms. When either entropy is zero the score is 1 for
/// identical partitions and 0 otherwise.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    let n = table.total as f64;
    let h_pred = entropy(&table.row_marginals, n);
    let h_truth = entropy(&table.col_marginals, n);
    if h_pred <= 0.0 || h_truth <= 0.0 {
        // one side is a single cluster: identical partitions iff both are
        let identical = h_pred <= 0.0 && h_truth <= 0.0;
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    let (r, c) = table.counts.dim();
    for i in 0..r {
        for j in 0..c {
            let nij = table.counts[[i, j]];
            if nij == 0 {
                continue;
            }
            let pij = nij as f64 / n;
            let pi = table.row_marginals[i] as f64 / n;
            let pj = table.col_marginals[j] as f64 / n;
            mi += pij * (pij / (pi * pj)).ln();
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}

/// Fraction of samples sitting in their cluster's majority class.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    let majority: u64 = table
        .counts
        .rows()
        .into_iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / table.total as f64)
}

fn comb2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Pair-counting metrics over all n(n−1)/2 sample pairs, with same-cluster
/// pairs as the positive class: (precision, recall, F-score, ARI). Computed
/// in O(R·C) from the contingency table.
pub fn pair_metrics(pred: &[usize], truth: &[usize]) -> Result<(f64, f64, f64, f64)> {
    if pred.len() < 2 {
        return Err(Error::InvalidInput(
            "pair metrics need at least 2 samples".into(),
        ));
    }
    let table = ContingencyTable::from_labels(pred, truth)?;
    let tp: u64 = table.counts.iter().map(|&c| comb2(c)).sum();
    let same_pred: u64 = table.row_marginals.iter().map(|&m| comb2(m)).sum();
    let same_truth: u64 = table.col_marginals.iter().map(|&m| comb2(m)).sum();

    let precision = if same_pred == 0 {
        0.0
    } else {
        tp as f64 / same_pred as f64
    };
    let recall = if same_truth == 0 {
        0.0
    } else {
        tp as f64 / same_truth as f64
    };
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };

    let total_pairs = comb2(table.total) as f64;
    let expected = same_pred as f64 * same_truth as f64 / total_pairs;
    let denom = 0.5 * (same_pred as f64 + same_truth as f64) - expected;
    let ari = if denom.abs() < 1e-300 {
        // both partitions trivial (all singletons or all one cluster)
        if (tp as f64 - expected).abs() < 1e-300 {
            1.0
        } else {
            0.0
        }
    } else {
        (tp as f64 - expected) / denom
    };
    Ok((precision, recall, f_score, ari))
}

/// All seven metrics in one pass.
pub fn report(pred: &[usize], truth: &[usize]) -> Result<MetricsReport> {
    let acc = accuracy(pred, truth)?;
    let nmi_v = nmi(pred, truth)?;
    let purity_v = purity(pred, truth)?;
    let (precision, recall, f_score, ari) = pair_metrics(pred, truth)?;
    Ok(MetricsReport {
        acc,
        nmi: nmi_v,
        purity: purity_v,
        precision,
        recall,
        f_score,
        ari,
    })
}
