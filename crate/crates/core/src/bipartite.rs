//! Bipartite-graph algebra around the shared anchor graph.
//!
//! The N×M graph Z̄ induces a bipartite graph on N sample nodes and M
//! anchor nodes. Its normalized affinity `H = D_P^{-1/2} Z̄ D_Q^{-1/2}` has
//! largest singular value 1, and each unit singular value corresponds to a
//! zero eigenvalue of the normalized bipartite Laplacian — i.e. to one
//! connected component that contains samples. Counting unit singular
//! values therefore tracks connectivity without ever materializing the
//! (N+M)×(N+M) Laplacian.

use ndarray::{Array2, ArrayView2};

use crate::solver::GraphTensor;

/// Row (sample) and column (anchor) degree vectors of a shared graph.
/// Degenerate degrees are floored at 1e-12 so the normalization stays
/// finite.
#[derive(Debug, Clone)]
pub struct DegreePair {
    pub samples: Vec<f64>,
    pub anchors: Vec<f64>,
}

/// Connected components of the bipartite graph. Component ids are
/// contiguous and ordered by the smallest sample index they contain;
/// `count` counts only components that contain at least one sample (an
/// anchor whose column carries no edge is folded into component 0 — it has
/// no effect on sample labels or on the spectral count, which cannot see
/// zero-degree anchors either).
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    pub sample_labels: Vec<usize>,
    pub anchor_labels: Vec<usize>,
    pub count: usize,
}

/// Entrywise mean of the per-view graphs: the graph shared by all views.
/// Rows stay on the probability simplex.
pub fn shared_graph(z: &GraphTensor) -> Array2<f64> {
    let (n, v, m) = z.dims();
    let mut out = Array2::<f64>::zeros((n, m));
    let arr = z.as_array();
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for view in 0..v {
                acc += arr[[i, view, j]];
            }
            out[[i, j]] = acc / v as f64;
        }
    }
    out
}

/// Row and column sums of a nonnegative graph, floored at 1e-12.
pub fn degrees(zbar: ArrayView2<'_, f64>) -> DegreePair {
    let (n, m) = (zbar.nrows(), zbar.ncols());
    let mut samples = vec![0.0f64; n];
    let mut anchors = vec![0.0f64; m];
    for i in 0..n {
        for j in 0..m {
            let w = zbar[[i, j]];
            samples[i] += w;
            anchors[j] += w;
        }
    }
    for d in samples.iter_mut().chain(anchors.iter_mut()) {
        if *d < 1e-12 {
            *d = 1e-12;
        }
    }
    DegreePair { samples, anchors }
}

/// `H_ij = Z̄_ij / sqrt(d_P(i) · d_Q(j))`. For a row-stochastic graph the
/// largest singular value of H is 1.
pub fn normalized_affinity(zbar: ArrayView2<'_, f64>, deg: &DegreePair) -> Array2<f64> {
    let (n, m) = (zbar.nrows(), zbar.ncols());
    let inv_sp: Vec<f64> = deg.samples.iter().map(|d| 1.0 / d.sqrt()).collect();
    let inv_sq: Vec<f64> = deg.anchors.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut h = Array2::<f64>::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            h[[i, j]] = zbar[[i, j]] * inv_sp[i] * inv_sq[j];
        }
    }
    h
}

/// Number of singular values within `tol` of 1 — the multiplicity of the
/// zero eigenvalue of the normalized bipartite Laplacian.
pub fn count_zero_eigs(singulars: &[f64], tol: f64) -> usize {
    debug_assert!(tol > 0.0 && tol < 0.1);
    singulars.iter().filter(|&&s| s >= 1.0 - tol).count()
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let mut a = self.find(x);
        let mut b = self.find(y);
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Connected components over the bipartite graph with an edge wherever
/// `Z̄_ij > eps`.
pub fn connected_components(zbar: ArrayView2<'_, f64>, eps: f64) -> ComponentLabeling {
    let (n, m) = (zbar.nrows(), zbar.ncols());
    let mut uf = UnionFind::new(n + m);
    for i in 0..n {
        for j in 0..m {
            if zbar[[i, j]] > eps {
                uf.union(i, n + j);
            }
        }
    }
    // ids ordered by smallest member sample index
    let mut id_of_root: Vec<Option<usize>> = vec![None; n + m];
    let mut count = 0usize;
    let mut sample_labels = vec![0usize; n];
    for (i, label) in sample_labels.iter_mut().enumerate() {
        let root = uf.find(i);
        let id = *id_of_root[root].get_or_insert_with(|| {
            let id = count;
            count += 1;
            id
        });
        *label = id;
    }
    let mut anchor_labels = vec![0usize; m];
    for (j, label) in anchor_labels.iter_mut().enumerate() {
        let root = uf.find(n + j);
        *label = id_of_root[root].unwrap_or(0);
    }
    ComponentLabeling {
        sample_labels,
        anchor_labels,
        count,
    }
}

/// Turns a component labeling into cluster labels for a target count `k`.
///
/// `exact` reports whether the graph had exactly k sample-bearing
/// components. With more than k, the surplus smallest components are folded
/// one at a time into the component of their strongest outside anchor
/// (largest total edge weight from the component's samples); with fewer,
/// the labels are returned as-is. Labels are always renumbered contiguously
/// by smallest sample index.
pub fn labels_from_components(
    c: &ComponentLabeling,
    k: usize,
    zbar: ArrayView2<'_, f64>,
) -> (Vec<usize>, bool) {
    let exact = c.count == k;
    let mut sample_labels = c.sample_labels.clone();
    let mut anchor_labels = c.anchor_labels.clone();
    let mut count = c.count;
    let n = sample_labels.len();
    let m = anchor_labels.len();

    while count > k && k >= 1 {
        let mut sizes = vec![0usize; count];
        for &l in &sample_labels {
            sizes[l] += 1;
        }
        let smallest = (0..count)
            .min_by_key(|&id| (sizes[id], id))
            .expect("count > k >= 1");
        // strongest link from the folded component to an outside anchor
        let mut best: Option<(f64, usize)> = None;
        for j in 0..m {
            if anchor_labels[j] == smallest {
                continue;
            }
            let w: f64 = (0..n)
                .filter(|&i| sample_labels[i] == smallest)
                .map(|i| zbar[[i, j]])
                .sum();
            if w > 0.0 && best.is_none_or(|(bw, _)| w > bw) {
                best = Some((w, j));
            }
        }
        let target = match best {
            Some((_, j)) => anchor_labels[j],
            // totally disconnected: fold into the largest other component
            None => (0..count)
                .filter(|&id| id != smallest)
                .max_by_key(|&id| (sizes[id], count - id))
                .expect("k >= 1 leaves another component"),
        };
        for l in sample_labels.iter_mut().chain(anchor_labels.iter_mut()) {
            if *l == smallest {
                *l = target;
            }
        }
        // compress ids, keeping them dense and ordered by first sample
        let mut remap = vec![usize::MAX; count];
        let mut next = 0usize;
        for l in sample_labels.iter_mut() {
            if remap[*l] == usize::MAX {
                remap[*l] = next;
                next += 1;
            }
            *l = remap[*l];
        }
        for l in anchor_labels.iter_mut() {
            *l = if remap[*l] == usize::MAX { 0 } else { remap[*l] };
        }
        count -= 1;
    }
    (sample_labels, exact)
}
