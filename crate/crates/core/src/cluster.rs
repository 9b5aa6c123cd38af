//! Complete-linkage clustering of products and terms under MAD distances.

use serde::{Deserialize, Serialize};

use crate::data::CataTable;
use crate::error::{Error, Result};
use crate::stats::{median, median_in_place};

/// Symmetric, zero-diagonal, nonnegative dissimilarities between labelled
/// items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    /// Row-major n×n.
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::Dimensions(format!(
                "distance matrix needs {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Dimensions(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Dimensions(format!("invalid distance {v} at ({i}, {j})")));
                }
                if v != values[j * n + i] {
                    return Err(Error::Dimensions(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { labels, values })
    }

    /// Builds a matrix from a pairwise function evaluated for `i < j`.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self::new(labels, values)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }
}

/// Product dissimilarity: the Test 4 statistic for each pair.
pub fn product_distances(table: &CataTable) -> DistanceMatrix {
    let nt = table.n_terms();
    let mut buf = Vec::with_capacity(nt);
    DistanceMatrix::from_fn(table.products().to_vec(), |i, j| {
        buf.clear();
        buf.extend((0..nt).map(|t| (table.value(i, t) - table.value(j, t)).abs()));
        median_in_place(&mut buf)
    })
    .expect("MAD distances form a valid matrix")
}

/// Term dissimilarity: median over products of absolute differences between
/// the two median-centred columns.
pub fn term_distances(table: &CataTable) -> DistanceMatrix {
    let centred: Vec<Vec<f64>> = (0..table.n_terms())
        .map(|t| {
            let col = table.column(t);
            let m = median(&col).expect("non-empty column");
            col.into_iter().map(|v| v - m).collect()
        })
        .collect();
    let mut buf = Vec::with_capacity(table.n_products());
    DistanceMatrix::from_fn(table.terms().to_vec(), |i, j| {
        buf.clear();
        buf.extend(centred[i].iter().zip(&centred[j]).map(|(a, b)| (a - b).abs()));
        median_in_place(&mut buf)
    })
    .expect("MAD distances form a valid matrix")
}

/// One agglomeration step. Leaves are ids `0..n`; the cluster formed at step
/// `s` gets id `n + s`. `left` holds the cluster with the smaller minimum leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

/// Complete-linkage agglomeration.
///
/// Among pairs at the minimal linkage distance, the pair whose smaller
/// minimum-leaf index is least wins, then the pair whose larger one is least.
pub fn complete_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Dimensions("clustering needs at least two items".into()));
    }
    // Active clusters keyed by slot = minimum leaf index.
    let mut active: Vec<bool> = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut dist: Vec<f64> = (0..n * n).map(|k| d.get(k / n, k % n)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let v = dist[i * n + j];
                // Slots are scanned in (i, j) order, so strict improvement
                // keeps the tie-breaking rule.
                if best.is_none_or(|(b, _, _)| v < b) {
                    best = Some((v, i, j));
                }
            }
        }
        let (height, i, j) = best.expect("at least two active clusters");
        merges.push(Merge {
            left: ids[i],
            right: ids[j],
            height,
            size: sizes[i] + sizes[j],
        });
        // Slot i keeps the merged cluster: its minimum leaf is i < j.
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = dist[i * n + k].max(dist[j * n + k]);
                dist[i * n + k] = v;
                dist[k * n + i] = v;
            }
        }
        active[j] = false;
        ids[i] = n + step;
        sizes[i] += sizes[j];
    }
    Ok(Dendrogram {
        labels: d.labels().to_vec(),
        merges,
    })
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    fn children(&self, id: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (id >= n).then(|| {
            let m = &self.merges[id - n];
            (m.left, m.right)
        })
    }

    fn root(&self) -> usize {
        2 * self.n_leaves() - 2
    }

    fn collect_leaves(&self, id: usize, out: &mut Vec<usize>) {
        match self.children(id) {
            None => out.push(id),
            Some((l, r)) => {
                self.collect_leaves(l, out);
                self.collect_leaves(r, out);
            }
        }
    }

    /// Display order: the subtree with the smaller minimum leaf on the left.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_leaves());
        self.collect_leaves(self.root(), &mut out);
        out
    }

    /// Partition into `k` clusters by undoing the last `k - 1` merges.
    /// Clusters are ordered by their minimum leaf index; each lists leaf
    /// indices in ascending order.
    pub fn cut(&self, k: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(Error::OutOfRange(format!("cluster count {k} not in 1..={n}")));
        }
        // Roots after the first n - k merges.
        let kept = n - k;
        let mut parent_of = vec![None; 2 * n - 1];
        for (s, m) in self.merges[..kept].iter().enumerate() {
            parent_of[m.left] = Some(n + s);
            parent_of[m.right] = Some(n + s);
        }
        let mut groups: Vec<Vec<usize>> = (0..n + kept)
            .filter(|&id| parent_of[id].is_none())
            .map(|id| {
                let mut leaves = Vec::new();
                self.collect_leaves(id, &mut leaves);
                leaves.sort_unstable();
                leaves
            })
            .collect();
        groups.sort_by_key(|g| g[0]);
        Ok(groups)
    }

    /// Cut with leaf labels instead of indices.
    pub fn cut_labels(&self, k: usize) -> Result<Vec<Vec<String>>> {
        Ok(self
            .cut(k)?
            .into_iter()
            .map(|g| g.into_iter().map(|i| self.labels[i].clone()).collect())
            .collect())
    }

    /// Nested-parenthesis form with merge heights, e.g. `((A,B):1,C):5;`.
    pub fn to_text(&self) -> String {
        fn go(d: &Dendrogram, id: usize, out: &mut String) {
            match d.children(id) {
                None => out.push_str(&d.labels[id]),
                Some((l, r)) => {
                    out.push('(');
                    go(d, l, out);
                    out.push(',');
                    go(d, r, out);
                    out.push_str(&format!("):{}", d.merges[id - d.n_leaves()].height));
                }
            }
        }
        let mut out = String::new();
        go(self, self.root(), &mut out);
        out.push(';');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        ["A", "B", "C", "D", "E", "F"][..n].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_items_single_merge() {
        let d = DistanceMatrix::from_fn(labels(2), |_, _| 3.5).unwrap();
        let dend = complete_linkage(&d).unwrap();
        assert_eq!(dend.merges.len(), 1);
        assert_eq!(dend.merges[0].height, 3.5);
    }

    #[test]
    fn three_items_hand_agglomeration() {
        let d = DistanceMatrix::new(labels(3), vec![0., 1., 5., 1., 0., 4., 5., 4., 0.]).unwrap();
        let dend = complete_linkage(&d).unwrap();
        assert_eq!(
            dend.merges,
            vec![
                Merge { left: 0, right: 1, height: 1.0, size: 2 },
                Merge { left: 3, right: 2, height: 5.0, size: 3 },
            ]
        );
        assert_eq!(dend.to_text(), "((A,B):1,C):5;");
    }

    #[test]
    fn cuts_at_extremes() {
        let d = DistanceMatrix::from_fn(labels(5), |i, j| (i * 3 + j * 7 % 5) as f64 + 1.0).unwrap();
        let dend = complete_linkage(&d).unwrap();
        assert_eq!(dend.cut(1).unwrap(), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(dend.cut(5).unwrap(), (0..5).map(|i| vec![i]).collect::<Vec<_>>());
        assert!(dend.cut(0).is_err());
        assert!(dend.cut(6).is_err());
    }

    #[test]
    fn ties_merge_lowest_indices_first() {
        let d = DistanceMatrix::from_fn(labels(4), |_, _| 1.0).unwrap();
        let dend = complete_linkage(&d).unwrap();
        assert_eq!((dend.merges[0].left, dend.merges[0].right), (0, 1));
        assert_eq!((dend.merges[1].left, dend.merges[1].right), (4, 2));
    }

    #[test]
    fn product_distance_examples() {
        let t = CataTable::from_percentages(&[vec![0., 0., 0.], vec![4., 10., 2.], vec![0., 0., 0.]]).unwrap();
        let d = product_distances(&t);
        assert_eq!(d.get(0, 1), 4.0);
        assert_eq!(d.get(0, 2), 0.0);
    }

    #[test]
    fn term_distance_examples() {
        // Centred columns (-2, 0, 5) and (1, 0, -1); third column is the
        // first shifted by a constant.
        let t = CataTable::from_percentages(&[
            vec![8., 11., 28.],
            vec![10., 10., 30.],
            vec![15., 9., 35.],
        ])
        .unwrap();
        let d = term_distances(&t);
        assert_eq!(d.get(0, 1), 3.0);
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(DistanceMatrix::new(labels(2), vec![0., 1., 2., 0.]).is_err());
        assert!(DistanceMatrix::new(labels(2), vec![1., 1., 1., 0.]).is_err());
        assert!(DistanceMatrix::new(labels(2), vec![0., -1., -1., 0.]).is_err());
    }

    #[test]
    fn leaf_order_places_smaller_minimum_left() {
        let d = DistanceMatrix::new(labels(3), vec![0., 5., 1., 5., 0., 5., 1., 5., 0.]).unwrap();
        let dend = complete_linkage(&d).unwrap();
        assert_eq!(dend.leaf_order(), vec![0, 2, 1]);
    }
}
