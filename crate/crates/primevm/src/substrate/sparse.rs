//! Source-major sparse synapse masks and weight arrays.

use rand::seq::index;
use rand::Rng;
use std::ops::Range;
use std::sync::Arc;

/// Admissible synapses of one connection, stored by source neuron (CSR).
#[derive(Clone, Debug, PartialEq)]
pub struct SynapseMask {
    n_src: usize,
    n_dst: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

/// Destination-major view of a mask: for each destination neuron, the
/// source neurons and the synapse slot of each.
#[derive(Clone, Debug)]
pub struct Incoming {
    pub offsets: Vec<usize>,
    pub sources: Vec<u32>,
    pub slots: Vec<u32>,
}

impl Incoming {
    pub fn range(&self, dst: usize) -> Range<usize> {
        self.offsets[dst]..self.offsets[dst + 1]
    }
}

impl SynapseMask {
    /// Each source neuron draws `fanout` distinct targets uniformly.
    pub fn random<R: Rng + ?Sized>(n_src: usize, n_dst: usize, fanout: usize, rng: &mut R) -> Self {
        if fanout >= n_dst {
            return SynapseMask::full(n_src, n_dst);
        }
        let mut offsets = Vec::with_capacity(n_src + 1);
        let mut targets = Vec::with_capacity(n_src * fanout);
        offsets.push(0);
        for _ in 0..n_src {
            let mut row: Vec<u32> = index::sample(rng, n_dst, fanout)
                .into_iter()
                .map(|j| j as u32)
                .collect();
            row.sort_unstable();
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        SynapseMask {
            n_src,
            n_dst,
            offsets,
            targets,
        }
    }

    pub fn full(n_src: usize, n_dst: usize) -> Self {
        let row: Vec<u32> = (0..n_dst as u32).collect();
        let mut targets = Vec::with_capacity(n_src * n_dst);
        let mut offsets = Vec::with_capacity(n_src + 1);
        offsets.push(0);
        for _ in 0..n_src {
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        SynapseMask {
            n_src,
            n_dst,
            offsets,
            targets,
        }
    }

    /// Builds a mask from explicit per-source target lists (sorted and deduplicated here).
    pub fn from_rows(n_dst: usize, rows: Vec<Vec<u32>>) -> Self {
        let n_src = rows.len();
        let mut offsets = Vec::with_capacity(n_src + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            assert!(
                row.last().map_or(true, |&j| (j as usize) < n_dst),
                "target out of range"
            );
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        SynapseMask {
            n_src,
            n_dst,
            offsets,
            targets,
        }
    }

    pub fn n_src(&self) -> usize {
        self.n_src
    }

    pub fn n_dst(&self) -> usize {
        self.n_dst
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, src: usize) -> &[u32] {
        &self.targets[self.offsets[src]..self.offsets[src + 1]]
    }

    pub fn row_range(&self, src: usize) -> Range<usize> {
        self.offsets[src]..self.offsets[src + 1]
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn max_fanout(&self) -> usize {
        (0..self.n_src)
            .map(|i| self.offsets[i + 1] - self.offsets[i])
            .max()
            .unwrap_or(0)
    }

    /// Synapse slot of `src -> dst`, if admitted.
    pub fn slot(&self, src: usize, dst: u32) -> Option<usize> {
        let r = self.row_range(src);
        self.targets[r.clone()]
            .binary_search(&dst)
            .ok()
            .map(|k| r.start + k)
    }

    pub fn incoming(&self) -> Incoming {
        let mut counts = vec![0usize; self.n_dst + 1];
        for &j in &self.targets {
            counts[j as usize + 1] += 1;
        }
        for j in 0..self.n_dst {
            counts[j + 1] += counts[j];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut sources = vec![0u32; self.targets.len()];
        let mut slots = vec![0u32; self.targets.len()];
        for i in 0..self.n_src {
            for k in self.row_range(i) {
                let j = self.targets[k] as usize;
                let at = fill[j];
                sources[at] = i as u32;
                slots[at] = k as u32;
                fill[j] += 1;
            }
        }
        Incoming {
            offsets,
            sources,
            slots,
        }
    }
}

/// One weight per admitted synapse, sharing the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseWeights {
    mask: Arc<SynapseMask>,
    values: Vec<f32>,
}

impl SparseWeights {
    pub fn zeros(mask: Arc<SynapseMask>) -> Self {
        let values = vec![0.0; mask.nnz()];
        SparseWeights { mask, values }
    }

    pub fn from_values(mask: Arc<SynapseMask>, values: Vec<f32>) -> Self {
        assert_eq!(mask.nnz(), values.len(), "one weight per synapse");
        SparseWeights { mask, values }
    }

    pub fn mask(&self) -> &Arc<SynapseMask> {
        &self.mask
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn n_src(&self) -> usize {
        self.mask.n_src()
    }

    pub fn n_dst(&self) -> usize {
        self.mask.n_dst()
    }

    pub fn get(&self, src: usize, dst: u32) -> f32 {
        self.mask.slot(src, dst).map_or(0.0, |k| self.values[k])
    }

    /// out += W · S for a spike index list.
    pub fn scatter_add(&self, spikes: &[u32], out: &mut [f32]) {
        let targets = self.mask.targets();
        for &i in spikes {
            for k in self.mask.row_range(i as usize) {
                out[targets[k] as usize] += self.values[k];
            }
        }
    }

    /// (dst, src, weight) triples of the nonzero weights, ordered by dst then src.
    pub fn triples(&self) -> Vec<(u32, u32, f32)> {
        let mut t = Vec::new();
        for i in 0..self.n_src() {
            for k in self.mask.row_range(i) {
                if self.values[k] != 0.0 {
                    t.push((self.mask.targets()[k], i as u32, self.values[k]));
                }
            }
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_mask_has_exact_fanout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = SynapseMask::random(50, 200, 30, &mut rng);
        for i in 0..50 {
            let r = m.row(i);
            assert_eq!(r.len(), 30);
            assert!(r.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(m.max_fanout(), 30);
    }

    #[test]
    fn incoming_is_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = SynapseMask::random(20, 15, 5, &mut rng);
        let inc = m.incoming();
        let mut n = 0;
        for j in 0..15 {
            for p in inc.range(j) {
                let (i, k) = (inc.sources[p] as usize, inc.slots[p] as usize);
                assert_eq!(m.targets()[k] as usize, j);
                assert!(m.row_range(i).contains(&k));
                n += 1;
            }
        }
        assert_eq!(n, m.nnz());
    }

    #[test]
    fn scatter_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mask = Arc::new(SynapseMask::random(12, 9, 4, &mut rng));
        let vals: Vec<f32> = (0..mask.nnz()).map(|k| k as f32 * 0.25 - 3.0).collect();
        let w = SparseWeights::from_values(mask, vals);
        let spikes = [1u32, 4, 7];
        let mut out = vec![0.0; 9];
        w.scatter_add(&spikes, &mut out);
        for j in 0..9u32 {
            let expect: f32 = spikes.iter().map(|&i| w.get(i as usize, j)).sum();
            assert!((out[j as usize] - expect).abs() < 1e-5);
        }
    }
}
