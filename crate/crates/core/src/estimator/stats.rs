//! Integer sufficient statistics shared by the swap search and the merge path.
//!
//! All sums run over ordered off-diagonal pairs and count decorations, so
//! they stay exact under incremental updates.

use super::ShapeMap;

/// Ordered-pair decoration counts per block `(g, h)`, laid out as
/// `(g * k + h) * len + l`, plus group sizes.
pub(crate) struct BlockStats {
    pub k: usize,
    pub len: usize,
    pub sizes: Vec<usize>,
    pub sums: Vec<i64>,
}

impl BlockStats {
    pub fn compute(data: &[u16], n: usize, len: usize, node_labels: &[usize], k: usize) -> Self {
        let mut sums = vec![0i64; k * k * len];
        let mut sizes = vec![0; k];
        for i in 0..n {
            let g = node_labels[i];
            sizes[g] += 1;
            let row = &data[i * n..(i + 1) * n];
            for (j, &x) in row.iter().enumerate() {
                if j != i {
                    sums[(g * k + node_labels[j]) * len + x as usize] += 1;
                }
            }
        }
        Self { k, len, sizes, sums }
    }

    pub fn pair_count(&self, g: usize, h: usize) -> i64 {
        if g == h {
            (self.sizes[g] * self.sizes[g].saturating_sub(1)) as i64
        } else {
            (self.sizes[g] * self.sizes[h]) as i64
        }
    }

    /// Per-shape decoration sums and pair counts under `map`.
    pub fn shape_totals(&self, map: &ShapeMap) -> (Vec<i64>, Vec<i64>) {
        let (k, len) = (self.k, self.len);
        let mut sums = vec![0i64; map.s() * len];
        let mut counts = vec![0i64; map.s()];
        for g in 0..k {
            for h in 0..k {
                let c = map.get(g, h);
                counts[c] += self.pair_count(g, h);
                let src = &self.sums[(g * k + h) * len..(g * k + h + 1) * len];
                sums[c * len..(c + 1) * len]
                    .iter_mut()
                    .zip(src)
                    .for_each(|(d, s)| *d += s);
            }
        }
        (sums, counts)
    }
}

/// `sum_c |S_c|^2 / n_c`, the explained part of the profile identity.
pub(crate) fn explained(sums: &[i64], counts: &[i64], len: usize) -> f64 {
    sums.chunks(len)
        .zip(counts)
        .map(|(row, &m)| row.iter().map(|&v| (v * v) as f64).sum::<f64>() / m as f64)
        .sum()
}

/// Incremental state for balanced label exchanges under a fixed shape map.
///
/// Exchanging the labels of two nodes keeps every group size, hence every
/// shape's pair count, unchanged; only the shape sums move.
pub(crate) struct SwapState<'a> {
    data: &'a [u16],
    n: usize,
    k: usize,
    len: usize,
    map: &'a ShapeMap,
    pub labels: Vec<usize>,
    /// `(i * k + g) * len + l`: neighbours of `i` in group `g` with decoration `l`.
    node_group: Vec<i64>,
    shape_sums: Vec<i64>,
    inv_counts: Vec<f64>,
    explained: f64,
    diff: Vec<i64>,
    delta: Vec<i64>,
    touched: Vec<usize>,
    is_touched: Vec<bool>,
}

impl<'a> SwapState<'a> {
    pub fn new(data: &'a [u16], n: usize, len: usize, labels: Vec<usize>, map: &'a ShapeMap) -> Self {
        let k = map.k();
        let mut node_group = vec![0i64; n * k * len];
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                node_group[(i * k + labels[j]) * len + data[i * n + j] as usize] += 1;
            }
        }
        let stats = BlockStats::compute(data, n, len, &labels, k);
        let (shape_sums, counts) = stats.shape_totals(map);
        let explained = explained(&shape_sums, &counts, len);
        let s = map.s();
        Self {
            data,
            n,
            k,
            len,
            map,
            labels,
            node_group,
            shape_sums,
            inv_counts: counts.iter().map(|&m| 1.0 / m as f64).collect(),
            explained,
            diff: vec![0; k * len],
            delta: vec![0; s * len],
            touched: Vec::with_capacity(2 * k),
            is_touched: vec![false; s],
        }
    }

    pub fn rss(&self) -> f64 {
        let n = self.n as f64;
        n * (n - 1.0) - self.explained
    }

    /// Fills `delta` with the shape-sum change of exchanging `i` and `j`
    /// and returns the resulting RSS decrease.
    pub fn swap_gain(&mut self, i: usize, j: usize) -> f64 {
        // Fixed widths for the common multiplex sizes let the inner loops unroll.
        match self.len {
            2 => self.gain_with::<2>(i, j),
            4 => self.gain_with::<4>(i, j),
            8 => self.gain_with::<8>(i, j),
            _ => self.gain_with::<0>(i, j),
        }
    }

    /// `L == 0` means "use the runtime width".
    #[inline(always)]
    fn gain_with<const L: usize>(&mut self, i: usize, j: usize) -> f64 {
        let k = self.k;
        let len = if L == 0 { self.len } else { L };
        let (a, b) = (self.labels[i], self.labels[j]);
        debug_assert_ne!(a, b);
        let x = self.data[i * self.n + j] as usize;
        let di = &self.node_group[i * k * len..(i + 1) * k * len];
        let dj = &self.node_group[j * k * len..(j + 1) * k * len];
        for ((e, &vi), &vj) in self.diff.iter_mut().zip(di).zip(dj) {
            *e = vj - vi;
        }
        // the (i, j) pair itself stays in block (a, b)
        self.diff[b * len + x] += 1;
        self.diff[a * len + x] -= 1;

        for c in self.touched.drain(..) {
            self.is_touched[c] = false;
        }
        // The first contribution to a shape overwrites its stale delta, so
        // no separate clearing pass is needed.
        let flat = self.map.flat();
        let (row_a, row_b) = (&flat[a * k..(a + 1) * k], &flat[b * k..(b + 1) * k]);
        for (g, (&ca, &cb)) in row_a.iter().zip(row_b).enumerate() {
            if ca == cb {
                continue;
            }
            let e = &self.diff[g * len..(g + 1) * len];
            for (c, sign) in [(ca, 2), (cb, -2)] {
                let d = &mut self.delta[c * len..(c + 1) * len];
                if self.is_touched[c] {
                    d.iter_mut().zip(e).for_each(|(dv, &ev)| *dv += sign * ev);
                } else {
                    self.is_touched[c] = true;
                    self.touched.push(c);
                    d.iter_mut().zip(e).for_each(|(dv, &ev)| *dv = sign * ev);
                }
            }
        }
        let mut gain = 0.0;
        for &c in &self.touched {
            let s = &self.shape_sums[c * len..(c + 1) * len];
            let d = &self.delta[c * len..(c + 1) * len];
            let num: i64 = s.iter().zip(d).map(|(&sv, &dv)| 2 * sv * dv + dv * dv).sum();
            if num != 0 {
                gain += num as f64 * self.inv_counts[c];
            }
        }
        gain
    }

    /// Applies the exchange whose gain was last computed by `swap_gain(i, j)`.
    pub fn apply_swap(&mut self, i: usize, j: usize, gain: f64) {
        let (n, k, len) = (self.n, self.k, self.len);
        let (a, b) = (self.labels[i], self.labels[j]);
        for &c in &self.touched {
            for l in 0..len {
                self.shape_sums[c * len + l] += self.delta[c * len + l];
            }
        }
        self.explained += gain;
        for m in 0..n {
            let base = m * k * len;
            if m != i {
                let xi = self.data[m * n + i] as usize;
                self.node_group[base + a * len + xi] -= 1;
                self.node_group[base + b * len + xi] += 1;
            }
            if m != j {
                let xj = self.data[m * n + j] as usize;
                self.node_group[base + b * len + xj] -= 1;
                self.node_group[base + a * len + xj] += 1;
            }
        }
        self.labels.swap(i, j);
    }
}
