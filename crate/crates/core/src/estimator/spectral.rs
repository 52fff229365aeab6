//! Spectral starting point for the swap search.
//!
//! Summing the one-hot layers gives the all-ones matrix, so the embedding
//! uses the decoration Gram matrix `G = sum_l X^(l) X^(l)^T` instead:
//! `G_ij` counts the third nodes `m` on which `i` and `j` see the same
//! decoration. Nodes are ordered by the eigenvector of the second-largest
//! eigenvalue and cut into contiguous balanced groups.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::decoration::OneHotTensor;
use crate::error::{Error, Result};

pub(crate) fn gram_matrix(data: &[u16], n: usize) -> DMatrix<f64> {
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        gram[(i, i)] = (n - 1) as f64;
        let ri = &data[i * n..(i + 1) * n];
        for j in i + 1..n {
            let rj = &data[j * n..(j + 1) * n];
            let same = ri.iter().zip(rj).filter(|(a, b)| a == b).count();
            // columns i and j hold the pair (i, j) and the zeroed diagonal
            let adjust =
                usize::from(ri[i] == rj[i]) + usize::from(ri[j] == rj[j]);
            let v = (same - adjust) as f64;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    gram
}

/// Node order along the second eigenvector of the decoration Gram matrix.
///
/// The eigenvector sign is fixed so that its largest-magnitude entry (lowest
/// index on ties) is positive; ties in the sort fall back to node index.
pub(crate) fn spectral_order_from(data: &[u16], n: usize) -> Vec<usize> {
    if n < 3 {
        return (0..n).collect();
    }
    let eig = SymmetricEigen::new(gram_matrix(data, n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut v: Vec<f64> = eig.eigenvectors.column(idx[1]).iter().copied().collect();
    let pivot = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    order
}

pub fn spectral_order(x: &OneHotTensor) -> Result<Vec<usize>> {
    Ok(spectral_order_from(&x.labels()?, x.n()))
}

/// Cuts an ordering into `k` contiguous groups; the first `n mod k` groups
/// get `ceil(n/k)` nodes, the rest `floor(n/k)`.
pub fn balanced_cut(order: &[usize], k: usize) -> Result<Vec<usize>> {
    let n = order.len();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let (base, extra) = (n / k, n % k);
    let mut labels = vec![0; n];
    let mut pos = 0;
    for g in 0..k {
        let size = base + usize::from(g < extra);
        for &node in &order[pos..pos + size] {
            labels[node] = g;
        }
        pos += size;
    }
    Ok(labels)
}

/// Balanced spectral labelling. Deterministic, so it takes no seed.
pub fn spectral_init(x: &OneHotTensor, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > x.n() {
        return Err(Error::KTooLarge { k, n: x.n() });
    }
    if k == 1 {
        return Ok(vec![0; x.n()]);
    }
    balanced_cut(&spectral_order(x)?, k)
}
