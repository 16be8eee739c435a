//! Sorted symmetric eigendecomposition helper.

use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a real symmetric matrix with eigenvalues in
/// ascending order. Each eigenvector is normalized and sign-fixed so that
/// its largest-magnitude entry is positive (ties broken by lowest index).
pub fn sorted_symmetric(matrix: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let se = matrix.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (m, &k) in order.iter().enumerate() {
        values[m] = se.eigenvalues[k];
        let mut col = se.eigenvectors.column(k).clone_owned();
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(m, &col);
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn sorted_eigenvalues(matrix: &DMatrix<f64>) -> DVector<f64> {
    let mut v: Vec<f64> = matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DVector::from_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let (vals, vecs) = sorted_symmetric(&m);
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(vals[1], 3.0, max_relative = 1e-14);
        // com mode (1,1)/sqrt(2), sign-fixed positive
        assert!(vecs[(0, 0)] > 0.0 && vecs[(1, 0)] > 0.0);
        // reconstruction
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((rec - m).abs().max() < 1e-14);
    }

    #[test]
    fn ascending_on_random_symmetric() {
        let n = 12;
        let mut m = DMatrix::zeros(n, n);
        // deterministic pseudo-random symmetric fill
        let mut s = 1u64;
        for i in 0..n {
            for j in 0..=i {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        let (vals, vecs) = sorted_symmetric(&m);
        for k in 1..n {
            assert!(vals[k] >= vals[k - 1]);
        }
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::identity(n, n)).abs().max() < 1e-12);
    }
}
