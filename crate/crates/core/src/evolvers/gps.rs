//! Taylor evolution matrix of generalized phase space: the truncated
//! exponential that advances the kinematic state `(r, v, dv/dt, ...)`.

use crate::error::{Error, Result};

/// Upper-triangular `M_ij = t^(j-i) / (j-i)!`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorEvolutionMatrix {
    pub order: usize,
    pub t: f64,
    pub entries: Vec<Vec<f64>>,
}

pub fn gps_matrix(order: usize, t: f64) -> Result<TaylorEvolutionMatrix> {
    if order < 1 {
        return Err(Error::InvalidParameter("GPS order must be at least 1".into()));
    }
    let mut entries = vec![vec![0.0; order]; order];
    for (i, row) in entries.iter_mut().enumerate() {
        let mut term = 1.0;
        row[i] = 1.0;
        for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
            term *= t / (j - i) as f64;
            *slot = term;
        }
    }
    Ok(TaylorEvolutionMatrix { order, t, entries })
}

impl TaylorEvolutionMatrix {
    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.order;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        det
    }

    pub fn matmul(&self, other: &TaylorEvolutionMatrix) -> Result<Vec<Vec<f64>>> {
        if self.order != other.order {
            return Err(Error::ShapeMismatch {
                expected: self.order,
                actual: other.order,
            });
        }
        let n = self.order;
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.entries[i][k] * other.entries[k][j]).sum())
                    .collect()
            })
            .collect())
    }
}

/// `M xi0`, where `xi0` lists the position and its successive time derivatives.
pub fn gps_apply(m: &TaylorEvolutionMatrix, xi0: &[f64]) -> Result<Vec<f64>> {
    if xi0.len() != m.order {
        return Err(Error::ShapeMismatch {
            expected: m.order,
            actual: xi0.len(),
        });
    }
    Ok(m.entries
        .iter()
        .map(|row| row.iter().zip(xi0).map(|(a, b)| a * b).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_and_accelerated_motion() {
        let m = gps_matrix(2, 1.5).unwrap();
        assert_eq!(gps_apply(&m, &[2.0, 3.0]).unwrap(), vec![6.5, 3.0]);
        let m = gps_matrix(3, 2.0).unwrap();
        assert_eq!(gps_apply(&m, &[1.0, -1.0, 0.5]).unwrap(), vec![1.0 - 2.0 + 1.0, -1.0 + 1.0, 0.5]);
        assert!(gps_matrix(0, 1.0).is_err());
        assert!(gps_apply(&m, &[1.0]).is_err());
    }

    #[test]
    fn determinant_is_exactly_one() {
        for n in 1..=12 {
            for t in [-3.7, 0.0, 0.25, 1.0, 9.5] {
                assert_eq!(gps_matrix(n, t).unwrap().det(), 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn group_law(n in 1usize..=12, t1 in -1.0..1.0f64, t2 in -1.0..1.0f64) {
            let p = gps_matrix(n, t1).unwrap().matmul(&gps_matrix(n, t2).unwrap()).unwrap();
            let s = gps_matrix(n, t1 + t2).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((p[i][j] - s.entries[i][j]).abs() <= 1e-12);
                }
            }
        }
    }
}
