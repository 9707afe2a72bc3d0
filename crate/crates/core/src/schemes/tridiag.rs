//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solve `A x = rhs` for a tridiagonal `A` by forward elimination and back
/// substitution.
///
/// * `lower`: sub-diagonal, same length as `diag` (`lower[0]` unused)
/// * `diag`: main diagonal
/// * `upper`: super-diagonal, same length as `diag` (`upper[m-1]` unused)
///
/// Errors with the offending row if a pivot vanishes.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    if m == 0 {
        return Err(Error::InsufficientData("empty tridiagonal system".into()));
    }
    for (name, v) in [("lower", lower), ("upper", upper), ("rhs", rhs)] {
        if v.len() != m {
            return Err(Error::LengthMismatch {
                what: match name {
                    "lower" => "tridiagonal lower band",
                    "upper" => "tridiagonal upper band",
                    _ => "tridiagonal rhs",
                },
                expected: m,
                got: v.len(),
            });
        }
    }

    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];

    if diag[0] == 0.0 {
        return Err(Error::SingularSystem(0));
    }
    c_prime[0] = upper[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - lower[i] * c_prime[i - 1];
        if denom == 0.0 {
            return Err(Error::SingularSystem(i));
        }
        if i + 1 < m {
            c_prime[i] = upper[i] / denom;
        }
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / denom;
    }

    let mut x = d_prime;
    for i in (0..m - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    Ok(x)
}
