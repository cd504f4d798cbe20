use faer::Mat;
use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients `c_0..=c_D` of `det(I − ζT) = Σ c_m ζ^m` from
/// `traces[k-1] = Tr(T^k)`, via `c_0 = 1`, `m c_m = −Σ_{k=1}^m Tr(T^k) c_{m−k}`.
pub fn fredholm(traces: &[Complex64], degree: usize) -> Vec<Complex64> {
    assert!(traces.len() >= degree, "need traces up to n = {degree}");
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=degree {
        let s: Complex64 = (1..=m).map(|k| traces[k - 1] * c[m - k]).sum();
        c.push(-s / m as f64);
    }
    c
}

/// Roots of `Σ c_m ζ^m` as eigenvalues of the companion matrix, sorted by
/// increasing modulus. Trailing coefficients below `trim·max|c_m|` are
/// dropped first.
pub fn polynomial_roots(coeffs: &[Complex64], trim: f64) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg].norm() <= trim * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    // companion of the monic polynomial ζ^deg + Σ (c_m/lead) ζ^m
    let m = Mat::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    let mut roots = m
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_traces_give_one_minus_zeta() {
        let traces = vec![Complex64::new(1.0, 0.0); 10];
        let c = fredholm(&traces, 10);
        assert_eq!(c[0], Complex64::new(1.0, 0.0));
        assert!((c[1] + 1.0).norm() < 1e-15);
        assert!(c[2..].iter().all(|x| x.norm() < 1e-15));
        let roots = polynomial_roots(&c, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn diagonal_matrix_oracle() {
        // det(I − ζ diag(λ)) = Π (1 − ζλ_i)
        let lambdas = [
            Complex64::new(0.7, 0.1),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.05, -0.4),
        ];
        let traces: Vec<Complex64> = (1..=3)
            .map(|n| lambdas.iter().map(|l| l.powu(n)).sum())
            .collect();
        let c = fredholm(&traces, 3);
        let mut expected = vec![Complex64::new(1.0, 0.0)];
        for l in &lambdas {
            let mut next = vec![Complex64::default(); expected.len() + 1];
            for (i, e) in expected.iter().enumerate() {
                next[i] += e;
                next[i + 1] -= e * l;
            }
            expected = next;
        }
        for (a, b) in c.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-14);
        }
        let roots = polynomial_roots(&c, 1e-14).unwrap();
        for l in &lambdas {
            assert!(roots.iter().any(|z| (z.inv() - l).norm() < 1e-10));
        }
    }
}
