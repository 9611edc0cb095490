use super::Matrix;
use crate::error::{input_err, Result};

// Padé coefficients b_0..b_13 for the degree-13 approximant.
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the unscaled [13/13] approximant meets unit
/// roundoff in backward error.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a [13/13] Padé
/// approximant.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(input_err!("expm needs a square matrix, got {}x{}", m.rows(), m.cols()));
    }
    m.ensure_finite("matrix")?;
    let n = m.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = m.norm1();
    let s = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)) as i32
    } else {
        0
    };
    let a = m.scale(libm::pow(2.0, -s as f64));
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &(&a6.scale(b[13]) + &a4.scale(b[11])) + &a2.scale(b[9]);
    let u = &a
        * &(&(&(&(&a6 * &inner_u) + &a6.scale(b[7])) + &a4.scale(b[5])) + &(&a2.scale(b[3]) + &id.scale(b[1])));
    let inner_v = &(&a6.scale(b[12]) + &a4.scale(b[10])) + &a2.scale(b[8]);
    let v = &(&(&(&a6 * &inner_v) + &a6.scale(b[6])) + &a4.scale(b[4])) + &(&a2.scale(b[2]) + &id.scale(b[0]));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gives_identity() {
        assert!(expm(&Matrix::zeros(3, 3)).unwrap().approx_eq(&Matrix::identity(3), 0.0));
    }

    #[test]
    fn diagonal_case() {
        let e = expm(&Matrix::diag(&[-8.0, 0.0])).unwrap();
        assert!((e[(0, 0)] - libm::exp(-8.0)).abs() < 1e-15);
        assert!((e[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(e[(0, 1)].abs() < 1e-16 && e[(1, 0)].abs() < 1e-16);
    }

    #[test]
    fn rotation_generator() {
        let t = 2.5;
        let e = expm(&Matrix::from_rows(&[[0.0, t], [-t, 0.0]])).unwrap();
        let want = Matrix::from_rows(&[[libm::cos(t), libm::sin(t)], [-libm::sin(t), libm::cos(t)]]);
        assert!(e.approx_eq(&want, 1e-14));
    }

    #[test]
    fn large_norm_is_scaled() {
        let m = Matrix::from_rows(&[[-30.0, 10.0], [0.0, -20.0]]);
        let e = expm(&m).unwrap();
        // upper triangular: off-diagonal is 10 (e^{-20} - e^{-30}) / 10
        let want01 = libm::exp(-20.0) - libm::exp(-30.0);
        assert!((e[(0, 1)] - want01).abs() < 1e-14 * want01.abs().max(1e-300) + 1e-24);
        assert!((e[(0, 0)] - libm::exp(-30.0)).abs() < 1e-24);
    }
}
