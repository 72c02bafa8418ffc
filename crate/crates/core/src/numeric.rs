//! Small numerical kernels shared across modules.

use nalgebra::DMatrix;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval.
///
/// Returns `None` when the tolerance cannot be met within the subdivision
/// budget or the integrand produces non-finite values.
pub(crate) fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    let (val, err) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, val, err)];
    let mut total = val;
    let mut total_err = err;
    for _ in 0..2000 {
        if !total.is_finite() {
            return None;
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Some(total);
        }
        // Split the interval carrying the largest error estimate.
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))?;
        let (lo, hi, v, e) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let left = gk15(&mut f, lo, mid);
        let right = gk15(&mut f, mid, hi);
        total += left.0 + right.0 - v;
        total_err += left.1 + right.1 - e;
        intervals.push((lo, mid, left.0, left.1));
        intervals.push((mid, hi, right.0, right.1));
    }
    None
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant.
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let x = a / 2f64.powi(squarings as i32);

    const Q: usize = 6;
    let mut c = 1.0;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut num = DMatrix::<f64>::identity(n, n);
    let mut den = DMatrix::<f64>::identity(n, n);
    for k in 1..=Q {
        c *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        term = &term * &x;
        num += &term * c;
        if k % 2 == 0 {
            den += &term * c;
        } else {
            den -= &term * c;
        }
    }
    let mut r = den.lu().solve(&num).expect("Padé denominator is well conditioned after scaling");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Solves `A P + P Aᵀ + G = 0` for `P`.
pub(crate) fn lyapunov(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    // Column-major vec: vec(AP) = (I ⊗ A) vec(P), vec(PAᵀ) = (A ⊗ I) vec(P).
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, g.as_slice());
    let sol = k.lu().solve(&rhs)?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Some((&p + p.transpose()) * 0.5)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomials_and_gaussian() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12, 0.0).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
        let g = integrate(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-12, 0.0).unwrap();
        assert!((g - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn expm_matches_scalar_and_rotation() {
        let a = DMatrix::from_row_slice(1, 1, &[-3.7]);
        assert!((expm(&a)[(0, 0)] - (-3.7f64).exp()).abs() < 1e-14);
        let th = 2.3;
        let r = expm(&DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]));
        assert!((r[(0, 0)] - th.cos()).abs() < 1e-13);
        assert!((r[(1, 0)] - th.sin()).abs() < 1e-13);
    }

    #[test]
    fn lyapunov_scalar() {
        let a = DMatrix::from_row_slice(1, 1, &[-0.5]);
        let g = DMatrix::from_row_slice(1, 1, &[0.25]);
        let p = lyapunov(&a, &g).unwrap();
        assert!((p[(0, 0)] - 0.25).abs() < 1e-14);
    }
}
