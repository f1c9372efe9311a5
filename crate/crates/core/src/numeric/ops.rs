//! Forward operations on plain slices.
//!
//! These are the kernels the tape records; inference paths call them
//! directly so that taped and untaped forwards agree bit for bit.

use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Below this L2 norm a vector is left unnormalized.
pub const NORM_EPS: f64 = 1e-12;

/// `W x (+ b)` for a row-major `out x in` weight slice.
pub fn affine(w: &[f64], out: usize, b: Option<&[f64]>, x: &[f64]) -> Result<Vec<f64>> {
    let inp = x.len();
    if w.len() != out * inp {
        return Err(Error::Dimension(format!(
            "weight has {} entries, expected {out}x{inp}",
            w.len()
        )));
    }
    if let Some(b) = b {
        if b.len() != out {
            return Err(Error::Dimension(format!("bias length {} != {out}", b.len())));
        }
    }
    let mut y = Vec::with_capacity(out);
    for i in 0..out {
        let row = &w[i * inp..(i + 1) * inp];
        let mut acc = b.map_or(0.0, |b| b[i]);
        for (wij, xj) in row.iter().zip(x) {
            acc += wij * xj;
        }
        y.push(acc);
    }
    Ok(y)
}

/// `W x + b` with `W` of shape `[out, in]`.
pub fn linear(w: &Tensor, b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    match w.shape() {
        [out, inp] if *inp == x.len() => affine(w.values(), *out, Some(b), x),
        shape => Err(Error::Dimension(format!(
            "weight shape {shape:?} does not accept input of length {}",
            x.len()
        ))),
    }
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

pub fn mean_vectors(xs: &[&[f64]]) -> Result<Vec<f64>> {
    let first = xs
        .first()
        .ok_or_else(|| Error::Contract("mean of an empty list".into()))?;
    let mut acc = vec![0.0; first.len()];
    for x in xs {
        if x.len() != acc.len() {
            return Err(Error::Dimension("mean over vectors of different lengths".into()));
        }
        for (a, v) in acc.iter_mut().zip(x.iter()) {
            *a += v;
        }
    }
    let inv = 1.0 / xs.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(acc)
}

pub fn weighted_sum(pairs: &[(f64, &[f64])]) -> Result<Vec<f64>> {
    let (_, first) = pairs
        .first()
        .ok_or_else(|| Error::Contract("weighted sum of an empty list".into()))?;
    let mut acc = vec![0.0; first.len()];
    for (w, x) in pairs {
        if x.len() != acc.len() {
            return Err(Error::Dimension("weighted sum over vectors of different lengths".into()));
        }
        for (a, v) in acc.iter_mut().zip(x.iter()) {
            *a += w * v;
        }
    }
    Ok(acc)
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn l2_normalize(x: &[f64]) -> Vec<f64> {
    let n = l2_norm(x);
    if n > NORM_EPS {
        x.iter().map(|v| v / n).collect()
    } else {
        x.to_vec()
    }
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| sigmoid_scalar(v)).collect()
}

/// Inverted-dropout mask: each entry is 0 with probability `ratio`,
/// otherwise `1 / (1 - ratio)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, ratio: f64, rng: &mut R) -> Vec<f64> {
    let keep = 1.0 / (1.0 - ratio);
    (0..len)
        .map(|_| if rng.gen::<f64>() < ratio { 0.0 } else { keep })
        .collect()
}

pub fn dropout<R: Rng + ?Sized>(x: &[f64], ratio: f64, rng: &mut R, training: bool) -> Vec<f64> {
    if !training || ratio <= 0.0 {
        return x.to_vec();
    }
    dropout_mask(x.len(), ratio, rng)
        .iter()
        .zip(x)
        .map(|(m, v)| m * v)
        .collect()
}

/// `-ln sigmoid(pos - neg)`, computed without overflow.
pub fn bpr_pair_loss(score_pos: f64, score_neg: f64) -> f64 {
    let z = score_pos - score_neg;
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Gradient of [`bpr_pair_loss`] with respect to `(score_pos, score_neg)`.
pub fn bpr_pair_grad(score_pos: f64, score_neg: f64) -> (f64, f64) {
    let g = sigmoid_scalar(score_neg - score_pos);
    (-g, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn linear_identity_and_zero() {
        let x = [1.5, -2.0, 0.25];
        let eye = Tensor::from_fn(vec![3, 3], |k| if k / 3 == k % 3 { 1.0 } else { 0.0 });
        assert_eq!(linear(&eye, &[0.0; 3], &x).unwrap(), x.to_vec());
        let zero = Tensor::zeros(vec![3, 3]);
        assert_eq!(linear(&zero, &[0.0; 3], &x).unwrap(), vec![0.0; 3]);
        assert!(matches!(linear(&zero, &[0.0; 3], &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn concat_cases() {
        assert_eq!(concat(&[1.0], &[2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(concat(&[], &[4.0]), vec![4.0]);
    }

    #[test]
    fn mean_cases() {
        assert_eq!(mean_vectors(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(mean_vectors(&[&[3.0, -1.0]]).unwrap(), vec![3.0, -1.0]);
        assert!(matches!(mean_vectors(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn mean_matches_naive_loop() {
        use rand::Rng;
        let mut rng = stream(5, &[]);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let got = mean_vectors(&refs).unwrap();
        for j in 0..7 {
            let mut s = 0.0;
            for x in &xs {
                s += x[j];
            }
            assert!((got[j] - s / 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_sum_cases() {
        assert_eq!(weighted_sum(&[(2.0, &[1.0, 0.0]), (1.0, &[0.0, 1.0])]).unwrap(), vec![2.0, 1.0]);
        assert_eq!(weighted_sum(&[(1.0, &[1.0, 2.0]), (1.0, &[3.0, 4.0])]).unwrap(), vec![4.0, 6.0]);
        assert!(weighted_sum(&[]).is_err());
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(l2_normalize(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(l2_normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn activations() {
        assert_eq!(sigmoid(&[0.0]), vec![0.5]);
        assert_eq!(relu(&[-1.0, 2.0]), vec![0.0, 2.0]);
        assert!(sigmoid_scalar(-800.0).is_finite() && sigmoid_scalar(800.0) == 1.0);
    }

    #[test]
    fn dropout_identity_cases() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(dropout(&x, 0.0, &mut stream(1, &[]), true), x.to_vec());
        assert_eq!(dropout(&x, 0.5, &mut stream(1, &[]), false), x.to_vec());
    }

    #[test]
    fn dropout_preserves_expectation() {
        let mut rng = stream(17, &[]);
        let x = vec![0.7; 100_000];
        let y = dropout(&x, 0.1, &mut rng, true);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean - 0.7).abs() / 0.7 < 0.01, "mean {mean}");
    }

    #[test]
    fn bpr_values() {
        assert!((bpr_pair_loss(1.3, 1.3) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bpr_pair_loss(20.0, 0.0) < 1e-8);
        assert!(bpr_pair_loss(-800.0, 0.0).is_finite());
        let mut last = f64::INFINITY;
        for d in -20..=20 {
            let l = bpr_pair_loss(d as f64, 0.0);
            assert!(l < last);
            last = l;
        }
    }

    #[test]
    fn bpr_gradient_finite_difference() {
        let (gp, gn) = bpr_pair_grad(0.5, 0.2);
        let fp = central_diff(|p| bpr_pair_loss(p, 0.2), 0.5, 1e-5);
        let fn_ = central_diff(|n| bpr_pair_loss(0.5, n), 0.2, 1e-5);
        assert!((gp - fp).abs() / fp.abs() < 1e-6);
        assert!((gn - fn_).abs() / fn_.abs() < 1e-6);
    }
}
