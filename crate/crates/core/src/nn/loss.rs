use crate::error::{Error, Result};
use crate::sampling::DdfSample;
use crate::scalar::Real;

use super::network::Prediction;

/// Logit bound equivalent to clamping the visibility probability to `[1e-7, 1 − 1e-7]`.
pub const BCE_CLAMP: f64 = 16.118_095_550_958_325;

/// `ln(1 + eˣ)` without overflow.
#[inline]
pub fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Supervision for one ray. `depth` is `None` either because the ray misses (`xi = false`)
/// or because its depth is withheld; in both cases only visibility is supervised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T> {
    pub xi: bool,
    pub depth: Option<T>,
}

impl<T: Real> From<&DdfSample<T>> for Target<T> {
    fn from(s: &DdfSample<T>) -> Self {
        Self { xi: s.xi(), depth: s.depth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub l_depth: f64,
    pub l_vis: f64,
    pub l_sym: f64,
    pub total: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LossBreakdown {
    pub fn new(l_depth: f64, l_vis: f64, l_sym: f64, lambda1: f64, lambda2: f64) -> Self {
        Self { l_depth, l_vis, l_sym, total: l_vis + lambda1 * l_depth + lambda2 * l_sym, lambda1, lambda2 }
    }
}

/// Per-row gradients of the total loss.
pub(crate) struct LossGrads<T> {
    pub d_logit: Vec<T>,
    pub d_depth: Vec<T>,
    pub d_pairs: Vec<(T, T)>,
    /// Which side of every `|·|` kink and BCE clamp each term sits on.
    pub pattern: Vec<i8>,
}

#[inline]
fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `L = L_ξ + λ₁·L_D + λ₂·L_s` with `L_D` the mean over all samples of `ξ·|D̂ − D|`, `L_ξ` the
/// mean clamped BCE and `L_s` the mean `|D̂_a − D̂_b|` over pairs (zero without pairs).
pub fn loss<T: Real>(
    preds: &[Prediction<T>],
    targets: &[Target<T>],
    pairs: &[(T, T)],
    lambda1: f64,
    lambda2: f64,
) -> Result<LossBreakdown> {
    Ok(loss_with_grads(preds, targets, pairs, lambda1, lambda2)?.0)
}

pub(crate) fn loss_with_grads<T: Real>(
    preds: &[Prediction<T>],
    targets: &[Target<T>],
    pairs: &[(T, T)],
    lambda1: f64,
    lambda2: f64,
) -> Result<(LossBreakdown, LossGrads<T>)> {
    if preds.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!("{} predictions for {} targets", preds.len(), targets.len())));
    }
    let n = T::lit(preds.len().max(1) as f64);
    let clamp = T::lit(BCE_CLAMP);
    let (l1, l2) = (T::lit(lambda1), T::lit(lambda2));
    let mut l_depth = T::zero();
    let mut l_vis = T::zero();
    let mut d_logit = Vec::with_capacity(preds.len());
    let mut d_depth = Vec::with_capacity(preds.len());
    let mut pattern = Vec::with_capacity(2 * preds.len() + pairs.len());
    for (p, t) in preds.iter().zip(targets) {
        let z = p.xi_logit.max(-clamp).min(clamp);
        let clamped = p.xi_logit.abs() > clamp;
        let (bce, g) = if t.xi { (softplus(-z), sigmoid(z) - T::one()) } else { (softplus(z), sigmoid(z)) };
        l_vis += bce;
        d_logit.push(if clamped { T::zero() } else { g / n });
        pattern.push(if clamped { sign(p.xi_logit).to_i8().unwrap_or(0) * 2 } else { 0 });
        match (t.xi, t.depth) {
            (true, Some(d)) => {
                let diff = p.depth - d;
                l_depth += diff.abs();
                d_depth.push(l1 * sign(diff) / n);
                pattern.push(sign(diff).to_i8().unwrap_or(0));
            }
            _ => d_depth.push(T::zero()),
        }
    }
    let np = T::lit(pairs.len().max(1) as f64);
    let mut l_sym = T::zero();
    let mut d_pairs = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let diff = a - b;
        l_sym += diff.abs();
        let g = l2 * sign(diff) / np;
        d_pairs.push((g, -g));
        pattern.push(sign(diff).to_i8().unwrap_or(0));
    }
    let f = |x: T, d: T| (x / d).to_f64_lossy();
    let breakdown = LossBreakdown::new(f(l_depth, n), f(l_vis, n), f(l_sym, np), lambda1, lambda2);
    Ok((breakdown, LossGrads { d_logit, d_depth, d_pairs, pattern }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(l: f64, d: f64) -> Prediction<f64> {
        Prediction { xi_logit: l, depth: d }
    }

    #[test]
    fn invisible_samples_have_no_depth_loss() {
        let t = vec![Target { xi: false, depth: None }; 3];
        let p = vec![pred(0.0, 5.0), pred(1.0, 0.0), pred(-1.0, 2.0)];
        let l = loss(&p, &t, &[], 5.0, 0.5).unwrap();
        assert_eq!(l.l_depth, 0.0);
        assert_eq!(l.l_sym, 0.0);
    }

    #[test]
    fn bce_at_half() {
        let l = loss(&[pred(0.0, 1.0)], &[Target { xi: true, depth: Some(1.0) }], &[], 5.0, 0.5).unwrap();
        assert!((l.l_vis - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(l.l_depth, 0.0);
    }

    #[test]
    fn total_formula() {
        let l = LossBreakdown::new(0.2, 0.1, 0.4, 5.0, 0.5);
        assert!((l.total - 1.3).abs() < 1e-12);
    }

    #[test]
    fn clamp_bounds_bce() {
        let l = loss(&[pred(-100.0, 0.0)], &[Target { xi: true, depth: None }], &[], 1.0, 1.0).unwrap();
        assert!((l.l_vis - (-(1e-7f64).ln())).abs() < 1e-6);
        let (_, g) = loss_with_grads(&[pred(-100.0, 0.0)], &[Target { xi: true, depth: None }], &[], 1.0, 1.0).unwrap();
        assert_eq!(g.d_logit, vec![0.0]);
    }

    #[test]
    fn equal_pairs_have_zero_gradient() {
        let (l, g) = loss_with_grads::<f64>(&[], &[], &[(0.3, 0.3), (1.0, 0.5)], 5.0, 0.5).unwrap();
        assert!((l.l_sym - 0.25).abs() < 1e-15);
        assert_eq!(g.d_pairs[0], (0.0, 0.0));
        assert_eq!(g.d_pairs[1], (0.25, -0.25));
    }

    #[test]
    fn withheld_depth_is_not_supervised() {
        let (l, g) = loss_with_grads(&[pred(2.0, 3.0)], &[Target { xi: true, depth: None }], &[], 5.0, 0.0).unwrap();
        assert_eq!(l.l_depth, 0.0);
        assert_eq!(g.d_depth, vec![0.0]);
        assert!(l.l_vis > 0.0);
    }

    #[test]
    fn softplus_and_sigmoid_are_stable() {
        assert_eq!(softplus(1000.0f64), 1000.0);
        assert_eq!(softplus(-1000.0f64), 0.0);
        assert!((softplus(0.0f64) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert_eq!(sigmoid(1000.0f32), 1.0);
    }
}
