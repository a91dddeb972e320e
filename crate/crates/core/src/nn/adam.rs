use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adam with bias correction; one moment pair per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Array2<T>>,
    v: Vec<Array2<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &[&Array2<T>], lr: f64) -> Self {
        let zeros = || params.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
        Self { step: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: zeros(), v: zeros() }
    }

    pub fn update(&mut self, params: Vec<&mut Array2<T>>, grads: &[Array2<T>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch("parameter, gradient and moment counts differ".into()));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.dim() != g.dim() || p.dim() != m.dim() {
                return Err(Error::DimensionMismatch(format!("shape {:?} vs {:?}", p.dim(), g.dim())));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (T::lit(self.beta1), T::lit(self.beta2));
        let c1 = T::one() - T::lit(self.beta1.powi(t));
        let c2 = T::one() - T::lit(self.beta2.powi(t));
        let (lr, eps) = (T::lit(self.lr), T::lit(self.eps));
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (T::one() - b1) * g;
                *v = b2 * *v + (T::one() - b2) * g * g;
                let mh = *m / c1;
                let vh = *v / c2;
                *p -= lr * mh / (vh.sqrt() + eps);
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = array![[1.0f64, -2.0]];
        let mut adam = AdamState::new(&[&p], 1e-3);
        adam.update(vec![&mut p], &[array![[0.0, 0.0]]]).unwrap();
        assert_eq!(p, array![[1.0, -2.0]]);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let mut p = array![[0.0f64, 0.0, 0.0]];
        let mut adam = AdamState::new(&[&p], 1e-4);
        adam.update(vec![&mut p], &[array![[3.0, -0.5, 100.0]]]).unwrap();
        for (x, s) in p.iter().zip([-1.0, 1.0, -1.0]) {
            assert!((x - s * 1e-4).abs() < 1e-10);
        }
    }

    #[test]
    fn shapes_are_checked() {
        let mut p = array![[0.0f64, 0.0]];
        let mut adam = AdamState::new(&[&p], 1e-4);
        assert!(adam.update(vec![&mut p], &[array![[1.0]]]).is_err());
    }
}
