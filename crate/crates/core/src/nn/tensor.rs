use ndarray::{Array2, ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense tensor with finite entries; the interchange type for parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::DimensionMismatch(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tensor contains non-finite values".into()));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_array(self) -> ArrayD<T> {
        ArrayD::from_shape_vec(IxDyn(&self.shape), self.data).expect("length checked")
    }

    pub fn to_matrix(&self) -> Result<Array2<T>> {
        match *self.shape.as_slice() {
            [r, c] => Ok(Array2::from_shape_vec((r, c), self.data.clone()).expect("length checked")),
            _ => Err(Error::DimensionMismatch(format!("expected a matrix, got shape {:?}", self.shape))),
        }
    }
}

impl<T: Real> From<&Array2<T>> for Tensor<T> {
    fn from(a: &Array2<T>) -> Self {
        Self { shape: a.shape().to_vec(), data: a.iter().copied().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_values() {
        assert!(Tensor::new(vec![2, 3], vec![0.0f32; 5]).is_err());
        assert!(Tensor::new(vec![1], vec![f64::NAN]).is_err());
        let t = Tensor::new(vec![2, 2], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let m = t.to_matrix().unwrap();
        assert_eq!(m[[1, 0]], 3.0);
        assert_eq!(Tensor::from(&m), t);
        assert_eq!(t.clone().into_array().ndim(), 2);
    }
}
