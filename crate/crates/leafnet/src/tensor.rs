//! Dense row-major tensors of rank 1 to 4.
//!
//! Rank-4 tensors use the semantic axis order (batch N, height H, width W,
//! channels C); the innermost axis varies fastest in memory.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dimensions of a tensor. Every dimension is at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 {
            return Err(Error::shape(format!(
                "rank must be 1..=4, got {}",
                dims.len()
            )));
        }
        let mut count: u64 = 1;
        for &d in dims {
            if d == 0 {
                return Err(Error::shape("zero-sized dimension"));
            }
            count = count
                .checked_mul(d as u64)
                .ok_or_else(|| Error::shape("element count overflows u64"))?;
        }
        Ok(Shape {
            dims: dims.to_vec(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // dims are all >= 1
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Macro-free convenience constructor used throughout the crate and tests.
pub fn shape(dims: &[usize]) -> Shape {
    Shape::new(dims).expect("valid shape")
}

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// Tensor with every element equal to `fill`.
    pub fn full(shape: &[usize], fill: T) -> Result<Self> {
        let shape = Shape::new(shape)?;
        let len = shape.len();
        Ok(Tensor {
            shape,
            data: vec![fill; len],
        })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::full(shape, T::zero())
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let shape = Shape::new(shape)?;
        if shape.len() != data.len() {
            return Err(Error::shape(format!(
                "shape {} wants {} elements, got {}",
                shape,
                shape.len(),
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Reinterprets the buffer under a new shape with the same element count.
    pub fn reshape(self, dims: &[usize]) -> Result<Self> {
        let new_shape = Shape::new(dims)?;
        if new_shape.len() != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {} ({} elems) to {} ({} elems)",
                self.shape,
                self.data.len(),
                new_shape,
                new_shape.len()
            )));
        }
        Ok(Tensor {
            shape: new_shape,
            data: self.data,
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Converts element-wise between scalar widths (through f64).
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }
}

/// True iff shapes match and `|a_i - b_i| <= atol + rtol * |b_i|` everywhere.
pub fn approx_equal<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, rtol: T, atol: T) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    a.data()
        .iter()
        .zip(b.data())
        .all(|(&x, &y)| (x - y).abs() <= atol + rtol * y.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_fills_every_element() {
        let t = Tensor::<f32>::full(&[2, 2], 0.0).unwrap();
        assert_eq!(t.data(), &[0.0; 4]);

        let t = Tensor::<f32>::full(&[1, 180, 180, 3], 0.5).unwrap();
        assert_eq!(t.len(), 97_200);
        assert!(t.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(matches!(
            Tensor::<f32>::full(&[0, 1], 0.0),
            Err(Error::Shape(_))
        ));
        assert!(matches!(Shape::new(&[]), Err(Error::Shape(_))));
        assert!(matches!(Shape::new(&[1, 2, 3, 4, 5]), Err(Error::Shape(_))));
    }

    #[test]
    fn reshape_preserves_element_count() {
        let t = Tensor::<f32>::from_vec(&[2, 3], (0..6).map(|v| v as f32).collect()).unwrap();
        let r = t.clone().reshape(&[6]).unwrap();
        assert_eq!(r.data(), t.data());
        assert!(t.reshape(&[5]).is_err());
    }

    #[test]
    fn approx_equal_contract() {
        let x = Tensor::<f64>::from_vec(&[2], vec![1.0, -2.0]).unwrap();
        assert!(approx_equal(&x, &x, 0.0, 0.0));

        let a = Tensor::<f64>::from_vec(&[1], vec![1.0]).unwrap();
        let b = Tensor::<f64>::from_vec(&[1], vec![1.0001]).unwrap();
        assert!(approx_equal(&a, &b, 1e-3, 0.0));
        assert!(!approx_equal(&a, &b, 1e-6, 0.0));

        let c = Tensor::<f64>::from_vec(&[1, 1], vec![1.0]).unwrap();
        assert!(!approx_equal(&a, &c, 1.0, 1.0), "shape mismatch is false");
    }

    #[test]
    fn approx_equal_symmetric_with_zero_rtol() {
        let a = Tensor::<f64>::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        let b = Tensor::<f64>::from_vec(&[3], vec![1.1, 1.9, 3.05]).unwrap();
        assert_eq!(
            approx_equal(&a, &b, 0.0, 0.2),
            approx_equal(&b, &a, 0.0, 0.2)
        );
    }
}
