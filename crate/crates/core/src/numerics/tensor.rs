use crate::error::{Error, Result};

/// Dense row-major array of rank 1 to 4.
///
/// Values are `f64` in memory. Files store `f32`, see [`super::io`].
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub const MAX_RANK: usize = 4;

    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > Self::MAX_RANK {
            return Err(Error::shape(format!("rank must be 1..={}, got {}", Self::MAX_RANK, shape.len())));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::shape(format!("shape {shape:?} holds {expected} values, got {}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        assert!(!shape.is_empty() && shape.len() <= Self::MAX_RANK);
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "elementwise shapes differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        let d = self.zip_with(other, |a, b| (a - b).abs())?;
        Ok(d.data.into_iter().fold(0.0, f64::max))
    }

    /// Dimensions of a rank-3 `H×W×C` map.
    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [h, w, c] => Ok((h, w, c)),
            _ => Err(Error::shape(format!("expected an H×W×C tensor, got shape {:?}", self.shape))),
        }
    }

    /// Dimensions of a rank-2 `H×W` map.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [h, w] => Ok((h, w)),
            _ => Err(Error::shape(format!("expected an H×W tensor, got shape {:?}", self.shape))),
        }
    }

    #[inline]
    pub fn at2(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.shape[1] + x]
    }

    #[inline]
    pub fn at3(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.shape[1] + x) * self.shape[2] + c]
    }

    #[inline]
    pub fn at4(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let s = &self.shape;
        self.data[((a * s[1] + b) * s[2] + c) * s[3] + d]
    }

    /// Channel `c` of an `H×W×C` map as an `H×W` tensor.
    pub fn channel(&self, c: usize) -> Result<Tensor> {
        let (h, w, cs) = self.dims3()?;
        if c >= cs {
            return Err(Error::shape(format!("channel {c} out of {cs}")));
        }
        let data = (0..h * w).map(|i| self.data[i * cs + c]).collect();
        Tensor::new(vec![h, w], data)
    }

    /// Stacks equally sized `H×W` maps into `H×W×K`. `K = 0` needs explicit dims.
    pub fn stack_channels(maps: &[Tensor], h: usize, w: usize) -> Result<Tensor> {
        for m in maps {
            if m.shape() != [h, w] {
                return Err(Error::shape(format!("channel shape {:?} differs from [{h}, {w}]", m.shape())));
            }
        }
        let k = maps.len();
        let mut data = vec![0.0; h * w * k];
        for (c, m) in maps.iter().enumerate() {
            for (i, &v) in m.data.iter().enumerate() {
                data[i * k + c] = v;
            }
        }
        Tensor::new(vec![h, w, k], data)
    }

    /// Swaps the two spatial axes of an `H×W×C` map.
    pub fn transpose_hw(&self) -> Result<Tensor> {
        let (h, w, c) = self.dims3()?;
        let mut data = vec![0.0; self.data.len()];
        for y in 0..h {
            for x in 0..w {
                for k in 0..c {
                    data[(x * h + y) * c + k] = self.at3(y, x, k);
                }
            }
        }
        Tensor::new(vec![w, h, c], data)
    }
}
