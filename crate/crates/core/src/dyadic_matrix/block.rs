use std::fmt;

/// A dense `k x k` block stored row-major.
///
/// Products accumulate each output entry in ascending inner index so that
/// results do not depend on how the surrounding work is scheduled.
#[derive(Clone, PartialEq)]
pub struct DenseBlock {
    k: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseBlock")
            .field("k", &self.k)
            .field("data", &self.data)
            .finish()
    }
}

impl DenseBlock {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            data: vec![0.0; k * k],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut b = Self::zeros(k);
        for i in 0..k {
            b.data[i * k + i] = 1.0;
        }
        b
    }

    /// Panics if `data.len() != k * k`.
    pub fn from_row_major(k: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), k * k, "block data must hold k*k entries");
        Self { k, data }
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                data.push(f(i, j));
            }
        }
        Self { k, data }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.k + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.k, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `self += a * b`.
    pub fn mul_acc(&mut self, a: &DenseBlock, b: &DenseBlock) {
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                let mut s = self.data[i * k + j];
                for p in 0..k {
                    s += a.data[i * k + p] * b.data[p * k + j];
                }
                self.data[i * k + j] = s;
            }
        }
    }

    /// `self += aᵀ * b`.
    pub fn mul_acc_tn(&mut self, a: &DenseBlock, b: &DenseBlock) {
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                let mut s = self.data[i * k + j];
                for p in 0..k {
                    s += a.data[p * k + i] * b.data[p * k + j];
                }
                self.data[i * k + j] = s;
            }
        }
    }

    /// `self += a * bᵀ`.
    pub fn mul_acc_nt(&mut self, a: &DenseBlock, b: &DenseBlock) {
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                let mut s = self.data[i * k + j];
                for p in 0..k {
                    s += a.data[i * k + p] * b.data[j * k + p];
                }
                self.data[i * k + j] = s;
            }
        }
    }

    pub fn mul(&self, b: &DenseBlock) -> DenseBlock {
        let mut out = DenseBlock::zeros(self.k);
        out.mul_acc(self, b);
        out
    }

    pub fn add_assign(&mut self, other: &DenseBlock) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y;
        }
    }

    pub fn sub_assign(&mut self, other: &DenseBlock) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
    }

    pub fn neg(&self) -> DenseBlock {
        DenseBlock {
            k: self.k,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `out += self * x` for a length-`k` slice.
    pub fn mat_vec_acc(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        for i in 0..k {
            let mut s = out[i];
            for p in 0..k {
                s += self.data[i * k + p] * x[p];
            }
            out[i] = s;
        }
    }

    /// `out += selfᵀ * x`.
    pub fn mat_t_vec_acc(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        for j in 0..k {
            let mut s = out[j];
            for p in 0..k {
                s += self.data[p * k + j] * x[p];
            }
            out[j] = s;
        }
    }
}
