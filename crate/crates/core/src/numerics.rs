//! Dense row-major matrices, magnitude sorting with prefix sums, and a
//! seeded counter-based RNG. Everything here is pure and reentrant.

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`. External constructors reject non-finite
/// entries; arithmetic produced internally is not re-validated.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from row-major data, validating length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("entry {i} is {}", data[i])));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Fraction of entries that are not exactly zero.
    pub fn nonzero_fraction(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let nnz = self.data.iter().filter(|t| **t != 0.0).count();
        nnz as f64 / self.data.len() as f64
    }
}

/// Standard matrix product with an i-k-j loop order over row-major storage.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = DenseMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            let brow = b.row(k);
            let orow = out.row_mut(i);
            for j in 0..b.cols {
                orow[j] += aik * brow[j];
            }
        }
    }
    Ok(out)
}

/// Descending-magnitude view of a vector: the sorting permutation, the
/// sorted absolute values, and their prefix sums (`prefix[0] = 0`,
/// `prefix[k] = sum of the k largest magnitudes`).
#[derive(Debug, Clone)]
pub struct MagnitudeOrder {
    pub perm: Vec<usize>,
    pub sorted_abs: Vec<f64>,
    pub prefix: Vec<f64>,
}

impl MagnitudeOrder {
    pub fn len(&self) -> usize {
        self.sorted_abs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_abs.is_empty()
    }
}

/// Sorts by descending magnitude; ties keep ascending original index so the
/// output is deterministic.
pub fn magnitude_order(v: &[f64]) -> Result<MagnitudeOrder> {
    if let Some(i) = v.iter().position(|t| t.is_nan()) {
        return Err(Error::NonFinite(format!("NaN at index {i}")));
    }
    let mut perm: Vec<usize> = (0..v.len()).collect();
    perm.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .expect("NaN excluded above")
            .then(a.cmp(&b))
    });
    let sorted_abs: Vec<f64> = perm.iter().map(|&i| v[i].abs()).collect();
    let mut prefix = Vec::with_capacity(v.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for t in &sorted_abs {
        acc += t;
        prefix.push(acc);
    }
    Ok(MagnitudeOrder { perm, sorted_abs, prefix })
}

/// Sign with `sign(0) = +1`.
#[inline]
pub fn sign_pos(t: f64) -> f64 {
    if t < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `out[i] = sign(signs_of[i]) * magnitudes[i]` with `sign(0) = +1`.
pub fn apply_signs(magnitudes: &[f64], signs_of: &[f64]) -> Result<Vec<f64>> {
    if magnitudes.len() != signs_of.len() {
        return Err(Error::LengthMismatch {
            expected: magnitudes.len(),
            got: signs_of.len(),
        });
    }
    Ok(magnitudes
        .iter()
        .zip(signs_of)
        .map(|(&m, &s)| sign_pos(s) * m)
        .collect())
}

/// Clamps floating-point debris in `(-1e-12, 0]` to an exact zero. Used by
/// the proximal mappings so that boundary noise cannot flip feasibility
/// tests; genuinely negative values pass through untouched.
#[inline]
pub(crate) fn clamp_tiny(t: f64) -> f64 {
    if t > -1e-12 && t <= 0.0 {
        0.0
    } else {
        t
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded RNG (ChaCha8 keystream). The same seed yields the same stream on
/// every platform; uniform draws use the top 53 bits, normals use
/// Box-Muller, and shuffles are plain Fisher-Yates so no behavior depends
/// on library internals that might change.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: rand_chacha::ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: rand_chacha::ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream derived from this RNG's seed and a salt; used to
    /// give parallel workers disjoint deterministic streams.
    pub fn derive(&self, salt: u64) -> Rng {
        Rng::new(splitmix64(self.seed ^ splitmix64(salt)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        (self.next_u64() % n as u64) as usize
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
