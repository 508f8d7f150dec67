//! Flat little-endian binary weight files: magic `PPRX1`, then `n`, `m`,
//! `p` as u64 counts, then row-major `V` (n x p) and `W` (n x m) as f64.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use pathprox::{DenseMatrix, ShallowParams};

const MAGIC: &[u8; 5] = b"PPRX1";

pub fn save(path: &Path, params: &ShallowParams) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    file.write_all(MAGIC)?;
    for count in [params.hidden_dim(), params.input_dim(), params.output_dim()] {
        file.write_all(&(count as u64).to_le_bytes())?;
    }
    for v in params.v.as_slice() {
        file.write_all(&v.to_le_bytes())?;
    }
    for w in params.w.as_slice() {
        file.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<ShallowParams> {
    let mut file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut magic = [0u8; 5];
    file.read_exact(&mut magic).context("weight file too short")?;
    if &magic != MAGIC {
        bail!("{}: not a PPRX1 weight file", path.display());
    }
    let mut counts = [0usize; 3];
    for c in &mut counts {
        let mut buf = [0u8; 8];
        file.read_exact(&mut buf).context("truncated weight header")?;
        *c = u64::from_le_bytes(buf) as usize;
    }
    let [n, m, p] = counts;
    let mut read_matrix = |rows: usize, cols: usize| -> Result<DenseMatrix> {
        let mut data = vec![0u8; rows * cols * 8];
        file.read_exact(&mut data).context("truncated weight data")?;
        let values: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(DenseMatrix::from_vec(rows, cols, values)?)
    };
    let v = read_matrix(n, p)?;
    let w = read_matrix(n, m)?;
    Ok(ShallowParams::new(v, w)?)
}
