//! Disk cache for spectral decompositions, keyed by a content hash of the
//! group and grid descriptors. The eigendecomposition dominates runtime, so
//! reuse across experiment runs is the main performance lever.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::calculus::sublaplacian;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::SpectralDecomposition;

const MAGIC: &[u8; 8] = b"STRATEIG";
const VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "STRATLAB_CACHE_DIR";

/// Content hash of the (group, grid) pair that determines a decomposition.
pub fn grid_content_hash(grid: &Grid) -> [u8; 32] {
    let mut descriptor = crate::io::group_config_block(grid.spec());
    descriptor.push_str(&crate::io::grid_config_block(grid));
    // spacings pin the floating-point geometry exactly
    for h in grid.spacings() {
        descriptor.push_str(&format!("{:?},", h.to_bits()));
    }
    let mut hasher = Sha256::new();
    hasher.update(descriptor.as_bytes());
    hasher.finalize().into()
}

fn cache_path(dir: &Path, hash: &[u8; 32]) -> PathBuf {
    let hex: String = hash.iter().take(16).map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{hex}.eig"))
}

fn write_cache(path: &Path, hash: &[u8; 32], dec: &SpectralDecomposition) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("eig.tmp");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        f.write_all(MAGIC)?;
        f.write_all(&VERSION.to_le_bytes())?;
        f.write_all(hash)?;
        f.write_all(&(dec.len() as u64).to_le_bytes())?;
        for v in dec.eigenvalues() {
            f.write_all(&v.to_le_bytes())?;
        }
        for v in dec.eigenvectors().iter() {
            f.write_all(&v.to_le_bytes())?;
        }
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn read_cache(path: &Path, hash: &[u8; 32], grid: &Arc<Grid>) -> Result<SpectralDecomposition> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    let mut version = [0u8; 4];
    f.read_exact(&mut version)?;
    if &magic != MAGIC || u32::from_le_bytes(version) != VERSION {
        return Err(Error::invalid("unrecognised cache file format"));
    }
    let mut stored_hash = [0u8; 32];
    f.read_exact(&mut stored_hash)?;
    if &stored_hash != hash {
        return Err(Error::invalid("cache content hash mismatch"));
    }
    let mut n_bytes = [0u8; 8];
    f.read_exact(&mut n_bytes)?;
    let n = u64::from_le_bytes(n_bytes) as usize;
    if n != grid.len() {
        return Err(Error::invalid("cache size does not match the grid"));
    }
    let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; 8 * count];
        f.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let eigenvalues = Array1::from(read_f64s(n)?);
    let flat = read_f64s(n * n)?;
    let eigenvectors = Array2::from_shape_vec((n, n), flat)
        .map_err(|_| Error::invalid("cache payload shape mismatch"))?;
    SpectralDecomposition::from_parts(grid.clone(), eigenvalues, eigenvectors)
}

/// Loads the decomposition for this grid from `dir`, or assembles the
/// sub-Laplacian, decomposes it (capped at `eig_cap` dof) and stores the
/// result. Stale or mismatching cache files are recomputed and replaced.
pub fn cached_decomposition(
    dir: &Path,
    grid: &Arc<Grid>,
    eig_cap: usize,
) -> Result<SpectralDecomposition> {
    let hash = grid_content_hash(grid);
    let path = cache_path(dir, &hash);
    if path.exists() {
        match read_cache(&path, &hash, grid) {
            Ok(dec) => return Ok(dec),
            Err(_) => {
                // invalidated: fall through to recompute
                let _ = std::fs::remove_file(&path);
            }
        }
    }
    let op = sublaplacian(grid)?;
    let dec = SpectralDecomposition::eigendecompose_with_cap(&op, eig_cap)?;
    write_cache(&path, &hash, &dec)?;
    Ok(dec)
}
