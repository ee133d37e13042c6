//! Seeded generation of spiked-model instances and planted signals.
//!
//! Randomness comes from ChaCha8 keyed by the 64-bit seed, with one stream
//! per purpose (noise, sampled signal, left signal), so every instance is a
//! pure function of its inputs. Gaussians use the ziggurat sampler of
//! `rand_distr`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix};
use crate::measures::DiscreteMeasure;

const STREAM_NOISE: u64 = 0;
const STREAM_SIGNAL: u64 = 1;
const STREAM_LEFT: u64 = 2;
const STREAM_START: u64 = 3;

const UNIT_NORM_TOL: f64 = 1e-12;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikedInstanceSym {
    pub n: usize,
    pub beta: f64,
    pub v0: Vec<f64>,
    pub x: DenseMatrix,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikedInstanceRec {
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub beta: f64,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub x: DenseMatrix,
    pub seed: u64,
}

/// A signal drawn from a prior together with how far its raw norm was
/// from 1 before rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub v: Vec<f64>,
    pub norm_deviation: f64,
}

/// `floor(dim * eps)` leading entries equal to `1/sqrt(l)`, the rest zero.
pub fn two_point_signal(dim: usize, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    // guard against dim * eps landing just below an integer
    let l = (dim as f64 * eps + 1e-9).floor() as usize;
    let l = l.min(dim);
    if l == 0 {
        return Err(Error::EmptySupport { dim, eps });
    }
    let mut v = vec![0.0; dim];
    let a = 1.0 / (l as f64).sqrt();
    v[..l].fill(a);
    Ok(v)
}

/// I.i.d. draws from `m`, scaled by `1/sqrt(dim)` and then rescaled to unit
/// norm.
pub fn signal_from_measure(dim: usize, m: &DiscreteMeasure, seed: u64) -> Result<SampledSignal> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: 0.0,
        });
    }
    let atoms = m.atoms();
    let mut rng = rng_for(seed, STREAM_SIGNAL);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for a in atoms {
                acc += a.weight;
                if u < acc {
                    return a.value * scale;
                }
            }
            atoms[atoms.len() - 1].value * scale
        })
        .collect();
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::EmptySupport {
            dim,
            eps: m.sparsity(),
        });
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Ok(SampledSignal {
        v,
        norm_deviation: nv - 1.0,
    })
}

/// Uniform draw from the unit sphere in `R^dim`.
pub fn uniform_sphere(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, STREAM_LEFT);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Gaussian starting vector for iterative eigensolvers, on its own stream.
pub fn random_start(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, STREAM_START);
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn constant_unit(dim: usize) -> Vec<f64> {
    vec![1.0 / (dim as f64).sqrt(); dim]
}

fn check_signal(v: &[f64], dim: usize, nonneg: bool, name: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::SignalNotFeasible(format!(
            "{name} has non-finite entries"
        )));
    }
    if nonneg && v.iter().any(|&x| x < 0.0) {
        return Err(Error::SignalNotFeasible(format!(
            "{name} has negative entries"
        )));
    }
    let nv = norm(v);
    if (nv - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::SignalNotFeasible(format!("{name} has norm {nv}")));
    }
    Ok(())
}

/// `X = beta v0 v0' + Z` with `Z` symmetric, `Z_ij ~ N(0, 1/n)` for
/// `i < j` and `Z_ii ~ N(0, 2/n)`. Noise is drawn row by row: the diagonal
/// entry first, then the rest of the upper triangle.
pub fn gen_sym(n: usize, beta: f64, v0: &[f64], seed: u64) -> Result<SpikedInstanceSym> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::BetaNonPositive(beta));
    }
    check_signal(v0, n, true, "v0")?;
    let mut rng = rng_for(seed, STREAM_NOISE);
    let sd = 1.0 / (n as f64).sqrt();
    let sd_diag = std::f64::consts::SQRT_2 * sd;
    let mut x = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        x.set(i, i, sd_diag * z + beta * v0[i] * v0[i]);
        for j in i + 1..n {
            let z: f64 = rng.sample(StandardNormal);
            let val = sd * z + beta * v0[i] * v0[j];
            x.set(i, j, val);
            x.set(j, i, val);
        }
    }
    Ok(SpikedInstanceSym {
        n,
        beta,
        v0: v0.to_vec(),
        x,
        seed,
    })
}

/// `X = sqrt(beta) u0 v0' + Z`, `Z` an `n x p` matrix of i.i.d. `N(0, 1/n)`
/// entries drawn in row-major order. The noise scale is `1/n` for every
/// aspect ratio, including `p > n`.
pub fn gen_rec(
    n: usize,
    p: usize,
    beta: f64,
    u0: &[f64],
    v0: &[f64],
    seed: u64,
) -> Result<SpikedInstanceRec> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::BetaNonPositive(beta));
    }
    check_signal(u0, n, false, "u0")?;
    check_signal(v0, p, true, "v0")?;
    let mut rng = rng_for(seed, STREAM_NOISE);
    let sd = 1.0 / (n as f64).sqrt();
    let sb = beta.sqrt();
    let x = DenseMatrix::from_fn(n, p, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        sd * z + sb * u0[i] * v0[j]
    });
    Ok(SpikedInstanceRec {
        n,
        p,
        alpha: p as f64 / n as f64,
        beta,
        u0: u0.to_vec(),
        v0: v0.to_vec(),
        x,
        seed,
    })
}

const DUMP_MAGIC: &[u8; 6] = b"NNPCA1";
const DUMP_HEADER_LEN: usize = 6 + 4 * 8;

/// Raw matrix dump: magic `NNPCA1`, then rows, cols, beta and seed as
/// little-endian 64-bit fields, then the entries row-major as
/// little-endian `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDump {
    pub beta: f64,
    pub seed: u64,
    pub x: DenseMatrix,
}

impl InstanceDump {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.x.rows() as u64).to_le_bytes())?;
        w.write_all(&(self.x.cols() as u64).to_le_bytes())?;
        w.write_all(&self.beta.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in self.x.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; DUMP_HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|_| Error::InvalidDump("truncated header".into()))?;
        if &header[..6] != DUMP_MAGIC {
            return Err(Error::InvalidDump("bad magic".into()));
        }
        let field = |k: usize| -> [u8; 8] { header[6 + 8 * k..14 + 8 * k].try_into().unwrap() };
        let rows = u64::from_le_bytes(field(0)) as usize;
        let cols = u64::from_le_bytes(field(1)) as usize;
        let beta = f64::from_le_bytes(field(2));
        let seed = u64::from_le_bytes(field(3));
        let len = rows
            .checked_mul(cols)
            .filter(|&l| l <= isize::MAX as usize / 8)
            .ok_or_else(|| Error::InvalidDump(format!("implausible dims {rows} x {cols}")))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * len {
            return Err(Error::InvalidDump(format!(
                "expected {} payload bytes, found {}",
                8 * len,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(InstanceDump {
            beta,
            seed,
            x: DenseMatrix::from_row_major(rows, cols, data)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

impl From<&SpikedInstanceSym> for InstanceDump {
    fn from(inst: &SpikedInstanceSym) -> Self {
        InstanceDump {
            beta: inst.beta,
            seed: inst.seed,
            x: inst.x.clone(),
        }
    }
}

impl From<&SpikedInstanceRec> for InstanceDump {
    fn from(inst: &SpikedInstanceRec) -> Self {
        InstanceDump {
            beta: inst.beta,
            seed: inst.seed,
            x: inst.x.clone(),
        }
    }
}
