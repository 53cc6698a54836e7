//! Seeded problem generators shared by the CLI, the verifier and the tests.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::moments::{compute_moments, MomentSequence, Provenance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_raw((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Dense `n × n` matrix with unit-normal entries whose diagonal is replaced
/// by `1 + Σ_j |a_ij|`, making it strictly row diagonally dominant.
pub fn random_sdd(n: usize, seed: u64) -> Matrix {
    let mut rng = rng(seed);
    let mut data: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    for i in 0..n {
        let row = &data[i * n..(i + 1) * n];
        let off: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.abs()).sum();
        data[i * n + i] = 1.0 + off + row[i].abs();
    }
    Matrix::dense(n, n, data).expect("generated entries are finite")
}

/// Block-diagonal matrix of `n / 2` scaled plane rotations (plus a trailing
/// `1` when `n` is odd). Angles are uniform in `[0.3, 2.8]` and block radii
/// run from 0.8 to 1.2, so the spectrum sits near the unit circle and the
/// moments neither grow nor decay.
pub fn rotation_blocks(n: usize, seed: u64) -> Matrix {
    let mut rng = rng(seed);
    let mut triplets = Vec::with_capacity(2 * n);
    let blocks = n / 2;
    for b in 0..blocks {
        let theta: f64 = rng.random_range(0.3..2.8);
        let rho = 0.8 + 0.4 * b as f64 / blocks.max(1) as f64;
        let (c, s) = (rho * theta.cos(), rho * theta.sin());
        let i = 2 * b;
        triplets.extend([(i, i, c), (i, i + 1, -s), (i + 1, i, s), (i + 1, i + 1, c)]);
    }
    if n % 2 == 1 {
        triplets.push((n - 1, n - 1, 1.0));
    }
    Matrix::from_triplets(n, n, triplets).expect("rotation entries are in range")
}

/// Matrix source descriptor `name:params`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Identity(usize),
    Diag(Vec<f64>),
    Tridiag(usize),
    RandSdd { n: usize, seed: u64 },
    RotBlocks { n: usize, seed: u64 },
}

impl Generator {
    pub fn build(&self) -> Matrix {
        match self {
            Generator::Identity(n) => Matrix::identity(*n),
            Generator::Diag(values) => Matrix::diagonal(values),
            Generator::Tridiag(n) => Matrix::tridiagonal(*n, -1.0, 2.0, -1.0),
            Generator::RandSdd { n, seed } => random_sdd(*n, *seed),
            Generator::RotBlocks { n, seed } => rotation_blocks(*n, *seed),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Identity(n) => write!(f, "identity:{n}"),
            Generator::Diag(values) => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "diag:{}", parts.join(","))
            }
            Generator::Tridiag(n) => write!(f, "tridiag:{n}"),
            Generator::RandSdd { n, seed } => write!(f, "randsdd:{n},{seed}"),
            Generator::RotBlocks { n, seed } => write!(f, "rotblocks:{n},{seed}"),
        }
    }
}

fn parse_size(s: &str) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::InvalidInput(format!("invalid size '{s}'"))),
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) =
            s.split_once(':').ok_or_else(|| Error::InvalidInput(format!("generator '{s}' is not name:params")))?;
        match name {
            "identity" => Ok(Generator::Identity(parse_size(params)?)),
            "tridiag" => Ok(Generator::Tridiag(parse_size(params)?)),
            "diag" => {
                let values = params
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                    .collect::<Option<Vec<_>>>()
                    .filter(|v| !v.is_empty())
                    .ok_or_else(|| Error::InvalidInput(format!("invalid diagonal '{params}'")))?;
                Ok(Generator::Diag(values))
            }
            "randsdd" | "rotblocks" => {
                let (n, seed) =
                    params.split_once(',').ok_or_else(|| Error::InvalidInput(format!("{name} expects n,seed")))?;
                let seed = seed.trim().parse().map_err(|_| Error::InvalidInput(format!("invalid seed '{seed}'")))?;
                let n = parse_size(n)?;
                Ok(if name == "randsdd" { Generator::RandSdd { n, seed } } else { Generator::RotBlocks { n, seed } })
            }
            _ => Err(Error::InvalidInput(format!("unknown generator '{name}'"))),
        }
    }
}

/// A matrix with its starting residual and left vector, plus cached moments.
#[derive(Debug, Clone)]
pub struct MomentFixture {
    pub a: Matrix,
    pub r0: Vector,
    pub y: Vector,
    pub moments: MomentSequence,
}

impl MomentFixture {
    pub fn new(a: Matrix, r0: Vector, y: Vector, max_moment: usize, label: &str) -> Result<Self> {
        let moments = compute_moments(&a, &r0, &y, max_moment)?.with_provenance(Provenance {
            matrix: label.to_string(),
            r0: format!("{label}/r0"),
            y: format!("{label}/y"),
        });
        Ok(MomentFixture { a, r0, y, moments })
    }

    /// `randsdd:n,seed` with unit-normal `r0` and `y` drawn from the next seed.
    pub fn random_sdd(n: usize, seed: u64, max_moment: usize) -> Result<Self> {
        let a = random_sdd(n, seed);
        let mut rng = rng(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let r0 = normal_vector(n, &mut rng);
        let y = normal_vector(n, &mut rng);
        MomentFixture::new(a, r0, y, max_moment, &format!("randsdd:{n},{seed}"))
    }

    /// `rotblocks:n,seed` with unit-normal `r0` and `y` drawn from the next seed.
    pub fn rotation_blocks(n: usize, seed: u64, max_moment: usize) -> Result<Self> {
        let a = rotation_blocks(n, seed);
        let mut rng = rng(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let r0 = normal_vector(n, &mut rng);
        let y = normal_vector(n, &mut rng);
        MomentFixture::new(a, r0, y, max_moment, &format!("rotblocks:{n},{seed}"))
    }

    /// `diag(values)` with `r0 = y = 1`.
    pub fn diagonal(values: &[f64], max_moment: usize) -> Result<Self> {
        let ones = Vector::ones(values.len());
        MomentFixture::new(Matrix::diagonal(values), ones.clone(), ones, max_moment, "diag")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_round_trip() {
        for text in ["identity:8", "tridiag:50", "randsdd:10,3", "rotblocks:12,1", "diag:1,2.5,4"] {
            let g: Generator = text.parse().unwrap();
            assert_eq!(g.to_string(), text);
        }
        assert!("tridiag".parse::<Generator>().is_err());
        assert!("tridiag:0".parse::<Generator>().is_err());
        assert!("diag:1,x".parse::<Generator>().is_err());
        assert!("wave:3".parse::<Generator>().is_err());
    }

    #[test]
    fn random_sdd_is_dominant_and_seeded() {
        let a = random_sdd(10, 7);
        for i in 0..10 {
            let off: f64 = (0..10).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            assert!(a.get(i, i) > off);
        }
        assert_eq!(a, random_sdd(10, 7));
        assert_ne!(a, random_sdd(10, 8));
    }
}
