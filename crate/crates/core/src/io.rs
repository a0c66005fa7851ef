//! File formats: matrices and state trajectories as JSON.
//!
//! A matrix file is `{"dims": [d_1, ..., d_k], "data": [[re, im], ...]}` with
//! `data` in row-major order and of length `(d_1 ... d_k)²`. A trajectory file
//! holds shared `dims`, a strictly increasing `times` array, and one row-major
//! `data` block per time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linops::{C64, CMat, DensityMatrix, SubsystemDims};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dims: Vec<usize>,
    data: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryJson {
    dims: Vec<usize>,
    times: Vec<f64>,
    states: Vec<Vec<(f64, f64)>>,
}

fn mat_to_data(m: &CMat) -> Vec<(f64, f64)> {
    let n = m.nrows();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            data.push((z.re, z.im));
        }
    }
    data
}

fn data_to_mat(data: &[(f64, f64)], dims: &SubsystemDims) -> Result<CMat> {
    let n = dims.total();
    if data.len() != n * n {
        return Err(Error::Parse(format!(
            "data has {} entries but dims {:?} require {}",
            data.len(),
            dims.dims(),
            n * n
        )));
    }
    if data.iter().any(|&(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(Error::Parse("data contains non-finite entries".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        let (re, im) = data[i * n + j];
        C64::new(re, im)
    }))
}

/// Write a square matrix with its subsystem dimensions.
pub fn write_matrix(path: impl AsRef<Path>, m: &CMat, dims: &SubsystemDims) -> Result<()> {
    let n = dims.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims {:?} give total {}",
            m.nrows(),
            m.ncols(),
            dims.dims(),
            n
        )));
    }
    let doc = MatrixJson {
        dims: dims.dims().to_vec(),
        data: mat_to_data(m),
    };
    std::fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

/// Read a square matrix and its subsystem dimensions.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<(CMat, SubsystemDims)> {
    let text = std::fs::read_to_string(path)?;
    let doc: MatrixJson = serde_json::from_str(&text)?;
    let dims = SubsystemDims::new(doc.dims)?;
    let m = data_to_mat(&doc.data, &dims)?;
    Ok((m, dims))
}

/// Read a matrix file and validate it as a density matrix.
pub fn read_density(path: impl AsRef<Path>, tol: f64) -> Result<DensityMatrix> {
    let (m, dims) = read_matrix(path)?;
    DensityMatrix::with_tol(m, dims, tol)
}

pub fn write_density(path: impl AsRef<Path>, rho: &DensityMatrix) -> Result<()> {
    write_matrix(path, rho.matrix(), rho.dims())
}

/// Write a trajectory of states on a common space.
pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let doc = TrajectoryJson {
        dims: traj.dims().dims().to_vec(),
        times: traj.times().to_vec(),
        states: traj.states().iter().map(|s| mat_to_data(s.matrix())).collect(),
    };
    std::fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

/// Read a trajectory file, validating every state at tolerance `tol`.
pub fn read_trajectory(path: impl AsRef<Path>, tol: f64) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path)?;
    let doc: TrajectoryJson = serde_json::from_str(&text)?;
    let dims = SubsystemDims::new(doc.dims)?;
    if doc.states.len() != doc.times.len() {
        return Err(Error::Parse(format!(
            "{} times but {} states",
            doc.times.len(),
            doc.states.len()
        )));
    }
    let states = doc
        .states
        .iter()
        .map(|data| {
            let m = data_to_mat(data, &dims)?;
            DensityMatrix::with_tol(m, dims.clone(), tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(doc.times, states)
}
