use crate::error::{Error, Result};

/// Where a run's planes sit on the bit axis.
///
/// Plane `i` of the fitted stack is placed at global index `offset + i` and
/// mapped to `-1 + 2 (offset + i) / (n_map - 1)`, so a model trained on a
/// subset of planes can be queried at the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BitMapping {
    pub offset: usize,
    pub n_map: usize,
}

impl BitMapping {
    pub fn contiguous(planes: usize) -> Self {
        Self {
            offset: 0,
            n_map: planes,
        }
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        bit_coordinate(index, self.n_map)
    }
}

pub fn bit_coordinate(index: usize, n_map: usize) -> f64 {
    if n_map <= 1 {
        -1.0
    } else {
        -1.0 + 2.0 * index as f64 / (n_map - 1) as f64
    }
}

/// Linear map of `0..extent` onto `[-1, 1]`; a single sample sits at 0.
pub fn axis_coordinate(index: usize, extent: usize) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        -1.0 + 2.0 * index as f64 / (extent - 1) as f64
    }
}

/// Row-major coordinates for every (plane, grid point) pair, plane-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateGrid {
    pub dim: usize,
    pub grid_len: usize,
    pub plane_indices: Vec<usize>,
    pub points: Vec<f64>,
}

impl CoordinateGrid {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

fn spatial_points(shape: &[usize]) -> Result<Vec<Vec<f64>>> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Shape(format!("grid extents must be positive, got {shape:?}")));
    }
    let len: usize = shape.iter().product();
    let mut out = Vec::with_capacity(len);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..len {
        out.push(idx.iter().zip(shape).map(|(&i, &e)| axis_coordinate(i, e)).collect());
        for axis in (0..shape.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(out)
}

/// Spatial coordinates only, for networks without a bit axis.
pub fn make_spatial_grid(shape: &[usize]) -> Result<CoordinateGrid> {
    let pts = spatial_points(shape)?;
    Ok(CoordinateGrid {
        dim: shape.len(),
        grid_len: pts.len(),
        plane_indices: vec![0],
        points: pts.into_iter().flatten().collect(),
    })
}

/// Spatial coordinates plus the bit coordinate of each of the `m` planes.
pub fn make_grid(shape: &[usize], m: usize, n_map: usize) -> Result<CoordinateGrid> {
    if m == 0 {
        return Err(Error::Invalid("at least one plane is required".into()));
    }
    if n_map < m {
        return Err(Error::Invalid(format!("bit mapping over {n_map} planes cannot place {m} planes")));
    }
    make_grid_for_planes(shape, &(0..m).collect::<Vec<_>>(), n_map)
}

/// Like [`make_grid`] for an arbitrary set of global plane indices.
pub fn make_grid_for_planes(shape: &[usize], planes: &[usize], n_map: usize) -> Result<CoordinateGrid> {
    if let Some(&bad) = planes.iter().find(|&&p| p >= n_map.max(1)) {
        return Err(Error::Invalid(format!("plane index {bad} outside bit mapping of {n_map} planes")));
    }
    let pts = spatial_points(shape)?;
    let dim = shape.len() + 1;
    let mut points = Vec::with_capacity(planes.len() * pts.len() * dim);
    for &p in planes {
        let b = bit_coordinate(p, n_map);
        for s in &pts {
            points.extend_from_slice(s);
            points.push(b);
        }
    }
    Ok(CoordinateGrid {
        dim,
        grid_len: pts.len(),
        plane_indices: planes.to_vec(),
        points,
    })
}
