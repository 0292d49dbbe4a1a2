//! Microstructure handling: material tables, parametric geometries, voxel
//! rasterization, and the on-disk voxel format.
//!
//! The unit cell is Y = (0,1)^3, split into N^3 cubic voxels. Voxel
//! I = (I1, I2, I3) covers the cell (I/N, (I+1)/N)^3 with center
//! x_I = (I + 1/2)/N, and is stored row-major with I3 fastest:
//! index = (I1*N + I2)*N + I3. Each voxel carries a 16-bit material id into
//! the grid's material table.

use std::collections::BTreeSet;
use std::io::{Read as _, Write as _};
use std::path::Path;

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{LameParams, StiffnessTensor};

/// Material description as written to and read from voxel files.
///
/// Kept in parametric form (not expanded 6x6 matrices) so that save/load
/// round-trips are float-exact and files stay human-readable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Material<T> {
    Isotropic { lambda: T, mu: T },
    /// 21 upper-triangle entries of the Voigt matrix, row-major.
    Anisotropic { voigt: Vec<T> },
}

impl<T: Real> Material<T> {
    pub fn isotropic(lambda: T, mu: T) -> Self {
        Material::Isotropic { lambda, mu }
    }

    /// Void (empty pore) material: zero stiffness. Grids using it must be
    /// flagged porous.
    pub fn void() -> Self {
        Material::Isotropic {
            lambda: T::zero(),
            mu: T::zero(),
        }
    }

    /// Expands to the fourth-order stiffness tensor.
    pub fn stiffness(&self) -> Result<StiffnessTensor<T>> {
        match self {
            Material::Isotropic { lambda, mu } => {
                if !(Float::is_finite(*lambda) && Float::is_finite(*mu)) {
                    return Err(Error::Material("non-finite Lame parameters".into()));
                }
                Ok(StiffnessTensor::isotropic(LameParams {
                    lambda: *lambda,
                    mu: *mu,
                }))
            }
            Material::Anisotropic { voigt } => StiffnessTensor::from_upper_triangle(voigt),
        }
    }
}

/// Parametric microstructure on the periodic unit cell.
///
/// Every variant partitions Y into subdomains labeled by material ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry<T> {
    /// Layers stacked along `axis` (0, 1, or 2) with the given volume
    /// fractions; layer k gets material `ids[k]`.
    Laminate {
        axis: usize,
        fractions: Vec<T>,
        ids: Vec<u16>,
    },
    /// Ball of the given radius around `center`, with periodic (minimum
    /// image) distance; inside gets `inclusion`, outside `matrix`.
    Sphere {
        center: [T; 3],
        radius: T,
        inclusion: u16,
        matrix: u16,
    },
    /// 3-D checkerboard with `period` tiles per edge; tile parity selects
    /// `even` or `odd`.
    Checkerboard { period: usize, even: u16, odd: u16 },
    /// Explicit id array at a fixed resolution, row-major (I3 fastest).
    Raw { n: usize, ids: Vec<u16> },
}

impl<T: Real> Geometry<T> {
    fn validate(&self) -> Result<()> {
        match self {
            Geometry::Laminate {
                axis,
                fractions,
                ids,
            } => {
                if *axis >= 3 {
                    return Err(Error::Geometry(format!("laminate axis {axis} out of range")));
                }
                if fractions.is_empty() || fractions.len() != ids.len() {
                    return Err(Error::Geometry(
                        "laminate needs matching, non-empty fractions and ids".into(),
                    ));
                }
                if fractions.iter().any(|f| *f <= T::zero()) {
                    return Err(Error::Geometry("laminate fractions must be positive".into()));
                }
                let sum = fractions.iter().fold(T::zero(), |a, b| a + *b);
                if Float::abs(sum - T::one()) > T::of(1e-9) {
                    return Err(Error::Geometry("laminate fractions must sum to 1".into()));
                }
                Ok(())
            }
            Geometry::Sphere { center, radius, .. } => {
                if !(*radius > T::zero()) || !Float::is_finite(*radius) {
                    return Err(Error::Geometry("sphere radius must be positive".into()));
                }
                if center.iter().any(|c| !Float::is_finite(*c)) {
                    return Err(Error::Geometry("sphere center must be finite".into()));
                }
                Ok(())
            }
            Geometry::Checkerboard { period, .. } => {
                if *period == 0 {
                    return Err(Error::Geometry("checkerboard period must be >= 1".into()));
                }
                Ok(())
            }
            Geometry::Raw { n, ids } => {
                if ids.len() != n * n * n {
                    return Err(Error::Geometry(format!(
                        "raw geometry: {} ids for resolution {n}",
                        ids.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Material id of the point x in Y (the subdomain membership function).
    pub fn material_at(&self, x: [T; 3]) -> u16 {
        match self {
            Geometry::Laminate {
                axis,
                fractions,
                ids,
            } => {
                let mut edge = T::zero();
                for (k, f) in fractions.iter().enumerate() {
                    edge += *f;
                    if x[*axis] < edge {
                        return ids[k];
                    }
                }
                *ids.last().expect("validated non-empty")
            }
            Geometry::Sphere {
                center,
                radius,
                inclusion,
                matrix,
            } => {
                let mut d2 = T::zero();
                for m in 0..3 {
                    // periodic minimum-image distance per component
                    let mut d = Float::abs(x[m] - center[m]);
                    d = d - Float::floor(d);
                    d = Float::min(d, T::one() - d);
                    d2 += d * d;
                }
                if d2 <= *radius * *radius {
                    *inclusion
                } else {
                    *matrix
                }
            }
            Geometry::Checkerboard { period, even, odd } => {
                let p = *period;
                let mut parity = 0usize;
                for m in 0..3 {
                    let b = Float::floor(x[m] * T::of_usize(p))
                        .to_usize()
                        .unwrap_or(0)
                        .min(p - 1);
                    parity += b;
                }
                if parity % 2 == 0 {
                    *even
                } else {
                    *odd
                }
            }
            Geometry::Raw { n, ids } => {
                let nn = *n;
                let clamp = |v: T| -> usize {
                    Float::floor(v * T::of_usize(nn))
                        .to_usize()
                        .unwrap_or(0)
                        .min(nn - 1)
                };
                ids[(clamp(x[0]) * nn + clamp(x[1])) * nn + clamp(x[2])]
            }
        }
    }
}

/// Voxelized coefficient field: N^3 material ids plus the material table.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid<T> {
    n: usize,
    ids: Vec<u16>,
    materials: Vec<Material<T>>,
    stiffness: Vec<StiffnessTensor<T>>,
    porous: bool,
}

impl<T: Real> VoxelGrid<T> {
    /// Validated constructor.
    ///
    /// Checks shape, id range, and admissibility of every referenced
    /// material: the smallest stiffness eigenvalue must be positive, or
    /// non-negative when the grid is flagged porous.
    pub fn new(n: usize, ids: Vec<u16>, materials: Vec<Material<T>>, porous: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid(format!("resolution {n} too small, need N >= 2")));
        }
        if ids.len() != n * n * n {
            return Err(Error::Grid(format!(
                "{} ids for resolution {n} (need {})",
                ids.len(),
                n * n * n
            )));
        }
        if materials.is_empty() {
            return Err(Error::Grid("empty material table".into()));
        }
        if materials.len() > u16::MAX as usize + 1 {
            return Err(Error::Grid("more than 65536 materials".into()));
        }
        let stiffness: Vec<StiffnessTensor<T>> = materials
            .iter()
            .map(|m| m.stiffness())
            .collect::<Result<_>>()?;

        let mut used = vec![false; materials.len()];
        for &id in &ids {
            let id = id as usize;
            if id >= materials.len() {
                return Err(Error::Grid(format!(
                    "voxel references material id {id}, only {} declared",
                    materials.len()
                )));
            }
            used[id] = true;
        }

        // Admissibility of referenced materials, with an eigenvalue fuzz
        // tolerance scaled to the largest modulus present.
        let mut scale = T::one();
        for (id, s) in stiffness.iter().enumerate() {
            if used[id] {
                scale = Float::max(scale, Float::abs(s.eigen_range().1));
            }
        }
        let tol = T::of(1e-12) * scale;
        for (id, s) in stiffness.iter().enumerate() {
            if !used[id] {
                continue;
            }
            let (lo, _) = s.eigen_range();
            if lo < -tol {
                return Err(Error::Grid(format!(
                    "material {id} is not positive semidefinite (smallest eigenvalue {lo:?})"
                )));
            }
            if lo <= tol && !porous {
                return Err(Error::Grid(format!(
                    "material {id} has zero stiffness eigenvalues; flag the grid porous to accept it"
                )));
            }
        }

        Ok(VoxelGrid {
            n,
            ids,
            materials,
            stiffness,
            porous,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of voxels, N^3.
    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn is_porous(&self) -> bool {
        self.porous
    }

    /// Linear index of voxel (I1, I2, I3), I3 fastest.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n + i2) * self.n + i3
    }

    /// Voxel center x_I = (I + 1/2)/N for a linear index.
    pub fn center(&self, idx: usize) -> [T; 3] {
        let n = self.n;
        let i3 = idx % n;
        let i2 = (idx / n) % n;
        let i1 = idx / (n * n);
        let h = |i: usize| (T::of_usize(i) + T::of(0.5)) / T::of_usize(n);
        [h(i1), h(i2), h(i3)]
    }

    #[inline]
    pub fn ids(&self) -> &[u16] {
        &self.ids
    }

    pub fn materials(&self) -> &[Material<T>] {
        &self.materials
    }

    /// Stiffness tensor of the voxel at a linear index.
    #[inline]
    pub fn stiffness_at(&self, idx: usize) -> &StiffnessTensor<T> {
        &self.stiffness[self.ids[idx] as usize]
    }

    /// Expanded stiffness table, indexed by material id.
    pub fn stiffness_table(&self) -> &[StiffnessTensor<T>] {
        &self.stiffness
    }

    /// Ids of materials referenced by at least one voxel, ascending.
    pub fn used_ids(&self) -> Vec<usize> {
        let set: BTreeSet<u16> = self.ids.iter().copied().collect();
        set.into_iter().map(|id| id as usize).collect()
    }

    /// Eigenvalue extremes over referenced materials: the coercivity
    /// constants of the coefficient field.
    pub fn coefficient_contrast(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for id in self.used_ids() {
            let (l, h) = self.stiffness[id].eigen_range();
            lo = Float::min(lo, l);
            hi = Float::max(hi, h);
        }
        (lo, hi)
    }

    /// Volume fraction per material id.
    pub fn volume_fractions(&self) -> Vec<T> {
        let mut counts = vec![0usize; self.materials.len()];
        for &id in &self.ids {
            counts[id as usize] += 1;
        }
        let total = T::of_usize(self.len());
        counts
            .into_iter()
            .map(|c| T::of_usize(c) / total)
            .collect()
    }

    /// Voxel-wise arithmetic mean of the stiffness field.
    pub fn mean_stiffness(&self) -> StiffnessTensor<T> {
        let mut acc = StiffnessTensor::zero();
        let fractions = self.volume_fractions();
        for (id, f) in fractions.iter().enumerate() {
            if *f > T::zero() {
                acc = acc.add(&self.stiffness[id].scaled(*f));
            }
        }
        acc
    }
}

/// Rasterizes a geometry at resolution N by sampling voxel centers
/// (straddling voxels get the material of the subdomain containing x_I).
pub fn rasterize<T: Real>(
    geometry: &Geometry<T>,
    n: usize,
    materials: Vec<Material<T>>,
    porous: bool,
) -> Result<VoxelGrid<T>> {
    geometry.validate()?;
    if n < 2 {
        return Err(Error::Grid(format!("resolution {n} too small, need N >= 2")));
    }
    if let Geometry::Raw { n: raw_n, .. } = geometry {
        if *raw_n != n {
            return Err(Error::Geometry(format!(
                "raw geometry has resolution {raw_n}, requested {n}"
            )));
        }
    }
    let nf = T::of_usize(n);
    let half = T::of(0.5);
    let ids: Vec<u16> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let i3 = idx % n;
            let i2 = (idx / n) % n;
            let i1 = idx / (n * n);
            let x = [
                (T::of_usize(i1) + half) / nf,
                (T::of_usize(i2) + half) / nf,
                (T::of_usize(i3) + half) / nf,
            ];
            geometry.material_at(x)
        })
        .collect();
    VoxelGrid::new(n, ids, materials, porous)
}

#[derive(Serialize, Deserialize)]
struct MaterialRecord<T> {
    id: usize,
    #[serde(flatten)]
    material: Material<T>,
}

#[derive(Serialize, Deserialize)]
struct VoxelHeader<T> {
    #[serde(rename = "N")]
    n: usize,
    porous: bool,
    materials: Vec<MaterialRecord<T>>,
    /// free-form record of how the grid was produced; ignored on load
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<serde_json::Value>,
}

/// Writes a grid: one JSON header line, then N^3 little-endian u16 ids,
/// row-major with I3 fastest.
pub fn save_voxels<T: Real + Serialize>(grid: &VoxelGrid<T>, path: &Path) -> Result<()> {
    save_voxels_with(grid, path, None)
}

/// [`save_voxels`] with a provenance record embedded in the header, so a
/// file carries the configuration that generated it.
pub fn save_voxels_with<T: Real + Serialize>(
    grid: &VoxelGrid<T>,
    path: &Path,
    provenance: Option<serde_json::Value>,
) -> Result<()> {
    let header = VoxelHeader {
        n: grid.n,
        porous: grid.porous,
        materials: grid
            .materials
            .iter()
            .enumerate()
            .map(|(id, material)| MaterialRecord {
                id,
                material: material.clone(),
            })
            .collect(),
        provenance,
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(grid.ids.len() * 2);
    for &id in &grid.ids {
        out.extend_from_slice(&id.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Reads a grid written by [`save_voxels`], re-validating everything.
pub fn load_voxels<T: Real + for<'de> Deserialize<'de>>(path: &Path) -> Result<VoxelGrid<T>> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let newline = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header: VoxelHeader<T> = serde_json::from_slice(&raw[..newline])?;

    let mut materials = vec![None; header.materials.len()];
    for record in header.materials {
        if record.id >= materials.len() {
            return Err(Error::Format(format!(
                "material id {} out of range for table of {}",
                record.id,
                materials.len()
            )));
        }
        if materials[record.id].replace(record.material).is_some() {
            return Err(Error::Format(format!("duplicate material id {}", record.id)));
        }
    }
    let materials: Vec<Material<T>> = materials
        .into_iter()
        .map(|m| m.ok_or_else(|| Error::Format("gap in material id sequence".into())))
        .collect::<Result<_>>()?;

    let payload = &raw[newline + 1..];
    let expected = header.n * header.n * header.n * 2;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header promises {expected}",
            payload.len()
        )));
    }
    let ids: Vec<u16> = payload
        .chunks_exact(2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .collect();
    VoxelGrid::new(header.n, ids, materials, header.porous)
}
