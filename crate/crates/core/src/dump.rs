//! On-disk field format: a JSON sidecar describing the grid and layout next
//! to a flat binary payload.
//!
//! Payload layout: little-endian f64 pairs (re, im), one pair per node, in
//! row-major node order (last axis fastest), with components outermost, i.e.
//! component 0's full block, then component 1's, and so on. The sidecar for
//! `name` is `name.json`, the payload `name.bin`.

use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use ndarray::ArrayD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write as _;
use std::path::Path;

pub const DUMP_SCHEMA: u32 = 1;
const LAYOUT_NOTE: &str =
    "little-endian f64 (re,im) pairs; row-major nodes, last axis fastest; components outermost";
const FFT_NOTE: &str =
    "forward transform is mean-preserving: hhat(k) = (1/N) sum_x h(x) exp(-i xi_k . x)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRank {
    Scalar,
    Vector,
    Tensor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpHeader {
    pub schema: u32,
    pub rank: FieldRank,
    pub components: usize,
    pub shape: Vec<usize>,
    pub grid: Grid,
    pub layout: String,
    pub fft_convention: String,
}

fn header(rank: FieldRank, components: usize, grid: &Grid) -> DumpHeader {
    DumpHeader {
        schema: DUMP_SCHEMA,
        rank,
        components,
        shape: grid.shape(),
        grid: grid.clone(),
        layout: LAYOUT_NOTE.to_string(),
        fft_convention: FFT_NOTE.to_string(),
    }
}

fn write_payload(path: &Path, comps: &[&ArrayD<Complex64>]) -> Result<()> {
    let mut bytes = Vec::with_capacity(comps.len() * comps[0].len() * 16);
    for comp in comps {
        let slice = comp.as_slice().expect("fields use standard layout");
        for v in slice {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

fn dump(base: &Path, head: DumpHeader, comps: &[&ArrayD<Complex64>]) -> Result<()> {
    let json = serde_json::to_string_pretty(&head)?;
    fs::write(base.with_extension("json"), json)?;
    write_payload(&base.with_extension("bin"), comps)
}

pub fn dump_scalar(base: &Path, field: &ScalarField) -> Result<()> {
    dump(base, header(FieldRank::Scalar, 1, field.grid()), &[field.data()])
}

pub fn dump_vector(base: &Path, field: &VectorField) -> Result<()> {
    let comps: Vec<_> = field.components().iter().map(|c| c.data()).collect();
    dump(base, header(FieldRank::Vector, comps.len(), field.grid()), &comps)
}

pub fn dump_tensor(base: &Path, field: &TensorField) -> Result<()> {
    let comps: Vec<_> = field.components().iter().map(|c| c.data()).collect();
    dump(base, header(FieldRank::Tensor, comps.len(), field.grid()), &comps)
}

pub fn load_header(base: &Path) -> Result<DumpHeader> {
    let text = fs::read_to_string(base.with_extension("json"))?;
    let head: DumpHeader = serde_json::from_str(&text)?;
    if head.schema != DUMP_SCHEMA {
        return Err(Error::Format(format!("unsupported dump schema {}", head.schema)));
    }
    if head.shape != head.grid.shape() {
        return Err(Error::Format("sidecar shape disagrees with its grid".into()));
    }
    Ok(head)
}

fn load_components(base: &Path, head: &DumpHeader) -> Result<Vec<ArrayD<Complex64>>> {
    let bytes = fs::read(base.with_extension("bin"))?;
    let nodes: usize = head.shape.iter().product();
    let expected = head.components * nodes * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(head.components);
    for c in 0..head.components {
        let mut data = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let off = (c * nodes + i) * 16;
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            data.push(Complex64::new(re, im));
        }
        comps.push(
            ArrayD::from_shape_vec(head.shape.clone(), data)
                .map_err(|e| Error::Format(format!("bad payload shape: {e}")))?,
        );
    }
    Ok(comps)
}

pub fn load_scalar(base: &Path) -> Result<ScalarField> {
    let head = load_header(base)?;
    if head.rank != FieldRank::Scalar || head.components != 1 {
        return Err(Error::Format("dump is not a scalar field".into()));
    }
    let mut comps = load_components(base, &head)?;
    ScalarField::from_data(head.grid, comps.remove(0))
}

pub fn load_vector(base: &Path) -> Result<VectorField> {
    let head = load_header(base)?;
    if head.rank != FieldRank::Vector || head.components != head.grid.dim() {
        return Err(Error::Format("dump is not a vector field".into()));
    }
    let comps = load_components(base, &head)?;
    let fields = comps
        .into_iter()
        .map(|c| ScalarField::from_data(head.grid.clone(), c))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(fields)
}

pub fn load_tensor(base: &Path) -> Result<TensorField> {
    let head = load_header(base)?;
    let d = head.grid.dim();
    if head.rank != FieldRank::Tensor || head.components != d * d {
        return Err(Error::Format("dump is not a tensor field".into()));
    }
    let comps = load_components(base, &head)?;
    let fields = comps
        .into_iter()
        .map(|c| ScalarField::from_data(head.grid.clone(), c))
        .collect::<Result<Vec<_>>>()?;
    TensorField::from_components(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::TAU;

    #[test]
    fn scalar_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("field");
        let grid = TorusGrid::cubic(2, 8, TAU).unwrap();
        let f = ScalarField::from_fn(grid, |x| Complex64::new(x[0].sin(), -x[1]));
        dump_scalar(&base, &f).unwrap();
        let g = load_scalar(&base).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn vector_roundtrip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("vel");
        let grid = TorusGrid::cubic(3, 4, TAU).unwrap();
        let f = VectorField::from_components(
            (0..3)
                .map(|j| {
                    ScalarField::from_fn(grid.clone(), move |x| Complex64::new(x[j], j as f64))
                })
                .collect(),
        )
        .unwrap();
        dump_vector(&base, &f).unwrap();
        let head = load_header(&base).unwrap();
        assert_eq!(head.components, 3);
        assert_eq!(head.shape, vec![4, 4, 4]);
        assert_eq!(load_vector(&base).unwrap(), f);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("bad");
        let grid = TorusGrid::cubic(2, 8, TAU).unwrap();
        let f = ScalarField::zeros(grid);
        dump_scalar(&base, &f).unwrap();
        let bin = base.with_extension("bin");
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_scalar(&base).is_err());
    }
}
