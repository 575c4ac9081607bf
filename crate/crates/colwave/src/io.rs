//! Net serialization: a directory with one little-endian f64 binary array
//! per ε plus a JSON manifest describing the grid, mesh and provenance.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EpsGrid, Mesh};
use crate::nets::ScalarNet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetManifest {
    pub eps_grid: EpsGrid,
    pub mesh: Mesh,
    pub provenance: String,
    pub files: Vec<String>,
}

/// Write a net as `manifest.json` + `eps_<k>.bin` files under `dir`.
pub fn save_net(net: &ScalarNet, dir: &Path, provenance: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(net.grid().len());
    for k in 0..net.grid().len() {
        let name = format!("eps_{k:03}.bin");
        let mut buf = Vec::with_capacity(net.sample(k).len() * 8);
        for v in net.sample(k) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(dir.join(&name))?.write_all(&buf)?;
        files.push(name);
    }
    let manifest = NetManifest {
        eps_grid: net.grid().clone(),
        mesh: net.mesh().clone(),
        provenance: provenance.to_string(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

/// Load a net written by [`save_net`].
pub fn load_net(dir: &Path) -> Result<ScalarNet> {
    let manifest: NetManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let n = manifest.mesh.len();
    let mut samples = Vec::with_capacity(manifest.files.len());
    for name in &manifest.files {
        let mut buf = Vec::new();
        fs::File::open(dir.join(name))?.read_to_end(&mut buf)?;
        if buf.len() != n * 8 {
            return Err(Error::Serde(format!(
                "{name}: expected {} bytes, found {}",
                n * 8,
                buf.len()
            )));
        }
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        samples.push(vals);
    }
    ScalarNet::new(manifest.eps_grid, manifest.mesh, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EpsGrid;

    #[test]
    fn round_trip_preserves_bits() {
        let grid = EpsGrid::geometric(0.2, 4).unwrap();
        let mesh = Mesh::torus_1d(2.0 * std::f64::consts::PI, 64);
        let net = ScalarNet::from_fn(grid, mesh, |e, x| (x[0] * 3.0).sin() / e).unwrap();
        let dir = std::env::temp_dir().join(format!("colwave_io_{}", std::process::id()));
        save_net(&net, &dir, "unit test").unwrap();
        let back = load_net(&dir).unwrap();
        assert_eq!(net.samples(), back.samples());
        assert_eq!(net.mesh(), back.mesh());
        std::fs::remove_dir_all(&dir).ok();
    }
}
