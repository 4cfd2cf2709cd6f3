//! Trajectory files: a little-endian binary record stream plus a JSON
//! sidecar with grid, configuration and cached block norms.
//!
//! Binary layout:
//!
//! ```text
//! "CNSTRAJ1"
//! u32 dim, u32 n, f64 length, f64 dealias, u32 nslots
//! per slot: u32 comps, u32 name_len, name bytes
//! u64 nrecords
//! per record: f64 t, then per slot and component n^dim pairs (re, im)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trajectory::{CachedNorms, Trajectory};
use crate::besov::NormSeries;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec};

const MAGIC: &[u8; 8] = b"CNSTRAJ1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotInfo {
    pub name: String,
    pub comps: usize,
}

/// Cached norms in the sidecar. Only finite exponents are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredNorms {
    pub slot: String,
    pub p: f64,
    pub series: Vec<NormSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub grid: GridSpec,
    pub slots: Vec<SlotInfo>,
    pub records: usize,
    pub times: Vec<f64>,
    pub config: serde_json::Value,
    pub norms: Vec<StoredNorms>,
}

/// Path of the JSON file stored next to a checkpoint.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Io(format!("{v} does not fit the header")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_u32(r: &mut impl Read) -> Result<usize> {
    Ok(u32::from_le_bytes(get(r)?) as usize)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

/// Writes the trajectory and its sidecar; `config` is echoed verbatim.
pub fn save(traj: &Trajectory, config: serde_json::Value, path: &Path) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::Data("refusing to save an empty trajectory".into()));
    }
    let g = traj.grid();
    let spec = g.spec();
    let comps: Vec<usize> = traj.state(0).iter().map(|f| f.comps()).collect();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    put_u32(&mut w, spec.dim)?;
    put_u32(&mut w, spec.points_per_dim)?;
    w.write_all(&spec.length.to_le_bytes())?;
    w.write_all(&spec.dealias_fraction.to_le_bytes())?;
    put_u32(&mut w, traj.slots().len())?;
    for (name, &c) in traj.slots().iter().zip(&comps) {
        put_u32(&mut w, c)?;
        put_u32(&mut w, name.len())?;
        w.write_all(name.as_bytes())?;
    }
    w.write_all(&(traj.len() as u64).to_le_bytes())?;
    for (i, &t) in traj.times().iter().enumerate() {
        w.write_all(&t.to_le_bytes())?;
        for f in traj.state(i) {
            for c in 0..f.comps() {
                for v in f.spectral(c) {
                    w.write_all(&v.re.to_le_bytes())?;
                    w.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    let sidecar = Sidecar {
        format: String::from_utf8_lossy(MAGIC).into_owned(),
        grid: spec,
        slots: traj.slots().iter().zip(&comps).map(|(n, &c)| SlotInfo { name: n.clone(), comps: c }).collect(),
        records: traj.len(),
        times: traj.times().to_vec(),
        config,
        norms: traj
            .cache_entries()
            .iter()
            .filter(|c| c.p.is_finite())
            .map(|c| StoredNorms { slot: c.slot.clone(), p: c.p, series: c.series.clone() })
            .collect(),
    };
    let js = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(js, &sidecar)?;
    Ok(())
}

/// Reads a checkpoint; the sidecar is optional and, when present, restores
/// cached norms.
pub fn load(path: &Path) -> Result<(Trajectory, Option<Sidecar>)> {
    let mut r = BufReader::new(File::open(path)?);
    if &get::<8>(&mut r)? != MAGIC {
        return Err(Error::Io(format!("{} is not a trajectory checkpoint", path.display())));
    }
    let dim = get_u32(&mut r)?;
    let n = get_u32(&mut r)?;
    let length = get_f64(&mut r)?;
    let dealias_fraction = get_f64(&mut r)?;
    let grid = Grid::from_spec(GridSpec { dim, points_per_dim: n, length, dealias_fraction })?;
    let nslots = get_u32(&mut r)?;
    let mut slots = Vec::with_capacity(nslots);
    for _ in 0..nslots {
        let comps = get_u32(&mut r)?;
        let len = get_u32(&mut r)?;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|e| Error::Io(e.to_string()))?;
        slots.push(SlotInfo { name, comps });
    }
    let nrec = u64::from_le_bytes(get(&mut r)?) as usize;
    let names: Vec<&str> = slots.iter().map(|s| s.name.as_str()).collect();
    let mut traj = Trajectory::new(&grid, &names);
    for _ in 0..nrec {
        let t = get_f64(&mut r)?;
        let mut fields = Vec::with_capacity(nslots);
        for s in &slots {
            let mut spec = Vec::with_capacity(s.comps);
            for _ in 0..s.comps {
                let mut buf = Vec::with_capacity(grid.len());
                for _ in 0..grid.len() {
                    let re = get_f64(&mut r)?;
                    let im = get_f64(&mut r)?;
                    buf.push(Complex64::new(re, im));
                }
                spec.push(buf);
            }
            fields.push(Field::from_spectral(&grid, spec)?);
        }
        traj.push(t, fields)?;
    }
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        let sc: Sidecar = serde_json::from_reader(BufReader::new(File::open(&side)?))?;
        if sc.records != traj.len() || sc.grid != grid.spec() {
            return Err(Error::Io("sidecar does not match the checkpoint".into()));
        }
        traj.set_cache(
            sc.norms.iter().map(|s| CachedNorms { slot: s.slot.clone(), p: s.p, series: s.series.clone() }).collect(),
        );
        Some(sc)
    } else {
        None
    };
    Ok((traj, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Ensemble;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(2, 16).unwrap();
        let mut t = Trajectory::new(&g, &["a", "u"]);
        for i in 0..3 {
            let a = Ensemble::new(1.0, 5).sample(&g, 1, i).unwrap();
            let u = Ensemble::new(1.0, 5).sample(&g, 2, 10 + i).unwrap();
            t.push(i as f64 * 0.1, vec![a, u]).unwrap();
        }
        t.cache_norms(2.0).unwrap();
        t.cache_norms(f64::INFINITY).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.bin");
        save(&t, serde_json::json!({"dt": 0.1}), &path).unwrap();
        let (back, side) = load(&path).unwrap();
        assert_eq!(back.times(), t.times());
        for i in 0..3 {
            for k in 0..2 {
                for c in 0..t.state(i)[k].comps() {
                    assert_eq!(back.state(i)[k].spectral(c), t.state(i)[k].spectral(c));
                }
            }
        }
        assert_eq!(back.cached("u", 2.0), t.cached("u", 2.0));
        assert!(back.cached("u", f64::INFINITY).is_none());
        assert_eq!(side.unwrap().config["dt"], 0.1);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        assert!(matches!(load(&path), Err(Error::Io(_))));
        assert!(matches!(load(&dir.path().join("missing.bin")), Err(Error::Io(_))));
    }
}
