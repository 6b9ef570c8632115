//! Snapshot dumps.
//!
//! CSV: header `t,theta_1,...,theta_k,x_0,...,x_{n-1}`, one row per snapshot,
//! numbers in Rust's shortest round-trip formatting.
//!
//! Binary (all little-endian): `b"SKSN"`, then `u64` grid size `n`, `u64`
//! torus dimension `k`, `u64` snapshot count `m`, `f64` domain length, `u8`
//! domain tag (0 circle, 1 Neumann interval, 2 Dirichlet interval), followed
//! by `m` records of `1 + k + n` `f64`s: `t`, the base phase, the profile.

use std::io::{self, Read, Write};

use crate::forcing::BasePoint;

use super::grid::{Domain, GridFunction, OrbitSnapshot};

const MAGIC: &[u8; 4] = b"SKSN";

pub fn snapshot_csv_header(k: usize, n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=k).map(|i| format!("theta_{i}")));
    cols.extend((0..n).map(|j| format!("x_{j}")));
    cols.join(",")
}

pub fn write_snapshots_csv<W: Write>(mut w: W, snaps: &[OrbitSnapshot]) -> io::Result<()> {
    let Some(first) = snaps.first() else {
        return Ok(());
    };
    writeln!(w, "{}", snapshot_csv_header(first.base.dim(), first.profile.len()))?;
    for s in snaps {
        let mut row = Vec::with_capacity(1 + s.base.dim() + s.profile.len());
        row.push(s.t.to_string());
        row.extend(s.base.phase().iter().map(f64::to_string));
        row.extend(s.profile.values().iter().map(f64::to_string));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_snapshots_binary<W: Write>(mut w: W, snaps: &[OrbitSnapshot]) -> io::Result<()> {
    let (n, k, length, tag) = match snaps.first() {
        Some(s) => (s.profile.len(), s.base.dim(), s.profile.length(), domain_tag(s.profile.domain())),
        None => (0, 0, 0.0, 0),
    };
    w.write_all(MAGIC)?;
    for v in [n as u64, k as u64, snaps.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&length.to_le_bytes())?;
    w.write_all(&[tag])?;
    for s in snaps {
        w.write_all(&s.t.to_le_bytes())?;
        for v in s.base.phase().iter().chain(s.profile.values()) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshots_binary<R: Read>(mut r: R) -> io::Result<Vec<OrbitSnapshot>> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a snapshot dump"));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> io::Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let n = next_u64(&mut r)? as usize;
    let k = next_u64(&mut r)? as usize;
    let m = next_u64(&mut r)? as usize;
    let length = f64::from_bits(next_u64(&mut r)?);
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let domain = match tag[0] {
        0 => Domain::Circle { length },
        1 => Domain::IntervalNeumann { length },
        2 => Domain::IntervalDirichlet { length },
        _ => return Err(bad("unknown domain tag")),
    };
    let mut out = Vec::with_capacity(m);
    let mut buf = vec![0u8; 8 * (1 + k + n)];
    for _ in 0..m {
        r.read_exact(&mut buf)?;
        let vals: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let profile = GridFunction::new(vals[1 + k..].to_vec(), domain).map_err(|e| bad(&e.to_string()))?;
        out.push(OrbitSnapshot::new(profile, BasePoint::new(vals[1..1 + k].to_vec()), vals[0]));
    }
    Ok(out)
}

fn domain_tag(d: Domain) -> u8 {
    match d {
        Domain::Circle { .. } => 0,
        Domain::IntervalNeumann { .. } => 1,
        Domain::IntervalDirichlet { .. } => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<OrbitSnapshot> {
        (0..3)
            .map(|i| {
                let u = GridFunction::from_fn(Domain::Circle { length: 2.0 }, 16, |x| x * i as f64).unwrap();
                OrbitSnapshot::new(u, BasePoint::new(vec![0.1 * i as f64, 0.5]), i as f64 * 0.25)
            })
            .collect()
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_snapshots_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t,theta_1,theta_2,x_0,x_1,"));
        assert!(header.ends_with(",x_15"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn binary_roundtrip() {
        let snaps = sample();
        let mut buf = Vec::new();
        write_snapshots_binary(&mut buf, &snaps).unwrap();
        assert_eq!(buf.len(), 4 + 24 + 8 + 1 + 3 * 8 * (1 + 2 + 16));
        assert_eq!(read_snapshots_binary(&buf[..]).unwrap(), snaps);
    }
}
