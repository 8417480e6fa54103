//! Binary dataset files and CSV export.
//!
//! Layout: the magic line `HSLB1`, UTF-8 `key=value` header lines
//! (`domain`, `n`, `count`, `seed`, `epsilon`, `dim`, `version`), an empty
//! line, then `count` records of `dim` little-endian `f32` features followed
//! by one little-endian `f64` label.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetMeta};
use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::neuralnet::checkpoint::read_header;

pub const DATASET_MAGIC: &[u8] = b"HSLB1\n";
pub const GENERATOR_VERSION: u32 = 1;

pub fn write_to<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    let m = &dataset.meta;
    out.write_all(DATASET_MAGIC)?;
    writeln!(out, "domain={}", m.domain)?;
    writeln!(out, "n={}", m.n)?;
    writeln!(out, "count={}", m.count)?;
    writeln!(out, "seed={}", m.seed)?;
    writeln!(out, "epsilon={}", m.epsilon)?;
    writeln!(out, "dim={}", m.dim)?;
    writeln!(out, "version={}", m.generator_version)?;
    writeln!(out)?;
    for s in dataset.iter() {
        for v in s.features {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&s.label.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_from<R: BufRead>(mut input: R) -> Result<Dataset> {
    let mut magic = [0u8; 6];
    input
        .read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for a dataset header".into()))?;
    if magic != DATASET_MAGIC {
        return Err(Error::Format("not a dataset file (bad magic)".into()));
    }
    let header = read_header(&mut input)?;
    let get = |k: &str| {
        header
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("dataset header missing `{k}`")))
    };
    let parse_err = |k: &str| Error::Format(format!("bad `{k}` in dataset header"));
    let domain: DomainKind = get("domain")?.parse().map_err(|_| parse_err("domain"))?;
    let n: usize = get("n")?.parse().map_err(|_| parse_err("n"))?;
    let count: usize = get("count")?.parse().map_err(|_| parse_err("count"))?;
    let seed: u64 = get("seed")?.parse().map_err(|_| parse_err("seed"))?;
    let epsilon: f64 = get("epsilon")?.parse().map_err(|_| parse_err("epsilon"))?;
    let dim: usize = get("dim")?.parse().map_err(|_| parse_err("dim"))?;
    let generator_version: u32 = get("version")?.parse().map_err(|_| parse_err("version"))?;

    let expected_dim = domain.feature_dim(n);
    if dim != expected_dim {
        return Err(Error::Format(format!(
            "encoder dimension {dim} does not match {domain} n={n} (expected {expected_dim})"
        )));
    }
    if epsilon != domain.epsilon() {
        return Err(Error::Format(format!("epsilon {epsilon} does not match {domain}")));
    }

    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    let record = dim * 4 + 8;
    if body.len() != count * record {
        return Err(Error::Format(format!(
            "dataset body has {} bytes, expected {} ({count} records of {record} bytes)",
            body.len(),
            count * record
        )));
    }
    let mut features = Vec::with_capacity(count * dim);
    let mut labels = Vec::with_capacity(count);
    for rec in body.chunks_exact(record) {
        let (f, y) = rec.split_at(dim * 4);
        features.extend(f.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))));
        labels.push(f64::from_le_bytes(y.try_into().expect("8 bytes")));
    }
    let meta = DatasetMeta {
        domain,
        n,
        count,
        seed,
        generator_version,
        epsilon,
        dim,
    };
    Dataset::new(meta, features, labels)
}

pub fn save(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_to(dataset, BufWriter::new(file))
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path)?;
    read_from(BufReader::new(file))
}

/// Writes `train.hslb` and `test.hslb` into `dir`. The two sets must come
/// from different seeds.
pub fn save_split(train: &Dataset, test: &Dataset, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    if train.meta.seed == test.meta.seed {
        return Err(Error::InvalidArgument("train and test sets must use different seeds".into()));
    }
    if train.meta.spec() != test.meta.spec() {
        return Err(Error::InvalidArgument("train and test sets must share domain and size".into()));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (tr, te) = (dir.join("train.hslb"), dir.join("test.hslb"));
    save(train, &tr)?;
    save(test, &te)?;
    Ok((tr, te))
}

/// `f0..f{dim-1},hstar`, six significant digits.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dataset.dim()).map(|i| format!("f{i}")).collect();
    header.push("hstar".into());
    w.write_record(&header)?;
    for s in dataset.iter() {
        let row = s
            .features
            .iter()
            .map(|&v| format_sig(f64::from(v), 6))
            .chain(std::iter::once(format_sig(s.label, 6)));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_pancake_dataset, gen_tsp_dataset};

    #[test]
    fn roundtrip_bytes() {
        let ds = gen_tsp_dataset(4, 100, 8).unwrap();
        let mut buf = Vec::new();
        write_to(&ds, &mut buf).unwrap();
        let back = read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        let mut again = Vec::new();
        write_to(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_mismatched_dim() {
        let ds = gen_pancake_dataset(3, 5, 3, 1).unwrap();
        let mut buf = Vec::new();
        write_to(&ds, &mut buf).unwrap();
        let text = String::from_utf8_lossy(&buf).replace("dim=9", "dim=8");
        let err = read_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn rejects_truncation_and_bad_magic() {
        let ds = gen_pancake_dataset(3, 5, 3, 1).unwrap();
        let mut buf = Vec::new();
        write_to(&ds, &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_from(buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_from(&b"HSLB2\n"[..]), Err(Error::Format(_))));
        assert!(matches!(read_from(&b"HS"[..]), Err(Error::Format(_))));
    }

    #[test]
    fn split_requires_distinct_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let a = gen_pancake_dataset(3, 5, 3, 1).unwrap();
        let b = gen_pancake_dataset(3, 5, 3, 2).unwrap();
        assert!(save_split(&a, &a, dir.path()).is_err());
        let (tr, te) = save_split(&a, &b, dir.path()).unwrap();
        assert_eq!(load(tr).unwrap(), a);
        assert_eq!(load(te).unwrap(), b);
    }

    #[test]
    fn csv_export() {
        let ds = gen_tsp_dataset(2, 3, 1).unwrap();
        let mut out = Vec::new();
        write_csv(&ds, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "f0,f1,f2,f3,f4,f5,f6,f7,hstar");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.3f32 as f64, 6), "0.3");
        assert_eq!(format_sig(3.7, 6), "3.7");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(123456789.0, 6), "1.23457e8");
        assert_eq!(format_sig(0.000012345, 6), "1.2345e-5");
        assert_eq!(format_sig(-2.5, 6), "-2.5");
        assert_eq!(format_sig(1.0 / 3.0, 6), "0.333333");
    }
}
