//! File formats: CSV tables, JSON envelopes, matrix dumps and fitness vectors.
//!
//! Reals in CSV are written as `{:.16e}` (17 significant digits) so that
//! every value round-trips bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FitnessVector, MatrixKind, SymmetricMatrix, WeightMode};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a real with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Header row plus string records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.iter().map(str::to_string).collect();
        let rows = rd
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, csv::Error>>()?;
        Ok(Table { header, rows })
    }
}

/// JSON document with a schema version and the resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<C, D> {
    pub schema_version: u32,
    pub config: C,
    pub data: D,
}

pub fn to_json<C: Serialize, D: Serialize>(config: &C, data: &D) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        config,
        data,
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Metadata stored alongside a dumped matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub n: usize,
    pub alpha: f64,
    pub epsilon_n: f64,
    pub seed: u64,
    pub kind: MatrixKind,
}

const HEADER_PREFIX: &str = "# ";

fn header_line(h: &MatrixHeader) -> String {
    format!(
        "{HEADER_PREFIX}n={},alpha={},epsilon_n={},seed={},kind={}",
        h.n,
        real(h.alpha),
        real(h.epsilon_n),
        h.seed,
        h.kind.as_str()
    )
}

fn parse_header_line(line: &str) -> Result<MatrixHeader> {
    let body = line
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| Error::Parse("missing matrix header".into()))?;
    let mut n = None;
    let mut alpha = None;
    let mut eps = None;
    let mut seed = None;
    let mut kind = None;
    for part in body.trim().split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field {part:?}")))?;
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("{k}: {e}"));
        match k {
            "n" => n = Some(v.parse().map_err(|e| bad(&e))?),
            "alpha" => alpha = Some(v.parse().map_err(|e| bad(&e))?),
            "epsilon_n" => eps = Some(v.parse().map_err(|e| bad(&e))?),
            "seed" => seed = Some(v.parse().map_err(|e| bad(&e))?),
            "kind" => kind = Some(MatrixKind::parse(v)?),
            _ => return Err(Error::Parse(format!("unknown header field {k:?}"))),
        }
    }
    let missing = |f: &str| Error::Parse(format!("header lacks {f}"));
    Ok(MatrixHeader {
        n: n.ok_or_else(|| missing("n"))?,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        epsilon_n: eps.ok_or_else(|| missing("epsilon_n"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        kind: kind.ok_or_else(|| missing("kind"))?,
    })
}

fn check_header(h: &MatrixHeader, m: &SymmetricMatrix) -> Result<()> {
    if h.n != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: h.n,
        });
    }
    Ok(())
}

/// Row-major CSV with a `# key=value,...` header line.
pub fn write_matrix_csv(path: &Path, header: &MatrixHeader, m: &SymmetricMatrix) -> Result<()> {
    check_header(header, m)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header_line(header))?;
    for i in 0..m.n() {
        let line: Vec<String> = m.row(i).iter().map(|&v| real(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<(MatrixHeader, SymmetricMatrix)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    let header = parse_header_line(&first)?;
    let mut data = Vec::with_capacity(header.n * header.n);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        for v in line.split(',') {
            data.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{v:?}: {e}")))?,
            );
        }
    }
    if data.len() != header.n * header.n {
        return Err(Error::DimensionMismatch {
            expected: header.n * header.n,
            got: data.len(),
        });
    }
    let m = SymmetricMatrix::from_row_major(header.n, data, header.kind)?;
    Ok((header, m))
}

const BINARY_MAGIC: &[u8; 8] = b"MSMMAT1\0";

/// Binary dump: magic, `u64` header length, JSON header, then `n*n`
/// little-endian `f64` in row-major order.
pub fn write_matrix_binary(path: &Path, header: &MatrixHeader, m: &SymmetricMatrix) -> Result<()> {
    check_header(header, m)?;
    let mut w = BufWriter::new(File::create(path)?);
    let json = serde_json::to_vec(header)?;
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_binary(path: &Path) -> Result<(MatrixHeader, SymmetricMatrix)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Parse("not a matrix dump".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: MatrixHeader = serde_json::from_slice(&json)?;
    let mut data = Vec::with_capacity(header.n * header.n);
    let mut buf = [0u8; 8];
    for _ in 0..header.n * header.n {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    let m = SymmetricMatrix::from_row_major(header.n, data, header.kind)?;
    Ok((header, m))
}

/// Fitness CSV with columns `j, x_j`, `j` starting at 1 for the hub.
pub fn write_fitness_csv(path: &Path, x: &FitnessVector) -> Result<()> {
    let mut t = Table::new(&["j", "x_j"]);
    for (i, v) in x.values().iter().enumerate() {
        t.push(vec![(i + 1).to_string(), real(*v)]);
    }
    t.write_csv(BufWriter::new(File::create(path)?))
}

pub fn read_fitness_csv(path: &Path, mode: WeightMode, seed: Option<u64>) -> Result<FitnessVector> {
    let t = Table::read_csv(File::open(path)?)?;
    let x = t
        .rows
        .iter()
        .map(|r| {
            r.get(1)
                .ok_or_else(|| Error::Parse("fitness row lacks x_j".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        })
        .collect::<Result<Vec<f64>>>()?;
    FitnessVector::from_weights(x, mode, seed)
}
