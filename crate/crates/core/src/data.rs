//! Dataset ingestion, synthetic Friedman benchmarks and the
//! train/validation/test split protocol.
//!
//! All randomness comes from [`SplitMix64`], a counter-based generator whose
//! `i`-th output is a fixed function of `seed` and `i`. Uniform variates take
//! the top 53 bits of an output; normal variates use the cosine branch of the
//! Box-Muller transform on two consecutive uniforms. The streams are therefore
//! identical on every platform and can be re-implemented elsewhere from this
//! description alone.

use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Counter-based 64-bit generator.
///
/// Output `i` (starting at 1) is `mix(seed + i * 0x9E3779B97F4A7C15)` where
/// `mix` is the SplitMix64 finalizer:
///
/// ```text
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// z =  z ^ (z >> 31)
/// ```
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal by Box-Muller (cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `0..bound` by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// Reads a CSV with a header row; the last column is the response.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file)
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let (header, rows) = read_table(reader, 2)?;
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for mut row in rows {
        y.push(row.pop().expect("width >= 2"));
        x.push(row);
    }
    let names = header[..header.len() - 1].to_vec();
    Dataset::new(x, y, names)
}

/// Reads explanatory columns only, for prediction. A file with `d + 1`
/// columns is taken to carry a response in its last column, which is dropped.
pub fn read_features<R: std::io::Read>(reader: R, d: usize) -> Result<Vec<Vec<f64>>> {
    let (header, mut rows) = read_table(reader, 1)?;
    if header.len() == d + 1 {
        rows.iter_mut().for_each(|r| {
            r.pop();
        });
    } else if header.len() != d {
        return Err(Error::invalid(format!(
            "expected {d} feature columns (or {} with a response), found {}",
            d + 1,
            header.len()
        )));
    }
    Ok(rows)
}

pub fn load_features(path: impl AsRef<Path>, d: usize) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    read_features(file, d)
}

/// Header and numeric rows of a CSV with at least `min_width` columns.
fn read_table<R: std::io::Read>(reader: R, min_width: usize) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if header.len() < min_width || header.iter().all(str::is_empty) {
        return Err(Error::parse(
            1,
            if min_width >= 2 {
                "need at least one explanatory column and a response"
            } else {
                "empty header"
            },
        ));
    }
    let width = header.len();
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        // Data rows are numbered from 1; the header is line 1 of the file.
        let row_no = idx + 1;
        let line = row_no + 1;
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        if record.len() != width {
            return Err(Error::parse(
                line,
                format!("row {row_no} has {} fields, header has {width}", record.len()),
            ));
        }
        let mut vals = Vec::with_capacity(width);
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    line,
                    format!("row {row_no}, column {} ({}): not a number: {cell:?}", col + 1, &header[col]),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    line,
                    format!("row {row_no}, column {}: non-finite value", col + 1),
                ));
            }
            vals.push(v);
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::invalid("CSV has a header but no data rows"));
    }
    Ok((header.iter().map(str::to_owned).collect(), rows))
}

/// Writes `ds` as CSV with a header; the response is written last, named
/// `response_name`.
pub fn write_csv<W: std::io::Write>(ds: &Dataset, response_name: &str, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.column_names().iter().map(String::as_str).collect();
    header.push(response_name);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(&header).map_err(io)?;
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| format!("{v:?}")).collect();
        rec.push(format!("{:?}", ds.y()[i]));
        wtr.write_record(&rec).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Friedman #1 response (first five coordinates used).
pub fn friedman1(x: &[f64]) -> f64 {
    10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
        + 20.0 * (x[2] - 0.5).powi(2)
        + 10.0 * x[3]
        + 5.0 * x[4]
}

/// Friedman #2 response.
pub fn friedman2(x: &[f64]) -> f64 {
    let inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
    (x[0] * x[0] + inner * inner).sqrt()
}

/// Friedman #3 response.
pub fn friedman3(x: &[f64]) -> f64 {
    ((x[1] * x[2] - 1.0 / (x[1] * x[3])) / x[0]).atan()
}

/// Draws `n` rows from Friedman benchmark `variant` (1, 2 or 3) with
/// additive Gaussian noise.
///
/// Variant 1 has ten inputs on `[0, 1]`, five of them irrelevant. Variants 2
/// and 3 have four inputs on `[0, 100] x [40pi, 560pi] x [0, 1] x [1, 11]`.
/// Each row consumes its input uniforms in column order, then two uniforms
/// for the noise term.
pub fn friedman_generate(variant: u8, n: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("friedman_generate: n must be positive"));
    }
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(Error::invalid("friedman_generate: noise_sd must be finite and >= 0"));
    }
    let ranges: Vec<(f64, f64)> = match variant {
        1 => vec![(0.0, 1.0); 10],
        2 | 3 => {
            let pi = std::f64::consts::PI;
            vec![(0.0, 100.0), (40.0 * pi, 560.0 * pi), (0.0, 1.0), (1.0, 11.0)]
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown Friedman variant {other} (expected 1, 2 or 3)"
            )))
        }
    };
    let response: fn(&[f64]) -> f64 = match variant {
        1 => friedman1,
        2 => friedman2,
        _ => friedman3,
    };
    let mut rng = SplitMix64::new(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.uniform_in(lo, hi)).collect();
        let eps = rng.normal();
        y.push(response(&row) + noise_sd * eps);
        x.push(row);
    }
    Dataset::from_rows(x, y)
}

/// Fractions of the three-way split and the seed of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
    pub repetition: u64,
}

impl SplitSpec {
    pub fn new(seed: u64, repetition: u64) -> Self {
        SplitSpec {
            train: 0.5,
            val: 0.3,
            test: 0.2,
            seed,
            repetition,
        }
    }

    /// `(train, val, test)` sizes: validation and test sizes are rounded to
    /// nearest and the remainder goes to training.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let val = (self.val * n as f64).round() as usize;
        let test = (self.test * n as f64).round() as usize;
        let train = n - val - test;
        (train, val, test)
    }

    fn stream_seed(&self) -> u64 {
        mix64(self.seed ^ mix64(self.repetition.wrapping_add(GOLDEN)))
    }
}

/// Row indices of each part of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    if n < 5 {
        return Err(Error::invalid(format!("split needs at least 5 rows, got {n}")));
    }
    let sum = spec.train + spec.val + spec.test;
    if (sum - 1.0).abs() > 1e-12 || spec.train < 0.0 || spec.val < 0.0 || spec.test < 0.0 {
        return Err(Error::invalid("split fractions must be non-negative and sum to 1"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(spec.stream_seed());
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        idx.swap(i, j);
    }
    let (ntrain, nval, _) = spec.sizes(n);
    let test = idx.split_off(ntrain + nval);
    let val = idx.split_off(ntrain);
    Ok(SplitIndices {
        train: idx,
        val,
        test,
    })
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let parts = split_indices(ds.n(), spec)?;
    Ok((
        ds.subset(&parts.train)?,
        ds.subset(&parts.val)?,
        ds.subset(&parts.test)?,
    ))
}
