//! Matrix CSV and equilibrium JSON formats.
//!
//! Matrix CSV: UTF-8, LF line endings. The header row starts with an empty
//! cell followed by the column labels; each following row is a row label and
//! its entries, written with at least nine significant digits.

use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Equilibrium, Method, MixedStrategy, PayoffMatrix};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};

/// Decimal text for `x` that round-trips exactly and carries at least nine
/// significant digits.
pub fn format_entry(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') {
        s.push('.');
    }
    let significant = s
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count();
    let pad = if x == 0.0 {
        9
    } else {
        9usize.saturating_sub(significant)
    };
    s.extend(std::iter::repeat_n('0', pad));
    s
}

pub fn write_matrix_csv<W: Write>(m: &PayoffMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = Vec::with_capacity(m.cols() + 1);
    header.push(String::new());
    header.extend(m.col_labels().iter().cloned());
    w.write_record(&header)?;
    for i in 0..m.rows() {
        let mut rec = Vec::with_capacity(m.cols() + 1);
        rec.push(m.row_labels()[i].clone());
        rec.extend(m.row(i).iter().map(|&x| format_entry(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn matrix_to_csv_string(m: &PayoffMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_csv(m, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// SHA-256 of the canonical CSV encoding.
pub fn matrix_digest(m: &PayoffMatrix) -> String {
    sha256_hex(matrix_to_csv_string(m).as_bytes())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<PayoffMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    if header.is_empty() || !header[0].trim().is_empty() {
        return Err(Error::Parse("first header cell must be empty".into()));
    }
    let col_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut row_labels = Vec::new();
    let mut entries = Vec::new();
    for (n, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != col_labels.len() + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} cells, got {}",
                n + 2,
                col_labels.len() + 1,
                rec.len()
            )));
        }
        row_labels.push(rec[0].to_owned());
        for cell in rec.iter().skip(1) {
            let x: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number {cell:?}", n + 2)))?;
            entries.push(x);
        }
    }
    PayoffMatrix::from_flat(
        row_labels.len(),
        col_labels.len(),
        entries,
        row_labels,
        col_labels,
    )
}

pub fn load_matrix(path: &Path) -> Result<PayoffMatrix> {
    read_matrix_csv(std::fs::File::open(path)?)
}

pub fn save_matrix(m: &PayoffMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, matrix_to_csv_string(m))?;
    Ok(())
}

/// Maps option labels to probabilities, in option order.
pub fn labelled(strategy: &MixedStrategy, labels: &[String]) -> IndexMap<String, f64> {
    labels
        .iter()
        .cloned()
        .zip(strategy.probs().iter().copied())
        .collect()
}

/// Serialized form of an [`Equilibrium`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumDoc {
    pub method: Method,
    pub value: f64,
    pub residual: f64,
    pub row_strategy: IndexMap<String, f64>,
    pub col_strategy: IndexMap<String, f64>,
}

impl EquilibriumDoc {
    pub fn new(m: &PayoffMatrix, eq: &Equilibrium) -> Self {
        Self {
            method: eq.method,
            value: eq.value,
            residual: eq.residual,
            row_strategy: labelled(&eq.row_strategy, m.row_labels()),
            col_strategy: labelled(&eq.col_strategy, m.col_labels()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entry_formatting() {
        assert_eq!(format_entry(0.5), "0.500000000");
        assert_eq!(format_entry(1.0), "1.00000000");
        assert_eq!(format_entry(0.0), "0.000000000");
        assert_eq!(format_entry(0.123456789012), "0.123456789012");
        assert_eq!(format_entry(1e-5), "0.0000100000000");
        assert_eq!(format_entry(12.5), "12.5000000");
    }

    #[test]
    fn csv_layout() {
        let m = PayoffMatrix::with_labels(
            vec![vec![1.0, 0.0], vec![0.25, 0.75]],
            vec!["s1".into(), "s2".into()],
            vec!["w1".into(), "w2".into()],
        )
        .unwrap();
        let text = matrix_to_csv_string(&m);
        assert_eq!(
            text,
            ",w1,w2\ns1,1.00000000,0.000000000\ns2,0.250000000,0.750000000\n"
        );
        assert_eq!(read_matrix_csv(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(read_matrix_csv("".as_bytes()).is_err());
        assert!(read_matrix_csv("x,a\nr,0.5\n".as_bytes()).is_err());
        assert!(read_matrix_csv(",a,b\nr,0.5\n".as_bytes()).is_err());
        assert!(read_matrix_csv(",a\nr,abc\n".as_bytes()).is_err());
        assert!(read_matrix_csv(",a\nr,1.5\n".as_bytes()).is_err());
        assert!(read_matrix_csv(",a\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trips(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let entries: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
            let m = PayoffMatrix::from_flat(
                rows, cols, entries,
                (0..rows).map(|i| format!("b{i}")).collect(),
                (0..cols).map(|j| format!("w{j}")).collect(),
            ).unwrap();
            let text = matrix_to_csv_string(&m);
            prop_assert_eq!(read_matrix_csv(text.as_bytes()).unwrap(), m);
        }
    }
}
