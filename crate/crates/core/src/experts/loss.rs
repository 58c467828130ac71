use std::io::Read;
use std::ops::Index;
use std::path::Path;

use crate::{Error, Result};

/// Losses of the `N` experts in one round, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    /// Out-of-range and non-finite values are rejected, never clamped.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("loss vector must cover at least one expert"));
        }
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::arg(format!(
                "loss of expert {j} is {v}, outside [0, 1]"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for LossVector {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// A `T x N` loss sequence stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    rounds: usize,
    experts: usize,
    data: Vec<f64>,
}

impl LossMatrix {
    pub fn from_rows(rows: Vec<LossVector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::arg("loss matrix needs at least one round"));
        };
        let experts = first.len();
        let mut data = Vec::with_capacity(rows.len() * experts);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != experts {
                return Err(Error::arg(format!(
                    "round {} has {} losses, expected {experts}",
                    t + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row.values());
        }
        Ok(Self {
            rounds: rows.len(),
            experts,
            data,
        })
    }

    pub fn from_vecs(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(LossVector::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    /// Row of round `t`, zero-based.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.experts..(t + 1) * self.experts]
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.experts + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.experts)
    }

    pub fn loss_vector(&self, t: usize) -> LossVector {
        LossVector(self.row(t).to_vec())
    }

    /// First `rounds` rows.
    pub fn prefix(&self, rounds: usize) -> Result<Self> {
        if rounds == 0 || rounds > self.rounds {
            return Err(Error::arg(format!(
                "prefix of {rounds} rounds out of range 1..={}",
                self.rounds
            )));
        }
        Ok(Self {
            rounds,
            experts: self.experts,
            data: self.data[..rounds * self.experts].to_vec(),
        })
    }

    /// Reads a CSV with one row per round and one column per expert. A header
    /// row is detected when its first field is not a number.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if i == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
                continue;
            }
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::arg(format!("line {}: `{f}` is not a number", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(
                LossVector::new(values).map_err(|e| Error::arg(format!("line {}: {e}", i + 1)))?,
            );
        }
        Self::from_rows(rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(LossVector::new(vec![0.0, 1.0]).is_ok());
        assert!(LossVector::new(vec![0.0, 1.0001]).is_err());
        assert!(LossVector::new(vec![-0.1]).is_err());
        assert!(LossVector::new(vec![f64::NAN]).is_err());
        assert!(LossVector::new(vec![]).is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let with = "e1,e2\n0,1\n0.5,0.25\n";
        let without = "0,1\n0.5,0.25\n";
        let a = LossMatrix::read_csv(with.as_bytes()).unwrap();
        let b = LossMatrix::read_csv(without.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rounds(), 2);
        assert_eq!(a.get(1, 1), 0.25);

        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        assert_eq!(LossMatrix::read_csv(out.as_slice()).unwrap(), a);
    }

    #[test]
    fn csv_errors() {
        assert!(LossMatrix::read_csv("0,1\n0,2\n".as_bytes()).is_err());
        assert!(LossMatrix::read_csv("0,1\n0\n".as_bytes()).is_err());
        assert!(LossMatrix::read_csv("0,x\n".as_bytes()).is_err());
        assert!(LossMatrix::read_csv("".as_bytes()).is_err());
    }
}
