//! Column-major tabular data with split tags and CSV round-tripping.

use std::io::{Read, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column `{0}` not found")]
    UnknownColumn(String),
    #[error("column lengths differ")]
    Ragged,
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// How rows are tagged. Rows are i.i.d., so contiguous blocks suffice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitScheme {
    /// 8:1:1 train/val/test.
    Observational,
    /// 8:2 train/val.
    Interventional,
    AllTest,
}

impl SplitScheme {
    pub fn tags(self, n: usize) -> Vec<Split> {
        let (train, val) = match self {
            SplitScheme::Observational => (n * 8 / 10, n / 10),
            SplitScheme::Interventional => (n * 8 / 10, n - n * 8 / 10),
            SplitScheme::AllTest => (0, 0),
        };
        (0..n)
            .map(|i| match i {
                i if i < train => Split::Train,
                i if i < train + val => Split::Val,
                _ => Split::Test,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    split: Vec<Split>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        scheme: SplitScheme,
    ) -> Result<Self, DatasetError> {
        let n = columns.first().map_or(0, Vec::len);
        if names.len() != columns.len() || columns.iter().any(|c| c.len() != n) {
            return Err(DatasetError::Ragged);
        }
        Ok(Dataset {
            names,
            columns,
            split: scheme.tags(n),
        })
    }

    pub fn n(&self) -> usize {
        self.split.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn column_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.columns[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, DatasetError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DatasetError::UnknownColumn(name.into()))
    }

    pub fn column_named(&self, name: &str) -> Result<&[f64], DatasetError> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn split_tags(&self) -> &[Split] {
        &self.split
    }

    pub fn count(&self, split: Split) -> usize {
        self.split.iter().filter(|&&s| s == split).count()
    }

    /// Rows tagged `split`, retagged as-is.
    pub fn subset(&self, split: Split) -> Dataset {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| self.split[i] == split).collect();
        Dataset {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| keep.iter().map(|&i| c[i]).collect())
                .collect(),
            split: vec![split; keep.len()],
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn mean(&self, i: usize) -> f64 {
        let c = &self.columns[i];
        c.iter().sum::<f64>() / c.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.names.iter().map(String::as_str).chain(["split"]))?;
        for i in 0..self.n() {
            let mut rec: Vec<String> = self.columns.iter().map(|c| c[i].to_string()).collect();
            rec.push(self.split[i].as_str().into());
            out.write_record(&rec)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, DatasetError> {
        let mut input = csv::Reader::from_reader(r);
        let header: Vec<String> = input.headers()?.iter().map(str::to_owned).collect();
        let has_split = header.last().is_some_and(|h| h == "split");
        let width = header.len() - has_split as usize;
        let mut columns = vec![Vec::new(); width];
        let mut split = Vec::new();
        for (row, rec) in input.records().enumerate() {
            let rec = rec?;
            for (j, col) in columns.iter_mut().enumerate() {
                let v: f64 = rec[j].trim().parse().map_err(|_| DatasetError::BadRow {
                    row: row + 1,
                    message: format!("`{}` is not a number", &rec[j]),
                })?;
                col.push(v);
            }
            split.push(if has_split {
                rec[width].parse().map_err(|message| DatasetError::BadRow {
                    row: row + 1,
                    message,
                })?
            } else {
                Split::Train
            });
        }
        Ok(Dataset {
            names: header[..width].to_vec(),
            columns,
            split,
        })
    }
}
