use std::path::Path;

use crate::error::{Error, Result};

pub const LABELS_HEADER: [&str; 3] = ["index", "class", "superclass"];

/// Class (and optional superclass) label for every example `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    classes: Vec<String>,
    superclasses: Vec<Option<String>>,
}

impl LabelTable {
    pub fn new(classes: Vec<String>, superclasses: Vec<Option<String>>) -> Result<Self> {
        if classes.len() != superclasses.len() {
            return Err(Error::shape(
                "labels",
                format!("{} superclass entries", classes.len()),
                format!("{}", superclasses.len()),
            ));
        }
        Ok(Self {
            classes,
            superclasses,
        })
    }

    pub fn from_classes<S: Into<String>>(classes: impl IntoIterator<Item = S>) -> Self {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        let superclasses = vec![None; classes.len()];
        Self {
            classes,
            superclasses,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, k: usize) -> &str {
        &self.classes[k]
    }

    pub fn superclass(&self, k: usize) -> Option<&str> {
        self.superclasses[k].as_deref()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn has_superclasses(&self) -> bool {
        self.superclasses.iter().any(Option::is_some)
    }

    /// Parses a labels CSV with header `index,class,superclass`.
    pub fn read(path: impl AsRef<Path>, num_examples: usize) -> Result<Self> {
        let path = path.as_ref();
        let err = |detail: String| Error::Labels {
            path: path.to_path_buf(),
            detail,
        };
        if !path.exists() {
            return Err(Error::MissingFile {
                path: path.to_path_buf(),
            });
        }
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| err(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| err(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != LABELS_HEADER {
            return Err(err(format!(
                "header must be `index,class,superclass`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }

        let mut classes: Vec<Option<String>> = vec![None; num_examples];
        let mut superclasses: Vec<Option<String>> = vec![None; num_examples];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let index: usize = rec[0]
                .trim()
                .parse()
                .map_err(|_| err(format!("row {}: bad index `{}`", line + 1, &rec[0])))?;
            if index >= num_examples {
                return Err(err(format!(
                    "row {}: index {index} out of range for {num_examples} examples",
                    line + 1
                )));
            }
            if classes[index].is_some() {
                return Err(err(format!("index {index} appears more than once")));
            }
            classes[index] = Some(rec[1].to_string());
            let sup = &rec[2];
            if !sup.is_empty() {
                superclasses[index] = Some(sup.to_string());
            }
        }
        let classes = classes
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| err(format!("no row for example {k}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            classes,
            superclasses,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let err = |e: csv::Error| Error::Labels {
            path: path.to_path_buf(),
            detail: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(LABELS_HEADER).map_err(err)?;
        for (k, (c, s)) in self.classes.iter().zip(&self.superclasses).enumerate() {
            w.write_record([k.to_string().as_str(), c, s.as_deref().unwrap_or("")])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
