use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instances::{AdversarialInstance, PlantedInstance};
use crate::objectives::LeastSquares;
use crate::support::SupportSet;

use super::{Dataset, Task};

/// JSON form of a generated instance, for replay from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: String,
    /// Row-major design matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub initial_support: Option<SupportSet>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, f64>,
}

impl InstanceFile {
    fn from_parts(kind: &str, f: &LeastSquares, x_star: Option<&DVector<f64>>) -> Self {
        let a = f.design();
        InstanceFile {
            kind: kind.to_string(),
            a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: f.target().iter().copied().collect(),
            x_star: x_star.map(|x| x.iter().copied().collect()),
            initial_support: None,
            seed: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_planted(p: &PlantedInstance) -> Self {
        let mut out = Self::from_parts("planted", &p.objective, Some(&p.x_star));
        out.metadata.insert("s_star".into(), p.s_star as f64);
        out.metadata.insert("noise_level".into(), p.noise_level);
        out.seed = Some(p.seed);
        out
    }

    pub fn from_adversarial(inst: &AdversarialInstance) -> Self {
        let mut out = Self::from_planted(&inst.planted);
        out.kind = "ompr_adversarial".into();
        out.initial_support = Some(inst.initial_support.clone());
        out.metadata.insert("kappa".into(), inst.kappa as f64);
        out.metadata.insert("delta".into(), inst.delta);
        out.metadata.insert("target_value".into(), inst.target_value());
        out
    }

    pub fn design(&self) -> Result<DMatrix<f64>> {
        let m = self.a.len();
        let n = self.a.first().map_or(0, Vec::len);
        if self.a.iter().any(|r| r.len() != n) {
            return Err(invalid("ragged design matrix"));
        }
        Ok(DMatrix::from_fn(m, n, |i, j| self.a[i][j]))
    }

    pub fn objective(&self) -> Result<LeastSquares> {
        LeastSquares::new(self.design()?, DVector::from_column_slice(&self.b))
    }

    pub fn x_star(&self) -> Option<DVector<f64>> {
        self.x_star.as_deref().map(DVector::from_column_slice)
    }

    pub fn dataset(&self, name: &str) -> Result<Dataset> {
        Dataset::new(name, self.design()?, DVector::from_column_slice(&self.b), Task::Regression)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer(BufWriter::new(File::create(path)?), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}
