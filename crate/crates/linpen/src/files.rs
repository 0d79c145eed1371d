//! Instance files and corpus manifests.
//!
//! An instance file is a JSON object
//!
//! ```json
//! {"id": "8_0", "n_products": 8, "seed": 0, "c_matrix": [[0.0, ...], ...],
//!  "budget_A": 3, "lambda": [1.5, 1.0]}
//! ```
//!
//! where `lambda` is present only for two-quarter instances (flat variable
//! index `q·n_products + i`) and `seed` is omitted for hand-built matrices.
//! A corpus directory holds such files plus `manifest.csv` with columns
//! `id,n_p,seed,file`.

use std::fs;
use std::path::{Path, PathBuf};

use linpen_core::{CMatrix, SingleQuarterInstance, TwoQuarterInstance};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    id: String,
    n_products: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    c_matrix: Vec<Vec<f64>>,
    #[serde(rename = "budget_A")]
    budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<[f64; 2]>,
}

/// Either instance family.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Single(SingleQuarterInstance),
    TwoQuarter(TwoQuarterInstance),
}

impl Instance {
    pub fn id(&self) -> &str {
        match self {
            Instance::Single(i) => &i.id,
            Instance::TwoQuarter(i) => &i.id,
        }
    }

    pub fn n_products(&self) -> usize {
        match self {
            Instance::Single(i) => i.n_products(),
            Instance::TwoQuarter(i) => i.n_products(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Instance::Single(i) => i.seed,
            Instance::TwoQuarter(i) => i.seed,
        }
    }

    pub fn as_single(&self) -> Option<&SingleQuarterInstance> {
        match self {
            Instance::Single(i) => Some(i),
            Instance::TwoQuarter(_) => None,
        }
    }

    pub fn as_two_quarter(&self) -> Option<&TwoQuarterInstance> {
        match self {
            Instance::TwoQuarter(i) => Some(i),
            Instance::Single(_) => None,
        }
    }

    fn to_file(&self) -> InstanceFile {
        let (id, c, budget, seed, lambda) = match self {
            Instance::Single(i) => (&i.id, &i.c, i.budget, i.seed, None),
            Instance::TwoQuarter(i) => (&i.id, &i.c, i.budget, i.seed, Some(i.lambda)),
        };
        InstanceFile { id: id.clone(), n_products: c.n(), seed, c_matrix: c.rows(), budget, lambda }
    }

    fn from_file(f: InstanceFile) -> linpen_core::Result<Self> {
        if f.c_matrix.len() != f.n_products {
            return Err(linpen_core::Error::Validation(format!(
                "n_products is {} but c_matrix has {} rows",
                f.n_products,
                f.c_matrix.len()
            )));
        }
        let c = CMatrix::from_rows(&f.c_matrix)?;
        Ok(match f.lambda {
            None => {
                let mut i = SingleQuarterInstance::new(f.id, c, f.budget)?;
                i.seed = f.seed;
                Instance::Single(i)
            }
            Some(lambda) => {
                let mut i = TwoQuarterInstance::new(f.id, c, f.budget, lambda)?;
                i.seed = f.seed;
                Instance::TwoQuarter(i)
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes") + "\n"
    }
}

impl From<SingleQuarterInstance> for Instance {
    fn from(i: SingleQuarterInstance) -> Self {
        Instance::Single(i)
    }
}

impl From<TwoQuarterInstance> for Instance {
    fn from(i: TwoQuarterInstance) -> Self {
        Instance::TwoQuarter(i)
    }
}

pub fn save_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, inst.to_json()).map_err(|e| HarnessError::io(path, e))
}

pub fn parse_instance(path: &Path, text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| HarnessError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    Instance::from_file(file).map_err(|source| HarnessError::Invalid { path: path.to_path_buf(), source })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_instance(path, &text)
}

/// One row of `manifest.csv`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub n_p: usize,
    pub seed: u64,
    pub file: String,
}

/// A directory of instance files indexed by its manifest.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Corpus {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let mut reader = csv::Reader::from_path(&path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => HarnessError::Parse { path: path.clone(), message: e.to_string() },
            _ => HarnessError::Csv(e),
        })?;
        let entries = reader
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestEntry>, _>>()
            .map_err(|e| HarnessError::Parse { path: path.clone(), message: e.to_string() })?;
        Ok(Corpus { dir: dir.to_path_buf(), entries })
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn path_of(&self, entry: &ManifestEntry) -> PathBuf {
        self.dir.join(&entry.file)
    }

    pub fn load(&self, entry: &ManifestEntry) -> Result<Instance> {
        load_instance(&self.path_of(entry))
    }

    pub fn load_id(&self, id: &str) -> Result<Instance> {
        let entry = self
            .entry(id)
            .ok_or_else(|| HarnessError::config("instances.ids", format!("unknown instance id {id}")))?;
        self.load(entry)
    }

    /// Hex SHA-256 of an entry's file.
    pub fn file_hash(&self, entry: &ManifestEntry) -> Result<String> {
        let path = self.path_of(entry);
        let bytes = fs::read(&path).map_err(|e| HarnessError::io(&path, e))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

/// Writes instances and their manifest into `dir`, creating it if needed.
/// Instances without a seed are rejected since the manifest records one.
pub fn write_corpus(dir: &Path, instances: &[Instance]) -> Result<Corpus> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut entries = Vec::with_capacity(instances.len());
    for inst in instances {
        let seed = inst
            .seed()
            .ok_or_else(|| HarnessError::config("instances", format!("{} has no generator seed", inst.id())))?;
        let file = format!("{}.json", inst.id());
        save_instance(&dir.join(&file), inst)?;
        entries.push(ManifestEntry { id: inst.id().to_string(), n_p: inst.n_products(), seed, file });
    }
    let path = dir.join(MANIFEST_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    for e in &entries {
        w.serialize(e)?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    Ok(Corpus { dir: dir.to_path_buf(), entries })
}

/// Generator settings for the shipped corpus layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    /// Sizes of single-quarter instances.
    pub sizes: Vec<usize>,
    /// Sizes of two-quarter instances.
    pub two_quarter_sizes: Vec<usize>,
    /// Instances per size; instance `k` of size `n` is `"{n}_{k}"`.
    pub count: usize,
    /// Seed of instance `k` is `seed_offset + k`.
    pub seed_offset: u64,
    pub budget: usize,
    pub lambda: [f64; 2],
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            sizes: (6..=12).collect(),
            two_quarter_sizes: vec![8],
            count: 100,
            seed_offset: 0,
            budget: 3,
            lambda: [1.5, 1.0],
        }
    }
}

pub const SINGLE_DIR: &str = "single";
pub const TWO_QUARTER_DIR: &str = "two_quarter";

impl CorpusSpec {
    pub fn single_instances(&self) -> linpen_core::Result<Vec<Instance>> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for k in 0..self.count {
                let seed = self.seed_offset + k as u64;
                out.push(SingleQuarterInstance::generate(format!("{n}_{k}"), n, seed, self.budget)?.into());
            }
        }
        Ok(out)
    }

    /// Two-quarter instances reuse the single-quarter matrices of the same seed.
    pub fn two_quarter_instances(&self) -> linpen_core::Result<Vec<Instance>> {
        let mut out = Vec::new();
        for &n in &self.two_quarter_sizes {
            for k in 0..self.count {
                let seed = self.seed_offset + k as u64;
                let mut inst =
                    TwoQuarterInstance::new(format!("{n}_{k}"), CMatrix::generate(n, seed)?, self.budget, self.lambda)?;
                inst.seed = Some(seed);
                out.push(inst.into());
            }
        }
        Ok(out)
    }

    /// Writes `root/single` and `root/two_quarter`.
    pub fn write(&self, root: &Path) -> Result<(Corpus, Corpus)> {
        let single = write_corpus(&root.join(SINGLE_DIR), &self.single_instances()?)?;
        let two = write_corpus(&root.join(TWO_QUARTER_DIR), &self.two_quarter_instances()?)?;
        Ok((single, two))
    }
}
