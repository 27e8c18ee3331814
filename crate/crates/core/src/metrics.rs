//! Language distance metrics: the quantified WALS distance, the averaged
//! lang2vec distance, and lookups into published matrices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::matrix::{DistanceMatrix, MatrixKind};
use crate::typology::{FeatureCatalog, FeatureValueTable};

/// Pairs sharing fewer features than this get a [`SparseOverlap`] warning.
pub const SPARSE_OVERLAP_THRESHOLD: usize = 10;

pub const WALS_PROVENANCE: &str = "wals-quantified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalsMode {
    /// Mean of the normalized per-feature differences.
    #[default]
    MeanAbs,
    /// Root of the mean squared normalized difference.
    Rms,
}

impl fmt::Display for WalsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalsMode::MeanAbs => "mean-abs",
            WalsMode::Rms => "rms",
        })
    }
}

impl FromStr for WalsMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mean-abs" => Ok(WalsMode::MeanAbs),
            "rms" => Ok(WalsMode::Rms),
            other => Err(format!("unknown WALS mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseOverlap {
    pub a: String,
    pub b: String,
    pub shared: usize,
}

impl fmt::Display for SparseOverlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} and {} share only {} features (threshold {})",
            self.a, self.b, self.shared, SPARSE_OVERLAP_THRESHOLD
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalsDistance {
    pub value: f64,
    pub shared: usize,
    pub warning: Option<SparseOverlap>,
}

/// Distance between two languages over the features both define.
///
/// Category codes are read as ordinal positions. Each shared feature with
/// values `x`, `y` and `k` declared categories contributes
/// `|x - y| / (k - 1)`, which lies in `[0, 1]`.
pub fn quantified_wals_distance(
    table: &FeatureValueTable,
    features: &FeatureCatalog,
    a: &str,
    b: &str,
    mode: WalsMode,
) -> Result<WalsDistance> {
    let shared = table.shared_values(a, b)?;
    if shared.is_empty() {
        return Err(Error::NoSharedFeatures {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    let diffs = shared.iter().map(|&(f, x, y)| {
        let k = features
            .get(f)
            .map(|s| s.num_categories)
            .ok_or_else(|| Error::UnknownFeature {
                feature_id: f.to_string(),
                at: None,
            })?;
        Ok(f64::from(x.abs_diff(y)) / f64::from(k - 1))
    });
    let mut sum = 0.0;
    for d in diffs {
        let d: f64 = d?;
        sum += match mode {
            WalsMode::MeanAbs => d,
            WalsMode::Rms => d * d,
        };
    }
    let n = shared.len() as f64;
    let value = match mode {
        WalsMode::MeanAbs => sum / n,
        WalsMode::Rms => (sum / n).sqrt(),
    };
    let warning = (shared.len() < SPARSE_OVERLAP_THRESHOLD).then(|| SparseOverlap {
        a: a.to_string(),
        b: b.to_string(),
        shared: shared.len(),
    });
    Ok(WalsDistance {
        value,
        shared: shared.len(),
        warning,
    })
}

/// A computed WALS matrix with the per-pair overlap sizes behind it.
#[derive(Debug, Clone)]
pub struct WalsMatrix {
    pub distances: DistanceMatrix,
    shared: Vec<usize>,
    pub warnings: Vec<SparseOverlap>,
}

impl WalsMatrix {
    pub fn shared(&self, row: usize, col: usize) -> usize {
        self.shared[row * self.distances.len() + col]
    }

    /// Shared-feature counts in matrix form (diagonal = features defined).
    pub fn shared_counts(&self) -> DistanceMatrix {
        let mut m = DistanceMatrix::new(
            self.distances.languages().to_vec(),
            MatrixKind::Similarity,
            true,
            "wals-shared-features",
        )
        .expect("languages already validated");
        for (k, v) in self.distances.metadata() {
            m.set_meta(k, v).expect("metadata already validated");
        }
        let n = m.len();
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, Some(self.shared(i, j) as f64));
            }
        }
        m.set_precision(Some(0));
        m
    }
}

/// Pairwise WALS distances with per-pair feature selection. Pairs without
/// shared features are stored as missing.
pub fn wals_distance_matrix(
    table: &FeatureValueTable,
    features: &FeatureCatalog,
    languages: &[&str],
    mode: WalsMode,
) -> Result<WalsMatrix> {
    if languages.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: languages.len(),
        });
    }
    let n = languages.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let results: Vec<Result<Option<WalsDistance>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            match quantified_wals_distance(table, features, languages[i], languages[j], mode) {
                Ok(d) => Ok(Some(d)),
                Err(Error::NoSharedFeatures { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut distances = DistanceMatrix::new(
        languages.iter().map(|s| s.to_string()).collect(),
        MatrixKind::Distance,
        true,
        WALS_PROVENANCE,
    )?;
    distances.set_meta("mode", &mode.to_string())?;
    let mut shared = vec![0; n * n];
    let mut warnings = Vec::new();
    for (&(i, j), r) in pairs.iter().zip(results) {
        match r? {
            Some(d) => {
                let value = if i == j { 0.0 } else { d.value };
                distances.set(i, j, Some(value));
                shared[i * n + j] = d.shared;
                shared[j * n + i] = d.shared;
                if i != j {
                    warnings.extend(d.warning);
                }
            }
            None if i == j => distances.set(i, i, Some(0.0)),
            None => distances.set(i, j, None),
        }
    }
    Ok(WalsMatrix {
        distances,
        shared,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Genetic,
    Geographic,
    Syntactic,
    Inventory,
    Phonological,
    Featural,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Genetic,
        Category::Geographic,
        Category::Syntactic,
        Category::Inventory,
        Category::Phonological,
        Category::Featural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Genetic => "genetic",
            Category::Geographic => "geographic",
            Category::Syntactic => "syntactic",
            Category::Inventory => "inventory",
            Category::Phonological => "phonological",
            Category::Featural => "featural",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// The six lang2vec category distances for one language pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CategoryDistances {
    values: [Option<f64>; 6],
}

impl CategoryDistances {
    pub fn new() -> Self {
        Self::default()
    }

    /// All six categories, in [`Category::ALL`] order.
    pub fn from_values(values: [f64; 6]) -> Result<Self> {
        let mut cd = Self::new();
        for (c, v) in Category::ALL.into_iter().zip(values) {
            cd.set(c, Some(v))?;
        }
        Ok(cd)
    }

    pub fn set(&mut self, category: Category, value: Option<f64>) -> Result<()> {
        if let Some(v) = value {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Malformed {
                    at: category.name().to_string(),
                    message: format!("category distance {v} outside [0, 1]"),
                });
            }
        }
        self.values[category.index()] = value;
        Ok(())
    }

    pub fn get(&self, category: Category) -> Option<f64> {
        self.values[category.index()]
    }

    pub fn present(&self) -> usize {
        self.values.iter().flatten().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lang2vecPolicy {
    /// All six categories must be present.
    #[default]
    Strict,
    /// Average whatever is present.
    AllowPartial,
}

impl fmt::Display for Lang2vecPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang2vecPolicy::Strict => "strict",
            Lang2vecPolicy::AllowPartial => "allow-partial",
        })
    }
}

impl FromStr for Lang2vecPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Lang2vecPolicy::Strict),
            "allow-partial" => Ok(Lang2vecPolicy::AllowPartial),
            other => Err(format!("unknown lang2vec policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lang2vecAverage {
    pub value: f64,
    pub categories: usize,
}

pub fn lang2vec_average(cd: &CategoryDistances, policy: Lang2vecPolicy) -> Result<Lang2vecAverage> {
    let present: Vec<f64> = cd.values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::NoCategories);
    }
    if policy == Lang2vecPolicy::Strict && present.len() < 6 {
        return Err(Error::MissingCategory {
            missing: Category::ALL
                .into_iter()
                .filter(|c| cd.get(*c).is_none())
                .map(Category::name)
                .collect(),
        });
    }
    // sorted summation keeps the mean independent of category order
    let mut sorted = present;
    sorted.sort_by(f64::total_cmp);
    Ok(Lang2vecAverage {
        value: sorted.iter().sum::<f64>() / sorted.len() as f64,
        categories: sorted.len(),
    })
}

/// One row of a category-distance file.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryRow {
    pub source: String,
    pub target: String,
    pub distances: CategoryDistances,
}

/// Reads `source,target,genetic,geographic,syntactic,inventory,phonological,featural`
/// rows; blank or `NA` cells are missing categories.
pub fn load_category_distances(path: &Path) -> Result<Vec<CategoryRow>> {
    let table = Table::read(path)?;
    let source = table.column("source")?;
    let target = table.column("target")?;
    let columns: Vec<(Category, usize)> = Category::ALL
        .into_iter()
        .map(|c| table.column(c.name()).map(|i| (c, i)))
        .collect::<Result<_>>()?;
    if table.rows.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut cd = CategoryDistances::new();
        for &(c, i) in &columns {
            let raw = &row.fields[i];
            let value = if raw.is_empty() || raw == "NA" {
                None
            } else {
                Some(raw.parse::<f64>().map_err(|_| Error::UnparseableCell {
                    at: table.at(row),
                    cell: raw.clone(),
                })?)
            };
            cd.set(c, value).map_err(|e| match e {
                Error::Malformed { message, .. } => Error::Malformed {
                    at: table.at(row),
                    message,
                },
                other => other,
            })?;
        }
        rows.push(CategoryRow {
            source: row.fields[source].clone(),
            target: row.fields[target].clone(),
            distances: cd,
        });
    }
    Ok(rows)
}

/// Averages each row and assembles a symmetric distance matrix. Languages
/// appear in order of first mention; unlisted pairs are missing.
pub fn lang2vec_matrix(rows: &[CategoryRow], policy: Lang2vecPolicy) -> Result<DistanceMatrix> {
    let mut languages: Vec<String> = Vec::new();
    for r in rows {
        for code in [&r.source, &r.target] {
            if !languages.contains(code) {
                languages.push(code.clone());
            }
        }
    }
    let provenance = match policy {
        Lang2vecPolicy::Strict => "lang2vec-average",
        Lang2vecPolicy::AllowPartial => "lang2vec-average-partial",
    };
    let mut m = DistanceMatrix::new(languages, MatrixKind::Distance, true, provenance)?;
    for i in 0..m.len() {
        m.set(i, i, Some(0.0));
    }
    let mut fewest = 6;
    for r in rows {
        let i = m.index_of(&r.source).expect("collected above");
        let j = m.index_of(&r.target).expect("collected above");
        let avg = lang2vec_average(&r.distances, policy)?;
        fewest = fewest.min(avg.categories);
        if i == j {
            if avg.value != 0.0 {
                return Err(Error::InvalidMatrix {
                    at: format!("({0}, {0})", r.source),
                    message: format!("self distance must be 0, found {}", avg.value),
                });
            }
            continue;
        }
        if let Some(prev) = m.get(i, j) {
            if prev != avg.value {
                return Err(Error::SymmetryViolation {
                    a: r.source.clone(),
                    b: r.target.clone(),
                    forward: prev.to_string(),
                    backward: avg.value.to_string(),
                });
            }
        }
        m.set(i, j, Some(avg.value));
    }
    if policy == Lang2vecPolicy::AllowPartial {
        m.set_meta("min_categories", &fewest.to_string())?;
    }
    Ok(m)
}

/// Value at row `source`, column `target`; asymmetric matrices are read with
/// rows as transfer sources.
pub fn similarity_lookup(m: &DistanceMatrix, source: &str, target: &str) -> Result<Option<f64>> {
    m.lookup(source, target)
}
