//! WALS-style typological data: language catalog, feature catalog and the
//! sparse language x feature value table.
//!
//! All three inputs are plain comma-delimited files with a header row:
//!
//! * languages: `code,name,family,genus[,iso_codes]` (ISO codes separated by `;`)
//! * features: `feature_id,name,num_categories`
//! * values: `language_code,feature_id,value_code` in long format; a blank
//!   `value_code` marks missing data and is skipped, never read as zero.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{csv_field, Table};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageRecord {
    pub code: String,
    pub name: String,
    pub family: String,
    pub genus: String,
    pub iso_codes: Vec<String>,
}

/// Languages keyed by WALS code, in file order.
#[derive(Debug, Clone, Default)]
pub struct LanguageCatalog {
    records: Vec<LanguageRecord>,
    index: HashMap<String, usize>,
}

impl LanguageCatalog {
    pub fn from_records(records: Vec<LanguageRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.code.is_empty() {
                return Err(Error::Malformed {
                    at: format!("record {}", i + 1),
                    message: "empty language code".into(),
                });
            }
            if index.insert(r.code.clone(), i).is_some() {
                return Err(Error::DuplicateCode {
                    at: format!("record {}", i + 1),
                    code: r.code.clone(),
                });
            }
        }
        Ok(LanguageCatalog { records, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table = Table::read(path)?;
        let code = table.column("code")?;
        let name = table.column("name")?;
        let family = table.column("family")?;
        let genus = table.column("genus")?;
        let iso = table.optional_column("iso_codes");
        if table.rows.is_empty() {
            return Err(Error::EmptyFile {
                path: path.to_path_buf(),
            });
        }

        let mut records = Vec::with_capacity(table.rows.len());
        let mut index = HashMap::with_capacity(table.rows.len());
        for row in &table.rows {
            let c = row.fields[code].clone();
            if c.is_empty() {
                return Err(Error::Malformed {
                    at: table.at(row),
                    message: "empty language code".into(),
                });
            }
            if index.insert(c.clone(), records.len()).is_some() {
                return Err(Error::DuplicateCode {
                    at: table.at(row),
                    code: c,
                });
            }
            let iso_codes = iso
                .map(|i| {
                    row.fields[i]
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            records.push(LanguageRecord {
                code: c,
                name: row.fields[name].clone(),
                family: row.fields[family].clone(),
                genus: row.fields[genus].clone(),
                iso_codes,
            });
        }
        Ok(LanguageCatalog { records, index })
    }

    pub fn get(&self, code: &str) -> Option<&LanguageRecord> {
        self.index.get(code).map(|&i| &self.records[i])
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.code.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageRecord> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    pub feature_id: String,
    pub name: String,
    /// Declared number of categories; never inferred from observed values.
    pub num_categories: u32,
}

#[derive(Debug, Clone, Default)]
pub struct FeatureCatalog {
    specs: Vec<FeatureSpec>,
    index: HashMap<String, usize>,
}

impl FeatureCatalog {
    pub fn from_specs(specs: Vec<FeatureSpec>) -> Result<Self> {
        let mut index = HashMap::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            let at = format!("record {}", i + 1);
            if s.num_categories < 2 {
                return Err(Error::InvalidCategoryCount {
                    at,
                    value: s.num_categories.to_string(),
                });
            }
            if index.insert(s.feature_id.clone(), i).is_some() {
                return Err(Error::DuplicateFeatureId {
                    at,
                    feature_id: s.feature_id.clone(),
                });
            }
        }
        Ok(FeatureCatalog { specs, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table = Table::read(path)?;
        let id = table.column("feature_id")?;
        let name = table.column("name")?;
        let k = table.column("num_categories")?;
        if table.rows.is_empty() {
            return Err(Error::EmptyFile {
                path: path.to_path_buf(),
            });
        }

        let mut specs = Vec::with_capacity(table.rows.len());
        let mut index = HashMap::with_capacity(table.rows.len());
        for row in &table.rows {
            let raw = &row.fields[k];
            let num_categories = match raw.parse::<u32>() {
                Ok(n) if n >= 2 => n,
                _ => {
                    return Err(Error::InvalidCategoryCount {
                        at: table.at(row),
                        value: raw.clone(),
                    })
                }
            };
            let feature_id = row.fields[id].clone();
            if feature_id.is_empty() {
                return Err(Error::Malformed {
                    at: table.at(row),
                    message: "empty feature id".into(),
                });
            }
            if index.insert(feature_id.clone(), specs.len()).is_some() {
                return Err(Error::DuplicateFeatureId {
                    at: table.at(row),
                    feature_id,
                });
            }
            specs.push(FeatureSpec {
                feature_id,
                name: row.fields[name].clone(),
                num_categories,
            });
        }
        Ok(FeatureCatalog { specs, index })
    }

    pub fn get(&self, feature_id: &str) -> Option<&FeatureSpec> {
        self.index.get(feature_id).map(|&i| &self.specs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.specs.iter()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

/// Sparse (language, feature) -> category code store.
///
/// Only defined values are stored. Iteration is ordered by language code and
/// then feature id, which makes serialization deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureValueTable {
    languages: Vec<String>,
    values: BTreeMap<String, BTreeMap<String, u32>>,
}

/// Result of [`FeatureValueTable::load`]: the table and the number of rows
/// skipped because their value was blank.
#[derive(Debug, Clone)]
pub struct LoadedValues {
    pub table: FeatureValueTable,
    pub skipped: usize,
}

impl FeatureValueTable {
    pub fn new(languages: &LanguageCatalog) -> Self {
        FeatureValueTable {
            languages: languages.codes().map(String::from).collect(),
            values: BTreeMap::new(),
        }
    }

    /// Stores one value after checking it against both catalogs.
    pub fn insert(
        &mut self,
        languages: &LanguageCatalog,
        features: &FeatureCatalog,
        language: &str,
        feature_id: &str,
        value: i64,
    ) -> Result<()> {
        self.insert_at(languages, features, language, feature_id, value, None)
    }

    fn insert_at(
        &mut self,
        languages: &LanguageCatalog,
        features: &FeatureCatalog,
        language: &str,
        feature_id: &str,
        value: i64,
        at: Option<String>,
    ) -> Result<()> {
        if !languages.contains(language) {
            return Err(Error::UnknownLanguage {
                code: language.to_string(),
                at,
            });
        }
        let spec = features
            .get(feature_id)
            .ok_or_else(|| Error::UnknownFeature {
                feature_id: feature_id.to_string(),
                at: at.clone(),
            })?;
        if value < 1 || value > i64::from(spec.num_categories) {
            return Err(Error::ValueOutOfRange {
                feature_id: feature_id.to_string(),
                value,
                num_categories: spec.num_categories,
                at,
            });
        }
        self.values
            .entry(language.to_string())
            .or_default()
            .insert(feature_id.to_string(), value as u32);
        Ok(())
    }

    pub fn load(
        path: &Path,
        languages: &LanguageCatalog,
        features: &FeatureCatalog,
    ) -> Result<LoadedValues> {
        let table = Table::read(path)?;
        Self::from_table(&table, languages, features)
    }

    /// Parses the long-format values text; `origin` is used in diagnostics.
    pub fn parse(
        origin: &Path,
        text: &str,
        languages: &LanguageCatalog,
        features: &FeatureCatalog,
    ) -> Result<LoadedValues> {
        let table = Table::parse(origin, text)?;
        Self::from_table(&table, languages, features)
    }

    fn from_table(
        table: &Table,
        languages: &LanguageCatalog,
        features: &FeatureCatalog,
    ) -> Result<LoadedValues> {
        let lang = table.column("language_code")?;
        let feat = table.column("feature_id")?;
        let val = table.column("value_code")?;

        let mut out = FeatureValueTable::new(languages);
        let mut skipped = 0;
        for row in &table.rows {
            let raw = &row.fields[val];
            if raw.is_empty() {
                skipped += 1;
                continue;
            }
            let value: i64 = raw.parse().map_err(|_| Error::Malformed {
                at: table.at(row),
                message: format!("value_code `{raw}` is not an integer"),
            })?;
            out.insert_at(
                languages,
                features,
                &row.fields[lang],
                &row.fields[feat],
                value,
                Some(table.at(row)),
            )?;
        }
        Ok(LoadedValues {
            table: out,
            skipped,
        })
    }

    /// Serializes back to the long format, sorted by language then feature.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("language_code,feature_id,value_code\n");
        for (lang, feats) in &self.values {
            for (f, v) in feats {
                out.push_str(&format!("{},{},{}\n", csv_field(lang), csv_field(f), v));
            }
        }
        out
    }

    pub fn get(&self, language: &str, feature_id: &str) -> Option<u32> {
        self.values.get(language)?.get(feature_id).copied()
    }

    /// Features with a defined value for `language`, sorted by id.
    pub fn defined(&self, language: &str) -> Result<Vec<&str>> {
        self.check_language(language)?;
        Ok(self
            .values
            .get(language)
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default())
    }

    /// Number of stored (defined) entries.
    pub fn len(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fraction of the language x feature grid that is populated.
    pub fn density(&self, num_features: usize) -> f64 {
        let cells = self.languages.len() * num_features;
        if cells == 0 {
            0.0
        } else {
            self.len() as f64 / cells as f64
        }
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    fn check_language(&self, code: &str) -> Result<()> {
        if self.languages.iter().any(|l| l == code) {
            Ok(())
        } else {
            Err(Error::unknown_language(code))
        }
    }

    /// Per-feature value pairs `(feature_id, value_a, value_b)` over the
    /// features defined for both languages, sorted by feature id.
    pub(crate) fn shared_values<'a>(
        &'a self,
        a: &str,
        b: &str,
    ) -> Result<Vec<(&'a str, u32, u32)>> {
        self.check_language(a)?;
        self.check_language(b)?;
        let (Some(va), Some(vb)) = (self.values.get(a), self.values.get(b)) else {
            return Ok(Vec::new());
        };
        Ok(va
            .iter()
            .filter_map(|(f, &x)| vb.get(f).map(|&y| (f.as_str(), x, y)))
            .collect())
    }
}

/// Features defined for both `a` and `b`, in lexicographic order of feature
/// id. For `a == b` this is every feature defined for `a`.
pub fn shared_features<'a>(table: &'a FeatureValueTable, a: &str, b: &str) -> Result<Vec<&'a str>> {
    Ok(table
        .shared_values(a, b)?
        .into_iter()
        .map(|(f, _, _)| f)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const STUDY_LANGUAGES: &str = "code,name,family,genus,iso_codes\n\
        eng,English,Indo-European,Germanic,eng\n\
        ger,German,Indo-European,Germanic,deu\n\
        dsh,Danish,Indo-European,Germanic,dan\n\
        pol,Polish,Indo-European,Slavic,pol\n\
        rus,Russian,Indo-European,Slavic,rus\n\
        scr,Serbian-Croatian,Indo-European,Slavic,hrv;srp;bos\n\
        jpn,Japanese,Japanese,Japanese,jpn\n\
        kor,Korean,Korean,Korean,kor\n";

    fn small_catalogs() -> (LanguageCatalog, FeatureCatalog) {
        let langs = LanguageCatalog::from_records(
            ["A", "B", "C"]
                .iter()
                .map(|c| LanguageRecord {
                    code: c.to_string(),
                    name: c.to_string(),
                    family: "f".into(),
                    genus: "g".into(),
                    iso_codes: vec![],
                })
                .collect(),
        )
        .unwrap();
        let feats = FeatureCatalog::from_specs(
            ["f1", "f2", "f3"]
                .iter()
                .map(|f| FeatureSpec {
                    feature_id: f.to_string(),
                    name: f.to_string(),
                    num_categories: 3,
                })
                .collect(),
        )
        .unwrap();
        (langs, feats)
    }

    #[test]
    fn loads_study_language_set() {
        let f = write_tmp(STUDY_LANGUAGES);
        let cat = LanguageCatalog::load(f.path()).unwrap();
        assert_eq!(cat.len(), 8);
        let mut families: Vec<_> = cat.iter().map(|r| r.family.as_str()).collect();
        families.sort();
        families.dedup();
        assert_eq!(families.len(), 3);
        assert_eq!(cat.get("scr").unwrap().iso_codes, ["hrv", "srp", "bos"]);
        assert_eq!(cat.codes().next(), Some("eng"));
    }

    #[test]
    fn header_only_language_file_is_empty() {
        let f = write_tmp("code,name,family,genus\n");
        assert!(matches!(
            LanguageCatalog::load(f.path()),
            Err(Error::EmptyFile { .. })
        ));
    }

    #[test]
    fn duplicate_language_code_reports_line() {
        let f = write_tmp(
            "code,name,family,genus\neng,English,IE,Germanic\neng,English2,IE,Germanic\n",
        );
        match LanguageCatalog::load(f.path()) {
            Err(Error::DuplicateCode { at, code }) => {
                assert_eq!(code, "eng");
                assert!(at.ends_with(":3"), "{at}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_genus_column() {
        let f = write_tmp("code,name,family\neng,English,IE\n");
        match LanguageCatalog::load(f.path()) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "genus"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn feature_row_parses_category_count() {
        let f =
            write_tmp("feature_id,name,num_categories\n81A,Order of Subject Object and Verb,7\n");
        let cat = FeatureCatalog::load(f.path()).unwrap();
        assert_eq!(cat.get("81A").unwrap().num_categories, 7);
    }

    #[test]
    fn quoted_feature_name_with_comma() {
        let f = write_tmp(
            "feature_id,name,num_categories\n81A,\"Order of Subject, Object and Verb\",7\n",
        );
        let cat = FeatureCatalog::load(f.path()).unwrap();
        assert_eq!(
            cat.get("81A").unwrap().name,
            "Order of Subject, Object and Verb"
        );
    }

    #[test]
    fn single_category_feature_rejected() {
        let f = write_tmp("feature_id,name,num_categories\n1A,Trivial,1\n");
        assert!(matches!(
            FeatureCatalog::load(f.path()),
            Err(Error::InvalidCategoryCount { .. })
        ));
        let f = write_tmp("feature_id,name,num_categories\n1A,Trivial,2.5\n");
        assert!(matches!(
            FeatureCatalog::load(f.path()),
            Err(Error::InvalidCategoryCount { .. })
        ));
    }

    #[test]
    fn duplicate_feature_id_rejected() {
        let f = write_tmp("feature_id,name,num_categories\n1A,x,3\n1A,y,4\n");
        assert!(matches!(
            FeatureCatalog::load(f.path()),
            Err(Error::DuplicateFeatureId { .. })
        ));
    }

    fn eng_catalogs() -> (LanguageCatalog, FeatureCatalog) {
        let langs = write_tmp("code,name,family,genus\neng,English,IE,Germanic\n");
        let feats =
            write_tmp("feature_id,name,num_categories\n81A,Order of Subject Object and Verb,7\n");
        (
            LanguageCatalog::load(langs.path()).unwrap(),
            FeatureCatalog::load(feats.path()).unwrap(),
        )
    }

    #[test]
    fn in_range_value_stored() {
        let (l, f) = eng_catalogs();
        let v = write_tmp("language_code,feature_id,value_code\neng,81A,2\n");
        let loaded = FeatureValueTable::load(v.path(), &l, &f).unwrap();
        assert_eq!(loaded.table.get("eng", "81A"), Some(2));
        assert_eq!(loaded.skipped, 0);
    }

    #[test]
    fn out_of_range_value_reports_line() {
        let (l, f) = eng_catalogs();
        let v = write_tmp("language_code,feature_id,value_code\neng,81A,9\n");
        match FeatureValueTable::load(v.path(), &l, &f) {
            Err(Error::ValueOutOfRange {
                value,
                num_categories,
                at,
                ..
            }) => {
                assert_eq!((value, num_categories), (9, 7));
                assert!(at.unwrap().ends_with(":2"));
            }
            other => panic!("{other:?}"),
        }
        let v = write_tmp("language_code,feature_id,value_code\neng,81A,0\n");
        assert!(matches!(
            FeatureValueTable::load(v.path(), &l, &f),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn unknown_references_rejected() {
        let (l, f) = eng_catalogs();
        let v = write_tmp("language_code,feature_id,value_code\nxyz,81A,1\n");
        assert!(matches!(
            FeatureValueTable::load(v.path(), &l, &f),
            Err(Error::UnknownLanguage { at: Some(_), .. })
        ));
        let v = write_tmp("language_code,feature_id,value_code\neng,99Z,1\n");
        assert!(matches!(
            FeatureValueTable::load(v.path(), &l, &f),
            Err(Error::UnknownFeature { at: Some(_), .. })
        ));
    }

    #[test]
    fn blank_values_are_skipped_not_zero() {
        let (l, f) = eng_catalogs();
        let v = write_tmp("language_code,feature_id,value_code\neng,81A,\n");
        let loaded = FeatureValueTable::load(v.path(), &l, &f).unwrap();
        assert_eq!(loaded.skipped, 1);
        assert!(loaded.table.is_empty());
        assert_eq!(loaded.table.get("eng", "81A"), None);
    }

    #[test]
    fn shared_features_is_set_intersection() {
        let (l, f) = small_catalogs();
        let mut t = FeatureValueTable::new(&l);
        t.insert(&l, &f, "A", "f1", 1).unwrap();
        t.insert(&l, &f, "A", "f2", 2).unwrap();
        t.insert(&l, &f, "B", "f2", 3).unwrap();
        t.insert(&l, &f, "B", "f3", 1).unwrap();
        assert_eq!(shared_features(&t, "A", "B").unwrap(), ["f2"]);
        assert_eq!(shared_features(&t, "A", "A").unwrap(), ["f1", "f2"]);
        assert!(shared_features(&t, "A", "C").unwrap().is_empty());
        assert!(matches!(
            shared_features(&t, "A", "Z"),
            Err(Error::UnknownLanguage { .. })
        ));
    }

    #[test]
    fn density_counts_populated_cells() {
        let (l, f) = small_catalogs();
        let mut t = FeatureValueTable::new(&l);
        t.insert(&l, &f, "A", "f1", 1).unwrap();
        assert!((t.density(f.len()) - 1.0 / 9.0).abs() < 1e-15);
    }
}
