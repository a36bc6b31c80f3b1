//! Language catalog: the shared registry of languages, groupings, bridge
//! flags, and data sizes that every planning stage consumes.
//!
//! A catalog is loaded from two TSV files and validated once; afterwards it is
//! immutable and safe to share across threads.
//!
//! Catalog file, one row per language:
//! `iso  name  family  scripts  grouping  is_bridge  mono_sentences`
//! (`scripts` is `;`-separated). Bitext counts live in a companion file with
//! rows `src  tgt  sentence_pairs`, each unordered pair listed exactly once.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use thiserror::Error;

use crate::io::{self, TsvError};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Tsv(#[from] TsvError),
    #[error("duplicate iso code {0:?}")]
    DuplicateIso(String),
    #[error("{path}:{line}: unknown language {iso:?} in bitext pair")]
    UnknownLanguage {
        path: String,
        line: usize,
        iso: String,
    },
    #[error("bitext pair {a:?}-{b:?} listed more than once (counts {first} and {second})")]
    AsymmetricBitext {
        a: String,
        b: String,
        first: u64,
        second: u64,
    },
    #[error("designated pivot {0:?} not present in catalog")]
    MissingEnglish(String),
    #[error("bitext pair {0:?}-{0:?} pairs a language with itself")]
    SelfPair(String),
}

/// Default pivot language code; every language is expected to pair with it.
pub const DEFAULT_ENGLISH_ISO: &str = "en";

#[derive(Debug, Clone, PartialEq)]
pub struct Language {
    pub iso: String,
    pub name: String,
    pub family: String,
    pub scripts: Vec<String>,
    pub grouping_id: String,
    pub is_bridge: bool,
    pub mono_sentences: u64,
    /// Known sentence-pair counts keyed by partner iso. Symmetric across the
    /// catalog: `a.bitext_sentences[b] == b.bitext_sentences[a]`.
    pub bitext_sentences: BTreeMap<String, u64>,
}

impl Language {
    /// Total bitext sentence pairs across all partners.
    pub fn total_bitext(&self) -> u64 {
        self.bitext_sentences.values().sum()
    }
}

#[derive(Debug, Clone)]
pub struct LanguageCatalog {
    languages: Vec<Language>,
    index: HashMap<String, usize>,
    groupings: BTreeMap<String, Vec<String>>,
    english_iso: String,
}

impl LanguageCatalog {
    /// Loads and validates a catalog. `bitext_path` may be omitted when pair
    /// counts are not needed (e.g. structural validation of the language list).
    pub fn load(catalog_path: &Path, bitext_path: Option<&Path>) -> Result<Self, CatalogError> {
        Self::load_with_english(catalog_path, bitext_path, DEFAULT_ENGLISH_ISO)
    }

    pub fn load_with_english(
        catalog_path: &Path,
        bitext_path: Option<&Path>,
        english_iso: &str,
    ) -> Result<Self, CatalogError> {
        let content = io::read_to_string(catalog_path)?;
        let path_str = catalog_path.display().to_string();
        let rows = io::parse_tsv(&content, &path_str, 7)?;

        let mut languages = Vec::with_capacity(rows.len());
        for row in rows {
            let [iso, name, family, scripts, grouping, is_bridge, mono] = row.fields[..] else {
                unreachable!("parse_tsv enforces column count");
            };
            if iso.is_empty() {
                return Err(io::field_error(&path_str, row.line, "empty iso code").into());
            }
            let is_bridge = match is_bridge {
                "0" | "false" => false,
                "1" | "true" => true,
                other => {
                    return Err(io::field_error(
                        &path_str,
                        row.line,
                        format!("is_bridge must be 0/1/true/false, got {other:?}"),
                    )
                    .into())
                }
            };
            let mono_sentences: u64 = mono.parse().map_err(|_| {
                io::field_error(
                    &path_str,
                    row.line,
                    format!("mono_sentences must be a non-negative integer, got {mono:?}"),
                )
            })?;
            languages.push(Language {
                iso: iso.to_string(),
                name: name.to_string(),
                family: family.to_string(),
                scripts: scripts
                    .split(';')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
                grouping_id: grouping.to_string(),
                is_bridge,
                mono_sentences,
                bitext_sentences: BTreeMap::new(),
            });
        }

        if let Some(bitext_path) = bitext_path {
            load_bitext_counts(&mut languages, bitext_path)?;
        }

        Self::from_languages(languages, english_iso)
    }

    /// Builds a catalog from pre-constructed languages, enforcing every
    /// catalog invariant. Bitext maps must already be symmetric.
    pub fn from_languages(
        languages: Vec<Language>,
        english_iso: &str,
    ) -> Result<Self, CatalogError> {
        let mut index = HashMap::with_capacity(languages.len());
        for (i, lang) in languages.iter().enumerate() {
            if index.insert(lang.iso.clone(), i).is_some() {
                return Err(CatalogError::DuplicateIso(lang.iso.clone()));
            }
        }
        if !index.contains_key(english_iso) {
            return Err(CatalogError::MissingEnglish(english_iso.to_string()));
        }

        let mut groupings: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for lang in &languages {
            groupings
                .entry(lang.grouping_id.clone())
                .or_default()
                .push(lang.iso.clone());
        }
        for members in groupings.values_mut() {
            members.sort();
        }

        // Symmetry and referential checks on the bitext maps.
        for lang in &languages {
            for (partner, &count) in &lang.bitext_sentences {
                if partner == &lang.iso {
                    return Err(CatalogError::SelfPair(lang.iso.clone()));
                }
                let Some(&j) = index.get(partner) else {
                    return Err(CatalogError::UnknownLanguage {
                        path: String::from("<catalog>"),
                        line: 0,
                        iso: partner.clone(),
                    });
                };
                let back = languages[j].bitext_sentences.get(&lang.iso).copied();
                if back != Some(count) {
                    return Err(CatalogError::AsymmetricBitext {
                        a: lang.iso.clone(),
                        b: partner.clone(),
                        first: count,
                        second: back.unwrap_or(0),
                    });
                }
            }
        }

        Ok(Self {
            languages,
            index,
            groupings,
            english_iso: english_iso.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    pub fn get(&self, iso: &str) -> Option<&Language> {
        self.index.get(iso).map(|&i| &self.languages[i])
    }

    pub fn contains(&self, iso: &str) -> bool {
        self.index.contains_key(iso)
    }

    pub fn english_iso(&self) -> &str {
        &self.english_iso
    }

    /// Grouping id -> sorted member isos. Groupings partition the catalog.
    pub fn groupings(&self) -> &BTreeMap<String, Vec<String>> {
        &self.groupings
    }

    pub fn bridges(&self) -> impl Iterator<Item = &Language> {
        self.languages.iter().filter(|l| l.is_bridge)
    }

    /// Stable fingerprint of the catalog content, independent of input row
    /// order. Plans carry this so downstream stages can detect mismatches.
    pub fn content_hash(&self) -> String {
        let mut canon = String::new();
        let mut isos: Vec<&str> = self.languages.iter().map(|l| l.iso.as_str()).collect();
        isos.sort_unstable();
        for iso in isos {
            let lang = self.get(iso).expect("indexed");
            canon.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                lang.iso,
                lang.name,
                lang.family,
                lang.scripts.join(";"),
                lang.grouping_id,
                lang.is_bridge,
                lang.mono_sentences
            ));
            for (partner, count) in &lang.bitext_sentences {
                canon.push_str(&format!("{}\t{}\t{}\n", lang.iso, partner, count));
            }
        }
        canon.push_str(&self.english_iso);
        io::sha256_hex(canon.as_bytes())
    }
}

fn load_bitext_counts(languages: &mut [Language], path: &Path) -> Result<(), CatalogError> {
    let content = io::read_to_string(path)?;
    let path_str = path.display().to_string();
    let rows = io::parse_tsv(&content, &path_str, 3)?;

    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, lang) in languages.iter().enumerate() {
        index.insert(lang.iso.clone(), i);
    }

    for row in rows {
        let [src, tgt, count] = row.fields[..] else {
            unreachable!("parse_tsv enforces column count");
        };
        if src == tgt {
            return Err(CatalogError::SelfPair(src.to_string()));
        }
        let count: u64 = count.parse().map_err(|_| {
            io::field_error(
                &path_str,
                row.line,
                format!("sentence_pairs must be a non-negative integer, got {count:?}"),
            )
        })?;
        let (&i, &j) = match (index.get(src), index.get(tgt)) {
            (Some(i), Some(j)) => (i, j),
            (None, _) => {
                return Err(CatalogError::UnknownLanguage {
                    path: path_str,
                    line: row.line,
                    iso: src.to_string(),
                })
            }
            (_, None) => {
                return Err(CatalogError::UnknownLanguage {
                    path: path_str,
                    line: row.line,
                    iso: tgt.to_string(),
                })
            }
        };
        // Unordered pairs are listed once; a second listing (either order)
        // is a data-preparation bug we surface rather than repair.
        if let Some(&prev) = languages[i].bitext_sentences.get(tgt) {
            return Err(CatalogError::AsymmetricBitext {
                a: src.to_string(),
                b: tgt.to_string(),
                first: prev,
                second: count,
            });
        }
        languages[i].bitext_sentences.insert(tgt.to_string(), count);
        languages[j].bitext_sentences.insert(src.to_string(), count);
    }
    Ok(())
}

/// Resource tier of a language by total bitext sentence count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ResourceTier {
    Low,
    Mid,
    High,
}

/// Tier cutoffs: `low < mid_floor <= mid < high_floor <= high`. Boundary
/// counts are assigned upward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierThresholds {
    pub mid_floor: u64,
    pub high_floor: u64,
}

impl Default for TierThresholds {
    fn default() -> Self {
        Self {
            mid_floor: 1_000_000,
            high_floor: 10_000_000,
        }
    }
}

impl TierThresholds {
    pub fn new(mid_floor: u64, high_floor: u64) -> Self {
        assert!(
            mid_floor < high_floor,
            "tier thresholds must be strictly increasing"
        );
        Self {
            mid_floor,
            high_floor,
        }
    }
}

/// Deterministic tier assignment from a language's total bitext count.
pub fn resource_tier(lang: &Language, thresholds: TierThresholds) -> ResourceTier {
    tier_for_count(lang.total_bitext(), thresholds)
}

pub fn tier_for_count(count: u64, thresholds: TierThresholds) -> ResourceTier {
    if count >= thresholds.high_floor {
        ResourceTier::High
    } else if count >= thresholds.mid_floor {
        ResourceTier::Mid
    } else {
        ResourceTier::Low
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const TOY_CATALOG: &str = "\
en\tEnglish\tGermanic\tLatin\twest\t0\t5000\n\
fr\tFrench\tRomance\tLatin\twest\t1\t4000\n\
de\tGerman\tGermanic\tLatin\twest\t1\t3000\n";

    const TOY_BITEXT: &str = "en\tfr\t100\nde\ten\t80\nde\tfr\t60\n";

    #[test]
    fn loads_toy_catalog() {
        let cat_file = write_temp(TOY_CATALOG);
        let bi_file = write_temp(TOY_BITEXT);
        let cat = LanguageCatalog::load(cat_file.path(), Some(bi_file.path())).unwrap();
        assert_eq!(cat.len(), 3);
        assert_eq!(cat.groupings().len(), 1);
        assert_eq!(cat.english_iso(), "en");
        assert_eq!(cat.get("fr").unwrap().bitext_sentences["en"], 100);
        assert_eq!(cat.get("en").unwrap().bitext_sentences["fr"], 100);
        assert_eq!(cat.get("de").unwrap().total_bitext(), 140);
    }

    #[test]
    fn duplicate_iso_is_rejected_by_name() {
        let content = TOY_CATALOG.replace("de\tGerman", "fr\tGerman");
        let cat_file = write_temp(&content);
        let err = LanguageCatalog::load(cat_file.path(), None).unwrap_err();
        match err {
            CatalogError::DuplicateIso(iso) => assert_eq!(iso, "fr"),
            other => panic!("expected DuplicateIso, got {other}"),
        }
    }

    #[test]
    fn repeated_pair_is_rejected() {
        let cat_file = write_temp(TOY_CATALOG);
        let bi_file = write_temp("en\tfr\t100\nfr\ten\t99\n");
        let err = LanguageCatalog::load(cat_file.path(), Some(bi_file.path())).unwrap_err();
        assert!(matches!(err, CatalogError::AsymmetricBitext { .. }));
    }

    #[test]
    fn unknown_partner_is_rejected_with_line() {
        let cat_file = write_temp(TOY_CATALOG);
        let bi_file = write_temp("en\tfr\t100\nen\txx\t5\n");
        let err = LanguageCatalog::load(cat_file.path(), Some(bi_file.path())).unwrap_err();
        match err {
            CatalogError::UnknownLanguage { line, iso, .. } => {
                assert_eq!(line, 2);
                assert_eq!(iso, "xx");
            }
            other => panic!("expected UnknownLanguage, got {other}"),
        }
    }

    #[test]
    fn missing_pivot_is_rejected() {
        let content = TOY_CATALOG.replace("en\tEnglish", "eo\tEsperanto");
        let cat_file = write_temp(&content);
        let err = LanguageCatalog::load(cat_file.path(), None).unwrap_err();
        assert!(matches!(err, CatalogError::MissingEnglish(_)));
    }

    #[test]
    fn parse_error_names_line() {
        let cat_file = write_temp("en\tEnglish\tGermanic\tLatin\twest\t0\tnot-a-number\n");
        let err = LanguageCatalog::load(cat_file.path(), None).unwrap_err();
        assert!(err.to_string().contains(":1:"), "got: {err}");
    }

    #[test]
    fn load_is_deterministic() {
        let cat_file = write_temp(TOY_CATALOG);
        let bi_file = write_temp(TOY_BITEXT);
        let a = LanguageCatalog::load(cat_file.path(), Some(bi_file.path())).unwrap();
        let b = LanguageCatalog::load(cat_file.path(), Some(bi_file.path())).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(a.languages(), b.languages());
    }

    #[test]
    fn groupings_partition_the_catalog() {
        let cat_file = write_temp(TOY_CATALOG);
        let cat = LanguageCatalog::load(cat_file.path(), None).unwrap();
        let total: usize = cat.groupings().values().map(|v| v.len()).sum();
        assert_eq!(total, cat.len());
    }

    #[test]
    fn tier_boundaries_assign_upward() {
        let t = TierThresholds::default();
        assert_eq!(tier_for_count(0, t), ResourceTier::Low);
        assert_eq!(tier_for_count(999_999, t), ResourceTier::Low);
        assert_eq!(tier_for_count(1_000_000, t), ResourceTier::Mid);
        assert_eq!(tier_for_count(5_000_000, t), ResourceTier::Mid);
        assert_eq!(tier_for_count(10_000_000, t), ResourceTier::High);
    }

    #[test]
    fn tier_is_monotone_in_count() {
        let t = TierThresholds::default();
        let mut prev = ResourceTier::Low;
        for count in [0u64, 10, 999_999, 1_000_000, 9_999_999, 10_000_000, 1 << 40] {
            let tier = tier_for_count(count, t);
            assert!(tier >= prev);
            prev = tier;
        }
    }
}
