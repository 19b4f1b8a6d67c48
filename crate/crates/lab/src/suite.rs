//! Builds the generated benchmark: one corpus per language, filtered, paired,
//! split and written as unit stores plus dataset manifests.

use std::path::{Path, PathBuf};

use std::collections::{BTreeMap, BTreeSet};

use crossclone_core::corpus::{
    cluster_index, filter_units, CloneType, generate_corpus, mix_datasets, sample_pairs, split_dataset, ClassCounts, CloneLabel,
    DatasetManifest, FilterConfig, FilterReport, GeneratorConfig, PairExample, SplitSizes,
};
use crossclone_core::{Language, SourceUnit};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::write_json;
use crate::experiment::{ExperimentId, ExperimentSpec};
use crate::error::{LabError, Result};
use crate::store::{write_dataset, write_units};

/// Per class: 1,500 train, 400 valid, 1,000 test pairs. The mixed dataset
/// has the same totals, half from each language.
pub const DEFAULT_SIZES: SplitSizes = SplitSizes {
    train: ClassCounts { positive: 1500, negative: 1500 },
    valid: ClassCounts { positive: 400, negative: 400 },
    test: ClassCounts { positive: 1000, negative: 1000 },
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub clusters: usize,
    pub variants: usize,
    /// Clusters per program family; see [`GeneratorConfig::family_size`].
    pub family_size: usize,
    /// Share of negatives drawn between sibling clusters of one family.
    pub sibling_negative_fraction: f64,
    pub seed: u64,
    pub filter: FilterConfig,
    pub sizes: SplitSizes,
    /// Per-split targets of the mixed dataset; half from each language.
    pub mixed_sizes: SplitSizes,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            clusters: 160,
            variants: 6,
            family_size: 4,
            sibling_negative_fraction: 0.5,
            seed: 7,
            filter: FilterConfig::default(),
            sizes: DEFAULT_SIZES,
            mixed_sizes: DEFAULT_SIZES,
        }
    }
}

impl SuiteConfig {
    /// Distinct generator seeds per language so the two corpora do not share
    /// programs.
    pub fn language_seed(&self, lang: Language) -> u64 {
        match lang {
            Language::Python => self.seed.wrapping_mul(2).wrapping_add(1),
            Language::Java => self.seed.wrapping_mul(2).wrapping_add(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub config: SuiteConfig,
    pub filter_reports: Vec<(Language, FilterReport)>,
    /// Manifest paths relative to the suite directory.
    pub manifests: Vec<String>,
}

pub struct Suite {
    pub dir: PathBuf,
    pub python: PathBuf,
    pub java: PathBuf,
    pub mixed: PathBuf,
}

/// Positives and ordinary negatives come from the uniform sampler; the
/// sibling share of negatives is drawn uniformly from cross-cluster pairs
/// inside one family.
fn sample_with_siblings(units: &[SourceUnit], cfg: &SuiteConfig, gen: &GeneratorConfig, pos: usize, neg: usize, seed: u64) -> Result<Vec<PairExample>> {
    let n_sibling = ((neg as f64) * cfg.sibling_negative_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut families: BTreeMap<usize, Vec<&SourceUnit>> = BTreeMap::new();
    for u in units {
        if let Some(c) = cluster_index(&u.cluster_id) {
            families.entry(gen.family_of(c)).or_default().push(u);
        }
    }
    let mut siblings: Vec<PairExample> = Vec::new();
    for members in families.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.cluster_id != b.cluster_id {
                    siblings.push(PairExample::new(&a.id, &b.id, CloneLabel::NotClone));
                }
            }
        }
    }
    siblings.sort();
    if siblings.len() < n_sibling {
        return Err(crossclone_core::corpus::CorpusError::InsufficientPairs {
            requested_positive: 0,
            requested_negative: n_sibling,
            available_positive: 0,
            available_negative: siblings.len(),
        }
        .into());
    }
    siblings.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    siblings.truncate(n_sibling);
    let taken: BTreeSet<String> = siblings.iter().map(|p| p.pair_id.clone()).collect();
    // Oversample ordinary negatives so collisions with siblings can be skipped.
    let mut pairs = sample_pairs(units, pos, neg, seed ^ 0x9e37)?;
    let mut ordinary = 0;
    pairs.retain(|p| {
        if p.label.is_clone() {
            return true;
        }
        let keep = ordinary < neg - n_sibling && !taken.contains(&p.pair_id);
        ordinary += keep as usize;
        keep
    });
    if ordinary < neg - n_sibling {
        return Err(LabError::Config(format!("could not draw {} ordinary negatives", neg - n_sibling)));
    }
    pairs.extend(siblings);
    for p in pairs.iter_mut().filter(|p| p.label.is_clone()) {
        p.clone_type = variant_pair_type(&p.unit_a, &p.unit_b);
    }
    pairs.sort();
    Ok(pairs)
}

/// Generated variants are numbered `v<k>`: 0 is the plain rendering, odd
/// `k` renamed (Type II), even `k > 0` renamed and edited (Type III).
fn variant_pair_type(a: &str, b: &str) -> Option<CloneType> {
    let k = |id: &str| -> Option<usize> { id.rsplit('/').next()?.strip_prefix('v')?.split('.').next()?.parse().ok() };
    let (ka, kb) = (k(a)?, k(b)?);
    let edited = |k: usize| k > 0 && k.is_multiple_of(2);
    Some(if edited(ka) || edited(kb) { CloneType::III } else { CloneType::II })
}

fn language_dataset(dir: &Path, cfg: &SuiteConfig, lang: Language) -> Result<(DatasetManifest, PathBuf, FilterReport)> {
    let seed = cfg.language_seed(lang);
    let mut gen = GeneratorConfig::new(cfg.clusters, cfg.variants, seed);
    gen.family_size = cfg.family_size.max(1);
    let units = generate_corpus(&gen, lang);
    let outcome = filter_units(&units, &cfg.filter);
    let store = dir.join("units").join(format!("{}.jsonl", lang.as_str()));
    write_units(&store, &outcome.accepted)?;
    let s = cfg.sizes;
    let pos = s.train.positive + s.valid.positive + s.test.positive;
    let neg = s.train.negative + s.valid.negative + s.test.negative;
    let pairs = sample_with_siblings(&outcome.accepted, cfg, &gen, pos, neg, seed ^ 0x5a17)?;
    let mut manifest = split_dataset(lang.as_str(), &pairs, s, seed ^ 0x5b11)?;
    manifest.languages = vec![lang];
    manifest.filter = Some(cfg.filter);
    Ok((manifest, store, outcome.report()))
}

/// Writes `units/{python,java}.jsonl`, the `python`, `java` and `mixed`
/// datasets and `suite.json` under `dir`.
pub fn build_suite(dir: &Path, cfg: &SuiteConfig) -> Result<Suite> {
    cfg.filter.validate()?;
    let (py, py_store, py_report) = language_dataset(dir, cfg, Language::Python)?;
    let (java, java_store, java_report) = language_dataset(dir, cfg, Language::Java)?;
    let mixed = mix_datasets("mixed", &py, &java, cfg.mixed_sizes, cfg.seed ^ 0x3c3c)?;
    let python = write_dataset(dir, &py, std::slice::from_ref(&py_store))?;
    let java_path = write_dataset(dir, &java, std::slice::from_ref(&java_store))?;
    let mixed_path = write_dataset(dir, &mixed, &[py_store, java_store])?;
    let summary = SuiteSummary {
        config: cfg.clone(),
        filter_reports: vec![(Language::Python, py_report), (Language::Java, java_report)],
        manifests: ["python", "java", "mixed"].iter().map(|n| format!("{n}.manifest.json")).collect(),
    };
    write_json(&dir.join("suite.json"), &summary)?;
    Ok(Suite {
        dir: dir.into(),
        python,
        java: java_path,
        mixed: mixed_path,
    })
}

/// Experiment specs over a built suite: in-domain runs per language, mixed
/// training evaluated on all three sets, and Java-to-Python zero-shot.
pub fn suite_specs() -> Vec<ExperimentSpec> {
    let named = |name: &str, mut spec: ExperimentSpec| {
        spec.name = Some(name.into());
        spec
    };
    vec![
        named("exp1-python", ExperimentSpec::new(ExperimentId::Exp1, &["python.manifest.json"], &["python.manifest.json"])),
        named("exp1-java", ExperimentSpec::new(ExperimentId::Exp1, &["java.manifest.json"], &["java.manifest.json"])),
        named(
            "exp2",
            ExperimentSpec::new(
                ExperimentId::Exp2,
                &["mixed.manifest.json"],
                &["mixed.manifest.json", "python.manifest.json", "java.manifest.json"],
            ),
        ),
        named("exp3", ExperimentSpec::new(ExperimentId::Exp3, &["java.manifest.json"], &["python.manifest.json"])),
    ]
}

/// Writes [`suite_specs`] as `<name>.spec.json` into the suite directory.
pub fn write_suite_specs(dir: &Path) -> Result<Vec<PathBuf>> {
    suite_specs()
        .into_iter()
        .map(|spec| {
            let path = dir.join(format!("{}.spec.json", spec.run_name()));
            write_json(&path, &spec)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_types() {
        assert_eq!(variant_pair_type("java/c001/v0.java", "java/c001/v3.java"), Some(CloneType::II));
        assert_eq!(variant_pair_type("java/c001/v1.java", "java/c001/v2.java"), Some(CloneType::III));
        assert_eq!(variant_pair_type("x/a.java", "java/c001/v2.java"), None);
    }

    #[test]
    fn small_suite_is_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig {
            clusters: 24,
            variants: 4,
            sizes: SplitSizes::balanced(120, 40, 40),
            mixed_sizes: SplitSizes::balanced(60, 20, 20),
            ..SuiteConfig::default()
        };
        let suite = build_suite(dir.path(), &cfg).unwrap();
        for path in [&suite.python, &suite.java, &suite.mixed] {
            let ds = crate::store::StoredDataset::load(path).unwrap();
            let index = ds.index().unwrap();
            for p in ds.manifest.all_pairs() {
                let (a, b) = (index.get(&p.unit_a).unwrap(), index.get(&p.unit_b).unwrap());
                assert_eq!(p.label.is_clone(), a.cluster_id == b.cluster_id);
                assert_eq!(p.clone_type.is_some(), p.label.is_clone());
            }
        }
        let py = crate::store::StoredDataset::load(&suite.python).unwrap();
        let index = py.index().unwrap();
        let gen = GeneratorConfig { family_size: cfg.family_size, ..GeneratorConfig::new(cfg.clusters, cfg.variants, 0) };
        let family = |id: &str| gen.family_of(cluster_index(&index.get(id).unwrap().cluster_id).unwrap());
        let negatives: Vec<_> = py.manifest.all_pairs().filter(|p| !p.label.is_clone()).collect();
        let siblings = negatives.iter().filter(|p| family(&p.unit_a) == family(&p.unit_b)).count();
        assert!(siblings * 2 >= negatives.len(), "{siblings} of {}", negatives.len());
        assert_eq!(write_suite_specs(dir.path()).unwrap().len(), 4);
    }
}
