use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{unit_leakage, CloneLabel, CorpusError, DatasetManifest, PairExample, Split, Splits};
use crate::ast::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn new(positive: usize, negative: usize) -> Self {
        ClassCounts { positive, negative }
    }

    /// Half positive, the remainder negative.
    pub fn balanced(total: usize) -> Self {
        ClassCounts {
            positive: total / 2,
            negative: total - total / 2,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: ClassCounts,
    pub valid: ClassCounts,
    pub test: ClassCounts,
}

impl SplitSizes {
    pub fn balanced(train: usize, valid: usize, test: usize) -> Self {
        SplitSizes {
            train: ClassCounts::balanced(train),
            valid: ClassCounts::balanced(valid),
            test: ClassCounts::balanced(test),
        }
    }

    fn total(&self) -> ClassCounts {
        ClassCounts {
            positive: self.train.positive + self.valid.positive + self.test.positive,
            negative: self.train.negative + self.valid.negative + self.test.negative,
        }
    }
}

fn insufficient(requested: ClassCounts, available: ClassCounts) -> CorpusError {
    CorpusError::InsufficientPairs {
        requested_positive: requested.positive,
        requested_negative: requested.negative,
        available_positive: available.positive,
        available_negative: available.negative,
    }
}

/// Same-cluster pairs are clones, cross-cluster pairs are not. Both classes
/// are drawn uniformly without replacement over unordered pairs.
pub fn sample_pairs(units: &[SourceUnit], n_pos: usize, n_neg: usize, seed: u64) -> Result<Vec<PairExample>, CorpusError> {
    let mut sorted: Vec<&SourceUnit> = units.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted.dedup_by(|a, b| a.id == b.id);
    let n = sorted.len();
    let mut clusters: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, u) in sorted.iter().enumerate() {
        clusters.entry(u.cluster_id.as_str()).or_default().push(i);
    }
    let choose2 = |k: usize| k * k.saturating_sub(1) / 2;
    let avail_pos: usize = clusters.values().map(|c| choose2(c.len())).sum();
    let avail_neg = choose2(n) - avail_pos;
    if n_pos > avail_pos || n_neg > avail_neg {
        return Err(insufficient(ClassCounts::new(n_pos, n_neg), ClassCounts::new(avail_pos, avail_neg)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let same = |i: usize, j: usize| sorted[i].cluster_id == sorted[j].cluster_id;
    let mut pos: BTreeSet<(usize, usize)> = BTreeSet::new();
    if 2 * n_pos >= avail_pos {
        let mut all: Vec<(usize, usize)> = clusters
            .values()
            .flat_map(|c| c.iter().enumerate().flat_map(move |(x, &i)| c[x + 1..].iter().map(move |&j| (i, j))))
            .collect();
        all.shuffle(&mut rng);
        pos.extend(all.into_iter().take(n_pos));
    } else {
        let weighted: Vec<(&Vec<usize>, usize)> = clusters.values().map(|c| (c, choose2(c.len()))).filter(|c| c.1 > 0).collect();
        while pos.len() < n_pos {
            let mut r = rng.gen_range(0..avail_pos);
            let members = weighted
                .iter()
                .find(|(_, w)| {
                    if r < *w {
                        true
                    } else {
                        r -= w;
                        false
                    }
                })
                .map(|(c, _)| *c)
                .unwrap_or(weighted[0].0);
            let x = rng.gen_range(0..members.len());
            let y = rng.gen_range(0..members.len());
            if x != y {
                let (i, j) = (members[x].min(members[y]), members[x].max(members[y]));
                pos.insert((i, j));
            }
        }
    }

    let mut neg: BTreeSet<(usize, usize)> = BTreeSet::new();
    if 2 * n_neg >= avail_neg {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !same(i, j))
            .collect();
        all.shuffle(&mut rng);
        neg.extend(all.into_iter().take(n_neg));
    } else {
        while neg.len() < n_neg {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j && !same(i, j) {
                neg.insert((i.min(j), i.max(j)));
            }
        }
    }

    let mut out: Vec<PairExample> = pos
        .iter()
        .map(|&(i, j)| PairExample::new(&sorted[i].id, &sorted[j].id, CloneLabel::Clone))
        .collect();
    out.sort();
    let mut negs: Vec<PairExample> = neg
        .iter()
        .map(|&(i, j)| PairExample::new(&sorted[i].id, &sorted[j].id, CloneLabel::NotClone))
        .collect();
    negs.sort();
    out.extend(negs);
    Ok(out)
}

fn by_class(pairs: &[PairExample]) -> (Vec<PairExample>, Vec<PairExample>) {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    sorted.dedup_by(|a, b| a.pair_id == b.pair_id);
    sorted.into_iter().partition(|p| p.label.is_clone())
}

fn take_split(pos: &mut Vec<PairExample>, neg: &mut Vec<PairExample>, counts: ClassCounts) -> Vec<PairExample> {
    let mut out: Vec<PairExample> = pos.drain(..counts.positive).collect();
    out.extend(neg.drain(..counts.negative));
    out.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    out
}

/// Pair-disjoint train/valid/test splits with per-class targets. Units may
/// recur across splits; the manifest counts how many do.
pub fn split_dataset(name: &str, pairs: &[PairExample], sizes: SplitSizes, seed: u64) -> Result<DatasetManifest, CorpusError> {
    let (mut pos, mut neg) = by_class(pairs);
    let need = sizes.total();
    if need.positive > pos.len() || need.negative > neg.len() {
        return Err(insufficient(need, ClassCounts::new(pos.len(), neg.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let splits = Splits {
        train: Split::new(take_split(&mut pos, &mut neg, sizes.train)),
        valid: Split::new(take_split(&mut pos, &mut neg, sizes.valid)),
        test: Split::new(take_split(&mut pos, &mut neg, sizes.test)),
    };
    Ok(DatasetManifest {
        name: name.into(),
        languages: Vec::new(),
        filter: None,
        seed,
        unit_leakage: unit_leakage(&splits),
        splits,
    })
}

/// Draws half of each per-class target from `a` and the rest from `b`
/// (skipping pairs already taken), split by split. Every pair records the
/// dataset it came from.
pub fn mix_datasets(
    name: &str,
    a: &DatasetManifest,
    b: &DatasetManifest,
    sizes: SplitSizes,
    seed: u64,
) -> Result<DatasetManifest, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mix_split = |sa: &Split, sb: &Split, target: ClassCounts| -> Result<Split, CorpusError> {
        let mut chosen: Vec<PairExample> = Vec::new();
        let mut taken: BTreeSet<String> = BTreeSet::new();
        for (clone, want) in [(true, target.positive), (false, target.negative)] {
            let from_a = want.div_ceil(2);
            let from_b = want - from_a;
            for (src, split, k) in [(a, sa, from_a), (b, sb, from_b)] {
                let mut pool: Vec<&PairExample> = split
                    .pairs
                    .iter()
                    .filter(|p| p.label.is_clone() == clone && !taken.contains(&p.pair_id))
                    .collect();
                pool.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
                if pool.len() < k {
                    let avail = ClassCounts {
                        positive: if clone { pool.len() } else { 0 },
                        negative: if clone { 0 } else { pool.len() },
                    };
                    let req = ClassCounts {
                        positive: if clone { k } else { 0 },
                        negative: if clone { 0 } else { k },
                    };
                    return Err(insufficient(req, avail));
                }
                pool.shuffle(&mut rng);
                for p in pool.into_iter().take(k) {
                    taken.insert(p.pair_id.clone());
                    let mut p = p.clone();
                    p.source = Some(src.name.clone());
                    chosen.push(p);
                }
            }
        }
        chosen.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
        Ok(Split::new(chosen))
    };
    let splits = Splits {
        train: mix_split(&a.splits.train, &b.splits.train, sizes.train)?,
        valid: mix_split(&a.splits.valid, &b.splits.valid, sizes.valid)?,
        test: mix_split(&a.splits.test, &b.splits.test, sizes.test)?,
    };
    let mut languages: Vec<_> = a.languages.iter().chain(&b.languages).copied().collect();
    languages.sort();
    languages.dedup();
    Ok(DatasetManifest {
        name: name.into(),
        languages,
        filter: if a.filter == b.filter { a.filter } else { None },
        seed,
        unit_leakage: unit_leakage(&splits),
        splits,
    })
}
