//! Double cross-validation: three class-stratified subsets and the six
//! (train, validation, test) orderings of them.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Subset order for scenarios 1 to 6 as (train, val, test).
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// One scenario. Sets hold positions into the dataset's record list, in
/// dataset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitScenario {
    /// 1-based.
    pub index: usize,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub subsets: [Vec<usize>; 3],
    pub scenarios: Vec<SplitScenario>,
}

const MIN_PER_CLASS: usize = 3;

fn class_members(labels: &[bool], class: bool) -> Vec<usize> {
    (0..labels.len()).filter(|&i| labels[i] == class).collect()
}

// Shuffles each class and deals its members round-robin into `parts`
// buckets. The dealer position carries over between classes so bucket
// totals also differ by at most one.
fn stratified_deal(labels: &[bool], parts: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut buckets = vec![Vec::new(); parts];
    let mut next = 0;
    for (tag, class) in [(0u64, false), (1, true)] {
        let mut members = class_members(labels, class);
        members.shuffle(&mut rng::seeded(rng::mix(seed, tag)));
        for m in members {
            buckets[next % parts].push(m);
            next += 1;
        }
    }
    for b in &mut buckets {
        b.sort_unstable();
    }
    buckets
}

fn require_per_class(labels: &[bool], min: usize, what: &str) -> Result<()> {
    let cases = labels.iter().filter(|&&l| l).count();
    let controls = labels.len() - cases;
    if cases < min || controls < min {
        return Err(Error::DegenerateSplit(format!(
            "{what} needs at least {min} samples per class, got {cases} case / {controls} control"
        )));
    }
    Ok(())
}

/// Seeded stratified partition into three subsets plus the six scenarios.
pub fn make_splits(labels: &[bool], seed: u64) -> Result<Splits> {
    require_per_class(labels, MIN_PER_CLASS, "a three-way split")?;
    let b = stratified_deal(labels, 3, seed);
    let subsets = [b[0].clone(), b[1].clone(), b[2].clone()];
    let scenarios = PERMUTATIONS
        .iter()
        .enumerate()
        .map(|(i, p)| SplitScenario {
            index: i + 1,
            train: subsets[p[0]].clone(),
            val: subsets[p[1]].clone(),
            test: subsets[p[2]].clone(),
        })
        .collect();
    Ok(Splits { subsets, scenarios })
}

/// Stratified 50:50 (validation, test) split for external evaluation.
pub fn external_split(labels: &[bool], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    require_per_class(labels, 2, "an external validation/test split")?;
    let mut b = stratified_deal(labels, 2, rng::mix(seed, 0xE7));
    let test = b.pop().unwrap_or_default();
    let val = b.pop().unwrap_or_default();
    Ok((val, test))
}
