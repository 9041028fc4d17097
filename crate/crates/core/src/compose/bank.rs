use std::collections::BTreeMap;
use std::sync::Arc;

use crate::annotate::ObjectCrop;
use crate::error::{Error, Result};

/// The pool synthesis draws from. Crops are shared, so duplicating a crop
/// for oversampling copies a pointer, not pixels.
#[derive(Debug, Clone)]
pub struct ObjectBank {
    crops: Vec<Arc<ObjectCrop>>,
    class_index: BTreeMap<String, usize>,
}

impl ObjectBank {
    pub fn new(crops: Vec<Arc<ObjectCrop>>, class_index: BTreeMap<String, usize>) -> Result<Self> {
        if crops.is_empty() {
            return Err(Error::EmptyBank);
        }
        if let Some(c) = crops
            .iter()
            .find(|c| !class_index.contains_key(&c.class_label))
        {
            return Err(Error::UnknownClass(c.class_label.clone()));
        }
        Ok(ObjectBank { crops, class_index })
    }

    /// Concatenates banks that share one class index.
    pub fn merge(banks: impl IntoIterator<Item = ObjectBank>) -> Result<Self> {
        let mut iter = banks.into_iter();
        let mut first = iter.next().ok_or(Error::EmptyBank)?;
        for b in iter {
            if b.class_index != first.class_index {
                return Err(Error::Config(
                    "cannot merge banks with different class indices".into(),
                ));
            }
            first.crops.extend(b.crops);
        }
        Ok(first)
    }

    pub fn crops(&self) -> &[Arc<ObjectCrop>] {
        &self.crops
    }

    pub fn len(&self) -> usize {
        self.crops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crops.is_empty()
    }

    pub fn class_index(&self) -> &BTreeMap<String, usize> {
        &self.class_index
    }

    pub fn count(&self, class: &str) -> usize {
        self.crops.iter().filter(|c| c.class_label == class).count()
    }

    /// Crop count per class; classes without crops are omitted.
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.crops {
            *out.entry(c.class_label.clone()).or_default() += 1;
        }
        out
    }
}

/// Copies per crop for each class so that every class below `threshold`
/// reaches it, with shares recomputed against the grown pool. Classes at or
/// above the threshold get 1.
///
/// All lagging classes grow in lockstep, one copy per round, until none is
/// below the threshold; each final factor is then the smallest that works
/// given the others. When the lagging classes could never all reach the
/// threshold together (their count times the threshold is at least 1), no
/// duplication happens.
pub fn duplication_factors(bank: &ObjectBank, threshold: f64) -> BTreeMap<String, usize> {
    const MAX_ROUNDS: usize = 100_000;

    let counts = bank.counts();
    let total: usize = counts.values().sum();
    let mut factors: BTreeMap<String, usize> = counts.keys().map(|k| (k.clone(), 1)).collect();
    let lagging: Vec<&String> = counts
        .iter()
        .filter(|(_, &n)| (n as f64) < threshold * total as f64)
        .map(|(k, _)| k)
        .collect();
    if lagging.is_empty() || lagging.len() as f64 * threshold >= 1.0 {
        if !lagging.is_empty() {
            log::warn!(
                "{} classes below {threshold}: balancing cannot lift them all, pool left as is",
                lagging.len()
            );
        }
        return factors;
    }

    for _ in 0..MAX_ROUNDS {
        let grown: usize = counts.iter().map(|(k, n)| n * factors[k]).sum();
        let behind: Vec<&String> = lagging
            .iter()
            .copied()
            .filter(|k| ((counts[*k] * factors[*k]) as f64) < threshold * grown as f64)
            .collect();
        if behind.is_empty() {
            break;
        }
        for k in behind {
            *factors.get_mut(k).expect("lagging class has a factor") += 1;
        }
    }
    factors
}

/// Oversamples classes below `threshold` by whole-set duplication.
pub fn balance_pool(bank: &ObjectBank, threshold: f64) -> ObjectBank {
    let factors = duplication_factors(bank, threshold);
    let mut crops = Vec::with_capacity(bank.len());
    for c in &bank.crops {
        for _ in 0..factors[&c.class_label] {
            crops.push(Arc::clone(c));
        }
    }
    ObjectBank {
        crops,
        class_index: bank.class_index.clone(),
    }
}
