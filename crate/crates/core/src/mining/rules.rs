//! Association rules `A -> B` derived from a downward-closed itemset list.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::{ItemId, PageCatalog};
use crate::mining::ItemsetResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub antecedent: Vec<ItemId>,
    pub consequent: Vec<ItemId>,
    /// Support of `antecedent ∪ consequent`.
    pub support: u64,
    pub confidence: f64,
}

fn key_of(items: &[ItemId]) -> Vec<ItemId> {
    let mut k = items.to_vec();
    k.sort();
    k
}

/// Emits every rule with confidence ≥ `min_confidence`. Item order inside
/// antecedent and consequent follows the order of the source itemset.
pub fn generate_rules(itemsets: &[ItemsetResult], min_confidence: f64) -> Result<Vec<AssociationRule>> {
    if !(0.0..=1.0).contains(&min_confidence) {
        return Err(Error::Config(format!("min_confidence {min_confidence} outside [0, 1]")));
    }
    let support: HashMap<Vec<ItemId>, u64> = itemsets.iter().map(|r| (key_of(&r.items), r.support)).collect();
    let mut rules = Vec::new();
    for set in itemsets.iter().filter(|r| r.items.len() >= 2) {
        let n = set.items.len();
        if n > 63 {
            return Err(Error::Consistency(format!("itemset of size {n} is too large for rule generation")));
        }
        let full: u64 = (1 << n) - 1;
        for mask in 1..full {
            let mut ante = Vec::new();
            let mut cons = Vec::new();
            for (i, &x) in set.items.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    ante.push(x);
                } else {
                    cons.push(x);
                }
            }
            let base = *support.get(&key_of(&ante)).ok_or_else(|| {
                Error::Consistency(format!("support of subset {ante:?} missing from itemset list"))
            })?;
            if base == 0 {
                return Err(Error::Consistency(format!("subset {ante:?} has zero support")));
            }
            let confidence = set.support as f64 / base as f64;
            if confidence + 1e-12 >= min_confidence {
                rules.push(AssociationRule { antecedent: ante, consequent: cons, support: set.support, confidence });
            }
        }
    }
    Ok(rules)
}

/// `antecedent;consequent;support;confidence` with a header row.
pub fn write_rules_csv<W: Write>(rules: &[AssociationRule], catalog: &PageCatalog, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(out);
    let join = |items: &[ItemId]| items.iter().map(|&i| catalog.key(i)).collect::<Vec<_>>().join(" ");
    w.write_record(["antecedent", "consequent", "support", "confidence"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for r in rules {
        w.write_record([
            join(&r.antecedent),
            join(&r.consequent),
            r.support.to_string(),
            format!("{:.6}", r.confidence),
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::oracle_bruteforce;
    use crate::testdata::table1;

    fn find<'a>(rules: &'a [AssociationRule], cat: &PageCatalog, a: &[&str], c: &[&str]) -> Option<&'a AssociationRule> {
        let ids = |ks: &[&str]| key_of(&ks.iter().map(|k| cat.id(k).unwrap()).collect::<Vec<_>>());
        rules
            .iter()
            .find(|r| key_of(&r.antecedent) == ids(a) && key_of(&r.consequent) == ids(c))
    }

    #[test]
    fn table1_rules() {
        let db = table1();
        let sets = oracle_bruteforce(&db, 5).unwrap();
        let rules = generate_rules(&sets, 0.5).unwrap();
        let eh = find(&rules, db.catalog(), &["e"], &["h"]).unwrap();
        assert_eq!(eh.confidence, 1.0);
        let ab = find(&rules, db.catalog(), &["a"], &["b"]).unwrap();
        assert!((ab.confidence - 5.0 / 6.0).abs() < 1e-9);
        assert_eq!(ab.support, 5);

        let strict = generate_rules(&sets, 1.0).unwrap();
        assert!(find(&strict, db.catalog(), &["a"], &["b"]).is_none());
        assert!(find(&strict, db.catalog(), &["e"], &["h"]).is_some());
    }

    #[test]
    fn missing_subset_is_an_error() {
        let sets = vec![ItemsetResult { items: vec![ItemId(0), ItemId(1)], support: 2 }];
        assert!(matches!(generate_rules(&sets, 0.0), Err(Error::Consistency(_))));
    }

    #[test]
    fn csv_layout() {
        let db = table1();
        let sets = oracle_bruteforce(&db, 10).unwrap();
        let rules = generate_rules(&sets, 0.0).unwrap();
        let mut buf = Vec::new();
        write_rules_csv(&rules, db.catalog(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("antecedent;consequent;support;confidence"));
        assert_eq!(lines.count(), 2);
    }
}
