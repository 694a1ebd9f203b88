//! Synthetic workloads shared by the benchmarks.

use chrono::{TimeZone, Utc};
use olac::model::{ElementName, MetadataElement, MetadataRecord};
use olac::{Catalog, CatalogEntry, VocabularyRegistry};
use std::sync::Arc;

const LANGS: [&str; 8] = ["bg", "en", "de", "fr", "hu", "cs", "ru", "x-sil-BAN"];

/// A catalog of `n` entries spread over four providers.
pub fn synthetic_catalog(n: usize) -> Catalog {
    let registry = Arc::new(VocabularyRegistry::builtin());
    let catalog = Catalog::new(registry);
    let stamp = Utc.with_ymd_and_hms(2001, 1, 1, 0, 0, 0).unwrap();
    for i in 0..n {
        let mut elements = vec![MetadataElement::new(ElementName::Title, format!("Corpus number {i}"))];
        for k in 0..3 {
            elements.push(MetadataElement::coded(
                ElementName::SubjectLanguage,
                LANGS[(i + k * 3) % LANGS.len()],
            ));
        }
        elements.push(MetadataElement::new(
            ElementName::Description,
            "spoken and written material",
        ));
        let record = MetadataRecord::new(Vec::new(), elements);
        let id = format!("oai:p{}:item{i}", i % 4);
        catalog
            .upsert(CatalogEntry::new(id, stamp, record))
            .expect("synthetic record is valid");
    }
    catalog
}
