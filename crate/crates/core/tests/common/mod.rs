//! Generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;

use olac::model::{ElementName, MetadataElement, MetadataRecord, RefineRule};
use olac::{VocabId, VocabularyRegistry};

/// Language tags the builtin language vocabulary resolves.
pub const LANGS: [&str; 6] = ["en", "fr", "de", "cs", "bg", "x-sil-BAN"];

pub fn registry() -> Arc<VocabularyRegistry> {
    Arc::new(VocabularyRegistry::builtin())
}

/// Non-ambiguous listed codes of a vocabulary.
pub fn codes(reg: &VocabularyRegistry, id: VocabId) -> Vec<String> {
    reg.vocabulary(id)
        .terms()
        .iter()
        .filter(|t| !t.is_ambiguous())
        .map(|t| t.code().to_string())
        .collect()
}

pub fn content() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[a-zA-Z0-9 ]{1,16}", "[a-z<>&\"' éüßЖ]{1,12}"]
}

fn pick(options: Vec<String>) -> BoxedStrategy<Option<String>> {
    if options.is_empty() {
        Just(None).boxed()
    } else {
        proptest::option::of(proptest::sample::select(options)).boxed()
    }
}

/// One element that validates without errors.
pub fn valid_element(reg: Arc<VocabularyRegistry>) -> BoxedStrategy<MetadataElement> {
    proptest::sample::select(ElementName::ALL.to_vec())
        .prop_flat_map(move |name| {
            let desc = name.descriptor();
            let refines = match desc.refine {
                RefineRule::None => Vec::new(),
                RefineRule::Fixed(token) => vec![token.to_string()],
                RefineRule::Vocabulary(id) => codes(&reg, id),
            };
            let codes = desc.code_vocabulary.map(|id| codes(&reg, id)).unwrap_or_default();
            (
                Just(name),
                pick(refines),
                pick(codes),
                proptest::option::of(proptest::sample::select(LANGS.to_vec())),
                content(),
            )
        })
        .prop_map(|(name, refine, code, lang, content)| {
            let mut e = MetadataElement::new(name, content);
            if let Some(r) = refine {
                e = e.with_refine(r);
            }
            if let Some(c) = code {
                e = e.with_code(c);
            }
            if let Some(l) = lang {
                e = e.with_lang(l);
            }
            e
        })
        .boxed()
}

/// Distinct entries from [`LANGS`], at least one.
pub fn alternatives() -> impl Strategy<Value = Vec<String>> {
    proptest::sample::subsequence(LANGS.to_vec(), 1..=3)
        .prop_shuffle()
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

pub fn valid_record(reg: Arc<VocabularyRegistry>) -> impl Strategy<Value = MetadataRecord> {
    (alternatives(), proptest::collection::vec(valid_element(reg), 0..12))
        .prop_map(|(alts, elements)| MetadataRecord::new(alts, elements))
}
