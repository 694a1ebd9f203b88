use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CatalogError;
use crate::model::{ElementName, MetadataElement, MetadataRecord};
use crate::vocab::{VocabError, VocabId, VocabularyRegistry};

/// Which elements a clause looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementSelector {
    /// Every element name.
    Any,
    Named(ElementName),
}

impl ElementSelector {
    pub fn matches(self, name: ElementName) -> bool {
        match self {
            ElementSelector::Any => true,
            ElementSelector::Named(n) => n == name,
        }
    }
}

impl fmt::Display for ElementSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementSelector::Any => f.write_str("any"),
            ElementSelector::Named(n) => f.write_str(n.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    /// Vocabulary-resolved code equality, or family prefix at `/`.
    Code,
    /// Case-insensitive substring of the element content.
    Text,
    /// `Code` or `Text`.
    Any,
}

impl MatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchKind::Code => "code",
            MatchKind::Text => "text",
            MatchKind::Any => "any",
        }
    }
}

/// One `element:kind:value` condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub element: ElementSelector,
    pub kind: MatchKind,
    pub value: String,
}

impl Clause {
    pub fn new(element: ElementSelector, kind: MatchKind, value: impl Into<String>) -> Self {
        Clause {
            element,
            kind,
            value: value.into(),
        }
    }

    pub fn code(element: ElementName, value: impl Into<String>) -> Self {
        Self::new(ElementSelector::Named(element), MatchKind::Code, value)
    }

    pub fn text(element: ElementName, value: impl Into<String>) -> Self {
        Self::new(ElementSelector::Named(element), MatchKind::Text, value)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.element, self.kind.as_str(), self.value)
    }
}

impl FromStr for Clause {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CatalogError::BadClause(s.to_string());
        let mut parts = s.splitn(3, ':');
        let (Some(element), Some(kind), Some(value)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let element = if element == "any" {
            ElementSelector::Any
        } else {
            ElementSelector::Named(
                element
                    .parse()
                    .map_err(|_| CatalogError::UnknownElement(element.to_string()))?,
            )
        };
        let kind = match kind {
            "code" => MatchKind::Code,
            "text" => MatchKind::Text,
            "any" => MatchKind::Any,
            _ => return Err(bad()),
        };
        Ok(Clause::new(element, kind, value))
    }
}

/// A conjunction of at least one clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    clauses: Vec<Clause>,
}

impl Query {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, CatalogError> {
        if clauses.is_empty() {
            return Err(CatalogError::EmptyQuery);
        }
        Ok(Query { clauses })
    }

    pub fn single(clause: Clause) -> Self {
        Query { clauses: vec![clause] }
    }

    /// Parses each string as a clause.
    pub fn parse<S: AsRef<str>>(clauses: &[S]) -> Result<Self, CatalogError> {
        Self::new(clauses.iter().map(|c| c.as_ref().parse()).collect::<Result<_, _>>()?)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }
}

impl FromStr for Query {
    type Err = CatalogError;

    /// Clauses separated by `&&`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split("&&").map(str::trim).filter(|p| !p.is_empty()).collect();
        Self::parse(&parts)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

// ---- resolution ----------------------------------------------------------

/// A clause with its code resolved, per vocabulary, to the canonical
/// lowercase key used by the index.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedClause {
    pub element: ElementSelector,
    pub kind: MatchKind,
    /// `(vocabulary, canonical lowercase code)`; empty for text clauses and
    /// for `any` clauses whose value is not a code anywhere.
    pub codes: Vec<(VocabId, String)>,
    /// Lowercased value for substring matching.
    pub needle: String,
}

pub(crate) fn index_key(registry: &VocabularyRegistry, vocab: VocabId, code: &str) -> Option<String> {
    registry
        .canonical_code(vocab, code)
        .ok()
        .map(|c| c.to_ascii_lowercase())
}

/// Canonical lowercase code of an element occurrence, when it carries a
/// resolvable code.
pub(crate) fn element_key(registry: &VocabularyRegistry, element: &MetadataElement) -> Option<(VocabId, String)> {
    let vocab = element.descriptor().code_vocabulary?;
    let code = element.code()?;
    Some((vocab, index_key(registry, vocab, code)?))
}

/// `key` itself plus every ancestor at a `/` boundary.
pub(crate) fn key_prefixes(key: &str) -> impl Iterator<Item = &str> {
    key.match_indices('/')
        .map(move |(i, _)| &key[..i])
        .chain(std::iter::once(key))
}

fn coded_vocabularies(element: ElementSelector) -> Vec<VocabId> {
    let mut out: Vec<VocabId> = match element {
        ElementSelector::Named(n) => n.descriptor().code_vocabulary.into_iter().collect(),
        ElementSelector::Any => ElementName::ALL
            .iter()
            .filter_map(|n| n.descriptor().code_vocabulary)
            .collect(),
    };
    out.sort_by_key(|v| v.as_str());
    out.dedup();
    out
}

impl Clause {
    pub(crate) fn resolve(&self, registry: &VocabularyRegistry) -> Result<ResolvedClause, CatalogError> {
        let needle = self.value.to_lowercase();
        let vocabs = coded_vocabularies(self.element);
        let mut codes = Vec::new();
        if self.kind != MatchKind::Text {
            if self.kind == MatchKind::Code && vocabs.is_empty() {
                if let ElementSelector::Named(n) = self.element {
                    return Err(CatalogError::NotCoded(n));
                }
            }
            let mut first_unknown = None;
            for vocab in vocabs {
                match registry.canonical_code(vocab, &self.value) {
                    Ok(c) => codes.push((vocab, c.to_ascii_lowercase())),
                    Err(e @ VocabError::CodeAmbiguous { .. }) => return Err(e.into()),
                    Err(e) => {
                        first_unknown.get_or_insert(e);
                    }
                }
            }
            if codes.is_empty() && self.kind == MatchKind::Code {
                return Err(first_unknown
                    .map(CatalogError::from)
                    .unwrap_or_else(|| CatalogError::BadClause(self.to_string())));
            }
        }
        Ok(ResolvedClause {
            element: self.element,
            kind: self.kind,
            codes,
            needle,
        })
    }
}

impl ResolvedClause {
    /// Whether `element`'s code (already keyed) satisfies the code part.
    pub fn code_matches(&self, name: ElementName, key: Option<&(VocabId, String)>) -> bool {
        if !self.element.matches(name) {
            return false;
        }
        let Some((vocab, key)) = key else {
            return false;
        };
        self.codes
            .iter()
            .any(|(v, c)| v == vocab && key_prefixes(key).any(|p| p == c))
    }

    pub fn text_matches(&self, element: &MetadataElement) -> bool {
        self.kind != MatchKind::Code
            && self.element.matches(element.name())
            && element.content().to_lowercase().contains(&self.needle)
    }

    /// Codes of `record` that satisfy the code part, in stored spelling.
    pub fn matched_codes<'r>(&self, registry: &VocabularyRegistry, record: &'r MetadataRecord) -> Vec<&'r str> {
        if self.kind == MatchKind::Text {
            return Vec::new();
        }
        record
            .elements()
            .iter()
            .filter(|e| self.code_matches(e.name(), element_key(registry, e).as_ref()))
            .filter_map(|e| e.code())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_clauses() {
        let c: Clause = "Subject.language:code:bg".parse().unwrap();
        assert_eq!(c, Clause::code(ElementName::SubjectLanguage, "bg"));
        let c: Clause = "Format.markup:code:oai:ex:sf".parse().unwrap();
        assert_eq!(c.value, "oai:ex:sf");
        let c: Clause = "any:text:lexicon".parse().unwrap();
        assert_eq!(c.element, ElementSelector::Any);
        assert!(matches!(
            "Bogus:code:x".parse::<Clause>(),
            Err(CatalogError::UnknownElement(_))
        ));
        assert!(matches!(
            "Title:fuzzy:x".parse::<Clause>(),
            Err(CatalogError::BadClause(_))
        ));
        assert!(matches!("Title".parse::<Clause>(), Err(CatalogError::BadClause(_))));
        assert!(matches!(Query::new(vec![]), Err(CatalogError::EmptyQuery)));
        let q: Query = "Title:text:a && Subject.language:code:bg".parse().unwrap();
        assert_eq!(q.clauses().len(), 2);
        assert_eq!(q.to_string(), "Title:text:a && Subject.language:code:bg");
    }

    #[test]
    fn prefixes() {
        assert_eq!(
            key_prefixes("unix/solaris").collect::<Vec<_>>(),
            ["unix", "unix/solaris"]
        );
        assert_eq!(key_prefixes("bg").collect::<Vec<_>>(), ["bg"]);
    }

    #[test]
    fn resolution() {
        let reg = VocabularyRegistry::builtin();
        let r = Clause::code(ElementName::SubjectLanguage, "x-sil-BUL")
            .resolve(&reg)
            .unwrap();
        assert_eq!(r.codes, [(VocabId::OlacLanguage, "bg".to_string())]);
        assert!(matches!(
            Clause::code(ElementName::SubjectLanguage, "mhk").resolve(&reg),
            Err(CatalogError::Vocabulary(VocabError::CodeAmbiguous { .. }))
        ));
        assert!(matches!(
            Clause::code(ElementName::SubjectLanguage, "zzz").resolve(&reg),
            Err(CatalogError::Vocabulary(VocabError::CodeUnknown { .. }))
        ));
        assert!(matches!(
            Clause::code(ElementName::Title, "x").resolve(&reg),
            Err(CatalogError::NotCoded(ElementName::Title))
        ));
        // not a code anywhere: the any-kind falls back to text
        let r = Clause::new(ElementSelector::Any, MatchKind::Any, "zzz zzz")
            .resolve(&reg)
            .unwrap();
        assert!(r.codes.is_empty());
        assert!(Clause::new(ElementSelector::Any, MatchKind::Any, "mhk")
            .resolve(&reg)
            .is_err());
    }
}
