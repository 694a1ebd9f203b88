mod common;

use proptest::prelude::*;

use olac::model::{validate_record, Diagnostic, MetadataRecord};
use olac::{fixtures, parse_record, serialize_record};

fn errors(diags: &[Diagnostic]) -> Vec<&Diagnostic> {
    diags.iter().filter(|d| d.is_error()).collect()
}

fn findings(diags: Vec<Diagnostic>) -> Vec<(bool, &'static str, String)> {
    let mut out: Vec<_> = diags
        .into_iter()
        .map(|d| (d.is_error(), d.rule.as_str(), d.message))
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_records_validate(record in common::valid_record(common::registry())) {
        let reg = common::registry();
        let diags = validate_record(&record, &reg);
        prop_assert!(errors(&diags).is_empty(), "{:?}", diags);
    }

    #[test]
    fn serialize_then_parse_is_identity(record in common::valid_record(common::registry())) {
        let reg = common::registry();
        let xml = serialize_record(&record, &reg).unwrap();
        let back = parse_record(xml.as_bytes()).unwrap();
        prop_assert!(errors(&back.diagnostics).is_empty(), "{:?}", back.diagnostics);
        prop_assert_eq!(back.record, record);
    }

    #[test]
    fn duplicating_an_element_adds_no_error(
        record in common::valid_record(common::registry()),
        pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(!record.elements().is_empty());
        let reg = common::registry();
        let mut elements = record.elements().to_vec();
        let i = pick.index(elements.len());
        elements.insert(i, elements[i].clone());
        let doubled = MetadataRecord::new(record.alternatives().to_vec(), elements);
        prop_assert!(errors(&validate_record(&doubled, &reg)).is_empty());
    }

    #[test]
    fn diagnostics_ignore_element_order(
        elements in proptest::collection::vec(
            prop_oneof![
                common::valid_element(common::registry()),
                Just(olac::MetadataElement::coded(olac::model::ElementName::SubjectLanguage, "mhk")),
                Just(olac::MetadataElement::coded(olac::model::ElementName::FormatOs, "Plan9")),
                Just(olac::MetadataElement::coded(olac::model::ElementName::Title, "x")),
            ],
            0..10,
        ).prop_shuffle().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let reg = common::registry();
        let (a, b) = elements;
        let da = findings(validate_record(&MetadataRecord::from_elements(a), &reg));
        let db = findings(validate_record(&MetadataRecord::from_elements(b), &reg));
        prop_assert_eq!(da, db);
    }

    #[test]
    fn parser_survives_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        if let Ok(outcome) = parse_record(&bytes) {
            let _ = validate_record(&outcome.record, &common::registry());
        }
    }

    #[test]
    fn parser_survives_damaged_fixtures(cut in 0usize..2000, junk in "[<>&/\"'a-z ]{0,8}") {
        let src = fixtures::KPML_XML;
        let mut at = cut.min(src.len());
        while !src.is_char_boundary(at) {
            at -= 1;
        }
        let damaged = format!("{}{junk}{}", &src[..at], &src[at..]);
        if let Ok(outcome) = parse_record(damaged.as_bytes()) {
            let _ = validate_record(&outcome.record, &common::registry());
        }
    }
}
