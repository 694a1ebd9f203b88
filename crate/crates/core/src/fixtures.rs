//! Sample records used by tests, benchmarks and demos.
//!
//! `KPML_XML` is the published KPML record verbatim, including its
//! lowercase `</type.functionality>` closing tag. The LDC and ELRA records
//! transcribe the corresponding catalog entries.

pub const KPML_XML: &str = include_str!("../fixtures/kpml.xml");
pub const LDC94T5_XML: &str = include_str!("../fixtures/ldc94t5.xml");
pub const ELRA_L0030_XML: &str = include_str!("../fixtures/elra-l0030.xml");
/// A record whose only language code is the collective `mhk`.
pub const AMBIGUOUS_MHK_XML: &str = include_str!("../fixtures/ambiguous-mhk.xml");

pub const KPML_ID: &str = "oai:dfki:KPML";
pub const LDC94T5_ID: &str = "oai:ldc:LDC94T5";
pub const ELRA_L0030_ID: &str = "oai:elra:L0030";

/// `(archive id, repository name, item identifier, record document)` for
/// the three archives of the Bulgarian federation scenario.
pub const FEDERATION: [(&str, &str, &str, &str); 3] = [
    ("ldc", "Linguistic Data Consortium", LDC94T5_ID, LDC94T5_XML),
    (
        "elra",
        "European Language Resources Association",
        ELRA_L0030_ID,
        ELRA_L0030_XML,
    ),
    ("dfki", "DFKI", KPML_ID, KPML_XML),
];

pub fn kpml() -> crate::model::MetadataRecord {
    parse(KPML_XML)
}

pub fn ldc94t5() -> crate::model::MetadataRecord {
    parse(LDC94T5_XML)
}

pub fn elra_l0030() -> crate::model::MetadataRecord {
    parse(ELRA_L0030_XML)
}

fn parse(doc: &str) -> crate::model::MetadataRecord {
    crate::xml::parse_record(doc.as_bytes()).expect("fixture parses").record
}
