//! SPARQL text emission for interoperability with RDF tooling.
//!
//! Type matchers become `rdf:type` patterns with a sorted VALUES alternation
//! over the subclass set; paths become property-path expressions with
//! `+`/`{min,max}` repetition. Output is deterministic for a given query.

use std::fmt::Write;

use super::{BriqlError, BriqlQuery, Fetch, TypeMatcher};
use crate::ontology::Ontology;
use crate::rdf::{ns, Iri, Literal};

fn iri_ref(iri: &Iri) -> String {
    format!("<{iri}>")
}

fn repetition(min: u32, max: Option<u32>) -> String {
    match (min, max) {
        (1, None) => "+".to_string(),
        (m, None) => format!("{{{m},}}"),
        (m, Some(x)) => format!("{{{m},{x}}}"),
    }
}

fn literal_text(l: &Literal) -> String {
    match l {
        Literal::Str(s) => format!("{s:?}"),
        Literal::Num { value, .. } => format!("{value}"),
        Literal::Bool(b) => format!("{b}"),
    }
}

/// Emits a SELECT query: one projected variable per fetched attribute, type
/// constraints as rdf:type plus subclass alternation, and paths as property
/// paths.
pub fn compile_to_sparql_text(
    query: &BriqlQuery,
    ontology: &Ontology,
) -> Result<String, BriqlError> {
    let mut projected: Vec<String> = Vec::new();
    let mut body = String::new();

    for var in &query.variables {
        let v = &var.name;
        if var.output {
            projected.push(format!("?{v}"));
        }
        match &var.matcher {
            TypeMatcher::Exact(name) => {
                let class = ontology.resolve_class(name)?;
                writeln!(body, "  ?{v} rdf:type {} .", iri_ref(&class)).unwrap();
            }
            TypeMatcher::Isa(name) => {
                let class = ontology.resolve_class(name)?;
                let subclasses = ontology.subclasses_of(&class)?;
                writeln!(body, "  ?{v} rdf:type ?{v}__class .").unwrap();
                let alternation: Vec<String> = subclasses.iter().map(iri_ref).collect();
                writeln!(body, "  VALUES ?{v}__class {{ {} }}", alternation.join(" ")).unwrap();
            }
            TypeMatcher::Tags(tags) => {
                let classes = ontology.classes_matching_tags(tags.iter().map(|s| s.as_str()));
                writeln!(body, "  ?{v} rdf:type ?{v}__class .").unwrap();
                let alternation: Vec<String> = classes.iter().map(iri_ref).collect();
                writeln!(body, "  VALUES ?{v}__class {{ {} }}", alternation.join(" ")).unwrap();
            }
            TypeMatcher::Properties(props) => {
                for (key, value) in props {
                    writeln!(
                        body,
                        "  ?{v} {} {} .",
                        iri_ref(&ns::bh(key)),
                        literal_text(value)
                    )
                    .unwrap();
                }
            }
        }
        if var.fetch.contains(&Fetch::Label) {
            if var.output {
                projected.push(format!("?{v}__label"));
            }
            writeln!(
                body,
                "  OPTIONAL {{ ?{v} {} ?{v}__label . }}",
                iri_ref(&ns::rdfs_label())
            )
            .unwrap();
        }
        if var.fetch.contains(&Fetch::PointInfo) {
            if var.output {
                projected.push(format!("?{v}__point"));
                projected.push(format!("?{v}__point_class"));
            }
            writeln!(
                body,
                "  OPTIONAL {{ ?{v} {} ?{v}__point . ?{v}__point rdf:type ?{v}__point_class . }}",
                iri_ref(&ns::brick("hasPoint"))
            )
            .unwrap();
        }
        if var.fetch.contains(&Fetch::Properties) {
            if var.output {
                projected.push(format!("?{v}__prop_key"));
                projected.push(format!("?{v}__prop_value"));
            }
            writeln!(body, "  OPTIONAL {{ ?{v} ?{v}__prop_key ?{v}__prop_value . }}").unwrap();
        }
    }

    for path in &query.paths {
        let expr: Vec<String> = path
            .steps
            .iter()
            .map(|s| {
                let rel = ontology.resolve_relation(&s.property)?;
                Ok(format!("{}{}", iri_ref(&rel), repetition(s.min, s.max)))
            })
            .collect::<Result<Vec<_>, BriqlError>>()?;
        writeln!(
            body,
            "  ?{} {} ?{} .",
            path.from_ref,
            expr.join("/"),
            path.to_ref
        )
        .unwrap();
    }

    let mut out = String::new();
    writeln!(out, "PREFIX rdf: <{}>", ns::RDF).unwrap();
    writeln!(out, "PREFIX rdfs: <{}>", ns::RDFS).unwrap();
    writeln!(out, "PREFIX brick: <{}>", ns::BRICK).unwrap();
    writeln!(out, "SELECT {}", projected.join(" ")).unwrap();
    writeln!(out, "WHERE {{").unwrap();
    out.push_str(&body);
    writeln!(out, "}}").unwrap();
    Ok(out)
}

/// Lexical well-formedness check for emitted SPARQL text: braces balance,
/// the body is non-empty, and every projected variable is bound by some
/// pattern in the body.
pub fn check_sparql_well_formed(text: &str) -> Result<(), String> {
    let mut depth: i64 = 0;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(format!("unbalanced `}}` at byte {i}"));
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(format!("{depth} unclosed brace(s)"));
    }

    let select_start = text
        .find("SELECT")
        .ok_or_else(|| "missing SELECT".to_string())?;
    let where_start = text
        .find("WHERE")
        .ok_or_else(|| "missing WHERE".to_string())?;
    if where_start < select_start {
        return Err("WHERE precedes SELECT".to_string());
    }
    let projection = &text[select_start + 6..where_start];
    let body = &text[where_start..];
    if !body.contains('?') {
        return Err("empty graph pattern".to_string());
    }
    for var in projection.split_whitespace() {
        if !var.starts_with('?') {
            return Err(format!("bad projection token `{var}`"));
        }
        let bound = body
            .split(|c: char| c.is_whitespace() || c == '{' || c == '}')
            .any(|tok| tok == var);
        if !bound {
            return Err(format!("projected variable `{var}` is not bound in the body"));
        }
    }
    Ok(())
}
