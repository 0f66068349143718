use std::fmt::Write;

use super::model::*;
use super::ns;

struct Writer<'a> {
    doc: &'a MappingDocument,
    out: String,
}

fn local_name_ok(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    !local.ends_with('.') && local.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub(crate) fn turtle_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl Writer<'_> {
    fn iri(&self, iri: &str) -> String {
        let best = self
            .doc
            .prefixes
            .iter()
            .filter(|(_, nsi)| iri.starts_with(nsi.as_str()) && local_name_ok(&iri[nsi.len()..]))
            .max_by_key(|(p, nsi)| (nsi.len(), std::cmp::Reverse((*p).clone())));
        match best {
            Some((p, nsi)) => format!("{p}:{}", &iri[nsi.len()..]),
            None => format!("<{iri}>"),
        }
    }

    fn rr(&self, local: &str) -> String {
        self.iri(&format!("{}{local}", ns::RR))
    }

    fn rml(&self, local: &str) -> String {
        self.iri(&format!("{}{local}", ns::RML))
    }

    fn literal(&self, value: &str, datatype: &Option<String>, language: &Option<String>) -> String {
        let mut s = turtle_string(value);
        if let Some(lang) = language {
            s.push('@');
            s.push_str(lang);
        } else if let Some(dt) = datatype {
            s.push_str("^^");
            s.push_str(&self.iri(dt));
        }
        s
    }

    /// Body lines of a term map node, without brackets.
    fn term_map(&self, tm: &TermMap) -> Vec<String> {
        let mut lines = Vec::new();
        match tm.kind {
            TermKind::Constant => {
                let v = match tm.term_type {
                    TermType::Iri => self.iri(&tm.value),
                    TermType::Literal => self.literal(&tm.value, &tm.datatype, &tm.language),
                };
                lines.push(format!("{} {v}", self.rr("constant")));
                return lines;
            }
            TermKind::Template => lines.push(format!("{} {}", self.rr("template"), turtle_string(&tm.value))),
            TermKind::Reference => lines.push(format!("{} {}", self.rml("reference"), turtle_string(&tm.value))),
        }
        let tt = match tm.term_type {
            TermType::Iri => "IRI",
            TermType::Literal => "Literal",
        };
        lines.push(format!("{} {}", self.rr("termType"), self.rr(tt)));
        if let Some(dt) = &tm.datatype {
            lines.push(format!("{} {}", self.rr("datatype"), self.iri(dt)));
        }
        if let Some(lang) = &tm.language {
            lines.push(format!("{} {}", self.rr("language"), turtle_string(lang)));
        }
        lines
    }

    fn object_map(&self, om: &ObjectMap, indent: &str) -> String {
        let inner = format!("{indent}    ");
        let lines: Vec<String> = match om {
            ObjectMap::Term(t) => self.term_map(t),
            ObjectMap::Ref(r) => {
                let mut lines = vec![format!("{} {}", self.rr("parentTriplesMap"), self.iri(&r.parent_triples_map))];
                for jc in &r.join_conditions {
                    lines.push(format!(
                        "{} [ {} {} ; {} {} ]",
                        self.rr("joinCondition"),
                        self.rr("child"),
                        turtle_string(&jc.child),
                        self.rr("parent"),
                        turtle_string(&jc.parent)
                    ));
                }
                lines
            }
            ObjectMap::Function(f) => {
                let pom = self.rr("predicateObjectMap");
                let pred = self.rr("predicate");
                let om = self.rr("objectMap");
                vec![format!(
                    "{} [\n{inner}    {pom} [ {pred} {} ; {om} [ {} {} ] ] ;\n{inner}    {pom} [ {pred} {} ; {om} [ {} {} ] ]\n{inner}]",
                    self.iri(&format!("{}functionValue", ns::FNML)),
                    self.iri(&format!("{}executes", ns::FNO)),
                    self.rr("constant"),
                    self.iri(&f.function_id),
                    self.iri(&ns::value_parameter()),
                    self.rml("reference"),
                    turtle_string(&f.input_attribute),
                )]
            }
        };
        block(&lines, indent)
    }

    fn triples_map(&mut self, tm: &TriplesMap) {
        let ind = "    ";
        let mut parts = Vec::new();
        let mut ls = vec![format!("{} {}", self.rml("source"), turtle_string(&tm.logical_source.source_path))];
        match tm.logical_source.reference_formulation {
            ReferenceFormulation::Csv => {
                ls.push(format!("{} {}", self.rml("referenceFormulation"), self.iri(&format!("{}CSV", ns::QL))))
            }
        }
        parts.push(format!("{} {}", self.rml("logicalSource"), block(&ls, ind)));

        let mut sm = self.term_map(&tm.subject_map.term);
        for class in &tm.subject_map.classes {
            sm.push(format!("{} {}", self.rr("class"), self.iri(class)));
        }
        parts.push(format!("{} {}", self.rr("subjectMap"), block(&sm, ind)));

        let mut poms: Vec<&PredicateObjectMap> = tm.predicate_object_maps.iter().collect();
        poms.sort();
        for pom in poms {
            let inner = format!("{ind}    ");
            let body = vec![
                format!("{} {}", self.rr("predicate"), self.iri(&pom.predicate)),
                format!("{} {}", self.rr("objectMap"), self.object_map(&pom.object, &inner)),
            ];
            parts.push(format!("{} {}", self.rr("predicateObjectMap"), block(&body, ind)));
        }

        let _ = write!(self.out, "{} a {}", self.iri(&tm.id), self.rr("TriplesMap"));
        for p in parts {
            let _ = write!(self.out, " ;\n{ind}{p}");
        }
        self.out.push_str(" .\n");
    }
}

fn block(lines: &[String], indent: &str) -> String {
    let inner = format!("{indent}    ");
    let body: Vec<String> = lines.iter().map(|l| format!("{inner}{l}")).collect();
    format!("[\n{}\n{indent}]", body.join(" ;\n"))
}

/// Serializes a document as Turtle. Output is deterministic: prefixes sorted
/// by name, triples maps in document order, predicate-object maps sorted.
pub fn serialize_mapping(doc: &MappingDocument) -> String {
    let mut w = Writer { doc, out: String::new() };
    for (p, iri) in &doc.prefixes {
        let _ = writeln!(w.out, "@prefix {p}: <{iri}> .");
    }
    for tm in &doc.triples_maps {
        w.out.push('\n');
        w.triples_map(tm);
    }
    w.out
}
