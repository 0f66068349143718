use std::collections::{BTreeMap, HashMap, HashSet};

use super::model::*;
use super::ns;
use super::turtle::{parse_turtle, Node, Statement, RDF_TYPE};
use super::MappingError;
use crate::functions::resolve_function;

/// Statements grouped by subject, preserving document order.
struct Index<'a> {
    by_subject: HashMap<&'a Node, Vec<&'a Statement>>,
}

impl<'a> Index<'a> {
    fn new(statements: &'a [Statement]) -> Self {
        let mut by_subject: HashMap<&Node, Vec<&Statement>> = HashMap::new();
        for st in statements {
            by_subject.entry(&st.subject).or_default().push(st);
        }
        Index { by_subject }
    }

    fn props(&self, node: &Node) -> &[&'a Statement] {
        self.by_subject.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    fn values(&self, node: &Node, predicate: &str) -> Vec<&'a Node> {
        self.props(node).iter().filter(|s| s.predicate == predicate).map(|s| &s.object).collect()
    }
}

fn in_controlled_vocab(predicate: &str) -> bool {
    [ns::RR, ns::RML, ns::FNML, ns::FNO, ns::QL].iter().any(|v| predicate.starts_with(v))
}

fn rr(local: &str) -> String {
    format!("{}{local}", ns::RR)
}

fn rml(local: &str) -> String {
    format!("{}{local}", ns::RML)
}

fn fnml(local: &str) -> String {
    format!("{}{local}", ns::FNML)
}

struct Builder<'i, 'a> {
    index: &'i Index<'a>,
    map: String,
}

impl<'a> Builder<'_, 'a> {
    /// Rejects predicates from the mapping vocabularies that this context
    /// does not understand.
    fn check_known(&self, node: &Node, allowed: &[String], context: &str) -> Result<(), MappingError> {
        for st in self.index.props(node) {
            if in_controlled_vocab(&st.predicate) && !allowed.contains(&st.predicate) {
                return Err(MappingError::UnknownPredicate {
                    predicate: st.predicate.clone(),
                    context: format!("{context} of triples map <{}>", self.map),
                });
            }
        }
        Ok(())
    }

    fn single(&self, node: &Node, predicate: &str, what: &str) -> Result<Option<&'a Node>, MappingError> {
        let vals = self.index.values(node, predicate);
        match vals.len() {
            0 => Ok(None),
            1 => Ok(Some(vals[0])),
            _ => Err(self.invalid(format!("more than one {what}"))),
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> MappingError {
        MappingError::Invalid { map: self.map.clone(), reason: reason.into() }
    }

    fn string_value(&self, node: &Node, what: &str) -> Result<String, MappingError> {
        match node {
            Node::Literal { value, .. } => Ok(value.clone()),
            _ => Err(self.invalid(format!("{what} must be a string literal"))),
        }
    }

    fn iri_value(&self, node: &Node, what: &str) -> Result<String, MappingError> {
        node.as_iri().map(str::to_owned).ok_or_else(|| self.invalid(format!("{what} must be an IRI")))
    }

    fn logical_source(&self, tm: &Node) -> Result<LogicalSource, MappingError> {
        if self.single(tm, &rr("logicalTable"), "logical table")?.is_some() {
            return Err(self.invalid("rr:logicalTable is not supported; use rml:logicalSource"));
        }
        let ls = self
            .single(tm, &rml("logicalSource"), "logical source")?
            .ok_or_else(|| self.invalid("missing rml:logicalSource"))?;
        self.check_known(ls, &[rml("source"), rml("referenceFormulation"), rml("iterator")], "logical source")?;
        let source = self
            .single(ls, &rml("source"), "rml:source")?
            .ok_or_else(|| self.invalid("logical source without rml:source"))?;
        let source_path = self.string_value(source, "rml:source")?;
        if let Some(f) = self.single(ls, &rml("referenceFormulation"), "reference formulation")? {
            let f = self.iri_value(f, "rml:referenceFormulation")?;
            if f != format!("{}CSV", ns::QL) {
                return Err(MappingError::UnsupportedReferenceFormulation { map: self.map.clone(), formulation: f });
            }
        }
        Ok(LogicalSource { source_path, reference_formulation: ReferenceFormulation::Csv })
    }

    /// Reads the term-map part of a subject or object map node.
    fn term_map(&self, node: &Node, default_type: TermType) -> Result<Option<TermMap>, MappingError> {
        let template = self.single(node, &rr("template"), "rr:template")?;
        let reference = self.single(node, &rml("reference"), "rml:reference")?;
        let constant = self.single(node, &rr("constant"), "rr:constant")?;
        let given = [template.is_some(), reference.is_some(), constant.is_some()].iter().filter(|b| **b).count();
        if given > 1 {
            return Err(self.invalid("term map has more than one of rr:template, rml:reference, rr:constant"));
        }
        let term_type = match self.single(node, &rr("termType"), "rr:termType")? {
            Some(t) => match t.as_iri() {
                Some(i) if i == rr("IRI") => Some(TermType::Iri),
                Some(i) if i == rr("Literal") => Some(TermType::Literal),
                _ => return Err(self.invalid(format!("unsupported rr:termType {t}"))),
            },
            None => None,
        };
        let mut tm = if let Some(t) = template {
            let value = self.string_value(t, "rr:template")?;
            Template::parse(&value).map_err(|e| self.invalid(e))?;
            TermMap::template(value, term_type.unwrap_or(TermType::Iri))
        } else if let Some(r) = reference {
            let value = self.string_value(r, "rml:reference")?;
            if value.is_empty() {
                return Err(self.invalid("empty rml:reference"));
            }
            TermMap::reference(value, term_type.unwrap_or(default_type))
        } else if let Some(c) = constant {
            match c {
                Node::Iri(i) => TermMap::constant_iri(i.clone()),
                Node::Literal { value, datatype, language } => {
                    let mut t = TermMap::constant_literal(value.clone());
                    t.datatype = datatype.clone();
                    t.language = language.clone();
                    t
                }
                Node::Blank(_) => return Err(self.invalid("blank node constants are not supported")),
            }
        } else {
            return Ok(None);
        };
        if tm.kind != TermKind::Constant {
            if let Some(dt) = self.single(node, &rr("datatype"), "rr:datatype")? {
                tm.datatype = Some(self.iri_value(dt, "rr:datatype")?);
            }
            if let Some(lang) = self.single(node, &rr("language"), "rr:language")? {
                tm.language = Some(self.string_value(lang, "rr:language")?);
            }
            if (tm.datatype.is_some() || tm.language.is_some()) && tm.term_type != TermType::Literal {
                return Err(self.invalid("rr:datatype/rr:language require a literal term map"));
            }
        }
        Ok(Some(tm))
    }

    fn subject_map(&self, tm: &Node) -> Result<SubjectMap, MappingError> {
        let sm =
            self.single(tm, &rr("subjectMap"), "subject map")?.ok_or_else(|| self.invalid("missing rr:subjectMap"))?;
        self.check_known(
            sm,
            &[rr("template"), rml("reference"), rr("constant"), rr("termType"), rr("class")],
            "subject map",
        )?;
        let term = self.term_map(sm, TermType::Iri)?.ok_or_else(|| self.invalid("subject map has no term"))?;
        if term.term_type != TermType::Iri {
            return Err(self.invalid("subject map term type must be rr:IRI"));
        }
        let classes = self
            .index
            .values(sm, &rr("class"))
            .into_iter()
            .map(|c| self.iri_value(c, "rr:class"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubjectMap { term, classes })
    }

    fn object_map(&self, om: &Node) -> Result<ObjectMap, MappingError> {
        self.check_known(
            om,
            &[
                rr("template"),
                rml("reference"),
                rr("constant"),
                rr("termType"),
                rr("datatype"),
                rr("language"),
                rr("parentTriplesMap"),
                rr("joinCondition"),
                fnml("functionValue"),
            ],
            "object map",
        )?;
        if let Some(fv) = self.single(om, &fnml("functionValue"), "fnml:functionValue")? {
            return self.function_call(fv).map(ObjectMap::Function);
        }
        if let Some(parent) = self.single(om, &rr("parentTriplesMap"), "rr:parentTriplesMap")? {
            let parent_triples_map = self.iri_value(parent, "rr:parentTriplesMap")?;
            let mut join_conditions = Vec::new();
            for jc in self.index.values(om, &rr("joinCondition")) {
                self.check_known(jc, &[rr("child"), rr("parent")], "join condition")?;
                let child = self.single(jc, &rr("child"), "rr:child")?;
                let parent = self.single(jc, &rr("parent"), "rr:parent")?;
                match (child, parent) {
                    (Some(c), Some(p)) => join_conditions.push(JoinCondition {
                        child: self.string_value(c, "rr:child")?,
                        parent: self.string_value(p, "rr:parent")?,
                    }),
                    _ => return Err(self.invalid("join condition needs both rr:child and rr:parent")),
                }
            }
            return Ok(ObjectMap::Ref(RefObjectMap { parent_triples_map, join_conditions }));
        }
        self.term_map(om, TermType::Literal)?
            .map(ObjectMap::Term)
            .ok_or_else(|| self.invalid("object map has no term, parent triples map or function"))
    }

    fn function_call(&self, fv: &Node) -> Result<FunctionCall, MappingError> {
        let malformed =
            |reason: &str| MappingError::MalformedFunctionCall { map: self.map.clone(), reason: reason.into() };
        self.check_known(fv, &[rr("predicateObjectMap"), rml("logicalSource"), rr("subjectMap")], "function value")?;
        let executes = format!("{}executes", ns::FNO);
        let value_param = ns::value_parameter();
        let mut function_id = None;
        let mut inputs = Vec::new();
        for pom in self.index.values(fv, &rr("predicateObjectMap")) {
            for (predicate, object) in self.expand_pom(pom)? {
                if predicate == executes {
                    let id = match object {
                        ObjectMap::Term(TermMap {
                            kind: TermKind::Constant, term_type: TermType::Iri, value, ..
                        }) => value,
                        _ => return Err(malformed("fno:executes must name the function IRI as a constant")),
                    };
                    if function_id.replace(id).is_some() {
                        return Err(malformed("more than one fno:executes"));
                    }
                } else if predicate == value_param {
                    match object {
                        ObjectMap::Term(TermMap { kind: TermKind::Reference, value, .. }) => inputs.push(value),
                        _ => return Err(malformed("the value parameter must be bound with rml:reference")),
                    }
                } else {
                    return Err(malformed(&format!("unknown function parameter <{predicate}>")));
                }
            }
        }
        let function_id = function_id.ok_or_else(|| malformed("missing fno:executes"))?;
        resolve_function(&function_id).map_err(|e| malformed(&e.to_string()))?;
        match inputs.len() {
            1 => Ok(FunctionCall { function_id, input_attribute: inputs.remove(0) }),
            0 => Err(malformed("missing input binding for the value parameter")),
            _ => Err(malformed("more than one input binding")),
        }
    }

    /// Expands one `rr:predicateObjectMap` node into (predicate, object) pairs:
    /// every predicate is paired with every object.
    fn expand_pom(&self, pom: &Node) -> Result<Vec<(String, ObjectMap)>, MappingError> {
        self.check_known(
            pom,
            &[rr("predicate"), rr("predicateMap"), rr("object"), rr("objectMap")],
            "predicate-object map",
        )?;
        let mut predicates = Vec::new();
        for p in self.index.values(pom, &rr("predicate")) {
            predicates.push(self.iri_value(p, "rr:predicate")?);
        }
        for pm in self.index.values(pom, &rr("predicateMap")) {
            self.check_known(pm, &[rr("constant")], "predicate map")?;
            let c = self
                .single(pm, &rr("constant"), "rr:constant")?
                .ok_or_else(|| self.invalid("predicate maps must be constant"))?;
            predicates.push(self.iri_value(c, "predicate constant")?);
        }
        let mut objects = Vec::new();
        for o in self.index.values(pom, &rr("object")) {
            objects.push(ObjectMap::Term(match o {
                Node::Iri(i) => TermMap::constant_iri(i.clone()),
                Node::Literal { value, datatype, language } => {
                    let mut t = TermMap::constant_literal(value.clone());
                    t.datatype = datatype.clone();
                    t.language = language.clone();
                    t
                }
                Node::Blank(_) => return Err(self.invalid("rr:object cannot be a blank node")),
            }));
        }
        for om in self.index.values(pom, &rr("objectMap")) {
            objects.push(self.object_map(om)?);
        }
        if predicates.is_empty() || objects.is_empty() {
            return Err(self.invalid("predicate-object map needs a predicate and an object"));
        }
        Ok(predicates.iter().flat_map(|p| objects.iter().map(move |o| (p.clone(), o.clone()))).collect())
    }

    fn triples_map(&mut self, node: &Node) -> Result<TriplesMap, MappingError> {
        self.check_known(
            node,
            &[rml("logicalSource"), rr("logicalTable"), rr("subjectMap"), rr("predicateObjectMap")],
            "triples map",
        )?;
        let logical_source = self.logical_source(node)?;
        let subject_map = self.subject_map(node)?;
        let mut predicate_object_maps = Vec::new();
        for pom in self.index.values(node, &rr("predicateObjectMap")) {
            for (predicate, object) in self.expand_pom(pom)? {
                predicate_object_maps.push(PredicateObjectMap { predicate, object });
            }
        }
        Ok(TriplesMap { id: self.map.clone(), logical_source, subject_map, predicate_object_maps })
    }
}

/// Parses a Turtle mapping document.
///
/// Triples maps are the subjects typed `rr:TriplesMap` or carrying an
/// `rml:logicalSource`, taken in order of first appearance. Statements about
/// other subjects with predicates outside the mapping vocabularies are
/// ignored.
pub fn parse_mapping(text: &str) -> Result<MappingDocument, MappingError> {
    let graph = parse_turtle(text)?;
    let index = Index::new(&graph.statements);

    let function_values: HashSet<&Node> =
        graph.statements.iter().filter(|s| s.predicate == fnml("functionValue")).map(|s| &s.object).collect();
    let tm_type = rr("TriplesMap");
    let mut seen = HashSet::new();
    let mut tm_nodes = Vec::new();
    for st in &graph.statements {
        let is_tm = (st.predicate == RDF_TYPE && st.object.as_iri() == Some(tm_type.as_str()))
            || st.predicate == rml("logicalSource");
        if is_tm && !function_values.contains(&st.subject) && seen.insert(&st.subject) {
            tm_nodes.push(&st.subject);
        }
    }

    let mut triples_maps: Vec<TriplesMap> = Vec::new();
    for node in tm_nodes {
        let id = match node {
            Node::Iri(i) => i.clone(),
            _ => {
                return Err(MappingError::Invalid {
                    map: node.to_string(),
                    reason: "triples maps must be named by an IRI".into(),
                })
            }
        };
        let mut builder = Builder { index: &index, map: id };
        triples_maps.push(builder.triples_map(node)?);
    }

    let mut ids = HashSet::new();
    for tm in &triples_maps {
        if !ids.insert(tm.id.as_str()) {
            return Err(MappingError::DuplicateTriplesMap(tm.id.clone()));
        }
    }
    for tm in &triples_maps {
        for pom in &tm.predicate_object_maps {
            if let ObjectMap::Ref(r) = &pom.object {
                let parent = triples_maps.iter().find(|p| p.id == r.parent_triples_map).ok_or_else(|| {
                    MappingError::UnresolvedParent { map: tm.id.clone(), parent: r.parent_triples_map.clone() }
                })?;
                if r.join_conditions.is_empty() && parent.logical_source != tm.logical_source {
                    return Err(MappingError::Invalid {
                        map: tm.id.clone(),
                        reason: format!(
                            "reference to <{}> over a different logical source requires a join condition",
                            parent.id
                        ),
                    });
                }
            }
        }
    }

    let mut prefixes = graph.prefixes;
    add_builtin_prefixes(
        &mut prefixes,
        triples_maps
            .iter()
            .any(|tm| tm.predicate_object_maps.iter().any(|p| matches!(p.object, ObjectMap::Function(_)))),
    );
    Ok(MappingDocument { prefixes, triples_maps })
}

/// Binds the standard prefixes the serializer relies on, without overriding
/// user bindings.
pub(crate) fn add_builtin_prefixes(prefixes: &mut BTreeMap<String, String>, with_functions: bool) {
    let mut builtin = vec![("rr", ns::RR), ("rml", ns::RML), ("ql", ns::QL)];
    if with_functions {
        builtin.extend([
            ("fnml", ns::FNML),
            ("fno", ns::FNO),
            ("eablock", ns::EABLOCK),
            ("eablock-fn", ns::EABLOCK_FN),
        ]);
    }
    for (p, iri) in builtin {
        if prefixes.values().any(|v| v == iri) {
            continue;
        }
        prefixes.entry(p.to_string()).or_insert_with(|| iri.to_string());
    }
}
