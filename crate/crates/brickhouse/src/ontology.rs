//! Class hierarchy with tags and reciprocal relationship definitions.
//!
//! An [`Ontology`] is loaded from a document in the Turtle subset: classes
//! are subjects typed `owl:Class` (with `rdfs:subClassOf` parents and
//! `brick:hasAssociatedTag` tags), relationships are subjects typed
//! `owl:ObjectProperty` with `owl:inverseOf`, optional
//! `owl:TransitiveProperty` typing, and an optional `bh:cyclesAllowed` flag.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::rdf::{ns, parse_turtle, Iri, Literal, Object, RdfError};

/// A class in the hierarchy, with its parents and associated tags.
#[derive(Debug, Clone)]
pub struct OntologyClass {
    pub class_iri: Iri,
    pub parent_classes: BTreeSet<Iri>,
    pub tags: BTreeSet<String>,
}

/// A relationship definition: its reciprocal, and whether transitive
/// traversal and cycles are meaningful for it.
#[derive(Debug, Clone)]
pub struct RelationDef {
    pub name: Iri,
    pub inverse: Iri,
    pub transitive: bool,
    pub cyclic_allowed: bool,
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error(transparent)]
    Parse(#[from] RdfError),
    #[error("cycle in subclass hierarchy involving `{0}`")]
    SubclassCycle(Iri),
    #[error("class `{class}` has unknown parent `{parent}`")]
    UnknownParent { class: Iri, parent: Iri },
    #[error("relationship `{0}` is missing an owl:inverseOf declaration")]
    MissingInverse(Iri),
    #[error("relationship `{relation}` inverse pair is inconsistent (inverse-of-inverse is `{got}`)")]
    InconsistentInverse { relation: Iri, got: Iri },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class name `{0}` is ambiguous; use a full IRI")]
    AmbiguousClass(String),
}

/// The loaded vocabulary: class table, tag index, and relationship defs.
#[derive(Debug, Default)]
pub struct Ontology {
    classes: BTreeMap<Iri, OntologyClass>,
    children: BTreeMap<Iri, BTreeSet<Iri>>,
    by_local_name: BTreeMap<String, Vec<Iri>>,
    relations: BTreeMap<Iri, RelationDef>,
}

impl Ontology {
    /// Loads an ontology from a document in the Turtle subset.
    pub fn load(document: &str) -> Result<Self, OntologyError> {
        let triples = parse_turtle(document)?;

        let rdf_type = ns::rdf_type();
        let owl_class = ns::owl_class();
        let owl_obj_prop = ns::owl_object_property();
        let owl_transitive = ns::owl_transitive_property();
        let subclass_of = ns::rdfs_subclass_of();
        let has_tag = ns::brick_has_associated_tag();
        let inverse_of = ns::owl_inverse_of();
        let cycles_allowed = ns::bh_cycles_allowed();

        let mut classes: BTreeMap<Iri, OntologyClass> = BTreeMap::new();
        let mut relation_subjects: BTreeSet<Iri> = BTreeSet::new();
        let mut transitive: BTreeSet<Iri> = BTreeSet::new();
        let mut cyclic: BTreeSet<Iri> = BTreeSet::new();
        let mut inverses: BTreeMap<Iri, Iri> = BTreeMap::new();

        for t in &triples {
            if t.predicate == rdf_type {
                match &t.object {
                    Object::Iri(o) if *o == owl_class => {
                        classes.entry(t.subject.clone()).or_insert_with(|| {
                            OntologyClass {
                                class_iri: t.subject.clone(),
                                parent_classes: BTreeSet::new(),
                                tags: BTreeSet::new(),
                            }
                        });
                    }
                    Object::Iri(o) if *o == owl_obj_prop => {
                        relation_subjects.insert(t.subject.clone());
                    }
                    Object::Iri(o) if *o == owl_transitive => {
                        transitive.insert(t.subject.clone());
                    }
                    _ => {}
                }
            }
        }

        for t in &triples {
            if t.predicate == subclass_of {
                if let Object::Iri(parent) = &t.object {
                    if let Some(c) = classes.get_mut(&t.subject) {
                        c.parent_classes.insert(parent.clone());
                    }
                }
            } else if t.predicate == has_tag {
                let tag = match &t.object {
                    Object::Iri(i) => Some(i.local_name().to_string()),
                    Object::Literal(Literal::Str(s)) => Some(s.clone()),
                    _ => None,
                };
                if let (Some(tag), Some(c)) = (tag, classes.get_mut(&t.subject)) {
                    c.tags.insert(tag);
                }
            } else if t.predicate == inverse_of {
                if let Object::Iri(inv) = &t.object {
                    inverses.insert(t.subject.clone(), inv.clone());
                }
            } else if t.predicate == cycles_allowed {
                if let Object::Literal(Literal::Bool(true)) = &t.object {
                    cyclic.insert(t.subject.clone());
                }
            }
        }

        // Parents must exist; the subclass graph must be a DAG.
        for c in classes.values() {
            for p in &c.parent_classes {
                if !classes.contains_key(p) {
                    return Err(OntologyError::UnknownParent {
                        class: c.class_iri.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
        check_acyclic(&classes)?;

        let mut relations = BTreeMap::new();
        for rel in &relation_subjects {
            let inverse = inverses
                .get(rel)
                .ok_or_else(|| OntologyError::MissingInverse(rel.clone()))?;
            if let Some(back) = inverses.get(inverse) {
                if back != rel {
                    return Err(OntologyError::InconsistentInverse {
                        relation: rel.clone(),
                        got: back.clone(),
                    });
                }
            }
            relations.insert(
                rel.clone(),
                RelationDef {
                    name: rel.clone(),
                    inverse: inverse.clone(),
                    transitive: transitive.contains(rel) || transitive.contains(inverse),
                    cyclic_allowed: cyclic.contains(rel) || cyclic.contains(inverse),
                },
            );
        }
        // Mirror any relation declared in only one direction.
        let declared: Vec<RelationDef> = relations.values().cloned().collect();
        for def in declared {
            relations
                .entry(def.inverse.clone())
                .or_insert_with(|| RelationDef {
                    name: def.inverse.clone(),
                    inverse: def.name.clone(),
                    transitive: def.transitive,
                    cyclic_allowed: def.cyclic_allowed,
                });
        }

        let mut children: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        let mut by_local_name: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        for c in classes.values() {
            for p in &c.parent_classes {
                children
                    .entry(p.clone())
                    .or_default()
                    .insert(c.class_iri.clone());
            }
            by_local_name
                .entry(c.class_iri.local_name().to_string())
                .or_default()
                .push(c.class_iri.clone());
        }

        Ok(Ontology {
            classes,
            children,
            by_local_name,
            relations,
        })
    }

    /// The subset shipped with the crate, parsed once.
    pub fn shipped() -> Arc<Ontology> {
        static SHIPPED: OnceLock<Arc<Ontology>> = OnceLock::new();
        SHIPPED
            .get_or_init(|| {
                Arc::new(
                    Ontology::load(include_str!("../data/brick_subset.ttl"))
                        .expect("shipped ontology subset must load"),
                )
            })
            .clone()
    }

    pub fn class(&self, iri: &Iri) -> Option<&OntologyClass> {
        self.classes.get(iri)
    }

    pub fn classes(&self) -> impl Iterator<Item = &OntologyClass> {
        self.classes.values()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn relation(&self, iri: &Iri) -> Option<&RelationDef> {
        self.relations.get(iri)
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationDef> {
        self.relations.values()
    }

    /// Resolves a class reference: a full IRI, or a bare local name that is
    /// unique in the loaded vocabulary.
    pub fn resolve_class(&self, name: &str) -> Result<Iri, OntologyError> {
        if let Ok(iri) = Iri::new(name) {
            if self.classes.contains_key(&iri) {
                return Ok(iri);
            }
        }
        match self.by_local_name.get(name).map(|v| v.as_slice()) {
            Some([single]) => Ok(single.clone()),
            Some(_) => Err(OntologyError::AmbiguousClass(name.to_string())),
            None => Err(OntologyError::UnknownClass(name.to_string())),
        }
    }

    /// Same resolution for relationship names (`feeds` or a full IRI).
    pub fn resolve_relation(&self, name: &str) -> Result<Iri, OntologyError> {
        if let Ok(iri) = Iri::new(name) {
            if self.relations.contains_key(&iri) {
                return Ok(iri);
            }
        }
        let matches: Vec<&Iri> = self
            .relations
            .keys()
            .filter(|r| r.local_name() == name)
            .collect();
        match matches.as_slice() {
            [single] => Ok((*single).clone()),
            [] => Err(OntologyError::UnknownClass(name.to_string())),
            _ => Err(OntologyError::AmbiguousClass(name.to_string())),
        }
    }

    /// Reflexive-transitive closure of the subclass relation: the class
    /// itself plus every descendant.
    pub fn subclasses_of(&self, class_iri: &Iri) -> Result<BTreeSet<Iri>, OntologyError> {
        if !self.classes.contains_key(class_iri) {
            return Err(OntologyError::UnknownClass(class_iri.to_string()));
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![class_iri.clone()];
        while let Some(c) = stack.pop() {
            if out.insert(c.clone()) {
                if let Some(kids) = self.children.get(&c) {
                    stack.extend(kids.iter().cloned());
                }
            }
        }
        Ok(out)
    }

    /// Whether `class` is `ancestor` or one of its descendants.
    pub fn is_subclass_of(&self, class: &Iri, ancestor: &Iri) -> bool {
        if class == ancestor {
            return true;
        }
        let mut stack = vec![class.clone()];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            if let Some(def) = self.classes.get(&c) {
                for p in &def.parent_classes {
                    if p == ancestor {
                        return true;
                    }
                    stack.push(p.clone());
                }
            }
        }
        false
    }

    /// All classes whose tag set is a superset of `tags`. The empty set
    /// matches every class.
    pub fn classes_matching_tags<'a, I>(&self, tags: I) -> BTreeSet<Iri>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let wanted: BTreeSet<&str> = tags.into_iter().collect();
        self.classes
            .values()
            .filter(|c| wanted.iter().all(|t| c.tags.contains(*t)))
            .map(|c| c.class_iri.clone())
            .collect()
    }
}

fn check_acyclic(classes: &BTreeMap<Iri, OntologyClass>) -> Result<(), OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        InProgress,
        Done,
    }
    let mut marks: BTreeMap<&Iri, Mark> = BTreeMap::new();

    fn visit<'a>(
        node: &'a Iri,
        classes: &'a BTreeMap<Iri, OntologyClass>,
        marks: &mut BTreeMap<&'a Iri, Mark>,
    ) -> Result<(), OntologyError> {
        match marks.get(node) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::InProgress) => return Err(OntologyError::SubclassCycle(node.clone())),
            None => {}
        }
        marks.insert(node, Mark::InProgress);
        if let Some(c) = classes.get(node) {
            for p in &c.parent_classes {
                visit(p, classes, marks)?;
            }
        }
        marks.insert(node, Mark::Done);
        Ok(())
    }

    for iri in classes.keys() {
        visit(iri, classes, &mut marks)?;
    }
    Ok(())
}
