//! Query document parsing: JSON text to [`BriqlQuery`], with unknown keys
//! rejected and errors reporting the JSON path of the offending value.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::{
    BriqlError, BriqlQuery, Fetch, PathConstraint, PathStep, PointFilter, QueryMode, TypeMatcher,
    VariableDecl,
};
use crate::rdf::{Iri, Literal};

type Result<T> = std::result::Result<T, BriqlError>;

fn as_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| BriqlError::parse(path, "expected an object"))
}

fn as_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| BriqlError::parse(path, "expected an array"))
}

fn as_str<'a>(value: &'a Value, path: &str) -> Result<&'a str> {
    value
        .as_str()
        .ok_or_else(|| BriqlError::parse(path, "expected a string"))
}

fn reject_unknown_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(BriqlError::parse(
                format!("{path}.{key}"),
                format!("unknown key `{key}`"),
            ));
        }
    }
    Ok(())
}

fn parse_literal(value: &Value, path: &str) -> Result<Literal> {
    match value {
        Value::String(s) => Ok(Literal::Str(s.clone())),
        Value::Number(n) => {
            let v = n
                .as_f64()
                .ok_or_else(|| BriqlError::parse(path, "number not representable"))?;
            Ok(Literal::num(v))
        }
        Value::Bool(b) => Ok(Literal::Bool(*b)),
        _ => Err(BriqlError::parse(
            path,
            "expected a string, number, or boolean",
        )),
    }
}

fn parse_matcher(value: &Value, path: &str) -> Result<TypeMatcher> {
    let obj = as_object(value, path)?;
    let kind = as_str(
        obj.get("match")
            .ok_or_else(|| BriqlError::parse(path, "missing `match`"))?,
        &format!("{path}.match"),
    )?;
    match kind {
        "exact" | "isa" => {
            reject_unknown_keys(obj, &["match", "type"], path)?;
            let class = as_str(
                obj.get("type")
                    .ok_or_else(|| BriqlError::parse(path, "missing `type`"))?,
                &format!("{path}.type"),
            )?;
            Ok(if kind == "exact" {
                TypeMatcher::Exact(class.to_string())
            } else {
                TypeMatcher::Isa(class.to_string())
            })
        }
        "tags" => {
            reject_unknown_keys(obj, &["match", "tags"], path)?;
            let tags = as_array(
                obj.get("tags")
                    .ok_or_else(|| BriqlError::parse(path, "missing `tags`"))?,
                &format!("{path}.tags"),
            )?;
            let mut set = BTreeSet::new();
            for (i, t) in tags.iter().enumerate() {
                set.insert(as_str(t, &format!("{path}.tags[{i}]"))?.to_string());
            }
            Ok(TypeMatcher::Tags(set))
        }
        "properties" => {
            reject_unknown_keys(obj, &["match", "properties"], path)?;
            let props = as_object(
                obj.get("properties")
                    .ok_or_else(|| BriqlError::parse(path, "missing `properties`"))?,
                &format!("{path}.properties"),
            )?;
            let mut map = BTreeMap::new();
            for (k, v) in props {
                map.insert(k.clone(), parse_literal(v, &format!("{path}.properties.{k}"))?);
            }
            Ok(TypeMatcher::Properties(map))
        }
        other => Err(BriqlError::parse(
            format!("{path}.match"),
            format!("unknown matcher kind `{other}`"),
        )),
    }
}

fn parse_point_filter(value: &Value, path: &str) -> Result<PointFilter> {
    let obj = as_object(value, path)?;
    let kind = as_str(
        obj.get("match")
            .ok_or_else(|| BriqlError::parse(path, "missing `match`"))?,
        &format!("{path}.match"),
    )?;
    match kind {
        "tags" => {
            reject_unknown_keys(obj, &["match", "tags"], path)?;
            let tags = as_array(
                obj.get("tags")
                    .ok_or_else(|| BriqlError::parse(path, "missing `tags`"))?,
                &format!("{path}.tags"),
            )?;
            let mut set = BTreeSet::new();
            for (i, t) in tags.iter().enumerate() {
                set.insert(as_str(t, &format!("{path}.tags[{i}]"))?.to_string());
            }
            Ok(PointFilter::Tags(set))
        }
        "isa" => {
            reject_unknown_keys(obj, &["match", "type"], path)?;
            let class = as_str(
                obj.get("type")
                    .ok_or_else(|| BriqlError::parse(path, "missing `type`"))?,
                &format!("{path}.type"),
            )?;
            Ok(PointFilter::Isa(class.to_string()))
        }
        other => Err(BriqlError::parse(
            format!("{path}.match"),
            format!("unknown point filter kind `{other}`"),
        )),
    }
}

fn parse_variable(value: &Value, path: &str) -> Result<VariableDecl> {
    let obj = as_object(value, path)?;
    reject_unknown_keys(
        obj,
        &["name", "output", "brick_type", "fetch", "fetch_points", "default"],
        path,
    )?;
    let name = as_str(
        obj.get("name")
            .ok_or_else(|| BriqlError::parse(path, "missing `name`"))?,
        &format!("{path}.name"),
    )?
    .to_string();
    if name.is_empty() {
        return Err(BriqlError::parse(format!("{path}.name"), "empty name"));
    }
    let output = match obj.get("output") {
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(BriqlError::parse(format!("{path}.output"), "expected a boolean")),
        None => true,
    };
    let matcher = parse_matcher(
        obj.get("brick_type")
            .ok_or_else(|| BriqlError::parse(path, "missing `brick_type`"))?,
        &format!("{path}.brick_type"),
    )?;
    let mut fetch = BTreeSet::new();
    fetch.insert(Fetch::Id);
    if let Some(f) = obj.get("fetch") {
        let arr = as_array(f, &format!("{path}.fetch"))?;
        for (i, item) in arr.iter().enumerate() {
            let p = format!("{path}.fetch[{i}]");
            fetch.insert(match as_str(item, &p)? {
                "id" => Fetch::Id,
                "pointinfo" => Fetch::PointInfo,
                "properties" => Fetch::Properties,
                "label" => Fetch::Label,
                other => {
                    return Err(BriqlError::parse(p, format!("unknown fetch attribute `{other}`")))
                }
            });
        }
    }
    let mut fetch_points = Vec::new();
    if let Some(fp) = obj.get("fetch_points") {
        let arr = as_array(fp, &format!("{path}.fetch_points"))?;
        for (i, item) in arr.iter().enumerate() {
            fetch_points.push(parse_point_filter(item, &format!("{path}.fetch_points[{i}]"))?);
        }
    }
    if !fetch_points.is_empty() && !fetch.contains(&Fetch::PointInfo) {
        return Err(BriqlError::parse(
            format!("{path}.fetch_points"),
            "fetch_points requires `pointinfo` in fetch",
        ));
    }
    let default_binding = match obj.get("default") {
        Some(v) => {
            let s = as_str(v, &format!("{path}.default"))?;
            Some(Iri::new(s).map_err(|e| BriqlError::parse(format!("{path}.default"), e.to_string()))?)
        }
        None => None,
    };
    Ok(VariableDecl {
        name,
        output,
        matcher,
        fetch,
        fetch_points,
        default_binding,
    })
}

fn parse_path(value: &Value, path: &str) -> Result<PathConstraint> {
    let obj = as_object(value, path)?;
    reject_unknown_keys(obj, &["from_ref", "properties", "to_ref"], path)?;
    let from_ref = as_str(
        obj.get("from_ref")
            .ok_or_else(|| BriqlError::parse(path, "missing `from_ref`"))?,
        &format!("{path}.from_ref"),
    )?
    .to_string();
    let to_ref = as_str(
        obj.get("to_ref")
            .ok_or_else(|| BriqlError::parse(path, "missing `to_ref`"))?,
        &format!("{path}.to_ref"),
    )?
    .to_string();
    let steps_value = as_array(
        obj.get("properties")
            .ok_or_else(|| BriqlError::parse(path, "missing `properties`"))?,
        &format!("{path}.properties"),
    )?;
    if steps_value.is_empty() {
        return Err(BriqlError::parse(
            format!("{path}.properties"),
            "path must have at least one step",
        ));
    }
    let mut steps = Vec::new();
    for (i, step) in steps_value.iter().enumerate() {
        let spath = format!("{path}.properties[{i}]");
        let sobj = as_object(step, &spath)?;
        reject_unknown_keys(sobj, &["property", "min", "max"], &spath)?;
        let property = as_str(
            sobj.get("property")
                .ok_or_else(|| BriqlError::parse(&spath, "missing `property`"))?,
            &format!("{spath}.property"),
        )?
        .to_string();
        let min = match sobj.get("min") {
            Some(v) => v
                .as_u64()
                .ok_or_else(|| BriqlError::parse(format!("{spath}.min"), "expected an integer"))?
                as u32,
            None => 1,
        };
        if min < 1 {
            return Err(BriqlError::parse(
                format!("{spath}.min"),
                "min must be at least 1",
            ));
        }
        let max = match sobj.get("max") {
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| BriqlError::parse(format!("{spath}.max"), "expected an integer"))?
                    as u32,
            ),
            None => None,
        };
        if let Some(m) = max {
            if min > m {
                return Err(BriqlError::parse(
                    format!("{spath}.max"),
                    format!("min {min} exceeds max {m}"),
                ));
            }
        }
        steps.push(PathStep { property, min, max });
    }
    Ok(PathConstraint {
        from_ref,
        steps,
        to_ref,
    })
}

/// Parses a BRIQL query document. Unknown keys anywhere are rejected;
/// every path endpoint must reference a declared variable.
pub fn parse_query(document: &str) -> Result<BriqlQuery> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| BriqlError::parse("$", format!("malformed JSON: {e}")))?;
    let obj = as_object(&value, "$")?;
    reject_unknown_keys(obj, &["variables", "query", "mode"], "$")?;

    let mode = match obj.get("mode") {
        Some(v) => match as_str(v, "$.mode")? {
            "normal" => QueryMode::Normal,
            "describe" => QueryMode::Describe,
            other => {
                return Err(BriqlError::parse("$.mode", format!("unknown mode `{other}`")))
            }
        },
        None => QueryMode::Normal,
    };

    let vars_value = as_array(
        obj.get("variables")
            .ok_or_else(|| BriqlError::parse("$", "missing `variables`"))?,
        "$.variables",
    )?;
    if vars_value.is_empty() {
        return Err(BriqlError::parse(
            "$.variables",
            "at least one variable is required",
        ));
    }
    let mut variables = Vec::new();
    for (i, v) in vars_value.iter().enumerate() {
        variables.push(parse_variable(v, &format!("$.variables[{i}]"))?);
    }
    let mut seen = BTreeSet::new();
    for v in &variables {
        if !seen.insert(v.name.clone()) {
            return Err(BriqlError::parse(
                "$.variables",
                format!("duplicate variable name `{}`", v.name),
            ));
        }
    }

    let mut paths = Vec::new();
    if let Some(query) = obj.get("query") {
        let qobj = as_object(query, "$.query")?;
        reject_unknown_keys(qobj, &["paths"], "$.query")?;
        if let Some(paths_value) = qobj.get("paths") {
            let arr = as_array(paths_value, "$.query.paths")?;
            for (i, p) in arr.iter().enumerate() {
                paths.push(parse_path(p, &format!("$.query.paths[{i}]"))?);
            }
        }
    }
    for (i, p) in paths.iter().enumerate() {
        for (role, name) in [("from_ref", &p.from_ref), ("to_ref", &p.to_ref)] {
            if !seen.contains(name) {
                return Err(BriqlError::parse(
                    format!("$.query.paths[{i}].{role}"),
                    format!("dangling reference to undeclared variable `{name}`"),
                ));
            }
        }
    }

    Ok(BriqlQuery {
        variables,
        paths,
        mode,
    })
}

// ---------------------------------------------------------------------------
// Canonical JSON form
// ---------------------------------------------------------------------------

fn literal_to_value(l: &Literal) -> Value {
    match l {
        Literal::Str(s) => Value::String(s.clone()),
        Literal::Num { value, .. } => serde_json::Number::from_f64(*value)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Literal::Bool(b) => Value::Bool(*b),
    }
}

fn matcher_to_value(m: &TypeMatcher) -> Value {
    match m {
        TypeMatcher::Exact(c) => serde_json::json!({"match": "exact", "type": c}),
        TypeMatcher::Isa(c) => serde_json::json!({"match": "isa", "type": c}),
        TypeMatcher::Tags(tags) => serde_json::json!({"match": "tags", "tags": tags}),
        TypeMatcher::Properties(props) => {
            let map: Map<String, Value> = props
                .iter()
                .map(|(k, v)| (k.clone(), literal_to_value(v)))
                .collect();
            serde_json::json!({"match": "properties", "properties": map})
        }
    }
}

/// Serializes a query to its canonical JSON form: keys sorted, no
/// insignificant whitespace, defaults written out. Canonicalization is a
/// fixpoint of `parse_query`.
pub fn query_to_canonical_json(query: &BriqlQuery) -> String {
    let variables: Vec<Value> = query
        .variables
        .iter()
        .map(|v| {
            let mut obj = Map::new();
            obj.insert("name".into(), Value::String(v.name.clone()));
            obj.insert("output".into(), Value::Bool(v.output));
            obj.insert("brick_type".into(), matcher_to_value(&v.matcher));
            obj.insert(
                "fetch".into(),
                Value::Array(
                    v.fetch
                        .iter()
                        .map(|f| Value::String(f.name().to_string()))
                        .collect(),
                ),
            );
            if !v.fetch_points.is_empty() {
                obj.insert(
                    "fetch_points".into(),
                    Value::Array(
                        v.fetch_points
                            .iter()
                            .map(|f| match f {
                                PointFilter::Tags(tags) => {
                                    serde_json::json!({"match": "tags", "tags": tags})
                                }
                                PointFilter::Isa(c) => {
                                    serde_json::json!({"match": "isa", "type": c})
                                }
                            })
                            .collect(),
                    ),
                );
            }
            if let Some(d) = &v.default_binding {
                obj.insert("default".into(), Value::String(d.to_string()));
            }
            Value::Object(obj)
        })
        .collect();

    let mut root = Map::new();
    if query.mode == QueryMode::Describe {
        root.insert("mode".into(), Value::String("describe".into()));
    }
    root.insert("variables".into(), Value::Array(variables));
    if !query.paths.is_empty() {
        let paths: Vec<Value> = query
            .paths
            .iter()
            .map(|p| {
                let steps: Vec<Value> = p
                    .steps
                    .iter()
                    .map(|s| {
                        let mut step = Map::new();
                        step.insert("property".into(), Value::String(s.property.clone()));
                        step.insert("min".into(), Value::Number(s.min.into()));
                        if let Some(m) = s.max {
                            step.insert("max".into(), Value::Number(m.into()));
                        }
                        Value::Object(step)
                    })
                    .collect();
                serde_json::json!({
                    "from_ref": p.from_ref,
                    "properties": steps,
                    "to_ref": p.to_ref,
                })
            })
            .collect();
        root.insert("query".into(), serde_json::json!({ "paths": paths }));
    }
    canonical_string(&Value::Object(root))
}

/// Compact serialization with object keys sorted.
pub(crate) fn canonical_string(value: &Value) -> String {
    fn write(value: &Value, out: &mut String) {
        match value {
            Value::Object(map) => {
                out.push('{');
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(k).unwrap());
                    out.push(':');
                    write(&map[*k], out);
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(item, out);
                }
                out.push(']');
            }
            other => out.push_str(&serde_json::to_string(other).unwrap()),
        }
    }
    let mut out = String::new();
    write(value, &mut out);
    out
}
