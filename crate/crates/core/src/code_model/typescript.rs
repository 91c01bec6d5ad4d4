//! Tree-sitter frontend for TypeScript and the TypeScript-compatible subset of ArkTS.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use tree_sitter::{Node, Parser, Tree};

use super::{Frontend, Language, MetadataSet, ModelError, ParameterField};

const FUNCTION_KINDS: &[&str] = &[
    "function_declaration",
    "generator_function_declaration",
    "function_signature",
    "method_definition",
    "method_signature",
    "abstract_method_signature",
];

/// Kinds whose bodies belong to another function and are not walked for behavior.
const NESTED_SCOPES: &[&str] = &[
    "function_declaration",
    "generator_function_declaration",
    "function_expression",
    "arrow_function",
    "method_definition",
    "class_declaration",
    "class",
];

#[derive(Debug, Clone, Copy, Default)]
pub struct TypeScriptFrontend;

impl TypeScriptFrontend {
    fn parse(&self, source: &str) -> Option<Tree> {
        let mut parser = Parser::new();
        parser
            .set_language(&tree_sitter_typescript::LANGUAGE_TYPESCRIPT.into())
            .expect("bundled grammar matches the tree-sitter ABI");
        parser.parse(source, None)
    }

    fn parse_clean(&self, source: &str, file_path: &str) -> Result<Tree, ModelError> {
        match self.parse(source) {
            Some(tree) if !tree.root_node().has_error() => Ok(tree),
            Some(tree) => Err(ModelError::ParseFailure {
                file_path: file_path.to_string(),
                reason: first_error(tree.root_node()),
            }),
            None => Err(ModelError::ParseFailure {
                file_path: file_path.to_string(),
                reason: "parser produced no tree".into(),
            }),
        }
    }
}

impl Frontend for TypeScriptFrontend {
    fn name(&self) -> &str {
        "tree-sitter-typescript"
    }

    fn supports(&self, language: Language) -> bool {
        matches!(language, Language::Typescript | Language::Arkts)
    }

    fn model(&self, source: &str, file_path: &str) -> Result<MetadataSet, ModelError> {
        let tree = self.parse_clean(source, file_path)?;
        let root = tree.root_node();
        let src = source.as_bytes();
        let func = find_function(root).ok_or_else(|| ModelError::ParseFailure {
            file_path: file_path.to_string(),
            reason: "no function found".into(),
        })?;

        let mut meta = MetadataSet::new(func.name(src), file_path);
        meta.parameters = Some(
            func.params
                .map(|p| parameters(p, src))
                .unwrap_or_default(),
        );
        meta.return_type = Some(
            func.node
                .child_by_field_name("return_type")
                .map(|t| strip_annotation(text(t, src)))
                .unwrap_or_default(),
        );
        meta.package_module = Some(package_module(root, func.node, src, file_path));
        meta.dependency = Some(imports(root, src));

        let locals = func.locals(src);
        let (skeleton, io, modified) = match func.body {
            Some(body) if body.kind() == "statement_block" => (
                skeleton_of(body, src),
                io_behavior(body, src),
                modified_variables(body, src, &locals),
            ),
            // expression-bodied arrow functions return their expression
            Some(body) => (
                "return statement".to_string(),
                io_behavior(body, src),
                modified_variables(body, src, &locals),
            ),
            None => Default::default(),
        };
        meta.control_flow_skeleton = Some(skeleton);
        meta.io_behavior = Some(io);
        meta.variable_modification = Some(modified);

        if let Some(doc) = doc_comment(func.anchor, src) {
            meta.dmt = doc_tags(doc);
        }
        Ok(meta)
    }

    fn control_flow_skeleton(&self, source: &str) -> Result<String, ModelError> {
        if source.trim().is_empty() {
            return Ok(String::new());
        }
        let tree = match self.parse_clean(source, "<snippet>") {
            Ok(tree) => tree,
            Err(first) => {
                // bare statement lists (e.g. `return x;` mixed with `await`) parse inside a function
                let wrapped = format!("async function __body__() {{\n{source}\n}}");
                let Ok(tree) = self.parse_clean(&wrapped, "<snippet>") else {
                    return Err(first);
                };
                let func = find_function(tree.root_node()).and_then(|f| f.body);
                return Ok(func
                    .map(|b| skeleton_of(b, wrapped.as_bytes()))
                    .unwrap_or_default());
            }
        };
        let root = tree.root_node();
        let src = source.as_bytes();
        Ok(match find_function(root) {
            Some(f) => match f.body {
                Some(b) if b.kind() == "statement_block" => skeleton_of(b, src),
                Some(_) => "return statement".into(),
                None => String::new(),
            },
            None => skeleton_of(root, src),
        })
    }
}

struct FoundFunction<'t> {
    node: Node<'t>,
    /// Node the doc comment is attached to (export/declaration wrapper when present).
    anchor: Node<'t>,
    name_node: Option<Node<'t>>,
    params: Option<Node<'t>>,
    body: Option<Node<'t>>,
}

impl<'t> FoundFunction<'t> {
    fn name(&self, src: &[u8]) -> String {
        self.name_node
            .map(|n| text(n, src).to_string())
            .unwrap_or_else(|| "anonymous".into())
    }

    fn locals(&self, src: &[u8]) -> HashSet<String> {
        let mut out = HashSet::new();
        if let Some(p) = self.params {
            for param in named_children(p) {
                if let Some(pat) = param.child_by_field_name("pattern") {
                    collect_identifiers(pat, src, &mut out);
                } else if param.kind() == "identifier" {
                    out.insert(text(param, src).to_string());
                }
            }
        }
        if let Some(body) = self.body {
            walk(body, &mut |n| {
                if n.kind() == "variable_declarator" {
                    if let Some(name) = n.child_by_field_name("name") {
                        collect_identifiers(name, src, &mut out);
                    }
                }
                if matches!(n.kind(), "for_in_statement" | "catch_clause") {
                    let field = if n.kind() == "catch_clause" { "parameter" } else { "left" };
                    if let Some(l) = n.child_by_field_name(field) {
                        collect_identifiers(l, src, &mut out);
                    }
                }
                true
            });
        }
        out
    }
}

fn find_function(root: Node<'_>) -> Option<FoundFunction<'_>> {
    let mut found = None;
    walk(root, &mut |n| {
        if found.is_some() {
            return false;
        }
        if FUNCTION_KINDS.contains(&n.kind()) {
            found = Some(FoundFunction {
                node: n,
                anchor: anchor_of(n),
                name_node: n.child_by_field_name("name"),
                params: n.child_by_field_name("parameters"),
                body: n.child_by_field_name("body"),
            });
            return false;
        }
        if n.kind() == "variable_declarator" {
            if let Some(value) = n.child_by_field_name("value") {
                if matches!(value.kind(), "arrow_function" | "function_expression") {
                    let params = value
                        .child_by_field_name("parameters")
                        .or_else(|| value.child_by_field_name("parameter"));
                    found = Some(FoundFunction {
                        node: value,
                        anchor: anchor_of(n),
                        name_node: n.child_by_field_name("name"),
                        params,
                        body: value.child_by_field_name("body"),
                    });
                    return false;
                }
            }
        }
        true
    });
    found
}

fn anchor_of(node: Node<'_>) -> Node<'_> {
    let mut anchor = node;
    while let Some(parent) = anchor.parent() {
        if matches!(
            parent.kind(),
            "export_statement" | "ambient_declaration" | "lexical_declaration" | "variable_declaration"
        ) {
            anchor = parent;
        } else {
            break;
        }
    }
    anchor
}

fn parameters(params: Node<'_>, src: &[u8]) -> Vec<ParameterField> {
    // `x => ...` has a bare identifier instead of formal_parameters
    if params.kind() == "identifier" {
        return vec![ParameterField::new(text(params, src))];
    }
    named_children(params)
        .into_iter()
        .filter(|p| matches!(p.kind(), "required_parameter" | "optional_parameter"))
        .map(|p| {
            let pattern = p.child_by_field_name("pattern");
            let mut ty = p
                .child_by_field_name("type")
                .map(|t| strip_annotation(text(t, src)));
            if p.kind() == "optional_parameter" {
                ty = ty.map(|t| format!("?{t}"));
            }
            let name = match pattern {
                Some(pat) if pat.kind() == "identifier" => text(pat, src).to_string(),
                Some(pat) if pat.kind() == "rest_pattern" => text(pat, src).to_string(),
                Some(pat) if ty.is_none() => text(pat, src).to_string(),
                Some(pat) if pat.kind() == "this" => "this".into(),
                _ => String::new(),
            };
            ParameterField {
                name,
                type_annotation: ty,
                default_value: p
                    .child_by_field_name("value")
                    .map(|v| text(v, src).to_string()),
            }
        })
        .collect()
}

fn package_module(root: Node<'_>, func: Node<'_>, src: &[u8], file_path: &str) -> String {
    let mut tagged = None;
    walk(root, &mut |n| {
        if tagged.is_none() && n.kind() == "comment" {
            if let Some(m) = doc_tags(text(n, src)).remove("@module") {
                tagged = Some(m);
            }
        }
        tagged.is_none()
    });
    if let Some(m) = tagged {
        return m;
    }

    let mut namespaces = Vec::new();
    let mut cursor = func.parent();
    while let Some(n) = cursor {
        match n.kind() {
            "module" => {
                if let Some(name) = n.child_by_field_name("name") {
                    return normalize_module(unquote(text(name, src)));
                }
            }
            "internal_module" => {
                if let Some(name) = n.child_by_field_name("name") {
                    namespaces.push(text(name, src).to_string());
                }
            }
            _ => {}
        }
        cursor = n.parent();
    }
    if !namespaces.is_empty() {
        namespaces.reverse();
        return namespaces.join(".");
    }

    // HarmonyOS declaration files are named after their module, e.g. `@ohos.battery.d.ts`
    let file = Path::new(file_path)
        .file_name()
        .and_then(|f| f.to_str())
        .unwrap_or_default();
    if let Some(rest) = file.strip_prefix('@') {
        let stem = [".d.ts", ".d.ets", ".ts", ".ets"]
            .iter()
            .find_map(|ext| rest.strip_suffix(ext))
            .unwrap_or(rest);
        return stem.to_string();
    }
    String::new()
}

/// `@ohos.battery` style specifiers drop the leading `@`; scoped npm paths are kept.
fn normalize_module(spec: &str) -> String {
    match spec.strip_prefix('@') {
        Some(rest) if !rest.contains('/') => rest.to_string(),
        _ => spec.to_string(),
    }
}

fn imports(root: Node<'_>, src: &[u8]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for stmt in named_children(root) {
        if stmt.kind() == "import_statement" {
            if let Some(source) = stmt.child_by_field_name("source") {
                let dep = normalize_module(unquote(text(source, src)));
                if !out.contains(&dep) {
                    out.push(dep);
                }
            }
        }
    }
    out
}

fn skeleton_of(body: Node<'_>, src: &[u8]) -> String {
    let mut labels: Vec<&'static str> = Vec::new();
    let mut push = |l: &'static str| {
        if !labels.contains(&l) {
            labels.push(l);
        }
    };
    walk_children(body, &mut |n| {
        let label = match n.kind() {
            "if_statement" => Some("conditional"),
            "for_statement" | "for_in_statement" | "while_statement" | "do_statement" => {
                Some("loop")
            }
            "try_statement" => Some("try"),
            "switch_statement" => Some("switch"),
            "return_statement" => Some("return statement"),
            "call_expression" if is_callback_registration(n, src) => Some("callback registration"),
            _ => None,
        };
        if let Some(l) = label {
            push(l);
        }
        !NESTED_SCOPES.contains(&n.kind())
    });
    labels.join("; ")
}

fn callee_name<'s>(call: Node<'_>, src: &'s [u8]) -> Option<(Option<&'s str>, &'s str)> {
    let f = call.child_by_field_name("function")?;
    match f.kind() {
        "identifier" => Some((None, text(f, src))),
        "member_expression" => {
            let prop = f.child_by_field_name("property")?;
            let object = f.child_by_field_name("object").map(|o| text(o, src));
            Some((object, text(prop, src)))
        }
        _ => None,
    }
}

fn is_callback_registration(call: Node<'_>, src: &[u8]) -> bool {
    let Some((_, name)) = callee_name(call, src) else {
        return false;
    };
    let lower = name.to_ascii_lowercase();
    let registering = matches!(
        lower.as_str(),
        "on" | "once" | "subscribe" | "addeventlistener" | "addlistener" | "listen"
    ) || lower.starts_with("register")
        || lower.starts_with("on") && name.chars().nth(2).is_some_and(char::is_uppercase);
    registering
        && call
            .child_by_field_name("arguments")
            .is_some_and(|args| args.named_child_count() > 0)
}

fn io_behavior(body: Node<'_>, src: &[u8]) -> String {
    let mut labels: Vec<&'static str> = Vec::new();
    walk(body, &mut |n| {
        if n.kind() == "call_expression" {
            if let Some((object, name)) = callee_name(n, src) {
                if let Some(l) = io_family(object, name) {
                    if !labels.contains(&l) {
                        labels.push(l);
                    }
                }
            }
        }
        true
    });
    labels.join("; ")
}

fn io_family(object: Option<&str>, name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    if matches!(object, Some("console" | "hilog")) || lower.starts_with("print") {
        return Some("print");
    }
    if lower.starts_with("read") {
        Some("read")
    } else if lower.starts_with("write")
        || lower.starts_with("append")
        || lower.starts_with("save")
        || lower.starts_with("flush")
    {
        Some("write")
    } else if lower.starts_with("open") || lower.starts_with("close") {
        Some("open")
    } else {
        None
    }
}

fn modified_variables(body: Node<'_>, src: &[u8], locals: &HashSet<String>) -> String {
    let mut names: Vec<String> = Vec::new();
    walk_children(body, &mut |n| {
        let target = match n.kind() {
            "assignment_expression" | "augmented_assignment_expression" => {
                n.child_by_field_name("left")
            }
            "update_expression" => n.child_by_field_name("argument"),
            _ => None,
        };
        if let Some(t) = target {
            let root = root_object(t);
            let non_local = match root.kind() {
                "this" => true,
                "identifier" => !locals.contains(text(root, src)),
                _ => false,
            };
            let name = text(t, src).to_string();
            if non_local && !names.contains(&name) {
                names.push(name);
            }
        }
        !NESTED_SCOPES.contains(&n.kind())
    });
    names.join(", ")
}

fn root_object(mut n: Node<'_>) -> Node<'_> {
    while matches!(n.kind(), "member_expression" | "subscript_expression") {
        match n.child_by_field_name("object") {
            Some(o) => n = o,
            None => break,
        }
    }
    n
}

fn doc_comment<'s>(anchor: Node<'_>, src: &'s [u8]) -> Option<&'s str> {
    let prev = anchor.prev_named_sibling()?;
    let t = text(prev, src);
    (prev.kind() == "comment" && t.starts_with("/**")).then_some(t)
}

/// Block tags of a JSDoc comment. Bare tags map to `"true"`; repeated tags are joined by `"; "`.
pub(crate) fn doc_tags(comment: &str) -> BTreeMap<String, String> {
    let body = comment
        .trim()
        .trim_start_matches("/**")
        .trim_start_matches("/*")
        .trim_end_matches("*/");
    let mut tags: Vec<(String, String)> = Vec::new();
    for line in body.lines() {
        let line = line.trim().trim_start_matches('*').trim();
        if let Some(rest) = line.strip_prefix('@') {
            let (name, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            tags.push((format!("@{name}"), value.trim().to_string()));
        } else if let Some((_, value)) = tags.last_mut() {
            if !line.is_empty() {
                if !value.is_empty() {
                    value.push(' ');
                }
                value.push_str(line);
            }
        }
    }
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    for (name, value) in tags {
        let value = if value.is_empty() { "true".to_string() } else { value };
        out.entry(name)
            .and_modify(|v| {
                v.push_str("; ");
                v.push_str(&value);
            })
            .or_insert(value);
    }
    out
}

fn walk<'t>(node: Node<'t>, visit: &mut impl FnMut(Node<'t>) -> bool) {
    if visit(node) {
        walk_children(node, visit);
    }
}

fn walk_children<'t>(node: Node<'t>, visit: &mut impl FnMut(Node<'t>) -> bool) {
    for child in named_children(node) {
        walk(child, visit);
    }
}

fn named_children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

fn collect_identifiers(node: Node<'_>, src: &[u8], out: &mut HashSet<String>) {
    walk(node, &mut |n| {
        if matches!(n.kind(), "identifier" | "shorthand_property_identifier_pattern") {
            out.insert(text(n, src).to_string());
        }
        // type names are not bindings
        !matches!(n.kind(), "type_annotation")
    });
}

fn text<'s>(node: Node<'_>, src: &'s [u8]) -> &'s str {
    node.utf8_text(src).unwrap_or_default()
}

fn strip_annotation(t: &str) -> String {
    t.trim_start_matches(':').trim().to_string()
}

fn unquote(s: &str) -> &str {
    s.trim_matches(|c| c == '\'' || c == '"' || c == '`')
}

fn first_error(root: Node<'_>) -> String {
    let mut found = None;
    walk(root, &mut |n| {
        if found.is_none() && (n.is_error() || n.is_missing()) {
            let p = n.start_position();
            found = Some(format!("syntax error at line {}, column {}", p.row + 1, p.column + 1));
        }
        found.is_none()
    });
    found.unwrap_or_else(|| "syntax error".into())
}
