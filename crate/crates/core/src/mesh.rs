//! MeSH descriptor and qualifier files to the canonical vocabulary format.
//!
//! Both the ASCII (`*NEWRECORD`, `KEY = value`) and XML distributions are
//! read; the format is detected from the first non-blank byte. A descriptor's
//! parents are the descriptors owning each of its tree numbers with the last
//! segment removed.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::vocab::{write_vocabulary_records, Qualifier, QualifierId, Term, TermId};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeshDescriptor {
    pub ui: String,
    pub name: String,
    pub tree_numbers: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Ascii,
    Xml,
}

/// Skips leading whitespace and a UTF-8 byte order mark, then peeks.
fn detect<R: BufRead>(reader: &mut R) -> Result<Option<Format>> {
    loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            return Ok(None);
        }
        let skip = buf
            .iter()
            .take_while(|b| b.is_ascii_whitespace() || matches!(b, 0xEF | 0xBB | 0xBF))
            .count();
        if skip < buf.len() {
            let fmt = if buf[skip] == b'<' {
                Format::Xml
            } else {
                Format::Ascii
            };
            reader.consume(skip);
            return Ok(Some(fmt));
        }
        reader.consume(skip);
    }
}

type Record = Vec<(String, String)>;

fn ascii_records<R: BufRead>(reader: R) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    let mut current: Option<Record> = None;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line == "*NEWRECORD" {
            records.extend(current.replace(Vec::new()));
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(" = ") else {
            return Err(Error::Malformed {
                line: n + 1,
                message: format!("expected `KEY = value`, found `{line}`"),
            });
        };
        match current.as_mut() {
            Some(rec) => rec.push((key.trim().to_string(), value.trim().to_string())),
            None => {
                return Err(Error::Malformed {
                    line: n + 1,
                    message: "field before the first *NEWRECORD".into(),
                })
            }
        }
    }
    records.extend(current);
    Ok(records)
}

fn field<'a>(rec: &'a Record, key: &str) -> Option<&'a str> {
    rec.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Element-path driven XML walk: `on_text` sees the open element stack and
/// the text, `on_close` the stack just before an element closes.
fn walk_xml<R: BufRead>(
    reader: R,
    mut on_text: impl FnMut(&[String], String),
    mut on_close: impl FnMut(&[String]) -> Result<()>,
) -> Result<()> {
    let mut xml = Reader::from_reader(reader);
    xml.config_mut().trim_text(true);
    let mut stack: Vec<String> = Vec::new();
    let mut buf = Vec::new();
    let bad = |e: &dyn std::fmt::Display| Error::MeshSource(e.to_string());
    loop {
        match xml.read_event_into(&mut buf).map_err(|e| bad(&e))? {
            Event::Start(e) => stack.push(String::from_utf8_lossy(e.name().as_ref()).into_owned()),
            Event::End(_) => {
                on_close(&stack)?;
                stack.pop();
            }
            Event::Text(t) => on_text(&stack, t.unescape().map_err(|e| bad(&e))?.into_owned()),
            Event::CData(t) => on_text(&stack, String::from_utf8_lossy(&t).into_owned()),
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(Error::MeshSource(format!(
            "unclosed element `{}`",
            stack.join("/")
        )));
    }
    Ok(())
}

fn ends_with(stack: &[String], suffix: &[&str]) -> bool {
    stack.len() >= suffix.len()
        && stack[stack.len() - suffix.len()..]
            .iter()
            .zip(suffix)
            .all(|(a, b)| a == b)
}

fn xml_descriptors<R: BufRead>(reader: R) -> Result<Vec<MeshDescriptor>> {
    let mut out = Vec::new();
    let current = std::cell::RefCell::new(MeshDescriptor::default());
    walk_xml(
        reader,
        |stack, text| {
            let mut c = current.borrow_mut();
            // Referenced descriptors and qualifiers nest deeper, so match exact parents.
            if ends_with(stack, &["DescriptorRecord", "DescriptorUI"]) {
                c.ui = text;
            } else if ends_with(stack, &["DescriptorRecord", "DescriptorName", "String"]) {
                c.name = text;
            } else if ends_with(stack, &["DescriptorRecord", "TreeNumberList", "TreeNumber"]) {
                c.tree_numbers.push(text);
            }
        },
        |stack| {
            if stack.last().map(String::as_str) == Some("DescriptorRecord") {
                let d = current.take();
                if d.ui.is_empty() {
                    return Err(Error::MeshSource(
                        "descriptor record without DescriptorUI".into(),
                    ));
                }
                out.push(d);
            }
            Ok(())
        },
    )?;
    Ok(out)
}

fn xml_qualifiers<R: BufRead>(reader: R) -> Result<Vec<Qualifier>> {
    let mut out = Vec::new();
    let current = std::cell::RefCell::new((String::new(), String::new()));
    walk_xml(
        reader,
        |stack, text| {
            let mut c = current.borrow_mut();
            if ends_with(stack, &["QualifierRecord", "QualifierUI"]) {
                c.0 = text;
            } else if ends_with(stack, &["QualifierRecord", "QualifierName", "String"]) {
                c.1 = text;
            }
        },
        |stack| {
            if stack.last().map(String::as_str) == Some("QualifierRecord") {
                let (ui, name) = current.take();
                out.push(qualifier(ui, name)?);
            }
            Ok(())
        },
    )?;
    Ok(out)
}

fn qualifier(ui: String, name: String) -> Result<Qualifier> {
    let id = QualifierId::new(ui)
        .map_err(|_| Error::MeshSource("qualifier record without UI".into()))?;
    Ok(Qualifier { id, label: name })
}

pub fn parse_descriptors<R: BufRead>(mut reader: R) -> Result<Vec<MeshDescriptor>> {
    match detect(&mut reader)? {
        None => Ok(Vec::new()),
        Some(Format::Xml) => xml_descriptors(reader),
        Some(Format::Ascii) => ascii_records(reader)?
            .into_iter()
            .map(|rec| {
                let ui = field(&rec, "UI")
                    .ok_or_else(|| Error::MeshSource("descriptor record without UI".into()))?;
                Ok(MeshDescriptor {
                    ui: ui.to_string(),
                    name: field(&rec, "MH").unwrap_or_default().to_string(),
                    tree_numbers: rec
                        .iter()
                        .filter(|(k, _)| k == "MN")
                        .map(|(_, v)| v.clone())
                        .collect(),
                })
            })
            .collect(),
    }
}

pub fn parse_qualifiers<R: BufRead>(mut reader: R) -> Result<Vec<Qualifier>> {
    match detect(&mut reader)? {
        None => Ok(Vec::new()),
        Some(Format::Xml) => xml_qualifiers(reader),
        Some(Format::Ascii) => ascii_records(reader)?
            .into_iter()
            .map(|rec| {
                qualifier(
                    field(&rec, "UI").unwrap_or_default().to_string(),
                    field(&rec, "SH").unwrap_or_default().to_string(),
                )
            })
            .collect(),
    }
}

/// Resolves tree numbers into parent links. Tree numbers without a dot are
/// roots and contribute no parent.
pub fn descriptors_to_terms(descriptors: &[MeshDescriptor]) -> Result<Vec<Term>> {
    let mut owner: HashMap<&str, &str> = HashMap::new();
    for d in descriptors {
        for tn in &d.tree_numbers {
            if let Some(prev) = owner.insert(tn.as_str(), d.ui.as_str()) {
                if prev != d.ui {
                    return Err(Error::MeshSource(format!(
                        "tree number `{tn}` owned by both `{prev}` and `{}`",
                        d.ui
                    )));
                }
            }
        }
    }
    descriptors
        .iter()
        .map(|d| {
            let mut parents = BTreeSet::new();
            for tn in &d.tree_numbers {
                let Some((prefix, _)) = tn.rsplit_once('.') else {
                    continue;
                };
                let parent = owner
                    .get(prefix)
                    .ok_or_else(|| Error::UnresolvableTreeNumber {
                        descriptor: d.ui.clone(),
                        tree_number: tn.clone(),
                    })?;
                if *parent != d.ui {
                    parents.insert(TermId::new(*parent)?);
                }
            }
            Ok(Term {
                id: TermId::new(d.ui.as_str())
                    .map_err(|_| Error::MeshSource("empty descriptor UI".into()))?,
                label: d.name.clone(),
                parents,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ConversionSummary {
    pub descriptors: usize,
    pub qualifiers: usize,
    pub edges: usize,
}

/// Reads descriptors (and optionally qualifiers) and writes canonical JSONL.
pub fn convert_mesh<D: BufRead, Q: BufRead, W: Write>(
    descriptors: D,
    qualifiers: Option<Q>,
    out: W,
) -> Result<ConversionSummary> {
    let descs = parse_descriptors(descriptors)?;
    let mut terms = descriptors_to_terms(&descs)?;
    terms.sort_by(|a, b| a.id.cmp(&b.id));
    let mut quals = match qualifiers {
        Some(q) => parse_qualifiers(q)?,
        None => Vec::new(),
    };
    quals.sort_by(|a, b| a.id.cmp(&b.id));
    write_vocabulary_records(&terms, &quals, out)?;
    Ok(ConversionSummary {
        descriptors: terms.len(),
        qualifiers: quals.len(),
        edges: terms.iter().map(|t| t.parents.len()).sum(),
    })
}
