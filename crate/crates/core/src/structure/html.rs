//! HTML table trees, a minimal serializer and a parser for the same subset.

use crate::error::{Error, Result};
use crate::merger::{Cell, CellSet, TextItem};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    Table,
    Thead,
    Tbody,
    Tr,
    Td,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Table => "table",
            Tag::Thead => "thead",
            Tag::Tbody => "tbody",
            Tag::Tr => "tr",
            Tag::Td => "td",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "table" => Tag::Table,
            "thead" => Tag::Thead,
            "tbody" => Tag::Tbody,
            "tr" => Tag::Tr,
            "td" | "th" => Tag::Td,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HtmlNode {
    pub tag: Tag,
    pub rowspan: usize,
    pub colspan: usize,
    pub content: Option<String>,
    pub children: Vec<HtmlNode>,
}

impl HtmlNode {
    pub fn new(tag: Tag) -> Self {
        Self {
            tag,
            rowspan: 1,
            colspan: 1,
            content: None,
            children: Vec::new(),
        }
    }

    pub fn td(rowspan: usize, colspan: usize, content: Option<&str>) -> Self {
        Self {
            rowspan,
            colspan,
            content: content.map(str::to_string),
            ..Self::new(Tag::Td)
        }
    }

    pub fn with_children(mut self, children: Vec<HtmlNode>) -> Self {
        self.children = children;
        self
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(HtmlNode::size).sum::<usize>()
    }
}

/// An ordered table tree; `root` is `None` for the empty tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HtmlTree {
    pub root: Option<HtmlNode>,
}

impl HtmlTree {
    pub fn empty() -> Self {
        Self { root: None }
    }

    pub fn size(&self) -> usize {
        self.root.as_ref().map_or(0, HtmlNode::size)
    }

    /// Drops `thead`/`tbody` wrappers so only `table`, `tr` and `td` remain.
    pub fn normalized(&self) -> Self {
        fn flatten(node: &HtmlNode) -> Vec<HtmlNode> {
            let children: Vec<HtmlNode> = node.children.iter().flat_map(flatten).collect();
            match node.tag {
                Tag::Thead | Tag::Tbody => children,
                _ => vec![HtmlNode { children, ..node.clone() }],
            }
        }
        Self {
            root: self.root.as_ref().and_then(|r| flatten(r).into_iter().next()),
        }
    }

    pub fn to_html(&self) -> String {
        fn emit(node: &HtmlNode, out: &mut String) {
            let name = node.tag.name();
            out.push('<');
            out.push_str(name);
            if node.colspan != 1 {
                let _ = write!(out, " colspan=\"{}\"", node.colspan);
            }
            if node.rowspan != 1 {
                let _ = write!(out, " rowspan=\"{}\"", node.rowspan);
            }
            out.push('>');
            if let Some(c) = &node.content {
                out.push_str(&escape(c));
            }
            for ch in &node.children {
                emit(ch, out);
            }
            let _ = write!(out, "</{name}>");
        }
        let mut s = String::new();
        if let Some(r) = &self.root {
            emit(r, &mut s);
        }
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(p) = rest.find('&') {
        out.push_str(&rest[..p]);
        let end = rest[p..]
            .find(';')
            .ok_or_else(|| Error::Format(format!("unterminated entity in `{s}`")))?;
        let ent = &rest[p + 1..p + end];
        out.push(match ent {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" | "#39" => '\'',
            _ => {
                let code = ent
                    .strip_prefix("#x")
                    .map(|h| u32::from_str_radix(h, 16))
                    .or_else(|| ent.strip_prefix('#').map(str::parse))
                    .and_then(|r| r.ok())
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::Format(format!("unknown entity `&{ent};`")))?;
                code
            }
        });
        rest = &rest[p + end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Parses the `table/thead/tbody/tr/td/th` subset emitted by
/// [`HtmlTree::to_html`]. Text outside cells is ignored when it is
/// whitespace and rejected otherwise.
pub fn parse_html(src: &str) -> Result<HtmlTree> {
    let mut stack: Vec<HtmlNode> = Vec::new();
    let mut root = None;
    let mut rest = src;
    while !rest.is_empty() {
        let Some(lt) = rest.find('<') else {
            text_into(&mut stack, rest)?;
            break;
        };
        text_into(&mut stack, &rest[..lt])?;
        let gt = rest[lt..].find('>').ok_or_else(|| Error::Format("unterminated tag".into()))?;
        let inner = rest[lt + 1..lt + gt].trim();
        rest = &rest[lt + gt + 1..];
        if let Some(name) = inner.strip_prefix('/') {
            let tag = Tag::parse(name.trim().to_ascii_lowercase().as_str())
                .ok_or_else(|| Error::Format(format!("unsupported tag `</{name}>`")))?;
            let node = stack
                .pop()
                .filter(|n| n.tag == tag)
                .ok_or_else(|| Error::Format(format!("unbalanced `</{name}>`")))?;
            match stack.last_mut() {
                Some(parent) => parent.children.push(node),
                None if root.is_none() => root = Some(node),
                None => return Err(Error::Format("more than one root element".into())),
            }
            continue;
        }
        let mut parts = inner.split_whitespace();
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let tag = Tag::parse(&name).ok_or_else(|| Error::Format(format!("unsupported tag `<{name}>`")))?;
        let mut node = HtmlNode::new(tag);
        let attrs = inner[name.len()..].trim();
        for attr in attrs.split_whitespace() {
            let Some((k, v)) = attr.split_once('=') else { continue };
            let v = v.trim_matches(|c| c == '"' || c == '\'');
            let parse = |v: &str| -> Result<usize> {
                v.parse()
                    .ok()
                    .filter(|&n: &usize| n >= 1)
                    .ok_or_else(|| Error::Format(format!("bad span `{attr}`")))
            };
            match k.to_ascii_lowercase().as_str() {
                "rowspan" => node.rowspan = parse(v)?,
                "colspan" => node.colspan = parse(v)?,
                _ => {}
            }
        }
        if stack.last().is_some_and(|p| p.tag == Tag::Td) {
            return Err(Error::Format("elements nested inside a cell".into()));
        }
        stack.push(node);
    }
    if let Some(open) = stack.last() {
        return Err(Error::Format(format!("unclosed `<{}>`", open.tag.name())));
    }
    Ok(HtmlTree { root })
}

fn text_into(stack: &mut [HtmlNode], text: &str) -> Result<()> {
    match stack.last_mut() {
        Some(n) if n.tag == Tag::Td => {
            let t = unescape(text)?;
            if !t.is_empty() {
                n.content.get_or_insert_with(String::new).push_str(&t);
            }
            Ok(())
        }
        _ if text.trim().is_empty() => Ok(()),
        _ => Err(Error::Format(format!("text `{}` outside a cell", text.trim()))),
    }
}

/// `table → tr per grid row → td per cell starting in that row`, ordered by
/// first column. Blank cells become empty `td`s.
pub fn to_html_tree(cells: &CellSet) -> Result<HtmlTree> {
    cells.slot_owners()?;
    let mut rows: Vec<Vec<&Cell>> = vec![Vec::new(); cells.m];
    for c in &cells.cells {
        rows[c.row_start].push(c);
    }
    let trs = rows
        .into_iter()
        .map(|mut row| {
            row.sort_by_key(|c| c.col_start);
            HtmlNode::new(Tag::Tr).with_children(
                row.into_iter()
                    .map(|c| {
                        let text = c.text();
                        HtmlNode::td(c.rowspan(), c.colspan(), (!c.is_blank()).then_some(text.as_str()))
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(HtmlTree {
        root: Some(HtmlNode::new(Tag::Table).with_children(trs)),
    })
}

/// Recovers cells from a table tree by slot occupancy. Cells get no quads;
/// each non-empty `td` gets one content item with id `html{k}`.
pub fn cells_from_html(tree: &HtmlTree) -> Result<CellSet> {
    let tree = tree.normalized();
    let root = tree.root.ok_or_else(|| Error::Missing("table element".into()))?;
    if root.tag != Tag::Table {
        return Err(Error::Format(format!("root is `<{}>`, not `<table>`", root.tag.name())));
    }
    let mut occupied: Vec<Vec<bool>> = Vec::new();
    let mut cells = Vec::new();
    let m = root.children.len();
    for (r, tr) in root.children.iter().enumerate() {
        if tr.tag != Tag::Tr {
            return Err(Error::Format(format!("`<{}>` directly inside the table", tr.tag.name())));
        }
        let mut c = 0;
        for td in &tr.children {
            if td.tag != Tag::Td {
                return Err(Error::Format(format!("`<{}>` inside a row", td.tag.name())));
            }
            while occupied.get(r).and_then(|row| row.get(c)).copied().unwrap_or(false) {
                c += 1;
            }
            if r + td.rowspan > m {
                return Err(Error::Validation(format!("cell at row {r} spans past the last row")));
            }
            for rr in r..r + td.rowspan {
                if occupied.len() <= rr {
                    occupied.resize(rr + 1, Vec::new());
                }
                let row = &mut occupied[rr];
                if row.len() < c + td.colspan {
                    row.resize(c + td.colspan, false);
                }
                for cc in c..c + td.colspan {
                    if row[cc] {
                        return Err(Error::Overlap(format!("spans collide at ({rr}, {cc})")));
                    }
                    row[cc] = true;
                }
            }
            let k = cells.len();
            cells.push(Cell {
                row_start: r,
                row_end: r + td.rowspan - 1,
                col_start: c,
                col_end: c + td.colspan - 1,
                quad: None,
                content: td
                    .content
                    .as_ref()
                    .map(|t| TextItem {
                        id: format!("html{k}"),
                        text: Some(t.clone()),
                    })
                    .into_iter()
                    .collect(),
            });
            c += td.colspan;
        }
    }
    let n = occupied.iter().map(Vec::len).max().unwrap_or(0);
    let set = CellSet { m, n, cells };
    set.slot_owners()?;
    Ok(set)
}
