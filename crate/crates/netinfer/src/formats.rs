//! Text file formats.
//!
//! * Cascades, SNAP style: an optional node section of `<id>,<name>` lines,
//!   one blank line, then one cascade per line as `node,time;node,time;...`.
//!   A time of `inf` marks a node that was never infected. Without a blank
//!   line every non-empty line is a cascade.
//! * Cascades, TSV: `cascade_id<TAB>node<TAB>time` records.
//! * Edge lists: `u<TAB>v` per line.
//! * Partitions: `node<TAB>community` per line.
//! * Inferred edges: `u<TAB>v<TAB>score` in rank order after an optional
//!   `# K=<K> mode=<directed|undirected>` header.
//!
//! External node ids are arbitrary non-negative integers. They are mapped
//! to dense ids through an [`IdMap`] that is kept so output can be written
//! back with the original ids.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use netinfer_core::cascade::{Cascade, CascadeSet, IdMap, NodeId};
use netinfer_core::graph::{CommunityPartition, Graph};
use netinfer_core::inference::{Directedness, InferredGraph, ScoredEdge};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CascadeFormat {
    #[default]
    Snap,
    Tsv,
}

impl FromStr for CascadeFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "snap" => Ok(CascadeFormat::Snap),
            "tsv" => Ok(CascadeFormat::Tsv),
            other => Err(format!("unknown cascade format `{other}` (expected snap or tsv)")),
        }
    }
}

/// A parsed cascade file: the cascades plus any node names from the header
/// section, keyed by dense id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CascadeFile {
    pub cascades: CascadeSet,
    pub names: Vec<(NodeId, String)>,
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct LineCtx<'a> {
    path: &'a Path,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: PathBuf::from(self.path),
            line: self.line,
            message: message.into(),
        }
    }

    fn node(&self, field: &str) -> Result<u64> {
        field
            .trim()
            .parse::<u64>()
            .map_err(|_| self.err(format!("invalid node id `{}`", field.trim())))
    }

    fn time(&self, field: &str) -> Result<f64> {
        let field = field.trim();
        let t = match field {
            "inf" | "+inf" | "Inf" | "INF" => f64::INFINITY,
            _ => field
                .parse::<f64>()
                .map_err(|_| self.err(format!("invalid time `{field}`")))?,
        };
        if t.is_nan() || t < 0.0 {
            return Err(self.err(format!("negative or invalid time `{field}`")));
        }
        Ok(t)
    }

    fn cascade(&self, entries: Vec<(NodeId, f64)>, ids: &IdMap) -> Result<Cascade> {
        Cascade::new(entries).map_err(|e| match e {
            netinfer_core::Error::DuplicateNode(n) => self.err(format!(
                "node {} appears twice in one cascade",
                ids.external(n)
            )),
            other => self.err(other.to_string()),
        })
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses cascade text in the given format.
pub fn parse_cascades_str(text: &str, format: CascadeFormat, path: &Path) -> Result<CascadeFile> {
    match format {
        CascadeFormat::Snap => parse_snap(text, path),
        CascadeFormat::Tsv => parse_tsv(text, path),
    }
}

pub fn parse_cascades(path: &Path, format: CascadeFormat) -> Result<CascadeFile> {
    parse_cascades_str(&read_to_string(path)?, format, path)
}

fn parse_snap(text: &str, path: &Path) -> Result<CascadeFile> {
    let lines: Vec<&str> = text.lines().collect();
    let split = lines.iter().position(|l| l.trim().is_empty());
    let mut ids = IdMap::new();
    let mut names = Vec::new();
    let cascade_start = match split {
        Some(blank) => {
            for (i, line) in lines[..blank].iter().enumerate() {
                if line.trim_start().starts_with('#') {
                    continue;
                }
                let ctx = LineCtx { path, line: i + 1 };
                let (id, name) = line
                    .split_once(',')
                    .ok_or_else(|| ctx.err("expected `<id>,<name>`"))?;
                let node = ids.intern(ctx.node(id)?);
                names.push((node, name.trim().to_string()));
            }
            blank + 1
        }
        None => 0,
    };

    let mut cascades = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(cascade_start) {
        if is_skippable(line) {
            continue;
        }
        let ctx = LineCtx { path, line: i + 1 };
        let mut entries = Vec::new();
        for item in line.trim().split(';').filter(|s| !s.trim().is_empty()) {
            let (node, time) = item
                .split_once(',')
                .ok_or_else(|| ctx.err(format!("expected `node,time`, found `{}`", item.trim())))?;
            let node = ids.intern(ctx.node(node)?);
            entries.push((node, ctx.time(time)?));
        }
        cascades.push(ctx.cascade(entries, &ids)?);
    }
    Ok(CascadeFile {
        cascades: CascadeSet::new(cascades, ids),
        names,
    })
}

fn parse_tsv(text: &str, path: &Path) -> Result<CascadeFile> {
    let mut ids = IdMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, (usize, Vec<(NodeId, f64)>)> =
        std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let ctx = LineCtx { path, line: i + 1 };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(ctx.err("expected `cascade_id<TAB>node<TAB>time`"));
        }
        let node = ids.intern(ctx.node(fields[1])?);
        let time = ctx.time(fields[2])?;
        let key = fields[0].trim().to_string();
        let slot = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0, Vec::new())
        });
        if slot.1.iter().any(|&(n, _)| n == node) {
            return Err(ctx.err(format!("node {} appears twice in one cascade", fields[1].trim())));
        }
        slot.0 = ctx.line;
        slot.1.push((node, time));
    }
    let mut cascades = Vec::with_capacity(order.len());
    for key in order {
        let (line, entries) = groups.remove(&key).unwrap_or_default();
        cascades.push(LineCtx { path, line }.cascade(entries, &ids)?);
    }
    Ok(CascadeFile {
        cascades: CascadeSet::new(cascades, ids),
        names: Vec::new(),
    })
}

fn fmt_time(t: f64) -> String {
    if t.is_infinite() {
        "inf".to_string()
    } else {
        format!("{t}")
    }
}

/// Serialises a cascade set in SNAP style. Every known node gets a header
/// line; nodes without a recorded name are named by their id.
pub fn format_snap(cs: &CascadeSet, names: &[(NodeId, String)]) -> String {
    let ids = cs.ids();
    let mut out = String::new();
    let named: std::collections::HashMap<NodeId, &str> =
        names.iter().map(|(n, s)| (*n, s.as_str())).collect();
    for i in 0..ids.len() {
        let node = NodeId(i as u32);
        let ext = ids.external(node);
        match named.get(&node) {
            Some(name) => writeln!(out, "{ext},{name}").unwrap(),
            None => writeln!(out, "{ext},{ext}").unwrap(),
        }
    }
    out.push('\n');
    for c in cs.cascades() {
        let line: Vec<String> = c
            .entries()
            .iter()
            .map(|&(n, t)| format!("{},{}", ids.external(n), fmt_time(t)))
            .collect();
        out.push_str(&line.join(";"));
        out.push('\n');
    }
    out
}

pub fn format_tsv(cs: &CascadeSet) -> String {
    let ids = cs.ids();
    let mut out = String::new();
    for (i, c) in cs.cascades().iter().enumerate() {
        for &(n, t) in c.entries() {
            writeln!(out, "{i}\t{}\t{}", ids.external(n), fmt_time(t)).unwrap();
        }
    }
    out
}

pub fn write_cascades(path: &Path, file: &CascadeFile, format: CascadeFormat) -> Result<()> {
    let text = match format {
        CascadeFormat::Snap => format_snap(&file.cascades, &file.names),
        CascadeFormat::Tsv => format_tsv(&file.cascades),
    };
    write_string(path, &text)
}

fn split_pair<'a>(ctx: &LineCtx<'_>, line: &'a str, what: &str) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(ctx.err(format!("expected {what}")));
    }
    Ok(fields)
}

/// Parses an edge list, interning ids into `ids`. Self-loops are rejected.
pub fn parse_graph_str(text: &str, ids: &mut IdMap, directed: bool, path: &Path) -> Result<Graph> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let ctx = LineCtx { path, line: i + 1 };
        let fields = split_pair(&ctx, line, "`u<TAB>v`")?;
        if fields.len() != 2 {
            return Err(ctx.err("expected exactly two fields `u<TAB>v`"));
        }
        let (a, b) = (ctx.node(fields[0])?, ctx.node(fields[1])?);
        if a == b {
            return Err(ctx.err(format!("self-loop on node {a}")));
        }
        edges.push((ids.intern(a), ids.intern(b)));
    }
    Graph::new(ids.len(), edges, directed).map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn load_graph(path: &Path, ids: &mut IdMap, directed: bool) -> Result<Graph> {
    parse_graph_str(&read_to_string(path)?, ids, directed, path)
}

pub fn format_graph(g: &Graph, ids: &IdMap) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        writeln!(out, "{}\t{}", ids.external(u), ids.external(v)).unwrap();
    }
    out
}

/// Parses `node<TAB>community` lines. Community labels may be any
/// non-negative integers.
pub fn parse_partition_str(text: &str, ids: &mut IdMap, path: &Path) -> Result<CommunityPartition> {
    let mut pairs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let ctx = LineCtx { path, line: i + 1 };
        let fields = split_pair(&ctx, line, "`node<TAB>community`")?;
        let node = ctx.node(fields[0])?;
        let community: u32 = fields[1]
            .parse()
            .map_err(|_| ctx.err(format!("invalid community `{}`", fields[1])))?;
        if !seen.insert(node) {
            return Err(ctx.err(format!("node {node} is assigned twice")));
        }
        pairs.push((ids.intern(node), community));
    }
    CommunityPartition::from_pairs(ids.len(), pairs).map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn load_partition(path: &Path, ids: &mut IdMap) -> Result<CommunityPartition> {
    parse_partition_str(&read_to_string(path)?, ids, path)
}

pub fn format_partition(p: &CommunityPartition, ids: &IdMap) -> String {
    let mut out = String::new();
    for (i, c) in p.assignment().iter().enumerate() {
        if let Some(c) = c {
            writeln!(out, "{}\t{c}", ids.external(NodeId(i as u32))).unwrap();
        }
    }
    out
}

fn mode_name(d: Directedness) -> &'static str {
    match d {
        Directedness::Directed => "directed",
        Directedness::Undirected => "undirected",
    }
}

pub fn parse_mode(s: &str) -> std::result::Result<Directedness, String> {
    match s {
        "directed" => Ok(Directedness::Directed),
        "undirected" => Ok(Directedness::Undirected),
        other => Err(format!("unknown mode `{other}` (expected directed or undirected)")),
    }
}

pub fn format_inferred(g: &InferredGraph, ids: &IdMap) -> String {
    let mut out = format!("# K={} mode={}\n", g.requested_k, mode_name(g.directedness));
    for e in &g.edges {
        writeln!(
            out,
            "{}\t{}\t{}",
            ids.external(e.source),
            ids.external(e.target),
            e.score
        )
        .unwrap();
    }
    out
}

/// Parses a ranked edge file. Without a header the mode defaults to
/// undirected and K to the number of edges.
pub fn parse_inferred_str(text: &str, ids: &mut IdMap, path: &Path) -> Result<InferredGraph> {
    let mut requested_k = None;
    let mut directedness = Directedness::Undirected;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ctx = LineCtx { path, line: i + 1 };
        let t = line.trim();
        if let Some(header) = t.strip_prefix('#') {
            for token in header.split_whitespace() {
                if let Some(k) = token.strip_prefix("K=") {
                    requested_k = Some(k.parse().map_err(|_| ctx.err("invalid K in header"))?);
                } else if let Some(m) = token.strip_prefix("mode=") {
                    directedness = parse_mode(m).map_err(|e| ctx.err(e))?;
                }
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split('\t').collect();
        if fields.len() != 3 {
            return Err(ctx.err("expected `u<TAB>v<TAB>score`"));
        }
        let (a, b) = (ctx.node(fields[0])?, ctx.node(fields[1])?);
        let score: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| ctx.err(format!("invalid score `{}`", fields[2])))?;
        edges.push(ScoredEdge {
            source: ids.intern(a),
            target: ids.intern(b),
            score,
        });
    }
    let requested_k = requested_k.unwrap_or(edges.len());
    Ok(InferredGraph {
        saturated: edges.len() < requested_k,
        edges,
        directedness,
        requested_k,
        dimension: ids.len(),
    })
}

pub fn load_inferred(path: &Path, ids: &mut IdMap) -> Result<InferredGraph> {
    parse_inferred_str(&read_to_string(path)?, ids, path)
}
