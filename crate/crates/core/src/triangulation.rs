//! Combinatorial ideal triangulations of oriented punctured surfaces.
//!
//! A triangulation with `N` triangles has `3N` side slots. Slot `(t, s)` is
//! side `s` of triangle `t`; sides are listed counterclockwise and corner `i`
//! is opposite side `i`, so side `s` runs from corner `s + 1` to corner
//! `s + 2` (indices mod 3). The gluing is a fixed-point-free involution on
//! slots; each pair of glued slots is an edge.
//!
//! Edges carry a stable index and a name. Flips keep every index (the flipped
//! edge's index is reused for the new diagonal), so the edge correspondence
//! of a flip is the identity on indices.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A side slot: side `side` (0..3) of triangle `tri`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub tri: usize,
    pub side: usize,
}

impl Slot {
    pub const fn new(tri: usize, side: usize) -> Self {
        Slot { tri, side }
    }

    pub fn index(self) -> usize {
        3 * self.tri + self.side
    }

    pub fn from_index(i: usize) -> Self {
        Slot {
            tri: i / 3,
            side: i % 3,
        }
    }

    /// The slot `k` steps counterclockwise within the same triangle.
    pub fn rotate(self, k: usize) -> Self {
        Slot {
            tri: self.tri,
            side: (self.side + k) % 3,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.tri, self.side)
    }
}

/// Corner `corner` of triangle `tri`; it sits opposite side `corner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner {
    pub tri: usize,
    pub corner: usize,
}

impl Corner {
    pub fn index(self) -> usize {
        3 * self.tri + self.corner
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealTriangulation {
    n: usize,
    glue: Vec<usize>,
    edge_of: Vec<EdgeId>,
    edges: Vec<[Slot; 2]>,
    names: Vec<String>,
    punctures: Vec<Vec<Corner>>,
    puncture_of: Vec<usize>,
    component_of: Vec<usize>,
    n_components: usize,
}

impl IdealTriangulation {
    /// Builds a triangulation from `n` triangles and a list of glued slot
    /// pairs. Edge `k` is the `k`-th pair; its first slot fixes the edge's
    /// reference direction. Names default to `e<k>`.
    pub fn from_gluing(
        n: usize,
        pairs: &[(Slot, Slot)],
        names: Option<Vec<String>>,
        allow_disconnected: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut glue = vec![usize::MAX; 3 * n];
        for &(a, b) in pairs {
            for s in [a, b] {
                if s.tri >= n || s.side >= 3 {
                    return Err(Error::SlotOutOfRange(s));
                }
            }
            if a == b {
                return Err(Error::SelfPairedSlot(a));
            }
            for s in [a, b] {
                if glue[s.index()] != usize::MAX {
                    return Err(Error::DoubleGlued(s));
                }
            }
            glue[a.index()] = b.index();
            glue[b.index()] = a.index();
        }
        if let Some(i) = glue.iter().position(|&g| g == usize::MAX) {
            return Err(Error::DanglingSlot(Slot::from_index(i)));
        }

        let edges: Vec<[Slot; 2]> = pairs.iter().map(|&(a, b)| [a, b]).collect();
        let mut edge_of = vec![EdgeId(0); 3 * n];
        for (k, e) in edges.iter().enumerate() {
            edge_of[e[0].index()] = EdgeId(k);
            edge_of[e[1].index()] = EdgeId(k);
        }
        let names = match names {
            Some(names) => {
                if names.len() != edges.len() {
                    return Err(Error::Arity {
                        expected: edges.len(),
                        got: names.len(),
                    });
                }
                names
            }
            None => (0..edges.len()).map(|k| format!("e{k}")).collect(),
        };
        let mut seen = HashMap::new();
        for name in &names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::DuplicateEdgeName(name.clone()));
            }
        }

        let (punctures, puncture_of) = corner_cycles(&glue);
        let (component_of, n_components) = triangle_components(n, &glue);

        let t = IdealTriangulation {
            n,
            glue,
            edge_of,
            edges,
            names,
            punctures,
            puncture_of,
            component_of,
            n_components,
        };
        if n_components > 1 && !allow_disconnected {
            return Err(Error::Disconnected(n_components));
        }
        for c in 0..n_components {
            let chi = t.component_euler_characteristic(c);
            if chi >= 0 {
                return Err(Error::NonNegativeEuler(chi));
            }
        }
        Ok(t)
    }

    /// Builds a triangulation from triangles given by counterclockwise vertex
    /// labels; sides `u -> v` and `v -> u` are glued. Every directed vertex
    /// pair must occur at most once, so this only covers simplicial inputs.
    pub fn from_faces(faces: &[[usize; 3]]) -> Result<Self> {
        let mut by_dir: HashMap<(usize, usize), Slot> = HashMap::new();
        for (t, f) in faces.iter().enumerate() {
            for s in 0..3 {
                let key = (f[(s + 1) % 3], f[(s + 2) % 3]);
                if by_dir.insert(key, Slot::new(t, s)).is_some() {
                    return Err(Error::DoubleGlued(Slot::new(t, s)));
                }
            }
        }
        let mut pairs = Vec::new();
        for (t, f) in faces.iter().enumerate() {
            for s in 0..3 {
                let (u, v) = (f[(s + 1) % 3], f[(s + 2) % 3]);
                let here = Slot::new(t, s);
                match by_dir.get(&(v, u)) {
                    Some(&there) if here < there => pairs.push((here, there)),
                    Some(_) => {}
                    None => return Err(Error::DanglingSlot(here)),
                }
            }
        }
        Self::from_gluing(faces.len(), &pairs, None, false)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.edges.len() {
            return Err(Error::Arity {
                expected: self.edges.len(),
                got: names.len(),
            });
        }
        let mut seen = HashMap::new();
        for name in &names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::DuplicateEdgeName(name.clone()));
            }
        }
        self.names = names;
        Ok(self)
    }

    pub fn num_triangles(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_punctures(&self) -> usize {
        self.punctures.len()
    }

    pub fn num_components(&self) -> usize {
        self.n_components
    }

    /// Euler characteristic of the punctured surface, `N - #edges`.
    pub fn euler_characteristic(&self) -> i64 {
        self.n as i64 - self.edges.len() as i64
    }

    /// Genus of the closed surface obtained by filling in the punctures.
    pub fn genus(&self) -> i64 {
        let closed = self.punctures.len() as i64 + self.euler_characteristic();
        (2 * self.n_components as i64 - closed) / 2
    }

    fn component_euler_characteristic(&self, c: usize) -> i64 {
        let tris = self.component_of.iter().filter(|&&k| k == c).count() as i64;
        tris - 3 * tris / 2
    }

    pub fn glued(&self, s: Slot) -> Slot {
        Slot::from_index(self.glue[s.index()])
    }

    pub fn edge_of(&self, s: Slot) -> EdgeId {
        self.edge_of[s.index()]
    }

    pub fn edge_slots(&self, e: EdgeId) -> [Slot; 2] {
        self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn name(&self, e: EdgeId) -> &str {
        &self.names[e.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edge_by_name(&self, name: &str) -> Result<EdgeId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(EdgeId)
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    /// Vertex cycles, each starting at its lowest corner, ordered by that
    /// corner.
    pub fn puncture_cycles(&self) -> &[Vec<Corner>] {
        &self.punctures
    }

    pub fn puncture_of(&self, c: Corner) -> usize {
        self.puncture_of[c.index()]
    }

    pub fn component_of(&self, tri: usize) -> usize {
        self.component_of[tri]
    }

    /// Number of ends of edge `e` at each puncture.
    pub fn edge_end_counts(&self, e: EdgeId) -> Vec<(usize, usize)> {
        let s = self.edges[e.0][0];
        let mut out: Vec<(usize, usize)> = Vec::new();
        for c in [(s.side + 1) % 3, (s.side + 2) % 3] {
            let p = self.puncture_of(Corner {
                tri: s.tri,
                corner: c,
            });
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some(entry) => entry.1 += 1,
                None => out.push((p, 1)),
            }
        }
        out
    }

    /// An edge is flippable when its two slots lie in distinct triangles.
    pub fn is_flippable(&self, e: EdgeId) -> bool {
        let [a, b] = self.edges[e.0];
        a.tri != b.tri
    }

    /// Glued slot pairs in edge order.
    pub fn gluing_pairs(&self) -> Vec<(Slot, Slot)> {
        self.edges.iter().map(|e| (e[0], e[1])).collect()
    }

    /// Parses the `.tri` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut pairs = Vec::new();
        let mut named: Vec<(String, Slot, usize)> = Vec::new();
        let mut disconnected = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens = tokens_with_columns(content);
            let Some(&(col, head)) = tokens.first() else {
                continue;
            };
            let syntax = |column: usize, message: String| Error::Syntax {
                line,
                column,
                message,
            };
            match head {
                "triangles" => {
                    if tokens.len() != 2 {
                        return Err(syntax(col, "expected `triangles <N>`".into()));
                    }
                    let (c, v) = tokens[1];
                    n = Some(
                        v.parse()
                            .map_err(|_| syntax(c, format!("invalid count `{v}`")))?,
                    );
                }
                "glue" => {
                    if tokens.len() != 3 {
                        return Err(syntax(col, "expected `glue <t>.<s> <t>.<s>`".into()));
                    }
                    let a = parse_slot(tokens[1].1).ok_or_else(|| {
                        syntax(tokens[1].0, format!("invalid slot `{}`", tokens[1].1))
                    })?;
                    let b = parse_slot(tokens[2].1).ok_or_else(|| {
                        syntax(tokens[2].0, format!("invalid slot `{}`", tokens[2].1))
                    })?;
                    pairs.push((a, b));
                }
                "edge" => {
                    if tokens.len() != 3 {
                        return Err(syntax(col, "expected `edge <name> <t>.<s>`".into()));
                    }
                    let s = parse_slot(tokens[2].1).ok_or_else(|| {
                        syntax(tokens[2].0, format!("invalid slot `{}`", tokens[2].1))
                    })?;
                    named.push((tokens[1].1.to_string(), s, line));
                }
                "disconnected" => disconnected = true,
                other => return Err(syntax(col, format!("unknown directive `{other}`"))),
            }
        }
        let n = n.ok_or(Error::Syntax {
            line: 1,
            column: 1,
            message: "missing `triangles <N>` line".into(),
        })?;
        let t = Self::from_gluing(n, &pairs, None, disconnected)?;
        let mut names = t.names.clone();
        for (name, slot, line) in named {
            if slot.tri >= n || slot.side >= 3 {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: format!("slot {slot} out of range"),
                });
            }
            names[t.edge_of(slot).0] = name;
        }
        t.with_names(names)
    }

    /// Writes the `.tri` text format; gluings are emitted in edge order.
    pub fn serialize(&self) -> String {
        let mut out = format!("triangles {}\n", self.n);
        if self.n_components > 1 {
            out.push_str("disconnected\n");
        }
        for [a, b] in &self.edges {
            out.push_str(&format!("glue {a} {b}\n"));
        }
        for (k, [a, _]) in self.edges.iter().enumerate() {
            out.push_str(&format!("edge {} {a}\n", self.names[k]));
        }
        out
    }
}

fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub(crate) fn parse_slot(tok: &str) -> Option<Slot> {
    let (t, s) = tok.split_once('.')?;
    let tri = t.parse().ok()?;
    let side: usize = s.parse().ok()?;
    (side < 3).then_some(Slot { tri, side })
}

/// Next corner around the same vertex: leave through the side that starts at
/// the corner and enter the glued triangle at the corner where that side ends.
pub(crate) fn next_corner_around(glue: &[usize], c: Corner) -> Corner {
    let out = Slot::from_index(glue[Slot::new(c.tri, (c.corner + 2) % 3).index()]);
    Corner {
        tri: out.tri,
        corner: (out.side + 2) % 3,
    }
}

fn corner_cycles(glue: &[usize]) -> (Vec<Vec<Corner>>, Vec<usize>) {
    let total = glue.len();
    let mut puncture_of = vec![usize::MAX; total];
    let mut cycles = Vec::new();
    for i in 0..total {
        if puncture_of[i] != usize::MAX {
            continue;
        }
        let start = Corner {
            tri: i / 3,
            corner: i % 3,
        };
        let mut cyc = Vec::new();
        let mut c = start;
        loop {
            puncture_of[c.index()] = cycles.len();
            cyc.push(c);
            c = next_corner_around(glue, c);
            if c == start {
                break;
            }
        }
        cycles.push(cyc);
    }
    (cycles, puncture_of)
}

fn triangle_components(n: usize, glue: &[usize]) -> (Vec<usize>, usize) {
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = count;
        while let Some(t) = stack.pop() {
            for s in 0..3 {
                let u = glue[3 * t + s] / 3;
                if comp[u] == usize::MAX {
                    comp[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}
