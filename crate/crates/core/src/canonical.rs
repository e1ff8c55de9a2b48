//! Orientation-preserving isomorphisms and canonical codes.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::triangulation::{Corner, EdgeId, IdealTriangulation, Slot};

/// An orientation-preserving isomorphism between triangulated surfaces.
///
/// Slot `(t, s)` of the source maps to `(tri_map[t].0, s + tri_map[t].1)`
/// of the target; `edge_map` is the induced bijection on edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    tri_map: Vec<(usize, usize)>,
    edge_map: Vec<EdgeId>,
}

impl Relabeling {
    pub fn identity(t: &IdealTriangulation) -> Self {
        Relabeling {
            tri_map: (0..t.num_triangles()).map(|k| (k, 0)).collect(),
            edge_map: t.edge_ids().collect(),
        }
    }

    /// Builds and checks a relabeling from a triangle map with rotations.
    pub fn from_triangle_map(
        src: &IdealTriangulation,
        dst: &IdealTriangulation,
        tri_map: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if tri_map.len() != src.num_triangles() || src.num_triangles() != dst.num_triangles() {
            return Err(Error::InvalidRelabeling);
        }
        let mut hit = vec![false; dst.num_triangles()];
        for &(t, r) in &tri_map {
            if t >= hit.len() || r >= 3 || hit[t] {
                return Err(Error::InvalidRelabeling);
            }
            hit[t] = true;
        }
        let map_slot = |s: Slot| {
            let (t, r) = tri_map[s.tri];
            Slot::new(t, (s.side + r) % 3)
        };
        for i in 0..3 * src.num_triangles() {
            let s = Slot::from_index(i);
            if map_slot(src.glued(s)) != dst.glued(map_slot(s)) {
                return Err(Error::InvalidRelabeling);
            }
        }
        let edge_map = src
            .edge_ids()
            .map(|e| dst.edge_of(map_slot(src.edge_slots(e)[0])))
            .collect();
        Ok(Relabeling { tri_map, edge_map })
    }

    pub fn map_slot(&self, s: Slot) -> Slot {
        let (t, r) = self.tri_map[s.tri];
        Slot::new(t, (s.side + r) % 3)
    }

    pub fn map_edge(&self, e: EdgeId) -> EdgeId {
        self.edge_map[e.0]
    }

    pub fn map_corner(&self, c: Corner) -> Corner {
        let (t, r) = self.tri_map[c.tri];
        Corner {
            tri: t,
            corner: (c.corner + r) % 3,
        }
    }

    /// Induced bijection on punctures.
    pub fn puncture_map(&self, src: &IdealTriangulation, dst: &IdealTriangulation) -> Vec<usize> {
        src.puncture_cycles()
            .iter()
            .map(|cycle| dst.puncture_of(self.map_corner(cycle[0])))
            .collect()
    }

    pub fn edge_map(&self) -> &[EdgeId] {
        &self.edge_map
    }

    pub fn triangle_map(&self) -> &[(usize, usize)] {
        &self.tri_map
    }

    pub fn inverse(&self) -> Relabeling {
        let mut tri_map = vec![(0, 0); self.tri_map.len()];
        for (t, &(u, r)) in self.tri_map.iter().enumerate() {
            tri_map[u] = (t, (3 - r) % 3);
        }
        let mut edge_map = vec![EdgeId(0); self.edge_map.len()];
        for (e, &f) in self.edge_map.iter().enumerate() {
            edge_map[f.0] = EdgeId(e);
        }
        Relabeling { tri_map, edge_map }
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &Relabeling) -> Relabeling {
        let tri_map = self
            .tri_map
            .iter()
            .map(|&(u, r)| {
                let (v, q) = then.tri_map[u];
                (v, (r + q) % 3)
            })
            .collect();
        let edge_map = self.edge_map.iter().map(|&f| then.edge_map[f.0]).collect();
        Relabeling { tri_map, edge_map }
    }

    pub fn is_identity_on_edges(&self) -> bool {
        self.edge_map.iter().enumerate().all(|(k, e)| e.0 == k)
    }
}

/// Extends `tri -> (image, rot)` across the component of `tri`, checking
/// gluings and edge constraints. Writes into `tri_map`/`used`; returns false
/// on conflict (the caller discards the partial state).
fn propagate(
    src: &IdealTriangulation,
    dst: &IdealTriangulation,
    start: usize,
    image: (usize, usize),
    constraints: &[Option<EdgeId>],
    tri_map: &mut [Option<(usize, usize)>],
    used: &mut [bool],
) -> bool {
    if used[image.0] {
        return false;
    }
    tri_map[start] = Some(image);
    used[image.0] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let (u, r) = tri_map[t].expect("queued triangles are mapped");
        for s in 0..3 {
            let here = Slot::new(t, s);
            let mapped = Slot::new(u, (s + r) % 3);
            if let Some(want) = constraints[src.edge_of(here).0] {
                if dst.edge_of(mapped) != want {
                    return false;
                }
            }
            let there = src.glued(here);
            let there_img = dst.glued(mapped);
            let rot = (there_img.side + 3 - there.side) % 3;
            match tri_map[there.tri] {
                Some(existing) => {
                    if existing != (there_img.tri, rot) {
                        return false;
                    }
                }
                None => {
                    if used[there_img.tri] {
                        return false;
                    }
                    tri_map[there.tri] = Some((there_img.tri, rot));
                    used[there_img.tri] = true;
                    queue.push_back(there.tri);
                }
            }
        }
    }
    true
}

/// Enumerates isomorphisms `src -> dst` whose edge map agrees with every
/// `Some` entry of `constraints`, stopping after `limit` results.
pub fn find_isomorphisms(
    src: &IdealTriangulation,
    dst: &IdealTriangulation,
    constraints: &[Option<EdgeId>],
    limit: usize,
) -> Vec<Relabeling> {
    let mut out = Vec::new();
    if src.num_triangles() != dst.num_triangles()
        || src.num_edges() != dst.num_edges()
        || src.num_punctures() != dst.num_punctures()
        || constraints.len() != src.num_edges()
    {
        return out;
    }
    // one representative triangle per source component
    let mut roots = Vec::new();
    let mut seen = vec![false; src.num_components()];
    for t in 0..src.num_triangles() {
        let c = src.component_of(t);
        if !seen[c] {
            seen[c] = true;
            roots.push(t);
        }
    }
    let mut tri_map = vec![None; src.num_triangles()];
    let mut used = vec![false; dst.num_triangles()];
    search(
        src,
        dst,
        constraints,
        &roots,
        &mut tri_map,
        &mut used,
        limit,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    src: &IdealTriangulation,
    dst: &IdealTriangulation,
    constraints: &[Option<EdgeId>],
    roots: &[usize],
    tri_map: &mut Vec<Option<(usize, usize)>>,
    used: &mut Vec<bool>,
    limit: usize,
    out: &mut Vec<Relabeling>,
) {
    if out.len() >= limit {
        return;
    }
    let Some((&root, rest)) = roots.split_first() else {
        let map: Vec<(usize, usize)> = tri_map.iter().map(|m| m.expect("all mapped")).collect();
        if let Ok(r) = Relabeling::from_triangle_map(src, dst, map) {
            out.push(r);
        }
        return;
    };
    for u in 0..dst.num_triangles() {
        if used[u] {
            continue;
        }
        for r in 0..3 {
            let saved_map = tri_map.clone();
            let saved_used = used.clone();
            if propagate(src, dst, root, (u, r), constraints, tri_map, used) {
                search(src, dst, constraints, rest, tri_map, used, limit, out);
            }
            *tri_map = saved_map;
            *used = saved_used;
            if out.len() >= limit {
                return;
            }
        }
    }
}

/// Some isomorphism `src -> dst`, if one exists.
pub fn are_isomorphic(src: &IdealTriangulation, dst: &IdealTriangulation) -> Option<Relabeling> {
    let free = vec![None; src.num_edges()];
    find_isomorphisms(src, dst, &free, 1).into_iter().next()
}

/// Canonical code of a connected triangulation together with the relabeling
/// onto the canonical numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub code: Vec<u8>,
    /// Triangle map `(new index, rotation)` such that old slot `(t, s)` is
    /// canonical slot `(tri_map[t].0, s + tri_map[t].1)`.
    pub tri_map: Vec<(usize, usize)>,
}

fn encode_from(
    t: &IdealTriangulation,
    start: usize,
    start_side: usize,
    tris: &[usize],
) -> (Vec<u32>, Vec<(usize, usize)>) {
    let n = t.num_triangles();
    let mut new_index = vec![usize::MAX; n];
    // rotation r: old side (r + j) becomes new side j
    let mut offset = vec![0usize; n];
    let mut order = Vec::with_capacity(tris.len());
    new_index[start] = 0;
    offset[start] = start_side;
    order.push(start);
    let mut code = vec![tris.len() as u32];
    let mut head = 0;
    while head < order.len() {
        let old = order[head];
        head += 1;
        for j in 0..3 {
            let partner = t.glued(Slot::new(old, (offset[old] + j) % 3));
            if new_index[partner.tri] == usize::MAX {
                new_index[partner.tri] = order.len();
                offset[partner.tri] = partner.side;
                order.push(partner.tri);
            }
            let new_side = (partner.side + 3 - offset[partner.tri]) % 3;
            code.push((3 * new_index[partner.tri] + new_side) as u32);
        }
    }
    let map = tris
        .iter()
        .map(|&k| (new_index[k], (3 - offset[k]) % 3))
        .collect();
    (code, map)
}

fn canonical_of_component(
    t: &IdealTriangulation,
    tris: &[usize],
) -> (Vec<u32>, Vec<(usize, usize)>) {
    let mut best: Option<(Vec<u32>, Vec<(usize, usize)>)> = None;
    for &start in tris {
        for side in 0..3 {
            let cand = encode_from(t, start, side, tris);
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                best = Some(cand);
            }
        }
    }
    best.expect("component has a triangle")
}

fn to_bytes(code: &[u32]) -> Vec<u8> {
    code.iter().flat_map(|v| v.to_be_bytes()).collect()
}

/// Canonical code of a connected triangulation: the lexicographically least
/// breadth-first encoding over all oriented starting sides.
pub fn canonical_form(t: &IdealTriangulation) -> Result<CanonicalForm> {
    if t.num_components() != 1 {
        return Err(Error::Disconnected(t.num_components()));
    }
    let tris: Vec<usize> = (0..t.num_triangles()).collect();
    let (code, tri_map) = canonical_of_component(t, &tris);
    Ok(CanonicalForm {
        code: to_bytes(&code),
        tri_map,
    })
}

/// Isomorphism-invariant code for possibly disconnected triangulations: the
/// sorted list of component codes.
pub fn canonical_code(t: &IdealTriangulation) -> Vec<u8> {
    let mut parts: Vec<Vec<u32>> = (0..t.num_components())
        .map(|c| {
            let tris: Vec<usize> = (0..t.num_triangles())
                .filter(|&k| t.component_of(k) == c)
                .collect();
            canonical_of_component(t, &tris).0
        })
        .collect();
    parts.sort();
    let mut out = Vec::new();
    for p in parts {
        out.extend(to_bytes(&p));
        out.extend(u32::MAX.to_be_bytes());
    }
    out
}
