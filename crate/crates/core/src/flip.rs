//! Diagonal exchanges, flip paths and the Ptolemy relations.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::canonical::{find_isomorphisms, Relabeling};
use crate::error::{Error, Result};
use crate::shear::{compose_path_map, random_positive_point};
use crate::triangulation::{Corner, EdgeId, IdealTriangulation, Slot};

/// The four sides of the square around a flipped edge `e`.
///
/// `(e, a, b)` is the counterclockwise boundary of the triangle holding
/// `e`'s first slot and `(e, c, d)` that of the other triangle, so `a, b, c,
/// d` run counterclockwise around the square with `a` opposite `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadSides {
    pub a: EdgeId,
    pub b: EdgeId,
    pub c: EdgeId,
    pub d: EdgeId,
}

impl QuadSides {
    pub fn as_array(&self) -> [EdgeId; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Slot layout of the square around a flippable edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quad {
    pub first: Slot,
    pub second: Slot,
    pub a: Slot,
    pub b: Slot,
    pub c: Slot,
    pub d: Slot,
}

impl Quad {
    pub fn of(t: &IdealTriangulation, e: EdgeId) -> Result<Quad> {
        if !t.is_flippable(e) {
            return Err(Error::NotFlippable(e));
        }
        let [first, second] = t.edge_slots(e);
        Ok(Quad {
            first,
            second,
            a: first.rotate(1),
            b: first.rotate(2),
            c: second.rotate(1),
            d: second.rotate(2),
        })
    }

    pub fn sides(&self, t: &IdealTriangulation) -> QuadSides {
        QuadSides {
            a: t.edge_of(self.a),
            b: t.edge_of(self.b),
            c: t.edge_of(self.c),
            d: t.edge_of(self.d),
        }
    }
}

/// A diagonal exchange. Every edge keeps its index; the flipped index now
/// names the new diagonal.
#[derive(Debug, Clone)]
pub struct Flip {
    pub source: IdealTriangulation,
    pub edge: EdgeId,
    pub quad: Quad,
    pub sides: QuadSides,
    pub result: IdealTriangulation,
}

impl Flip {
    /// Edge correspondence source -> result.
    pub fn correspondence(&self) -> Vec<EdgeId> {
        self.source.edge_ids().collect()
    }

    /// Where a side slot other than the flipped edge's goes.
    pub fn slot_image(&self, s: Slot) -> Slot {
        let q = &self.quad;
        let (t1, t2) = (q.first.tri, q.second.tri);
        if s == q.a {
            Slot::new(t2, 2)
        } else if s == q.b {
            Slot::new(t1, 1)
        } else if s == q.c {
            Slot::new(t1, 2)
        } else if s == q.d {
            Slot::new(t2, 1)
        } else {
            s
        }
    }

    /// Punctures of the source to punctures of the result, read off from the
    /// start of a side that survives the flip.
    pub fn puncture_map(&self) -> Vec<usize> {
        let t = &self.source;
        t.puncture_cycles()
            .iter()
            .map(|cycle| {
                let s = cycle
                    .iter()
                    .map(|c| Slot::new(c.tri, (c.corner + 2) % 3))
                    .find(|&s| t.edge_of(s) != self.edge)
                    .expect("a flippable edge is not the only edge at a puncture");
                let img = self.slot_image(s);
                self.result.puncture_of(Corner {
                    tri: img.tri,
                    corner: (img.side + 1) % 3,
                })
            })
            .collect()
    }
}

/// Replaces the diagonal of the square around `e` by the other diagonal.
///
/// With `e` running from `U` to `V` in its first triangle `(e, a, b)` whose
/// apex is `P`, and `Q` the apex of `(e, c, d)`, the new triangles are
/// `(e', b, c)` and `(e', d, a)` with `e'` joining `P` and `Q`; they reuse
/// the two old triangle indices.
pub fn flip(t: &IdealTriangulation, e: EdgeId) -> Result<Flip> {
    let quad = Quad::of(t, e)?;
    let (t1, t2) = (quad.first.tri, quad.second.tri);
    let moved = [
        (quad.a, Slot::new(t2, 2)),
        (quad.b, Slot::new(t1, 1)),
        (quad.c, Slot::new(t1, 2)),
        (quad.d, Slot::new(t2, 1)),
    ];
    let remap = |s: Slot| {
        moved
            .iter()
            .find(|(old, _)| *old == s)
            .map(|&(_, new)| new)
            .unwrap_or(s)
    };
    let pairs: Vec<(Slot, Slot)> = t
        .edge_ids()
        .map(|k| {
            if k == e {
                (Slot::new(t1, 0), Slot::new(t2, 0))
            } else {
                let [x, y] = t.edge_slots(k);
                (remap(x), remap(y))
            }
        })
        .collect();
    let result = IdealTriangulation::from_gluing(
        t.num_triangles(),
        &pairs,
        Some(t.names().to_vec()),
        t.num_components() > 1,
    )?;
    Ok(Flip {
        source: t.clone(),
        edge: e,
        quad,
        sides: quad.sides(t),
        result,
    })
}

/// A word in the Ptolemy groupoid: flips applied in order, each edge named in
/// the triangulation current at its step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipPath {
    pub start: IdealTriangulation,
    pub steps: Vec<EdgeId>,
}

impl FlipPath {
    pub fn new(start: IdealTriangulation, steps: Vec<EdgeId>) -> Self {
        FlipPath { start, steps }
    }

    pub fn empty(start: IdealTriangulation) -> Self {
        FlipPath {
            start,
            steps: Vec::new(),
        }
    }

    /// Parses `flip <edge-name>` lines against the start triangulation's
    /// names (names are preserved by flips).
    pub fn parse(start: IdealTriangulation, text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut it = content.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some("flip"), Some(name), None) => steps.push(start.edge_by_name(name)?),
                _ => {
                    return Err(Error::Syntax {
                        line: lineno + 1,
                        column: 1,
                        message: "expected `flip <edge-name>`".into(),
                    })
                }
            }
        }
        Ok(FlipPath { start, steps })
    }

    pub fn serialize(&self) -> String {
        self.steps
            .iter()
            .map(|&e| format!("flip {}\n", self.start.name(e)))
            .collect()
    }

    pub fn reversed(&self) -> Result<FlipPath> {
        let end = apply_path(self)?.end;
        Ok(FlipPath {
            start: end,
            steps: self.steps.iter().rev().copied().collect(),
        })
    }

    pub fn concat(&self, next: &FlipPath) -> FlipPath {
        FlipPath {
            start: self.start.clone(),
            steps: self.steps.iter().chain(&next.steps).copied().collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub end: IdealTriangulation,
    pub flips: Vec<Flip>,
}

impl PathResult {
    /// Composed edge correspondence start -> end; the identity on indices.
    pub fn correspondence(&self) -> Vec<EdgeId> {
        self.end.edge_ids().collect()
    }
}

pub fn apply_path(p: &FlipPath) -> Result<PathResult> {
    let mut current = p.start.clone();
    let mut flips = Vec::with_capacity(p.steps.len());
    for (step, &e) in p.steps.iter().enumerate() {
        let f = flip(&current, e).map_err(|source| Error::PathStep {
            step,
            source: Box::new(source),
        })?;
        current = f.result.clone();
        flips.push(f);
    }
    Ok(PathResult {
        end: current,
        flips,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    Bigon,
    Square,
    Pentagon,
}

impl RelationKind {
    pub fn len(self) -> usize {
        match self {
            RelationKind::Bigon => 2,
            RelationKind::Square => 4,
            RelationKind::Pentagon => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Bigon => "bigon",
            RelationKind::Square => "square",
            RelationKind::Pentagon => "pentagon",
        }
    }

    pub fn all() -> [RelationKind; 3] {
        [
            RelationKind::Bigon,
            RelationKind::Square,
            RelationKind::Pentagon,
        ]
    }
}

impl std::str::FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bigon" => Ok(RelationKind::Bigon),
            "square" => Ok(RelationKind::Square),
            "pentagon" => Ok(RelationKind::Pentagon),
            other => Err(Error::Syntax {
                line: 0,
                column: 0,
                message: format!("unknown relation `{other}`"),
            }),
        }
    }
}

/// Edge correspondence end -> start a relation word must realize. Labels
/// follow edge indices, and around a pentagon the two diagonal labels come
/// back exchanged.
pub fn expected_closing_map(
    kind: RelationKind,
    steps: &[EdgeId],
    num_edges: usize,
) -> Result<Vec<EdgeId>> {
    if steps.len() != kind.len() {
        return Err(Error::RelationShape {
            kind: kind.name(),
            expected: kind.len(),
            got: steps.len(),
        });
    }
    let mut map: Vec<EdgeId> = (0..num_edges).map(EdgeId).collect();
    if kind == RelationKind::Pentagon {
        let (e, g) = (steps[0], steps[1]);
        map.swap(e.0, g.0);
    }
    Ok(map)
}

/// Outcome of checking a relation word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub kind: RelationKind,
    /// The end triangulation is the start, via the expected correspondence.
    pub endpoint_matches: bool,
    /// The coordinate change along the word, followed by the closing
    /// relabeling, fixes every sampled point.
    pub coordinates_identity: bool,
    pub points_checked: usize,
}

impl RelationReport {
    pub fn holds(&self) -> bool {
        self.endpoint_matches && self.coordinates_identity
    }
}

/// Isomorphism end -> start realizing the closing map of a relation word.
pub fn closing_relabeling(
    p: &FlipPath,
    kind: RelationKind,
    end: &IdealTriangulation,
) -> Result<Option<Relabeling>> {
    let map = expected_closing_map(kind, &p.steps, p.start.num_edges())?;
    let constraints: Vec<Option<EdgeId>> = map.into_iter().map(Some).collect();
    Ok(find_isomorphisms(end, &p.start, &constraints, 1)
        .into_iter()
        .next())
}

/// Checks that `p` is a relation of the given kind: its endpoint is the
/// start triangulation and the induced shear coordinate change is the
/// identity at `samples` random positive rational points.
pub fn verify_relation<R: Rng>(
    p: &FlipPath,
    kind: RelationKind,
    samples: usize,
    rng: &mut R,
) -> Result<RelationReport> {
    expected_closing_map(kind, &p.steps, p.start.num_edges())?;
    let result = apply_path(p)?;
    let closing = closing_relabeling(p, kind, &result.end)?;
    let mut report = RelationReport {
        kind,
        endpoint_matches: closing.is_some(),
        coordinates_identity: false,
        points_checked: 0,
    };
    if let Some(closing) = closing {
        let mut all = true;
        for _ in 0..samples {
            let x = random_positive_point(p.start.num_edges(), rng);
            let moved = compose_path_map(p, &x)?;
            let back = crate::shear::pull_back(&closing, &moved);
            report.points_checked += 1;
            if back != x {
                all = false;
                break;
            }
        }
        report.coordinates_identity = all;
    }
    Ok(report)
}

/// Flippable edges whose squares have four distinct triangles.
pub fn disjoint_square_pairs(t: &IdealTriangulation) -> Vec<(EdgeId, EdgeId)> {
    let flippable: Vec<EdgeId> = t.edge_ids().filter(|&e| t.is_flippable(e)).collect();
    let tris = |e: EdgeId| {
        let [x, y] = t.edge_slots(e);
        [x.tri, y.tri]
    };
    let mut out = Vec::new();
    for (i, &e) in flippable.iter().enumerate() {
        for &g in &flippable[i + 1..] {
            let (te, tg) = (tris(e), tris(g));
            if te.iter().all(|x| !tg.contains(x)) {
                out.push((e, g));
            }
        }
    }
    out
}

/// Ordered pairs `(e, g)` of flippable edges whose squares share exactly one
/// triangle, with three distinct triangles in all: a pentagon.
pub fn pentagon_pairs(t: &IdealTriangulation) -> Vec<(EdgeId, EdgeId)> {
    let flippable: Vec<EdgeId> = t.edge_ids().filter(|&e| t.is_flippable(e)).collect();
    let tris = |e: EdgeId| {
        let [x, y] = t.edge_slots(e);
        [x.tri, y.tri]
    };
    let mut out = Vec::new();
    for &e in &flippable {
        for &g in &flippable {
            if e == g {
                continue;
            }
            let (te, tg) = (tris(e), tris(g));
            let shared = te.iter().filter(|x| tg.contains(x)).count();
            if shared == 1 {
                out.push((e, g));
            }
        }
    }
    out
}

/// A random relation word of the given kind starting at `t`, if `t` has a
/// configuration supporting one.
pub fn random_relation_word<R: Rng>(
    t: &IdealTriangulation,
    kind: RelationKind,
    rng: &mut R,
) -> Option<FlipPath> {
    let steps = match kind {
        RelationKind::Bigon => {
            let flippable: Vec<EdgeId> = t.edge_ids().filter(|&e| t.is_flippable(e)).collect();
            let &e = flippable.choose(rng)?;
            vec![e, e]
        }
        RelationKind::Square => {
            let &(e, g) = disjoint_square_pairs(t).choose(rng)?;
            let (e, g) = if rng.gen() { (e, g) } else { (g, e) };
            vec![e, g, e, g]
        }
        RelationKind::Pentagon => {
            let &(e, g) = pentagon_pairs(t).choose(rng)?;
            vec![e, g, e, g, e]
        }
    };
    Some(FlipPath::new(t.clone(), steps))
}

/// A random walk of `len` flips from `t`.
pub fn random_walk<R: Rng>(t: &IdealTriangulation, len: usize, rng: &mut R) -> FlipPath {
    let mut current = t.clone();
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        let flippable: Vec<EdgeId> = current
            .edge_ids()
            .filter(|&e| current.is_flippable(e))
            .collect();
        let Some(&e) = flippable.choose(rng) else {
            break;
        };
        current = flip(&current, e).expect("edge checked flippable").result;
        steps.push(e);
    }
    FlipPath::new(t.clone(), steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonical_code;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn torus_flip_is_isomorphic_to_source() {
        let t = fixtures::torus().triangulation;
        for e in t.edge_ids() {
            let f = flip(&t, e).unwrap();
            assert_eq!(canonical_code(&f.result), canonical_code(&t));
            assert_eq!(f.result.num_punctures(), 1);
        }
    }

    #[test]
    fn flip_twice_restores_gluing() {
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for e in t.edge_ids().filter(|&e| t.is_flippable(e)) {
                let once = flip(t, e).unwrap().result;
                let twice = flip(&once, e).unwrap().result;
                let back = closing_relabeling(
                    &FlipPath::new(t.clone(), vec![e, e]),
                    RelationKind::Bigon,
                    &twice,
                )
                .unwrap();
                assert!(back.is_some());
            }
        }
    }

    #[test]
    fn sphere4_flip_matches_hand_table() {
        // tetrahedron faces (1,2,3), (0,3,2), (0,1,3), (0,2,1)
        let t = fixtures::four_punctured_sphere().triangulation;
        let e = t.edge_by_name("v23").unwrap();
        let f = flip(&t, e).unwrap();
        assert_eq!(f.result.num_punctures(), 4);
        assert_eq!(f.result.num_edges(), 6);
        let degrees: Vec<usize> = {
            let mut d: Vec<usize> = f.result.puncture_cycles().iter().map(|c| c.len()).collect();
            d.sort();
            d
        };
        assert_eq!(degrees, vec![2, 2, 4, 4]);
        let gluing: Vec<(Slot, Slot)> = f.result.gluing_pairs();
        let [s1, s2] = t.edge_slots(e);
        assert_eq!(gluing[e.0], (Slot::new(s1.tri, 0), Slot::new(s2.tri, 0)));
    }

    #[test]
    fn unflippable_edge_reported() {
        let t = fixtures::self_folded_sphere();
        let e = t.edge_ids().find(|&e| !t.is_flippable(e)).unwrap();
        assert_eq!(flip(&t, e).unwrap_err(), Error::NotFlippable(e));
        let p = FlipPath::new(t.clone(), vec![e]);
        assert!(matches!(
            apply_path(&p),
            Err(Error::PathStep { step: 0, .. })
        ));
    }

    #[test]
    fn relations_hold_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for surf in fixtures::catalog() {
            for kind in RelationKind::all() {
                if let Some(p) = random_relation_word(&surf.triangulation, kind, &mut rng) {
                    let r = verify_relation(&p, kind, 3, &mut rng).unwrap();
                    assert!(r.holds(), "{} {:?}: {r:?}", surf.name, kind);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let t = fixtures::torus().triangulation;
        let p = FlipPath::new(t, vec![EdgeId(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            verify_relation(&p, RelationKind::Bigon, 1, &mut rng),
            Err(Error::RelationShape { .. })
        ));
    }

    #[test]
    fn path_file_round_trip() {
        let t = fixtures::torus().triangulation;
        let p = FlipPath::parse(t.clone(), "flip z\n# comment\nflip x\n").unwrap();
        assert_eq!(p.steps.len(), 2);
        assert_eq!(FlipPath::parse(t, &p.serialize()).unwrap(), p);
    }
}
