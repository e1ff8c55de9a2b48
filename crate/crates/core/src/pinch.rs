//! Pinching a triangulation along a multicurve.
//!
//! Cutting the triangles of `λ` along the arcs of `γ` leaves, in each
//! triangle, corner and band cells (bigons between two segments of edges)
//! and one central cell. Collapsing the bigons identifies segments; the
//! resulting classes are the edges of the induced triangulation `λ_γ`, whose
//! triangles are the central cells. Triangle `t` of `λ_γ` is the central cell
//! of triangle `t` of `λ`, with the same side numbering.
//!
//! Segments of edge `e` are numbered `0..=w(e)` from the start of its first
//! slot.

use crate::canonical::{find_isomorphisms, Relabeling};
use crate::curves::{crosses_square, transport_weights, Arc, NormalMulticurve};
use crate::error::{Error, Result};
use crate::flip::{apply_path, flip, FlipPath};
use crate::shear::{
    path_coordinate_map, CoordinateMap, MapStep, MappingClass, Scalar, ShearVector,
};
use crate::triangulation::{EdgeId, IdealTriangulation, Slot};

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Clone)]
pub struct PinchResult {
    pub source: IdealTriangulation,
    pub curve: NormalMulticurve,
    pub induced: IdealTriangulation,
    offset: Vec<usize>,
    class: Vec<EdgeId>,
    /// `k[e][f]`: number of segments of `e` in class `f`
    k: Vec<Vec<u64>>,
    /// the two punctures of `λ_γ` created by each component
    pub new_punctures: Vec<Vec<usize>>,
    /// puncture of `λ` that each puncture of `λ_γ` comes from, if any
    pub old_puncture: Vec<Option<usize>>,
}

impl PinchResult {
    pub fn multiplicity(&self, e: EdgeId, f: EdgeId) -> u64 {
        self.k[e.0][f.0]
    }

    pub fn k_matrix(&self) -> &[Vec<u64>] {
        &self.k
    }

    /// Class of segment `j` of edge `e`, counted from its first slot.
    pub fn segment_class(&self, e: EdgeId, j: u64) -> EdgeId {
        self.class[self.offset[e.0] + j as usize]
    }

    pub fn num_segments(&self, e: EdgeId) -> u64 {
        self.curve.weight(e) + 1
    }

    /// Class of the central segment of `e` seen from its first slot.
    pub fn central_class(&self, e: EdgeId) -> EdgeId {
        self.induced.edge_of(self.source.edge_slots(e)[0])
    }

    /// `y(f) = Π_e x(e)^k(e,f)`.
    pub fn theta_eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::one(); self.induced.num_edges()];
        for (e, row) in self.k.iter().enumerate() {
            for (f, &m) in row.iter().enumerate() {
                for _ in 0..m {
                    y[f] = y[f].clone() * x[e].clone();
                }
            }
        }
        y
    }

    /// Logarithms of `Θ` from logarithms of `x`.
    pub fn theta_log(&self, log_x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.induced.num_edges()];
        for (e, row) in self.k.iter().enumerate() {
            for (f, &m) in row.iter().enumerate() {
                y[f] += m as f64 * log_x[e];
            }
        }
        y
    }

    /// Renders the multiplicity matrix as TSV: rows `e`, columns `f`.
    pub fn k_table(&self) -> String {
        let mut out = String::from("e\\f");
        for f in self.induced.edge_ids() {
            out.push('\t');
            out.push_str(self.induced.name(f));
        }
        out.push('\n');
        for e in self.source.edge_ids() {
            out.push_str(self.source.name(e));
            for f in self.induced.edge_ids() {
                out.push_str(&format!("\t{}", self.multiplicity(e, f)));
            }
            out.push('\n');
        }
        out
    }
}

fn global_segment(
    t: &IdealTriangulation,
    c: &NormalMulticurve,
    offset: &[usize],
    slot: Slot,
    local: u64,
) -> usize {
    let e = t.edge_of(slot);
    let j = if t.edge_slots(e)[0] == slot {
        local
    } else {
        c.weight(e) - local
    };
    offset[e.0] + j as usize
}

pub fn pinch(t: &IdealTriangulation, c: &NormalMulticurve) -> Result<PinchResult> {
    if c.weights().len() != t.num_edges() {
        return Err(Error::Arity {
            expected: t.num_edges(),
            got: c.weights().len(),
        });
    }
    let mut offset = Vec::with_capacity(t.num_edges());
    let mut total = 0;
    for e in t.edge_ids() {
        offset.push(total);
        total += c.weight(e) as usize + 1;
    }
    let w = |s: Slot| c.weight(t.edge_of(s));
    let seg = |s: Slot, local: u64| global_segment(t, c, &offset, s, local);
    let mut uf = UnionFind::new(total);
    for tri in 0..t.num_triangles() {
        let counts = c.corner_counts(tri);
        for corner in 0..3 {
            let before = Slot::new(tri, (corner + 2) % 3);
            let after = Slot::new(tri, (corner + 1) % 3);
            for k in 0..counts[corner] {
                uf.union(seg(before, k), seg(after, w(after) - k));
            }
        }
    }
    let central = |s: Slot| seg(s, c.corner_counts(s.tri)[(s.side + 1) % 3]);

    // group central slots by class, in order of the smallest segment
    let mut roots: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<Slot>> = Vec::new();
    let mut slots: Vec<Slot> = (0..3 * t.num_triangles()).map(Slot::from_index).collect();
    slots.sort_by_key(|&s| (uf.find(central(s)), s.index()));
    for s in slots {
        let r = uf.find(central(s));
        match roots.last() {
            Some(&last) if last == r => members.last_mut().expect("nonempty").push(s),
            _ => {
                roots.push(r);
                members.push(vec![s]);
            }
        }
    }
    let mut pairs = Vec::with_capacity(members.len());
    for m in &members {
        if m.len() != 2 {
            return Err(Error::Mismatch(format!(
                "segment class with {} central sides",
                m.len()
            )));
        }
        let is_first = |s: Slot| t.edge_slots(t.edge_of(s))[0] == s;
        let (a, b) = (m[0], m[1]);
        pairs.push(if !is_first(a) && is_first(b) {
            (b, a)
        } else {
            (a, b)
        });
    }
    let names: Vec<String> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, _))| {
            let e = t.edge_of(a);
            if c.weight(e) == 0 {
                t.name(e).to_string()
            } else {
                let mut name = format!("f{k}");
                while t.edge_by_name(&name).is_ok() {
                    name.push('_');
                }
                name
            }
        })
        .collect();
    let induced = IdealTriangulation::from_gluing(t.num_triangles(), &pairs, Some(names), true)?;

    let class_of_root: std::collections::HashMap<usize, EdgeId> = roots
        .iter()
        .enumerate()
        .map(|(f, &r)| (r, EdgeId(f)))
        .collect();
    let mut class = Vec::with_capacity(total);
    for g in 0..total {
        let r = uf.find(g);
        let f = class_of_root
            .get(&r)
            .copied()
            .ok_or_else(|| Error::Mismatch("segment class without a central side".into()))?;
        class.push(f);
    }
    let mut k = vec![vec![0u64; induced.num_edges()]; t.num_edges()];
    for e in t.edge_ids() {
        for j in 0..=c.weight(e) as usize {
            k[e.0][class[offset[e.0] + j].0] += 1;
        }
    }

    let mut new_punctures = vec![Vec::new(); c.num_components()];
    let mut old_puncture = Vec::with_capacity(induced.num_punctures());
    for (p, cycle) in induced.puncture_cycles().iter().enumerate() {
        let corner = cycle[0];
        let count = c.corner_counts(corner.tri)[corner.corner];
        if count == 0 {
            old_puncture.push(Some(t.puncture_of(corner)));
        } else {
            old_puncture.push(None);
            let owner = c.arc_component(Arc {
                tri: corner.tri,
                corner: corner.corner,
                k: count - 1,
            });
            new_punctures[owner].push(p);
        }
    }

    Ok(PinchResult {
        source: t.clone(),
        curve: c.clone(),
        induced,
        offset,
        class,
        k,
        new_punctures,
        old_puncture,
    })
}

pub fn theta(p: &PinchResult, x: &ShearVector) -> Result<ShearVector> {
    if x.len() != p.source.num_edges() {
        return Err(Error::Arity {
            expected: p.source.num_edges(),
            got: x.len(),
        });
    }
    ShearVector::new(p.theta_eval(x.values()))
}

/// The image of a flip path under pinching.
#[derive(Debug, Clone)]
pub struct PiGamma {
    /// path on `p.induced`
    pub image: FlipPath,
    /// for every source step, the image step it became, or `None` when the
    /// curve crosses the square straight through
    pub step_image: Vec<Option<usize>>,
    /// pinch of the path's end by the transported curve
    pub end: PinchResult,
    /// isomorphism from the image path's end to `end.induced`
    pub tracked: Relabeling,
    /// punctures of `p.induced` to punctures of the image path's end
    pub image_punctures: Vec<usize>,
}

impl PiGamma {
    /// Coordinate change from `p.induced` to `end.induced`.
    pub fn coordinate_map(&self) -> Result<CoordinateMap> {
        Ok(path_coordinate_map(&self.image)?.then(CoordinateMap::relabel(self.tracked.clone())))
    }
}

/// Edge correspondence between induced triangulations before and after a
/// flip at `e`, read off from the segments of the other edges.
fn class_constraints(
    old: &PinchResult,
    new: &PinchResult,
    e: EdgeId,
    back: &Relabeling,
) -> Result<Vec<Option<EdgeId>>> {
    // back: image edges -> old induced edges; invert to old -> image
    let mut to_image = vec![EdgeId(0); old.induced.num_edges()];
    for (h, &f) in back.edge_map().iter().enumerate() {
        to_image[f.0] = EdgeId(h);
    }
    let mut out: Vec<Option<EdgeId>> = vec![None; old.induced.num_edges()];
    for g in old.source.edge_ids().filter(|&g| g != e) {
        for j in 0..old.num_segments(g) {
            let h = to_image[old.segment_class(g, j).0];
            let f = new.segment_class(g, j);
            match out[h.0] {
                Some(prev) if prev != f => {
                    return Err(Error::Mismatch(format!(
                        "segment classes split at edge {}",
                        old.source.name(g)
                    )))
                }
                _ => out[h.0] = Some(f),
            }
        }
    }
    Ok(out)
}

/// Maps a flip path on `λ` to a flip path on `λ_γ`, transporting the curve
/// along the way. Flips whose square `γ` crosses straight through are
/// dropped; the others become the flip of the class of the central segment.
pub fn pi_gamma(p: &PinchResult, path: &FlipPath) -> Result<PiGamma> {
    if path.start != p.source {
        return Err(Error::Mismatch(
            "path does not start at the pinched triangulation".into(),
        ));
    }
    let mut cur = p.clone();
    let mut image_tri = p.induced.clone();
    let mut image_steps = Vec::new();
    let mut step_image = Vec::new();
    // image edges -> cur.induced edges
    let mut track = Relabeling::identity(&p.induced);
    let mut image_punctures: Vec<usize> = (0..p.induced.num_punctures()).collect();
    for (i, &e) in path.steps.iter().enumerate() {
        let wrap = |source: Error| Error::PathStep {
            step: i + 1,
            source: Box::new(source),
        };
        let fl = flip(&cur.source, e).map_err(wrap)?;
        let crossed = crosses_square(&cur.source, &cur.curve, e).map_err(wrap)?;
        let moved = transport_weights(&fl, &cur.curve).map_err(wrap)?;
        let next = pinch(&fl.result, &moved).map_err(wrap)?;
        let mut constraints = class_constraints(&cur, &next, e, &track).map_err(wrap)?;
        if crossed {
            step_image.push(None);
        } else {
            let f = cur.central_class(e);
            let h = EdgeId(
                track
                    .edge_map()
                    .iter()
                    .position(|&g| g == f)
                    .expect("tracking is a bijection"),
            );
            let image_flip = flip(&image_tri, h).map_err(wrap)?;
            let moved_punctures = image_flip.puncture_map();
            for q in image_punctures.iter_mut() {
                *q = moved_punctures[*q];
            }
            image_tri = image_flip.result;
            step_image.push(Some(image_steps.len()));
            image_steps.push(h);
            constraints[h.0] = Some(next.central_class(e));
        }
        track = find_isomorphisms(&image_tri, &next.induced, &constraints, 1)
            .into_iter()
            .next()
            .ok_or_else(|| wrap(Error::NoIsomorphism))?;
        cur = next;
    }
    Ok(PiGamma {
        image: FlipPath::new(p.induced.clone(), image_steps),
        step_image,
        end: cur,
        tracked: track,
        image_punctures,
    })
}

/// The isomorphism `pinch(λ_end, γ_end) -> pinch(λ, I(γ_end))` induced by
/// an isomorphism `I: λ_end -> λ`, which maps central cells to central cells.
pub fn lift_relabeling(
    from: &PinchResult,
    relabel: &Relabeling,
    onto: &IdealTriangulation,
) -> Result<(PinchResult, Relabeling)> {
    let mut w = vec![0; onto.num_edges()];
    for e in from.source.edge_ids() {
        w[relabel.map_edge(e).0] = from.curve.weight(e);
    }
    let curve = NormalMulticurve::new(onto, &w)?;
    let target = pinch(onto, &curve)?;
    let lifted = Relabeling::from_triangle_map(
        &from.induced,
        &target.induced,
        relabel.triangle_map().to_vec(),
    )?;
    Ok((target, lifted))
}

/// The pinched action of a mapping class on the stratum of `p.curve`.
#[derive(Debug, Clone)]
pub struct PinchedAction {
    /// `pinch(λ, I(γ_end))`, the chart the action lands in
    pub target: PinchResult,
    pub map: CoordinateMap,
    pub pi: PiGamma,
}

/// Whether the pinched map from `p.induced` to `target.induced` fixes every
/// puncture created by the curve, so that no side of a component is swapped
/// with the other. Only meaningful when `target` pinches the same curve.
pub fn preserves_sides(
    p: &PinchResult,
    pi: &PiGamma,
    lifted: &Relabeling,
    target: &PinchResult,
) -> bool {
    let tracked = pi.tracked.puncture_map(
        &apply_path(&pi.image)
            .map(|r| r.end)
            .unwrap_or_else(|_| p.induced.clone()),
        &pi.end.induced,
    );
    let lifted = lifted.puncture_map(&pi.end.induced, &target.induced);
    p.new_punctures
        .iter()
        .flatten()
        .all(|&q| lifted[tracked[pi.image_punctures[q]]] == q)
}

pub fn pinched_action(f: &MappingClass, p: &PinchResult) -> Result<PinchedAction> {
    let pi = pi_gamma(p, &f.path)?;
    let (target, lifted) = lift_relabeling(&pi.end, &f.relabel, f.base())?;
    let map = pi.coordinate_map()?.then(CoordinateMap::relabel(lifted));
    Ok(PinchedAction { target, map, pi })
}

pub fn pinched_action_map(
    f: &MappingClass,
    p: &PinchResult,
    y: &ShearVector,
) -> Result<ShearVector> {
    Ok(pinched_action(f, p)?.map.apply(y))
}

/// Whether a coordinate map acts as the identity on edges, ignoring any
/// triangle permutation.
pub fn is_identity_map(m: &CoordinateMap) -> bool {
    m.steps().iter().all(|s| match s {
        MapStep::Relabel(r) => r.is_identity_on_edges(),
        MapStep::Flip { .. } => false,
    })
}

/// The curve `α`, disjoint from `γ`, seen on the pinched surface.
///
/// Pinching the union shows how the arcs nest at every corner; an arc of `α`
/// survives into the central cell of `λ_γ` exactly when every arc of `γ` at
/// that corner lies inside it.
pub fn induced_curve(p: &PinchResult, alpha: &NormalMulticurve) -> Result<NormalMulticurve> {
    let t = &p.source;
    let union = p.curve.union(t, alpha)?;
    let is_gamma: Vec<bool> = union
        .components()
        .iter()
        .map(|c| p.curve.components().iter().any(|g| g.weights == c.weights))
        .collect();
    let mut counts = vec![[0u64; 3]; t.num_triangles()];
    for (tri, row) in counts.iter_mut().enumerate() {
        let uc = union.corner_counts(tri);
        for corner in 0..3 {
            let outer_gamma = (0..uc[corner])
                .filter(|&k| is_gamma[union.arc_component(Arc { tri, corner, k })])
                .max();
            let start = outer_gamma.map_or(0, |k| k + 1);
            row[corner] = uc[corner] - start;
        }
    }
    let g = &p.induced;
    let mut w = vec![None; g.num_edges()];
    for tri in 0..g.num_triangles() {
        for s in 0..3 {
            let v = counts[tri][(s + 1) % 3] + counts[tri][(s + 2) % 3];
            let e = g.edge_of(Slot::new(tri, s));
            match w[e.0] {
                Some(prev) if prev != v => {
                    return Err(Error::Mismatch(format!(
                        "induced weights disagree on edge {}",
                        g.name(e)
                    )))
                }
                _ => w[e.0] = Some(v),
            }
        }
    }
    let w: Vec<u64> = w
        .into_iter()
        .map(|v| v.expect("every edge has a side"))
        .collect();
    NormalMulticurve::new(g, &w)
}

/// Outcome of pushing a relation word through pinching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRelationReport {
    pub image_len: usize,
    /// the image path ends at `λ_γ` again, through the lifted closing map
    pub endpoint_matches: bool,
    pub coordinates_identity: bool,
}

impl ImageRelationReport {
    pub fn holds(&self) -> bool {
        self.endpoint_matches && self.coordinates_identity
    }
}

/// Checks that the image of a relation word under pinching is again a
/// relation: it closes up on `λ_γ` and its coordinate change is the
/// identity at random points.
pub fn verify_image_relation<R: rand::Rng>(
    p: &PinchResult,
    word: &FlipPath,
    kind: crate::flip::RelationKind,
    samples: usize,
    rng: &mut R,
) -> Result<ImageRelationReport> {
    let end = apply_path(word)?.end;
    let map = crate::flip::expected_closing_map(kind, &word.steps, word.start.num_edges())?;
    let constraints: Vec<Option<EdgeId>> = map.into_iter().map(Some).collect();
    let pi = pi_gamma(p, word)?;
    // a relation closes up by a map isotopic to the identity, which keeps
    // both sides of every component of the curve
    let mut closing = None;
    for candidate in find_isomorphisms(&end, &word.start, &constraints, usize::MAX) {
        let (target, lifted) = lift_relabeling(&pi.end, &candidate, &p.source)?;
        if target.curve.weights() == p.curve.weights() && preserves_sides(p, &pi, &lifted, &target)
        {
            closing = Some(lifted);
            break;
        }
    }
    let mut report = ImageRelationReport {
        image_len: pi.image.steps.len(),
        endpoint_matches: closing.is_some(),
        coordinates_identity: false,
    };
    if report.endpoint_matches {
        let lifted = closing.expect("checked above");
        let m = pi.coordinate_map()?.then(CoordinateMap::relabel(lifted));
        report.coordinates_identity = (0..samples).all(|_| {
            let y = crate::shear::random_positive_point(p.induced.num_edges(), rng);
            m.apply(&y) == y
        });
    }
    Ok(report)
}

/// Applies a path and pinches its end, for callers that only need `λ'_γ`.
pub fn pinch_after_path(p: &PinchResult, path: &FlipPath) -> Result<PinchResult> {
    let result = apply_path(path)?;
    let mut c = p.curve.clone();
    for fl in &result.flips {
        c = transport_weights(fl, &c)?;
    }
    pinch(&result.end, &c)
}
