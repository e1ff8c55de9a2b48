//! Built-in surfaces, curves and mapping classes.

use crate::canonical::find_isomorphisms;
use crate::curves::{NormalMulticurve, Turn};
use crate::flip::{apply_path, FlipPath};
use crate::pinch::{lift_relabeling, pinch, pinched_action, preserves_sides};
use crate::shear::MappingClass;
use crate::trace::{parse_family, DegenerationFamily};
use crate::triangulation::{EdgeId, IdealTriangulation, Slot};

#[derive(Debug, Clone)]
pub struct Surface {
    pub name: &'static str,
    pub description: &'static str,
    pub triangulation: IdealTriangulation,
    pub curves: Vec<(String, NormalMulticurve)>,
}

impl Surface {
    pub fn curve(&self, name: &str) -> Option<&NormalMulticurve> {
        self.curves.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

fn gluing(
    n: usize,
    pairs: &[((usize, usize), (usize, usize))],
    names: Option<&[&str]>,
) -> IdealTriangulation {
    let pairs: Vec<(Slot, Slot)> = pairs
        .iter()
        .map(|&((a, b), (c, d))| (Slot::new(a, b), Slot::new(c, d)))
        .collect();
    IdealTriangulation::from_gluing(
        n,
        &pairs,
        names.map(|ns| ns.iter().map(|s| s.to_string()).collect()),
        false,
    )
    .expect("fixture triangulation is valid")
}

fn curves(
    t: &IdealTriangulation,
    list: &[(&str, &[(&str, u64)])],
) -> Vec<(String, NormalMulticurve)> {
    list.iter()
        .map(|(name, ws)| {
            let mut w = vec![0; t.num_edges()];
            for (e, v) in ws.iter() {
                w[t.edge_by_name(e).expect("fixture edge").0] = *v;
            }
            let c = NormalMulticurve::new(t, &w).expect("fixture curve is valid");
            (name.to_string(), c)
        })
        .collect()
}

/// The once-punctured torus on two triangles. Edge `y` is the one the curve
/// `gamma` misses; `z` is the edge through which `gamma` enters its left turn.
pub fn torus() -> Surface {
    let raw = gluing(
        2,
        &[((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))],
        None,
    );
    let y = 1;
    let mut w = vec![1; 3];
    w[y] = 0;
    let gamma = NormalMulticurve::new(&raw, &w).expect("curve on the torus");
    let z = gamma.components()[0]
        .itinerary
        .steps
        .iter()
        .find(|s| s.turn == Turn::Left)
        .expect("gamma turns left once")
        .edge
        .0;
    let x = 3 - y - z;
    let mut names = vec![String::new(); 3];
    names[x] = "x".into();
    names[y] = "y".into();
    names[z] = "z".into();
    let t = raw.with_names(names).expect("distinct names");
    let curves = curves(
        &t,
        &[
            ("gamma", &[("x", 1), ("z", 1)]),
            ("alpha", &[("x", 1), ("y", 1)]),
            ("beta", &[("y", 1), ("z", 1)]),
        ],
    );
    Surface {
        name: "torus1",
        description: "once-punctured torus",
        triangulation: t,
        curves,
    }
}

/// A named curve of the torus fixture, on a triangulation with the same
/// edge names.
pub fn torus_curve(t: &IdealTriangulation, name: &str) -> NormalMulticurve {
    let surf = torus();
    let c = surf.curve(name).expect("torus curve");
    let mut w = vec![0; t.num_edges()];
    for e in surf.triangulation.edge_ids() {
        w[t.edge_by_name(surf.triangulation.name(e))
            .expect("same names")
            .0] = c.weight(e);
    }
    NormalMulticurve::new(t, &w).expect("torus curve")
}

pub fn thrice_punctured_sphere() -> Surface {
    let t = gluing(
        2,
        &[((0, 0), (1, 0)), ((0, 1), (1, 2)), ((0, 2), (1, 1))],
        Some(&["a", "b", "c"]),
    );
    Surface {
        name: "sphere3",
        description: "thrice-punctured sphere",
        triangulation: t,
        curves: Vec::new(),
    }
}

/// The boundary of a tetrahedron with vertices 0..3; edge `vij` joins
/// punctures `i` and `j`.
pub fn four_punctured_sphere() -> Surface {
    let faces = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
    let raw = IdealTriangulation::from_faces(&faces).expect("tetrahedron");
    let names = raw
        .edge_ids()
        .map(|e| {
            let s = raw.edge_slots(e)[0];
            let f = faces[s.tri];
            let (u, v) = (f[(s.side + 1) % 3], f[(s.side + 2) % 3]);
            format!("v{}{}", u.min(v), u.max(v))
        })
        .collect();
    let t = raw.with_names(names).expect("distinct names");
    let curves = curves(
        &t,
        &[
            ("gamma", &[("v02", 1), ("v03", 1), ("v12", 1), ("v13", 1)]),
            ("alpha", &[("v01", 1), ("v03", 1), ("v12", 1), ("v23", 1)]),
            ("beta", &[("v01", 1), ("v02", 1), ("v13", 1), ("v23", 1)]),
            // passes the squares of v02 and v13 only around their corners
            (
                "delta",
                &[
                    ("v01", 1),
                    ("v02", 2),
                    ("v03", 1),
                    ("v12", 1),
                    ("v13", 2),
                    ("v23", 1),
                ],
            ),
        ],
    );
    Surface {
        name: "sphere4",
        description: "four-punctured sphere",
        triangulation: t,
        curves,
    }
}

/// The torus with one triangle subdivided from a new puncture.
pub fn twice_punctured_torus() -> Surface {
    let t = gluing(
        4,
        &[
            ((0, 0), (3, 0)),
            ((1, 0), (3, 1)),
            ((2, 0), (3, 2)),
            ((0, 1), (1, 2)),
            ((1, 1), (2, 2)),
            ((2, 1), (0, 2)),
        ],
        Some(&["p", "q", "r", "s", "u", "v"]),
    );
    let curves = curves(&t, TORUS2_CURVES);
    Surface {
        name: "torus2",
        description: "twice-punctured torus",
        triangulation: t,
        curves,
    }
}

const TORUS2_CURVES: &[(&str, &[(&str, u64)])] = &[
    ("gamma", &[("p", 1), ("q", 1), ("s", 1)]),
    ("alpha", &[("p", 1), ("q", 1), ("u", 1), ("v", 1)]),
    ("delta", &[("p", 2), ("q", 2), ("r", 2), ("s", 2), ("u", 2)]),
    (
        "gamma_alpha",
        &[("p", 2), ("q", 2), ("s", 1), ("u", 1), ("v", 1)],
    ),
];

/// Sphere with three punctures whose triangulation has a self-folded
/// triangle: edge 0 is glued to itself inside triangle 0.
pub fn self_folded_sphere() -> IdealTriangulation {
    gluing(
        2,
        &[((0, 0), (0, 1)), ((0, 2), (1, 0)), ((1, 1), (1, 2))],
        None,
    )
}

pub fn catalog() -> Vec<Surface> {
    vec![
        torus(),
        thrice_punctured_sphere(),
        four_punctured_sphere(),
        twice_punctured_torus(),
    ]
}

pub fn surface(name: &str) -> Option<Surface> {
    catalog().into_iter().find(|s| s.name == name)
}

/// Dehn twist of the once-punctured torus along `gamma`: one flip at `z`
/// followed by the isomorphism that carries the transported `gamma` back to
/// `gamma`.
pub fn torus_twist() -> MappingClass {
    let surf = torus();
    let t = surf.triangulation.clone();
    let gamma = surf.curve("gamma").expect("gamma").clone();
    let z = t.edge_by_name("z").expect("edge z");
    let path = FlipPath::new(t.clone(), vec![z]);
    let result = apply_path(&path).expect("z is flippable");
    let moved = crate::curves::transport_weights(&result.flips[0], &gamma).expect("transport");
    let none = vec![None; t.num_edges()];
    let p = pinch(&t, &gamma).expect("pinch along gamma");
    // among the maps carrying gamma to itself, the twist is the one keeping
    // each side of gamma; the other differs by the elliptic involution
    find_isomorphisms(&result.end, &t, &none, usize::MAX)
        .into_iter()
        .filter(|r| {
            result
                .end
                .edge_ids()
                .all(|e| moved.weight(e) == gamma.weight(r.map_edge(e)))
        })
        .map(|r| MappingClass::new(path.clone(), r).expect("valid mapping class"))
        .find(|f| {
            let action = pinched_action(f, &p).expect("pinched action");
            let pi = &action.pi;
            let (target, lifted) = lift_relabeling(&pi.end, &f.relabel, &t).expect("lift");
            preserves_sides(&p, pi, &lifted, &target)
        })
        .expect("some isomorphism fixes gamma and its sides")
}

const TORUS_PINCH_GAMMA: &str = "\
gamma x=1 z=1
edge z coeff 1 power 1
edge x coeff 1 power -1
target y=1
target f0=1
target f1=1
flip z
";

const TORUS_CONSTANT: &str = "\
edge x coeff 2 power 0
edge y coeff 1/2 power 0
target x=2
target y=1/2
target z=1
flip z
";

const TORUS2_PINCH_GAMMA: &str = "\
gamma p=1 q=1 s=1
edge p coeff 1 power -1
edge q coeff 1 power 1
flip r
";

/// A degenerating family of a fixture surface together with its test
/// curves (disjoint from the pinched curve). Targets not listed in the
/// family text are 1.
pub fn family(
    surface_name: &str,
    name: &str,
) -> Option<(DegenerationFamily, Vec<NormalMulticurve>)> {
    let surf = surface(surface_name)?;
    let (text, tests): (&str, &[&str]) = match (surface_name, name) {
        ("torus1", "pinch-gamma") => (TORUS_PINCH_GAMMA, &[]),
        ("torus1", "constant") => (TORUS_CONSTANT, &["gamma", "alpha"]),
        ("torus2", "pinch-gamma") => (TORUS2_PINCH_GAMMA, &["alpha"]),
        _ => return None,
    };
    let t = &surf.triangulation;
    let mut text = text.to_string();
    let weights = parse_family_curve(t, &text);
    let p = pinch(
        t,
        &NormalMulticurve::new(t, &weights).expect("family curve"),
    )
    .expect("pinch");
    for f in p.induced.edge_ids() {
        let name = p.induced.name(f);
        if !text.contains(&format!("target {name}=")) {
            text.push_str(&format!("target {name}=1\n"));
        }
    }
    let fam = parse_family(t, &text).expect("fixture family is valid");
    let tests = tests
        .iter()
        .map(|n| surf.curve(n).expect("fixture curve").clone())
        .collect();
    Some((fam, tests))
}

fn parse_family_curve(t: &IdealTriangulation, text: &str) -> Vec<u64> {
    let mut w = vec![0; t.num_edges()];
    for line in text.lines().filter(|l| l.starts_with("gamma ")) {
        for tok in line.split_whitespace().skip(1) {
            let (e, v) = tok.split_once('=').expect("edge=weight");
            w[edge(t, e).0] = v.parse().expect("weight");
        }
    }
    w
}

pub fn family_names() -> &'static [(&'static str, &'static str)] {
    &[
        ("torus1", "pinch-gamma"),
        ("torus1", "constant"),
        ("torus2", "pinch-gamma"),
    ]
}

/// Edge of `t` carrying the given name in the fixture.
pub fn edge(t: &IdealTriangulation, name: &str) -> EdgeId {
    t.edge_by_name(name).expect("fixture edge name")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_loads() {
        let counts: Vec<(usize, usize, usize)> = catalog()
            .iter()
            .map(|s| {
                let t = &s.triangulation;
                (t.num_triangles(), t.num_edges(), t.num_punctures())
            })
            .collect();
        assert_eq!(counts, [(2, 3, 1), (2, 3, 3), (4, 6, 4), (4, 6, 2)]);
    }

    #[test]
    fn torus_names_follow_gamma() {
        let s = torus();
        let g = s.curve("gamma").unwrap();
        let it = &g.components()[0].itinerary;
        let left = it.steps.iter().find(|s| s.turn == Turn::Left).unwrap();
        assert_eq!(s.triangulation.name(left.edge), "z");
    }

    #[test]
    fn twist_is_not_trivial() {
        let f = torus_twist();
        assert!(!f.relabel.is_identity_on_edges() || !f.path.steps.is_empty());
        let alpha = torus_curve(f.base(), "alpha");
        assert_ne!(f.image_weights(alpha.weights()).unwrap(), alpha.weights());
    }

    #[test]
    fn twist_matches_torus_formulas_in_root_coordinates() {
        use crate::shear::{mapping_class_map, ShearVector};
        use num_rational::BigRational;
        // x -> 1/z, y -> (1 + z^2) y, z -> x / (1 + z^-2), written in the
        // square roots of our shears
        let f = torus_twist();
        let t = f.base();
        let q = |n: i64| BigRational::from_integer(n.into());
        for (x, y, z) in [(1, 2, 3), (2, 5, 7), (3, 1, 2)] {
            let (x, y, z) = (q(x), q(y), q(z));
            let mut v = vec![q(0); 3];
            for (n, r) in [("x", &x), ("y", &y), ("z", &z)] {
                v[edge(t, n).0] = r * r;
            }
            let image = mapping_class_map(&f, &ShearVector::new(v).unwrap()).unwrap();
            let zz = &z * &z;
            let expected = [
                ("x", q(1) / &z),
                ("y", (q(1) + &zz) * &y),
                ("z", &x / (q(1) + q(1) / &zz)),
            ];
            for (n, r) in expected {
                assert_eq!(image.get(edge(t, n)), &(&r * &r), "{n}");
            }
        }
    }
}
