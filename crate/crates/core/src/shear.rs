//! Exponential shear coordinates and their transport along flips.
//!
//! A flip at `e` with square sides `(a, b, c, d)` and `z = x(e)` sends
//! `x(e') = 1/z`, multiplies each occurrence of an edge among `{a, c}` by
//! `1 + z` and each occurrence among `{b, d}` by `z / (1 + z)`.

use std::fmt;
use std::ops::{Add, Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::canonical::{find_isomorphisms, Relabeling};
use crate::error::{Error, Result};
use crate::flip::{apply_path, Flip, FlipPath, QuadSides};
use crate::triangulation::{EdgeId, IdealTriangulation, Slot};

/// Positive exact shear parameters, indexed by edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShearVector(Vec<BigRational>);

impl ShearVector {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositive(format!("#{k}")));
        }
        Ok(ShearVector(values))
    }

    pub fn ones(n: usize) -> Self {
        ShearVector(vec![BigRational::one(); n])
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> &BigRational {
        &self.0[e.0]
    }

    pub fn values(&self) -> &[BigRational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    /// Exact square roots, when every entry is the square of a rational.
    pub fn rational_roots(&self, t: &IdealTriangulation) -> Result<RootShearVector> {
        self.0
            .iter()
            .enumerate()
            .map(|(k, v)| {
                rational_sqrt(v).ok_or_else(|| Error::NoRationalRoot(t.name(EdgeId(k)).into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(RootShearVector)
    }
}

impl fmt::Display for ShearVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Square roots `w` of shear parameters, `x = w^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootShearVector(Vec<BigRational>);

impl RootShearVector {
    pub fn new(roots: Vec<BigRational>) -> Result<Self> {
        if let Some(k) = roots.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositive(format!("#{k}")));
        }
        Ok(RootShearVector(roots))
    }

    pub fn roots(&self) -> &[BigRational] {
        &self.0
    }

    pub fn squares(&self) -> ShearVector {
        ShearVector(self.0.iter().map(|w| w * w).collect())
    }
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // huge numerator and denominator: scale through logarithms
        let n = v.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = v.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn integer_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn rational_sqrt(v: &BigRational) -> Option<BigRational> {
    Some(BigRational::new(
        integer_sqrt(v.numer())?,
        integer_sqrt(v.denom())?,
    ))
}

/// Random point with numerators and denominators in `1..=12`.
pub fn random_positive_point<R: Rng>(n: usize, rng: &mut R) -> ShearVector {
    ShearVector(
        (0..n)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.gen_range(1..=12)),
                    BigInt::from(rng.gen_range(1..=12)),
                )
            })
            .collect(),
    )
}

/// Random cusped point, built from random λ-lengths.
pub fn random_cusped_point<R: Rng>(t: &IdealTriangulation, rng: &mut R) -> ShearVector {
    let l = random_lambda_lengths(t.num_edges(), rng);
    lambda_to_shear(&l, t)
}

/// Random point whose entries are squares of rationals, with its roots.
pub fn random_cusped_root_point<R: Rng>(
    t: &IdealTriangulation,
    rng: &mut R,
) -> (ShearVector, RootShearVector) {
    // shears of λ-lengths are ratios of products; squaring the λ-lengths
    // squares the shears
    let l = random_lambda_lengths(t.num_edges(), rng);
    let roots = lambda_to_shear(&l, t);
    let root = RootShearVector(roots.0);
    (root.squares(), root)
}

/// Product of shears around every puncture, each edge counted once per end.
pub fn puncture_products(t: &IdealTriangulation, x: &ShearVector) -> Vec<BigRational> {
    let mut out = vec![BigRational::one(); t.num_punctures()];
    for e in t.edge_ids() {
        for (p, count) in t.edge_end_counts(e) {
            for _ in 0..count {
                out[p] = &out[p] * x.get(e);
            }
        }
    }
    out
}

pub fn is_cusped(t: &IdealTriangulation, x: &ShearVector) -> bool {
    puncture_products(t, x).iter().all(|v| v.is_one())
}

pub fn check_cusped(t: &IdealTriangulation, x: &ShearVector) -> Result<()> {
    match puncture_products(t, x).iter().position(|v| !v.is_one()) {
        Some(p) => Err(Error::NotCusped(p)),
        None => Ok(()),
    }
}

/// Arithmetic needed to evaluate coordinate changes.
pub trait Scalar:
    Clone + One + Add<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
}

impl<T> Scalar for T where T: Clone + One + Add<Output = T> + Mul<Output = T> + Div<Output = T> {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapStep {
    Flip {
        edge: EdgeId,
        sides: QuadSides,
    },
    /// Pull back along an isomorphism from the current chart.
    Relabel(Relabeling),
}

impl MapStep {
    fn eval<T: Scalar>(&self, x: Vec<T>) -> Vec<T> {
        match self {
            MapStep::Flip { edge, sides } => {
                let z = x[edge.0].clone();
                let up = T::one() + z.clone();
                let down = z.clone() / up.clone();
                let mut out = x;
                for s in [sides.a, sides.c] {
                    out[s.0] = out[s.0].clone() * up.clone();
                }
                for s in [sides.b, sides.d] {
                    out[s.0] = out[s.0].clone() * down.clone();
                }
                out[edge.0] = T::one() / z;
                out
            }
            MapStep::Relabel(r) => {
                let mut out = x.clone();
                for (k, v) in x.into_iter().enumerate() {
                    out[r.map_edge(EdgeId(k)).0] = v;
                }
                out
            }
        }
    }
}

/// A composite coordinate change, evaluated pointwise.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoordinateMap {
    steps: Vec<MapStep>,
}

impl CoordinateMap {
    pub fn identity() -> Self {
        CoordinateMap { steps: Vec::new() }
    }

    pub fn relabel(r: Relabeling) -> Self {
        CoordinateMap {
            steps: vec![MapStep::Relabel(r)],
        }
    }

    pub fn steps(&self) -> &[MapStep] {
        &self.steps
    }

    /// This map followed by `next`.
    pub fn then(mut self, next: CoordinateMap) -> Self {
        self.steps.extend(next.steps);
        self
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.steps.iter().fold(x.to_vec(), |acc, s| s.eval(acc))
    }

    pub fn apply(&self, x: &ShearVector) -> ShearVector {
        ShearVector(self.eval(&x.0))
    }
}

pub fn flip_coordinate_map(fl: &Flip) -> CoordinateMap {
    CoordinateMap {
        steps: vec![MapStep::Flip {
            edge: fl.edge,
            sides: fl.sides,
        }],
    }
}

pub fn path_coordinate_map(p: &FlipPath) -> Result<CoordinateMap> {
    let result = apply_path(p)?;
    Ok(CoordinateMap {
        steps: result
            .flips
            .iter()
            .map(|fl| MapStep::Flip {
                edge: fl.edge,
                sides: fl.sides,
            })
            .collect(),
    })
}

pub fn compose_path_map(p: &FlipPath, x: &ShearVector) -> Result<ShearVector> {
    Ok(path_coordinate_map(p)?.apply(x))
}

/// Coordinates transported along an isomorphism: `y(r(e)) = x(e)`.
pub fn pull_back(r: &Relabeling, x: &ShearVector) -> ShearVector {
    ShearVector(MapStep::Relabel(r.clone()).eval(x.0.clone()))
}

/// A mapping class presented by a flip path from `base` and an isomorphism
/// from the path's end back to `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingClass {
    pub path: FlipPath,
    pub relabel: Relabeling,
    end: IdealTriangulation,
}

impl MappingClass {
    pub fn new(path: FlipPath, relabel: Relabeling) -> Result<Self> {
        let end = apply_path(&path)?.end;
        // rebuilding from the triangle map re-validates the isomorphism
        Relabeling::from_triangle_map(&end, &path.start, relabel.triangle_map().to_vec())?;
        Ok(MappingClass { path, relabel, end })
    }

    pub fn identity(t: &IdealTriangulation) -> Self {
        MappingClass {
            path: FlipPath::empty(t.clone()),
            relabel: Relabeling::identity(t),
            end: t.clone(),
        }
    }

    /// The mapping class given by `path` whose closing isomorphism has the
    /// given edge map, end -> base.
    pub fn with_edge_map(path: FlipPath, edge_map: &[EdgeId]) -> Result<Self> {
        let end = apply_path(&path)?.end;
        let constraints: Vec<Option<EdgeId>> = edge_map.iter().copied().map(Some).collect();
        let relabel = find_isomorphisms(&end, &path.start, &constraints, 1)
            .into_iter()
            .next()
            .ok_or(Error::NoIsomorphism)?;
        Ok(MappingClass { path, relabel, end })
    }

    pub fn base(&self) -> &IdealTriangulation {
        &self.path.start
    }

    pub fn end(&self) -> &IdealTriangulation {
        &self.end
    }

    pub fn coordinate_map(&self) -> Result<CoordinateMap> {
        Ok(path_coordinate_map(&self.path)?.then(CoordinateMap::relabel(self.relabel.clone())))
    }

    /// `self` followed by `g`: the coordinate map is that of `g` after that
    /// of `self`.
    pub fn then(&self, g: &MappingClass) -> Result<MappingClass> {
        let back = self.relabel.inverse();
        let mut steps = self.path.steps.clone();
        steps.extend(g.path.steps.iter().map(|&e| back.map_edge(e)));
        let path = FlipPath::new(self.base().clone(), steps);
        let edge_map: Vec<EdgeId> = self
            .relabel
            .edge_map()
            .iter()
            .map(|&e| g.relabel.map_edge(e))
            .collect();
        MappingClass::with_edge_map(path, &edge_map)
    }

    /// Normal coordinates of the image curve under the same transport.
    pub fn image_weights(&self, w: &[u64]) -> Result<Vec<u64>> {
        use crate::curves::{transport_weights, NormalMulticurve};
        let result = apply_path(&self.path)?;
        let mut c = NormalMulticurve::new(self.base(), w)?;
        for fl in &result.flips {
            c = transport_weights(fl, &c)?;
        }
        let mut out = vec![0; w.len()];
        for e in self.end.edge_ids() {
            out[self.relabel.map_edge(e).0] = c.weight(e);
        }
        Ok(out)
    }
}

pub fn mapping_class_map(f: &MappingClass, x: &ShearVector) -> Result<ShearVector> {
    Ok(f.coordinate_map()?.apply(x))
}

/// Parses a `.mcg` file: `flip <edge>` lines, then either `map <end>=<base>`
/// lines for every edge or `triangle <i> <j> <rotation>` lines for every
/// triangle. Without either the closing map is the identity on edges.
pub fn parse_mapping_class(t: &IdealTriangulation, text: &str) -> Result<MappingClass> {
    let mut steps = Vec::new();
    let mut edge_map: Vec<Option<EdgeId>> = vec![None; t.num_edges()];
    let mut tri_map: Vec<Option<(usize, usize)>> = vec![None; t.num_triangles()];
    let (mut any_edge, mut any_tri) = (false, false);
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: &str| Error::Syntax {
            line: lineno + 1,
            column: raw.find(content).unwrap_or(0) + 1,
            message: message.into(),
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks.as_slice() {
            ["flip", name] => steps.push(t.edge_by_name(name)?),
            ["map", pair] => {
                let (a, b) = pair
                    .split_once('=')
                    .ok_or_else(|| syntax("expected `map <end-edge>=<base-edge>`"))?;
                edge_map[t.edge_by_name(a)?.0] = Some(t.edge_by_name(b)?);
                any_edge = true;
            }
            ["triangle", i, j, r] => {
                let num = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| syntax("expected `triangle <i> <j> <rotation>`"))
                };
                let i = num(i)?;
                if i >= tri_map.len() {
                    return Err(syntax("triangle index out of range"));
                }
                tri_map[i] = Some((num(j)?, num(r)?));
                any_tri = true;
            }
            _ => return Err(syntax("expected `flip`, `map` or `triangle`")),
        }
    }
    let path = FlipPath::new(t.clone(), steps);
    if any_tri {
        let tri_map = tri_map
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::InvalidRelabeling)?;
        let end = apply_path(&path)?.end;
        let relabel = Relabeling::from_triangle_map(&end, t, tri_map)?;
        if any_edge
            && end
                .edge_ids()
                .any(|e| edge_map[e.0] != Some(relabel.map_edge(e)))
        {
            return Err(Error::InvalidRelabeling);
        }
        return MappingClass::new(path, relabel);
    }
    let edge_map: Vec<EdgeId> = if any_edge {
        edge_map
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::InvalidRelabeling)?
    } else {
        t.edge_ids().collect()
    };
    MappingClass::with_edge_map(path, &edge_map)
}

pub fn serialize_mapping_class(f: &MappingClass) -> String {
    let t = f.base();
    let mut out = f.path.serialize();
    for (i, (j, r)) in f.relabel.triangle_map().iter().enumerate() {
        out.push_str(&format!("triangle {i} {j} {r}\n"));
    }
    for e in f.end().edge_ids() {
        out.push_str(&format!(
            "map {}={}\n",
            t.name(e),
            t.name(f.relabel.map_edge(e))
        ));
    }
    out
}

/// Decorated λ-lengths, used as an independent oracle for the flip formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaLengthVector(Vec<BigRational>);

impl LambdaLengthVector {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositive(format!("#{k}")));
        }
        Ok(LambdaLengthVector(values))
    }

    pub fn values(&self) -> &[BigRational] {
        &self.0
    }
}

pub fn random_lambda_lengths<R: Rng>(n: usize, rng: &mut R) -> LambdaLengthVector {
    LambdaLengthVector(random_positive_point(n, rng).0)
}

/// Ptolemy relation: `l(e') l(e) = l(a) l(c) + l(b) l(d)`.
pub fn lambda_oracle_flip(l: &LambdaLengthVector, fl: &Flip) -> LambdaLengthVector {
    let v = &l.0;
    let s = fl.sides;
    let e = fl.edge.0;
    let mut out = v.clone();
    out[e] = (&v[s.a.0] * &v[s.c.0] + &v[s.b.0] * &v[s.d.0]) / &v[e];
    LambdaLengthVector(out)
}

/// Shear of every edge as a ratio of the λ-lengths around it: on each side
/// the next side counterclockwise over the previous one.
pub fn lambda_to_shear(l: &LambdaLengthVector, t: &IdealTriangulation) -> ShearVector {
    let len = |s: Slot| &l.0[t.edge_of(s).0];
    ShearVector(
        t.edge_ids()
            .map(|e| {
                t.edge_slots(e)
                    .iter()
                    .map(|&s| len(s.rotate(1)) / len(s.rotate(2)))
                    .fold(BigRational::one(), |acc, r| acc * r)
            })
            .collect(),
    )
}

fn parse_rational(tok: &str) -> Option<BigRational> {
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = tok.split_once('.') {
        let digits = format!("{int}{frac}");
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(n, d));
    }
    tok.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// A point read from a `.shv` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShearPoint {
    pub x: ShearVector,
    pub roots: Option<RootShearVector>,
    pub cusped: bool,
}

/// Parses `.shv` text: `<edge>=<p>/<q>` or decimal lines, an optional
/// `cusped` flag (checked), and an optional `roots` flag meaning the given
/// values are the square roots of the shears.
pub fn parse_shear(t: &IdealTriangulation, text: &str) -> Result<ShearPoint> {
    let mut values: Vec<Option<BigRational>> = vec![None; t.num_edges()];
    let (mut cusped, mut roots) = (false, false);
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax {
            line: lineno + 1,
            column: raw.find(content).unwrap_or(0) + 1,
            message,
        };
        match content {
            "cusped" => cusped = true,
            "roots" => roots = true,
            _ => {
                let (name, value) = content
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("expected `<edge>=<value>`, got `{content}`")))?;
                let e = t.edge_by_name(name.trim())?;
                let v = parse_rational(value.trim())
                    .ok_or_else(|| syntax(format!("invalid number `{}`", value.trim())))?;
                if !v.is_positive() {
                    return Err(Error::NonPositive(name.trim().into()));
                }
                values[e.0] = Some(v);
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::MissingWeight(t.name(EdgeId(k)).into())))
        .collect::<Result<Vec<_>>>()?;
    let (x, roots) = if roots {
        let r = RootShearVector(values);
        (r.squares(), Some(r))
    } else {
        (ShearVector(values), None)
    };
    if cusped {
        check_cusped(t, &x)?;
    }
    Ok(ShearPoint { x, roots, cusped })
}

pub fn serialize_shear(t: &IdealTriangulation, x: &ShearVector) -> String {
    t.edge_ids()
        .map(|e| format!("{}={}\n", t.name(e), x.get(e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flip::flip;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn mapping_class_file_round_trip() {
        let f = crate::fixtures::torus_twist();
        let text = serialize_mapping_class(&f);
        assert_eq!(parse_mapping_class(f.base(), &text).unwrap(), f);
        let edges_only: String = text
            .lines()
            .filter(|l| !l.starts_with("triangle"))
            .map(|l| format!("{l}\n"))
            .collect();
        let g = parse_mapping_class(f.base(), &edges_only).unwrap();
        assert_eq!(g.relabel.edge_map(), f.relabel.edge_map());
        let x = f.base().edge_by_name("x").unwrap();
        let wrong = if f.relabel.map_edge(x).0 == 1 {
            "z"
        } else {
            "y"
        };
        let bad: String = text
            .lines()
            .map(|l| {
                if l.starts_with("map x=") {
                    format!("map x={wrong}\n")
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        assert!(parse_mapping_class(f.base(), &bad).is_err());
        assert!(matches!(
            parse_mapping_class(f.base(), "twist z"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn distinct_sides_example() {
        let s = fixtures::four_punctured_sphere().triangulation;
        let e = s.edge_ids().find(|&e| s.is_flippable(e)).unwrap();
        let fl = flip(&s, e).unwrap();
        let sides = fl.sides.as_array();
        assert!(sides
            .iter()
            .all(|g| sides.iter().filter(|h| *h == g).count() == 1));
        let mut x = vec![BigRational::one(); s.num_edges()];
        x[fl.sides.a.0] = q(2, 1);
        x[e.0] = q(3, 1);
        let y = flip_coordinate_map(&fl).eval(&x);
        assert_eq!(y[fl.sides.a.0], q(8, 1));
        assert_eq!(y[e.0], q(1, 3));
    }

    #[test]
    fn torus_doubled_side_gains_square() {
        let t = fixtures::torus().triangulation;
        let z = t.edge_by_name("z").unwrap();
        let fl = flip(&t, z).unwrap();
        let s = fl.sides;
        assert_eq!(s.a, s.c);
        assert_eq!(s.b, s.d);
        let x = ShearVector::from_integers(&[2, 3, 5]).unwrap();
        let y = flip_coordinate_map(&fl).apply(&x);
        let zv = x.get(z).clone();
        let one = BigRational::one();
        assert_eq!(*y.get(s.a), x.get(s.a) * (&one + &zv) * (&one + &zv));
        assert_eq!(*y.get(z), one / zv);
    }

    #[test]
    fn all_ones_lambda_lengths() {
        let t = fixtures::torus().triangulation;
        let l = LambdaLengthVector::new(vec![BigRational::one(); 3]).unwrap();
        assert_eq!(lambda_to_shear(&l, &t), ShearVector::ones(3));
        let fl = flip(&t, EdgeId(0)).unwrap();
        assert_eq!(lambda_oracle_flip(&l, &fl).values()[0], q(2, 1));
    }

    #[test]
    fn oracle_equivalence_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for e in t.edge_ids().filter(|&e| t.is_flippable(e)) {
                let fl = flip(t, e).unwrap();
                for _ in 0..5 {
                    let l = random_lambda_lengths(t.num_edges(), &mut rng);
                    let lhs = lambda_to_shear(&lambda_oracle_flip(&l, &fl), &fl.result);
                    let rhs = flip_coordinate_map(&fl).apply(&lambda_to_shear(&l, t));
                    assert_eq!(lhs, rhs, "{} edge {}", surf.name, t.name(e));
                }
            }
        }
    }

    #[test]
    fn lambda_shears_are_cusped() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for surf in fixtures::catalog() {
            let x = random_cusped_point(&surf.triangulation, &mut rng);
            assert!(is_cusped(&surf.triangulation, &x), "{}", surf.name);
        }
    }

    #[test]
    fn flips_preserve_puncture_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for e in t.edge_ids().filter(|&e| t.is_flippable(e)) {
                let fl = flip(t, e).unwrap();
                let x = random_positive_point(t.num_edges(), &mut rng);
                let y = flip_coordinate_map(&fl).apply(&x);
                let before = puncture_products(t, &x);
                let after = puncture_products(&fl.result, &y);
                // puncture numbering may change under the flip
                let mut b = before;
                let mut a = after;
                b.sort();
                a.sort();
                assert_eq!(a, b, "{} edge {}", surf.name, t.name(e));
            }
        }
    }

    #[test]
    fn mapping_class_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = fixtures::torus_twist();
        let ff = f.then(&f).unwrap();
        for _ in 0..5 {
            let x = random_positive_point(3, &mut rng);
            let once = mapping_class_map(&f, &x).unwrap();
            let twice = mapping_class_map(&f, &once).unwrap();
            assert_eq!(mapping_class_map(&ff, &x).unwrap(), twice);
        }
        let id = MappingClass::identity(f.base());
        let x = random_positive_point(3, &mut rng);
        assert_eq!(mapping_class_map(&id, &x).unwrap(), x);
    }

    #[test]
    fn twist_fixes_gamma() {
        let f = fixtures::torus_twist();
        let t = f.base();
        let gamma = fixtures::torus_curve(t, "gamma");
        assert_eq!(f.image_weights(gamma.weights()).unwrap(), gamma.weights());
    }

    #[test]
    fn shv_round_trip_and_flags() {
        let t = fixtures::torus().triangulation;
        let p = parse_shear(&t, "x=3/2\ny=0.25\nz=8/3\n").unwrap();
        assert_eq!(*p.x.get(t.edge_by_name("y").unwrap()), q(1, 4));
        assert_eq!(parse_shear(&t, &serialize_shear(&t, &p.x)).unwrap().x, p.x);
        assert_eq!(
            parse_shear(&t, "cusped\nx=2\ny=1\nz=1\n").unwrap_err(),
            Error::NotCusped(0)
        );
        let r = parse_shear(&t, "roots\nx=2\ny=1\nz=1/2\n").unwrap();
        assert_eq!(*r.x.get(t.edge_by_name("x").unwrap()), q(4, 1));
        assert!(parse_shear(&t, "x=0\ny=1\nz=1\n").is_err());
    }

    #[test]
    fn rational_roots() {
        let t = fixtures::torus().triangulation;
        let x = ShearVector::new(vec![q(4, 9), q(1, 1), q(16, 1)]).unwrap();
        assert_eq!(x.rational_roots(&t).unwrap().roots()[0], q(2, 3));
        let bad = ShearVector::from_integers(&[2, 1, 1]).unwrap();
        assert!(matches!(
            bad.rational_roots(&t),
            Err(Error::NoRationalRoot(_))
        ));
    }
}
