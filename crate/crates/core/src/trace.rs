//! Trace functions of closed curves, lengths, shearing cocycles and
//! degenerating families of shear coordinates.
//!
//! A curve's trace is the trace of the product of its domino matrices, one
//! per crossing, with `w` the square root of the shear of the edge through
//! which the strand enters the triangle:
//! `L(w) = [[w, w], [0, 1/w]]` for a left turn and
//! `R(w) = [[w, 0], [1/w, 1/w]]` for a right turn.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::curves::{NormalMulticurve, StrandItinerary, Turn};
use crate::error::{Error, Result};
use crate::flip::{apply_path, FlipPath};
use crate::pinch::{induced_curve, pi_gamma, pinch, PinchResult};
use crate::shear::{path_coordinate_map, rational_to_f64, RootShearVector, Scalar, ShearVector};
use crate::triangulation::{EdgeId, IdealTriangulation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominoDiagram {
    pub cells: Vec<(Turn, EdgeId)>,
}

type Matrix<T> = [[T; 2]; 2];

fn domino<T: Scalar + Zero>(turn: Turn, w: T) -> Matrix<T> {
    let inv = T::one() / w.clone();
    match turn {
        Turn::Left => [[w.clone(), w], [T::zero(), inv]],
        Turn::Right => [[w, T::zero()], [inv.clone(), inv]],
    }
}

fn mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let entry =
        |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

impl DominoDiagram {
    pub fn from_itinerary(it: &StrandItinerary) -> Self {
        DominoDiagram {
            cells: it.steps.iter().map(|s| (s.turn, s.edge)).collect(),
        }
    }

    /// Diagram of a one-component curve.
    pub fn of_curve(c: &NormalMulticurve) -> Result<Self> {
        Ok(Self::from_itinerary(&c.expect_simple()?.itinerary))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut cells = self.cells.clone();
        let n = cells.len().max(1);
        cells.rotate_left(k % n);
        DominoDiagram { cells }
    }

    /// Trace of the ordered matrix product, given square roots of shears.
    pub fn trace<T: Scalar + Zero>(&self, roots: &[T]) -> T {
        let id = [[T::one(), T::zero()], [T::zero(), T::one()]];
        let m = self.cells.iter().fold(id, |acc, &(turn, e)| {
            mul(&acc, &domino(turn, roots[e.0].clone()))
        });
        m[0][0].clone() + m[1][1].clone()
    }

    /// Sum over closed row sequences of the products of matrix entries: the
    /// admissible paths through the diagram.
    pub fn path_sum<T: Scalar + Zero>(&self, roots: &[T]) -> T {
        let n = self.cells.len();
        let mats: Vec<Matrix<T>> = self
            .cells
            .iter()
            .map(|&(turn, e)| domino(turn, roots[e.0].clone()))
            .collect();
        let mut total = T::zero();
        for rows in 0u64..(1u64 << n) {
            let row = |i: usize| ((rows >> (i % n)) & 1) as usize;
            let term = mats
                .iter()
                .enumerate()
                .fold(T::one(), |acc, (i, m)| acc * m[row(i)][row(i + 1)].clone());
            total = total + term;
        }
        total
    }
}

/// Exact trace at a point given by rational square roots of its shears.
pub fn trace_exact(roots: &RootShearVector, c: &NormalMulticurve) -> Result<BigRational> {
    Ok(DominoDiagram::of_curve(c)?.trace(roots.roots()))
}

/// Exact trace when every shear is a rational square.
pub fn trace(t: &IdealTriangulation, x: &ShearVector, c: &NormalMulticurve) -> Result<BigRational> {
    trace_exact(&x.rational_roots(t)?, c)
}

pub fn trace_f64(x: &[f64], c: &NormalMulticurve) -> Result<f64> {
    let roots: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    Ok(DominoDiagram::of_curve(c)?.trace(&roots))
}

/// Length of the geodesic with the given trace, `2 arccosh(|tr| / 2)`;
/// zero for parabolic and elliptic traces.
pub fn length_from_trace(tr: f64) -> f64 {
    let half = tr.abs() / 2.0;
    if half <= 1.0 {
        0.0
    } else {
        2.0 * half.acosh()
    }
}

pub fn length(x: &[f64], c: &NormalMulticurve) -> Result<f64> {
    Ok(length_from_trace(trace_f64(x, c)?))
}

/// Length from logarithmic shears; the roots are taken in log space so that
/// very large and very small shears do not overflow.
pub fn length_log(log_x: &[f64], c: &NormalMulticurve) -> Result<f64> {
    let roots: Vec<f64> = log_x.iter().map(|l| (l / 2.0).exp()).collect();
    Ok(length_from_trace(DominoDiagram::of_curve(c)?.trace(&roots)))
}

/// `σ = Σ log x(e)` over the edges crossed after leaving the triangle of
/// step `from` up to entering the triangle of step `to` (cyclically).
pub fn shearing_cocycle(log_x: &[f64], it: &StrandItinerary, from: usize, to: usize) -> f64 {
    let n = it.len();
    let mut sum = 0.0;
    let mut i = from % n;
    while i != to % n {
        i = (i + 1) % n;
        sum += log_x[it.steps[i].edge.0];
    }
    sum
}

/// First pair of consecutive steps turning left then right, or right then
/// left.
pub fn find_pattern(it: &StrandItinerary, first: Turn) -> Option<(usize, usize)> {
    let n = it.len();
    (0..n).find_map(|i| {
        let j = (i + 1) % n;
        (it.steps[i].turn == first && it.steps[j].turn == first.flipped()).then_some((i, j))
    })
}

/// Shear coordinates `x_e(t) = c_e t^(p_e)` pinching a multicurve.
#[derive(Debug, Clone)]
pub struct DegenerationFamily {
    pub base: IdealTriangulation,
    pub curve: NormalMulticurve,
    pub coeff: Vec<BigRational>,
    pub power: Vec<i64>,
    /// limit point on the pinched triangulation
    pub target: ShearVector,
    pub grid: Vec<f64>,
    /// optional flip path for the diagram gap
    pub path: Option<FlipPath>,
}

/// The default grid `t = 10^(-k/2)`, `k = 0..=12`.
pub fn default_grid() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect()
}

impl DegenerationFamily {
    pub fn pinched(&self) -> Result<PinchResult> {
        pinch(&self.base, &self.curve)
    }

    /// Checks that `Θ(x(t))` is constant: every class sees total power zero
    /// and the coefficients multiply to the target.
    pub fn validate(&self) -> Result<PinchResult> {
        let p = self.pinched()?;
        let n = self.base.num_edges();
        if self.coeff.len() != n || self.power.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: self.coeff.len().min(self.power.len()),
            });
        }
        if self.target.len() != p.induced.num_edges() {
            return Err(Error::Arity {
                expected: p.induced.num_edges(),
                got: self.target.len(),
            });
        }
        let coeff = ShearVector::new(self.coeff.clone())?;
        let limit = p.theta_eval(coeff.values());
        for f in p.induced.edge_ids() {
            let total: i64 = self
                .base
                .edge_ids()
                .map(|e| p.multiplicity(e, f) as i64 * self.power[e.0])
                .sum();
            if total != 0 {
                return Err(Error::Convergence(format!(
                    "class {} has total power {total}",
                    p.induced.name(f)
                )));
            }
            if limit[f.0] != *self.target.get(f) {
                return Err(Error::Convergence(format!(
                    "class {} tends to {}, not to the target {}",
                    p.induced.name(f),
                    limit[f.0],
                    self.target.get(f)
                )));
            }
        }
        Ok(p)
    }

    pub fn log_point(&self, t: f64) -> Vec<f64> {
        let lt = t.ln();
        self.coeff
            .iter()
            .zip(&self.power)
            .map(|(c, &p)| log_rational(c) + p as f64 * lt)
            .collect()
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.log_point(t).into_iter().map(f64::exp).collect()
    }
}

fn log_rational(v: &BigRational) -> f64 {
    match v.to_f64() {
        Some(f) if f > 0.0 && f.is_finite() => f.ln(),
        _ => {
            let n = v.numer().to_f64().unwrap_or(f64::MAX).ln();
            let d = v.denom().to_f64().unwrap_or(f64::MAX).ln();
            n - d
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerationReport {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DegenerationReport {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Columns whose names start with `prefix`.
    pub fn columns_with_prefix(&self, prefix: &str) -> Vec<(String, Vec<f64>)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.starts_with(prefix))
            .map(|(k, c)| (c.clone(), self.rows.iter().map(|r| r[k]).collect()))
            .collect()
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name)?.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Evaluates the family on its grid. Rows follow the grid order.
pub fn run_degeneration(
    fam: &DegenerationFamily,
    tests: &[NormalMulticurve],
) -> Result<DegenerationReport> {
    let p = fam.validate()?;
    let y_log: Vec<f64> = fam.target.values().iter().map(log_rational).collect();
    let y: Vec<f64> = fam.target.values().iter().map(rational_to_f64).collect();

    let gammas: Vec<NormalMulticurve> = (0..fam.curve.num_components())
        .map(|i| fam.curve.component_curve(&fam.base, i))
        .collect::<Result<_>>()?;
    let mut targets = Vec::new();
    for a in tests {
        let induced = induced_curve(&p, a)?;
        targets.push(length_log(&y_log, &induced)?);
    }

    let gap = match &fam.path {
        Some(path) => {
            let end = apply_path(path)?;
            let pi = pi_gamma(&p, path)?;
            Some((
                path_coordinate_map(path)?,
                end.end,
                pi.coordinate_map()?,
                pi.end,
            ))
        }
        None => None,
    };

    let mut columns = vec!["t".to_string()];
    columns.extend((0..gammas.len()).map(|i| format!("ell_gamma_{i}")));
    columns.extend(
        p.induced
            .edge_ids()
            .map(|f| format!("theta_err_{}", p.induced.name(f))),
    );
    for j in 0..tests.len() {
        columns.push(format!("ell_alpha_{j}"));
        columns.push(format!("ell_alpha_target_{j}"));
    }
    if let Some((_, _, _, end)) = &gap {
        columns.extend(
            end.induced
                .edge_ids()
                .map(|f| format!("diagram_gap_{}", end.induced.name(f))),
        );
    }

    let rows: Vec<Result<Vec<f64>>> = fam
        .grid
        .par_iter()
        .map(|&t| {
            let lx = fam.log_point(t);
            let mut row = vec![t];
            for g in &gammas {
                row.push(length_log(&lx, g)?);
            }
            let th = p.theta_log(&lx);
            row.extend(th.iter().zip(&y).map(|(l, yf)| (l.exp() - yf).abs()));
            for (a, target) in tests.iter().zip(&targets) {
                row.push(length_log(&lx, a)?);
                row.push(*target);
            }
            if let Some((phi, _, phi_pinched, end)) = &gap {
                let x: Vec<f64> = lx.iter().map(|l| l.exp()).collect();
                let lhs = end.theta_eval(&phi.eval(&x));
                let rhs = phi_pinched.eval(&p.theta_eval(&x));
                row.extend(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()));
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DegenerationReport { columns, rows })
}

/// Parses a family file:
///
/// ```text
/// gamma <edge>=<int> ...
/// edge <name> coeff <p>/<q> power <k>
/// target <induced edge>=<p>/<q>
/// grid default | grid <k0>:<k1> | grid list <t1>,<t2>,...
/// flip <edge>
/// ```
///
/// Edges missing an `edge` line get coefficient 1 and power 0; a missing
/// `gamma` line means the empty multicurve.
pub fn parse_family(t: &IdealTriangulation, text: &str) -> Result<DegenerationFamily> {
    let n = t.num_edges();
    let mut weights = vec![0u64; n];
    let mut coeff = vec![BigRational::from_integer(1.into()); n];
    let mut power = vec![0i64; n];
    let mut targets: Vec<(String, BigRational)> = Vec::new();
    let mut grid = default_grid();
    let mut flips = Vec::new();
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
        let toks: Vec<&str> = content.split_whitespace().collect();
        let number =
            |tok: &str| parse_number(tok).ok_or_else(|| syntax(format!("invalid number `{tok}`")));
        match toks[0] {
            "gamma" => {
                for tok in &toks[1..] {
                    let (name, v) = tok
                        .split_once('=')
                        .ok_or_else(|| syntax(format!("expected `<edge>=<int>`, got `{tok}`")))?;
                    weights[t.edge_by_name(name)?.0] = v
                        .parse()
                        .map_err(|_| syntax(format!("invalid weight `{v}`")))?;
                }
            }
            "edge" => {
                if toks.len() != 6 || toks[2] != "coeff" || toks[4] != "power" {
                    return Err(syntax(
                        "expected `edge <name> coeff <p>/<q> power <k>`".into(),
                    ));
                }
                let e = t.edge_by_name(toks[1])?;
                coeff[e.0] = number(toks[3])?;
                power[e.0] = toks[5]
                    .parse()
                    .map_err(|_| syntax(format!("invalid power `{}`", toks[5])))?;
            }
            "target" => {
                let (name, v) = toks
                    .get(1)
                    .and_then(|tok| tok.split_once('='))
                    .ok_or_else(|| syntax("expected `target <edge>=<p>/<q>`".into()))?;
                targets.push((name.to_string(), number(v)?));
            }
            "grid" => {
                grid = match toks.get(1).copied() {
                    Some("default") => default_grid(),
                    Some("list") => toks[2..]
                        .join("")
                        .split(',')
                        .map(|v| {
                            v.trim()
                                .parse::<f64>()
                                .map_err(|_| syntax(format!("invalid grid value `{v}`")))
                        })
                        .collect::<Result<_>>()?,
                    Some(range) => {
                        let (a, b) = range
                            .split_once(':')
                            .ok_or_else(|| syntax(format!("invalid grid `{range}`")))?;
                        let a: i32 = a
                            .parse()
                            .map_err(|_| syntax(format!("invalid grid `{range}`")))?;
                        let b: i32 = b
                            .parse()
                            .map_err(|_| syntax(format!("invalid grid `{range}`")))?;
                        (a..=b).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect()
                    }
                    None => return Err(syntax("empty grid".into())),
                };
            }
            "flip" => flips.push(
                toks.get(1)
                    .ok_or_else(|| syntax("expected `flip <edge>`".into()))?
                    .to_string(),
            ),
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    let curve = NormalMulticurve::new(t, &weights)?;
    let p = pinch(t, &curve)?;
    let mut y: Vec<Option<BigRational>> = vec![None; p.induced.num_edges()];
    for (name, v) in targets {
        y[p.induced.edge_by_name(&name)?.0] = Some(v);
    }
    let y = y
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::MissingWeight(p.induced.name(EdgeId(k)).into())))
        .collect::<Result<Vec<_>>>()?;
    let path = if flips.is_empty() {
        None
    } else {
        Some(FlipPath::parse(
            t.clone(),
            &flips
                .iter()
                .map(|f| format!("flip {f}\n"))
                .collect::<String>(),
        )?)
    };
    let fam = DegenerationFamily {
        base: t.clone(),
        curve,
        coeff,
        power,
        target: ShearVector::new(y)?,
        grid,
        path,
    };
    fam.validate()?;
    Ok(fam)
}

fn parse_number(tok: &str) -> Option<BigRational> {
    let tok = tok.trim();
    let v = if let Some((p, q)) = tok.split_once('/') {
        let q: num_bigint::BigInt = q.parse().ok()?;
        if q.is_zero() {
            return None;
        }
        BigRational::new(p.parse().ok()?, q)
    } else {
        BigRational::from_integer(tok.parse().ok()?)
    };
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::shear::{mapping_class_map, random_cusped_root_point, random_positive_point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn torus_roots(t: &IdealTriangulation, x: i64, y: i64, z: i64) -> RootShearVector {
        let mut v = vec![q(1); 3];
        for (n, val) in [("x", x), ("y", y), ("z", z)] {
            v[t.edge_by_name(n).unwrap().0] = q(val);
        }
        RootShearVector::new(v).unwrap()
    }

    #[test]
    fn torus_symmetric_point() {
        let s = fixtures::torus();
        let g = s.curve("gamma").unwrap();
        let tr = trace_exact(&torus_roots(&s.triangulation, 1, 1, 1), g).unwrap();
        assert_eq!(tr, q(3));
        let l = length_from_trace(3.0);
        assert!((l - 2.0 * 1.5f64.acosh()).abs() < 1e-12);
        assert!((l - 1.92485).abs() < 1e-5);
        assert_eq!(length_from_trace(2.0), 0.0);
    }

    #[test]
    fn torus_single_large_shear() {
        let s = fixtures::torus();
        let t = &s.triangulation;
        let g = s.curve("gamma").unwrap();
        // the edge entered before the left turn carries the doubled monomial
        let half = BigRational::new(9.into(), 2.into());
        assert_eq!(trace_exact(&torus_roots(t, 1, 1, 2), g).unwrap(), half);
        assert_eq!(trace_exact(&torus_roots(t, 2, 1, 1), g).unwrap(), q(3));
    }

    #[test]
    fn path_sum_equals_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for (name, c) in &surf.curves {
                if c.num_components() != 1 {
                    continue;
                }
                let d = DominoDiagram::of_curve(c).unwrap();
                let ones = vec![q(1); t.num_edges()];
                let count = d.path_sum(&ones);
                assert!(count.is_integer() && count > q(0));
                for _ in 0..3 {
                    let roots = random_positive_point(t.num_edges(), &mut rng);
                    assert_eq!(
                        d.trace(roots.values()),
                        d.path_sum(roots.values()),
                        "{name}"
                    );
                }
            }
        }
    }

    #[test]
    fn trace_invariant_under_rotation_and_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for (_, c) in &surf.curves {
                if c.num_components() != 1 {
                    continue;
                }
                let it = &c.components()[0].itinerary;
                let d = DominoDiagram::from_itinerary(it);
                let rev = DominoDiagram::from_itinerary(&it.reversed(t));
                let roots = random_positive_point(t.num_edges(), &mut rng);
                let tr = d.trace(roots.values());
                for k in 0..d.len() {
                    assert_eq!(d.rotated(k).trace(roots.values()), tr);
                }
                assert_eq!(rev.trace(roots.values()), tr);
            }
        }
    }

    #[test]
    fn trace_invariant_under_flips() {
        use crate::curves::transport_weights;
        use crate::flip::flip;
        use crate::shear::flip_coordinate_map;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for surf in fixtures::catalog() {
            let t = &surf.triangulation;
            for (name, c) in &surf.curves {
                if c.num_components() != 1 {
                    continue;
                }
                for e in t.edge_ids().filter(|&e| t.is_flippable(e)) {
                    let fl = flip(t, e).unwrap();
                    let moved = transport_weights(&fl, c).unwrap();
                    let x = random_positive_point(t.num_edges(), &mut rng);
                    let y = flip_coordinate_map(&fl).apply(&x);
                    let before = trace_f64(&x.to_f64(), c).unwrap();
                    let after = trace_f64(&y.to_f64(), &moved).unwrap();
                    assert!(
                        (before - after).abs() < 1e-9 * before,
                        "{name} {}",
                        t.name(e)
                    );
                }
            }
        }
    }

    #[test]
    fn twist_preserves_gamma_trace_exactly() {
        let f = fixtures::torus_twist();
        let t = f.base().clone();
        let g = fixtures::torus_curve(&t, "gamma");
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..5 {
            let (x, roots) = random_cusped_root_point(&t, &mut rng);
            let y = mapping_class_map(&f, &x).unwrap();
            assert_eq!(trace(&t, &y, &g).unwrap(), trace_exact(&roots, &g).unwrap());
        }
    }

    #[test]
    fn cocycle_diverges_along_turn_patterns() {
        let s = fixtures::torus();
        let it = &s.curve("gamma").unwrap().components()[0].itinerary;
        let (l, r) = find_pattern(it, Turn::Left).unwrap();
        let (r2, l2) = find_pattern(it, Turn::Right).unwrap();
        let (fam, _) = fixtures::family("torus1", "pinch-gamma").unwrap();
        let mut prev = (f64::NEG_INFINITY, f64::INFINITY);
        for &tt in &fam.grid {
            let lx = fam.log_point(tt);
            let up = shearing_cocycle(&lx, it, l, r);
            let down = shearing_cocycle(&lx, it, r2, l2);
            assert!(up >= prev.0 && down <= prev.1);
            prev = (up, down);
        }
        assert!(prev.0 > 10.0 && prev.1 < -10.0);
        assert_eq!(shearing_cocycle(&[0.0; 3], it, l, r), 0.0);
        let mut lx = vec![0.0; 3];
        lx[it.steps[r].edge.0] = 2.0;
        assert_eq!(shearing_cocycle(&lx, it, l, r), 2.0);
    }

    #[test]
    fn torus_family_pinches_gamma() {
        let (fam, tests) = fixtures::family("torus1", "pinch-gamma").unwrap();
        let report = run_degeneration(&fam, &tests).unwrap();
        let ell = report.column("ell_gamma_0").unwrap();
        assert!(ell.windows(2).all(|w| w[1] < w[0]));
        // trace 2 + t, so the length decays like 2 sqrt(t)
        let t = *fam.grid.last().unwrap();
        assert!((ell.last().unwrap() - 2.0 * t.sqrt()).abs() < 1e-8);
        for (_, col) in report.columns_with_prefix("theta_err_") {
            assert!(col.iter().all(|&v| v < 1e-12));
        }
        let gaps = report.columns_with_prefix("diagram_gap_");
        assert!(!gaps.is_empty());
        for (_, col) in gaps {
            assert!(col.windows(2).all(|w| w[1] <= w[0]));
            assert!(*col.last().unwrap() < 1e-5);
        }
    }

    #[test]
    fn constant_family_has_no_gap() {
        let (fam, tests) = fixtures::family("torus1", "constant").unwrap();
        let report = run_degeneration(&fam, &tests).unwrap();
        for (_, col) in report.columns_with_prefix("diagram_gap_") {
            assert!(col.iter().all(|&v| v == 0.0));
        }
        for (_, col) in report.columns_with_prefix("theta_err_") {
            assert!(col.iter().all(|&v| v < 1e-15));
        }
    }

    #[test]
    fn twice_punctured_torus_family() {
        let (fam, tests) = fixtures::family("torus2", "pinch-gamma").unwrap();
        let report = run_degeneration(&fam, &tests).unwrap();
        let ell = report.column("ell_alpha_0").unwrap();
        let target = report.column("ell_alpha_target_0").unwrap();
        for ((a, b), t) in ell.iter().zip(&target).zip(&fam.grid) {
            if *t < 1e-2 {
                assert!((a - b).abs() <= 10.0 * t, "t={t}: {a} vs {b}");
            }
        }
        assert!(report.last("ell_gamma_0").unwrap() < 1e-2);
    }

    #[test]
    fn family_violating_convergence_is_rejected() {
        let t = fixtures::torus().triangulation;
        let text = "gamma x=1 z=1\nedge z coeff 1 power 1\ntarget y=1\ntarget f0=1\ntarget f1=1\n";
        assert!(matches!(parse_family(&t, text), Err(Error::Convergence(_))));
    }

    #[test]
    fn csv_rows_follow_grid() {
        let (fam, tests) = fixtures::family("torus1", "pinch-gamma").unwrap();
        let report = run_degeneration(&fam, &tests).unwrap();
        assert_eq!(report.column("t").unwrap(), fam.grid);
        let csv = report.to_csv();
        assert!(csv.starts_with("t,ell_gamma_0,theta_err_"));
        assert_eq!(csv.lines().count(), fam.grid.len() + 1);
    }
}
