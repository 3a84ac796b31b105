//! Homographic interval exchange transformations on intervals of RP^1, the
//! circle homeomorphisms they induce, and the one- and two-parameter families
//! used to glue tori.

use serde::{Deserialize, Serialize};

use crate::desitter::{y_plus_of, y_theta};
use crate::error::{Error, Result};
use crate::moebius::{cyclic_order, CyclicOrder, MoebiusMap, ProjectivePoint};

/// Membership snap at interval endpoints, in chart units.
const SNAP: f64 = 1e-9;
/// Endpoint matching tolerance for branch validation.
const ENDPOINT_TOL: f64 = 1e-9;

/// A fixed normalizing chart for `[left, right]`: the Möbius map sending
/// `(left, mid, right)` to `(0, 1/2, 1)`, where `mid` is the projective
/// bisector of the endpoints corrected to lie inside the interval.
pub fn interval_chart(left: &ProjectivePoint, right: &ProjectivePoint) -> Result<MoebiusMap> {
    let mut mid = ProjectivePoint::new(left.a() + right.a(), left.b() + right.b())?;
    if cyclic_order(left, &mid, right) != CyclicOrder::Positive {
        mid = mid.antipode();
    }
    MoebiusMap::from_triples(
        (left, &mid, right),
        (
            &ProjectivePoint::finite(0.0),
            &ProjectivePoint::finite(0.5),
            &ProjectivePoint::finite(1.0),
        ),
    )
}

/// A homographic interval exchange on `[left, right)`: branch `i` maps the
/// `i`-th top subinterval bijectively onto the `perm[i]`-th bottom one.
#[derive(Clone, Debug)]
pub struct Hiet {
    interval: (ProjectivePoint, ProjectivePoint),
    top_breaks: Vec<ProjectivePoint>,
    bottom_breaks: Vec<ProjectivePoint>,
    branches: Vec<MoebiusMap>,
    perm: Vec<usize>,
    chart: MoebiusMap,
    top_c: Vec<f64>,    // chart coords of top subinterval left ends; top_c[0] = 0
    bottom_c: Vec<f64>, // same for the bottom partition
}

impl Hiet {
    pub fn new(
        interval: (ProjectivePoint, ProjectivePoint),
        top_breaks: Vec<ProjectivePoint>,
        bottom_breaks: Vec<ProjectivePoint>,
        branches: Vec<MoebiusMap>,
        perm: Vec<usize>,
    ) -> Result<Self> {
        let n = branches.len();
        if n == 0 {
            return Err(Error::InvalidHiet { reason: "no branches".into() });
        }
        if top_breaks.len() != n - 1 || bottom_breaks.len() != n - 1 || perm.len() != n {
            return Err(Error::InvalidHiet { reason: "inconsistent break/branch counts".into() });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidHiet { reason: "perm is not a bijection".into() });
            }
            seen[p] = true;
        }
        let chart = interval_chart(&interval.0, &interval.1)
            .map_err(|e| Error::InvalidHiet { reason: format!("degenerate interval: {e}") })?;
        let coord = |p: &ProjectivePoint| chart.apply(p).affine();
        let mut top_c = vec![0.0];
        for b in &top_breaks {
            top_c.push(coord(b));
        }
        let mut bottom_c = vec![0.0];
        for b in &bottom_breaks {
            bottom_c.push(coord(b));
        }
        for w in [&top_c, &bottom_c] {
            for i in 1..w.len() {
                if !(w[i] > w[i - 1] && w[i] < 1.0) {
                    return Err(Error::InvalidHiet {
                        reason: "breaks not strictly increasing inside the interval".into(),
                    });
                }
            }
        }
        let h = Self {
            interval,
            top_breaks,
            bottom_breaks,
            branches,
            perm,
            chart,
            top_c,
            bottom_c,
        };
        h.validate_branches()?;
        Ok(h)
    }

    /// Endpoint and midpoint checks: branch `i` carries top piece `i` onto
    /// bottom piece `perm[i]` with matching endpoints, orientation preserved.
    fn validate_branches(&self) -> Result<()> {
        let n = self.branches.len();
        for i in 0..n {
            let (tl, tr) = self.top_piece_ends(i);
            let (bl, br) = self.bottom_piece_ends(self.perm[i]);
            let m = &self.branches[i];
            let il = m.apply(&tl);
            let ir = m.apply(&tr);
            if !il.approx_eq(&bl, ENDPOINT_TOL) || !ir.approx_eq(&br, ENDPOINT_TOL) {
                return Err(Error::InvalidHiet {
                    reason: format!(
                        "branch {i} endpoint images ({il}, {ir}) do not match bottom piece ({bl}, {br})"
                    ),
                });
            }
            // midpoint stays inside: excludes maps onto the complementary arc
            let tm = self.chart_inv(0.5 * (self.top_c[i] + self.top_end_c(i)));
            let im = self.chart.apply(&m.apply(&tm)).affine();
            let (lo, hi) = (self.bottom_c[self.perm[i]], self.bottom_end_c(self.perm[i]));
            if !(im > lo - SNAP && im < hi + SNAP) {
                return Err(Error::InvalidHiet {
                    reason: format!("branch {i} maps through the complementary arc"),
                });
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> (ProjectivePoint, ProjectivePoint) {
        self.interval
    }

    pub fn top_breaks(&self) -> &[ProjectivePoint] {
        &self.top_breaks
    }

    pub fn bottom_breaks(&self) -> &[ProjectivePoint] {
        &self.bottom_breaks
    }

    pub fn branches(&self) -> &[MoebiusMap] {
        &self.branches
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn top_end_c(&self, i: usize) -> f64 {
        if i + 1 < self.top_c.len() {
            self.top_c[i + 1]
        } else {
            1.0
        }
    }

    fn bottom_end_c(&self, j: usize) -> f64 {
        if j + 1 < self.bottom_c.len() {
            self.bottom_c[j + 1]
        } else {
            1.0
        }
    }

    fn top_piece_ends(&self, i: usize) -> (ProjectivePoint, ProjectivePoint) {
        let l = if i == 0 { self.interval.0 } else { self.top_breaks[i - 1] };
        let r = if i + 1 < self.top_c.len() { self.top_breaks[i] } else { self.interval.1 };
        (l, r)
    }

    fn bottom_piece_ends(&self, j: usize) -> (ProjectivePoint, ProjectivePoint) {
        let l = if j == 0 { self.interval.0 } else { self.bottom_breaks[j - 1] };
        let r = if j + 1 < self.bottom_c.len() { self.bottom_breaks[j] } else { self.interval.1 };
        (l, r)
    }

    fn chart_inv(&self, t: f64) -> ProjectivePoint {
        self.chart.inverse().apply(&ProjectivePoint::finite(t))
    }

    /// Chart coordinate of a point of `[left, right)`, snapped at the ends.
    fn coord_in(&self, p: &ProjectivePoint) -> Result<f64> {
        let mut t = self.chart.apply(p).affine();
        if (-SNAP..0.0).contains(&t) {
            t = 0.0;
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::OutOfInterval);
        }
        Ok(t)
    }

    /// Index of the half-open top piece containing `p` (closed on the left).
    pub fn top_index(&self, p: &ProjectivePoint) -> Result<usize> {
        let t = self.coord_in(p)?;
        Ok(self.top_c.partition_point(|&b| b <= t) - 1)
    }

    fn bottom_index(&self, p: &ProjectivePoint) -> Result<usize> {
        let t = self.coord_in(p)?;
        Ok(self.bottom_c.partition_point(|&b| b <= t) - 1)
    }

    pub fn eval(&self, p: &ProjectivePoint) -> Result<ProjectivePoint> {
        let i = self.top_index(p)?;
        Ok(self.branches[i].apply(p))
    }

    pub fn eval_inverse(&self, p: &ProjectivePoint) -> Result<ProjectivePoint> {
        let j = self.bottom_index(p)?;
        let i = self.perm.iter().position(|&q| q == j).expect("perm is a bijection");
        Ok(self.branches[i].inverse().apply(p))
    }

    /// `n`-th forward (`n < 0`: backward) iterate.
    pub fn iterate(&self, p: &ProjectivePoint, n: i64) -> Result<ProjectivePoint> {
        let mut q = *p;
        if n >= 0 {
            for _ in 0..n {
                q = self.eval(&q)?;
            }
        } else {
            for _ in 0..(-n) {
                q = self.eval_inverse(&q)?;
            }
        }
        Ok(q)
    }

    /// Branch indices visited by the forward orbit: letter `k` is the branch
    /// containing the `(k-1)`-th iterate.
    pub fn coding(&self, p: &ProjectivePoint, n: usize) -> Result<Vec<usize>> {
        let mut word = Vec::with_capacity(n);
        let mut q = *p;
        for _ in 0..n {
            let i = self.top_index(&q)?;
            word.push(i);
            q = self.branches[i].apply(&q);
        }
        Ok(word)
    }
}

/// Letters of 2-branch codings rendered as `a` (branch 0) and `b` (branch 1).
pub fn word_string(word: &[usize]) -> String {
    word.iter()
        .map(|&i| match i {
            0 => 'a',
            1 => 'b',
            k => char::from_digit(k as u32 % 36, 36).unwrap_or('?'),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct HietRepr {
    interval: [ProjectivePoint; 2],
    top_breaks: Vec<ProjectivePoint>,
    bottom_breaks: Vec<ProjectivePoint>,
    branches: Vec<MoebiusMap>,
    perm: Vec<usize>,
}

impl Serialize for Hiet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HietRepr {
            interval: [self.interval.0, self.interval.1],
            top_breaks: self.top_breaks.clone(),
            bottom_breaks: self.bottom_breaks.clone(),
            branches: self.branches.clone(),
            perm: self.perm.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hiet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HietRepr::deserialize(d)?;
        Hiet::new(
            (r.interval[0], r.interval[1]),
            r.top_breaks,
            r.bottom_breaks,
            r.branches,
            r.perm,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// One piece of a circle map in chart coordinates.
#[derive(Clone, Debug)]
pub enum Piece {
    Moebius(MoebiusMap),
    /// Constant value in chart coordinates (degree-one endomorphism branches).
    Constant(f64),
}

impl Piece {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Piece::Moebius(m) => m.apply_affine(t),
            Piece::Constant(c) => *c,
        }
    }
}

/// A circle map on `S^1 = [left, right] / (left ~ right)`, coordinatized by
/// `R/Z` through a fixed chart. Orientation-preserving homeomorphism for
/// interval exchanges, degree-one endomorphism for the boundary families.
#[derive(Clone, Debug)]
pub struct CircleMap {
    chart: MoebiusMap,
    interval: (ProjectivePoint, ProjectivePoint),
    breaks: Vec<f64>, // chart coords of piece left ends; breaks[0] = 0
    pieces: Vec<Piece>,
    offsets: Vec<f64>, // integer lift offsets per piece
    continuity_defect: f64,
    has_constant_piece: bool,
}

impl CircleMap {
    pub fn from_pieces(
        chart: MoebiusMap,
        interval: (ProjectivePoint, ProjectivePoint),
        breaks: Vec<f64>,
        pieces: Vec<Piece>,
    ) -> Self {
        let has_constant_piece = pieces.iter().any(|p| matches!(p, Piece::Constant(_)));
        let (offsets, continuity_defect) = lift_offsets(&breaks, &pieces);
        Self { chart, interval, breaks, pieces, offsets, continuity_defect, has_constant_piece }
    }

    /// The circle map induced by a HIET, on the chart fixed by
    /// `interval_chart` (or any caller-provided chart of the same interval).
    pub fn from_hiet(h: &Hiet) -> Self {
        Self::from_hiet_with_chart(h, h.chart)
    }

    pub fn from_hiet_with_chart(h: &Hiet, chart: MoebiusMap) -> Self {
        let coord = |p: &ProjectivePoint| {
            let t = chart.apply(p).affine();
            if (-SNAP..0.0).contains(&t) {
                0.0
            } else {
                t
            }
        };
        let inv = chart.inverse();
        let mut breaks = vec![0.0];
        for b in &h.top_breaks {
            breaks.push(coord(b));
        }
        let pieces = h
            .branches
            .iter()
            .map(|m| Piece::Moebius(chart.compose(m).compose(&inv)))
            .collect();
        Self::from_pieces(chart, h.interval, breaks, pieces)
    }

    /// The circle map of the inverse exchange: pieces live on the bottom
    /// partition and apply the inverse branches.
    pub fn from_hiet_inverse(h: &Hiet) -> Self {
        let coord = |p: &ProjectivePoint| {
            let t = h.chart.apply(p).affine();
            if (-SNAP..0.0).contains(&t) {
                0.0
            } else {
                t
            }
        };
        let inv_chart = h.chart.inverse();
        let mut breaks = vec![0.0];
        for b in &h.bottom_breaks {
            breaks.push(coord(b));
        }
        let mut pieces = Vec::with_capacity(h.branches.len());
        for j in 0..h.branches.len() {
            let i = h.perm.iter().position(|&q| q == j).expect("perm is a bijection");
            pieces.push(Piece::Moebius(
                h.chart.compose(&h.branches[i].inverse()).compose(&inv_chart),
            ));
        }
        Self::from_pieces(h.chart, h.interval, breaks, pieces)
    }

    pub fn chart(&self) -> &MoebiusMap {
        &self.chart
    }

    pub fn interval(&self) -> (ProjectivePoint, ProjectivePoint) {
        self.interval
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Worst wrap/junction mismatch of the lift; near zero for a continuous
    /// degree-one circle map.
    pub fn continuity_defect(&self) -> f64 {
        self.continuity_defect
    }

    pub fn is_endomorphism(&self) -> bool {
        self.has_constant_piece
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breaks.partition_point(|&b| b <= t).saturating_sub(1)
    }

    /// Monotone lift `F` with `F(0)` in `[0, 1)`, evaluated at any real `t`.
    pub fn lift(&self, t: f64) -> f64 {
        let k = t.floor();
        let mut frac = t - k;
        if frac >= 1.0 {
            // guard against rounding in the subtraction above
            frac = 0.0;
        }
        let i = self.piece_index(frac);
        self.pieces[i].eval(frac) + self.offsets[i] + k
    }

    /// The circle value in `[0, 1)`.
    pub fn eval_circle(&self, t: f64) -> f64 {
        self.lift(t).rem_euclid(1.0)
    }

    /// Evaluate on the underlying projective interval.
    pub fn apply_point(&self, p: &ProjectivePoint) -> ProjectivePoint {
        let mut t = self.chart.apply(p).affine();
        if (-SNAP..0.0).contains(&t) {
            t = 0.0;
        }
        let v = self.eval_circle(t.rem_euclid(1.0));
        self.chart.inverse().apply(&ProjectivePoint::finite(v))
    }

    /// Chart coordinate of a point (snapped into `[0, 1)`).
    pub fn coord(&self, p: &ProjectivePoint) -> f64 {
        let t = self.chart.apply(p).affine();
        if (-SNAP..0.0).contains(&t) {
            0.0
        } else {
            t.rem_euclid(1.0)
        }
    }

    pub fn point_at(&self, t: f64) -> ProjectivePoint {
        self.chart.inverse().apply(&ProjectivePoint::finite(t.rem_euclid(1.0)))
    }

    /// Composition `self âˆ˜ inner` on the common circle.
    pub fn compose(&self, inner: &CircleMap) -> Result<CircleMap> {
        if !self.interval.0.approx_eq(&inner.interval.0, 1e-9)
            || !self.interval.1.approx_eq(&inner.interval.1, 1e-9)
        {
            return Err(Error::IncompatibleCircle);
        }
        let mut cuts: Vec<f64> = inner.breaks.clone();
        // preimages of the outer breaks under the monotone lift of `inner`
        let f0 = inner.lift(0.0);
        for &b in &self.breaks {
            if inner.has_constant_piece {
                // endomorphism lifts are only non-decreasing; skip refining
                continue;
            }
            let target = f0 + (b - f0).rem_euclid(1.0);
            let mut lo = 0.0;
            let mut hi = 1.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if inner.lift(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if cuts.first().map_or(true, |&c| c > 1e-12) {
            cuts.insert(0, 0.0);
        } else {
            cuts[0] = 0.0;
        }
        let mut pieces = Vec::with_capacity(cuts.len());
        for (i, &c) in cuts.iter().enumerate() {
            let end = if i + 1 < cuts.len() { cuts[i + 1] } else { 1.0 };
            let tm = 0.5 * (c + end);
            let im = inner.eval_circle(tm);
            let outer_piece = &self.pieces[self.piece_index(im)];
            let inner_piece = &inner.pieces[inner.piece_index(tm)];
            pieces.push(match (outer_piece, inner_piece) {
                (Piece::Moebius(a), Piece::Moebius(b)) => Piece::Moebius(a.compose(b)),
                (Piece::Constant(v), _) => Piece::Constant(*v),
                (Piece::Moebius(a), Piece::Constant(v)) => Piece::Constant(a.apply_affine(*v)),
            });
        }
        Ok(CircleMap::from_pieces(self.chart, self.interval, cuts, pieces))
    }
}

fn lift_offsets(breaks: &[f64], pieces: &[Piece]) -> (Vec<f64>, f64) {
    let n = pieces.len();
    let mut offsets = vec![0.0; n];
    let mut defect = 0.0f64;
    let v0 = pieces[0].eval(0.0);
    offsets[0] = if v0 >= 1.0 - SNAP { -1.0 } else { 0.0 };
    for i in 1..n {
        let left_limit = pieces[i - 1].eval(breaks[i]) + offsets[i - 1];
        let right_value = pieces[i].eval(breaks[i]);
        let k = (left_limit - right_value).round();
        offsets[i] = k;
        defect = defect.max((left_limit - right_value - k).abs());
    }
    // wrap consistency: F(1^-) should equal F(0) + 1
    let wrap_left = pieces[n - 1].eval(1.0) + offsets[n - 1];
    let f0 = pieces[0].eval(0.0) + offsets[0];
    defect = defect.max((wrap_left - f0 - 1.0).abs());
    (offsets, defect)
}

/// The one-parameter family: the exchange `E_x` on `[1, inf)` with branches
/// `g h_x` and `h_x`, top break `x' = x / (x - 1)`, bottom break `x`.
#[derive(Clone, Debug)]
pub struct OneSingFamilyX {
    pub theta: f64,
    pub x: ProjectivePoint,
    pub y_theta: f64,
    pub x_prime: ProjectivePoint,
    pub g: MoebiusMap,
    pub h: MoebiusMap,
    pub hiet: Hiet,
}

fn pt(t: f64) -> ProjectivePoint {
    ProjectivePoint::finite(t)
}

fn inf() -> ProjectivePoint {
    ProjectivePoint::infinity()
}

/// The map defined by `g(1, 0, y_theta) = (inf, 0, y_theta)`.
pub fn g_map(theta: f64) -> Result<MoebiusMap> {
    let y = y_theta(theta)?;
    MoebiusMap::from_triples((&pt(1.0), &pt(0.0), &pt(y)), (&inf(), &pt(0.0), &pt(y)))
}

/// `h_infinity`, defined by `h(1, inf, 0) = (1, inf, y_theta)`.
pub fn h_infinity_map(theta: f64) -> Result<MoebiusMap> {
    let y = y_theta(theta)?;
    MoebiusMap::from_triples((&pt(1.0), &inf(), &pt(0.0)), (&pt(1.0), &inf(), &pt(y)))
}

/// `x' = x / (x - 1)` evaluated homogeneously; `x'(inf) = 1` and `x'(1) = inf`.
pub fn x_prime_of(x: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint::new(x.a(), x.a() - x.b()).expect("x != 0 so the image is well defined")
}

fn in_closed_one_inf(x: &ProjectivePoint) -> bool {
    x.approx_eq(&pt(1.0), 1e-12)
        || x.is_infinity()
        || cyclic_order(&pt(1.0), x, &inf()) == CyclicOrder::Positive
}

pub fn build_one_sing(theta: f64, x: ProjectivePoint) -> Result<OneSingFamilyX> {
    let y = y_theta(theta)?;
    if !in_closed_one_inf(&x) {
        return Err(Error::DomainError { reason: format!("x = {x} outside [1, inf]") });
    }
    let g = g_map(theta)?;
    let h_inf = h_infinity_map(theta)?;
    let x_prime = x_prime_of(&x);
    let degenerate = x.approx_eq(&pt(1.0), 1e-9) || x.is_infinity();
    if degenerate {
        // E_1 = E_inf = h_inf restricted to [1, inf): a single branch
        let hiet = Hiet::new((pt(1.0), inf()), vec![], vec![], vec![h_inf], vec![0])?;
        let h = if x.is_infinity() { h_inf } else { g.inverse().compose(&h_inf) };
        return Ok(OneSingFamilyX { theta, x, y_theta: y, x_prime, g, h, hiet });
    }
    let h = MoebiusMap::from_triples((&x_prime, &inf(), &pt(0.0)), (&pt(1.0), &x, &pt(y)))?;
    let gh = g.compose(&h);
    // the single-singularity condition pins x' = x/(x-1), i.e. gh(1) = x
    if !gh.apply(&pt(1.0)).approx_eq(&x, 1e-9) {
        return Err(Error::DomainError { reason: "gh(1) != x".into() });
    }
    let hiet = Hiet::new(
        (pt(1.0), inf()),
        vec![x_prime],
        vec![x],
        vec![gh, h],
        vec![1, 0],
    )?;
    Ok(OneSingFamilyX { theta, x, y_theta: y, x_prime, g, h, hiet })
}

/// The two-parameter family on the L-shaped polygon: a pair of exchanges
/// `E` on `[1, inf)` and `F` on `[0, y_plus)`.
#[derive(Clone, Debug)]
pub struct TwoSingFamilyXY {
    pub theta: f64,
    pub x: ProjectivePoint,
    pub y: f64,
    pub y_theta: f64,
    pub x_prime: ProjectivePoint,
    pub y_plus: f64,
    pub y_prime: f64,
    pub h1: MoebiusMap,
    pub h2: MoebiusMap,
    pub g1: MoebiusMap,
    pub g2: MoebiusMap,
    pub e: Hiet,
    pub f: Hiet,
}

/// `x' = x / (e^theta (y - 1) + x)` evaluated homogeneously in `x`.
pub fn two_sing_x_prime(theta: f64, x: &ProjectivePoint, y: f64) -> ProjectivePoint {
    let e = theta.exp();
    ProjectivePoint::new(x.a(), e * (y - 1.0) * x.b() + x.a())
        .expect("denominator row never kills a point of (1, inf]")
}

pub fn build_two_sing(theta: f64, x: ProjectivePoint, y: f64) -> Result<TwoSingFamilyXY> {
    let yt = y_theta(theta)?;
    if !in_closed_one_inf(&x) {
        return Err(Error::OutsideDomain);
    }
    if y < -1e-12 || y > yt + 1e-12 {
        return Err(Error::OutsideDomain);
    }
    let at_ytheta = (y - yt).abs() <= 1e-9;
    if x.approx_eq(&pt(1.0), 1e-12) {
        if !at_ytheta {
            return Err(Error::OutsideDomain);
        }
        // the (1, y_theta) corner: x' = inf and the construction degenerates
        // to T_{theta, 1}; E is the single branch h_inf, F is g restricted.
        let g = g_map(theta)?;
        let h_inf = h_infinity_map(theta)?;
        let h1 = h_inf;
        let h2 = g.inverse().compose(&h_inf);
        let e = Hiet::new((pt(1.0), inf()), vec![], vec![], vec![h_inf], vec![0])?;
        let f = Hiet::new((pt(0.0), pt(yt)), vec![], vec![], vec![g], vec![0])?;
        return Ok(TwoSingFamilyXY {
            theta,
            x,
            y: yt,
            y_theta: yt,
            x_prime: inf(),
            y_plus: yt,
            y_prime: 0.0,
            h1,
            h2,
            g1: h2.compose(&h1).compose(&h2.inverse()),
            g2: g,
            e,
            f,
        });
    }
    if !x.is_infinity() && !at_ytheta {
        let slack = y - (1.0 - (-theta).exp() * x.affine());
        if slack <= -1e-12 {
            return Err(Error::OutsideDomain);
        }
        if slack <= 1e-12 {
            return Err(Error::BoundaryCase);
        }
        if y <= 1e-12 {
            // y = 0 with x finite lies on the boundary edge of the domain
            return Err(Error::BoundaryCase);
        }
    }
    let y = y.clamp(0.0, yt);
    let y_plus = y_plus_of(theta, &x, y);
    let x_prime = two_sing_x_prime(theta, &x, y);
    let (h1, h2, g1, g2, y_prime_pt);
    if x.is_infinity() {
        // x' = 1 degenerates the h1 triple; build the beta gluings from their
        // own defining triples and recover h1 by conjugation.
        h2 = MoebiusMap::from_triples((&x_prime, &inf(), &pt(0.0)), (&pt(1.0), &x, &pt(y_plus)))?;
        y_prime_pt = pt(y_prime_closed_form(theta, &x, y));
        g1 = MoebiusMap::from_triples((&pt(1.0), &pt(0.0), &y_prime_pt), (&x, &pt(y), &pt(y_plus)))?;
        h1 = h2.inverse().compose(&g1).compose(&h2);
        g2 = h1.compose(&h2.inverse());
    } else {
        h1 = MoebiusMap::from_triples((&pt(1.0), &x_prime, &pt(0.0)), (&x, &inf(), &pt(y)))?;
        h2 = MoebiusMap::from_triples((&x_prime, &inf(), &pt(0.0)), (&pt(1.0), &x, &pt(y_plus)))?;
        g1 = h2.compose(&h1).compose(&h2.inverse());
        g2 = h1.compose(&h2.inverse());
        y_prime_pt = h2.compose(&h1.inverse()).apply(&pt(0.0));
    }
    let y_prime = y_prime_pt.affine();

    // defining identities of the beta gluings
    let id1 = g1.apply(&pt(1.0)).approx_eq(&x, 1e-9)
        && g1.apply(&pt(0.0)).approx_eq(&pt(y), 1e-9)
        && g1.apply(&y_prime_pt).approx_eq(&pt(y_plus), 1e-9);
    let id2 = g2.apply(&pt(1.0)).is_infinity()
        && g2.apply(&y_prime_pt).approx_eq(&pt(0.0), 1e-9)
        && g2.apply(&pt(y_plus)).approx_eq(&pt(y), 1e-9);
    if !id1 || !id2 {
        return Err(Error::InvalidHiet { reason: "beta gluing identities failed".into() });
    }

    let e_exchange = if x.is_infinity() {
        // x' = 1: E = h2 restricted, single branch
        Hiet::new((pt(1.0), inf()), vec![], vec![], vec![h2], vec![0])?
    } else {
        Hiet::new((pt(1.0), inf()), vec![x_prime], vec![x], vec![h1, h2], vec![1, 0])?
    };
    let f_exchange = if y_prime <= 1e-9 {
        // y = y_theta: y' = 0, F = g2 restricted
        Hiet::new((pt(0.0), pt(y_plus)), vec![], vec![], vec![g2], vec![0])?
    } else if (y_plus - y_prime).abs() <= 1e-9 || y <= 1e-12 {
        // x = inf with y = 0: y' = y_plus, F = g1 restricted
        Hiet::new((pt(0.0), pt(y_plus)), vec![], vec![], vec![g1], vec![0])?
    } else {
        Hiet::new(
            (pt(0.0), pt(y_plus)),
            vec![y_prime_pt],
            vec![pt(y)],
            vec![g1, g2],
            vec![1, 0],
        )?
    };
    Ok(TwoSingFamilyXY {
        theta,
        x,
        y,
        y_theta: yt,
        x_prime,
        y_plus,
        y_prime,
        h1,
        h2,
        g1,
        g2,
        e: e_exchange,
        f: f_exchange,
    })
}

/// Closed form for `y' = (h2 h1^-1)(0)` from the gluing identities.
pub fn y_prime_closed_form(theta: f64, x: &ProjectivePoint, y: f64) -> f64 {
    let e = theta.exp();
    // (x + e x (y-1)) / (1 + e x (y-1) + y (x-1)), homogeneous in x
    let num = (1.0 + e * (y - 1.0)) * x.a();
    let den = (e * (y - 1.0) + y) * x.a() + (1.0 - y) * x.b();
    num / den
}

/// Boundary families of the domain: the degree-one endomorphism `E^-1` on
/// `[1, inf)`, for the `y = 0` edge (`x` in `[e^theta, inf]`) and the slanted
/// edge `y = 1 - e^{-theta} x` (`x` in `(1, e^theta]`).
pub fn build_boundary_inverse(theta: f64, x: ProjectivePoint) -> Result<CircleMap> {
    let _ = y_theta(theta)?;
    if !in_closed_one_inf(&x) || x.approx_eq(&pt(1.0), 1e-12) {
        return Err(Error::NotBoundary);
    }
    let e_theta = theta.exp();
    let chart = interval_chart(&pt(1.0), &inf())?;
    let x_is_e_theta = !x.is_infinity() && (x.affine() - e_theta).abs() <= 1e-9;
    let below = !x.is_infinity() && x.affine() < e_theta - 1e-9;
    if below || x_is_e_theta {
        // slanted edge: y = 1 - e^{-theta} x, x' = inf, and the inverse has a
        // constant branch at infinity on [1, x)
        let y = 1.0 - (-theta).exp() * x.affine();
        if y < -1e-9 {
            return Err(Error::NotBoundary);
        }
        let h1 = MoebiusMap::from_triples((&pt(1.0), &inf(), &pt(0.0)), (&x, &inf(), &pt(y)))?;
        let cx = chart.apply(&x).affine();
        let inv_chart = chart.inverse();
        let pieces = vec![
            Piece::Constant(0.0), // constant infinity, the wrap point
            Piece::Moebius(chart.compose(&h1.inverse()).compose(&inv_chart)),
        ];
        return Ok(CircleMap::from_pieces(chart, (pt(1.0), inf()), vec![0.0, cx], pieces));
    }
    // y = 0 edge with x in (e^theta, inf]: a genuine exchange
    let y = 0.0;
    if x.is_infinity() {
        let y_plus = y_plus_of(theta, &x, y);
        let h2 = MoebiusMap::from_triples((&pt(1.0), &inf(), &pt(0.0)), (&pt(1.0), &x, &pt(y_plus)))?;
        let h = Hiet::new((pt(1.0), inf()), vec![], vec![], vec![h2], vec![0])?;
        return Ok(CircleMap::from_hiet_inverse(&h));
    }
    let x_prime = two_sing_x_prime(theta, &x, y);
    let y_plus = y_plus_of(theta, &x, y);
    let h1 = MoebiusMap::from_triples((&pt(1.0), &x_prime, &pt(0.0)), (&x, &inf(), &pt(y)))?;
    let h2 = MoebiusMap::from_triples((&x_prime, &inf(), &pt(0.0)), (&pt(1.0), &x, &pt(y_plus)))?;
    let h = Hiet::new((pt(1.0), inf()), vec![x_prime], vec![x], vec![h1, h2], vec![1, 0])?;
    Ok(CircleMap::from_hiet_inverse(&h))
}

/// `to_circle_map` of the spec: the circle homeomorphism induced by a HIET,
/// with the chart fixed by `interval_chart`.
pub fn to_circle_map(h: &Hiet) -> CircleMap {
    CircleMap::from_hiet(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn one_sing_break_coincidence_at_two() {
        let fam = build_one_sing(std::f64::consts::LN_2, pt(2.0)).unwrap();
        assert!(fam.x_prime.approx_eq(&pt(2.0), 1e-12));
        assert!(fam.hiet.top_breaks()[0].approx_eq(&fam.hiet.bottom_breaks()[0], 1e-12));
    }

    #[test]
    fn one_sing_degenerate_parameters_share_single_branch() {
        let a = build_one_sing(0.7, inf()).unwrap();
        assert_eq!(a.hiet.branch_count(), 1);
        assert!(a.x_prime.approx_eq(&pt(1.0), 1e-12));
        // fixed point at [1]
        let img = a.hiet.eval(&pt(1.0)).unwrap();
        assert!(img.approx_eq(&pt(1.0), 1e-9));
        let b = build_one_sing(0.7, pt(1.0)).unwrap();
        assert_eq!(b.hiet.branch_count(), 1);
        assert!(b.hiet.branches()[0].approx_eq(&a.hiet.branches()[0], 1e-12));
    }

    #[test]
    fn branch_endpoint_identities() {
        for &theta in &[0.25f64, 1.0, 2.0] {
            let y = y_theta(theta).unwrap();
            let fam = build_one_sing(theta, pt(3.0)).unwrap();
            assert!(fam.h.apply(&fam.x_prime).approx_eq(&pt(1.0), 1e-9));
            assert!(fam.h.apply(&inf()).approx_eq(&pt(3.0), 1e-9));
            assert!(fam.h.apply(&pt(0.0)).approx_eq(&pt(y), 1e-9));
        }
    }

    #[test]
    fn eval_at_break_uses_right_branch() {
        let fam = build_one_sing(1.0, pt(3.0)).unwrap();
        // at the top break x', the half-open convention selects branch b = h,
        // and h(x') = 1
        let v = fam.hiet.eval(&fam.x_prime).unwrap();
        assert!(v.approx_eq(&pt(1.0), 1e-9));
        let word = fam.hiet.coding(&fam.x_prime, 1).unwrap();
        assert_eq!(word, vec![1]);
    }

    #[test]
    fn eval_inverse_inverts() {
        let mut rng = StdRng::seed_from_u64(3);
        let fam = build_one_sing(0.9, pt(2.4)).unwrap();
        let chart = interval_chart(&pt(1.0), &inf()).unwrap();
        let inv = chart.inverse();
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let p = inv.apply(&pt(t));
            let q = fam.hiet.eval(&p).unwrap();
            let back = fam.hiet.eval_inverse(&q).unwrap();
            assert!(back.approx_eq(&p, 1e-10), "p = {p}, back = {back}");
        }
    }

    #[test]
    fn out_of_interval_eval_errors() {
        let fam = build_one_sing(0.9, pt(2.4)).unwrap();
        assert!(matches!(fam.hiet.eval(&pt(0.5)), Err(Error::OutOfInterval)));
    }

    #[test]
    fn coding_constant_at_fixed_point() {
        let fam = build_one_sing(0.8, inf()).unwrap();
        let word = fam.hiet.coding(&pt(1.0), 5).unwrap();
        assert_eq!(word, vec![0; 5]);
        assert_eq!(word_string(&word), "aaaaa");
    }

    #[test]
    fn tiling_of_bottom_partition() {
        // branch images of the top pieces tile [left, right)
        let fam = build_one_sing(1.3, pt(4.0)).unwrap();
        let h = &fam.hiet;
        let (l, r) = h.interval();
        let ends = [l, h.top_breaks()[0], r];
        let img0 = (h.branches()[0].apply(&ends[0]), h.branches()[0].apply(&ends[1]));
        let img1 = (h.branches()[1].apply(&ends[1]), h.branches()[1].apply(&ends[2]));
        // img1 = [1, x), img0 = [x, inf): they meet at x and cover the ends
        assert!(img1.0.approx_eq(&l, 1e-9));
        assert!(img1.1.approx_eq(&img0.0, 1e-9));
        assert!(img0.1.approx_eq(&r, 1e-9));
    }

    #[test]
    fn monotone_family_law() {
        // h_{x2} = g^tau h_{x1} with tau from the hyperbolic parameter of g,
        // and the commutator trace is x-independent
        let theta = 1.1;
        let g = g_map(theta).unwrap();
        let f1 = build_one_sing(theta, pt(2.0)).unwrap();
        let f2 = build_one_sing(theta, pt(5.0)).unwrap();
        let tau = g.hyperbolic_parameter(&pt(2.0), &pt(5.0)).unwrap();
        assert!(tau > 0.0 && tau < 1.0);
        let expect = g.hyperbolic_power(tau).unwrap().compose(&f1.h);
        assert!(expect.approx_eq(&f2.h, 1e-9), "{expect} vs {}", f2.h);
        let t1 = g.trace_commutator(&f1.h);
        let t2 = g.trace_commutator(&f2.h);
        assert_abs_diff_eq!(t1, t2, epsilon = 1e-9);
    }

    #[test]
    fn continuity_across_x_equals_one() {
        // lim_{x -> 1} h_x = h_1 = g^-1 h_inf, entrywise
        let theta = 0.85;
        let h1 = build_one_sing(theta, pt(1.0)).unwrap().h;
        let near = build_one_sing(theta, pt(1.0 + 1e-7)).unwrap().h;
        assert!(h1.approx_eq(&near, 1e-5));
    }

    #[test]
    fn two_sing_invariants_and_y_prime_formula() {
        for &theta in &[0.5f64, 1.0] {
            let yt = y_theta(theta).unwrap();
            for &(xv, yfrac) in &[(2.0, 0.5), (3.0, 0.25), (8.0, 0.75)] {
                let lo = (1.0 - (-theta).exp() * xv).max(0.0);
                let y = lo + yfrac * (yt - lo);
                if y <= 1e-6 {
                    continue;
                }
                let fam = build_two_sing(theta, pt(xv), y).unwrap();
                // x' in [1, inf], y' in [0, y_plus)
                assert!(in_closed_one_inf(&fam.x_prime));
                assert!(fam.y_prime >= 0.0 && fam.y_prime < fam.y_plus);
                // closed form for y'
                let cf = y_prime_closed_form(theta, &pt(xv), y);
                assert_abs_diff_eq!(fam.y_prime, cf, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn two_sing_reduces_at_y_theta() {
        let theta = 0.8;
        let yt = y_theta(theta).unwrap();
        let fam = build_two_sing(theta, pt(3.0), yt).unwrap();
        assert!(fam.y_prime.abs() <= 1e-9);
        assert_eq!(fam.f.branch_count(), 1);
        // E reduces to the one-parameter exchange
        let one = build_one_sing(theta, pt(3.0)).unwrap();
        assert!(fam.h1.approx_eq(&one.g.compose(&one.h), 1e-9));
        assert!(fam.h2.approx_eq(&one.h, 1e-9));
    }

    #[test]
    fn two_sing_x_infinity_single_branch() {
        let fam = build_two_sing(0.9, inf(), 0.2).unwrap();
        assert!(fam.x_prime.approx_eq(&pt(1.0), 1e-12));
        assert_eq!(fam.e.branch_count(), 1);
        assert_eq!(fam.f.branch_count(), 2);
    }

    #[test]
    fn two_sing_domain_errors() {
        let theta = 1.0f64;
        assert!(matches!(build_two_sing(theta, pt(2.0), -0.1), Err(Error::OutsideDomain)));
        let yb = 1.0 - (-theta).exp() * 2.0;
        assert!(matches!(build_two_sing(theta, pt(2.0), yb), Err(Error::BoundaryCase)));
        assert!(matches!(build_two_sing(theta, pt(4.0), 0.0), Err(Error::BoundaryCase)));
    }

    #[test]
    fn boundary_inverse_constant_branch() {
        let theta = 0.6f64;
        let x = theta.exp();
        let m = build_boundary_inverse(theta, pt(x)).unwrap();
        assert!(m.is_endomorphism());
        // on [1, x) the value is the wrap point (infinity ~ 1)
        let p = m.apply_point(&pt(1.0 + 0.3 * (x - 1.0)));
        assert!(p.is_infinity() || p.approx_eq(&pt(1.0), 1e-9));
        assert!(m.continuity_defect() < 1e-9);
    }

    #[test]
    fn boundary_inverse_is_interior_limit() {
        // pointwise limit of interior E^-1 as (x, y) approaches the y = 0 edge
        let theta = 0.6f64;
        let x = theta.exp() + 2.0;
        let limit = build_boundary_inverse(theta, pt(x)).unwrap();
        let chart = interval_chart(&pt(1.0), &inf()).unwrap();
        let inv = chart.inverse();
        for k in 0..20 {
            let t = (k as f64 + 0.5) / 20.0;
            let p = inv.apply(&pt(t));
            let expect = limit.apply_point(&p);
            let fam = build_two_sing(theta, pt(x), 1e-7).unwrap();
            let got = fam.e.eval_inverse(&p).unwrap();
            assert!(
                got.approx_eq(&expect, 1e-5),
                "at t = {t}: interior {got} vs boundary {expect}"
            );
        }
    }

    #[test]
    fn circle_map_chart_endpoints() {
        let fam = build_one_sing(1.0, pt(2.5)).unwrap();
        let m = CircleMap::from_hiet(&fam.hiet);
        assert_abs_diff_eq!(m.chart().apply(&pt(1.0)).affine(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.chart().apply(&inf()).affine(), 1.0, epsilon = 1e-12);
        assert!(m.continuity_defect() < 1e-9);
    }

    #[test]
    fn circle_map_lift_is_degree_one() {
        let fam = build_one_sing(1.4, pt(3.5)).unwrap();
        let m = CircleMap::from_hiet(&fam.hiet);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let t: f64 = rng.gen_range(-3.0..3.0);
            assert_abs_diff_eq!(m.lift(t + 1.0), m.lift(t) + 1.0, epsilon = 1e-10);
        }
        // strict monotonicity on sample pairs
        let mut prev = m.lift(0.0);
        for i in 1..=1000 {
            let t = i as f64 / 1000.0;
            let v = m.lift(t);
            assert!(v >= prev - 1e-12, "lift not monotone at t = {t}");
            prev = v;
        }
    }

    #[test]
    fn inverse_circle_map_matches_hiet_inverse() {
        let fam = build_one_sing(0.9, pt(2.2)).unwrap();
        let m = CircleMap::from_hiet_inverse(&fam.hiet);
        let chart = interval_chart(&pt(1.0), &inf()).unwrap();
        let inv = chart.inverse();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..200 {
            let t: f64 = rng.gen_range(0.001..0.999);
            let p = inv.apply(&pt(t));
            let a = m.apply_point(&p);
            let b = fam.hiet.eval_inverse(&p).unwrap();
            assert!(a.approx_eq(&b, 1e-9));
        }
    }

    #[test]
    fn hiet_serde_roundtrip() {
        let fam = build_one_sing(1.2, pt(2.0)).unwrap();
        let json = serde_json::to_string(&fam.hiet).unwrap();
        assert!(json.contains("\"interval\""));
        assert!(json.contains("\"top_breaks\""));
        assert!(json.contains("\"perm\""));
        let back: Hiet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.branch_count(), 2);
        let p = pt(5.0);
        assert!(back.eval(&p).unwrap().approx_eq(&fam.hiet.eval(&p).unwrap(), 1e-12));
    }

    #[test]
    fn invalid_hiet_rejected() {
        // permutation not a bijection
        let fam = build_one_sing(1.0, pt(2.0)).unwrap();
        let r = Hiet::new(
            fam.hiet.interval(),
            fam.hiet.top_breaks().to_vec(),
            fam.hiet.bottom_breaks().to_vec(),
            fam.hiet.branches().to_vec(),
            vec![0, 0],
        );
        assert!(matches!(r, Err(Error::InvalidHiet { .. })));
        // branch endpoints that do not match the bottom piece
        let r = Hiet::new(
            fam.hiet.interval(),
            fam.hiet.top_breaks().to_vec(),
            fam.hiet.bottom_breaks().to_vec(),
            vec![fam.hiet.branches()[1], fam.hiet.branches()[0]],
            vec![1, 0],
        );
        assert!(matches!(r, Err(Error::InvalidHiet { .. })));
    }
}
