//! Arithmetic on the real projective line and the group PSL(2, R).
//!
//! Points are kept in homogeneous coordinates throughout, so the point at
//! infinity never needs a special code path. Maps are determinant-one 2x2
//! matrices up to sign, stored in a sign-canonical form.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for trace classification and geometric predicates.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance under which two normalized points are considered equal.
pub const POINT_EQ_TOL: f64 = 1e-12;

/// A point of RP^1 in homogeneous coordinates `[a : b]`.
///
/// Normalization is deterministic: `a^2 + b^2 = 1` and `b > 0`, or `b = 0`
/// and `a > 0`. The finite point `t` is `[t : 1]`, infinity is `[1 : 0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    a: f64,
    b: f64,
}

impl ProjectivePoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let r = a.hypot(b);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::ZeroVector);
        }
        let (mut a, mut b) = (a / r, b / r);
        if b < 0.0 || (b == 0.0 && a < 0.0) {
            a = -a;
            b = -b;
        }
        // renormalize the sign of a literal -0.0 so equal points are bitwise equal
        if a == 0.0 {
            a = 0.0;
        }
        if b == 0.0 {
            b = 0.0;
        }
        Ok(Self { a, b })
    }

    pub fn finite(t: f64) -> Self {
        Self::new(t, 1.0).expect("finite point is never the zero vector")
    }

    pub fn infinity() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Affine value `a / b`; infinite for the point at infinity.
    pub fn affine(&self) -> f64 {
        self.a / self.b
    }

    pub fn is_infinity(&self) -> bool {
        self.b.abs() <= POINT_EQ_TOL
    }

    /// Quarter-turn on the homogeneous circle; never equal to `self`.
    pub fn antipode(&self) -> Self {
        Self::new(-self.b, self.a).expect("rotating a unit vector keeps it nonzero")
    }

    /// Determinant of the homogeneous pair; vanishes iff the points coincide.
    pub fn det(p: &Self, q: &Self) -> f64 {
        p.a * q.b - p.b * q.a
    }

    /// Distance |sin of the angle| between the normalized representatives.
    pub fn dist(p: &Self, q: &Self) -> f64 {
        Self::det(p, q).abs()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        Self::dist(self, other) <= tol
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.affine())
        }
    }
}

impl Serialize for ProjectivePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinity() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.affine())
        }
    }
}

impl<'de> Deserialize<'de> for ProjectivePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tok(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(t) => Ok(ProjectivePoint::finite(t)),
            Repr::Tok(s) if s == "inf" => Ok(ProjectivePoint::infinity()),
            Repr::Tok(s) => Err(D::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// Sign of a cyclic triple on RP^1, calibrated so `(0, 1, inf)` is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclicOrder {
    Positive,
    Negative,
    Degenerate,
}

/// Orientation of a triple; invariant under cyclic permutation, flipped by a
/// transposition, and invariant under the PSL(2, R) action.
pub fn cyclic_order(p: &ProjectivePoint, q: &ProjectivePoint, r: &ProjectivePoint) -> CyclicOrder {
    cyclic_order_tol(p, q, r, POINT_EQ_TOL)
}

pub fn cyclic_order_tol(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    r: &ProjectivePoint,
    tol: f64,
) -> CyclicOrder {
    let dpq = ProjectivePoint::det(p, q);
    let dqr = ProjectivePoint::det(q, r);
    let drp = ProjectivePoint::det(r, p);
    if dpq.abs() <= tol || dqr.abs() <= tol || drp.abs() <= tol {
        return CyclicOrder::Degenerate;
    }
    // Each point enters two determinants, so rescaling cancels in pairs; the
    // global sign is pinned by (0, 1, inf) being positive.
    if dpq * dqr * drp > 0.0 {
        CyclicOrder::Positive
    } else {
        CyclicOrder::Negative
    }
}

/// True iff `x` lies in the open positively-oriented interval from `a` to `b`.
pub fn in_open_interval(a: &ProjectivePoint, x: &ProjectivePoint, b: &ProjectivePoint) -> bool {
    cyclic_order(a, x, b) == CyclicOrder::Positive
}

/// The Möbius-invariant with `(0, 1, inf, t) -> t`.
pub fn cross_ratio(
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    r: &ProjectivePoint,
    s: &ProjectivePoint,
) -> Result<f64> {
    let pts = [p, q, r, s];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if ProjectivePoint::dist(pts[i], pts[j]) <= POINT_EQ_TOL {
                return Err(Error::DegenerateTuple);
            }
        }
    }
    let num = ProjectivePoint::det(s, p) * ProjectivePoint::det(q, r);
    let den = ProjectivePoint::det(s, r) * ProjectivePoint::det(q, p);
    Ok(num / den)
}

/// An element of PSL(2, R): a determinant-one matrix up to sign.
///
/// Canonical form: determinant one and the first nonzero entry in row-major
/// order positive, so `M` and `-M` store identical field values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    m: [f64; 4], // row-major [m11, m12, m21, m22]
}

/// Trace classification of a Möbius map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapClass {
    Identity,
    Elliptic,
    Parabolic,
    /// `translation_parameter` is the t with |trace| = 2 cosh t.
    Hyperbolic { translation_parameter: f64 },
}

impl MoebiusMap {
    pub fn identity() -> Self {
        Self { m: [1.0, 0.0, 0.0, 1.0] }
    }

    /// Build from raw entries, normalizing the determinant to one.
    pub fn new(entries: [f64; 4]) -> Result<Self> {
        let det = entries[0] * entries[3] - entries[1] * entries[2];
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularMatrix { det });
        }
        if det < 0.0 {
            return Err(Error::OppositeOrientation);
        }
        let s = det.sqrt().recip();
        let mut m = [entries[0] * s, entries[1] * s, entries[2] * s, entries[3] * s];
        canonical_sign(&mut m);
        Ok(Self { m })
    }

    pub fn entries(&self) -> [f64; 4] {
        self.m
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        let a = self.m[0] * p.a + self.m[1] * p.b;
        let b = self.m[2] * p.a + self.m[3] * p.b;
        ProjectivePoint::new(a, b).expect("invertible matrix maps nonzero to nonzero")
    }

    /// Affine evaluation `(m11 t + m12) / (m21 t + m22)`.
    pub fn apply_affine(&self, t: f64) -> f64 {
        self.apply(&ProjectivePoint::finite(t)).affine()
    }

    /// `self` after `other`: `(self * other)(p) = self(other(p))`.
    pub fn compose(&self, other: &Self) -> Self {
        let a = &self.m;
        let b = &other.m;
        let mut m = [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ];
        // renormalize drift and the sign
        let det = m[0] * m[3] - m[1] * m[2];
        let s = det.sqrt().recip();
        for e in &mut m {
            *e *= s;
        }
        canonical_sign(&mut m);
        Self { m }
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.m;
        let mut m = [d, -b, -c, a];
        canonical_sign(&mut m);
        Self { m }
    }

    /// |m11 + m22|; well defined on PSL(2, R).
    pub fn trace_abs(&self) -> f64 {
        (self.m[0] + self.m[3]).abs()
    }

    /// Signed trace of the commutator `M N M^-1 N^-1`; the sign ambiguities of
    /// the lifts cancel because each factor appears twice.
    pub fn trace_commutator(&self, other: &Self) -> f64 {
        let k = self
            .compose(other)
            .compose(&self.inverse())
            .compose(&other.inverse());
        // each compose renormalizes, so the entries are a genuine SL(2) lift
        // of the commutator up to one global sign; fix it by evaluating the
        // product of the four lifts directly.
        let raw = mat_mul(
            mat_mul(self.m, other.m),
            mat_mul(inv_entries(self.m), inv_entries(other.m)),
        );
        let tr = raw[0] + raw[3];
        // `raw` has determinant one up to rounding; tr is the signed trace.
        debug_assert!((k.trace_abs() - tr.abs()).abs() < 1e-6 * (1.0 + tr.abs()));
        tr
    }

    pub fn classify(&self) -> MapClass {
        self.classify_with_tol(DEFAULT_TOL)
    }

    pub fn classify_with_tol(&self, tol: f64) -> MapClass {
        if self.approx_eq(&Self::identity(), tol) {
            return MapClass::Identity;
        }
        let t = self.trace_abs();
        if t > 2.0 + tol {
            MapClass::Hyperbolic { translation_parameter: (t / 2.0).acosh() }
        } else if (t - 2.0).abs() <= tol {
            MapClass::Parabolic
        } else {
            MapClass::Elliptic
        }
    }

    /// The power `g^t` of the one-parameter hyperbolic subgroup through
    /// `self`, with `g^1 = self`, via the spectral decomposition.
    pub fn hyperbolic_power(&self, t: f64) -> Result<Self> {
        let (lambda, pos) = self.hyperbolic_data()?;
        let mu = lambda.recip();
        // spectral projectors: P1 = (M - mu I)/(lambda - mu), P2 = I - P1
        let denom = lambda - mu;
        let p1 = [
            (pos[0] - mu) / denom,
            pos[1] / denom,
            pos[2] / denom,
            (pos[3] - mu) / denom,
        ];
        let p2 = [
            (lambda - pos[0]) / denom,
            -pos[1] / denom,
            -pos[2] / denom,
            (lambda - pos[3]) / denom,
        ];
        let (lt, mt) = (lambda.powf(t), lambda.powf(-t));
        Self::new([
            lt * p1[0] + mt * p2[0],
            lt * p1[1] + mt * p2[1],
            lt * p1[2] + mt * p2[2],
            lt * p1[3] + mt * p2[3],
        ])
    }

    /// Attracting and repelling fixed points of a hyperbolic map.
    pub fn fixed_points(&self) -> Result<(ProjectivePoint, ProjectivePoint)> {
        let (lambda, pos) = self.hyperbolic_data()?;
        let mu = lambda.recip();
        // columns of (M - mu I) span the lambda eigenline and vice versa
        let attract = best_column([pos[0] - mu, pos[1], pos[2], pos[3] - mu])?;
        let repel = best_column([pos[0] - lambda, pos[1], pos[2], pos[3] - lambda])?;
        Ok((attract, repel))
    }

    /// Unique `tau` with `g^tau(from) = to`, where `g = self` is hyperbolic
    /// and both points lie in the same component of the fixed-point complement.
    pub fn hyperbolic_parameter(&self, from: &ProjectivePoint, to: &ProjectivePoint) -> Result<f64> {
        let (lambda, pos) = self.hyperbolic_data()?;
        let mu = lambda.recip();
        let ratio = |p: &ProjectivePoint| -> f64 {
            // coordinates of p along the attracting / repelling eigenlines,
            // computed from the spectral projectors applied to p
            let c_att = ((pos[0] - mu) * p.a + pos[1] * p.b, pos[2] * p.a + (pos[3] - mu) * p.b);
            let c_rep = (
                (lambda - pos[0]) * p.a - pos[1] * p.b,
                -pos[2] * p.a + (lambda - pos[3]) * p.b,
            );
            let na = c_att.0.hypot(c_att.1);
            let nr = c_rep.0.hypot(c_rep.1);
            // orient by the dominant component to get a signed ratio
            let sa = if c_att.0.abs() > c_att.1.abs() { c_att.0.signum() } else { c_att.1.signum() };
            let sr = if c_rep.0.abs() > c_rep.1.abs() { c_rep.0.signum() } else { c_rep.1.signum() };
            sa * na / (sr * nr)
        };
        let (rf, rt) = (ratio(from), ratio(to));
        if !(rf * rt > 0.0) {
            return Err(Error::IncomparableUnderFlow);
        }
        Ok((rt / rf).ln() / (2.0 * lambda.ln()))
    }

    /// The unique map sending one pairwise-distinct triple to another of the
    /// same cyclic sign, via the standard triple `(0, 1, inf)`.
    ///
    /// Triples of opposite cyclic sign are related only by an
    /// orientation-reversing projective map, which is not in PSL(2, R);
    /// that case returns `OppositeOrientation`.
    pub fn from_triples(
        p: (&ProjectivePoint, &ProjectivePoint, &ProjectivePoint),
        q: (&ProjectivePoint, &ProjectivePoint, &ProjectivePoint),
    ) -> Result<Self> {
        let sp = std_triple_raw(p)?;
        let sq = std_triple_raw(q)?;
        // sq^-1 * sp; if both raw maps reverse orientation the signs cancel
        Self::new(mat_mul(inv_entries(sq), sp))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.m
            .iter()
            .zip(other.m.iter())
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    fn hyperbolic_data(&self) -> Result<(f64, [f64; 4])> {
        let t = self.trace_abs();
        if t <= 2.0 + DEFAULT_TOL {
            return Err(Error::NotHyperbolic { trace_abs: t });
        }
        // flip to the positive-trace SL(2) lift
        let mut pos = self.m;
        if pos[0] + pos[3] < 0.0 {
            for e in &mut pos {
                *e = -*e;
            }
        }
        let lambda = (t + (t * t - 4.0).sqrt()) / 2.0;
        Ok((lambda, pos))
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0], self.m[1], self.m[2], self.m[3]
        )
    }
}

impl Serialize for MoebiusMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.m[0], self.m[1]], [self.m[2], self.m[3]]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for MoebiusMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; 2]; 2]>::deserialize(d)?;
        MoebiusMap::new([rows[0][0], rows[0][1], rows[1][0], rows[1][1]])
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

fn canonical_sign(m: &mut [f64; 4]) {
    for e in m.iter() {
        if *e != 0.0 {
            if *e < 0.0 {
                for x in m.iter_mut() {
                    *x = -*x;
                }
            }
            break;
        }
    }
    for e in m.iter_mut() {
        if *e == 0.0 {
            *e = 0.0; // normalize -0.0
        }
    }
}

fn mat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn inv_entries(m: [f64; 4]) -> [f64; 4] {
    [m[3], -m[1], -m[2], m[0]]
}

fn best_column(m: [f64; 4]) -> Result<ProjectivePoint> {
    let c0 = (m[0], m[2]);
    let c1 = (m[1], m[3]);
    let n0 = c0.0.hypot(c0.1);
    let n1 = c1.0.hypot(c1.1);
    if n0 >= n1 {
        ProjectivePoint::new(c0.0, c0.1)
    } else {
        ProjectivePoint::new(c1.0, c1.1)
    }
}

/// Raw matrix sending `(p1, p2, p3)` to `(0, 1, inf)`; det < 0 for negative triples.
fn std_triple_raw(
    (p1, p2, p3): (&ProjectivePoint, &ProjectivePoint, &ProjectivePoint),
) -> Result<[f64; 4]> {
    let d12 = ProjectivePoint::dist(p1, p2);
    let d13 = ProjectivePoint::dist(p1, p3);
    let d23 = ProjectivePoint::dist(p2, p3);
    if d12 <= POINT_EQ_TOL || d13 <= POINT_EQ_TOL || d23 <= POINT_EQ_TOL {
        return Err(Error::DegenerateTriple);
    }
    let k1 = ProjectivePoint::det(p2, p3);
    let k2 = ProjectivePoint::det(p2, p1);
    Ok([k1 * p1.b, -k1 * p1.a, k2 * p3.b, -k2 * p3.a])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(t: f64) -> ProjectivePoint {
        ProjectivePoint::finite(t)
    }

    fn inf() -> ProjectivePoint {
        ProjectivePoint::infinity()
    }

    /// g is defined by g(1, 0, y_theta) = (inf, 0, y_theta).
    fn g_of(theta: f64) -> MoebiusMap {
        let y = 1.0 - (-theta).exp();
        MoebiusMap::from_triples((&pt(1.0), &pt(0.0), &pt(y)), (&inf(), &pt(0.0), &pt(y))).unwrap()
    }

    /// h_x defined by h(x', inf, 0) = (1, x, y_theta) with x' = x/(x-1).
    fn h_of(theta: f64, x: f64) -> MoebiusMap {
        let y = 1.0 - (-theta).exp();
        let xp = x / (x - 1.0);
        MoebiusMap::from_triples((&pt(xp), &inf(), &pt(0.0)), (&pt(1.0), &pt(x), &pt(y))).unwrap()
    }

    #[test]
    fn normalization_idempotent_bitwise() {
        for &(a, b) in &[(3.0, 1.0), (-2.5, 0.0), (0.0, -7.0), (1e-8, -1e8)] {
            let p = ProjectivePoint::new(a, b).unwrap();
            let q = ProjectivePoint::new(p.a(), p.b()).unwrap();
            assert_eq!(p.a().to_bits(), q.a().to_bits());
            assert_eq!(p.b().to_bits(), q.b().to_bits());
        }
    }

    #[test]
    fn apply_identity_fixes_points() {
        let p = pt(3.0);
        let q = MoebiusMap::identity().apply(&p);
        assert!(p.approx_eq(&q, 1e-15));
    }

    #[test]
    fn apply_g_theta_sends_one_to_infinity() {
        let g = g_of(std::f64::consts::LN_2);
        assert!(g.apply(&pt(1.0)).is_infinity());
    }

    #[test]
    fn g_closed_form_at_ln2() {
        // g(t) = (y-1) t / (t-1) with y = 1/2, so g(3) = -3/4
        let g = g_of(std::f64::consts::LN_2);
        assert_abs_diff_eq!(g.apply(&pt(3.0)).affine(), -0.75, epsilon = 1e-12);
        // matrix proportional to [[-1/2, 0], [1, -1]], determinant-normalized
        let expect = MoebiusMap::new([-0.5, 0.0, 1.0, -1.0]).unwrap();
        assert!(g.approx_eq(&expect, 1e-12), "g = {g}");
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let g = g_of(1.3);
        assert!(g.compose(&g.inverse()).approx_eq(&MoebiusMap::identity(), 1e-12));
        let h = h_of(0.7, 3.0);
        assert!(MoebiusMap::identity().compose(&h).approx_eq(&h, 1e-15));
    }

    #[test]
    fn trace_of_gh_matches_closed_form() {
        // |tr(g h_x)| = sqrt(x) (2 - y) / sqrt(x - y); sqrt(3) at theta = ln 2, x = 2
        let theta = std::f64::consts::LN_2;
        let gh = g_of(theta).compose(&h_of(theta, 2.0));
        assert_abs_diff_eq!(gh.trace_abs(), 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn commutator_trace_closed_form_and_cosh_identity() {
        for &theta in &[0.25f64, 1.0, 2.0] {
            let y = 1.0 - (-theta).exp();
            let expect = (y * y - 2.0 * y + 2.0) / (1.0 - y);
            assert_abs_diff_eq!(expect, 2.0 * theta.cosh(), epsilon = 1e-12);
            for &x in &[1.5, 2.0, 7.0] {
                let g = g_of(theta);
                let h = h_of(theta, x);
                assert_abs_diff_eq!(g.trace_commutator(&h), expect, epsilon = 1e-9);
            }
        }
        // theta = 1 reference value
        assert_abs_diff_eq!(2.0 * 1f64.cosh(), 3.0861612696304874, epsilon = 1e-12);
    }

    #[test]
    fn commutator_with_identity_has_trace_two() {
        let g = g_of(0.8);
        assert_abs_diff_eq!(g.trace_commutator(&MoebiusMap::identity()), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn from_triples_identity_case() {
        let m = MoebiusMap::from_triples(
            (&pt(0.0), &pt(1.0), &inf()),
            (&pt(0.0), &pt(1.0), &inf()),
        )
        .unwrap();
        assert!(m.approx_eq(&MoebiusMap::identity(), 1e-12));
    }

    #[test]
    fn from_triples_reproduces_h_closed_form() {
        // h(t) = (x(1-y)t + x'(x-1)y) / ((1-y)t + x'(x-1)) at 10 sample points
        let theta = 0.9f64;
        let y = 1.0 - (-theta).exp();
        let (x, xp) = (2.5, 2.5 / 1.5);
        let h = MoebiusMap::from_triples(
            (&pt(xp), &inf(), &pt(0.0)),
            (&pt(1.0), &pt(x), &pt(y)),
        )
        .unwrap();
        for i in 0..10 {
            let t = -3.0 + i as f64;
            let expect = (x * (1.0 - y) * t + xp * (x - 1.0) * y) / ((1.0 - y) * t + xp * (x - 1.0));
            assert_abs_diff_eq!(h.apply_affine(t), expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn from_triples_handles_negative_triples_of_equal_sign() {
        // both triples negatively ordered: still a PSL(2, R) element
        let m = MoebiusMap::from_triples(
            (&pt(1.0), &pt(0.0), &inf()),
            (&pt(2.0), &pt(-1.0), &inf()),
        )
        .unwrap();
        assert!(m.apply(&pt(1.0)).approx_eq(&pt(2.0), 1e-12));
        assert!(m.apply(&pt(0.0)).approx_eq(&pt(-1.0), 1e-12));
        assert!(m.apply(&inf()).is_infinity());
    }

    #[test]
    fn from_triples_rejects_opposite_orientation() {
        let r = MoebiusMap::from_triples(
            (&pt(0.0), &pt(1.0), &inf()),
            (&pt(1.0), &pt(0.0), &inf()),
        );
        assert!(matches!(r, Err(Error::OppositeOrientation)));
    }

    #[test]
    fn from_triples_rejects_degenerate() {
        let r = MoebiusMap::from_triples(
            (&pt(1.0), &pt(1.0), &inf()),
            (&pt(0.0), &pt(1.0), &inf()),
        );
        assert!(matches!(r, Err(Error::DegenerateTriple)));
    }

    #[test]
    fn classify_cases() {
        assert_eq!(MoebiusMap::identity().classify(), MapClass::Identity);
        assert!(matches!(g_of(1.0).classify(), MapClass::Hyperbolic { .. }));
        let r = 0.3f64;
        let rot = MoebiusMap::new([r.cos(), -r.sin(), r.sin(), r.cos()]).unwrap();
        assert_eq!(rot.classify(), MapClass::Elliptic);
        let par = MoebiusMap::new([1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(par.classify(), MapClass::Parabolic);
    }

    #[test]
    fn hyperbolic_power_endpoints_and_sqrt() {
        let g = g_of(std::f64::consts::LN_2);
        assert!(g.hyperbolic_power(0.0).unwrap().approx_eq(&MoebiusMap::identity(), 1e-12));
        assert!(g.hyperbolic_power(1.0).unwrap().approx_eq(&g, 1e-12));
        let half = g.hyperbolic_power(0.5).unwrap();
        assert!(half.compose(&half).approx_eq(&g, 1e-10));
    }

    #[test]
    fn hyperbolic_power_flow_law() {
        let g = g_of(1.7);
        for &(s, t) in &[(0.3, 0.4), (-1.2, 2.5), (4.0, -4.0), (-3.0, -0.5)] {
            let a = g.hyperbolic_power(s).unwrap().compose(&g.hyperbolic_power(t).unwrap());
            let b = g.hyperbolic_power(s + t).unwrap();
            assert!(a.approx_eq(&b, 1e-9), "flow law failed at ({s}, {t})");
        }
    }

    #[test]
    fn fixed_points_diagonal_and_g() {
        let d = MoebiusMap::new([2.0, 0.0, 0.0, 0.5]).unwrap();
        let (att, rep) = d.fixed_points().unwrap();
        assert!(att.is_infinity());
        assert!(rep.approx_eq(&pt(0.0), 1e-12));

        // g has attracting 0 and repelling y_theta
        let theta = 0.8f64;
        let y = 1.0 - (-theta).exp();
        let (att, rep) = g_of(theta).fixed_points().unwrap();
        assert!(att.approx_eq(&pt(0.0), 1e-9), "attracting = {att}");
        assert!(rep.approx_eq(&pt(y), 1e-9), "repelling = {rep}");
    }

    #[test]
    fn h_fixed_points_in_expected_arcs() {
        let theta = std::f64::consts::LN_2;
        let y = 0.5;
        let h = h_of(theta, 2.0);
        let (att, rep) = h.fixed_points().unwrap();
        let att_t = att.affine();
        assert!(att_t > y && att_t < 1.0, "h_+ = {att_t}");
        // repelling lies in the arc (inf, 0), i.e. the negative reals
        assert!(rep.affine() < 0.0, "h_- = {rep}");
    }

    #[test]
    fn hyperbolic_parameter_inverts_power() {
        let g = g_of(1.1);
        let from = pt(1.0);
        for &tau in &[0.2, 0.55, 0.93] {
            let to = g.hyperbolic_power(tau).unwrap().apply(&from);
            let back = g.hyperbolic_parameter(&from, &to).unwrap();
            assert_abs_diff_eq!(back, tau, epsilon = 1e-10);
        }
    }

    #[test]
    fn cyclic_order_cases() {
        assert_eq!(cyclic_order(&pt(0.0), &pt(1.0), &inf()), CyclicOrder::Positive);
        assert_eq!(cyclic_order(&pt(1.0), &pt(0.0), &inf()), CyclicOrder::Negative);
        assert_eq!(cyclic_order(&pt(1.0), &pt(1.0), &inf()), CyclicOrder::Degenerate);
        // (y_A, y_C, x_A) for the standard rectangle is positive
        let y = 1.0 - (-0.7f64).exp();
        assert_eq!(cyclic_order(&pt(0.0), &pt(y), &pt(1.0)), CyclicOrder::Positive);
    }

    #[test]
    fn cross_ratio_normalization() {
        for &t in &[-2.0, 0.3, 5.0] {
            let c = cross_ratio(&pt(0.0), &pt(1.0), &inf(), &pt(t)).unwrap();
            assert_abs_diff_eq!(c, t, epsilon = 1e-12);
        }
        assert!(matches!(
            cross_ratio(&pt(0.0), &pt(0.0), &inf(), &pt(2.0)),
            Err(Error::DegenerateTuple)
        ));
    }

    #[test]
    fn point_serde_roundtrip() {
        let p = pt(2.75);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "2.75");
        let q: ProjectivePoint = serde_json::from_str(&s).unwrap();
        assert!(p.approx_eq(&q, 1e-15));
        let s = serde_json::to_string(&inf()).unwrap();
        assert_eq!(s, "\"inf\"");
        let q: ProjectivePoint = serde_json::from_str(&s).unwrap();
        assert!(q.is_infinity());
    }
}
