//! The de-Sitter plane RP^1 x RP^1 minus the diagonal, its area form
//! `dx dy / (x - y)^2` in affine charts, lightlike rectangles and L-shaped
//! polygons and their areas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{cyclic_order, CyclicOrder, MoebiusMap, ProjectivePoint, POINT_EQ_TOL};

/// A point of dS: a pair of distinct projective points.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DSPoint {
    pub x: ProjectivePoint,
    pub y: ProjectivePoint,
}

impl DSPoint {
    pub fn new(x: ProjectivePoint, y: ProjectivePoint) -> Result<Self> {
        if x.approx_eq(&y, POINT_EQ_TOL) {
            return Err(Error::OnDiagonal);
        }
        Ok(Self { x, y })
    }

    pub fn finite(x: f64, y: f64) -> Result<Self> {
        Self::new(ProjectivePoint::finite(x), ProjectivePoint::finite(y))
    }

    /// Diagonal action of PSL(2, R).
    pub fn transform(&self, m: &MoebiusMap) -> Self {
        Self { x: m.apply(&self.x), y: m.apply(&self.y) }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.x.approx_eq(&other.x, tol) && self.y.approx_eq(&other.y, tol)
    }
}

/// `y_theta = 1 - e^{-theta}`, the height for which the standard rectangle
/// `R_(1, inf, 0, y_theta)` has area `theta`.
pub fn y_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::NonPositiveAngle { theta });
    }
    Ok(1.0 - (-theta).exp())
}

/// A rectangle of dS with lightlike boundary, named by its projections:
/// the point set is the cyclic-interval product `[x_a, x_c] x [y_a, y_c]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LightlikeRectangle {
    pub x_a: ProjectivePoint,
    pub x_c: ProjectivePoint,
    pub y_a: ProjectivePoint,
    pub y_c: ProjectivePoint,
}

impl LightlikeRectangle {
    pub fn new(
        x_a: ProjectivePoint,
        x_c: ProjectivePoint,
        y_a: ProjectivePoint,
        y_c: ProjectivePoint,
    ) -> Result<Self> {
        if cyclic_order(&y_a, &y_c, &x_a) != CyclicOrder::Positive {
            return Err(Error::DegenerateRectangle {
                reason: format!("(y_a, y_c, x_a) = ({y_a}, {y_c}, {x_a}) not positively ordered"),
            });
        }
        if cyclic_order(&x_a, &x_c, &y_a) != CyclicOrder::Positive {
            return Err(Error::DegenerateRectangle {
                reason: format!("(x_a, x_c, y_a) = ({x_a}, {x_c}, {y_a}) not positively ordered"),
            });
        }
        Ok(Self { x_a, x_c, y_a, y_c })
    }

    /// The standard rectangle `R_theta = R_(1, inf, 0, y_theta)` of area theta.
    pub fn standard(theta: f64) -> Result<Self> {
        let y = y_theta(theta)?;
        Self::new(
            ProjectivePoint::finite(1.0),
            ProjectivePoint::infinity(),
            ProjectivePoint::finite(0.0),
            ProjectivePoint::finite(y),
        )
    }

    pub fn transform(&self, m: &MoebiusMap) -> Self {
        Self {
            x_a: m.apply(&self.x_a),
            x_c: m.apply(&self.x_c),
            y_a: m.apply(&self.y_a),
            y_c: m.apply(&self.y_c),
        }
    }

    pub fn corners(&self) -> [DSPoint; 4] {
        [
            DSPoint { x: self.x_a, y: self.y_a },
            DSPoint { x: self.x_c, y: self.y_a },
            DSPoint { x: self.x_c, y: self.y_c },
            DSPoint { x: self.x_a, y: self.y_c },
        ]
    }
}

/// Möbius map taking the rectangle into a bounded affine chart:
/// `(y_a, x_a, x_c) -> (0, 1, 2)`, so the y-interval lands in `[0, 1)` and
/// the x-interval in `[1, 2]`.
pub fn canonical_chart(r: &LightlikeRectangle) -> Result<MoebiusMap> {
    let m = MoebiusMap::from_triples(
        (&r.y_a, &r.x_a, &r.x_c),
        (
            &ProjectivePoint::finite(0.0),
            &ProjectivePoint::finite(1.0),
            &ProjectivePoint::finite(2.0),
        ),
    )
    .map_err(|_| Error::ChartFailure)?;
    let yc = m.apply(&r.y_c);
    let t = yc.affine();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::ChartFailure);
    }
    Ok(m)
}

/// Area of a bounded coordinate rectangle `[x1, x2] x [y1, y2]` for
/// `dx dy / (x - y)^2`; requires the intervals to be disjoint.
pub fn chart_rectangle_area(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    // iterated integration gives the log of a cross-ratio of the four edges
    (((x2 - y2) * (x1 - y1)) / ((x2 - y1) * (x1 - y2))).ln()
}

/// Closed-form area of a lightlike rectangle: the log of the cross-ratio of
/// its four boundary coordinates. Projectively invariant, no chart needed.
pub fn area_rectangle(r: &LightlikeRectangle) -> Result<f64> {
    let num = ProjectivePoint::det(&r.x_a, &r.y_a) * ProjectivePoint::det(&r.x_c, &r.y_c);
    let den = ProjectivePoint::det(&r.x_a, &r.y_c) * ProjectivePoint::det(&r.x_c, &r.y_a);
    let ratio = num / den;
    if !(ratio > 1.0) {
        return Err(Error::DegenerateRectangle {
            reason: format!("area cross-ratio {ratio} not > 1"),
        });
    }
    Ok(ratio.ln())
}

/// Reference value for `area_rectangle`: adaptive-free tensor Gauss-Legendre
/// quadrature of `dx dy / (x - y)^2` in the canonical bounded chart. Slow but
/// independent of the closed form; used to validate it.
pub fn area_rectangle_quadrature(r: &LightlikeRectangle) -> Result<f64> {
    let chart = canonical_chart(r)?;
    let yc = chart.apply(&r.y_c).affine();
    let (nodes, weights) = gauss_legendre(24);
    // 4x4 panels keep the integrand well resolved when yc approaches 1
    let panels = 4;
    let mut total = 0.0;
    for px in 0..panels {
        let (xa, xb) = panel(1.0, 2.0, px, panels);
        for py in 0..panels {
            let (ya, yb) = panel(0.0, yc, py, panels);
            let mut s = 0.0;
            for (xi, wx) in nodes.iter().zip(&weights) {
                let x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * xi;
                for (yi, wy) in nodes.iter().zip(&weights) {
                    let y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * yi;
                    let d = x - y;
                    s += wx * wy / (d * d);
                }
            }
            total += s * 0.25 * (xb - xa) * (yb - ya);
        }
    }
    Ok(total)
}

fn panel(a: f64, b: f64, i: usize, n: usize) -> (f64, f64) {
    let w = (b - a) / n as f64;
    (a + w * i as f64, a + w * (i + 1) as f64)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The L-shaped polygon: the rectangle `[1, inf] x [0, y_plus]` with the
/// corner `(x, inf] x (y, y_plus]` removed, where `y_plus` is derived so the
/// area is exactly `theta`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LShapedPolygon {
    pub theta: f64,
    pub x: ProjectivePoint,
    pub y: f64,
    pub y_plus: f64,
}

/// `y_plus = (-x + e^theta (x - y)) / (-1 + e^theta (x - y))`, evaluated
/// homogeneously in x so `x = inf` needs no special case.
pub fn y_plus_of(theta: f64, x: &ProjectivePoint, y: f64) -> f64 {
    let e = theta.exp();
    // numerator: (e - 1) x - e y ; denominator: e x - (1 + e y)
    let num = (e - 1.0) * x.a() - e * y * x.b();
    let den = e * x.a() - (1.0 + e * y) * x.b();
    num / den
}

impl LShapedPolygon {
    /// Requires `(x, y)` in the interior-plus-degenerate part of the domain:
    /// `x` in `(1, inf]`, `y` in `(0, y_theta]` with `y > 1 - e^{-theta} x`.
    /// The boundary families of the domain (y = 0 edge and the slanted edge)
    /// change the object's type and are rejected here.
    pub fn new(theta: f64, x: ProjectivePoint, y: f64) -> Result<Self> {
        let yt = y_theta(theta)?;
        let one = ProjectivePoint::finite(1.0);
        let x_ok = x.is_infinity()
            || (cyclic_order(&one, &x, &ProjectivePoint::infinity()) == CyclicOrder::Positive);
        if !x_ok {
            return Err(Error::OutsideDomain);
        }
        if !(y > 0.0) || y > yt + 1e-12 {
            return Err(Error::OutsideDomain);
        }
        if !x.is_infinity() {
            let slack = y - (1.0 - (-theta).exp() * x.affine());
            if slack <= -1e-12 {
                return Err(Error::OutsideDomain);
            }
            if slack <= 1e-12 {
                return Err(Error::BoundaryCase);
            }
        }
        let y_plus = y_plus_of(theta, &x, y);
        Ok(Self { theta, x, y: y.min(yt), y_plus })
    }
}

/// Area of the L-shaped polygon: big rectangle minus the cut rectangle.
/// Equals `theta` by construction of `y_plus`.
pub fn area_lshape(p: &LShapedPolygon) -> Result<f64> {
    let one = ProjectivePoint::finite(1.0);
    let inf = ProjectivePoint::infinity();
    let zero = ProjectivePoint::finite(0.0);
    let ypl = ProjectivePoint::finite(p.y_plus);
    let big = LightlikeRectangle::new(one, inf, zero, ypl)?;
    let big_area = area_rectangle(&big)?;
    // degenerate cut when x = inf or y = y_plus (then L = R_theta)
    if p.x.is_infinity() || (p.y_plus - p.y).abs() <= 1e-12 {
        return Ok(big_area);
    }
    let cut = LightlikeRectangle::new(p.x, inf, ProjectivePoint::finite(p.y), ypl)?;
    Ok(big_area - area_rectangle(&cut)?)
}
