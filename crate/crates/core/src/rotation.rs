//! Rotation and translation numbers of circle maps, cyclic orders of orbits,
//! rationality certificates and asymptotic-cycle bookkeeping.
//!
//! The estimator keeps a rigorous bracket around the translation number. The
//! coarse part comes from the classical bound |F^n(x) - x - n tau| <= 1; near
//! mode-locking plateaux that bound stalls at width 2/n, so the bracket is
//! tightened by testing cyclic orders against candidate rationals from the
//! Stern-Brocot tree, which pins a rational r to the window (r - 1/q, r + 1/q)
//! after only ~q iterates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hiet::CircleMap;

/// Default cap on certificate periods.
pub const DEFAULT_Q_MAX: u64 = 64;
/// Default tolerance for a near-return to count as a periodic orbit.
pub const DEFAULT_RETURN_TOL: f64 = 1e-9;

/// A monotone degree-one lift of a circle map, with `F(0)` in `[0, 1)`.
#[derive(Clone, Debug)]
pub struct Lift {
    base: CircleMap,
}

impl Lift {
    pub fn new(base: CircleMap) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &CircleMap {
        &self.base
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.base.lift(t)
    }

    /// Lift orbit `F^n(x)` for `n = 0, ..., budget`.
    pub fn orbit(&self, x: f64, budget: usize) -> Vec<f64> {
        let mut orbit = Vec::with_capacity(budget + 1);
        let mut t = x;
        orbit.push(t);
        for _ in 0..budget {
            t = self.eval(t);
            orbit.push(t);
        }
        orbit
    }
}

/// A rotation number: an exact rational with a verified periodic orbit, or a
/// bracketed estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum RotationNumber {
    Rational {
        p: i64,
        q: u64,
        /// The certified orbit in circle coordinates.
        orbit: Vec<f64>,
    },
    Estimate { value: f64, error_bound: f64 },
}

impl RotationNumber {
    pub fn value(&self) -> f64 {
        match self {
            RotationNumber::Rational { p, q, .. } => {
                (*p as f64 / *q as f64).rem_euclid(1.0)
            }
            RotationNumber::Estimate { value, .. } => *value,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            RotationNumber::Rational { .. } => 0.0,
            RotationNumber::Estimate { error_bound, .. } => *error_bound,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RotationNumber::Rational { .. })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The rational with smallest denominator in the closed interval `[lo, hi]`,
/// by Stern-Brocot descent.
pub fn simplest_rational_in(lo: f64, hi: f64) -> (i64, u64) {
    assert!(lo <= hi);
    let base = lo.floor() as i64;
    let (mut a, mut b) = (lo - base as f64, hi - base as f64);
    if a <= 0.0 {
        return (base, 1);
    }
    if b >= 1.0 {
        return (base + 1, 1);
    }
    // Stern-Brocot search for the simplest fraction in [a, b] within (0, 1)
    let (mut ln, mut ld, mut rn, mut rd) = (0i64, 1i64, 1i64, 1i64);
    for _ in 0..256 {
        let (mn, md) = (ln + rn, ld + rd);
        let m = mn as f64 / md as f64;
        if m < a {
            ln = mn;
            ld = md;
        } else if m > b {
            rn = mn;
            rd = md;
        } else {
            return (base * md + mn, md as u64);
        }
    }
    (base, 1)
}

/// Exact combinatorial test: does `orbit` (q pairwise distinct circle points)
/// have the cyclic order of the rigid rotation by `p/q`?
///
/// Works on sorted ranks only, with no tolerance: the orbit point `k` must
/// have rank `k p mod q` relative to the starting point.
pub fn cyclic_order_matches(orbit: &[f64], p: i64, q: u64) -> Result<bool> {
    let n = orbit.len();
    if n as u64 != q || n == 0 {
        return Ok(false);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if orbit[i] == orbit[j] {
                return Err(Error::DuplicatePoints);
            }
        }
    }
    if gcd(p.rem_euclid(q as i64) as u64, q) != 1 && q > 1 {
        return Ok(false);
    }
    // rank of each orbit point among all of them, measured from orbit[0]
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| orbit[i].partial_cmp(&orbit[j]).unwrap());
    let mut rank = vec![0usize; n];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r;
    }
    let r0 = rank[0];
    let q_i = q as i64;
    for (k, &r) in rank.iter().enumerate() {
        let want = (k as i64 * p).rem_euclid(q_i);
        let got = (r as i64 - r0 as i64).rem_euclid(q_i);
        if want != got {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Search for a periodic orbit of `map` through `p0` (a circle coordinate):
/// returns the reduced `(p, q)` of its combinatorial cyclic order if the
/// orbit closes up within `return_tol` at some period `q <= q_max`.
pub fn orbit_cyclic_order(
    map: &CircleMap,
    p0: f64,
    q_max: u64,
    return_tol: f64,
) -> Option<(i64, u64)> {
    let lift = Lift::new(map.clone());
    let orbit = lift.orbit(p0.rem_euclid(1.0), q_max as usize);
    for q in 1..=q_max as usize {
        let disp = orbit[q] - orbit[0];
        let p = disp.round();
        if (disp - p).abs() <= return_tol {
            let circle: Vec<f64> = orbit[..q].iter().map(|t| t.rem_euclid(1.0)).collect();
            let p = p as i64;
            let q_u = q as u64;
            let g = gcd(p.rem_euclid(q as i64) as u64, q_u).max(1);
            if g != 1 {
                continue; // a shorter period would have been found first
            }
            match cyclic_order_matches(&circle, p, q_u) {
                Ok(true) => return Some((p.rem_euclid(q as i64), q_u)),
                _ => continue,
            }
        }
    }
    None
}

/// Translation number of a lift with a rigorous bracket.
///
/// Returns `(value, error_bound)` with `error_bound <= tol`, or
/// `BudgetExceeded` carrying the best estimate.
pub fn translation_number(lift: &Lift, budget: usize, tol: f64) -> Result<(f64, f64)> {
    let (value, bound) = translation_estimate(lift, budget);
    if bound <= tol {
        Ok((value, bound))
    } else {
        Err(Error::BudgetExceeded { best: value, bound })
    }
}

/// Best-effort translation number estimate: never fails, returns the bracket
/// midpoint and half-width.
pub fn translation_estimate(lift: &Lift, budget: usize) -> (f64, f64) {
    let budget = budget.max(4);
    let orbit = lift.orbit(0.0, budget);
    // coarse rigorous bracket from |F^n(0) - n tau| <= 1
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (n, a) in orbit.iter().enumerate().skip(1) {
        lo = lo.max((a - 1.0) / n as f64);
        hi = hi.min((a + 1.0) / n as f64);
    }
    if lo > hi {
        // numerical inversion can only come from rounding; collapse
        let mid = 0.5 * (lo + hi);
        lo = mid;
        hi = mid;
    }
    if !lift.base().is_endomorphism() {
        // Stern-Brocot tightening through cyclic-order bracketing: if the
        // first q points are ordered like the rigid rotation by p/q, the
        // position of the q-th iterate relative to the orbit pins tau inside
        // (or outside) a window of width 1/q around p/q.
        for _ in 0..64 {
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
            let (p, q) = simplest_rational_in(lo, hi);
            let q_us = q as usize;
            if q < 2 || q_us >= budget / 2 {
                break;
            }
            let r = p as f64 / q as f64;
            let win = 1.0 / q as f64;
            let circle: Vec<f64> = orbit[..q_us].iter().map(|t| t.rem_euclid(1.0)).collect();
            if !matches!(cyclic_order_matches(&circle, p, q), Ok(true)) {
                break;
            }
            // neighbors of the basepoint among the orbit points
            let x0 = circle[0];
            let mut d_up = 1.0f64;
            let mut d_dn = 0.0f64;
            for &c in &circle[1..] {
                let d = (c - x0).rem_euclid(1.0);
                d_up = d_up.min(d);
                d_dn = d_dn.max(d);
            }
            let d_t = (orbit[q_us] - orbit[0]).rem_euclid(1.0);
            let (new_lo, new_hi);
            if d_t <= 1e-15 || d_t >= 1.0 - 1e-15 {
                new_lo = r;
                new_hi = r;
            } else if d_t <= d_up {
                // q-th iterate lands in the component starting at the basepoint
                new_lo = r;
                new_hi = r + win;
            } else if d_t >= d_dn {
                // it lands in the component ending at the basepoint
                new_lo = r - win;
                new_hi = r;
            } else {
                // not adjacent: tau is outside (r - 1/q, r + 1/q); keep the
                // side of the bracket that survives, if it is unambiguous
                let left_ok = lo <= r - win;
                let right_ok = hi >= r + win;
                if left_ok && !right_ok {
                    hi = hi.min(r - win);
                } else if right_ok && !left_ok {
                    lo = lo.max(r + win);
                } else {
                    break;
                }
                continue;
            }
            let tl = lo.max(new_lo);
            let th = hi.min(new_hi);
            if tl > th || (hi - lo) - (th - tl) < f64::EPSILON {
                break;
            }
            lo = tl;
            hi = th;
        }
    }
    (0.5 * (lo + hi), 0.5 * (hi - lo))
}

/// Rotation number of a circle map: a rational certificate when a periodic
/// orbit is found within the budget, otherwise a bracketed estimate.
pub fn rotation_number(map: &CircleMap, budget: usize, tol: f64) -> Result<RotationNumber> {
    rotation_number_opts(map, budget, tol, DEFAULT_Q_MAX, DEFAULT_RETURN_TOL)
}

pub fn rotation_number_opts(
    map: &CircleMap,
    budget: usize,
    tol: f64,
    q_max: u64,
    return_tol: f64,
) -> Result<RotationNumber> {
    if let Some(cert) = rational_certificate(map, budget, q_max, return_tol) {
        return Ok(cert);
    }
    let lift = Lift::new(map.clone());
    let (value, bound) = translation_estimate(&lift, budget);
    if bound <= tol {
        Ok(RotationNumber::Estimate { value: value.rem_euclid(1.0), error_bound: bound })
    } else {
        Err(Error::BudgetExceeded { best: value.rem_euclid(1.0), bound })
    }
}

/// Like `rotation_number` but never errors: budget overruns degrade to a
/// wide-bound estimate.
pub fn rotation_measure(map: &CircleMap, budget: usize) -> RotationNumber {
    match rotation_number_opts(map, budget, f64::INFINITY, DEFAULT_Q_MAX, DEFAULT_RETURN_TOL) {
        Ok(r) => r,
        Err(_) => unreachable!("infinite tolerance cannot exceed budget"),
    }
}

fn rational_certificate(
    map: &CircleMap,
    budget: usize,
    q_max: u64,
    return_tol: f64,
) -> Option<RotationNumber> {
    let lift = Lift::new(map.clone());
    // burn in from a few basepoints so attracting periodic orbits are reached
    let burn = (budget / 4).clamp(64, 4096);
    for &start in &[0.0, 0.381966, 0.718281] {
        let mut t = start;
        for _ in 0..burn {
            t = lift.eval(t).rem_euclid(1.0);
        }
        let orbit = lift.orbit(t, q_max as usize);
        for q in 1..=q_max as usize {
            let disp = orbit[q] - orbit[0];
            let p = disp.round();
            if (disp - p).abs() <= return_tol {
                let p_i = p as i64;
                let q_u = q as u64;
                if q_u > 1 && gcd(p_i.rem_euclid(q as i64) as u64, q_u) != 1 {
                    continue;
                }
                let circle: Vec<f64> = orbit[..q].iter().map(|v| v.rem_euclid(1.0)).collect();
                if matches!(cyclic_order_matches(&circle, p_i, q_u), Ok(true)) {
                    return Some(RotationNumber::Rational {
                        p: p_i.rem_euclid(q as i64),
                        q: q_u,
                        orbit: circle,
                    });
                }
            }
        }
    }
    None
}

/// Slope data of a homology ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Rational { p: i64, q: u64 },
    Real(f64),
}

impl Slope {
    pub fn value(&self) -> f64 {
        match self {
            Slope::Rational { p, q } => *p as f64 / *q as f64,
            Slope::Real(v) => *v,
        }
    }
}

/// An oriented ray `R^+ [a + slope * b]` in first homology, on a marked basis
/// `(a_class, b_class)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomologyRay {
    pub slope: Slope,
    pub sign: i8,
    pub a_label: String,
    pub b_label: String,
}

impl HomologyRay {
    pub fn is_rational(&self) -> bool {
        matches!(self.slope, Slope::Rational { .. })
    }
}

/// The oriented asymptotic-cycle ray `R^+ [a + (u + n) b]` determined by a
/// rotation number `u` and a measured winding integer `n`.
pub fn asymptotic_cycle(
    u: &RotationNumber,
    n: i64,
    basis_labels: (&str, &str),
) -> HomologyRay {
    let slope = match u {
        RotationNumber::Rational { p, q, .. } => Slope::Rational {
            p: p + n * *q as i64,
            q: *q,
        },
        RotationNumber::Estimate { value, .. } => Slope::Real(value + n as f64),
    };
    HomologyRay {
        slope,
        sign: 1,
        a_label: basis_labels.0.to_string(),
        b_label: basis_labels.1.to_string(),
    }
}

/// A pure rigid rotation as a circle map on `[0, 1)`; mostly for tests and
/// calibration.
pub fn rigid_rotation(angle: f64) -> CircleMap {
    use crate::hiet::Piece;
    use crate::moebius::{MoebiusMap, ProjectivePoint};
    let a = angle.rem_euclid(1.0);
    let chart = MoebiusMap::identity();
    let interval = (ProjectivePoint::finite(0.0), ProjectivePoint::infinity());
    if a == 0.0 {
        return CircleMap::from_pieces(chart, interval, vec![0.0], vec![Piece::Moebius(
            MoebiusMap::identity(),
        )]);
    }
    let shift = MoebiusMap::new([1.0, a, 0.0, 1.0]).unwrap();
    CircleMap::from_pieces(
        chart,
        interval,
        vec![0.0, 1.0 - a],
        vec![Piece::Moebius(shift), Piece::Moebius(shift)],
    )
}
