//! Dyadic geometry of the unit disk.
//!
//! The disk is cut into coronae `Γ_n = {1 - 2^-n <= |z| < 1 - 2^-(n+1)}` and
//! each corona into `2^n` equal angular sectors (Luecking boxes). Arguments are
//! normalized to `[0, 2π)` and sectors are half-open on the right, so every
//! point of the open disk has exactly one box.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Argument of `z` normalized to `[0, 2π)`.
pub fn arg_2pi(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Normalize an angle to `[0, 2π)`.
pub fn normalize_angle(t: f64) -> f64 {
    let a = t.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Signed angular difference `t - s` folded into `(-π, π]`.
pub fn angle_diff(t: f64, s: f64) -> f64 {
    let d = (t - s).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::invalid(format!("non-finite point ({re}, {im})")));
        }
        if re * re + im * im >= 1.0 {
            return Err(Error::invalid(format!(
                "point ({re}, {im}) is not in the open unit disk"
            )));
        }
        Ok(DiskPoint { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::invalid(format!("modulus {r} outside [0, 1)")));
        }
        let z = Complex64::from_polar(r, theta);
        // Rounding can push r·e^{iθ} onto the circle when r is within an ulp of 1.
        Self::new(z.re, z.im)
    }

    pub fn origin() -> Self {
        DiskPoint { re: 0.0, im: 0.0 }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Argument in `[0, 2π)`; the origin has argument 0.
    pub fn arg(&self) -> f64 {
        arg_2pi(self.to_complex())
    }

    pub fn distance(&self, other: &DiskPoint) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }
}

/// Inner radius `1 - 2^-n` of the corona `Γ_n`.
pub fn corona_inner(n: u32) -> f64 {
    1.0 - (-(n as f64)).exp2()
}

/// Outer radius `1 - 2^-(n+1)` of the corona `Γ_n`.
pub fn corona_outer(n: u32) -> f64 {
    1.0 - (-(n as f64 + 1.0)).exp2()
}

/// Generation of the corona containing modulus `r` in `[0, 1)`.
pub fn generation_of_modulus(r: f64) -> u32 {
    if r < 0.5 {
        return 0;
    }
    let mut n = (-(1.0 - r).log2()).floor().max(0.0) as u32;
    while n > 0 && r < corona_inner(n) {
        n -= 1;
    }
    while r >= corona_outer(n) {
        n += 1;
    }
    n
}

/// Index of the Luecking box `R_{n,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoxIndex {
    pub n: u32,
    pub j: u64,
}

impl BoxIndex {
    pub fn new(n: u32, j: u64) -> Result<Self> {
        if n > 62 {
            return Err(Error::invalid(format!("generation {n} too deep")));
        }
        if j >= 1u64 << n {
            return Err(Error::invalid(format!("box index j={j} out of range for n={n}")));
        }
        Ok(BoxIndex { n, j })
    }

    /// Number of boxes in generation `n`.
    pub fn count(n: u32) -> u64 {
        1u64 << n
    }

    pub fn angular_width(&self) -> f64 {
        TAU / (1u64 << self.n) as f64
    }

    /// `[r_lo, r_hi) × [θ_lo, θ_hi)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let w = self.angular_width();
        (
            corona_inner(self.n),
            corona_outer(self.n),
            self.j as f64 * w,
            (self.j + 1) as f64 * w,
        )
    }

    pub fn center(&self) -> DiskPoint {
        let (r0, r1, t0, t1) = self.bounds();
        DiskPoint::from_polar(0.5 * (r0 + r1), 0.5 * (t0 + t1)).expect("box center inside disk")
    }

    pub fn contains(&self, z: &DiskPoint) -> bool {
        box_index(z) == *self
    }
}

/// The unique Luecking box containing `z`.
pub fn box_index(z: &DiskPoint) -> BoxIndex {
    let n = generation_of_modulus(z.modulus());
    let count = 1u64 << n;
    let j = ((z.arg() / TAU) * count as f64).floor() as u64;
    BoxIndex { n, j: j.min(count - 1) }
}

/// Box of the `N`-corona `{1 - 1/N <= |z| < 1 - 1/(2N)}` containing `z`, if any.
/// The `N` boxes split the corona into equal half-open angular sectors.
pub fn corona_box(z: &DiskPoint, big_n: usize) -> Option<usize> {
    let nf = big_n as f64;
    let r = z.modulus();
    if r < 1.0 - 1.0 / nf || r >= 1.0 - 0.5 / nf {
        return None;
    }
    let j = ((z.arg() / TAU) * nf).floor() as usize;
    Some(j.min(big_n - 1))
}

/// Carleson window `W(ξ, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    xi: f64,
    h: f64,
}

impl Window {
    pub fn new(xi: f64, h: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid("window angle must be finite"));
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid(format!("window size {h} outside (0, 1]")));
        }
        Ok(Window {
            xi: normalize_angle(xi),
            h,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

pub fn in_window(z: &DiskPoint, w: &Window) -> bool {
    if z.modulus() < 1.0 - w.h {
        return false;
    }
    if z.modulus() == 0.0 {
        return true;
    }
    angle_diff(z.arg(), w.xi).abs() <= w.h
}

/// Stolz domain `Σ_ξ`: interior of the convex hull of `D(0, 1/2)` and `e^{iξ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StolzDomain {
    xi: f64,
}

impl StolzDomain {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid("Stolz vertex angle must be finite"));
        }
        Ok(StolzDomain {
            xi: normalize_angle(xi),
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Membership in `Σ_1` for a complex number (rotated frame).
///
/// The hull is the disk of radius 1/2 plus the triangle cut off by the two
/// tangent lines from 1, which meet the circle at `e^{±iπ/3}/2` and make the
/// half-angle π/6 at the vertex; beyond the chord `Re z = 1/4` it is the cone.
fn in_stolz_unit(w: Complex64) -> bool {
    if w.norm_sqr() < 0.25 {
        return true;
    }
    w.re > 0.25 && (Complex64::new(1.0, 0.0) - w).arg().abs() < PI / 6.0
}

pub fn in_stolz(z: &DiskPoint, s: &StolzDomain) -> bool {
    in_stolz_unit(z.to_complex() * Complex64::from_polar(1.0, -s.xi))
}

/// Half-width of the arc of the circle `|z| = r` that lies inside `Σ_1`:
/// `r e^{iθ} ∈ Σ_1` iff `|θ| < half-width` (for `r < 1/2` the whole circle).
pub fn stolz_arc_halfwidth(r: f64) -> f64 {
    if r < 0.5 {
        return PI;
    }
    if r >= 1.0 {
        return 0.0;
    }
    // Intersect |z| = r with the tangent line 1 + s·e^{i5π/6}, s ∈ [0, √3/2].
    let s = 0.5 * (3f64.sqrt() - (4.0 * r * r - 1.0).sqrt());
    let p = Complex64::new(1.0, 0.0) + Complex64::from_polar(s, 5.0 * PI / 6.0);
    p.arg()
}

/// Fraction of the circle `|z| = r` inside a Stolz domain.
pub fn stolz_arc_fraction(r: f64) -> f64 {
    stolz_arc_halfwidth(r) / PI
}

/// Largest `|1 - z| / (1 - |z|^2)` over `Σ_1`, attained at `z = -1/2`.
pub const STOLZ_APERTURE: f64 = 2.0;

/// A maximal `2^-(n+2)`-net in the corona `Γ_n` with nearest-point cells.
///
/// For `n >= 1` the net is a ring lattice: two concentric rings inside the
/// corona, each carrying equally spaced points whose chord spacing lies in
/// `(ε, 1.2ε]` with `ε = 2^-(n+2)`. The rings are `1.05ε` apart and sit
/// `0.45ε` and `0.5ε` from the corona edges, which puts every point of the
/// corona within about `0.82ε` of the net while all net points stay more than
/// `ε` apart. Generation 0 is the single point 0 with cell `{|z| < 1/2}`.
#[derive(Debug, Clone)]
pub struct CoronaNet {
    n: u32,
    points: Vec<DiskPoint>,
    rings: Vec<NetRing>,
}

#[derive(Debug, Clone, Copy)]
struct NetRing {
    radius: f64,
    count: usize,
    offset: f64,
    start: usize,
}

impl CoronaNet {
    pub fn generation(&self) -> u32 {
        self.n
    }

    pub fn radius(&self) -> f64 {
        (-(self.n as f64 + 2.0)).exp2()
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the cell `E_{n,k}` containing `z`, or `None` when `z ∉ Γ_n`.
    /// Ties between equidistant net points go to the smaller index.
    pub fn cell_of(&self, z: &DiskPoint) -> Option<usize> {
        if generation_of_modulus(z.modulus()) != self.n {
            return None;
        }
        if self.n == 0 {
            return Some(0);
        }
        let theta = z.arg();
        let mut best: Option<(f64, usize)> = None;
        for ring in &self.rings {
            let step = TAU / ring.count as f64;
            let nearest = ((theta - ring.offset) / step).round() as i64;
            for d in -1..=1 {
                let k = (nearest + d).rem_euclid(ring.count as i64) as usize;
                let idx = ring.start + k;
                let dist = z.distance(&self.points[idx]);
                best = match best {
                    Some((bd, bi)) if bd < dist || (bd == dist && bi < idx) => Some((bd, bi)),
                    _ => Some((dist, idx)),
                };
            }
        }
        best.map(|(_, i)| i)
    }
}

/// Build the net of generation `n`.
pub fn net(n: u32) -> CoronaNet {
    if n == 0 {
        return CoronaNet {
            n,
            points: vec![DiskPoint::origin()],
            rings: Vec::new(),
        };
    }
    let eps = (-(n as f64 + 2.0)).exp2();
    let inner = corona_inner(n);
    let radii = [inner + 0.45 * eps, inner + 1.5 * eps];
    let mut points = Vec::new();
    let mut rings = Vec::new();
    for (k, &radius) in radii.iter().enumerate() {
        let count = (TAU * radius / (1.2 * eps)).ceil() as usize;
        let step = TAU / count as f64;
        let offset = if k == 0 { 0.0 } else { 0.5 * step };
        let start = points.len();
        for i in 0..count {
            points.push(
                DiskPoint::from_polar(radius, offset + i as f64 * step).expect("net ring inside disk"),
            );
        }
        rings.push(NetRing {
            radius,
            count,
            offset,
            start,
        });
    }
    debug_assert!(rings.iter().all(|r| r.radius < corona_outer(n)));
    CoronaNet { n, points, rings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn box_index_examples() {
        assert_eq!(box_index(&pt(0.6, 0.0)), BoxIndex { n: 1, j: 0 });
        assert_eq!(box_index(&pt(0.3, 0.0)), BoxIndex { n: 0, j: 0 });
        assert_eq!(box_index(&pt(-0.6, 0.0)), BoxIndex { n: 1, j: 1 });
    }

    #[test]
    fn boundary_radii_follow_half_open_convention() {
        assert_eq!(generation_of_modulus(0.5), 1);
        assert_eq!(generation_of_modulus(0.75), 2);
        assert_eq!(generation_of_modulus(0.4999999), 0);
        assert_eq!(generation_of_modulus(1.0 - 2f64.powi(-30)), 30);
    }

    #[test]
    fn rejects_points_on_circle() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn window_examples() {
        let w = Window::new(0.0, 0.2).unwrap();
        assert!(in_window(&pt(0.9, 0.0), &w));
        assert!(!in_window(&pt(0.5, 0.0), &w));
        let z = DiskPoint::from_polar(0.9, 0.3).unwrap();
        assert!(!in_window(&z, &w));
        assert!(in_window(&DiskPoint::origin(), &Window::new(2.0, 1.0).unwrap()));
    }

    #[test]
    fn stolz_examples() {
        let s = StolzDomain::new(0.0).unwrap();
        assert!(in_stolz(&DiskPoint::origin(), &s));
        assert!(in_stolz(&pt(0.99, 0.0), &s));
        assert!(!in_stolz(&pt(-0.99, 0.0), &s));
        let s2 = StolzDomain::new(1.3).unwrap();
        assert!(in_stolz(&DiskPoint::from_polar(0.99, 1.3).unwrap(), &s2));
    }

    #[test]
    fn stolz_arc_matches_predicate() {
        let s = StolzDomain::new(0.0).unwrap();
        for &r in &[0.5001, 0.6, 0.75, 0.9, 0.99, 0.999] {
            let hw = stolz_arc_halfwidth(r);
            let inside = DiskPoint::from_polar(r, hw * (1.0 - 1e-9)).unwrap();
            let outside = DiskPoint::from_polar(r, hw * (1.0 + 1e-9) + 1e-12).unwrap();
            assert!(in_stolz(&inside, &s), "r={r}");
            assert!(!in_stolz(&outside, &s), "r={r}");
        }
        assert!((stolz_arc_halfwidth(0.5) - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn generation_zero_net_is_origin() {
        let g = net(0);
        assert_eq!(g.len(), 1);
        assert_eq!(g.points()[0], DiskPoint::origin());
        assert_eq!(g.cell_of(&pt(0.2, -0.1)), Some(0));
        assert_eq!(g.cell_of(&pt(0.6, 0.0)), None);
    }
}
