//! Regions of space and the volumes of their intersections.
//!
//! Axis-aligned boxes intersect in boxes, so any list of boxes has an exact
//! overlap volume. Two spheres use the lens formula. Everything else falls
//! back to hit-or-miss sampling.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::montecarlo;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    fn total_cmp(&self, other: &Vec3) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Axis-aligned box given by its half edge lengths.
    Cuboid {
        half_extents: Vec3,
    },
    Sphere {
        radius: f64,
    },
}

impl Shape {
    fn rank(&self) -> u8 {
        match self {
            Shape::Cuboid { .. } => 0,
            Shape::Sphere { .. } => 1,
        }
    }

    fn total_cmp(&self, other: &Shape) -> Ordering {
        match (self, other) {
            (Shape::Cuboid { half_extents: a }, Shape::Cuboid { half_extents: b }) => {
                a.total_cmp(b)
            }
            (Shape::Sphere { radius: a }, Shape::Sphere { radius: b }) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// A spatial region with positive, finite volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    center: Vec3,
    shape: Shape,
}

impl Region {
    pub fn cuboid(center: Vec3, half_extents: Vec3) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidParameter("box center must be finite".into()));
        }
        let ok = |h: f64| h.is_finite() && h > 0.0;
        if !(ok(half_extents.x) && ok(half_extents.y) && ok(half_extents.z)) {
            return Err(Error::InvalidParameter(format!(
                "box half extents must be finite and positive, got {:?}",
                half_extents.to_array()
            )));
        }
        Ok(Region {
            center,
            shape: Shape::Cuboid { half_extents },
        })
    }

    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidParameter(
                "sphere center must be finite".into(),
            ));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be finite and positive, got {radius}"
            )));
        }
        Ok(Region {
            center,
            shape: Shape::Sphere { radius },
        })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_cuboid(&self) -> bool {
        matches!(self.shape, Shape::Cuboid { .. })
    }

    pub fn half_extents(&self) -> Option<Vec3> {
        match self.shape {
            Shape::Cuboid { half_extents } => Some(half_extents),
            Shape::Sphere { .. } => None,
        }
    }

    pub fn volume(&self) -> f64 {
        match self.shape {
            Shape::Cuboid { half_extents: h } => 8.0 * h.x * h.y * h.z,
            Shape::Sphere { radius } => sphere_volume(radius),
        }
    }

    pub fn translate(&self, by: Vec3) -> Region {
        self.centered_at(self.center + by)
    }

    pub fn centered_at(&self, center: Vec3) -> Region {
        Region {
            center,
            shape: self.shape,
        }
    }

    /// Isotropic scaling about the center.
    pub fn scaled(&self, factor: f64) -> Result<Region> {
        match self.shape {
            Shape::Cuboid { half_extents } => Region::cuboid(self.center, half_extents * factor),
            Shape::Sphere { radius } => Region::sphere(self.center, radius * factor),
        }
    }

    /// Euclidean diameter: the space diagonal for boxes.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Cuboid { half_extents } => 2.0 * half_extents.norm(),
            Shape::Sphere { radius } => 2.0 * radius,
        }
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let h = match self.shape {
            Shape::Cuboid { half_extents } => half_extents,
            Shape::Sphere { radius } => Vec3::splat(radius),
        };
        (self.center - h, self.center + h)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let d = p - self.center;
        match self.shape {
            Shape::Cuboid { half_extents: h } => {
                d.x.abs() <= h.x && d.y.abs() <= h.y && d.z.abs() <= h.z
            }
            Shape::Sphere { radius } => d.norm_squared() <= radius * radius,
        }
    }

    /// Whether the intersection has positive volume. Exact for every pair of shapes.
    pub fn intersects(&self, other: &Region) -> bool {
        let d = other.center - self.center;
        match (self.shape, other.shape) {
            (Shape::Cuboid { half_extents: a }, Shape::Cuboid { half_extents: b }) => {
                d.x.abs() < a.x + b.x && d.y.abs() < a.y + b.y && d.z.abs() < a.z + b.z
            }
            (Shape::Sphere { radius: r }, Shape::Sphere { radius: s }) => {
                d.norm_squared() < (r + s) * (r + s)
            }
            (Shape::Cuboid { half_extents: h }, Shape::Sphere { radius: r }) => {
                box_sphere_gap_squared(d, h) < r * r
            }
            (Shape::Sphere { radius: r }, Shape::Cuboid { half_extents: h }) => {
                box_sphere_gap_squared(-d, h) < r * r
            }
        }
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Region) -> bool {
        let d = (other.center - self.center).map(f64::abs);
        match (self.shape, other.shape) {
            (Shape::Cuboid { half_extents: a }, Shape::Cuboid { half_extents: b }) => {
                d.x + b.x <= a.x && d.y + b.y <= a.y && d.z + b.z <= a.z
            }
            (Shape::Cuboid { half_extents: a }, Shape::Sphere { radius: r }) => {
                d.x + r <= a.x && d.y + r <= a.y && d.z + r <= a.z
            }
            (Shape::Sphere { radius: r }, Shape::Sphere { radius: s }) => d.norm() + s <= r,
            (Shape::Sphere { radius: r }, Shape::Cuboid { half_extents: h }) => {
                (d + h).norm_squared() <= r * r
            }
        }
    }

    /// A point uniformly distributed in the region.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        match self.shape {
            Shape::Cuboid { half_extents: h } => {
                let u = Vec3::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                );
                self.center + Vec3::new(u.x * h.x, u.y * h.y, u.z * h.z)
            }
            Shape::Sphere { radius } => loop {
                let u = Vec3::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                );
                if u.norm_squared() <= 1.0 {
                    break self.center + u * radius;
                }
            },
        }
    }

    fn canonical_cmp(&self, other: &Region) -> Ordering {
        self.center
            .total_cmp(&other.center)
            .then_with(|| self.shape.total_cmp(&other.shape))
    }
}

/// Squared distance from a point (relative to a box center) to the box.
fn box_sphere_gap_squared(offset: Vec3, h: Vec3) -> f64 {
    let gap = |d: f64, h: f64| (d.abs() - h).max(0.0);
    let g = Vec3::new(gap(offset.x, h.x), gap(offset.y, h.y), gap(offset.z, h.z));
    g.norm_squared()
}

pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

/// Intersection volume of two spheres with radii `r1`, `r2` and center distance `d`.
pub fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return sphere_volume(r1.min(r2));
    }
    let (r, s) = (r1, r2);
    PI * (r + s - d).powi(2)
        * (d * d + 2.0 * d * s - 3.0 * s * s + 2.0 * d * r + 6.0 * s * r - 3.0 * r * r)
        / (12.0 * d)
}

/// Monte Carlo parameters for overlap configurations without a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
}

/// Exact overlap volume when one is available; `None` otherwise.
pub(crate) fn overlap_exact(regions: &[Region]) -> Option<f64> {
    match regions {
        [] => Some(0.0),
        [only] => Some(only.volume()),
        _ if regions.iter().all(Region::is_cuboid) => Some(cuboid_overlap(regions)),
        [a, b] => match (a.shape, b.shape) {
            (Shape::Sphere { radius: r }, Shape::Sphere { radius: s }) => {
                Some(lens_volume(r, s, (b.center - a.center).norm()))
            }
            _ if !a.intersects(b) => Some(0.0),
            _ => enclosed_volume(regions),
        },
        _ => {
            for (i, a) in regions.iter().enumerate() {
                if regions[i + 1..].iter().any(|b| !a.intersects(b)) {
                    return Some(0.0);
                }
            }
            enclosed_volume(regions)
        }
    }
}

/// Volume of a region that every other region encloses, if there is one.
fn enclosed_volume(regions: &[Region]) -> Option<f64> {
    regions
        .iter()
        .find(|inner| regions.iter().all(|outer| outer.encloses(inner)))
        .map(Region::volume)
}

fn cuboid_overlap(regions: &[Region]) -> f64 {
    let mut lo = [f64::NEG_INFINITY; 3];
    let mut hi = [f64::INFINITY; 3];
    for r in regions {
        let (a, b) = r.bounding_box();
        for (k, (&ak, &bk)) in a.to_array().iter().zip(b.to_array().iter()).enumerate() {
            lo[k] = lo[k].max(ak);
            hi[k] = hi[k].min(bk);
        }
    }
    (0..3).map(|k| (hi[k] - lo[k]).max(0.0)).product()
}

/// One unbiased sample of the overlap volume: exact where possible,
/// otherwise the volume of the smallest region times a hit indicator.
pub(crate) fn overlap_sample<R: Rng + ?Sized>(regions: &[Region], rng: &mut R) -> f64 {
    if let Some(v) = overlap_exact(regions) {
        return v;
    }
    let smallest = regions
        .iter()
        .min_by(|a, b| a.volume().total_cmp(&b.volume()))
        .expect("non-empty region list");
    let p = smallest.sample_uniform(rng);
    if regions.iter().all(|r| r.contains(p)) {
        smallest.volume()
    } else {
        0.0
    }
}

fn canonicalize(regions: &[Region]) -> Vec<Region> {
    let mut sorted = regions.to_vec();
    sorted.sort_by(Region::canonical_cmp);
    sorted.dedup();
    sorted
}

/// Volume of the intersection of all regions.
///
/// Lists of boxes and pairs of spheres are exact. Other combinations are
/// exact when some pair is provably disjoint, and otherwise need `mc`.
pub fn overlap_volume(regions: &[Region], mc: Option<McParams>) -> Result<Estimate> {
    if regions.is_empty() {
        return Err(Error::EmptyRegionList);
    }
    let regions = canonicalize(regions);
    if let Some(v) = overlap_exact(&regions) {
        return Ok(Estimate::exact(v));
    }
    let mc = mc.ok_or(Error::MissingMonteCarloParams)?;
    hit_sampling(&regions, mc, true)
}

/// Forces the hit-sampling path regardless of shape.
pub fn overlap_volume_mc(regions: &[Region], mc: McParams, parallel: bool) -> Result<Estimate> {
    if regions.is_empty() {
        return Err(Error::EmptyRegionList);
    }
    hit_sampling(&canonicalize(regions), mc, parallel)
}

/// Hit-or-miss sampling inside the intersection of all bounding boxes.
fn hit_sampling(regions: &[Region], mc: McParams, parallel: bool) -> Result<Estimate> {
    if mc.samples == 0 {
        return Err(Error::NonPositiveEffort("overlap samples"));
    }
    let mut lo = Vec3::splat(f64::NEG_INFINITY);
    let mut hi = Vec3::splat(f64::INFINITY);
    for r in regions {
        let (a, b) = r.bounding_box();
        lo = Vec3::new(lo.x.max(a.x), lo.y.max(a.y), lo.z.max(a.z));
        hi = Vec3::new(hi.x.min(b.x), hi.y.min(b.y), hi.z.min(b.z));
    }
    let ext = hi - lo;
    if ext.x <= 0.0 || ext.y <= 0.0 || ext.z <= 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let box_volume = ext.x * ext.y * ext.z;
    let m = montecarlo::average(mc.samples, mc.seed, parallel, |rng| {
        let p = Vec3::new(
            lo.x + ext.x * rng.random::<f64>(),
            lo.y + ext.y * rng.random::<f64>(),
            lo.z + ext.z * rng.random::<f64>(),
        );
        if regions.iter().all(|r| r.contains(p)) {
            1.0
        } else {
            0.0
        }
    });
    let n = m.count as f64;
    let p = m.mean;
    Ok(Estimate::monte_carlo(
        box_volume * p,
        box_volume * (p * (1.0 - p) / n).sqrt(),
        m.count,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cube(c: [f64; 3], h: f64) -> Region {
        Region::cuboid(c.into(), Vec3::splat(h)).unwrap()
    }

    #[test]
    fn enclosed_mixed_shapes_are_exact() {
        let ball = Region::sphere(Vec3::new(0.1, 0.0, 0.0), 0.5).unwrap();
        let big = cube([0.0; 3], 1.0);
        assert!(big.encloses(&ball) && !ball.encloses(&big));
        let v = overlap_volume(&[big, ball], None).unwrap();
        assert_eq!(v, Estimate::exact(ball.volume()));
        let small = cube([0.0; 3], 0.25);
        let outer = Region::sphere(Vec3::ZERO, 0.44).unwrap();
        assert!(outer.encloses(&small));
        assert!(!Region::sphere(Vec3::ZERO, 0.43).unwrap().encloses(&small));
        let v = overlap_volume(&[outer, small, big], None).unwrap();
        assert_eq!(v, Estimate::exact(small.volume()));
        // partial overlap still needs sampling
        let edge = Region::sphere(Vec3::new(1.0, 0.0, 0.0), 0.5).unwrap();
        assert_eq!(
            overlap_volume(&[big, edge], None),
            Err(Error::MissingMonteCarloParams)
        );
    }

    #[test]
    fn volumes() {
        assert_eq!(cube([0.0; 3], 1.0).volume(), 8.0);
        let s = Region::sphere(Vec3::ZERO, 1.0).unwrap();
        assert!((s.volume() - 4.188_790_204_786_391).abs() < 1e-14);
        let b = Region::cuboid(Vec3::ZERO, Vec3::new(0.5, 1.0, 2.0)).unwrap();
        assert_eq!(b.volume(), 8.0);
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(Region::cuboid(Vec3::ZERO, Vec3::new(1.0, 0.0, 1.0)).is_err());
        assert!(Region::sphere(Vec3::ZERO, -1.0).is_err());
        assert!(Region::sphere(Vec3::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn translation() {
        let b = cube([0.0; 3], 1.0);
        assert_eq!(
            b.translate(Vec3::new(1.0, 0.0, 0.0)).center(),
            Vec3::new(1.0, 0.0, 0.0)
        );
        assert_eq!(b.translate(Vec3::ZERO), b);
        let a = Vec3::new(0.25, -3.5, 8.0);
        assert_eq!(b.translate(a).translate(-a), b);
    }

    #[test]
    fn self_and_disjoint_overlap() {
        let b = cube([0.0; 3], 1.0);
        let e = overlap_volume(&[b, b], None).unwrap();
        assert_eq!((e.value, e.stderr), (8.0, 0.0));
        let far = cube([5.0, 0.0, 0.0], 1.0);
        assert_eq!(overlap_volume(&[b, far], None).unwrap().value, 0.0);
        // touching faces have zero measure
        let touching = cube([2.0, 0.0, 0.0], 1.0);
        assert_eq!(overlap_volume(&[b, touching], None).unwrap().value, 0.0);
        assert!(!b.intersects(&touching));
    }

    #[test]
    fn unit_sphere_lens() {
        let a = Region::sphere(Vec3::ZERO, 1.0).unwrap();
        let b = Region::sphere(Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let e = overlap_volume(&[a, b], None).unwrap();
        assert!((e.value - 5.0 * PI / 12.0).abs() < 1e-14);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn lens_limits() {
        assert_eq!(lens_volume(1.0, 1.0, 2.0), 0.0);
        assert_eq!(lens_volume(2.0, 0.5, 1.0), sphere_volume(0.5));
        // continuity at internal tangency
        let near = lens_volume(2.0, 0.5, 1.5 - 1e-9);
        assert!((near - sphere_volume(0.5)).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert_eq!(overlap_volume(&[], None), Err(Error::EmptyRegionList));
        let s = Region::sphere(Vec3::ZERO, 1.0).unwrap();
        let b = cube([0.5, 0.0, 0.0], 1.0);
        assert_eq!(
            overlap_volume(&[s, b], None),
            Err(Error::MissingMonteCarloParams)
        );
        let mc = McParams {
            samples: 0,
            seed: 1,
        };
        assert!(matches!(
            overlap_volume(&[s, b], Some(mc)),
            Err(Error::NonPositiveEffort(_))
        ));
    }

    #[test]
    fn box_sphere_mixed_mc() {
        // sphere fully inside the box: overlap is the sphere volume
        let s = Region::sphere(Vec3::ZERO, 0.5).unwrap();
        let b = cube([0.0; 3], 1.0);
        let e = overlap_volume(
            &[s, b],
            Some(McParams {
                samples: 200_000,
                seed: 3,
            }),
        )
        .unwrap();
        assert!(
            e.agrees_with(&Estimate::exact(sphere_volume(0.5)), 4.0, 0.0),
            "{e}"
        );
    }

    #[test]
    fn box_sphere_intersection_test() {
        let b = cube([0.0; 3], 1.0);
        // corner at (1,1,1), distance sqrt(3) from (2,2,2)
        let s = Region::sphere(Vec3::splat(2.0), 3f64.sqrt() + 1e-9).unwrap();
        assert!(b.intersects(&s) && s.intersects(&b));
        let s = Region::sphere(Vec3::splat(2.0), 3f64.sqrt() - 1e-9).unwrap();
        assert!(!b.intersects(&s) && !s.intersects(&b));
    }

    #[test]
    fn sphere_triple_is_mc_and_bounded() {
        let regions = [
            Region::sphere(Vec3::ZERO, 1.0).unwrap(),
            Region::sphere(Vec3::new(0.8, 0.0, 0.0), 1.0).unwrap(),
            Region::sphere(Vec3::new(0.4, 0.6, 0.0), 1.0).unwrap(),
        ];
        let mc = McParams {
            samples: 100_000,
            seed: 5,
        };
        let e = overlap_volume(&regions, Some(mc)).unwrap();
        assert_eq!(e.method, crate::EstimateMethod::MonteCarlo);
        let pair = overlap_volume(&regions[..2], None).unwrap();
        assert!(e.value <= pair.value + 4.0 * e.stderr);
    }

    fn arb_cube() -> impl Strategy<Value = Region> {
        (-4i32..4, -4i32..4, -4i32..4, 1i32..8, 1i32..8, 1i32..8).prop_map(|(x, y, z, a, b, c)| {
            Region::cuboid(
                Vec3::new(x as f64 * 0.5, y as f64 * 0.5, z as f64 * 0.5),
                Vec3::new(a as f64 * 0.25, b as f64 * 0.25, c as f64 * 0.25),
            )
            .unwrap()
        })
    }

    fn arb_region() -> impl Strategy<Value = Region> {
        prop_oneof![
            arb_cube(),
            (-4i32..4, -4i32..4, -4i32..4, 1i32..8).prop_map(|(x, y, z, r)| {
                Region::sphere(
                    Vec3::new(x as f64 * 0.5, y as f64 * 0.5, z as f64 * 0.5),
                    r as f64 * 0.25,
                )
                .unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn overlap_bounded_by_smallest_volume(regions in prop::collection::vec(arb_region(), 1..4)) {
            let mc = McParams { samples: 20_000, seed: 11 };
            let e = overlap_volume(&regions, Some(mc)).unwrap();
            let min = regions.iter().map(Region::volume).fold(f64::INFINITY, f64::min);
            prop_assert!(e.value <= min * (1.0 + 1e-12) + 4.0 * e.stderr);
            prop_assert!(e.value >= 0.0);
        }

        #[test]
        fn permutation_invariant(regions in prop::collection::vec(arb_region(), 1..4), rot in 0usize..4) {
            let mc = McParams { samples: 5_000, seed: 2 };
            let mut shuffled = regions.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            prop_assert_eq!(
                overlap_volume(&regions, Some(mc)).unwrap(),
                overlap_volume(&shuffled, Some(mc)).unwrap()
            );
        }

        #[test]
        fn duplicate_member_is_idempotent(regions in prop::collection::vec(arb_cube(), 1..4), pick in 0usize..4) {
            let mut extended = regions.clone();
            extended.push(regions[pick % regions.len()]);
            prop_assert_eq!(
                overlap_volume(&regions, None).unwrap(),
                overlap_volume(&extended, None).unwrap()
            );
        }

        #[test]
        fn joint_translation_exact(regions in prop::collection::vec(arb_cube(), 1..4),
                                   a in (-64i32..64, -64i32..64, -64i32..64)) {
            let shift = Vec3::new(a.0 as f64 * 0.125, a.1 as f64 * 0.125, a.2 as f64 * 0.125);
            let moved: Vec<Region> = regions.iter().map(|r| r.translate(shift)).collect();
            prop_assert_eq!(
                overlap_volume(&regions, None).unwrap().value.to_bits(),
                overlap_volume(&moved, None).unwrap().value.to_bits()
            );
        }
    }

    #[test]
    fn box_mc_matches_exact_on_random_configs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for i in 0..100 {
            let mut boxes = Vec::new();
            for _ in 0..rng.random_range(2..4) {
                let c = Vec3::new(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                );
                let h = Vec3::new(
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.3..1.0),
                );
                boxes.push(Region::cuboid(c, h).unwrap());
            }
            let exact = overlap_volume(&boxes, None).unwrap();
            let mc = overlap_volume_mc(
                &boxes,
                McParams {
                    samples: 20_000,
                    seed: i,
                },
                true,
            )
            .unwrap();
            assert!(
                mc.agrees_with(&exact, 4.0, 0.0),
                "config {i}: {mc} vs {exact}"
            );
        }
    }
}
