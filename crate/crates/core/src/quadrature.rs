//! Composite Gauss–Legendre quadrature.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::geometry::Vec3;

const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
    pub evaluations: u64,
}

impl Quad {
    pub const ZERO: Quad = Quad {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };

    fn add(self, other: Quad) -> Quad {
        Quad {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn gauss_legendre(points: usize) -> Rule {
        let points = NonZeroUsize::new(points).expect("rule needs at least one point");
        let (nodes, weights) = GaussLegendre::new(points)
            .as_node_weight_pairs()
            .iter()
            .copied()
            .unzip();
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        sum * half
    }

    /// Recursive bisection until the whole-panel and two-half estimates agree to `tol`.
    pub fn adaptive<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, tol: f64, mut f: F) -> Quad {
        let whole = self.apply(a, b, &mut f);
        self.refine(a, b, whole, tol, 0, &mut f)
    }

    fn refine<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        f: &mut F,
    ) -> Quad {
        let mid = 0.5 * (a + b);
        let left = self.apply(a, mid, &mut *f);
        let right = self.apply(mid, b, &mut *f);
        let n = 2 * self.len() as u64;
        let diff = (whole - (left + right)).abs();
        if diff <= tol || depth >= MAX_DEPTH || mid <= a || mid >= b {
            return Quad {
                value: left + right,
                error: diff,
                evaluations: n,
            };
        }
        let l = self.refine(a, mid, left, 0.5 * tol, depth + 1, f);
        let r = self.refine(mid, b, right, 0.5 * tol, depth + 1, f);
        let mut q = l.add(r);
        q.evaluations += n;
        q
    }

    /// Adaptive integration over [a, b], split at the given interior kinks.
    pub fn piecewise<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        kinks: &[f64],
        tol: f64,
        mut f: F,
    ) -> Quad {
        if b <= a {
            return Quad::ZERO;
        }
        let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&k| k > a && k < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);
        let panels = (edges.len() - 1) as f64;
        edges
            .windows(2)
            .map(|w| self.adaptive(w[0], w[1], tol / panels, &mut f))
            .fold(Quad::ZERO, Quad::add)
    }
}

/// Tensor-product rule over an axis-aligned box, doubling the panel count
/// per axis until successive estimates agree to `tol`.
pub fn integrate_box_3d<F: Fn(Vec3) -> f64>(f: F, lo: Vec3, hi: Vec3, tol: f64) -> Quad {
    let rule = Rule::gauss_legendre(16);
    let mut previous: Option<f64> = None;
    let mut evaluations = 0u64;
    let mut panels = 2usize;
    loop {
        let axis = |a: f64, b: f64| -> Vec<(f64, f64)> {
            let width = (b - a) / panels as f64;
            let half = 0.5 * width;
            (0..panels)
                .flat_map(|p| {
                    let mid = a + (p as f64 + 0.5) * width;
                    rule.nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(move |(x, w)| (mid + half * x, w * half))
                })
                .collect()
        };
        let (xs, ys, zs) = (axis(lo.x, hi.x), axis(lo.y, hi.y), axis(lo.z, hi.z));
        let mut total = 0.0;
        for &(x, wx) in &xs {
            let mut plane = 0.0;
            for &(y, wy) in &ys {
                let line: f64 = zs.iter().map(|&(z, wz)| wz * f(Vec3::new(x, y, z))).sum();
                plane += wy * line;
            }
            total += wx * plane;
        }
        evaluations += (xs.len() * ys.len() * zs.len()) as u64;
        if let Some(prev) = previous {
            let error = (total - prev).abs();
            if error <= tol || panels >= 16 {
                return Quad {
                    value: total,
                    error,
                    evaluations,
                };
            }
        }
        previous = Some(total);
        panels *= 2;
    }
}
