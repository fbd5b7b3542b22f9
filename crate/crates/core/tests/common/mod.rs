//! Test-only oracles. Nothing here calls the overlap, smearing or correlator
//! code under test: detector positions, particle positions and spin outcomes
//! are sampled directly from the first-quantized two-particle state.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use realrod::{
    DetectorSpec, ExperimentConfig, PairState, Region, Shape, SingleParticleState, SmearingKernel,
    Spin, Vec3,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent point-membership and uniform-sampling view of a region.
#[derive(Debug, Clone, Copy)]
pub struct Solid {
    center: [f64; 3],
    kind: SolidKind,
}

#[derive(Debug, Clone, Copy)]
enum SolidKind {
    Box([f64; 3]),
    Ball(f64),
}

impl Solid {
    pub fn of(r: &Region) -> Solid {
        let c = r.center().to_array();
        let kind = match r.shape() {
            Shape::Cuboid { half_extents } => SolidKind::Box(half_extents.to_array()),
            Shape::Sphere { radius } => SolidKind::Ball(radius),
        };
        Solid { center: c, kind }
    }

    pub fn volume(&self) -> f64 {
        match self.kind {
            SolidKind::Box(h) => 8.0 * h[0] * h[1] * h[2],
            SolidKind::Ball(r) => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
        }
    }

    /// Membership with the solid moved so its center sits at `at`.
    pub fn contains_at(&self, at: [f64; 3], p: [f64; 3]) -> bool {
        let d = [p[0] - at[0], p[1] - at[1], p[2] - at[2]];
        match self.kind {
            SolidKind::Box(h) => (0..3).all(|k| d[k].abs() <= h[k]),
            SolidKind::Ball(r) => d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= r * r,
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        self.contains_at(self.center, p)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        match self.kind {
            SolidKind::Box(h) => {
                let mut p = [0.0; 3];
                for k in 0..3 {
                    p[k] = self.center[k] + h[k] * (2.0 * rng.random::<f64>() - 1.0);
                }
                p
            }
            SolidKind::Ball(r) => loop {
                let q: [f64; 3] = std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0);
                if q.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break std::array::from_fn(|k| self.center[k] + r * q[k]);
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Z,
    X,
}

/// Mean and standard error of a sample stream.
///
/// `resolution` is the rule-of-three bound `3·range/n`: when an event of
/// probability below it is never drawn, the sample variance is zero and the
/// standard error alone would demand exact agreement.
#[derive(Debug, Clone, Copy)]
pub struct Mc {
    pub mean: f64,
    pub stderr: f64,
    pub resolution: f64,
}

impl Mc {
    /// `range` bounds the magnitude of a single sample.
    pub fn from_sums(n: u64, sum: f64, sum_sq: f64, range: f64) -> Mc {
        let n_f = n as f64;
        let mean = sum / n_f;
        let var = (sum_sq / n_f - mean * mean).max(0.0) * n_f / (n_f - 1.0);
        Mc {
            mean,
            stderr: (var / n_f).sqrt(),
            resolution: 3.0 * range / n_f,
        }
    }

    pub fn within(&self, value: f64, other_stderr: f64, k: f64) -> bool {
        (self.mean - value).abs() <= (k * self.stderr.hypot(other_stderr)).max(self.resolution)
    }
}

type Mat4 = [[f64; 4]; 4];

const SZ: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
const SX: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];

fn pauli(b: Basis) -> [[f64; 2]; 2] {
    match b {
        Basis::Z => SZ,
        Basis::X => SX,
    }
}

fn kron(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

const ID: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

fn on_particle(p: usize, op: [[f64; 2]; 2]) -> Mat4 {
    if p == 0 {
        kron(op, ID)
    } else {
        kron(ID, op)
    }
}

fn mat_add(a: &mut Mat4, b: &Mat4) {
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] += b[i][j];
        }
    }
}

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// `(|+-⟩ + |-+⟩)/√2` in the basis `|s₁s₂⟩`, index `2·s₁ + s₂`, `+` first.
const PSI: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
    0.0,
];

/// Spin expectation of `A ⊗ B` where `A` sums `σ_a` over the particles seen
/// at x and `B` sums `σ_b` over those seen at y.
///
/// When no particle is seen by both detectors the operators act on distinct
/// particles and commute, so individual outcomes are sampled and multiplied.
/// Otherwise the exact spin expectation value is returned.
fn spin_sample<R: Rng>(rng: &mut R, in_x: [bool; 2], in_y: [bool; 2], a: Basis, b: Basis) -> f64 {
    let shared = (0..2).any(|p| in_x[p] && in_y[p]);
    if shared {
        let mut op_a = [[0.0; 4]; 4];
        let mut op_b = [[0.0; 4]; 4];
        for p in 0..2 {
            if in_x[p] {
                mat_add(&mut op_a, &on_particle(p, pauli(a)));
            }
            if in_y[p] {
                mat_add(&mut op_b, &on_particle(p, pauli(b)));
            }
        }
        let m = mat_mul(&op_a, &op_b);
        return (0..4)
            .map(|i| (0..4).map(|j| PSI[i] * m[i][j] * PSI[j]).sum::<f64>())
            .sum();
    }
    let basis: [Basis; 2] = std::array::from_fn(|p| {
        if in_x[p] {
            a
        } else if in_y[p] {
            b
        } else {
            Basis::Z
        }
    });
    // Rotate the state into the measured bases with a Hadamard per x-basis particle.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = [[h, h], [h, -h]];
    let u = kron(
        if basis[0] == Basis::X { had } else { ID },
        if basis[1] == Basis::X { had } else { ID },
    );
    let amp: [f64; 4] = std::array::from_fn(|i| (0..4).map(|j| u[i][j] * PSI[j]).sum());
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut outcome = 3;
    for (i, a) in amp.iter().enumerate() {
        acc += a * a;
        if r < acc {
            outcome = i;
            break;
        }
    }
    let eig = |p: usize| {
        let bit = if p == 0 { outcome >> 1 } else { outcome & 1 };
        if bit == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let sa: f64 = (0..2).filter(|&p| in_x[p]).map(eig).sum();
    let sb: f64 = (0..2).filter(|&p| in_y[p]).map(eig).sum();
    sa * sb
}

fn gaussian_point<R: Rng>(rng: &mut R, mean: [f64; 3], sigma: f64) -> [f64; 3] {
    std::array::from_fn(|k| {
        let z: f64 = rng.sample(StandardNormal);
        mean[k] + sigma * z
    })
}

/// Per-axis standard deviation from the dispersion law, written out again.
pub fn oracle_sigma(kernel: &SmearingKernel, rod_reading: Vec3) -> f64 {
    use realrod::DispersionLaw;
    let d = match kernel.law() {
        DispersionLaw::Delta => 0.0,
        DispersionLaw::FixedWidth { variance } => variance,
        DispersionLaw::NgVanDam { planck_length } => {
            let r = rod_reading.norm();
            (planck_length.powf(4.0 / 3.0) * r.powf(2.0 / 3.0)).max(kernel.dispersion_floor())
        }
    };
    (d / 2.0).sqrt()
}

/// Monte Carlo estimate of `⟨σ_a(X) σ_b(Y)⟩`.
pub fn correlator_oracle(cfg: &ExperimentConfig, a: Basis, b: Basis, n: u64, seed: u64) -> Mc {
    let mut rng = rng(seed);
    let v = [Solid::of(cfg.state.v1()), Solid::of(cfg.state.v2())];
    let dx = Solid::of(cfg.detector_x.template());
    let dy = Solid::of(cfg.detector_y.template());
    let sx = oracle_sigma(&cfg.kernel, cfg.detector_x.reading + cfg.origin_offset);
    let sy = oracle_sigma(&cfg.kernel, cfg.detector_y.reading + cfg.origin_offset);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let cx = gaussian_point(&mut rng, cfg.detector_x.reading.to_array(), sx);
        let cy = gaussian_point(&mut rng, cfg.detector_y.reading.to_array(), sy);
        let r = [v[0].sample(&mut rng), v[1].sample(&mut rng)];
        let in_x = [dx.contains_at(cx, r[0]), dx.contains_at(cx, r[1])];
        let in_y = [dy.contains_at(cy, r[0]), dy.contains_at(cy, r[1])];
        let s = spin_sample(&mut rng, in_x, in_y, a, b);
        sum += s;
        sum_sq += s * s;
    }
    Mc::from_sums(n, sum, sum_sq, 4.0)
}

/// `√2 (⟨σˣσˣ⟩ - ⟨σᶻσᶻ⟩)` from two independent oracle runs.
pub fn chsh_oracle(cfg: &ExperimentConfig, n: u64, seed: u64) -> Mc {
    let xx = correlator_oracle(cfg, Basis::X, Basis::X, n, seed);
    let zz = correlator_oracle(cfg, Basis::Z, Basis::Z, n, seed ^ 0x9e37_79b9_7f4a_7c15);
    let s2 = std::f64::consts::SQRT_2;
    Mc {
        mean: s2 * (xx.mean - zz.mean),
        stderr: s2 * xx.stderr.hypot(zz.stderr),
        resolution: s2 * (xx.resolution + zz.resolution),
    }
}

/// Monte Carlo estimate of the probability that a smeared detector finds the
/// particle with spin `eps`.
pub fn probability_oracle(
    state: &SingleParticleState,
    eps: Spin,
    det: &DetectorSpec,
    kernel: &SmearingKernel,
    n: u64,
    seed: u64,
) -> Mc {
    let mut rng = rng(seed);
    let d = Solid::of(det.template());
    let sigma = oracle_sigma(kernel, det.reading);
    let comps = state.components();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let c = gaussian_point(&mut rng, det.reading.to_array(), sigma);
        let mut r: f64 = rng.random();
        let mut pick = comps.len() - 1;
        for (i, comp) in comps.iter().enumerate() {
            if r < comp.weight {
                pick = i;
                break;
            }
            r -= comp.weight;
        }
        let comp = &comps[pick];
        let p = Solid::of(&comp.region).sample(&mut rng);
        let hit = if comp.spin == eps && d.contains_at(c, p) {
            1.0
        } else {
            0.0
        };
        sum += hit;
        sum_sq += hit;
    }
    Mc::from_sums(n, sum, sum_sq, 1.0)
}

/// Monte Carlo estimate of `S(d; v)` with the detector smeared around its reading.
pub fn single_overlap_oracle(
    det: &DetectorSpec,
    target: &Region,
    sigma: f64,
    n: u64,
    seed: u64,
) -> Mc {
    let mut rng = rng(seed);
    let d = Solid::of(det.template());
    let t = Solid::of(target);
    let vol = t.volume();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let c = gaussian_point(&mut rng, det.reading.to_array(), sigma);
        let p = t.sample(&mut rng);
        let hit = if d.contains_at(c, p) { vol } else { 0.0 };
        sum += hit;
        sum_sq += hit * hit;
    }
    Mc::from_sums(n, sum, sum_sq, vol)
}

pub fn cuboid(c: [f64; 3], h: [f64; 3]) -> Region {
    Region::cuboid(c.into(), h.into()).unwrap()
}

pub fn sphere(c: [f64; 3], r: f64) -> Region {
    Region::sphere(c.into(), r).unwrap()
}

/// Particles at `±sep/2` on the x axis, unit boxes, detectors equal to the
/// particle regions with readings at the particle centers.
pub fn aligned_boxes(sep: f64, half: f64, kernel: SmearingKernel) -> ExperimentConfig {
    let v1 = cuboid([-sep / 2.0, 0.0, 0.0], [half; 3]);
    let v2 = cuboid([sep / 2.0, 0.0, 0.0], [half; 3]);
    ExperimentConfig::new(
        PairState::new(v1, v2).unwrap(),
        DetectorSpec::new(v1, v1.center()).unwrap(),
        DetectorSpec::new(v2, v2.center()).unwrap(),
        kernel,
        Vec3::ZERO,
    )
    .unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shapes {
    Boxes,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Laws {
    Any,
    Smeared,
}

fn random_region<R: Rng>(rng: &mut R, center: [f64; 3], max_radius: f64, shapes: Shapes) -> Region {
    let sphere_pick = shapes == Shapes::Mixed && rng.random_bool(0.5);
    if sphere_pick {
        sphere(center, rng.random_range(0.2..0.99) * max_radius)
    } else {
        // half diagonal below max_radius
        let lim = max_radius / 3f64.sqrt();
        let h: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..0.99) * lim);
        cuboid(center, h)
    }
}

/// Random spacelike configuration: every detector and particle radius is
/// below a quarter of the separation, so no detector can reach both particles.
pub fn random_config<R: Rng>(rng: &mut R, shapes: Shapes, laws: Laws) -> ExperimentConfig {
    let sep = rng.random_range(2.0..6.0);
    let dir = loop {
        let d: [f64; 3] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        if let Some(u) = Vec3::from(d).normalized() {
            break u;
        }
    };
    let c1: Vec3 = std::array::from_fn(|_| rng.random_range(-3.0..3.0)).into();
    let c2 = c1 + dir * sep;
    let rmax = sep / 4.0;
    let v1 = random_region(rng, c1.to_array(), rmax, shapes);
    let v2 = random_region(rng, c2.to_array(), rmax, shapes);
    let jitter = |rng: &mut R, c: Vec3| {
        c + Vec3::from(std::array::from_fn(|_| rng.random_range(-0.3..0.3) * rmax))
    };
    let tx = random_region(rng, [0.0; 3], rmax, shapes);
    let ty = random_region(rng, [0.0; 3], rmax, shapes);
    let x = jitter(rng, c1);
    let y = jitter(rng, c2);
    let pick = match laws {
        Laws::Any => rng.random_range(0..3),
        Laws::Smeared => rng.random_range(1..3),
    };
    let (kernel, offset) = match pick {
        0 => (SmearingKernel::delta(), Vec3::ZERO),
        1 => {
            let var = sep * sep * 10f64.powf(rng.random_range(-3.0..0.0));
            (SmearingKernel::fixed_width(var).unwrap(), Vec3::ZERO)
        }
        _ => {
            let mag = 10f64.powf(rng.random_range(1.0..6.0));
            (SmearingKernel::ng_van_dam(1e-2).unwrap(), dir * mag)
        }
    };
    ExperimentConfig::new(
        PairState::new(v1, v2).unwrap(),
        DetectorSpec::new(tx, x).unwrap(),
        DetectorSpec::new(ty, y).unwrap(),
        kernel,
        offset,
    )
    .unwrap()
}
