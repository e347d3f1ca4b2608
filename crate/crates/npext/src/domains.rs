//! Geometry of the ambient domains and the crossed-disc varieties.
//!
//! The two ambient domains are the symmetrized bidisc `G2` (the image of the
//! bidisc under `(z1, z2) -> (z1 + z2, z1 * z2)`) and the diamond
//! `{|z1| + |z2| < 1}`.  Each carries a distinguished pair of analytic discs
//! crossing at a single base point: the royal variety `{(2l, l^2)}` together
//! with `{0} x D` for `G2`, and the coordinate axes for the diamond.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open domains reject points this close to the boundary so that the
/// feedback inverses downstream stay well conditioned.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    G2,
    Diamond,
}

impl std::fmt::Display for DomainTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainTag::G2 => write!(f, "g2"),
            DomainTag::Diamond => write!(f, "diamond"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Branch1,
    Branch2,
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// The symmetrization map `(z1, z2) -> (z1 + z2, z1 * z2)`.
pub fn pi_map(z1: C64, z2: C64) -> (C64, C64) {
    (z1 + z2, z1 * z2)
}

/// Roots of `x^2 - s x + p` by the quadratic formula with the stable branch
/// (the larger of `s +- sqrt(s^2 - 4p)` is used, avoiding cancellation).
pub fn quadratic_roots(s: C64, p: C64) -> (C64, C64) {
    let disc = (s * s - 4.0 * p).sqrt();
    let q1 = s + disc;
    let q2 = s - disc;
    let q = if q1.norm() >= q2.norm() { q1 } else { q2 };
    if q.norm() == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    let r1 = 0.5 * q;
    (r1, p / r1)
}

/// Largest root modulus of `x^2 - s x + p`; strictly below 1 exactly on `G2`.
pub fn g2_root_radius(s: C64, p: C64) -> f64 {
    let (r1, r2) = quadratic_roots(s, p);
    r1.norm().max(r2.norm())
}

/// Membership in the open symmetrized bidisc.
pub fn in_g2(s: C64, p: C64) -> bool {
    finite(s) && finite(p) && g2_root_radius(s, p) < 1.0
}

/// Membership in the open diamond `|z1| + |z2| < 1`.
pub fn in_diamond(z1: C64, z2: C64) -> bool {
    finite(z1) && finite(z2) && z1.norm() + z2.norm() < 1.0
}

/// A point of the symmetrized bidisc, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Point {
    s: C64,
    p: C64,
}

impl G2Point {
    pub fn new(s: C64, p: C64) -> Result<Self> {
        if !finite(s) || !finite(p) {
            return Err(Error::InvalidParameter("non-finite coordinates".into()));
        }
        let r = g2_root_radius(s, p);
        if r < 1.0 - BOUNDARY_MARGIN {
            Ok(G2Point { s, p })
        } else {
            Err(Error::OutsideDomain {
                domain: "G2",
                detail: format!("root radius {r} for (s, p) = ({s}, {p})"),
            })
        }
    }

    pub fn s(&self) -> C64 {
        self.s
    }

    pub fn p(&self) -> C64 {
        self.p
    }
}

/// A point of the diamond, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiamondPoint {
    z1: C64,
    z2: C64,
}

impl DiamondPoint {
    pub fn new(z1: C64, z2: C64) -> Result<Self> {
        if !finite(z1) || !finite(z2) {
            return Err(Error::InvalidParameter("non-finite coordinates".into()));
        }
        let r = z1.norm() + z2.norm();
        if r < 1.0 - BOUNDARY_MARGIN {
            Ok(DiamondPoint { z1, z2 })
        } else {
            Err(Error::OutsideDomain {
                domain: "diamond",
                detail: format!("|z1| + |z2| = {r}"),
            })
        }
    }

    pub fn z1(&self) -> C64 {
        self.z1
    }

    pub fn z2(&self) -> C64 {
        self.z2
    }
}

/// Ambient coordinates of the branch parametrization at `lambda`.
///
/// For `G2` (base point at the origin, i.e. `beta = 0`): branch 1 is the
/// royal disc `(2l, l^2)`, branch 2 is `(0, l)`.  For the diamond the
/// branches are the two coordinate axes.
pub fn branch_point(domain: DomainTag, branch: Branch, lambda: C64) -> [C64; 2] {
    match (domain, branch) {
        (DomainTag::G2, Branch::Branch1) => [2.0 * lambda, lambda * lambda],
        (DomainTag::G2, Branch::Branch2) => [C64::new(0.0, 0.0), lambda],
        (DomainTag::Diamond, Branch::Branch1) => [lambda, C64::new(0.0, 0.0)],
        (DomainTag::Diamond, Branch::Branch2) => [C64::new(0.0, 0.0), lambda],
    }
}

/// A point of a crossed-disc variety together with its branch parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarietyPoint {
    pub domain: DomainTag,
    pub branch: Branch,
    pub param: C64,
    pub ambient: [C64; 2],
}

pub fn variety_param(domain: DomainTag, branch: Branch, lambda: C64) -> Result<VarietyPoint> {
    if !finite(lambda) || lambda.norm() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "branch parameter must lie in the open unit disc, got {lambda}"
        )));
    }
    Ok(VarietyPoint {
        domain,
        branch,
        param: lambda,
        ambient: branch_point(domain, branch, lambda),
    })
}

/// The common point of the two `G2` variety branches for parameter `beta`,
/// together with the branch parameters that reach it.
///
/// Branch 1 is the royal disc `(2l, l^2)`; branch 2 is `(beta + conj(beta) l, l)`.
/// Their intersection solves `conj(beta) l^2 - 2 l + beta = 0` in the disc.
pub fn variety_intersection(beta: C64) -> Result<([C64; 2], C64, C64)> {
    if !finite(beta) || beta.norm() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in the open unit disc, got {beta}"
        )));
    }
    if beta.norm() == 0.0 {
        let zero = C64::new(0.0, 0.0);
        return Ok(([zero, zero], zero, zero));
    }
    let root = (1.0 - (1.0 - beta.norm_sqr()).sqrt()) / beta.conj();
    let a = [2.0 * root, root * root];
    // branch 2 has p-coordinate equal to its parameter
    Ok((a, root, root * root))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Interior,
    Boundary,
    Variety,
}

/// A reproducible batch of sample points: same seed, same points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub domain: DomainTag,
    pub kind: SampleKind,
    pub seed: u64,
    pub points: Vec<[C64; 2]>,
    /// Branch parameters, populated only for variety sampling.
    pub variety: Vec<(Branch, C64)>,
}

impl SampleSet {
    /// CSV with one row per point, columns re/im per coordinate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re1,im1,re2,im2\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p[0].re, p[0].im, p[1].re, p[1].im
            ));
        }
        out
    }
}

pub fn unit_disc_sample<R: Rng>(rng: &mut R) -> C64 {
    let r = rng.gen::<f64>().sqrt();
    let t = rng.gen::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, t)
}

fn unimodular_sample<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)
}

/// Seeded sampling of a domain.
///
/// Interior `G2` points are uniform bidisc samples pushed through the
/// symmetrization map; boundary sampling uses unimodular pairs (the
/// distinguished boundary for `G2`); variety sampling draws branch
/// parameters uniformly in the disc with a random branch.
pub fn sample_domain(domain: DomainTag, n: usize, seed: u64, kind: SampleKind) -> SampleSet {
    assert!(n > 0, "sample count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut variety = Vec::new();
    for _ in 0..n {
        match (domain, kind) {
            (DomainTag::G2, SampleKind::Interior) => {
                let (s, p) = pi_map(unit_disc_sample(&mut rng), unit_disc_sample(&mut rng));
                points.push([s, p]);
            }
            (DomainTag::G2, SampleKind::Boundary) => {
                let (s, p) = pi_map(unimodular_sample(&mut rng), unimodular_sample(&mut rng));
                points.push([s, p]);
            }
            (DomainTag::Diamond, SampleKind::Interior) => loop {
                let z1 = unit_disc_sample(&mut rng);
                let z2 = unit_disc_sample(&mut rng);
                if z1.norm() + z2.norm() < 1.0 {
                    points.push([z1, z2]);
                    break;
                }
            },
            (DomainTag::Diamond, SampleKind::Boundary) => {
                let t = rng.gen::<f64>();
                let z1 = unimodular_sample(&mut rng) * t;
                let z2 = unimodular_sample(&mut rng) * (1.0 - t);
                points.push([z1, z2]);
            }
            (_, SampleKind::Variety) => {
                let branch = if rng.gen::<bool>() {
                    Branch::Branch1
                } else {
                    Branch::Branch2
                };
                let lambda = unit_disc_sample(&mut rng);
                points.push(branch_point(domain, branch, lambda));
                variety.push((branch, lambda));
            }
        }
    }
    SampleSet {
        domain,
        kind,
        seed,
        points,
        variety,
    }
}

/// Branch parameters only, uniform in the disc; used by the verification
/// routines that need a fixed branch.
pub fn sample_disc(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| unit_disc_sample(&mut rng)).collect()
}
