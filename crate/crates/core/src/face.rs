//! State vectors, face weights and the face-type Yang-Baxter relation.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{relative_residual, BracketEval, EllipticContext};
use crate::error::{Error, Result};

/// A vertex label in `Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateVector {
    pub a1: i64,
    pub a2: i64,
}

impl StateVector {
    pub const ZERO: Self = Self { a1: 0, a2: 0 };
    pub const E1: Self = Self { a1: 1, a2: 0 };
    pub const E2: Self = Self { a1: 0, a2: 1 };

    pub const fn new(a1: i64, a2: i64) -> Self {
        Self { a1, a2 }
    }

    pub fn unit(index: usize) -> Self {
        if index == 1 {
            Self::E1
        } else {
            Self::E2
        }
    }

    /// Component `a_j` for `j ∈ {1, 2}`.
    pub fn component(&self, j: usize) -> i64 {
        if j == 1 {
            self.a1
        } else {
            self.a2
        }
    }

    pub fn is_unit_step(&self) -> bool {
        *self == Self::E1 || *self == Self::E2
    }
}

impl Add for StateVector {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.a1 + rhs.a1, self.a2 + rhs.a2)
    }
}

impl Sub for StateVector {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a1 - rhs.a1, self.a2 - rhs.a2)
    }
}

impl std::ops::Mul<StateVector> for i64 {
    type Output = StateVector;

    fn mul(self, rhs: StateVector) -> StateVector {
        StateVector::new(self * rhs.a1, self * rhs.a2)
    }
}

/// `ω12` of the model; `ω21 = -ω12`, `ω11 = ω22 = 0`, `ε1 = 1`, `ε2 = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub omega12: Complex64,
}

impl ModelConstants {
    pub const EPS1: i64 = 1;
    pub const EPS2: i64 = -1;

    pub fn new(omega12: Complex64) -> Self {
        Self { omega12 }
    }

    pub fn epsilon(j: usize) -> i64 {
        if j == 1 {
            Self::EPS1
        } else {
            Self::EPS2
        }
    }

    pub fn omega(&self, j: usize, k: usize) -> Complex64 {
        match (j, k) {
            (1, 2) => self.omega12,
            (2, 1) => -self.omega12,
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// `a_jk = ε_j a_j - ε_k a_k + ω_jk` for `j ≠ k`.
pub fn a_jk(a: StateVector, consts: &ModelConstants, j: usize, k: usize) -> Result<Complex64> {
    if !(1..=2).contains(&j) || !(1..=2).contains(&k) || j == k {
        return Err(Error::Index(format!("a_jk needs distinct j, k in {{1, 2}}, got ({j}, {k})")));
    }
    let ints = ModelConstants::epsilon(j) * a.component(j) - ModelConstants::epsilon(k) * a.component(k);
    Ok(consts.omega(j, k) + ints as f64)
}

/// Corners of a face (`a` top-left, `b` top-right, `c` bottom-left,
/// `d` bottom-right) with its spectral parameter `u` and inhomogeneity `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceLabel {
    pub a: StateVector,
    pub b: StateVector,
    pub c: StateVector,
    pub d: StateVector,
    pub u: Complex64,
    pub v: Complex64,
}

/// Which of the three admissible corner patterns a face matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// `(b-a, c-a, d-a) = (ê_j, ê_j, 2ê_j)`
    Straight { j: usize },
    /// `(b-a, c-a, d-a) = (ê_k, ê_j, ê_j+ê_k)`
    Crossing { j: usize, k: usize },
    /// `(b-a, c-a, d-a) = (ê_j, ê_j, ê_j+ê_k)`
    Turning { j: usize, k: usize },
}

pub fn classify(a: StateVector, b: StateVector, c: StateVector, d: StateVector) -> Option<FaceKind> {
    let (top, left, diag) = (b - a, c - a, d - a);
    for j in 1..=2 {
        let ej = StateVector::unit(j);
        let ek = StateVector::unit(3 - j);
        let k = 3 - j;
        if top == ej && left == ej && diag == 2 * ej {
            return Some(FaceKind::Straight { j });
        }
        if top == ek && left == ej && diag == ej + ek {
            return Some(FaceKind::Crossing { j, k });
        }
        if top == ej && left == ej && diag == ej + ek {
            return Some(FaceKind::Turning { j, k });
        }
    }
    None
}

/// Boltzmann weight of one face; exactly zero for every corner pattern that
/// is not one of the three admissible kinds.
pub fn face_weight(face: &FaceLabel, consts: &ModelConstants, ctx: &EllipticContext) -> Result<Complex64> {
    let mut br = ctx;
    face_weight_with(face, consts, &mut br)
}

pub(crate) fn face_weight_with<B: BracketEval>(
    face: &FaceLabel,
    consts: &ModelConstants,
    br: &mut B,
) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let diff = face.u - face.v;
    match classify(face.a, face.b, face.c, face.d) {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(FaceKind::Straight { j }) => {
            let eps = ModelConstants::epsilon(j) as f64;
            br.ratio(one + diff * eps, one)
        }
        Some(FaceKind::Crossing { j, k }) => {
            let ajk = a_jk(face.a, consts, j, k)?;
            Ok(br.ratio(diff, one)? * br.ratio(ajk - 1.0, ajk)?)
        }
        Some(FaceKind::Turning { j, k }) => {
            let ajk = a_jk(face.a, consts, j, k)?;
            br.ratio(ajk - diff, ajk)
        }
    }
}

/// Outer boundary of a Yang-Baxter hexagon.
///
/// Going clockwise from `e`: `e → d → c → b` along the top and right, and
/// `e → f → a → b` along the left and bottom. Every one of these six edges
/// must be a unit step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hexagon {
    pub a: StateVector,
    pub b: StateVector,
    pub c: StateVector,
    pub d: StateVector,
    pub e: StateVector,
    pub f: StateVector,
}

impl Hexagon {
    /// Builds the hexagon from `e` and the two step paths to `b`.
    pub fn from_paths(e: StateVector, upper: [StateVector; 3], lower: [StateVector; 3]) -> Result<Self> {
        let d = e + upper[0];
        let c = d + upper[1];
        let b = c + upper[2];
        let f = e + lower[0];
        let a = f + lower[1];
        if a + lower[2] != b {
            return Err(Error::Admissibility("the two hexagon paths end at different corners".into()));
        }
        let hex = Self { a, b, c, d, e, f };
        hex.validate()?;
        Ok(hex)
    }

    pub fn validate(&self) -> Result<()> {
        let edges = [
            ("e->d", self.d - self.e),
            ("d->c", self.c - self.d),
            ("c->b", self.b - self.c),
            ("e->f", self.f - self.e),
            ("f->a", self.a - self.f),
            ("a->b", self.b - self.a),
        ];
        for (name, step) in edges {
            if !step.is_unit_step() {
                return Err(Error::Admissibility(format!(
                    "hexagon edge {name} is ({}, {}), not a unit step",
                    step.a1, step.a2
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YangBaxterReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Evaluates both sides of the star-triangle relation on `hex`.
///
/// The inner vertex `g` only contributes when it is one unit step from `f`
/// (left side) or from `e` (right side), so each sum runs over two candidates.
pub fn check_yang_baxter(
    hex: &Hexagon,
    u1: Complex64,
    u2: Complex64,
    u3: Complex64,
    consts: &ModelConstants,
    ctx: &EllipticContext,
) -> Result<YangBaxterReport> {
    hex.validate()?;
    let Hexagon { a, b, c, d, e, f } = *hex;
    let w = |a, b, c, d, u, v| face_weight(&FaceLabel { a, b, c, d, u, v }, consts, ctx);

    let mut lhs = Complex64::new(0.0, 0.0);
    for g in [f + StateVector::E1, f + StateVector::E2] {
        lhs += w(f, g, a, b, u1, u3)? * w(e, d, f, g, u2, u3)? * w(d, c, g, b, u2, u1)?;
    }
    let mut rhs = Complex64::new(0.0, 0.0);
    for g in [e + StateVector::E1, e + StateVector::E2] {
        rhs += w(e, d, g, c, u1, u3)? * w(g, c, a, b, u2, u3)? * w(e, g, f, a, u2, u1)?;
    }
    Ok(YangBaxterReport { lhs, rhs, residual: relative_residual(lhs, rhs) })
}
