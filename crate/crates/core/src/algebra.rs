//! 2×2 complex matrices and the Pauli-basis representation of qubit states.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// 0, 1, 2 for X, Y, Z.
    pub fn index(self) -> usize {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
        }
    }

    pub fn matrix(self) -> ComplexMatrix2 {
        match self {
            Pauli::X => ComplexMatrix2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => ComplexMatrix2::new(ZERO, -I, I, ZERO),
            Pauli::Z => ComplexMatrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    /// Eigen-projector (I ± σ)/2.
    pub fn projector(self, sign: Sign) -> ComplexMatrix2 {
        let half = ComplexMatrix2::identity().scale(0.5);
        let s = self.matrix().scale(0.5 * sign.value());
        half + s
    }
}

/// Outcome sign y ∈ {+1, −1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    pub m: [[C64; 2]; 2],
}

impl ComplexMatrix2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::new(C64::new(a, 0.0), ZERO, ZERO, C64::new(d, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    /// K·A·K†.
    pub fn sandwich(&self, a: &ComplexMatrix2) -> ComplexMatrix2 {
        *self * *a * self.adjoint()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − self†`.
    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let mid = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mid - r, mid + r]
    }

    /// Hermitian within `tol` and smallest eigenvalue ≥ −tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.hermitian_eigenvalues()[0] >= -tol
    }

    /// A·B − B·A.
    pub fn commutator(&self, other: &ComplexMatrix2) -> ComplexMatrix2 {
        *self * *other - *other * *self
    }
}

impl Add for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Qubit operator ½(p0·I + px·X + py·Y + pz·Z).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliVector {
    pub p0: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl PauliVector {
    pub const fn new(p0: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { p0, px, py, pz }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.p0, self.px, self.py, self.pz]
    }

    pub const fn maximally_mixed() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    /// |↑⟩⟨↑|.
    pub const fn up() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    /// |↓⟩⟨↓|.
    pub const fn down() -> Self {
        Self::new(1.0, 0.0, 0.0, -1.0)
    }

    /// Pure eigenstate of `axis` with eigenvalue `sign`.
    pub fn eigenstate(axis: Pauli, sign: Sign) -> Self {
        let mut a = [1.0, 0.0, 0.0, 0.0];
        a[1 + axis.index()] = sign.value();
        Self::from_array(a)
    }

    pub fn bloch(&self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn bloch_norm(&self) -> f64 {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch_norm() - 1.0).abs() <= tol::PHYSICAL
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.p0 * s, self.px * s, self.py * s, self.pz * s)
    }

    /// Divide through by p0 so the trace is one.
    pub fn normalized(&self) -> Self {
        let inv = 1.0 / self.p0;
        Self::new(1.0, self.px * inv, self.py * inv, self.pz * inv)
    }

    pub fn component(&self, axis: Pauli) -> f64 {
        match axis {
            Pauli::X => self.px,
            Pauli::Y => self.py,
            Pauli::Z => self.pz,
        }
    }

    pub fn max_abs_diff(&self, o: &PauliVector) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Hermitian, unit-trace, positive semidefinite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix2);

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), trace (1e-12) and positivity (1e-12).
    pub fn new(m: ComplexMatrix2) -> Result<Self> {
        let herm = m.hermiticity_error();
        if herm > tol::PHYSICAL {
            return Err(Error::NotHermitian(herm));
        }
        if (m.trace().re - 1.0).abs() > tol::STRUCTURAL || m.trace().im.abs() > tol::STRUCTURAL {
            return Err(Error::NotDensityMatrix("trace differs from one"));
        }
        if m.hermitian_eigenvalues()[0] < -tol::STRUCTURAL {
            return Err(Error::NotDensityMatrix("negative eigenvalue"));
        }
        Ok(Self(m))
    }

    pub fn from_pauli(p: &PauliVector) -> Result<Self> {
        Self::new(pauli_compose(p))
    }

    pub fn up() -> Self {
        Self(pauli_compose(&PauliVector::up()))
    }

    pub fn down() -> Self {
        Self(pauli_compose(&PauliVector::down()))
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.0
    }

    pub fn pauli(&self) -> PauliVector {
        decompose_unchecked(&self.0)
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

pub(crate) fn decompose_unchecked(m: &ComplexMatrix2) -> PauliVector {
    let r = &m.m;
    PauliVector::new(
        (r[0][0] + r[1][1]).re,
        (r[0][1] + r[1][0]).re,
        (r[1][0] - r[0][1]).im,
        (r[0][0] - r[1][1]).re,
    )
}

/// Pauli coordinates of a Hermitian matrix.
pub fn pauli_decompose(m: &ComplexMatrix2) -> Result<PauliVector> {
    let herm = m.hermiticity_error();
    if herm > tol::PHYSICAL {
        return Err(Error::NotHermitian(herm));
    }
    Ok(decompose_unchecked(m))
}

/// ½(p0·I + px·X + py·Y + pz·Z). No physicality check.
pub fn pauli_compose(p: &PauliVector) -> ComplexMatrix2 {
    ComplexMatrix2::new(
        C64::new(0.5 * (p.p0 + p.pz), 0.0),
        C64::new(0.5 * p.px, -0.5 * p.py),
        C64::new(0.5 * p.px, 0.5 * p.py),
        C64::new(0.5 * (p.p0 - p.pz), 0.0),
    )
}

/// Conditioned state K·ρ·K†/Tr[K·ρ·K†] together with that probability.
pub fn apply_kraus(k: &ComplexMatrix2, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let out = k.sandwich(rho.matrix());
    let prob = out.trace().re;
    if !(prob > 0.0) {
        return Err(Error::ImpossibleOutcome);
    }
    // Symmetrize to keep rounding from breaking Hermiticity over long chains.
    let herm = (out + out.adjoint()).scale(0.5 / prob);
    Ok((DensityMatrix(herm), prob))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &ComplexMatrix2, b: &ComplexMatrix2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn decompose_examples() {
        let mixed = ComplexMatrix2::identity().scale(0.5);
        assert_eq!(pauli_decompose(&mixed).unwrap(), PauliVector::new(1.0, 0.0, 0.0, 0.0));
        let up = ComplexMatrix2::diag(1.0, 0.0);
        assert_eq!(pauli_decompose(&up).unwrap(), PauliVector::up());
        let m = (ComplexMatrix2::identity() + Pauli::X.matrix().scale(0.6)).scale(0.5);
        let p = pauli_decompose(&m).unwrap();
        assert!(p.max_abs_diff(&PauliVector::new(1.0, 0.6, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let m = ComplexMatrix2::new(ONE, ONE, ZERO, ZERO);
        assert!(matches!(pauli_decompose(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn compose_examples() {
        assert!(close(&pauli_compose(&PauliVector::up()), &ComplexMatrix2::diag(1.0, 0.0), 0.0));
        assert!(close(&pauli_compose(&PauliVector::down()), &ComplexMatrix2::diag(0.0, 1.0), 0.0));
        let plus = ComplexMatrix2::new(ONE, ONE, ONE, ONE).scale(0.5);
        assert!(close(&pauli_compose(&PauliVector::new(1.0, 1.0, 0.0, 0.0)), &plus, 0.0));
    }

    #[test]
    fn y_component_sign() {
        let plus_y = PauliVector::eigenstate(Pauli::Y, Sign::Plus);
        let m = pauli_compose(&plus_y);
        // |+y⟩ = (1, i)/√2 so ρ₁₀ = i/2.
        assert!((m.m[1][0] - C64::new(0.0, 0.5)).norm() < 1e-15);
        let y = Pauli::Y.matrix();
        assert!(((y * m).trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_kraus_examples() {
        let up = DensityMatrix::up();
        let (r, p) = apply_kraus(&ComplexMatrix2::identity(), &up).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(r, up);
        let proj = Pauli::Z.projector(Sign::Plus);
        let (r, p) = apply_kraus(&proj, &up).unwrap();
        assert_eq!(p, 1.0);
        assert!(close(r.matrix(), up.matrix(), 1e-15));
        assert_eq!(apply_kraus(&proj, &DensityMatrix::down()), Err(Error::ImpossibleOutcome));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_pauli(&PauliVector::new(1.0, 0.0, 0.0, 1.1)).is_err());
        assert!(DensityMatrix::from_pauli(&PauliVector::new(1.2, 0.0, 0.0, 0.0)).is_err());
        assert!(DensityMatrix::from_pauli(&PauliVector::new(1.0, 0.6, 0.0, 0.8)).is_ok());
    }

    #[test]
    fn projectors_are_idempotent() {
        for axis in Pauli::ALL {
            for s in [Sign::Plus, Sign::Minus] {
                let p = axis.projector(s);
                assert!(close(&(p * p), &p, 1e-15));
            }
        }
    }
}
