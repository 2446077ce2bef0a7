//! Pauli-basis superoperators, the mean channel, and its spectrum.

use alloc::vec::Vec;
use core::ops::{Add, Mul};

#[allow(unused_imports)] // std inherent methods win when std is linked
use num_traits::Float;

use crate::algebra::{decompose_unchecked, pauli_compose, ComplexMatrix2, PauliVector, C64};
use crate::models::KrausSet;
use crate::tol;

/// Real 4×4 matrix acting on (p0, px, py, pz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperopMatrix {
    pub m: [[f64; 4]; 4],
}

impl SuperopMatrix {
    pub const fn new(m: [[f64; 4]; 4]) -> Self {
        Self { m }
    }

    pub const fn zero() -> Self {
        Self { m: [[0.0; 4]; 4] }
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { m }
    }

    #[inline]
    pub fn apply(&self, p: &PauliVector) -> PauliVector {
        let v = p.to_array();
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(self.m.iter()) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        PauliVector::from_array(out)
    }

    #[inline]
    pub fn apply_array(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(self.m.iter()) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    /// Trace of the output, i.e. first row times `v`.
    #[inline]
    pub fn trace_of(&self, v: &[f64; 4]) -> f64 {
        let r = &self.m[0];
        r[0] * v[0] + r[1] * v[1] + r[2] * v[2] + r[3] * v[3]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs_diff(&self, o: &SuperopMatrix) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(o.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Eigenvalues using block structure when present, QR iteration otherwise.
    pub fn eigenvalues(&self) -> [C64; 4] {
        structured_eigenvalues(self)
    }

    /// Eigenvalues from Hessenberg reduction and shifted QR, ignoring structure.
    pub fn eigenvalues_qr(&self) -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        let ev = general_eigenvalues(self.m);
        out.copy_from_slice(&ev);
        sort_by_modulus(&mut out);
        out
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for SuperopMatrix {
    type Output = SuperopMatrix;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.m.iter_mut().flatten().zip(o.m.iter().flatten()).for_each(|(a, b)| *a += b);
        out
    }
}

impl Mul for SuperopMatrix {
    type Output = SuperopMatrix;
    fn mul(self, o: Self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Self { m: out }
    }
}

/// Matrix of ρ ↦ K·ρ·K† in the Pauli basis.
pub fn outcome_superop(k: &ComplexMatrix2) -> SuperopMatrix {
    let mut m = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let image = decompose_unchecked(&k.sandwich(&pauli_compose(&PauliVector::from_array(e))));
        for (i, v) in image.to_array().iter().enumerate() {
            m[i][j] = *v;
        }
    }
    SuperopMatrix { m }
}

pub fn outcome_superops(set: &KrausSet) -> Vec<SuperopMatrix> {
    set.ops().iter().map(outcome_superop).collect()
}

/// E = Σ_a E_a.
pub fn mean_channel(set: &KrausSet) -> SuperopMatrix {
    outcome_superops(set).into_iter().fold(SuperopMatrix::zero(), |acc, e| acc + e)
}

/// Eigen-summary of a mean channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Sorted by descending modulus.
    pub eigenvalues: [C64; 4],
    /// −1/ln of the largest modulus after removing the trace-preserving 1; +∞ when degenerate.
    pub xi: f64,
    /// Eigenvalues with |λ| within 1e-9 of one.
    pub unit_multiplicity: usize,
    /// The eigenvalue that sets ξ.
    pub lambda2: C64,
}

pub fn correlation_length(e: &SuperopMatrix) -> SpectralReport {
    let eigenvalues = e.eigenvalues();
    let unit_multiplicity = eigenvalues
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() <= tol::UNIT_EIGENVALUE)
        .count();
    let trivial = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lambda2 = eigenvalues
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != trivial)
        .map(|(_, z)| *z)
        .next()
        .unwrap_or(C64::new(0.0, 0.0));
    let r = lambda2.norm();
    let xi = if unit_multiplicity >= 2 {
        f64::INFINITY
    } else if r == 0.0 {
        0.0
    } else {
        -1.0 / r.ln()
    };
    SpectralReport { eigenvalues, xi, unit_multiplicity, lambda2 }
}

/// λ± = ½((1+sech x)cos φ ± √(cos²φ(1+sech x)² − 4 sech x)).
pub fn model2_complex_eigs(x: f64, phi: f64) -> (C64, C64) {
    let s = 1.0 / x.cosh();
    let c = phi.cos();
    let b = (1.0 + s) * c;
    let root = C64::new(b * b - 4.0 * s, 0.0).sqrt();
    (0.5 * (b + root), 0.5 * (b - root))
}

fn sort_by_modulus(v: &mut [C64]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

fn negligible(v: f64, scale: f64) -> bool {
    v.abs() <= 1e-14 * scale
}

/// Discriminant as ((a−d)/2)² + bc, which is exact for a diagonal block.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> [C64; 2] {
    let half_tr = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let root = C64::new(half_gap * half_gap + b * c, 0.0).sqrt();
    [half_tr + root, half_tr - root]
}

fn structured_eigenvalues(e: &SuperopMatrix) -> [C64; 4] {
    let m = &e.m;
    let scale = m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut out = [C64::new(0.0, 0.0); 4];
    if (1..4).all(|j| negligible(m[0][j], scale)) {
        // Block lower-triangular: {m00} ∪ eig(lower 3×3).
        out[0] = C64::new(m[0][0], 0.0);
        let b = [
            [m[1][1], m[1][2], m[1][3]],
            [m[2][1], m[2][2], m[2][3]],
            [m[3][1], m[3][2], m[3][3]],
        ];
        out[1..].copy_from_slice(&eig3(&b, scale));
    } else {
        out.copy_from_slice(&general_eigenvalues(e.m));
    }
    sort_by_modulus(&mut out);
    out
}

fn eig3(b: &[[f64; 3]; 3], scale: f64) -> [C64; 3] {
    for k in 0..3 {
        let decoupled = (0..3).filter(|&j| j != k).all(|j| negligible(b[k][j], scale) && negligible(b[j][k], scale));
        if decoupled {
            let rest: Vec<usize> = (0..3).filter(|&j| j != k).collect();
            let (i, j) = (rest[0], rest[1]);
            let pair = eig2(b[i][i], b[i][j], b[j][i], b[j][j]);
            return [C64::new(b[k][k], 0.0), pair[0], pair[1]];
        }
    }
    general_eigenvalues(*b)
}

/// Eigenvalues of a small real matrix: Hessenberg reduction then Francis QR.
fn general_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [C64; N] {
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Gaussian elimination with pivoting to upper Hessenberg form.
fn hessenberg<const N: usize>(a: &mut [[f64; N]; N]) {
    for m in 1..N.saturating_sub(1) {
        let mut x = 0.0;
        let mut piv = m;
        for j in m..N {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            for j in (m - 1)..N {
                let t = a[piv][j];
                a[piv][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut() {
                row.swap(piv, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..N {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..N {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for i in 2..N {
        for j in 0..(i - 1) {
            a[i][j] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by double-shift QR with deflation.
fn hqr<const N: usize>(a: &mut [[f64; N]; N]) -> [C64; N] {
    let eps = f64::EPSILON;
    let mut w = [C64::new(0.0, 0.0); N];
    let mut anorm = 0.0;
    for i in 0..N {
        for j in i.saturating_sub(1)..N {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = N as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let n = nn as usize;
            let mut l = n;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[n][n];
            if l == n {
                w[n] = C64::new(x + t, 0.0);
                nn -= 1;
            } else {
                y = a[n - 1][n - 1];
                let ww = a[n][n - 1] * a[n - 1][n];
                if l + 1 == n {
                    p = 0.5 * (y - x);
                    q = p * p + ww;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        w[n - 1] = C64::new(x + z, 0.0);
                        w[n] = w[n - 1];
                        if z != 0.0 {
                            w[n] = C64::new(x - ww / z, 0.0);
                        }
                    } else {
                        w[n] = C64::new(x + p, -z);
                        w[n - 1] = w[n].conj();
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        // Leave the unconverged block on the diagonal.
                        for (i, wi) in w.iter_mut().enumerate().take(n + 1).skip(l) {
                            *wi = C64::new(a[i][i] + t, 0.0);
                        }
                        nn = l as isize - 1;
                        break;
                    }
                    let mut wsh = ww;
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 0..=n {
                            a[i][i] -= x;
                        }
                        let s = a[n][n - 1].abs() + a[n - 1][n - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        wsh = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = n - 2;
                    loop {
                        z = a[m][m];
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - wsh) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - rr - ss;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..(n - 1) {
                        a[i + 2][i] = 0.0;
                        if i != m {
                            a[i + 2][i - 1] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < n {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k + 1 != n {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=n {
                                p = a[k][j] + q * a[k + 1][j];
                                if k + 1 != n {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if n < k + 3 { n } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k + 1 != n {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 0 || l + 1 >= nn as usize {
                break;
            }
        }
    }
    w
}
