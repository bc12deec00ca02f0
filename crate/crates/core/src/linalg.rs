//! Dense complex linear algebra for the small matrices (d <= 16) used
//! throughout the crate.
//!
//! Tolerances: structural checks on inputs use [`STRUCT_TOL`]; identities that
//! accumulate roundoff (reconstructions, products) use [`ALGEBRA_TOL`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, SfpError};

pub type C64 = Complex64;

/// Tolerance for validating inputs (hermiticity, positivity, normalization).
pub const STRUCT_TOL: f64 = 1e-12;
/// Tolerance for algebraic identities after a chain of floating point ops.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Looser bound used for unitarity checks (Frobenius norm of U†U - I).
pub const UNITARY_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn zeros(dim: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = cr(1.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        CVector(values.iter().map(|&x| cr(x)).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    /// ⟨self|other⟩ without the dimension check.
    #[inline]
    pub fn dot(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self + s * other`, in place.
    pub fn axpy(&mut self, s: C64, other: &CVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Returns the normalized vector, or `None` for a (numerically) zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        if n <= f64::MIN_POSITIVE {
            None
        } else {
            Some(self.scale(cr(1.0 / n)))
        }
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner_product(a: &CVector, b: &CVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(SfpError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.dot(b))
}

/// Structural role of a matrix. Constructors that assign a role other than
/// `General` validate it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    General,
    Hermitian,
    Positive,
    Unitary,
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
    role: Role,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}, {:?})", self.dim, self.dim, self.role)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|col| {
                    let z = self[(r, col)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
            role: Role::General,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cr(1.0);
        }
        m.role = Role::Unitary;
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "from_rows needs a square matrix");
            for (col, z) in row.iter().enumerate() {
                m[(r, col)] = *z;
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| cr(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        m
    }

    /// |a⟩⟨b|
    pub fn outer(a: &CVector, b: &CVector) -> Self {
        let dim = a.dim();
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for col in 0..dim {
                m[(r, col)] = a[r] * b[col].conj();
            }
        }
        m
    }

    /// Projector |v⟩⟨v|.
    pub fn projector(v: &CVector) -> Self {
        Self::outer(v, v).tagged(Role::Hermitian)
    }

    /// Builds `Σ_k w_k |v_k⟩⟨v_k|` from real weights and vectors.
    pub fn spectral_sum(weights: &[f64], vectors: &[CVector]) -> Self {
        let dim = vectors.first().map_or(0, CVector::dim);
        let mut m = Self::zeros(dim);
        for (w, v) in weights.iter().zip(vectors) {
            for r in 0..dim {
                let vr = v[r] * *w;
                for col in 0..dim {
                    m[(r, col)] += vr * v[col].conj();
                }
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Assigns a role without validation; callers construct the matrix so
    /// that the role holds by construction.
    pub(crate) fn tagged(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Validates and assigns a role.
    pub fn with_role(mut self, role: Role) -> Result<Self> {
        match role {
            Role::General => {}
            Role::Hermitian => self.check_hermitian(STRUCT_TOL)?,
            Role::Positive => {
                self.check_hermitian(STRUCT_TOL)?;
                let eig = hermitian_eigendecomposition(&self)?;
                if let Some(&min) = eig.values.first() {
                    if min < -STRUCT_TOL {
                        return Err(SfpError::NotPositive(min));
                    }
                }
            }
            Role::Unitary => {
                let residual = self.unitarity_residual();
                if residual > UNITARY_TOL {
                    return Err(SfpError::Numerical(format!(
                        "matrix is not unitary (residual {residual:.3e})"
                    )));
                }
            }
        }
        self.role = role;
        Ok(self)
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> CVector {
        CVector((0..self.dim).map(|r| self[(r, col)]).collect())
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for col in 0..self.dim {
                m[(col, r)] = self[(r, col)].conj();
            }
        }
        m.role = self.role;
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
            role: Role::General,
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        debug_assert_eq!(v.dim(), self.dim);
        CVector(
            (0..self.dim)
                .map(|r| self.row(r).iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// ⟨a|M|b⟩
    pub fn sandwich(&self, a: &CVector, b: &CVector) -> C64 {
        a.dot(&self.apply(b))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for col in r..self.dim {
                worst = worst.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let asym = self.max_asymmetry();
        if asym > tol {
            Err(SfpError::NotHermitian(asym))
        } else {
            Ok(())
        }
    }

    /// ‖M†M − 𝕀‖_F
    pub fn unitarity_residual(&self) -> f64 {
        (&(&self.adjoint() * self) - &CMatrix::identity(self.dim)).frobenius_norm()
    }

    /// Entries flattened row-major; used to treat operators as vectors in
    /// operator space.
    pub fn vectorize(&self) -> CVector {
        CVector(self.data.clone())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + col]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for col in 0..n {
                    m.data[r * n + col] += a * rhs.data[k * n + col];
                }
            }
        }
        if self.role == Role::Unitary && rhs.role == Role::Unitary {
            m.role = Role::Unitary;
        }
        m
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
            role: Role::General,
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
            role: Role::General,
        }
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMatrix {
        CMatrix::spectral_sum(&self.values, &self.vectors)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation that zeroes it.
pub fn hermitian_eigendecomposition(m: &CMatrix) -> Result<Eigen> {
    m.check_hermitian(STRUCT_TOL)?;
    let n = m.dim();
    let mut a = m.clone();
    // symmetrize so that roundoff in the input does not drift
    for r in 0..n {
        a[(r, r)] = cr(a[(r, r)].re);
        for col in r + 1..n {
            let z = (a[(r, col)] + a[(col, r)].conj()) * 0.5;
            a[(r, col)] = z;
            a[(col, r)] = z.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (r + 1..n).map(move |col| (r, col)))
            .map(|(r, col)| a[(r, col)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let ph_conj = phase.conj();

                // A <- A W
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * cs - arq * ph_conj * sn;
                    a[(r, q)] = arp * sn + arq * ph_conj * cs;
                }
                // A <- W† A
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * cs - aqc * phase * sn;
                    a[(q, col)] = apc * sn + aqc * phase * cs;
                }
                a[(p, q)] = cr(0.0);
                a[(q, p)] = cr(0.0);
                a[(p, p)] = cr(app - t * mag);
                a[(q, q)] = cr(aqq + t * mag);

                // V <- V W
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * cs - vrq * ph_conj * sn;
                    v[(r, q)] = vrp * sn + vrq * ph_conj * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    Ok(Eigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    })
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `(-STRUCT_TOL, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn operator_sqrt(m: &CMatrix) -> Result<CMatrix> {
    if m.dim() == 2 {
        return sqrt_2x2(m);
    }
    operator_sqrt_general(m)
}

pub fn operator_sqrt_general(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigendecomposition(m)?;
    let mut roots = Vec::with_capacity(eig.values.len());
    for &lam in &eig.values {
        if lam < -STRUCT_TOL {
            return Err(SfpError::NotPositive(lam));
        }
        roots.push(lam.max(0.0).sqrt());
    }
    Ok(CMatrix::spectral_sum(&roots, &eig.vectors).tagged(Role::Positive))
}

/// Closed form `√M = (M + √det 𝕀) / √(tr M + 2√det)` for 2×2 PSD matrices.
fn sqrt_2x2(m: &CMatrix) -> Result<CMatrix> {
    m.check_hermitian(STRUCT_TOL)?;
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
    let lo = 0.5 * (tr - disc);
    let hi = 0.5 * (tr + disc);
    if lo < -STRUCT_TOL {
        return Err(SfpError::NotPositive(lo));
    }
    let lo = lo.max(0.0);
    let hi = hi.max(0.0);
    let sdet = (lo * hi).sqrt();
    let denom = (hi.sqrt() + lo.sqrt()).max(0.0);
    if denom == 0.0 {
        return Ok(CMatrix::zeros(2).tagged(Role::Positive));
    }
    let inv = 1.0 / denom;
    let mut out = CMatrix::zeros(2);
    out[(0, 0)] = cr((a + sdet) * inv);
    out[(1, 1)] = cr((d + sdet) * inv);
    out[(0, 1)] = b * inv;
    out[(1, 0)] = b.conj() * inv;
    Ok(out.tagged(Role::Positive))
}

/// Determinant by LU decomposition with partial pivoting.
pub fn determinant(m: &CMatrix) -> C64 {
    let n = m.dim();
    let mut a = m.clone();
    let mut det = cr(1.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap_or(k);
        if a[(pivot, k)].norm() == 0.0 {
            return cr(0.0);
        }
        if pivot != k {
            for col in 0..n {
                let tmp = a[(k, col)];
                a[(k, col)] = a[(pivot, col)];
                a[(pivot, col)] = tmp;
            }
            det = -det;
        }
        let akk = a[(k, k)];
        det *= akk;
        for r in k + 1..n {
            let f = a[(r, k)] / akk;
            if f == cr(0.0) {
                continue;
            }
            for col in k..n {
                let sub = f * a[(k, col)];
                a[(r, col)] -= sub;
            }
        }
    }
    det
}

/// Inverse by Gauss-Jordan elimination with partial pivoting. `None` when the
/// matrix is numerically singular.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    let n = m.dim();
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))?;
        if a[(pivot, k)].norm() <= 1e-14 * scale {
            return None;
        }
        for col in 0..n {
            a.data.swap(k * n + col, pivot * n + col);
            inv.data.swap(k * n + col, pivot * n + col);
        }
        let p = a[(k, k)].inv();
        for col in 0..n {
            a[(k, col)] *= p;
            inv[(k, col)] *= p;
        }
        for r in 0..n {
            if r == k {
                continue;
            }
            let f = a[(r, k)];
            if f == cr(0.0) {
                continue;
            }
            for col in 0..n {
                let sa = f * a[(k, col)];
                let si = f * inv[(k, col)];
                a[(r, col)] -= sa;
                inv[(r, col)] -= si;
            }
        }
    }
    inv.role = Role::General;
    Some(inv)
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt with
/// pivoting on the largest residual. Vectors whose residual norm drops below
/// `tol` are treated as dependent.
pub fn orthonormal_span(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut residuals: Vec<CVector> = vectors.to_vec();
    let mut basis: Vec<CVector> = Vec::new();
    let dim = vectors.first().map_or(0, CVector::dim);
    while basis.len() < dim && !residuals.is_empty() {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if norm <= tol {
            break;
        }
        let mut q = residuals.swap_remove(best).scale(cr(1.0 / norm));
        // second pass keeps q orthogonal to the basis at working precision
        for e in &basis {
            let proj = e.dot(&q);
            q.axpy(-proj, e);
        }
        let q = q.normalized().expect("residual above tolerance");
        for r in residuals.iter_mut() {
            let proj = q.dot(r);
            r.axpy(-proj, &q);
        }
        basis.push(q);
    }
    basis
}

/// Completes an orthonormal set to a basis of C^dim and returns the added
/// vectors (an orthonormal basis of the orthogonal complement).
pub fn orthogonal_complement(basis: &[CVector], dim: usize) -> Vec<CVector> {
    let mut all: Vec<CVector> = basis.to_vec();
    let mut extra = Vec::new();
    for k in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = CVector::basis(dim, k);
        for _ in 0..2 {
            for e in &all {
                let proj = e.dot(&v);
                v.axpy(-proj, e);
            }
        }
        if v.norm() > 1e-6 {
            let v = v.normalized().expect("checked norm");
            all.push(v.clone());
            extra.push(v);
        }
    }
    extra
}
