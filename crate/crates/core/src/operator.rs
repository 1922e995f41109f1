//! Dense operators on finite-dimensional tensor-product Hilbert spaces.
//!
//! Factor ordering follows the Kronecker convention: the first factor of a
//! [`SpaceLayout`] is the most significant digit of a composite index.
//! All entropies are in nats.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type C64 = Complex64;

/// Max-abs tolerance on `M - M†` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted in a density operator.
pub const NEG_EIG_TOL: f64 = -1e-10;
/// Eigenvalues below this contribute nothing to entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Ordered list of tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    dims: Vec<usize>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("layout needs at least one factor"));
        }
        if dims.contains(&0) {
            return Err(invalid(format!("layout dims must be >= 1, got {dims:?}")));
        }
        Ok(Self { dims })
    }

    /// Single-factor layout.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SpaceLayout) -> SpaceLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SpaceLayout { dims }
    }

    /// Split a composite index into per-factor digits.
    fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
    }
}

/// A square complex matrix tied to a tensor layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    entries: DMatrix<C64>,
}

impl Operator {
    pub fn new(layout: SpaceLayout, entries: DMatrix<C64>) -> Result<Self> {
        let n = layout.total_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(invalid(format!(
                "matrix shape {}x{} does not match layout dimension {n}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { layout, entries })
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, entries: DMatrix::zeros(n, n) }
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.total_dim();
        Self { layout, entries: DMatrix::identity(n, n) }
    }

    /// Diagonal operator with real entries on a single-factor space.
    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let layout = SpaceLayout::single(diag.len())?;
        Self::from_diagonal_on(layout, diag)
    }

    pub fn from_diagonal_on(layout: SpaceLayout, diag: &[f64]) -> Result<Self> {
        if diag.len() != layout.total_dim() {
            return Err(invalid("diagonal length does not match layout"));
        }
        let n = diag.len();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { layout, entries })
    }

    /// Build from row-major real/complex data on a single factor.
    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rows must form a square matrix"));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(SpaceLayout::single(n)?, entries)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), entries: self.entries.adjoint() }
    }

    /// Max-abs entry of `M - M†`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = self.entries[(i, j)] - self.entries[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        Self { layout: self.layout.clone(), entries: m }
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { layout: self.layout.clone(), entries: &self.entries * C64::new(s, 0.0) }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), entries: &self.entries - &other.entries })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), entries: &self.entries * &other.entries })
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        self.check_same_layout(u)?;
        let m = &u.entries * &self.entries * u.entries.adjoint();
        Ok(Self { layout: self.layout.clone(), entries: m })
    }

    /// Re Tr[self · other].
    pub fn expectation(&self, observable: &Operator) -> Result<f64> {
        self.check_same_layout(observable)?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[(i, j)] * observable.entries[(j, i)];
            }
        }
        Ok(acc.re)
    }

    fn check_same_layout(&self, other: &Operator) -> Result<()> {
        if self.layout != other.layout {
            return Err(invalid(format!(
                "layout mismatch: {:?} vs {:?}",
                self.layout.dims, other.layout.dims
            )));
        }
        Ok(())
    }
}

/// Kronecker product; the result's layout concatenates the inputs' layouts.
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    Operator {
        layout: a.layout.concat(&b.layout),
        entries: a.entries.kronecker(&b.entries),
    }
}

/// Trace out every factor not listed in `keep`. The kept factors retain
/// their original relative order.
pub fn partial_trace(o: &Operator, keep: &[usize]) -> Result<Operator> {
    let nf = o.layout.num_factors();
    if keep.is_empty() {
        return Err(invalid("partial_trace: keep must be non-empty"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(invalid("partial_trace: duplicate factor index"));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= nf) {
        return Err(invalid(format!("partial_trace: factor {bad} out of range (have {nf})")));
    }
    let dims = o.layout.dims();
    let out_layout = SpaceLayout::new(kept.iter().map(|&k| dims[k]).collect())?;
    let traced: Vec<usize> = (0..nf).filter(|f| !kept.contains(f)).collect();

    let n = o.dim();
    let m = out_layout.total_dim();
    let mut out = DMatrix::<C64>::zeros(m, m);
    let mut di = vec![0usize; nf];
    let mut dj = vec![0usize; nf];
    for i in 0..n {
        o.layout.digits(i, &mut di);
        for j in 0..n {
            o.layout.digits(j, &mut dj);
            if traced.iter().any(|&f| di[f] != dj[f]) {
                continue;
            }
            let (mut ri, mut rj) = (0usize, 0usize);
            for &k in &kept {
                ri = ri * dims[k] + di[k];
                rj = rj * dims[k] + dj[k];
            }
            out[(ri, rj)] += o.entries[(i, j)];
        }
    }
    Operator::new(out_layout, out)
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.values.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(invalid(format!("eig_hermitian: operator not Hermitian (max |M-M†| = {err:.3e})")));
    }
    let n = h.dim();
    if h.is_diagonal() {
        let mut order: Vec<usize> = (0..n).collect();
        let diag = h.real_diagonal();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| {
            if i == order[j] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        return Ok(HermitianEigen { values, vectors });
    }
    let sym = h.hermitian_part().into_matrix();
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(h: &Operator) -> Result<Vec<f64>> {
    if h.is_diagonal() {
        let mut d = h.real_diagonal();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    Ok(eig_hermitian(h)?.values)
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(invalid(format!("density operator not Hermitian (error {herm:.3e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(invalid(format!("density operator trace {tr} != 1")));
        }
        let min = eigvals_hermitian(&op)?.first().copied().unwrap_or(0.0);
        if min < NEG_EIG_TOL {
            return Err(invalid(format!("density operator has negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    /// Diagonal state from a probability vector (normalized to 1 ± 1e-10).
    pub fn from_probabilities(layout: SpaceLayout, probs: &[f64]) -> Result<Self> {
        Self::new(Operator::from_diagonal_on(layout, probs)?)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(layout: SpaceLayout, psi: &[C64]) -> Result<Self> {
        if psi.len() != layout.total_dim() {
            return Err(invalid("state vector length does not match layout"));
        }
        let n = psi.len();
        let m = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self::new(Operator::new(layout, m)?)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(layout: SpaceLayout) -> Self {
        let d = layout.total_dim() as f64;
        Self { op: Operator::identity(layout).scale(1.0 / d) }
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.op.layout()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.op.real_diagonal()
    }

    pub fn expectation(&self, observable: &Operator) -> Result<f64> {
        self.op.expectation(observable)
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator { op: tensor_product(&self.op, &other.op) }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        Ok(DensityOperator { op: partial_trace(&self.op, keep)? })
    }

    /// Mixture `Σ w_i ρ_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
        let first = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let mut acc = Operator::zeros(first.1.layout().clone());
        for (w, rho) in parts {
            acc = acc.add(&rho.op.scale(*w))?;
        }
        DensityOperator::new(acc)
    }
}

/// Shannon entropy of `λ_i` with the eigenvalue clamp applied.
fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `-Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let values = eigvals_hermitian(rho.as_operator()).expect("density operators are Hermitian");
    entropy_of_spectrum(&values)
}

/// `D[ρ‖σ] = Tr ρ (ln ρ − ln σ)` in nats; `+∞` when the support of `ρ` is
/// not contained in the support of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    if rho.layout() != sigma.layout() {
        return f64::INFINITY;
    }
    let rho_values = eigvals_hermitian(rho.as_operator()).expect("Hermitian");
    let neg_entropy = -entropy_of_spectrum(&rho_values);

    let eig = eig_hermitian(sigma.as_operator()).expect("Hermitian");
    let v = &eig.vectors;
    let m = rho.matrix();
    let n = rho.dim();
    let mut cross = 0.0;
    for (j, &mu) in eig.values.iter().enumerate() {
        // ⟨v_j|ρ|v_j⟩
        let col = v.column(j);
        let mut w = C64::new(0.0, 0.0);
        for a in 0..n {
            let va = col[a].conj();
            if va == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..n {
                w += va * m[(a, b)] * col[b];
            }
        }
        let w = w.re;
        // weights below the entropy cutoff are dropped on both sides
        if w <= ENTROPY_CUTOFF {
            continue;
        }
        if mu > 0.0 {
            cross += w * mu.ln();
        } else {
            return f64::INFINITY;
        }
    }
    (neg_entropy - cross).max(0.0)
}

/// `-Σ p ln p` in nats. Entries down to −1e-12 are clamped to zero; the sum
/// must be 1 within 1e-9.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(bad) = p.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(invalid(format!("probability entry {bad} is negative or not finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum())
}

/// `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    let diff = a.sub(b)?.hermitian_part();
    Ok(0.5 * eigvals_hermitian(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
}
