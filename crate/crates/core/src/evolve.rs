//! Time evolution `psi(t) = exp(-iHt) psi(0)`.
//!
//! Two methods: full eigendecomposition ([`EigenPropagator`]) and matrix-free
//! Lanczos propagation with adaptive substeps ([`Propagator::krylov`]).
//!
//! Sector-tagged states use compressed coordinates: within a parity sector
//! the `r`-th basis state is `2r | bit`, where `bit` fixes the parity, so
//! the position of a full index `b` is `b >> 1`.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, ComplexMatrix};
use crate::models::{parity_operator, OperatorSum, ParitySector};
use crate::scalar::Real;
use crate::states::StateVector;

/// Largest dimension [`Method::Auto`] sends to exact diagonalization.
pub const AUTO_EXACT_MAX_DIM: usize = 1 << 12;
/// Dense propagator cap, in qubits.
pub const EXACT_QUBIT_CAP: usize = 15;
const PARALLEL_APPLY_MIN_DIM: usize = 1 << 14;
const APPLY_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    ExactEig,
    Krylov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    pub step_tolerance: f64,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            step_tolerance: 1e-10,
            max_substeps: 100_000,
        }
    }
}

#[inline]
fn sector_full_index(r: usize, sector: ParitySector) -> usize {
    match sector {
        ParitySector::Full => r,
        ParitySector::Even => (r << 1) | (r.count_ones() as usize & 1),
        ParitySector::Odd => (r << 1) | (!r.count_ones() as usize & 1),
    }
}

#[inline]
fn sector_position(b: usize, sector: ParitySector) -> usize {
    match sector {
        ParitySector::Full => b,
        _ => b >> 1,
    }
}

fn flipped(sector: ParitySector) -> ParitySector {
    match sector {
        ParitySector::Even => ParitySector::Odd,
        ParitySector::Odd => ParitySector::Even,
        ParitySector::Full => ParitySector::Full,
    }
}

fn sector_dim(n_qubits: usize, sector: ParitySector) -> usize {
    match sector {
        ParitySector::Full => 1usize << n_qubits,
        _ => 1usize << (n_qubits - 1),
    }
}

/// Linear map on (possibly sector-compressed) amplitude vectors.
pub trait LinearOperator<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]);
    /// Upper bound on the operator norm.
    fn norm_bound(&self) -> T;
}

/// Matrix-free Pauli-sum operator mapping `in_sector` amplitudes to `out_sector` amplitudes.
#[derive(Clone, Debug)]
pub struct SumOperator<T> {
    n_qubits: usize,
    in_sector: ParitySector,
    out_sector: ParitySector,
    factors: Vec<(u64, u64, Complex<T>)>,
    norm_bound: T,
}

impl<T: Real> SumOperator<T> {
    /// Operator on one sector (or the full space); non-full sectors require
    /// every term to commute or every term to anticommute with the parity.
    pub fn new(sum: &OperatorSum<T>, in_sector: ParitySector) -> Result<Self> {
        let n = sum.n_qubits();
        let out_sector = if in_sector == ParitySector::Full {
            ParitySector::Full
        } else {
            let p = parity_operator(2 * n)?;
            let commuting = sum
                .terms()
                .iter()
                .filter(|t| t.string.commutes_with(&p))
                .count();
            if commuting == sum.len() {
                in_sector
            } else if commuting == 0 {
                flipped(in_sector)
            } else {
                return Err(Error::SymmetryViolation(
                    "operator mixes parity-preserving and parity-flipping terms".into(),
                ));
            }
        };
        Ok(Self {
            n_qubits: n,
            in_sector,
            out_sector,
            factors: sum.term_factors(),
            norm_bound: sum.terms().iter().map(|t| t.coeff.abs()).sum(),
        })
    }

    pub fn in_sector(&self) -> ParitySector {
        self.in_sector
    }

    pub fn out_sector(&self) -> ParitySector {
        self.out_sector
    }

    #[inline]
    fn row(&self, r: usize, x: &[Complex<T>]) -> Complex<T> {
        let b = sector_full_index(r, self.out_sector) as u64;
        let mut acc = Complex::zero();
        for &(xm, zm, f) in &self.factors {
            let src = b ^ xm;
            let v = x[sector_position(src as usize, self.in_sector)];
            if (zm & src).count_ones() & 1 == 0 {
                acc += f * v;
            } else {
                acc -= f * v;
            }
        }
        acc
    }
}

impl<T: Real> LinearOperator<T> for SumOperator<T> {
    fn dim(&self) -> usize {
        sector_dim(self.n_qubits, self.out_sector)
    }

    fn apply_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        assert_eq!(x.len(), sector_dim(self.n_qubits, self.in_sector));
        assert_eq!(y.len(), self.dim());
        if y.len() >= PARALLEL_APPLY_MIN_DIM {
            y.par_chunks_mut(APPLY_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    for (k, out) in chunk.iter_mut().enumerate() {
                        *out = self.row(c * APPLY_CHUNK + k, x);
                    }
                });
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out = self.row(r, x);
            }
        }
    }

    fn norm_bound(&self) -> T {
        self.norm_bound
    }
}

impl<T: Real> LinearOperator<T> for ComplexMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply_into(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        y.copy_from_slice(&self.matvec(x));
    }

    fn norm_bound(&self) -> T {
        self.frobenius_sq().sqrt()
    }
}

/// `O psi`, matrix-free. The result lives in the sector `O` maps into; an
/// operator that mixes parities acting on a sector state returns a full-space vector.
pub fn apply_operator<T: Real>(
    op: &OperatorSum<T>,
    psi: &StateVector<T>,
) -> Result<StateVector<T>> {
    if op.n_qubits() != psi.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit operator applied to a {}-qubit state",
            op.n_qubits(),
            psi.n_qubits()
        )));
    }
    let (sum_op, input) = match SumOperator::new(op, psi.sector()) {
        Ok(s) => (s, psi.clone()),
        Err(Error::SymmetryViolation(_)) => {
            (SumOperator::new(op, ParitySector::Full)?, psi.embed())
        }
        Err(e) => return Err(e),
    };
    let mut out = vec![Complex::zero(); sum_op.dim()];
    sum_op.apply_into(input.amplitudes(), &mut out);
    StateVector::unnormalized(op.n_qubits(), out, sum_op.out_sector())
}

/// Eigendecomposition cache of a dense Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenPropagator<T> {
    values: Vec<T>,
    vectors: ComplexMatrix<T>,
}

impl<T: Real> EigenPropagator<T> {
    pub fn new(h: &ComplexMatrix<T>) -> Result<Self> {
        if h.rows() > 1usize << EXACT_QUBIT_CAP {
            return Err(Error::Resource(format!(
                "dense dimension {} exceeds 2^{EXACT_QUBIT_CAP}",
                h.rows()
            )));
        }
        let (values, vectors) = T::eigh(h)?;
        Ok(Self { values, vectors })
    }

    pub fn from_parts(values: Vec<T>, vectors: ComplexMatrix<T>) -> Result<Self> {
        if !vectors.is_square() || vectors.rows() != values.len() {
            return Err(Error::Dimension(
                "eigenvector matrix does not match eigenvalue count".into(),
            ));
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.values
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix<T> {
        &self.vectors
    }

    /// `max |H V - V diag(lambda)|`.
    pub fn residual(&self, h: &ComplexMatrix<T>) -> T {
        let hv = h.matmul(&self.vectors);
        let vl = self.vectors.matmul(&ComplexMatrix::diagonal(&self.values));
        hv.max_abs_diff(&vl)
    }

    /// `V exp(-i diag(lambda) t) V^dagger psi0` for every `t`, as one `D x T` product.
    pub fn evolve_amplitudes(
        &self,
        psi0: &[Complex<T>],
        times: &[T],
    ) -> Result<Vec<Vec<Complex<T>>>> {
        let d = self.dim();
        if psi0.len() != d {
            return Err(Error::Dimension(format!(
                "state of length {} for a {d}-dim propagator",
                psi0.len()
            )));
        }
        if times.is_empty() {
            return Ok(Vec::new());
        }
        let col = ComplexMatrix::from_columns(&[psi0.to_vec()]);
        let c0 = T::adjoint_matmul(&self.vectors, &col).column(0);
        let phases = ComplexMatrix::from_fn(d, times.len(), |k, j| {
            let arg = -self.values[k] * times[j];
            Complex::new(arg.cos(), arg.sin()) * c0[k]
        });
        let out = self.vectors.matmul(&phases).into_columns();
        Ok(out
            .into_iter()
            .zip(times)
            .map(|(v, &t)| if t == T::zero() { psi0.to_vec() } else { v })
            .collect())
    }
}

enum Engine<T: Real> {
    Exact(EigenPropagator<T>),
    Krylov(Box<dyn LinearOperator<T>>, KrylovOptions),
}

/// Propagator bound to a Hamiltonian on a fixed qubit count and sector.
pub struct Propagator<T: Real> {
    n_qubits: usize,
    sector: ParitySector,
    engine: Engine<T>,
}

impl<T: Real> std::fmt::Debug for Propagator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("n_qubits", &self.n_qubits)
            .field("sector", &self.sector)
            .field("method", &self.method())
            .finish()
    }
}

impl<T: Real> Propagator<T> {
    /// Pauli-sum Hamiltonian restricted to `sector`; `Auto` picks exact
    /// diagonalization up to dimension `2^12`.
    pub fn from_sum(
        h: &OperatorSum<T>,
        sector: ParitySector,
        method: Method,
        opts: KrylovOptions,
    ) -> Result<Self> {
        let n = h.n_qubits();
        let dim = sector_dim(n, sector);
        let exact = match method {
            Method::ExactEig => true,
            Method::Krylov => false,
            Method::Auto => dim <= AUTO_EXACT_MAX_DIM,
        };
        let op = SumOperator::new(h, sector)?;
        if op.out_sector() != sector {
            return Err(Error::SymmetryViolation(
                "Hamiltonian does not preserve the sector".into(),
            ));
        }
        if exact {
            if n > EXACT_QUBIT_CAP {
                return Err(Error::Resource(format!(
                    "exact propagation on {n} qubits exceeds cap {EXACT_QUBIT_CAP}"
                )));
            }
            let dense = match sector {
                ParitySector::Full => h.to_dense(EXACT_QUBIT_CAP)?,
                _ => crate::models::project_parity(h, sector, EXACT_QUBIT_CAP)?.matrix,
            };
            Self::exact(&dense, n, sector)
        } else {
            Self::krylov(Box::new(op), n, sector, opts)
        }
    }

    /// Dense Hamiltonian on the given layout (`2^n` or `2^(n-1)` rows for a sector).
    pub fn from_dense(
        h: &ComplexMatrix<T>,
        n_qubits: usize,
        sector: ParitySector,
        method: Method,
        opts: KrylovOptions,
    ) -> Result<Self> {
        if method != Method::Krylov {
            Self::exact(h, n_qubits, sector)
        } else {
            Self::check_layout(h.rows(), n_qubits, sector)?;
            Self::krylov(Box::new(h.clone()), n_qubits, sector, opts)
        }
    }

    fn check_layout(rows: usize, n_qubits: usize, sector: ParitySector) -> Result<()> {
        if n_qubits == 0 || rows != sector_dim(n_qubits, sector) {
            return Err(Error::Dimension(format!(
                "{rows}-dim Hamiltonian does not fit a {sector:?} layout on {n_qubits} qubits"
            )));
        }
        Ok(())
    }

    pub fn exact(h: &ComplexMatrix<T>, n_qubits: usize, sector: ParitySector) -> Result<Self> {
        Self::check_layout(h.rows(), n_qubits, sector)?;
        Ok(Self {
            n_qubits,
            sector,
            engine: Engine::Exact(EigenPropagator::new(h)?),
        })
    }

    pub fn krylov(
        op: Box<dyn LinearOperator<T>>,
        n_qubits: usize,
        sector: ParitySector,
        opts: KrylovOptions,
    ) -> Result<Self> {
        Self::check_layout(op.dim(), n_qubits, sector)?;
        if opts.krylov_dim < 2 || !(opts.step_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid Krylov options {opts:?}"
            )));
        }
        Ok(Self {
            n_qubits,
            sector,
            engine: Engine::Krylov(op, opts),
        })
    }

    pub fn method(&self) -> Method {
        match self.engine {
            Engine::Exact(_) => Method::ExactEig,
            Engine::Krylov(..) => Method::Krylov,
        }
    }

    pub fn sector(&self) -> ParitySector {
        self.sector
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn eigen(&self) -> Option<&EigenPropagator<T>> {
        match &self.engine {
            Engine::Exact(e) => Some(e),
            Engine::Krylov(..) => None,
        }
    }

    fn check_state(&self, psi: &StateVector<T>) -> Result<()> {
        if psi.n_qubits() != self.n_qubits || psi.sector() != self.sector {
            return Err(Error::Dimension(format!(
                "{:?} state on {} qubits given to a {:?} propagator on {}",
                psi.sector(),
                psi.n_qubits(),
                self.sector,
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// States at each time; `times` must be ascending. Krylov starts from `t = 0`.
    pub fn evolve(&self, psi0: &StateVector<T>, times: &[T]) -> Result<Vec<StateVector<T>>> {
        self.check_state(psi0)?;
        self.evolve_amplitudes(psi0.amplitudes(), times)?
            .into_iter()
            .map(|a| psi0.with_amplitudes(a))
            .collect()
    }

    pub fn evolve_amplitudes(
        &self,
        psi0: &[Complex<T>],
        times: &[T],
    ) -> Result<Vec<Vec<Complex<T>>>> {
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument(
                "time grid must be sorted ascending".into(),
            ));
        }
        match &self.engine {
            Engine::Exact(e) => e.evolve_amplitudes(psi0, times),
            Engine::Krylov(op, opts) => {
                if psi0.len() != op.dim() {
                    return Err(Error::Dimension(format!(
                        "state of length {} for a {}-dim operator",
                        psi0.len(),
                        op.dim()
                    )));
                }
                let mut out = Vec::with_capacity(times.len());
                let mut cur = psi0.to_vec();
                let mut t_cur = T::zero();
                for &t in times {
                    if t != t_cur {
                        cur = krylov_propagate(op.as_ref(), &cur, t - t_cur, opts)?;
                        t_cur = t;
                    }
                    out.push(cur.clone());
                }
                Ok(out)
            }
        }
    }

    /// `exp(-iHt) psi` for a single (possibly negative) time.
    pub fn step(&self, psi: &[Complex<T>], t: T) -> Result<Vec<Complex<T>>> {
        if t == T::zero() {
            return Ok(psi.to_vec());
        }
        match &self.engine {
            Engine::Exact(e) => Ok(e.evolve_amplitudes(psi, &[t])?.pop().expect("one time")),
            Engine::Krylov(op, opts) => krylov_propagate(op.as_ref(), psi, t, opts),
        }
    }
}

/// `exp(+iHt) O exp(-iHt) psi` via two propagations and one operator application.
pub fn heisenberg_operator_apply<T: Real>(
    prop: &Propagator<T>,
    op: &OperatorSum<T>,
    psi: &StateVector<T>,
    t: T,
) -> Result<StateVector<T>> {
    prop.check_state(psi)?;
    let fwd = psi.with_amplitudes(prop.step(psi.amplitudes(), t)?)?;
    let o_fwd = apply_operator(op, &fwd)?;
    if o_fwd.sector() != prop.sector() {
        return Err(Error::SymmetryViolation(
            "probe leaves the propagator's sector; use a full-space propagator".into(),
        ));
    }
    psi.with_amplitudes(prop.step(o_fwd.amplitudes(), -t)?)
}

/// Dense exact evolution.
pub fn evolve_exact<T: Real>(
    h: &ComplexMatrix<T>,
    psi0: &StateVector<T>,
    times: &[T],
) -> Result<Vec<StateVector<T>>> {
    Propagator::exact(h, psi0.n_qubits(), psi0.sector())?.evolve(psi0, times)
}

/// Matrix-free Krylov evolution in the sector of `psi0`.
pub fn evolve_krylov<T: Real>(
    h: &OperatorSum<T>,
    psi0: &StateVector<T>,
    times: &[T],
    opts: KrylovOptions,
) -> Result<Vec<StateVector<T>>> {
    Propagator::from_sum(h, psi0.sector(), Method::Krylov, opts)?.evolve(psi0, times)
}

struct Lanczos<T> {
    basis: Vec<Vec<Complex<T>>>,
    values: Vec<T>,
    vectors: ComplexMatrix<T>,
    residual: T,
}

impl<T: Real> Lanczos<T> {
    fn build(op: &dyn LinearOperator<T>, v0: Vec<Complex<T>>, m: usize) -> Result<Self> {
        let d = v0.len();
        let m = m.min(d);
        let scale = op.norm_bound().max(T::one());
        let breakdown = T::epsilon() * T::lit(16.0) * scale;
        let mut basis = vec![v0];
        let mut alpha: Vec<T> = Vec::with_capacity(m);
        let mut beta: Vec<T> = Vec::with_capacity(m);
        let mut w = vec![Complex::zero(); d];
        let mut residual = T::zero();
        for j in 0..m {
            op.apply_into(&basis[j], &mut w);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let h = inner(v, &w);
                    for (wi, &vi) in w.iter_mut().zip(v) {
                        *wi -= h * vi;
                    }
                }
            }
            let b = norm(&w);
            if !b.is_finite() {
                return Err(Error::Numeric("non-finite Lanczos vector".into()));
            }
            if b <= breakdown {
                residual = T::zero();
                break;
            }
            if j + 1 == m {
                residual = b;
                break;
            }
            beta.push(b);
            let inv = T::one() / b;
            basis.push(w.iter().map(|&z| z * inv).collect());
        }
        let k = alpha.len();
        basis.truncate(k);
        let mut t = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = Complex::new(alpha[i], T::zero());
            if i + 1 < k {
                t[(i, i + 1)] = Complex::new(beta[i], T::zero());
                t[(i + 1, i)] = Complex::new(beta[i], T::zero());
            }
        }
        let (values, vectors) = T::eigh(&t)?;
        Ok(Self {
            basis,
            values,
            vectors,
            residual,
        })
    }

    /// Coefficients of `exp(-i T dt) e_1` and the residual error estimate.
    fn coefficients(&self, dt: T) -> (Vec<Complex<T>>, T) {
        let k = self.values.len();
        let weights: Vec<Complex<T>> = (0..k)
            .map(|j| {
                let arg = -self.values[j] * dt;
                Complex::new(arg.cos(), arg.sin()) * self.vectors[(0, j)].conj()
            })
            .collect();
        let c: Vec<Complex<T>> = (0..k)
            .map(|i| {
                (0..k).fold(Complex::zero(), |acc, j| {
                    acc + self.vectors[(i, j)] * weights[j]
                })
            })
            .collect();
        let err = self.residual * c[k - 1].norm();
        (c, err)
    }
}

fn krylov_propagate<T: Real>(
    op: &dyn LinearOperator<T>,
    psi: &[Complex<T>],
    delta: T,
    opts: &KrylovOptions,
) -> Result<Vec<Complex<T>>> {
    let tol = T::lit(opts.step_tolerance);
    let mut cur = psi.to_vec();
    let mut remaining = delta;
    let mut substeps = 0usize;
    while remaining != T::zero() {
        let nrm = norm(&cur);
        if nrm == T::zero() {
            return Ok(cur);
        }
        let inv = T::one() / nrm;
        let lz = Lanczos::build(op, cur.iter().map(|&z| z * inv).collect(), opts.krylov_dim)?;
        let mut dt = remaining;
        let (c, _) = loop {
            let (c, err) = lz.coefficients(dt);
            if err <= tol {
                break (c, err);
            }
            substeps += 1;
            if substeps > opts.max_substeps {
                return Err(Error::Propagation(format!(
                    "Krylov step did not converge: {substeps} substeps, residual estimate {err} at dt {dt}, {} left",
                    remaining
                )));
            }
            dt /= T::lit(2.0);
        };
        let mut next = vec![Complex::zero(); cur.len()];
        for (ci, v) in c.iter().zip(&lz.basis) {
            let s = *ci * nrm;
            for (n, &x) in next.iter_mut().zip(v) {
                *n += s * x;
            }
        }
        cur = next;
        remaining = if dt == remaining {
            T::zero()
        } else {
            remaining - dt
        };
        substeps += 1;
        if substeps > opts.max_substeps {
            return Err(Error::Propagation(format!(
                "exceeded {} Krylov substeps",
                opts.max_substeps
            )));
        }
    }
    Ok(cur)
}

/// `<psi|H|psi>` for a Hermitian operator.
pub fn expectation<T: Real>(op: &dyn LinearOperator<T>, psi: &[Complex<T>]) -> T {
    let mut w = vec![Complex::zero(); psi.len()];
    op.apply_into(psi, &mut w);
    inner(psi, &w).re
}
