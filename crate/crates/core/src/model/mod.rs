//! Linear time-varying plant description and its augmented filter models.

mod augment;
mod conditions;

pub use augment::{
    assemble_process_noise, build_fault_model, build_no_fault_model, AugmentedModel,
};
pub use conditions::{
    check_convergence_condition, check_existence_condition, existence_for_model,
    pencil_min_singular_value, ConvergenceVerdict, ExistenceVerdict,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// A matrix-valued function of the step index.
///
/// Tabulated sequences hold one entry per step; lookups past the end reuse
/// the last entry. Interpolation is not supported.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSeq {
    Constant(DMatrix<f64>),
    Tabulated(Vec<DMatrix<f64>>),
}

impl MatrixSeq {
    pub fn at(&self, k: usize) -> &DMatrix<f64> {
        match self {
            MatrixSeq::Constant(m) => m,
            MatrixSeq::Tabulated(v) => &v[k.min(v.len() - 1)],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.at(0).shape()
    }

    pub fn entries(&self) -> Box<dyn Iterator<Item = &DMatrix<f64>> + '_> {
        match self {
            MatrixSeq::Constant(m) => Box::new(std::iter::once(m)),
            MatrixSeq::Tabulated(v) => Box::new(v.iter()),
        }
    }

    /// Number of distinct steps covered; `None` for constants.
    pub fn len(&self) -> Option<usize> {
        match self {
            MatrixSeq::Constant(_) => None,
            MatrixSeq::Tabulated(v) => Some(v.len()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixSeq::Constant(_))
    }

    pub fn scaled(&self, c: f64) -> MatrixSeq {
        match self {
            MatrixSeq::Constant(m) => MatrixSeq::Constant(m * c),
            MatrixSeq::Tabulated(v) => MatrixSeq::Tabulated(v.iter().map(|m| m * c).collect()),
        }
    }
}

impl From<DMatrix<f64>> for MatrixSeq {
    fn from(m: DMatrix<f64>) -> Self {
        MatrixSeq::Constant(m)
    }
}

/// Plant `x_{k+1} = A x_k + B u_k + E d_k + w_k`, `y_k = H x_k + F f_k + v_k`
/// with `w ~ N(0, Q)` and `v ~ N(0, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtvModel {
    pub a: MatrixSeq,
    pub b: MatrixSeq,
    pub e: MatrixSeq,
    pub h: MatrixSeq,
    pub f: MatrixSeq,
    pub q: MatrixSeq,
    pub r: MatrixSeq,
    n: usize,
    m: usize,
    n_d: usize,
    n_f: usize,
    p: usize,
}

/// Rank facts about the square regime `n = m = n_d = n_f` with full-rank `H`, `E`, `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeReport {
    pub square: bool,
    pub rank_h: usize,
    pub rank_e: usize,
    pub rank_f: usize,
}

impl RegimeReport {
    pub fn full_rank(&self, m: usize) -> bool {
        self.rank_h == m && self.rank_e == m && self.rank_f == m
    }
}

impl LtvModel {
    /// Builds and validates a model. Dimensions are inferred from `A`, `B`, `E`, `H`, `F`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: MatrixSeq,
        b: MatrixSeq,
        e: MatrixSeq,
        h: MatrixSeq,
        f: MatrixSeq,
        q: MatrixSeq,
        r: MatrixSeq,
    ) -> Result<Self> {
        let (n, n2) = a.shape();
        if n != n2 {
            return Err(Error::dim("A", "square", format!("{n}x{n2}")));
        }
        let p = b.shape().1;
        let n_d = e.shape().1;
        let m = h.shape().0;
        let n_f = f.shape().1;
        let model = LtvModel { a, b, e, h, f, q, r, n, m, n_d, n_f, p };
        model.validate()?;
        Ok(model)
    }

    /// Convenience constructor for constant matrices.
    #[allow(clippy::too_many_arguments)]
    pub fn time_invariant(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        e: DMatrix<f64>,
        h: DMatrix<f64>,
        f: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(a.into(), b.into(), e.into(), h.into(), f.into(), q.into(), r.into())
    }

    fn validate(&self) -> Result<()> {
        let expect = [
            ("A", &self.a, (self.n, self.n)),
            ("B", &self.b, (self.n, self.p)),
            ("E", &self.e, (self.n, self.n_d)),
            ("H", &self.h, (self.m, self.n)),
            ("F", &self.f, (self.m, self.n_f)),
            ("Q", &self.q, (self.n, self.n)),
            ("R", &self.r, (self.m, self.m)),
        ];
        for (name, seq, shape) in expect {
            if let MatrixSeq::Tabulated(v) = seq {
                if v.is_empty() {
                    return Err(Error::config(name, "tabulated sequence is empty"));
                }
            }
            for (k, mat) in seq.entries().enumerate() {
                if mat.shape() != shape {
                    return Err(Error::dim(
                        format!("{name} at step {k}"),
                        format!("{}x{}", shape.0, shape.1),
                        format!("{}x{}", mat.nrows(), mat.ncols()),
                    ));
                }
            }
        }
        for (k, q) in self.q.entries().enumerate() {
            if !linalg::is_psd(q) {
                return Err(Error::config("Q", format!("not symmetric PSD at step {k}")));
            }
        }
        for (k, r) in self.r.entries().enumerate() {
            if !linalg::is_symmetric(r, 1e-9) || r.clone().cholesky().is_none() {
                return Err(Error::config("R", format!("not symmetric positive definite at step {k}")));
            }
        }
        Ok(())
    }

    /// Errors if any tabulated matrix covers fewer than `horizon` steps.
    pub fn check_horizon(&self, horizon: usize) -> Result<()> {
        for (name, seq) in self.named() {
            if let Some(len) = seq.len() {
                if len < horizon {
                    return Err(Error::config(
                        name,
                        format!("tabulated sequence has {len} entries, horizon is {horizon}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, &MatrixSeq); 7] {
        [
            ("A", &self.a),
            ("B", &self.b),
            ("E", &self.e),
            ("H", &self.h),
            ("F", &self.f),
            ("Q", &self.q),
            ("R", &self.r),
        ]
    }

    pub fn is_time_invariant(&self) -> bool {
        self.named().iter().all(|(_, s)| s.is_constant())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n_d(&self) -> usize {
        self.n_d
    }
    pub fn n_f(&self) -> usize {
        self.n_f
    }
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn a(&self, k: usize) -> &DMatrix<f64> {
        self.a.at(k)
    }
    pub fn b(&self, k: usize) -> &DMatrix<f64> {
        self.b.at(k)
    }
    pub fn e(&self, k: usize) -> &DMatrix<f64> {
        self.e.at(k)
    }
    pub fn h(&self, k: usize) -> &DMatrix<f64> {
        self.h.at(k)
    }
    pub fn f(&self, k: usize) -> &DMatrix<f64> {
        self.f.at(k)
    }
    pub fn q(&self, k: usize) -> &DMatrix<f64> {
        self.q.at(k)
    }
    pub fn r(&self, k: usize) -> &DMatrix<f64> {
        self.r.at(k)
    }

    /// `B(k)·u`, checking the input length.
    pub fn known_input(&self, u: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
        if u.len() != self.p {
            return Err(Error::dim("input u", self.p, u.len()));
        }
        Ok(self.b(k) * u)
    }

    /// Copy of the model with `Q` scaled by `kq` and `R` by `kr`.
    pub fn with_noise_scale(&self, kq: f64, kr: f64) -> LtvModel {
        LtvModel {
            q: self.q.scaled(kq),
            r: self.r.scaled(kr),
            ..self.clone()
        }
    }

    pub fn regime_report(&self, k: usize) -> RegimeReport {
        RegimeReport {
            square: self.n == self.m && self.m == self.n_d && self.n_d == self.n_f,
            rank_h: linalg::numerical_rank(self.h(k)),
            rank_e: linalg::numerical_rank(self.e(k)),
            rank_f: linalg::numerical_rank(self.f(k)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let err = LtvModel::time_invariant(
            eye(2),
            DMatrix::zeros(2, 1),
            eye(2),
            DMatrix::zeros(3, 2),
            eye(2),
            eye(2),
            eye(3),
        )
        .unwrap_err();
        assert!(err.to_string().contains('F'), "{err}");
    }

    #[test]
    fn rejects_indefinite_noise() {
        let bad_q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let err = LtvModel::time_invariant(
            eye(2),
            DMatrix::zeros(2, 1),
            eye(2),
            eye(2),
            eye(2),
            bad_q,
            eye(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "Q"));
    }

    #[test]
    fn tabulated_lookup_clamps_to_last() {
        let seq = MatrixSeq::Tabulated(vec![eye(1), eye(1) * 2.0]);
        assert_eq!(seq.at(0)[(0, 0)], 1.0);
        assert_eq!(seq.at(7)[(0, 0)], 2.0);
    }

    #[test]
    fn horizon_coverage_is_checked() {
        let m = LtvModel::new(
            MatrixSeq::Tabulated(vec![eye(1); 3]),
            DMatrix::zeros(1, 1).into(),
            eye(1).into(),
            eye(1).into(),
            eye(1).into(),
            eye(1).into(),
            eye(1).into(),
        )
        .unwrap();
        assert!(m.check_horizon(3).is_ok());
        assert!(m.check_horizon(4).is_err());
        assert!(!m.is_time_invariant());
    }
}
