//! Rank tests on the plant: decoupling existence and augmented-filter convergence.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LtvModel;
use crate::linalg::{self, RANK_RTOL};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistenceVerdict {
    pub satisfied: bool,
    pub lhs_rank: usize,
    pub rhs_rank: usize,
}

impl std::fmt::Display for ExistenceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (lhs {}, rhs {})",
            if self.satisfied { "satisfied" } else { "NOT satisfied" },
            self.lhs_rank,
            self.rhs_rank
        )
    }
}

/// Compares `rank [[F′, H E′], [0, F′]]` with `rank F′ + rank [E′; F′]`.
pub fn check_existence_condition(
    e_prime: &DMatrix<f64>,
    f_prime: &DMatrix<f64>,
    h: &DMatrix<f64>,
) -> ExistenceVerdict {
    let m = f_prime.nrows();
    let q = f_prime.ncols();
    let n = e_prime.nrows();
    let he = h * e_prime;
    let mut lhs = DMatrix::zeros(2 * m, 2 * q);
    lhs.view_mut((0, 0), (m, q)).copy_from(f_prime);
    lhs.view_mut((0, q), (m, q)).copy_from(&he);
    lhs.view_mut((m, q), (m, q)).copy_from(f_prime);
    let mut stacked = DMatrix::zeros(n + m, q);
    stacked.view_mut((0, 0), (n, q)).copy_from(e_prime);
    stacked.view_mut((n, 0), (m, q)).copy_from(f_prime);
    let lhs_rank = linalg::numerical_rank(&lhs);
    let rhs_rank = linalg::numerical_rank(f_prime) + linalg::numerical_rank(&stacked);
    ExistenceVerdict { satisfied: lhs_rank == rhs_rank, lhs_rank, rhs_rank }
}

/// Existence check with `E′ = [E, 0]` and `F′ = [0, F]`, i.e. treating
/// disturbances and faults as one stacked unknown input.
pub fn existence_for_model(model: &LtvModel, k: usize) -> ExistenceVerdict {
    let (n, m, nd, nf) = (model.n(), model.m(), model.n_d(), model.n_f());
    let mut e_prime = DMatrix::zeros(n, nd + nf);
    e_prime.view_mut((0, 0), (n, nd)).copy_from(model.e(k));
    let mut f_prime = DMatrix::zeros(m, nd + nf);
    f_prime.view_mut((0, nd), (m, nf)).copy_from(model.f(k));
    check_existence_condition(&e_prime, &f_prime, model.h(k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceVerdict {
    pub satisfied: bool,
    /// Finite invariant zeros with `|z| ≥ 1`.
    pub violating_zeros: Vec<Complex<f64>>,
    /// All finite invariant zeros found.
    pub zeros: Vec<Complex<f64>>,
    /// The pencil loses rank for every `z`.
    pub degenerate: bool,
    /// Step at which time-varying matrices were frozen, if any.
    pub frozen_step: Option<usize>,
}

impl std::fmt::Display for ConvergenceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.degenerate {
            return write!(f, "NOT satisfied (degenerate pencil)");
        }
        if self.satisfied {
            write!(f, "satisfied")?;
        } else {
            write!(f, "NOT satisfied (zeros on or outside the unit circle:")?;
            for z in &self.violating_zeros {
                write!(f, " {:.6}{:+.6}i", z.re, z.im)?;
            }
            write!(f, ")")?;
        }
        if let Some(k) = self.frozen_step {
            write!(f, " [frozen-time check at step {k}]")?;
        }
        Ok(())
    }
}

fn pencil(a: &DMatrix<f64>, e: &DMatrix<f64>, h: &DMatrix<f64>, z: Complex<f64>) -> DMatrix<Complex<f64>> {
    let (n, nd, m) = (a.nrows(), e.ncols(), h.nrows());
    let mut p = DMatrix::from_element(n + m, n + nd, Complex::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0) * z - a[(i, j)];
        }
        for j in 0..nd {
            p[(i, n + j)] = Complex::new(-e[(i, j)], 0.0);
        }
    }
    for i in 0..m {
        for j in 0..n {
            p[(n + i, j)] = Complex::new(h[(i, j)], 0.0);
        }
    }
    p
}

fn complex_rank(p: &DMatrix<Complex<f64>>, rtol: f64) -> usize {
    let sv = p.clone().singular_values();
    let floor = rtol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > floor).count()
}

/// Smallest singular value of `[[zI − A, −E], [H, 0]]`.
pub fn pencil_min_singular_value(a: &DMatrix<f64>, e: &DMatrix<f64>, h: &DMatrix<f64>, z: Complex<f64>) -> f64 {
    pencil(a, e, h, z).singular_values().min()
}

/// Checks `rank [[zI − A, −E], [H, 0]] = n + n_d` for every `|z| ≥ 1`.
///
/// The determinant of a generic square compression `W·P(z)` is a polynomial of
/// degree at most `n`; its coefficients are recovered from samples on the unit
/// circle and its roots are the candidate zeros. Each candidate is confirmed
/// against the rank of the uncompressed pencil.
pub fn check_convergence_condition(a: &DMatrix<f64>, e: &DMatrix<f64>, h: &DMatrix<f64>) -> ConvergenceVerdict {
    let (n, nd, m) = (a.nrows(), e.ncols(), h.nrows());
    let full = n + nd;
    let degenerate = ConvergenceVerdict {
        satisfied: false,
        violating_zeros: vec![],
        zeros: vec![],
        degenerate: true,
        frozen_step: None,
    };
    if m < nd {
        return degenerate;
    }
    // Generic points: a rank drop at all of them means the normal rank is deficient.
    let probes = [Complex::new(0.3719, 1.2113), Complex::new(-1.734, 0.287)];
    if probes.iter().all(|&z| complex_rank(&pencil(a, e, h, z), RANK_RTOL) < full) {
        return degenerate;
    }

    let w: DMatrix<f64> = if m == nd {
        DMatrix::identity(full, full)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        DMatrix::from_fn(full, n + m, |_, _| rng.random_range(-1.0..1.0))
    };
    let wc = w.map(|v| Complex::new(v, 0.0));

    // det(W P(z)) has degree ≤ n; sample at n + 1 roots of unity and invert the DFT.
    let samples = n + 1;
    let values: Vec<Complex<f64>> = (0..samples)
        .map(|j| {
            let z = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / samples as f64);
            (&wc * pencil(a, e, h, z)).determinant()
        })
        .collect();
    let coeffs: Vec<f64> = (0..samples)
        .map(|i| {
            let c: Complex<f64> = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * (i * j) as f64 / samples as f64)
                })
                .sum();
            c.re / samples as f64
        })
        .collect();
    let scale = coeffs.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
    if scale == 0.0 {
        return degenerate;
    }
    let mut degree = samples - 1;
    while degree > 0 && coeffs[degree].abs() <= 1e-10 * scale {
        degree -= 1;
    }

    let mut zeros = Vec::new();
    if degree > 0 {
        let lead = coeffs[degree];
        let mut companion = DMatrix::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -coeffs[i] / lead;
        }
        let roots: DVector<Complex<f64>> = companion.complex_eigenvalues();
        for z in roots.iter() {
            if complex_rank(&pencil(a, e, h, *z), 1e-6) < full {
                zeros.push(*z);
            }
        }
    }
    let violating_zeros: Vec<_> = zeros.iter().copied().filter(|z| z.norm() >= 1.0 - 1e-9).collect();
    ConvergenceVerdict {
        satisfied: violating_zeros.is_empty(),
        violating_zeros,
        zeros,
        degenerate: false,
        frozen_step: None,
    }
}

impl LtvModel {
    /// Convergence check on the matrices at step `k`; labelled as a frozen-time
    /// check when the model is time-varying.
    pub fn convergence_at(&self, k: usize) -> ConvergenceVerdict {
        let mut v = check_convergence_condition(self.a(k), self.e(k), self.h(k));
        if !self.is_time_invariant() {
            v.frozen_step = Some(k);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::reference;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    fn stacked(e: &DMatrix<f64>, f: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let (n, m) = (e.nrows(), f.nrows());
        let (nd, nf) = (e.ncols(), f.ncols());
        let mut ep = DMatrix::zeros(n, nd + nf);
        ep.view_mut((0, 0), (n, nd)).copy_from(e);
        let mut fp = DMatrix::zeros(m, nd + nf);
        fp.view_mut((0, nd), (m, nf)).copy_from(f);
        (ep, fp)
    }

    #[test]
    fn existence_fails_for_combined_unknown_inputs() {
        let model = reference::example_model();
        let v = existence_for_model(&model, 0);
        assert_eq!(v, ExistenceVerdict { satisfied: false, lhs_rank: 4, rhs_rank: 6 });
        assert_eq!(v.to_string(), "NOT satisfied (lhs 4, rhs 6)");
    }

    #[test]
    fn existence_holds_for_single_unknown_input_kinds() {
        let model = reference::example_model();
        let (ep, fp) = stacked(&DMatrix::zeros(2, 2), model.f(0));
        assert!(check_existence_condition(&ep, &fp, model.h(0)).satisfied);
        let (ep, fp) = stacked(model.e(0), &DMatrix::zeros(2, 2));
        let v = check_existence_condition(&ep, &fp, model.h(0));
        assert!(v.satisfied);
        assert_eq!((v.lhs_rank, v.rhs_rank), (2, 2));
    }

    #[test]
    fn existence_is_column_permutation_invariant() {
        let model = reference::example_model();
        let (ep, fp) = stacked(model.e(0), model.f(0));
        let perm = [3usize, 1, 0, 2];
        let ep2 = DMatrix::from_fn(2, 4, |i, j| ep[(i, perm[j])]);
        let fp2 = DMatrix::from_fn(2, 4, |i, j| fp[(i, perm[j])]);
        assert_eq!(
            check_existence_condition(&ep, &fp, model.h(0)),
            check_existence_condition(&ep2, &fp2, model.h(0))
        );
    }

    #[test]
    fn convergence_trivial_cases() {
        let v = check_convergence_condition(&DMatrix::zeros(2, 2), &eye(2), &eye(2));
        assert!(v.satisfied && !v.degenerate);
        let v = check_convergence_condition(&eye(2), &eye(2), &DMatrix::zeros(2, 2));
        assert!(!v.satisfied && v.degenerate);
    }

    #[test]
    fn convergence_finds_unstable_zero() {
        // Pencil [[z - 0.5, 0, -1], [0, z - 2, 0], [1, 0, 0]] has determinant z - 2.
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]);
        let e = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let v = check_convergence_condition(&a, &e, &h);
        assert!(!v.satisfied, "{v:?}");
        assert_eq!(v.violating_zeros.len(), 1);
        assert!((v.violating_zeros[0] - Complex::new(2.0, 0.0)).norm() < 1e-8);

        let stable = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.4]);
        let v = check_convergence_condition(&stable, &e, &h);
        assert!(v.satisfied);
        assert_eq!(v.zeros.len(), 1);
    }

    #[test]
    fn convergence_agrees_with_brute_force_grid() {
        let model = reference::example_model();
        let v = check_convergence_condition(model.a(0), model.e(0), model.h(0));
        assert!(v.satisfied);
        let mut min_sv = f64::INFINITY;
        for ri in 0..40 {
            let r = 1.0 + ri as f64 * 0.1;
            for ti in 0..72 {
                let z = Complex::from_polar(r, ti as f64 * std::f64::consts::PI / 36.0);
                min_sv = min_sv.min(pencil_min_singular_value(model.a(0), model.e(0), model.h(0), z));
            }
        }
        assert!(min_sv > 1e-3, "grid minimum singular value {min_sv}");
    }
}
