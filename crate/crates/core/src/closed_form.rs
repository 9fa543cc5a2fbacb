//! The elliptic Schur-type function `E_{M,N}` and the closed form
//! `G_{M,N} = ∏_{j<k} [1+u_k-u_j]/[1] · E_{M,N}`.
//!
//! Every evaluation takes a [`BracketEval`] so individual bracket sites can be
//! counted or perturbed; the `&EllipticContext` implementation is exact.

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{BracketEval, EllipticContext};
use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::partition::{BoundarySpec, ModelParams};

/// Which of the two equivalent expressions of `E` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EForm {
    PermutationSum,
    #[default]
    Determinant,
}

/// Permutation sums beyond this many rows are refused.
pub const MAX_PERMUTATION_ROWS: usize = 6;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `∏_{k=1}^{N} ∏_{j=x^M_k}^{x^M_{k+1}-2} [a12+j+N] / [a12+j+N-k]`; inverted
/// ranges contribute 1.
pub fn prefactor_xm<B: BracketEval>(spec: &BoundarySpec, p: &ModelParams, br: &mut B) -> Result<Complex64> {
    let n = spec.n();
    let nf = n as f64;
    let mut acc = one();
    for k in 1..=n {
        let lo = spec.x_m(k);
        let hi = spec.x_m(k + 1);
        for j in lo..hi.saturating_sub(1) {
            let jf = j as f64;
            acc *= br.ratio(p.a12 + jf + nf, p.a12 + jf + nf - k as f64)?;
        }
    }
    Ok(acc)
}

/// Column entry of the determinant form:
///
/// ```text
/// f_x(u) = [-u+v_x+a12+x+N-2]/[a12+x+N-2] · ∏_{k<x} [1+u-v_k]/[1] · ∏_{k>x} [u-v_k]/[1]
/// ```
///
/// with `N = p.u.len()` and `M = p.v.len()`.
pub fn f_x<B: BracketEval>(x: usize, u: Complex64, p: &ModelParams, br: &mut B) -> Result<Complex64> {
    let m = p.v.len();
    if x == 0 || x > m {
        return Err(Error::Index(format!("column {x} outside 1..={m}")));
    }
    let shift = x as f64 + p.u.len() as f64 - 2.0;
    let mut acc = br.ratio(-u + p.v[x - 1] + p.a12 + shift, p.a12 + shift)?;
    for k in 1..x {
        acc *= br.ratio(one() + u - p.v[k - 1], one())?;
    }
    for k in x + 1..=m {
        acc *= br.ratio(u - p.v[k - 1], one())?;
    }
    Ok(acc)
}

fn check_distinct<B: BracketEval>(u: &[Complex64], br: &mut B) -> Result<()> {
    let floor = br.context().singularity_threshold();
    for j in 0..u.len() {
        for k in j + 1..u.len() {
            if !(br.context().bracket(u[j] - u[k]).norm() >= floor) {
                return Err(Error::CoincidentSpectral { j: j + 1, k: k + 1 });
            }
        }
    }
    Ok(())
}

/// `E_{M,N}` as the sum over `S_N`.
pub fn e_perm_sum<B: BracketEval>(spec: &BoundarySpec, p: &ModelParams, br: &mut B) -> Result<Complex64> {
    p.check_against(spec)?;
    let n = spec.n();
    if n > MAX_PERMUTATION_ROWS {
        return Err(Error::Precondition(format!(
            "permutation sum limited to N <= {MAX_PERMUTATION_ROWS}, got {n}"
        )));
    }
    check_distinct(&p.u, br)?;
    let pre = prefactor_xm(spec, p, br)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for sigma in (0..n).permutations(n) {
        let mut term = one();
        for j in 0..n {
            for k in j + 1..n {
                term *= br.ratio(one(), p.u[sigma[j]] - p.u[sigma[k]])?;
            }
        }
        for (j, &s) in sigma.iter().enumerate() {
            term *= f_x(spec.x()[j], p.u[s], p, br)?;
        }
        sum += term;
    }
    Ok(pre * sum)
}

/// `Σ_σ |summand| / |Σ_σ summand|` for the permutation sum: how much it
/// cancels. Infinite when the sum vanishes.
pub fn perm_sum_condition(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<f64> {
    p.check_against(spec)?;
    let n = spec.n();
    if n > MAX_PERMUTATION_ROWS {
        return Err(Error::Precondition(format!(
            "permutation sum limited to N <= {MAX_PERMUTATION_ROWS}, got {n}"
        )));
    }
    let mut br = ctx;
    check_distinct(&p.u, &mut br)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for sigma in (0..n).permutations(n) {
        let mut term = one();
        for j in 0..n {
            for k in j + 1..n {
                term *= br.ratio(one(), p.u[sigma[j]] - p.u[sigma[k]])?;
            }
        }
        for (j, &s) in sigma.iter().enumerate() {
            term *= f_x(spec.x()[j], p.u[s], p, &mut br)?;
        }
        sum += term;
        magnitude += term.norm();
    }
    Ok(magnitude / sum.norm())
}

/// `E_{M,N}` as `prefactor · ∏_{j<k} [1]/[u_j-u_k] · det(f_{x_j}(u_k))`.
pub fn e_determinant<B: BracketEval>(spec: &BoundarySpec, p: &ModelParams, br: &mut B) -> Result<Complex64> {
    p.check_against(spec)?;
    let n = spec.n();
    check_distinct(&p.u, br)?;
    let pre = prefactor_xm(spec, p, br)?;
    let mut vandermonde = one();
    for j in 0..n {
        for k in j + 1..n {
            vandermonde *= br.ratio(one(), p.u[j] - p.u[k])?;
        }
    }
    let mut matrix = Vec::with_capacity(n);
    for &x in spec.x() {
        let row = p.u.iter().map(|&u| f_x(x, u, p, br)).collect::<Result<Vec<_>>>()?;
        matrix.push(row);
    }
    Ok(pre * vandermonde * determinant(&matrix))
}

pub fn e_function<B: BracketEval>(spec: &BoundarySpec, p: &ModelParams, form: EForm, br: &mut B) -> Result<Complex64> {
    match form {
        EForm::PermutationSum => e_perm_sum(spec, p, br),
        EForm::Determinant => e_determinant(spec, p, br),
    }
}

/// `∏_{j<k} [1+u_k-u_j]/[1]`.
pub fn elliptic_vandermonde<B: BracketEval>(u: &[Complex64], br: &mut B) -> Result<Complex64> {
    let mut acc = one();
    for j in 0..u.len() {
        for k in j + 1..u.len() {
            acc *= br.ratio(one() + u[k] - u[j], one())?;
        }
    }
    Ok(acc)
}

pub fn g_closed_form_with<B: BracketEval>(
    spec: &BoundarySpec,
    p: &ModelParams,
    form: EForm,
    br: &mut B,
) -> Result<Complex64> {
    let front = elliptic_vandermonde(&p.u, br)?;
    Ok(front * e_function(spec, p, form, br)?)
}

/// `G_{M,N}` through the determinant form.
pub fn g_closed_form(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Complex64> {
    let mut br = ctx;
    g_closed_form_with(spec, p, EForm::Determinant, &mut br)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{relative_residual, DEFAULT_TRUNC_EPS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> EllipticContext {
        EllipticContext::new(0.3, Complex64::new(1.0, 0.0), DEFAULT_TRUNC_EPS).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ModelParams {
        let mut z = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3));
        let u = (0..n).map(|_| z()).collect();
        let v = (0..m).map(|_| z()).collect();
        ModelParams::new(u, v, z() + c(0.0, 0.4))
    }

    #[test]
    fn prefactor_cases() {
        let ctx = ctx();
        let mut br = &ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // tight boundary: every range is empty
        for (m, n) in [(3, 2), (5, 3), (4, 4)] {
            let x: Vec<usize> = (m - n + 1..=m).collect();
            let spec = BoundarySpec::new(m, n, x).unwrap();
            let p = params(&mut rng, m, n);
            assert_eq!(prefactor_xm(&spec, &p, &mut br).unwrap(), c(1.0, 0.0));
        }
        let spec = BoundarySpec::new(3, 2, vec![1, 3]).unwrap();
        let p = params(&mut rng, 3, 2);
        let expected = ctx.bracket(p.a12 + 3.0) / ctx.bracket(p.a12 + 2.0);
        assert!(relative_residual(prefactor_xm(&spec, &p, &mut br).unwrap(), expected) < 1e-14);

        // (2,1,[1]): k = 1 runs j = 1..=1 against x^M_2 = 3
        let spec = BoundarySpec::new(2, 1, vec![1]).unwrap();
        let p = params(&mut rng, 2, 1);
        let expected = ctx.bracket(p.a12 + 2.0) / ctx.bracket(p.a12 + 1.0);
        assert!(relative_residual(prefactor_xm(&spec, &p, &mut br).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn f_x_cases() {
        let ctx = ctx();
        let mut br = &ctx;
        let p = ModelParams::new(vec![c(0.2, 0.1)], vec![c(-0.3, 0.0)], c(0.4, 0.3));
        let f = f_x(1, p.u[0], &p, &mut br).unwrap();
        let expected = ctx.bracket(-p.u[0] + p.v[0] + p.a12) / ctx.bracket(p.a12);
        assert!(relative_residual(f, expected) < 1e-14);

        let p = ModelParams::new(vec![c(0.2, 0.1)], vec![c(-0.3, 0.0), c(0.5, 0.2), c(0.1, -0.1)], c(0.4, 0.3));
        assert_eq!(f_x(1, p.v[2], &p, &mut br).unwrap(), c(0.0, 0.0));
        assert_eq!(f_x(2, p.v[2], &p, &mut br).unwrap(), c(0.0, 0.0));
        assert!(matches!(f_x(4, p.u[0], &p, &mut br), Err(Error::Index(_))));
    }

    #[test]
    fn single_row_forms() {
        let ctx = ctx();
        let mut br = &ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=5 {
            for x in 1..=m {
                let spec = BoundarySpec::new(m, 1, vec![x]).unwrap();
                let p = params(&mut rng, m, 1);
                let pre = prefactor_xm(&spec, &p, &mut br).unwrap();
                let f = f_x(x, p.u[0], &p, &mut br).unwrap();
                let perm = e_perm_sum(&spec, &p, &mut br).unwrap();
                let det = e_determinant(&spec, &p, &mut br).unwrap();
                assert!(relative_residual(perm, pre * f) < 1e-14);
                assert!(relative_residual(det, pre * f) < 1e-14);
            }
        }
    }

    #[test]
    fn two_by_two_determinant_matches_cofactors() {
        let ctx = ctx();
        let mut br = &ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = BoundarySpec::new(4, 2, vec![2, 4]).unwrap();
        let p = params(&mut rng, 4, 2);
        let mut f = |x, u| f_x(x, u, &p, &mut br).unwrap();
        let cof = f(2, p.u[0]) * f(4, p.u[1]) - f(2, p.u[1]) * f(4, p.u[0]);
        let pre = prefactor_xm(&spec, &p, &mut br).unwrap();
        let vd = ctx.bracket(c(1.0, 0.0)) / ctx.bracket(p.u[0] - p.u[1]);
        let det = e_determinant(&spec, &p, &mut br).unwrap();
        assert!(relative_residual(det, pre * vd * cof) < 1e-13);
    }

    #[test]
    fn forms_agree_and_are_symmetric() {
        let ctx = ctx();
        let mut br = &ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in 1..=6 {
            for spec in BoundarySpec::all_with_columns(m, 4) {
                let p = params(&mut rng, m, spec.n());
                let perm = e_perm_sum(&spec, &p, &mut br).unwrap();
                let det = e_determinant(&spec, &p, &mut br).unwrap();
                assert!(relative_residual(perm, det) <= 1e-9, "{spec}");
                if spec.n() >= 2 {
                    let swapped = e_perm_sum(&spec, &p.swapped(0), &mut br).unwrap();
                    assert!(relative_residual(perm, swapped) <= 1e-10, "{spec}");
                }
            }
        }
    }

    #[test]
    fn coincident_spectral_parameters_rejected() {
        let ctx = ctx();
        let mut br = &ctx;
        let spec = BoundarySpec::new(3, 2, vec![1, 3]).unwrap();
        let u = c(0.3, 0.1);
        let p = ModelParams::new(vec![u, u], vec![c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)], c(0.4, 0.3));
        assert!(matches!(e_determinant(&spec, &p, &mut br), Err(Error::CoincidentSpectral { j: 1, k: 2 })));
        assert!(matches!(e_perm_sum(&spec, &p, &mut br), Err(Error::CoincidentSpectral { .. })));
    }
}
