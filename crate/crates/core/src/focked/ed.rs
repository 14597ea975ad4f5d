//! A perturbed exact-diagonalization experiment: one Hamiltonian on one
//! truncated basis, evaluated at many `(λ, δ)`.

use num_complex::Complex64;
use serde::Serialize;

use super::basis::FockBasis;
use super::gibbs::{gibbs_state, grand_potential, observables, GibbsState};
use super::hamiltonian::build_hamiltonian;
use super::operator::{ladder, mode_number, OperatorMatrix};
use crate::error::{invalid, Result};
use crate::lattice::Mode;
use crate::selfconsistent::ModelParams;
use crate::variational::griffith_bracket;

#[derive(Clone, Debug)]
pub struct EdSystem {
    pub params: ModelParams,
    pub basis: FockBasis,
    pub hamiltonian: OperatorMatrix,
    /// Particle number multiplying `λ` in the field term.
    pub n_ref: f64,
    field: OperatorMatrix,
    condensate: OperatorMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdPoint {
    pub lambda: f64,
    pub delta: f64,
    pub grand_potential: f64,
    pub n_exp: f64,
    pub n0_exp: f64,
    pub re_a0: f64,
    pub im_a0: f64,
    pub abs_a0: f64,
    pub entropy: f64,
    /// Difference-quotient bracket of `∂Φ/∂λ`.
    pub griffith_lo: f64,
    pub griffith_hi: f64,
    /// `√n_ref tr[(a₀ + a₀*) G]`, the exact `∂Φ/∂λ`.
    pub field_exp: f64,
}

impl EdSystem {
    /// The basis must contain the zero mode.
    pub fn new(params: ModelParams, basis: FockBasis, n_ref: f64) -> Result<Self> {
        params.validate()?;
        if !(n_ref >= 0.0) || !n_ref.is_finite() {
            return Err(invalid(format!(
                "reference particle number must be nonnegative, got {n_ref}"
            )));
        }
        let hamiltonian = build_hamiltonian(&params, &basis)?;
        let a0 = ladder(&Mode::ZERO, &basis, false)?;
        let field = a0.add(&a0.adjoint())?.scale(n_ref.sqrt());
        let condensate = mode_number(&Mode::ZERO, &basis)?;
        Ok(EdSystem {
            params,
            basis,
            hamiltonian,
            n_ref,
            field,
            condensate,
        })
    }

    /// `H + δ a₀*a₀ + λ √n_ref (a₀ + a₀*)`.
    pub fn hamiltonian_at(&self, lambda: f64, delta: f64) -> Result<OperatorMatrix> {
        self.hamiltonian
            .add(&self.field.scale(lambda))?
            .add(&self.condensate.scale(delta))
    }

    pub fn grand_potential(&self, lambda: f64, delta: f64) -> Result<f64> {
        grand_potential(
            &self.hamiltonian_at(lambda, delta)?,
            self.params.beta,
            self.params.mu,
            &self.basis,
        )
    }

    pub fn gibbs(&self, lambda: f64, delta: f64) -> Result<GibbsState> {
        gibbs_state(
            &self.hamiltonian_at(lambda, delta)?,
            self.params.beta,
            self.params.mu,
            &self.basis,
        )
    }

    /// `tr[a₀*a₀ G]`, the exact `∂Φ/∂δ`.
    pub fn condensate_exp(&self, g: &GibbsState) -> Result<f64> {
        Ok(g.state.expectation(&self.condensate)?.re)
    }

    pub fn field_exp(&self, g: &GibbsState) -> Result<f64> {
        Ok(g.state.expectation(&self.field)?.re)
    }

    /// Observables of the Gibbs state at `(λ, δ)` and the λ-bracket with
    /// the given step.
    pub fn point(&self, lambda: f64, delta: f64, step: f64) -> Result<EdPoint> {
        let h = self.hamiltonian_at(lambda, delta)?;
        let (beta, mu) = (self.params.beta, self.params.mu);
        let g = gibbs_state(&h, beta, mu, &self.basis)?;
        let obs = observables(&g.state, &h, beta, mu, &self.basis)?;
        let mut failure = None;
        let (griffith_lo, griffith_hi) = griffith_bracket(
            |t| {
                self.grand_potential(t, delta).unwrap_or_else(|e| {
                    failure = Some(e);
                    f64::NAN
                })
            },
            lambda,
            step,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let a0: Complex64 = obs.a0_exp;
        Ok(EdPoint {
            lambda,
            delta,
            grand_potential: g.grand_potential,
            n_exp: obs.n_exp,
            n0_exp: obs.n0_exp,
            re_a0: a0.re,
            im_a0: a0.im,
            abs_a0: a0.norm(),
            entropy: obs.entropy,
            griffith_lo,
            griffith_hi,
            field_exp: self.field_exp(&g)?,
        })
    }
}
