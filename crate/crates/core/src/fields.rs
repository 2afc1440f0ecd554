//! Grid fields of the primitive state U = (ξ, v, θ), stored component-major.

use crate::error::{Error, Result};
use crate::tensor::{state_len, xi_len, ThermoState};

#[derive(Clone, Debug, PartialEq)]
pub struct Fields {
    d: usize,
    /// `comps[k][cell]`, k over the state_len(d) components of U.
    pub comps: Vec<Vec<f64>>,
}

impl Fields {
    pub fn zeros(d: usize, cells: usize) -> Self {
        Fields { d, comps: vec![vec![0.0; cells]; state_len(d)] }
    }

    pub fn from_states(d: usize, states: &[ThermoState]) -> Self {
        let mut f = Fields::zeros(d, states.len());
        for (c, s) in states.iter().enumerate() {
            f.set_state(c, s);
        }
        f
    }

    pub fn from_comps(d: usize, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != state_len(d) {
            return Err(Error::GridMismatch(format!(
                "{} components for d = {d} (expected {})",
                comps.len(),
                state_len(d)
            )));
        }
        let n = comps[0].len();
        if comps.iter().any(|c| c.len() != n) {
            return Err(Error::GridMismatch("ragged component arrays".into()));
        }
        Ok(Fields { d, comps })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, c: usize) -> ThermoState {
        let u: Vec<f64> = self.comps.iter().map(|k| k[c]).collect();
        ThermoState::unpack(self.d, &u)
    }

    pub fn states(&self) -> Vec<ThermoState> {
        (0..self.len()).map(|c| self.state(c)).collect()
    }

    pub fn set_state(&mut self, c: usize, s: &ThermoState) {
        for (k, x) in s.pack().into_iter().enumerate() {
            self.comps[k][c] = x;
        }
    }

    pub fn xi(&self, b: usize) -> &[f64] {
        &self.comps[b]
    }

    pub fn v(&self, i: usize) -> &[f64] {
        &self.comps[xi_len(self.d) + i]
    }

    pub fn theta(&self) -> &[f64] {
        &self.comps[state_len(self.d) - 1]
    }

    pub fn theta_min(&self) -> f64 {
        self.theta().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }
}
