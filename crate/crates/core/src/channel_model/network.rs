use crate::error::{invalid, Result};

/// Single-hop network of `s` transmitters and `d` receivers. Receiver `j` at slot `i`
/// counts `Poisson(lambda0 + sum_l sum_u x_{l,i-u} p_{l,j,u})`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    /// `impulses[l][j]` holds the taps `p_{l,j,0..=k}` from transmitter `l` to receiver `j`.
    pub impulses: Vec<Vec<Vec<f64>>>,
    pub lambda0: f64,
    /// Per-transmitter `(amax, alpha)`.
    pub constraints: Vec<(f64, f64)>,
}

impl NetworkSpec {
    pub fn new(
        impulses: Vec<Vec<Vec<f64>>>,
        lambda0: f64,
        constraints: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let s = impulses.len();
        if s == 0 {
            return invalid("network needs at least one transmitter");
        }
        let d = impulses[0].len();
        if d == 0 {
            return invalid("network needs at least one receiver");
        }
        if impulses.iter().any(|row| row.len() != d) {
            return invalid("every transmitter needs an impulse response to every receiver");
        }
        if constraints.len() != s {
            return invalid(format!(
                "expected {s} per-transmitter constraints, got {}",
                constraints.len()
            ));
        }
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return invalid(format!("lambda0 must be finite and nonnegative, got {lambda0}"));
        }
        for (l, row) in impulses.iter().enumerate() {
            for (j, taps) in row.iter().enumerate() {
                if taps.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return invalid(format!("taps ({l},{j}) must be finite and nonnegative"));
                }
                let sum: f64 = taps.iter().sum();
                if sum > 1.0 + 1e-12 {
                    return invalid(format!("taps ({l},{j}) sum to {sum} > 1"));
                }
            }
        }
        for &(amax, alpha) in &constraints {
            if !(amax.is_finite() && amax > 0.0 && alpha >= 0.0 && alpha <= amax) {
                return invalid(format!("bad transmitter constraint (amax={amax}, alpha={alpha})"));
            }
        }
        Ok(Self {
            impulses,
            lambda0,
            constraints,
        })
    }

    pub fn transmitters(&self) -> usize {
        self.impulses.len()
    }

    pub fn receivers(&self) -> usize {
        self.impulses[0].len()
    }

    /// Receiver intensities per slot for the given per-transmitter input sequences.
    pub fn intensities(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if inputs.len() != self.transmitters() {
            return invalid(format!(
                "expected {} input sequences, got {}",
                self.transmitters(),
                inputs.len()
            ));
        }
        let n = inputs.first().map_or(0, Vec::len);
        if inputs.iter().any(|x| x.len() != n) {
            return invalid("input sequences have different lengths");
        }
        Ok((0..self.receivers())
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut s = self.lambda0;
                        for (l, x) in inputs.iter().enumerate() {
                            for (u, p) in self.impulses[l][j].iter().enumerate().take(i + 1) {
                                s += p * x[i - u];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect())
    }
}
