//! Scalar coefficient functions of time, used for the time-dependent terms of
//! quadratic Hamiltonians and for drive envelopes.

/// A real-valued function of time in closed or tabulated form.
///
/// Tabulated data is interpolated linearly and must have strictly increasing
/// sample times; evaluation outside the table clamps to the end values.
#[derive(Debug, Clone, PartialEq)]
pub enum Coef {
    Zero,
    Const(f64),
    /// `amp * cos(freq * t + phase)`
    Cos { amp: f64, freq: f64, phase: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl Coef {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coef::Zero => 0.0,
            Coef::Const(v) => *v,
            Coef::Cos { amp, freq, phase } => amp * (freq * t + phase).cos(),
            Coef::Table { times, values } => interp_linear(times, values, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Zero => true,
            Coef::Const(v) => *v == 0.0,
            _ => false,
        }
    }

    /// Validate internal structure (finite values, increasing table times).
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Coef::Zero => Ok(()),
            Coef::Const(v) => {
                if v.is_finite() { Ok(()) } else { Err("non-finite constant coefficient".into()) }
            }
            Coef::Cos { amp, freq, phase } => {
                if amp.is_finite() && freq.is_finite() && phase.is_finite() {
                    Ok(())
                } else {
                    Err("non-finite sinusoid parameter".into())
                }
            }
            Coef::Table { times, values } => {
                if times.len() != values.len() {
                    return Err("table times/values length mismatch".into());
                }
                if times.len() < 2 {
                    return Err("table needs at least two samples".into());
                }
                if !times.windows(2).all(|w| w[1] > w[0]) {
                    return Err("table times must be strictly increasing".into());
                }
                if !times.iter().chain(values.iter()).all(|v| v.is_finite()) {
                    return Err("non-finite table entry".into());
                }
                Ok(())
            }
        }
    }
}

fn interp_linear(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vs[0];
    }
    if t >= ts[ts.len() - 1] {
        return vs[vs.len() - 1];
    }
    let i = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return vs[i],
        Err(i) => i,
    };
    let (t0, t1) = (ts[i - 1], ts[i]);
    let w = (t - t0) / (t1 - t0);
    vs[i - 1] * (1.0 - w) + vs[i] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolation() {
        let c = Coef::Table { times: vec![0.0, 1.0, 2.0], values: vec![0.0, 2.0, 0.0] };
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.5), 1.0);
        assert_eq!(c.eval(-1.0), 0.0);
        assert_eq!(c.eval(3.0), 0.0);
    }

    #[test]
    fn table_validation() {
        let bad = Coef::Table { times: vec![0.0, 0.0], values: vec![1.0, 2.0] };
        assert!(bad.validate().is_err());
    }
}
