use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Worst relative disagreement between reverse-mode gradients and central
/// differences over every coordinate of `params`.
///
/// `build` records a scalar loss on a fresh tape given the registered
/// parameter handles. The relative error of a coordinate is
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check<F, E>(params: &[Tensor], step: f64, mut build: F) -> Result<f64, E>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var, E>,
    E: From<Error>,
{
    if !(step > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {step}")).into());
    }

    let first = eval(&mut build, params)?;
    let second = eval(&mut build, params)?;
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic { first, second }.into());
    }

    let analytic = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        let grads = tape.backward(loss).map_err(E::from)?;
        vars.iter()
            .zip(params)
            .map(|(v, p)| grads.get_or_zeros(*v, p.shape()))
            .collect::<Vec<_>>()
    };

    let mut worst: f64 = 0.0;
    let mut probe = params.to_vec();
    for (pi, grad) in analytic.iter().enumerate() {
        for k in 0..grad.numel() {
            let orig = probe[pi].data()[k];
            probe[pi].data_mut()[k] = orig + step;
            let plus = eval(&mut build, &probe)?;
            probe[pi].data_mut()[k] = orig - step;
            let minus = eval(&mut build, &probe)?;
            probe[pi].data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * step);
            let a = grad.data()[k];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

fn eval<F, E>(build: &mut F, ps: &[Tensor]) -> Result<f64, E>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var, E>,
    E: From<Error>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = ps.iter().map(|p| tape.param(p.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let v = tape.value(loss);
    if !v.is_scalar() {
        return Err(Error::NonScalarLoss(v.shape().to_vec()).into());
    }
    Ok(v.item())
}
