//! Deterministic gradient descent and the finite-difference gradient
//! checker shared by the trainable layers and the embedding losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Loss above which a run is declared divergent.
const DIVERGENCE_CAP: f64 = 1e12;

/// A differentiable scalar objective over a flat parameter vector.
pub trait Objective<T: Scalar> {
    fn eval(&self, params: &[T]) -> T;
    fn grad(&self, params: &[T]) -> Vec<T>;
    fn dim(&self) -> usize;
}

/// Objective built from a pair of closures.
pub struct FnObjective<T, E, G>
where
    E: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    pub eval: E,
    pub grad: G,
    pub dim: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T, E, G> FnObjective<T, E, G>
where
    E: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    pub fn new(dim: usize, eval: E, grad: G) -> Self {
        Self {
            eval,
            grad,
            dim,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T: Scalar, E, G> Objective<T> for FnObjective<T, E, G>
where
    E: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    fn eval(&self, params: &[T]) -> T {
        (self.eval)(params)
    }

    fn grad(&self, params: &[T]) -> Vec<T> {
        (self.grad)(params)
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

/// Hyperparameters for a training run. Read from JSON by the CLI.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    /// Step size; must be positive.
    pub lr: f64,
    /// Momentum coefficient in [0, 1).
    #[serde(default)]
    pub momentum: f64,
    /// Maximum number of iterations.
    pub max_iter: usize,
    /// Stop when |loss change| drops below this.
    #[serde(default)]
    pub tol: f64,
    /// Seed for any randomized initialization.
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(lr: f64, max_iter: usize) -> Self {
        Self {
            lr,
            momentum: 0.0,
            max_iter,
            tol: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err(Error::Divergence(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Divergence(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Fixed-step gradient descent with optional momentum.
///
/// The returned history holds the loss at the starting point and after every
/// accepted step, so its length is the number of iterations plus one. The
/// run stops at `max_iter` or as soon as the loss changes by less than
/// `tol`.
pub fn gradient_descent<T: Scalar>(
    objective: &dyn Objective<T>,
    init: &[T],
    config: &TrainConfig,
) -> Result<(Vec<T>, Vec<T>)> {
    config.validate()?;
    if init.len() != objective.dim() {
        return Err(Error::Dimension(format!(
            "init has {} parameters, objective expects {}",
            init.len(),
            objective.dim()
        )));
    }
    let lr = T::from_f64_lossy(config.lr);
    let momentum = T::from_f64_lossy(config.momentum);
    let tol = T::from_f64_lossy(config.tol);
    let cap = T::from_f64_lossy(DIVERGENCE_CAP);

    let mut params = init.to_vec();
    let mut velocity = vec![T::zero(); params.len()];
    let mut loss = objective.eval(&params);
    check_finite(loss, cap)?;
    let mut history = vec![loss];

    for _ in 0..config.max_iter {
        let grad = objective.grad(&params);
        for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = momentum * *v - lr * *g;
            *p += *v;
        }
        let next = objective.eval(&params);
        check_finite(next, cap)?;
        history.push(next);
        let delta = (next - loss).abs();
        loss = next;
        if delta < tol {
            break;
        }
    }
    Ok((params, history))
}

fn check_finite<T: Scalar>(loss: T, cap: T) -> Result<()> {
    if !loss.is_finite() || loss > cap {
        return Err(Error::Divergence(format!("loss reached {loss}")));
    }
    Ok(())
}

/// Central-difference check of `objective.grad` at `point`.
///
/// Per coordinate the analytic entry is compared against
/// `(f(x + h e_i) - f(x - h e_i)) / 2h`; entries whose finite difference is
/// below 1e-8 in magnitude are compared absolutely instead of relatively.
/// Returns the worst error over all coordinates.
pub fn finite_difference_check<T: Scalar>(
    objective: &dyn Objective<T>,
    point: &[T],
    step: T,
) -> T {
    let analytic = objective.grad(point);
    let two = T::from_f64_lossy(2.0);
    let small = T::from_f64_lossy(1e-8);
    let mut worst = T::zero();
    let mut x = point.to_vec();
    for i in 0..point.len() {
        let original = x[i];
        x[i] = original + step;
        let plus = objective.eval(&x);
        x[i] = original - step;
        let minus = objective.eval(&x);
        x[i] = original;
        let fd = (plus - minus) / (two * step);
        let err = if fd.abs() < small {
            (analytic[i] - fd).abs()
        } else {
            (analytic[i] - fd).abs() / fd.abs()
        };
        if err > worst {
            worst = err;
        }
    }
    worst
}

/// Default step for [`finite_difference_check`].
pub fn default_fd_step<T: Scalar>() -> T {
    T::from_f64_lossy(1e-5)
}
