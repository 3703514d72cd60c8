//! One-step methods: implicit midpoint (Newton with a finite-difference
//! Jacobian) and classical RK4.

use nalgebra::{DMatrix, DVector};

use super::{Dynamics, IntegratorConfig, Method};
use crate::{Error, Result};

/// Stateful stepper; keeps the previous increment to warm-start Newton.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: IntegratorConfig,
    prev: Option<(f64, Vec<f64>)>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: IntegratorConfig) -> Self {
        Self {
            cfg,
            prev: None,
            k: Default::default(),
            tmp: Vec::new(),
        }
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// Advance `x` by `dt` (which may be negative). `step` only labels errors.
    pub fn step<D: Dynamics + ?Sized>(
        &mut self,
        d: &D,
        x: &mut [f64],
        dt: f64,
        step: usize,
    ) -> Result<()> {
        match self.cfg.method {
            Method::Rk4 => self.rk4(d, x, dt),
            Method::ImplicitMidpoint => self.midpoint(d, x, dt, step)?,
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteState { step })
        }
    }

    fn rk4<D: Dynamics + ?Sized>(&mut self, d: &D, x: &mut [f64], dt: f64) {
        let n = x.len();
        for k in &mut self.k {
            k.resize(n, 0.0);
        }
        self.tmp.resize(n, 0.0);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        d.rhs(x, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        d.rhs(tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        d.rhs(tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        d.rhs(tmp, k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// Solves `y = x + (dt/2) f(y)` for the midpoint `y`; then `x ← 2y − x`.
    fn midpoint<D: Dynamics + ?Sized>(
        &mut self,
        d: &D,
        x: &mut [f64],
        dt: f64,
        step: usize,
    ) -> Result<()> {
        let n = x.len();
        let mut f = vec![0.0; n];
        let mut fp = vec![0.0; n];
        let mut y: Vec<f64> = match &self.prev {
            Some((pdt, inc)) if *pdt == dt && inc.len() == n => {
                x.iter().zip(inc).map(|(a, b)| a + 0.5 * b).collect()
            }
            _ => {
                d.rhs(x, &mut f);
                x.iter().zip(&f).map(|(a, b)| a + 0.5 * dt * b).collect()
            }
        };
        let half = 0.5 * dt;
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _ in 0..self.cfg.newton_max_iter {
            d.rhs(&y, &mut f);
            let g = DVector::from_fn(n, |i, _| -(y[i] - x[i] - half * f[i]));
            let mut jac = DMatrix::identity(n, n);
            for j in 0..n {
                let h = 1e-7 * y[j].abs().max(1.0);
                let keep = y[j];
                y[j] = keep + h;
                d.rhs(&y, &mut fp);
                y[j] = keep;
                for i in 0..n {
                    jac[(i, j)] -= half * (fp[i] - f[i]) / h;
                }
            }
            let delta = jac
                .lu()
                .solve(&g)
                .ok_or(Error::NewtonDiverged { step, residual })?;
            let scale = 1.0 + y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            residual = delta.amax();
            for (yi, di) in y.iter_mut().zip(delta.iter()) {
                *yi += di;
            }
            if !residual.is_finite() {
                break;
            }
            if residual <= self.cfg.newton_tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NewtonDiverged { step, residual });
        }
        let inc: Vec<f64> = y.iter().zip(x.iter()).map(|(a, b)| 2.0 * (a - b)).collect();
        for (xi, di) in x.iter_mut().zip(&inc) {
            *xi += di;
        }
        self.prev = Some((dt, inc));
        Ok(())
    }
}
