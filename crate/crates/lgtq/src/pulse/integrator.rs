//! Adaptive Dormand–Prince 5(4) integration for time-dependent Schrödinger
//! dynamics, including non-Hermitian decay terms.
//!
//! The same stepper advances state vectors and whole propagators (the matrix
//! ODE i·dU/dt = H(t)U), so every effective gate in this crate comes from one
//! integration code path with one accuracy policy.

use crate::linalg::{C64, CMat, CVec};
use crate::tol;
use crate::{Error, Result};
use ndarray::{Array, Dimension};

// Dormand–Prince 5(4) Butcher tableau (the classic RK45 pair with FSAL).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (row seven of `A` equals these: FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded fourth-order weights used for the error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

/// Advance `y0` from `t0` to `t1` under `dy/dt = rhs(t, y)` with adaptive
/// step control. `rhs` writes the derivative into its third argument.
pub fn dp54<D, F>(
    mut rhs: F,
    y0: Array<C64, D>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<Array<C64, D>>
where
    D: Dimension,
    F: FnMut(f64, &Array<C64, D>, &mut Array<C64, D>),
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    if span < 0.0 {
        return Err(Error::Integrator("integration span must be forward".into()));
    }
    let mut y = y0;
    let mut t = t0;
    let mut k: Vec<Array<C64, D>> = (0..7).map(|_| Array::zeros(y.raw_dim())).collect();
    let mut stage = Array::zeros(y.raw_dim());

    rhs(t, &y, &mut k[0]);
    let f0_norm = k[0].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let y_norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut h = if f0_norm > 0.0 {
        (0.01 * (y_norm + atol) / f0_norm).min(span)
    } else {
        span
    };
    let h_min = span * 1e-13;
    let mut first_same_as_last = true; // k[0] already holds rhs(t, y)

    for _ in 0..MAX_STEPS {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t);
        if !first_same_as_last {
            rhs(t, &y, &mut k[0]);
            first_same_as_last = true;
        }
        for s in 1..7 {
            stage.assign(&y);
            for j in 0..s {
                let a = A[s - 1][j];
                if a != 0.0 {
                    stage.scaled_add(C64::new(h * a, 0.0), &k[j]);
                }
            }
            rhs(t + C[s] * h, &stage, &mut k[s]);
        }
        // Fifth-order solution (stage already holds it: row 7 of A == B5).
        let y5 = stage.clone();
        // Weighted error against the embedded fourth-order solution.
        let mut ediff: Array<C64, D> = Array::zeros(y.raw_dim());
        for (j, kj) in k.iter().enumerate() {
            let w = B5[j] - B4[j];
            if w != 0.0 {
                ediff.scaled_add(C64::new(h * w, 0.0), kj);
            }
        }
        let mut err_sq = 0.0;
        for ((&yi, &y5i), &di) in y.iter().zip(y5.iter()).zip(ediff.iter()) {
            let scale = atol + rtol * yi.norm().max(y5i.norm());
            err_sq += (di.norm() / scale).powi(2);
        }
        let err = (err_sq / y.len().max(1) as f64).sqrt();
        if err <= 1.0 {
            t += h;
            y = y5;
            // FSAL: the last stage derivative is the first of the next step.
            let (head, rest) = k.split_at_mut(1);
            head[0].assign(&rest[5]);
            let scale = if err > 0.0 {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
            } else {
                MAX_SCALE
            };
            h *= scale;
        } else {
            let scale = (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, 1.0);
            h *= scale;
            first_same_as_last = true; // k[0] still valid at unchanged (t, y)
            if h < h_min {
                return Err(Error::Integrator(format!(
                    "step size underflow at t = {t:.6e} (requested accuracy unreachable)"
                )));
            }
        }
    }
    Err(Error::Integrator(format!(
        "step budget exhausted before reaching t = {t1:.6e}"
    )))
}

/// Solve i·dψ/dt = (H(t) − (i/2)Σ_k γ_k |k⟩⟨k|) ψ.
///
/// `hamiltonian` writes the instantaneous Hermitian part into its output
/// argument; `decay` lists per-level population decay rates γ_k. The norm of
/// the returned state is non-increasing when all rates are non-negative.
pub fn integrate_lossy_tdse<F>(
    mut hamiltonian: F,
    decay: &[f64],
    psi0: &CVec,
    t0: f64,
    t1: f64,
) -> Result<CVec>
where
    F: FnMut(f64, &mut CMat),
{
    let dim = psi0.len();
    if decay.len() != dim {
        return Err(Error::Integrator(format!(
            "decay rate list has length {} but the state has dimension {dim}",
            decay.len()
        )));
    }
    let mut h_buf = CMat::zeros((dim, dim));
    let minus_i = C64::new(0.0, -1.0);
    let rhs = move |t: f64, y: &CVec, dy: &mut CVec| {
        hamiltonian(t, &mut h_buf);
        let hy = h_buf.dot(y);
        for i in 0..dim {
            dy[i] = minus_i * hy[i] - C64::new(0.5 * decay[i], 0.0) * y[i];
        }
    };
    dp54(rhs, psi0.clone(), t0, t1, tol::TDSE_RTOL, tol::TDSE_ATOL)
}

/// Propagator U(t1 ← t0) of the same lossy dynamics, by integrating the
/// matrix ODE from the identity.
pub fn evolve_propagator<F>(
    mut hamiltonian: F,
    decay: &[f64],
    dim: usize,
    t0: f64,
    t1: f64,
) -> Result<CMat>
where
    F: FnMut(f64, &mut CMat),
{
    if decay.len() != dim {
        return Err(Error::Integrator(format!(
            "decay rate list has length {} but the propagator has dimension {dim}",
            decay.len()
        )));
    }
    let mut h_buf = CMat::zeros((dim, dim));
    let minus_i = C64::new(0.0, -1.0);
    let gammas: Vec<C64> = decay.iter().map(|&g| C64::new(0.5 * g, 0.0)).collect();
    let rhs = move |t: f64, u: &CMat, du: &mut CMat| {
        hamiltonian(t, &mut h_buf);
        let hu = h_buf.dot(u);
        for r in 0..dim {
            for c in 0..dim {
                du[[r, c]] = minus_i * hu[[r, c]] - gammas[r] * u[[r, c]];
            }
        }
    };
    dp54(rhs, CMat::eye(dim), t0, t1, tol::TDSE_RTOL, tol::TDSE_ATOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, expi_hermitian, max_abs_diff, unitarity_error};
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::zeros((dim, dim));
        for r in 0..dim {
            for c in 0..dim {
                m[[r, c]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let md = dagger(&m);
        (&m + &md).mapv(|z| z * 0.5)
    }

    #[test]
    fn zero_hamiltonian_is_inert() {
        let psi0: CVec = array![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let out = integrate_lossy_tdse(|_, h| h.fill(C64::new(0.0, 0.0)), &[0.0, 0.0], &psi0, 0.0, 3.0)
            .unwrap();
        assert!(max_abs_diff(
            &out.clone().insert_axis(ndarray::Axis(1)),
            &psi0.clone().insert_axis(ndarray::Axis(1))
        ) < 1e-12);
    }

    #[test]
    fn constant_hamiltonian_matches_matrix_exponential() {
        let h = random_hermitian(5, 7);
        let t = 1.7;
        let psi0 = {
            let mut v = CVec::zeros(5);
            v[0] = C64::new(1.0, 0.0);
            v[2] = C64::new(0.0, 1.0);
            v.mapv(|z| z / 2f64.sqrt())
        };
        let exact = expi_hermitian(&h, t).unwrap().dot(&psi0);
        let sim = integrate_lossy_tdse(|_, out| out.assign(&h), &[0.0; 5], &psi0, 0.0, t).unwrap();
        let diff: f64 = exact
            .iter()
            .zip(sim.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "integrator deviates from expm oracle by {diff:.3e}");
    }

    #[test]
    fn pure_decay_has_exponential_norm() {
        let gamma = 0.37;
        let t = 2.5;
        let psi0: CVec = array![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let out = integrate_lossy_tdse(
            |_, h| h.fill(C64::new(0.0, 0.0)),
            &[0.0, gamma],
            &psi0,
            0.0,
            t,
        )
        .unwrap();
        let norm_sq: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm_sq - (-gamma * t).exp()).abs() < 1e-9);
    }

    #[test]
    fn commuting_drive_matches_closed_form() {
        // H(t) = cos(t)·σx integrates to exp(-i·sin(T)·σx).
        let t_end = 2.0;
        let sx = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let u = evolve_propagator(
            |t: f64, h: &mut CMat| {
                h.assign(&sx);
                h.mapv_inplace(|z| z * t.cos());
            },
            &[0.0, 0.0],
            2,
            0.0,
            t_end,
        )
        .unwrap();
        let exact = expi_hermitian(&sx, t_end.sin()).unwrap();
        assert!(max_abs_diff(&u, &exact) < 1e-8);
    }

    #[test]
    fn lossless_propagator_is_unitary() {
        let h = random_hermitian(4, 21);
        let u = evolve_propagator(|_, out: &mut CMat| out.assign(&h), &[0.0; 4], 4, 0.0, 2.0).unwrap();
        assert!(unitarity_error(&u) < 1e-8);
    }

    #[test]
    fn fast_phase_accumulation_stays_accurate() {
        // A single level rotating at frequency 2000 over unit time. Local
        // truncation error accumulates over the ~50k steps this costs at the
        // default tolerances, so the bound allows a few orders of magnitude
        // above the per-step relative tolerance (observed: ~4e-7).
        let omega = 2000.0;
        let psi0: CVec = array![C64::new(1.0, 0.0)];
        let out = integrate_lossy_tdse(
            |_, h: &mut CMat| {
                h[[0, 0]] = C64::new(omega, 0.0);
            },
            &[0.0],
            &psi0,
            0.0,
            1.0,
        )
        .unwrap();
        let exact = C64::from_polar(1.0, -omega);
        assert!((out[0] - exact).norm() < 1e-5);
    }

    #[test]
    fn reversed_span_is_rejected() {
        let psi0: CVec = array![C64::new(1.0, 0.0)];
        let res = integrate_lossy_tdse(|_, h: &mut CMat| h.fill(C64::new(0.0, 0.0)), &[0.0], &psi0, 1.0, 0.0);
        assert!(res.is_err());
    }
}
