//! Forward noising, velocity targets, x-to-v conversion, and Euler sampling
//! for the rectified-flow interpolation z_t = t*z0 + (1-t)*eps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{Scalar, Tensor};

/// Default clamp keeping evaluations away from the t = 1 singularity.
pub const T_MAX_CLAMP: f64 = 1.0 - 1e-3;

/// Linear interpolation schedule: alpha(t) = t, sigma(t) = 1 - t.
/// t = 0 is pure noise, t = 1 is clean data.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSchedule {
    pub t_max_clamp: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        NoiseSchedule { t_max_clamp: T_MAX_CLAMP }
    }
}

impl NoiseSchedule {
    pub fn new(t_max_clamp: f64) -> Result<Self> {
        if !(0.0 < t_max_clamp && t_max_clamp < 1.0) {
            return Err(Error::Config(format!(
                "t_max_clamp must be in (0, 1), got {t_max_clamp}"
            )));
        }
        Ok(NoiseSchedule { t_max_clamp })
    }

    pub fn alpha(&self, t: f64) -> f64 {
        t
    }

    pub fn sigma(&self, t: f64) -> f64 {
        1.0 - t
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_max_clamp).contains(&t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.t_max_clamp
            )));
        }
        Ok(())
    }
}

/// One realization of the forward process.
#[derive(Debug, Clone)]
pub struct NoisySample<T: Scalar> {
    pub z0: Tensor<T>,
    pub eps: Tensor<T>,
    pub t: f64,
    pub z_t: Tensor<T>,
}

/// Class conditioning; `Unconditional` maps to a dedicated embedding row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionInfo {
    Class(usize),
    Unconditional,
}

/// Timestep sampling policy. The uniform default covers [0, t_max_clamp].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimestepPolicy {
    Uniform,
    /// sigmoid of a standard normal, clamped into range.
    LogitNormal,
}

/// z_t = alpha(t) z0 + sigma(t) eps.
pub fn noisify<T: Scalar>(
    z0: &Tensor<T>,
    eps: &Tensor<T>,
    t: f64,
    sched: &NoiseSchedule,
) -> Result<NoisySample<T>> {
    if z0.shape() != eps.shape() {
        return Err(Error::Shape(format!(
            "noisify shapes disagree: {:?} vs {:?}",
            z0.shape(),
            eps.shape()
        )));
    }
    sched.check_t(t)?;
    let a = T::from_f64(sched.alpha(t));
    let s = T::from_f64(sched.sigma(t));
    let data: Vec<T> = z0
        .data()
        .iter()
        .zip(eps.data())
        .map(|(&z, &e)| a * z + s * e)
        .collect();
    let z_t = Tensor::from_vec(z0.shape().to_vec(), data);
    Ok(NoisySample { z0: z0.clone(), eps: eps.clone(), t, z_t })
}

/// v = (z0 - z_t) / (1 - t); equals z0 - eps under the linear schedule.
pub fn v_target<T: Scalar>(
    z0: &Tensor<T>,
    z_t: &Tensor<T>,
    t: f64,
    sched: &NoiseSchedule,
) -> Result<Tensor<T>> {
    if t >= sched.t_max_clamp {
        return Err(Error::Singularity(format!(
            "v_target at t = {t} >= t_max_clamp = {}",
            sched.t_max_clamp
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("t = {t} < 0")));
    }
    let inv = T::from_f64(1.0 / (1.0 - t));
    let data: Vec<T> = z0
        .data()
        .iter()
        .zip(z_t.data())
        .map(|(&z, &zt)| (z - zt) * inv)
        .collect();
    Ok(Tensor::from_vec(z0.shape().to_vec(), data))
}

/// vhat = (z0hat - z_t) / (1 - t); linear in z0hat with slope 1/(1-t).
pub fn x_to_v<T: Scalar>(
    z0_hat: &Tensor<T>,
    z_t: &Tensor<T>,
    t: f64,
    sched: &NoiseSchedule,
) -> Result<Tensor<T>> {
    v_target(z0_hat, z_t, t, sched)
}

/// Draw a training timestep in [0, t_max_clamp].
pub fn sample_t(rng: &mut ChaCha8Rng, policy: TimestepPolicy, sched: &NoiseSchedule) -> f64 {
    match policy {
        TimestepPolicy::Uniform => rng.gen::<f64>() * sched.t_max_clamp,
        TimestepPolicy::LogitNormal => {
            let z = rng::normal(rng);
            let t = 1.0 / (1.0 + (-z).exp());
            // keep strictly below the clamp so v_target stays defined
            t.min(sched.t_max_clamp - 1e-9).max(0.0)
        }
    }
}

/// Integrate dz/dt = vhat from t = 0 (noise) to t_max_clamp with fixed-step
/// Euler. `predict_z0(z, t)` is the denoiser; the final state is treated as
/// clean.
pub fn euler_sample_with<T, F>(
    predict_z0: F,
    init_noise: Tensor<T>,
    steps: usize,
    sched: &NoiseSchedule,
) -> Result<Tensor<T>>
where
    T: Scalar,
    F: FnMut(&Tensor<T>, f64) -> Result<Tensor<T>>,
{
    if steps == 0 {
        return Err(Error::Config("euler_sample needs steps >= 1".into()));
    }
    let mut predict_z0 = predict_z0;
    let dt = sched.t_max_clamp / steps as f64;
    let mut z = init_noise;
    for s in 0..steps {
        let t = s as f64 * dt;
        let z0_hat = predict_z0(&z, t)?;
        let v_hat = x_to_v(&z0_hat, &z, t, sched)?;
        let step = T::from_f64(dt);
        let data: Vec<T> = z
            .data()
            .iter()
            .zip(v_hat.data())
            .map(|(&zv, &vv)| zv + step * vv)
            .collect();
        z = Tensor::from_vec(z.shape().to_vec(), data);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_tensor, stream};

    #[test]
    fn noisify_at_zero_is_pure_noise() {
        let mut r = stream(0, "diff-test", &[0]);
        let z0 = normal_tensor::<f32>(&mut r, vec![4, 3]);
        let eps = normal_tensor::<f32>(&mut r, vec![4, 3]);
        let s = NoiseSchedule::default();
        let ns = noisify(&z0, &eps, 0.0, &s).unwrap();
        assert_eq!(ns.z_t.data(), eps.data());
    }

    #[test]
    fn noisify_zero_noise_scales_data() {
        let mut r = stream(0, "diff-test", &[1]);
        let z0 = normal_tensor::<f32>(&mut r, vec![4, 3]);
        let eps = Tensor::zeros(vec![4, 3]);
        let s = NoiseSchedule::default();
        let t = 0.3;
        let ns = noisify(&z0, &eps, t, &s).unwrap();
        for (a, b) in ns.z_t.data().iter().zip(z0.data()) {
            assert!((a - b * t as f32).abs() < 1e-7);
        }
    }

    #[test]
    fn noisify_midpoint_is_elementwise_average() {
        let mut r = stream(0, "diff-test", &[2]);
        let z0 = normal_tensor::<f64>(&mut r, vec![2, 5]);
        let eps = normal_tensor::<f64>(&mut r, vec![2, 5]);
        let s = NoiseSchedule::default();
        let ns = noisify(&z0, &eps, 0.5, &s).unwrap();
        for i in 0..10 {
            let direct = 0.5 * z0.data()[i] + 0.5 * eps.data()[i];
            assert!((ns.z_t.data()[i] - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn noisify_rejects_out_of_range_t() {
        let z = Tensor::<f32>::zeros(vec![1, 1]);
        let s = NoiseSchedule::default();
        assert!(matches!(noisify(&z, &z, 1.0, &s), Err(Error::Domain(_))));
        assert!(matches!(noisify(&z, &z, -0.1, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn v_target_trivial_cases() {
        let mut r = stream(0, "diff-test", &[3]);
        let z0 = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let s = NoiseSchedule::default();
        // z_t == z0 -> v = 0
        let v = v_target(&z0, &z0, 0.4, &s).unwrap();
        assert!(v.data().iter().all(|&x| x == 0.0));
        // t = 0, z_t = eps -> v = z0 - eps
        let eps = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let v = v_target(&z0, &eps, 0.0, &s).unwrap();
        for i in 0..9 {
            assert!((v.data()[i] - (z0.data()[i] - eps.data()[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn v_target_rejects_singularity() {
        let z = Tensor::<f32>::zeros(vec![1, 1]);
        let s = NoiseSchedule::default();
        assert!(matches!(
            v_target(&z, &z, s.t_max_clamp, &s),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn v_equals_z0_minus_eps_at_midpoint() {
        let mut r = stream(0, "diff-test", &[4]);
        let z0 = normal_tensor::<f32>(&mut r, vec![4, 4]);
        let eps = normal_tensor::<f32>(&mut r, vec![4, 4]);
        let s = NoiseSchedule::default();
        let ns = noisify(&z0, &eps, 0.5, &s).unwrap();
        let v = v_target(&ns.z0, &ns.z_t, 0.5, &s).unwrap();
        for i in 0..16 {
            let expect = z0.data()[i] - eps.data()[i];
            assert!((v.data()[i] - expect).abs() < 1e-6);
        }
    }

    /// The identity v == z0 - eps holds over the timestep grid. In f32 the
    /// stored z_t carries ~ulp(|z_t|) rounding which 1/(1-t) amplifies, so
    /// the endpoint t = 0.999 is bounded by that amplification rather than
    /// the 1e-5 used elsewhere on the grid.
    #[test]
    fn forward_process_identity_over_grid_f32() {
        let mut r = stream(9, "diff-grid", &[]);
        let z0 = normal_tensor::<f32>(&mut r, vec![8, 6]);
        let eps = normal_tensor::<f32>(&mut r, vec![8, 6]);
        let s = NoiseSchedule::default();
        let mut grid: Vec<f64> = (0..10).map(|k| k as f64 * 0.1).collect();
        grid.push(s.t_max_clamp);
        for &t in &grid {
            if t >= s.t_max_clamp {
                continue; // v_target domain is [0, t_max_clamp)
            }
            let ns = noisify(&z0, &eps, t, &s).unwrap();
            let v = v_target(&ns.z0, &ns.z_t, t, &s).unwrap();
            let max_abs_zt = ns.z_t.data().iter().fold(0.0f32, |m, &x| m.max(x.abs()));
            let fp_floor = 8.0 * f32::EPSILON as f64 * max_abs_zt as f64 / (1.0 - t);
            let tol = 1e-5f64.max(fp_floor);
            for i in 0..48 {
                let expect = z0.data()[i] - eps.data()[i];
                let got = v.data()[i];
                assert!(
                    ((got - expect) as f64).abs() <= tol,
                    "t={t} i={i} err={} tol={tol}",
                    (got - expect).abs()
                );
            }
        }
    }

    #[test]
    fn x_to_v_gradient_slope_is_inverse_one_minus_t() {
        // d vhat / d z0hat = 1/(1-t) per entry; at t = 0.75 that is 4.0
        let s = NoiseSchedule::default();
        let z_t = Tensor::<f64>::zeros(vec![2, 2]);
        let a = Tensor::<f64>::zeros(vec![2, 2]);
        let b = Tensor::<f64>::ones(vec![2, 2]);
        let va = x_to_v(&a, &z_t, 0.75, &s).unwrap();
        let vb = x_to_v(&b, &z_t, 0.75, &s).unwrap();
        for i in 0..4 {
            assert!((vb.data()[i] - va.data()[i] - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn x_to_v_is_linear_in_prediction() {
        let mut r = stream(0, "diff-test", &[5]);
        let s = NoiseSchedule::default();
        let z_t = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let pa = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let pb = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let (a, b) = (1.7, -0.6);
        let t = 0.4;
        let combo = Tensor::from_vec(
            vec![3, 3],
            pa.data().iter().zip(pb.data()).map(|(&x, &y)| a * x + b * y).collect(),
        );
        let lhs = x_to_v(&combo, &z_t, t, &s).unwrap();
        let va = x_to_v(&pa, &z_t, t, &s).unwrap();
        let vb = x_to_v(&pb, &z_t, t, &s).unwrap();
        for i in 0..9 {
            let rhs = a * va.data()[i]
                + b * vb.data()[i]
                + (a + b - 1.0) * (-z_t.data()[i]) / (1.0 - t);
            assert!((lhs.data()[i] - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_t_uniform_statistics_and_clamp() {
        let s = NoiseSchedule::default();
        let mut r = stream(3, "t-samples", &[]);
        let draws: Vec<f64> =
            (0..10_000).map(|_| sample_t(&mut r, TimestepPolicy::Uniform, &s)).collect();
        assert!(draws.iter().all(|&t| (0.0..=s.t_max_clamp).contains(&t)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - s.t_max_clamp / 2.0).abs() < 0.02, "mean {mean}");
        // determinism
        let mut r2 = stream(3, "t-samples", &[]);
        let again: Vec<f64> =
            (0..10_000).map(|_| sample_t(&mut r2, TimestepPolicy::Uniform, &s)).collect();
        assert_eq!(draws, again);
    }

    #[test]
    fn logit_normal_draws_stay_in_domain() {
        let s = NoiseSchedule::default();
        let mut r = stream(4, "t-ln", &[]);
        for _ in 0..5000 {
            let t = sample_t(&mut r, TimestepPolicy::LogitNormal, &s);
            assert!(t >= 0.0 && t < s.t_max_clamp);
        }
    }

    #[test]
    fn euler_identity_model_returns_noise() {
        // z0hat = z_t means zero velocity everywhere
        let mut r = stream(5, "euler", &[]);
        let noise = normal_tensor::<f32>(&mut r, vec![4, 4]);
        let s = NoiseSchedule::default();
        let out =
            euler_sample_with(|z, _t| Ok(z.clone()), noise.clone(), 13, &s).unwrap();
        assert_eq!(out.data(), noise.data());
    }

    #[test]
    fn euler_oracle_single_datum_one_step() {
        // oracle always predicts the fixed clean datum; with t_max -> 1 a
        // single Euler step lands on it
        let mut r = stream(6, "euler", &[]);
        let z0 = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let noise = normal_tensor::<f64>(&mut r, vec![3, 3]);
        let s = NoiseSchedule::new(1.0 - 1e-9).unwrap();
        let z0c = z0.clone();
        let out = euler_sample_with(move |_z, _t| Ok(z0c.clone()), noise, 1, &s).unwrap();
        for i in 0..9 {
            assert!((out.data()[i] - z0.data()[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn euler_error_halves_with_step_size() {
        // linear test field v = -z (model z0hat = t*z): exact flow decays
        // exponentially, Euler error is O(1/steps)
        let s = NoiseSchedule::default();
        let init = Tensor::<f64>::from_vec(vec![1, 2], vec![1.0, -2.0]);
        let exact: Vec<f64> =
            init.data().iter().map(|&z| z * (-s.t_max_clamp).exp()).collect();
        let run = |steps: usize| {
            let out = euler_sample_with(
                |z, t| Ok(z.map(|v| v * t)),
                init.clone(),
                steps,
                &s,
            )
            .unwrap();
            out.data()
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let e40 = run(40);
        let e80 = run(80);
        assert!(e80 <= e40 / 2.0 * 1.05, "e40 {e40} e80 {e80}");
    }
}
