//! Central-difference verification of analytic gradients, run in f64.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::stream;
use crate::tensor::Tensor;
use rand::Rng;

/// Outcome of one gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub coords_checked: usize,
}

/// Compare the analytic gradient of a scalar-valued graph against central
/// differences `(f(x+h) - f(x-h)) / 2h`.
///
/// The builder must be a pure function of the supplied parameter tensors and
/// return the scalar output node; param leaves must be created in order via
/// the provided ids. When the total coordinate count exceeds `max_coords`,
/// a seeded subset is checked instead (large models cannot be finite-
/// differenced coordinate-by-coordinate in reasonable time).
pub fn grad_check<F>(
    builder: F,
    params: &[Tensor<f64>],
    h: f64,
    max_coords: usize,
    seed: u64,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Graph<f64>, &[NodeId]) -> Result<NodeId> + Sync,
{
    let eval = |ps: &[Tensor<f64>]| -> Result<f64> {
        let mut g = Graph::new();
        let ids: Vec<NodeId> = ps.iter().map(|p| g.param(p)).collect();
        let out = builder(&mut g, &ids)?;
        if g.value(out).len() != 1 {
            return Err(Error::Contract(format!(
                "grad_check target must be scalar, got {:?}",
                g.value(out).shape()
            )));
        }
        Ok(g.value(out).data()[0].to_f64())
    };

    // Analytic pass.
    let mut g = Graph::new();
    let ids: Vec<NodeId> = params.iter().map(|p| g.param(p)).collect();
    let out = builder(&mut g, &ids)?;
    if g.value(out).len() != 1 {
        return Err(Error::Contract(format!(
            "grad_check target must be scalar, got {:?}",
            g.value(out).shape()
        )));
    }
    g.backward(out)?;
    let analytic: Vec<Tensor<f64>> = ids
        .iter()
        .zip(params)
        .map(|(&id, p)| g.grad(id).cloned().unwrap_or_else(|| Tensor::zeros(p.shape().to_vec())))
        .collect();
    drop(g);

    // Coordinate selection: everything if it fits the budget, otherwise a
    // seeded sample that still touches every parameter tensor.
    let total: usize = params.iter().map(|p| p.len()).sum();
    let coords: Vec<(usize, usize)> = if total <= max_coords {
        params
            .iter()
            .enumerate()
            .flat_map(|(pi, p)| (0..p.len()).map(move |ci| (pi, ci)))
            .collect()
    } else {
        let mut rng = stream(seed, "gradcheck-coords", &[]);
        let mut picked = Vec::with_capacity(max_coords);
        // one coordinate per tensor first, then uniform over the rest
        for (pi, p) in params.iter().enumerate() {
            if picked.len() >= max_coords {
                break;
            }
            picked.push((pi, rng.gen_range(0..p.len())));
        }
        while picked.len() < max_coords {
            let pi = rng.gen_range(0..params.len());
            let ci = rng.gen_range(0..params[pi].len());
            picked.push((pi, ci));
        }
        picked
    };

    let mut max_rel = 0.0f64;
    let mut work: Vec<Tensor<f64>> = params.to_vec();
    for &(pi, ci) in &coords {
        let orig = work[pi].data()[ci];
        work[pi].data_mut()[ci] = orig + h;
        let f_plus = eval(&work)?;
        work[pi].data_mut()[ci] = orig - h;
        let f_minus = eval(&work)?;
        work[pi].data_mut()[ci] = orig;

        let numeric = (f_plus - f_minus) / (2.0 * h);
        let a = analytic[pi].data()[ci];
        let rel = (a - numeric).abs() / 1e-8f64.max(numeric.abs());
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(GradCheckReport { max_rel_err: max_rel, coords_checked: coords.len() })
}
