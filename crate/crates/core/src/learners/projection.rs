use crate::experts::ClippedDistribution;
use crate::{Error, Result};

/// KL projection of a nonnegative weight vector onto the clipped simplex
/// `{w : sum w = 1, w_j >= floor}`.
///
/// Minimises `sum_j w_j ln(w_j / v_j)`. The minimiser has the form
/// `w_j = max(floor, theta v_j)`; the clipped coordinates are a prefix of
/// `v` sorted ascending, so the clip count is found by scanning that order.
/// Zero entries of `v` always sit at the floor.
pub fn kl_project_clipped(v: &[f64], floor: f64) -> Result<ClippedDistribution> {
    let n = v.len();
    if n == 0 {
        return Err(Error::arg("cannot project an empty vector"));
    }
    if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::arg(
            "projection input must be finite and nonnegative",
        ));
    }
    // Validates 0 < floor and n * floor <= 1.
    ClippedDistribution::uniform(n, floor)?;

    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::arg("projection input has no positive entry"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));

    let mut clipped_sum = 0.0;
    let mut theta = None;
    for k in 0..n {
        let free_sum = total - clipped_sum;
        if free_sum > 0.0 {
            let candidate = (1.0 - k as f64 * floor) / free_sum;
            let smallest_free_ok = candidate * v[order[k]] >= floor;
            let largest_clipped_ok = k == 0 || candidate * v[order[k - 1]] < floor;
            if smallest_free_ok && largest_clipped_ok {
                theta = Some(candidate);
                break;
            }
        }
        clipped_sum += v[order[k]];
    }

    let weights = match theta {
        Some(theta) => v.iter().map(|&x| floor.max(theta * x)).collect(),
        // Only reachable when n * floor == 1 up to rounding.
        None => vec![floor; n],
    };
    Ok(ClippedDistribution::from_parts_unchecked(weights, floor))
}
