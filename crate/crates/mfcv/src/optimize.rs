//! Small derivative-free maximizers used for hyperparameter training and
//! acquisition search. Both are deterministic given their starting points.

/// Box-constrained Nelder-Mead maximization.
///
/// The objective may return `f64::NEG_INFINITY` to mark an infeasible point
/// (e.g. a failed factorization); such vertices are simply ranked worst.
pub fn nelder_mead_max<F>(
    f: F,
    start: &[f64],
    lows: &[f64],
    highs: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..dim {
            x[i] = x[i].clamp(lows[i], highs[i]);
        }
    };
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    // Initial simplex: start plus one perturbed vertex per dimension.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let s0 = start.to_vec();
    let v0 = eval(&s0);
    simplex.push((s0, v0));
    for i in 0..dim {
        let mut x = start.to_vec();
        let step = 0.1 * (highs[i] - lows[i]);
        x[i] = if x[i] + step <= highs[i] { x[i] + step } else { x[i] - step };
        clamp(&mut x);
        let v = eval(&x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals.get() < max_evals {
        // Descending by value: best first.
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let spread = simplex[0].1 - simplex[dim].1;
        // A simplex straddling a peak can have equal values while still
        // being wide, so convergence also requires a small diameter.
        let diameter = (0..dim)
            .map(|i| {
                let lo = simplex.iter().map(|(x, _)| x[i]).fold(f64::INFINITY, f64::min);
                let hi = simplex.iter().map(|(x, _)| x[i]).fold(f64::NEG_INFINITY, f64::max);
                (hi - lo) / (highs[i] - lows[i])
            })
            .fold(0.0, f64::max);
        if spread.is_finite() && spread.abs() < 1e-10 && diameter < 1e-7 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();

        let mut reflected: Vec<f64> = (0..dim)
            .map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]))
            .collect();
        clamp(&mut reflected);
        let fr = eval(&reflected);

        if fr > simplex[0].1 {
            let mut expanded: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + gamma * (reflected[i] - centroid[i]))
                .collect();
            clamp(&mut expanded);
            let fe = eval(&expanded);
            simplex[dim] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let mut contracted: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + rho * (worst.0[i] - centroid[i]))
                .collect();
            clamp(&mut contracted);
            let fc = eval(&contracted);
            if fc > worst.1 {
                simplex[dim] = (contracted, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = (0..dim)
                        .map(|i| best[i] + sigma * (entry.0[i] - best[i]))
                        .collect();
                    clamp(&mut x);
                    let v = eval(&x);
                    *entry = (x, v);
                }
            }
        }
        if evals.get() >= max_evals {
            break;
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    simplex.swap_remove(0)
}

/// Box-constrained compass (coordinate pattern) search maximization.
///
/// Moves only on strict improvement, so the start point is returned
/// unchanged on a flat objective.
pub fn compass_search_max<F>(
    f: F,
    start: &[f64],
    lows: &[f64],
    highs: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut x = start.to_vec();
    let mut fx = f(&x);
    if fx.is_nan() {
        fx = f64::NEG_INFINITY;
    }
    let mut steps: Vec<f64> = (0..dim).map(|i| 0.25 * (highs[i] - lows[i])).collect();
    let mut evals = 1usize;
    while evals < max_evals {
        let mut improved = false;
        'dims: for i in 0..dim {
            for dir in [1.0, -1.0] {
                if evals >= max_evals {
                    break 'dims;
                }
                let cand = (x[i] + dir * steps[i]).clamp(lows[i], highs[i]);
                if cand == x[i] {
                    continue;
                }
                let old = x[i];
                x[i] = cand;
                let v = f(&x);
                evals += 1;
                if v > fx {
                    fx = v;
                    improved = true;
                } else {
                    x[i] = old;
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
            if steps.iter().all(|s| *s < 1e-9) {
                break;
            }
        }
    }
    (x, fx)
}
