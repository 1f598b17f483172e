/// Chebyshev polynomial of the first kind by forward recurrence.
pub fn chebyshev_t(l: usize, t: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut prev, mut cur) = (1.0, t);
            for _ in 2..=l {
                (prev, cur) = (cur, 2.0 * t * cur - prev);
            }
            cur
        }
    }
}

/// Ultraspherical (Gegenbauer) polynomial `C_l^lambda(t)` by forward
/// recurrence; `lambda = 0` dispatches to the Chebyshev convention used for
/// the circle. Stable for `t` in `[-1, 1]` up to degrees around 10^4 (error
/// growth is mildly polynomial in `l`; see the stability test).
pub fn gegenbauer(lambda: f64, l: usize, t: f64) -> f64 {
    if lambda == 0.0 {
        return chebyshev_t(l, t);
    }
    match l {
        0 => 1.0,
        1 => 2.0 * lambda * t,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * lambda * t);
            for k in 2..=l {
                let kf = k as f64;
                let next =
                    (2.0 * (kf + lambda - 1.0) * t * cur - (kf + 2.0 * lambda - 2.0) * prev) / kf;
                (prev, cur) = (cur, next);
            }
            cur
        }
    }
}

/// All values `C_l^lambda(t)` for `l = 0..=l_max` in one recurrence sweep
/// (Chebyshev values for `lambda = 0`).
pub fn gegenbauer_all(lambda: f64, l_max: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max == 0 {
        return out;
    }
    if lambda == 0.0 {
        out.push(t);
        for _ in 2..=l_max {
            let next = 2.0 * t * out[out.len() - 1] - out[out.len() - 2];
            out.push(next);
        }
    } else {
        out.push(2.0 * lambda * t);
        for k in 2..=l_max {
            let kf = k as f64;
            let next = (2.0 * (kf + lambda - 1.0) * t * out[k - 1]
                - (kf + 2.0 * lambda - 2.0) * out[k - 2])
                / kf;
            out.push(next);
        }
    }
    out
}

/// Evaluation context for a fixed ultraspherical order; `lambda` is `0` on
/// the circle (Chebyshev convention) and `(n-1)/2` on higher spheres.
#[derive(Debug, Clone)]
pub struct UltrasphericalBasis {
    pub lambda: f64,
    pub max_degree: usize,
}

impl UltrasphericalBasis {
    /// Basis attached to the n-sphere with truncation degree `max_degree`.
    pub fn for_sphere(dim_n: usize, max_degree: usize) -> Self {
        Self {
            lambda: (dim_n as f64 - 1.0) / 2.0,
            max_degree,
        }
    }

    pub fn eval(&self, l: usize, t: f64) -> f64 {
        debug_assert!(l <= self.max_degree);
        gegenbauer(self.lambda, l, t)
    }

    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        gegenbauer_all(self.lambda, self.max_degree, t)
    }
}
