//! Small derivative-free solvers shared by the state and analysis modules.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
///
/// Stops once the bracket is narrower than `tol`. Returns the best abscissa
/// seen together with its value; the endpoints are included in the
/// comparison so boundary maxima are reported exactly.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(lo, f(lo)), (hi, f(hi)), (mid, f(mid)), (c, fc), (d, fd)];
    candidates
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Result of a bracketing root search.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns `None` when `f(lo)` and `f(hi)` have the same strict sign.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Option<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(Root { x: a, iterations: 0 });
    }
    if fb == 0.0 {
        return Some(Root { x: b, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut iterations = 0;
    let mut fa = fa;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        iterations += 1;
        if fm == 0.0 {
            return Some(Root { x: m, iterations });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(Root {
        x: 0.5 * (a + b),
        iterations,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub value_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            value_tol: 1e-10,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Maximizes `f` with the Nelder-Mead simplex method (standard coefficients:
/// reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead_max<F>(mut f: F, x0: &[f64], opts: NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1, "Nelder-Mead needs at least one parameter");
    // Work on -f so the bookkeeping reads as minimization.
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        -f(x)
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if (vals[n] - vals[0]).abs() <= opts.value_tol || evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = reflected;
            vals[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[n] {
            let p = along(-0.5);
            let v = eval(&p, &mut evals);
            (p, v)
        } else {
            let p = along(0.5);
            let v = eval(&p, &mut evals);
            (p, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = contracted;
            vals[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = pts[0].clone();
        for i in 1..=n {
            for (x, b) in pts[i].iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }

    NelderMeadResult {
        x: pts.swap_remove(0),
        value: -vals[0],
        evals,
    }
}
