//! Adaptive tensor Gauss–Kronrod (7/15) cubature on rectangles with a global
//! error-driven priority queue. Vector-valued integrands share the
//! subdivision; the worst component drives refinement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes on [−1, 1] with Kronrod weights and Gauss weights (0 off the Gauss subset).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let g = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        out[k] = (-XGK[k], WGK[k], g);
        out[14 - k] = (XGK[k], WGK[k], g);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// Absolute tolerance on every component.
    pub tol: f64,
    /// Maximum bisection depth of a cell.
    pub max_depth: u32,
    /// Hard cap on the number of cells.
    pub max_cells: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { tol: 1e-6, max_depth: 40, max_cells: 60_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub cells: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone)]
struct Cell<const K: usize> {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    depth: u32,
    value: [f64; K],
    error: [f64; K],
    worst: f64,
    id: u64,
}

impl<const K: usize> PartialEq for Cell<K> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<const K: usize> Eq for Cell<K> {}
impl<const K: usize> PartialOrd for Cell<K> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const K: usize> Ord for Cell<K> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.worst.total_cmp(&o.worst).then_with(|| o.id.cmp(&self.id))
    }
}

fn eval_cell<const K: usize, F: Fn(f64, f64) -> [f64; K]>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> ([f64; K], [f64; K]) {
    let r = rule();
    let (cx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let (cy, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
    let mut kr = [0.0; K];
    let mut ga = [0.0; K];
    for &(u, wku, wgu) in &r {
        let x = cx + hx * u;
        for &(v, wkv, wgv) in &r {
            let y = cy + hy * v;
            let fv = f(x, y);
            let wk = wku * wkv;
            let wg = wgu * wgv;
            for c in 0..K {
                let val = if fv[c].is_finite() { fv[c] } else { 0.0 };
                kr[c] += wk * val;
                ga[c] += wg * val;
            }
        }
    }
    let area = hx * hy;
    let mut err = [0.0; K];
    for c in 0..K {
        kr[c] *= area;
        ga[c] *= area;
        err[c] = (kr[c] - ga[c]).abs();
    }
    (kr, err)
}

/// Integrates `f` over [x_breaks₀, x_breaks_last] × [y_breaks₀, y_breaks_last],
/// starting from the grid given by the breakpoints (put singular points on
/// grid lines so no node lands on them).
pub fn integrate<const K: usize, F: Fn(f64, f64) -> [f64; K]>(
    f: &F,
    x_breaks: &[f64],
    y_breaks: &[f64],
    params: &QuadParams,
) -> QuadResult<K> {
    let xs = clean_breaks(x_breaks);
    let ys = clean_breaks(y_breaks);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Cell<K>> = Vec::new();
    let mut next_id = 0u64;
    let mut evaluations = 0usize;
    let mut make = |x0: f64, x1: f64, y0: f64, y1: f64, depth: u32, evals: &mut usize| {
        let (value, error) = eval_cell(f, x0, x1, y0, y1);
        *evals += 225;
        let worst = error.iter().cloned().fold(0.0, f64::max);
        next_id += 1;
        Cell { x0, x1, y0, y1, depth, value, error, worst, id: next_id }
    };
    for w in xs.windows(2) {
        for v in ys.windows(2) {
            heap.push(make(w[0], w[1], v[0], v[1], 0, &mut evaluations));
        }
    }
    let total_err = |heap: &BinaryHeap<Cell<K>>, done: &[Cell<K>]| {
        let mut e = [0.0; K];
        for c in heap.iter().chain(done.iter()) {
            for k in 0..K {
                e[k] += c.error[k];
            }
        }
        e.iter().cloned().fold(0.0, f64::max)
    };
    let mut converged = false;
    let mut running = total_err(&heap, &done);
    let mut since_sync = 0;
    loop {
        if running <= params.tol {
            // recompute exactly to avoid drift in the running sum
            running = total_err(&heap, &done);
            if running <= params.tol {
                converged = true;
                break;
            }
        }
        if heap.len() + done.len() + 3 > params.max_cells {
            break;
        }
        let Some(c) = heap.pop() else { break };
        if c.depth >= params.max_depth {
            done.push(c);
            continue;
        }
        let xm = 0.5 * (c.x0 + c.x1);
        let ym = 0.5 * (c.y0 + c.y1);
        let kids = [
            make(c.x0, xm, c.y0, ym, c.depth + 1, &mut evaluations),
            make(xm, c.x1, c.y0, ym, c.depth + 1, &mut evaluations),
            make(c.x0, xm, ym, c.y1, c.depth + 1, &mut evaluations),
            make(xm, c.x1, ym, c.y1, c.depth + 1, &mut evaluations),
        ];
        running -= c.worst;
        for k in kids {
            running += k.worst;
            heap.push(k);
        }
        since_sync += 1;
        if since_sync == 256 {
            running = total_err(&heap, &done);
            since_sync = 0;
        }
    }
    let mut cells: Vec<Cell<K>> = heap.into_vec();
    cells.extend(done);
    cells.sort_by(|a, b| (a.x0, a.y0, a.x1, a.y1).partial_cmp(&(b.x0, b.y0, b.x1, b.y1)).unwrap());
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for c in &cells {
        for k in 0..K {
            value[k] += c.value[k];
            error[k] += c.error[k];
        }
    }
    QuadResult { value, error, cells: cells.len(), evaluations, converged }
}

fn clean_breaks(b: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = b.iter().cloned().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let lo = v[0];
    let hi = *v.last().unwrap();
    let tol = 1e-12 * (hi - lo).abs().max(1.0);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64, y: f64| [x * x * y, x.powi(7) * y.powi(9)];
        let r = integrate(&f, &[0.0, 1.0], &[0.0, 2.0], &QuadParams::default());
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.value[1] - 2f64.powi(10) / 80.0).abs() < 1e-11);
        assert!(r.converged);
    }

    #[test]
    fn corner_log_singularity() {
        // ∫∫_{[0,1]²} log(x² + y²) dx dy = log 2 − 3 + π/2
        let f = |x: f64, y: f64| [(x * x + y * y).ln()];
        let p = QuadParams { tol: 1e-10, ..Default::default() };
        let r = integrate(&f, &[0.0, 1.0], &[0.0, 1.0], &p);
        let exact = 2f64.ln() - 3.0 + PI / 2.0;
        assert!((r.value[0] - exact).abs() < 1e-10, "{} vs {exact}", r.value[0]);
        assert!(r.converged);
    }

    #[test]
    fn inverse_distance_corner() {
        // ∫∫_{[0,1]²} 1/√(x² + y²) = 2 asinh(1)
        let f = |x: f64, y: f64| [1.0 / (x * x + y * y).sqrt()];
        let p = QuadParams { tol: 1e-9, ..Default::default() };
        let r = integrate(&f, &[0.0, 1.0], &[0.0, 1.0], &p);
        assert!((r.value[0] - 2.0 * 1f64.asinh()).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let f = |x: f64, y: f64| [(x - 0.3).abs().sqrt() * y.cos()];
        let a = integrate(&f, &[0.0, 1.0], &[0.0, 1.0], &QuadParams::default());
        let b = integrate(&f, &[0.0, 1.0], &[0.0, 1.0], &QuadParams::default());
        assert_eq!(a, b);
    }
}
