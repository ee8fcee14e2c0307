//! Globally adaptive 7/15-point Gauss–Kronrod quadrature for vector-valued
//! integrands on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum number of subintervals before giving up on the tolerance.
pub const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub values: Vec<f64>,
    /// Sum over subintervals of `max_k |K15 - G7|`.
    pub abs_error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, m: usize, buf: &mut [f64]) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; m];
    let mut gauss = vec![0.0; m];
    for (i, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in nodes {
            f(c + sgn * h * x, buf);
            for k in 0..m {
                kron[k] += wk * buf[k];
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * buf[k];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for k in 0..m {
        kron[k] *= h;
        gauss[k] *= h;
        error = error.max((kron[k] - gauss[k]).abs());
    }
    Piece { a, b, values: kron, error }
}

/// Integrate an `m`-vector valued `f` over `[a, b]`, starting from the
/// subdivision given by `breaks` (points outside `(a, b)` are ignored), until
/// the summed error estimate drops below `tol`.
///
/// `f(x, out)` writes the integrand at `x` into `out`.
pub fn integrate<F: Fn(f64, &mut [f64])>(f: F, m: usize, a: f64, b: f64, breaks: &[f64], tol: f64) -> Integral {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let mut buf = vec![0.0; m];
    let mut heap: BinaryHeap<Piece> = cuts.windows(2).map(|w| gk15(&f, w[0], w[1], m, &mut buf)).collect();
    let mut evaluations = 15 * heap.len();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();

    while total_error > tol && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid, m, &mut buf);
        let right = gk15(&f, mid, worst.b, m, &mut buf);
        evaluations += 30;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let intervals = heap.len();
    let mut values = vec![0.0; m];
    let mut abs_error = 0.0;
    for p in heap.into_vec() {
        abs_error += p.error;
        for k in 0..m {
            values[k] += p.values[k];
        }
    }
    Integral { values, abs_error, evaluations, intervals }
}
