//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels are kept in a max-heap keyed on their error estimate; the worst
//! panel is bisected until the summed error meets the tolerance. Error
//! estimates use the QUADPACK rescaling of `|K15 − G7|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Nodes and weights as published, to more digits than f64 keeps.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights at the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    l1: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error,
        l1: res_abs,
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    /// Estimate of `∫|f|`, used to judge cancellation.
    pub l1_norm: f64,
    /// The tolerance the estimate was required to meet.
    pub tolerance: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

/// Returned when the subdivision budget runs out or panels can no longer
/// be split. Carries the best estimate reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonConvergence {
    pub best: Estimate,
}

/// Tolerance settings. The integration stops once the estimated error is
/// below `max(abs_tol, rel_tol·|I|, l1_rel_tol·∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub l1_rel_tol: f64,
    pub max_intervals: usize,
}

impl Quadrature {
    pub fn new(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            abs_tol: 0.0,
            l1_rel_tol: 0.0,
            max_intervals: 4000,
        }
    }

    pub fn abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn l1_rel_tol(mut self, l1_rel_tol: f64) -> Self {
        self.l1_rel_tol = l1_rel_tol;
        self
    }

    pub fn max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    fn tolerance(&self, value: f64, l1: f64) -> f64 {
        self.abs_tol
            .max(self.rel_tol * value.abs())
            .max(self.l1_rel_tol * l1)
    }

    /// Integrates `f` over `[points[0], points[last]]`, starting from the
    /// panels delimited by `points` (which must be sorted and have at least
    /// two entries).
    pub fn integrate<F>(&self, mut f: F, points: &[f64]) -> Result<Estimate, NonConvergence>
    where
        F: FnMut(f64) -> f64,
    {
        assert!(points.len() >= 2, "need at least one panel");
        let mut heap = BinaryHeap::new();
        let (mut value, mut error, mut l1) = (0.0, 0.0, 0.0);
        for w in points.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let p = gauss_kronrod(&mut f, w[0], w[1]);
            value += p.value;
            error += p.error;
            l1 += p.l1;
            heap.push(p);
        }
        let mut evaluations = 15 * heap.len();

        let estimate = |heap: &BinaryHeap<Panel>, value, error, l1, evaluations, tol| Estimate {
            value,
            abs_error: error,
            l1_norm: l1,
            tolerance: tol,
            evaluations,
            intervals: heap.len(),
        };

        loop {
            let tol = self.tolerance(value, l1);
            if !value.is_finite() || !error.is_finite() {
                return Err(NonConvergence {
                    best: estimate(&heap, value, error, l1, evaluations, tol),
                });
            }
            if error <= tol {
                return Ok(estimate(&heap, value, error, l1, evaluations, tol));
            }
            if heap.len() >= self.max_intervals {
                return Err(NonConvergence {
                    best: estimate(&heap, value, error, l1, evaluations, tol),
                });
            }
            let worst = heap.pop().expect("heap holds at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                return Err(NonConvergence {
                    best: estimate(&heap, value, error, l1, evaluations, tol),
                });
            }
            let left = gauss_kronrod(&mut f, worst.a, mid);
            let right = gauss_kronrod(&mut f, mid, worst.b);
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            l1 += left.l1 + right.l1 - worst.l1;
            heap.push(left);
            heap.push(right);

            // Periodically re-sum to keep the running totals free of drift.
            if heap.len() % 64 == 0 {
                value = heap.iter().map(|p| p.value).sum();
                error = heap.iter().map(|p| p.error).sum();
                l1 = heap.iter().map(|p| p.l1).sum();
            }
        }
    }
}
