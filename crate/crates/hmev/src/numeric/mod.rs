//! Shared numerical routines: adaptive quadrature, root bracketing, and the
//! standard normal quantile.

pub mod quad;
pub mod root;

pub use quad::{integrate, integrate_to_inf};
pub use root::{bisect, brent_newton, grow_upper_bracket};

/// Standard normal quantile (Beasley–Springer–Moro rational approximation,
/// absolute error below 1e-8). Seeds Newton iterations and rank
/// normalization; not meant as a reference-grade inverse cdf.
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 4] = [2.50662823884, -18.61500062529, 41.39119773534, -25.44106049637];
    const B: [f64; 4] = [-8.47351093090, 23.08336743743, -21.06224101826, 3.13082909833];
    const C: [f64; 9] = [
        0.3374754822726147,
        0.9761690190917186,
        0.1607979714918209,
        0.0276438810333863,
        0.0038405729373609,
        0.0003951896511919,
        0.0000321767881768,
        0.0000002888167364,
        0.0000003960315187,
    ];
    let y = p - 0.5;
    if y.abs() < 0.42 {
        let r = y * y;
        y * (((A[3] * r + A[2]) * r + A[1]) * r + A[0])
            / ((((B[3] * r + B[2]) * r + B[1]) * r + B[0]) * r + 1.0)
    } else {
        let r = if y > 0.0 { 1.0 - p } else { p };
        let s = (-r.ln()).ln();
        let mut x = C[0];
        let mut pow = 1.0;
        for &c in &C[1..] {
            pow *= s;
            x += c * pow;
        }
        if y < 0.0 {
            -x
        } else {
            x
        }
    }
}
