//! Dormand–Prince 5(4) embedded Runge–Kutta stepping for small systems.

#[allow(clippy::excessive_precision)]
mod tableau {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    /// fifth-order weights (same as the last row of A)
    pub const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    /// difference between the fifth- and fourth-order weights
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

/// One step of size `h` from `(x, y)`: the fifth-order solution and the
/// embedded error estimate.
pub(crate) fn dopri_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    use tableau::{A, B, C, E};
    let mut k = [[0.0; N]; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = f(x + C[stage] * h, &ys);
    }
    let mut out = *y;
    let mut err = [0.0; N];
    for (stage, ks) in k.iter().enumerate() {
        for i in 0..N {
            out[i] += h * B[stage] * ks[i];
            err[i] += h * E[stage] * ks[i];
        }
    }
    (out, err)
}

/// Scaled RMS error norm with per-component floors.
pub(crate) fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    rtol: f64,
    floor: &[f64; N],
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = rtol * (y0[i].abs().max(y1[i].abs()) + floor[i]);
        let e = err[i] / sc;
        acc += e * e;
    }
    (acc / N as f64).sqrt()
}

/// Next step size from the current error norm (standard controller).
pub(crate) fn next_step(h: f64, norm: f64) -> f64 {
    let factor = if norm == 0.0 {
        5.0
    } else {
        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}
