//! Fixed-step Runge-Kutta 3/8 integration for small fixed-size states.

use crate::scalar::Scalar;

/// One classical Runge-Kutta 3/8-rule step of `x' = f(x)` with step `h`.
///
/// Fourth-order accurate; used for obstacle motion so long rollouts stay on
/// the underlying oscillator orbit instead of spiraling.
pub fn rk38_step<S: Scalar, const N: usize>(
    x: [S; N],
    h: S,
    f: impl Fn(&[S; N]) -> [S; N],
) -> [S; N] {
    let third = S::lit(1.0 / 3.0);
    let k1 = f(&x);
    let k2 = f(&offset(x, k1, h * third));
    // Stage 3 evaluates at x + h*(-k1/3 + k2).
    let mut stage3 = x;
    for i in 0..N {
        stage3[i] = x[i] + h * (k2[i] - k1[i] * third);
    }
    let k3 = f(&stage3);
    let mut stage4 = x;
    for i in 0..N {
        stage4[i] = x[i] + h * (k1[i] - k2[i] + k3[i]);
    }
    let k4 = f(&stage4);
    let eighth = S::lit(0.125);
    let three = S::lit(3.0);
    let mut out = x;
    for i in 0..N {
        out[i] = x[i] + h * eighth * (k1[i] + three * k2[i] + three * k3[i] + k4[i]);
    }
    out
}

fn offset<S: Scalar, const N: usize>(x: [S; N], k: [S; N], scale: S) -> [S; N] {
    let mut out = x;
    for i in 0..N {
        out[i] = x[i] + k[i] * scale;
    }
    out
}
