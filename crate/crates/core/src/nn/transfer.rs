/// A 3x3 perspective kernel `p1..p9`, row-major.
pub type PerspectiveKernel = [f64; 9];

/// Interpolates the seven hexagonal taps from a 3x3 kernel. North and
/// south of the hexagon take the upper and lower middle weights, the centre
/// stays, and each of the four oblique taps blends the two nearest grid
/// columns with weight `sin(pi/3)` on the outer one.
pub fn transfer_weights(p: &PerspectiveKernel) -> [f64; 7] {
    let s = libm::sin(core::f64::consts::FRAC_PI_3);
    let mix = |outer: f64, inner: f64| s * outer / 2.0 + (1.0 - s) * inner / 2.0;
    let [p1, p2, p3, p4, p5, p6, p7, p8, p9] = *p;
    [p2, mix(p1 + p4, p2 + p5), mix(p4 + p7, p5 + p8), p8, mix(p6 + p9, p5 + p8), mix(p3 + p6, p2 + p5), p5]
}
