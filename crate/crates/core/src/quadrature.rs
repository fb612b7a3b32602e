//! Fixed quadrature rules shared by every assembly routine.

use crate::Point;

/// Barycentric points and weights (summing to one) of the symmetric 6-point
/// rule, exact for polynomials of degree 4.
pub const TRIANGLE_6: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_964_9;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011_47;
    const A2: f64 = 0.091_576_213_509_770_74;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_321_87;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// 3-point Gauss-Legendre rule on `[0, 1]`, exact to degree 5.
pub const GAUSS_3: [(f64, f64); 3] = {
    // sqrt(3/5) / 2
    const H: f64 = 0.387_298_334_620_741_7;
    [(0.5 - H, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + H, 5.0 / 18.0)]
};

/// Maps barycentric coordinates to a physical point of the triangle.
#[inline]
pub fn map_point(verts: &[Point; 3], bary: &[f64; 3]) -> Point {
    [
        bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0],
        bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1],
    ]
}

/// Physical quadrature points and weights (scaled by the area) of a triangle.
pub fn triangle_points(verts: &[Point; 3], area: f64) -> [(Point, f64); 6] {
    TRIANGLE_6.map(|(bary, w)| (map_point(verts, &bary), w * area))
}

/// Physical Gauss points and weights (scaled by the length) of a segment.
pub fn segment_points(a: Point, b: Point) -> [(Point, f64); 3] {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    GAUSS_3.map(|(t, w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
}
