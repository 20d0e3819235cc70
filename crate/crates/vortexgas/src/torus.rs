//! Coordinates on the unit torus `T² = R²/Z²`.
//!
//! Points are stored canonically in `[0,1)²`; displacements use the
//! minimum-image convention, i.e. they live in `[-1/2, 1/2)²`.

/// Wrap a coordinate into `[0, 1)`.
#[inline]
pub fn canonical(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 for tiny negative inputs
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

/// Wrap a point into `[0, 1)²`.
#[inline]
pub fn canonical_point(p: [f64; 2]) -> [f64; 2] {
    [canonical(p[0]), canonical(p[1])]
}

/// Minimum-image representative of a displacement, in `[-1/2, 1/2]²`.
#[inline]
pub fn min_image(d: [f64; 2]) -> [f64; 2] {
    [d[0] - d[0].round(), d[1] - d[1].round()]
}

/// Minimum-image displacement `a - b`.
#[inline]
pub fn delta(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    min_image([a[0] - b[0], a[1] - b[1]])
}

/// Squared minimum-image distance.
#[inline]
pub fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = delta(a, b);
    d[0] * d[0] + d[1] * d[1]
}

/// Minimum-image Euclidean distance.
#[inline]
pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    dist2(a, b).sqrt()
}

/// Neumaier compensated accumulator. Keeps pairwise sums reproducible and
/// accurate enough for the exact-identity checks without arbitrary precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    #[inline]
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
