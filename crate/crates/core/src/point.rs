//! JSON-friendly complex number used in reports.

use serde::{Deserialize, Serialize};

use crate::symbols::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for Point {
    fn from(z: Complex) -> Self {
        Point { re: z.re, im: z.im }
    }
}

impl From<Point> for Complex {
    fn from(p: Point) -> Self {
        Complex::new(p.re, p.im)
    }
}
