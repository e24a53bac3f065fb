//! Absorber layout for the two-material problem.

use std::io::BufRead;

use crate::error::{invalid, Error, Result};

/// Axis-aligned absorbing square `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorber {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Absorber {
    /// Strict interior; points on an edge belong to the surrounding material.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// The layout shipped with the crate.
pub const DEFAULT_LAYOUT: &str = include_str!("../../data/two_material.txt");

/// Parses `x_min y_min x_max y_max` lines; `#` starts a comment.
pub fn parse_layout(text: &str) -> Result<Vec<Absorber>> {
    read_layout(text.as_bytes())
}

pub fn read_layout<R: BufRead>(r: R) -> Result<Vec<Absorber>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidArgument(format!("layout line {}: {e}", n + 1)))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums: Vec<f64> = body
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid(format!("layout line {}: {e}", n + 1)))?;
        let [x_min, y_min, x_max, y_max] = nums[..] else {
            return Err(invalid(format!(
                "layout line {}: expected 4 numbers, found {}",
                n + 1,
                nums.len()
            )));
        };
        if !(x_min < x_max && y_min < y_max) || nums.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("layout line {}: empty or invalid box", n + 1)));
        }
        out.push(Absorber {
            x_min,
            y_min,
            x_max,
            y_max,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let boxes = parse_layout(DEFAULT_LAYOUT).unwrap();
        assert_eq!(boxes.len(), 11);
        for b in &boxes {
            assert!((b.area() - 0.25).abs() < 1e-15);
            // Clear of the source square [2, 3]².
            assert!(b.x_max <= 2.0 || b.x_min >= 3.0 || b.y_max <= 2.0 || b.y_min >= 3.0);
            // Mirror image in x is also an absorber.
            assert!(boxes
                .iter()
                .any(|o| (o.x_min - (5.0 - b.x_max)).abs() < 1e-12 && o.y_min == b.y_min));
        }
    }

    #[test]
    fn edges_are_not_inside() {
        let b = Absorber {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
        };
        assert!(b.contains(0.5, 0.5));
        assert!(!b.contains(0.0, 0.5));
        assert!(!b.contains(0.5, 1.0));
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_layout("1 2 3").is_err());
        assert!(parse_layout("1 2 0 3").is_err());
        assert!(parse_layout("a b c d").is_err());
        assert_eq!(parse_layout("# only comments\n\n").unwrap(), vec![]);
    }
}
