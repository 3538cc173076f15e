//! Planar point-in-polygon testing for admin-boundary assignment.

use alloc::vec::Vec;

/// (latitude, longitude) in degrees. The containment test treats the pair as
/// planar coordinates, which is fine at admin-boundary scale.
pub type Point = (f64, f64);

/// Even-odd (ray casting) containment over a set of rings. Holes need no
/// special treatment: crossing an inner ring flips the parity back out.
/// Points exactly on an edge or vertex get whatever the parity of the ray
/// cast says; the rule, not the answer, is the contract for degenerate
/// input.
pub fn point_in_rings(point: Point, rings: &[Vec<Point>]) -> bool {
    let (py, px) = point;
    let mut inside = false;
    for ring in rings {
        if ring.len() < 4 {
            continue;
        }
        // Rings are closed (first == last); iterate the distinct edges.
        for edge in ring.windows(2) {
            let (ay, ax) = edge[0];
            let (by, bx) = edge[1];
            if (ay > py) != (by > py) {
                let x_cross = (bx - ax) * (py - ay) / (by - ay) + ax;
                if px < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}
