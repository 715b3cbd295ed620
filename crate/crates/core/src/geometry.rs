//! Planar polygon helpers in image coordinates (x right, y down).

pub type Point = (f64, f64);

/// Signed shoelace area; positive for clockwise listing with y pointing down.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    s / 2.0
}

pub fn area(poly: &[Point]) -> f64 {
    signed_area(poly).abs()
}

/// Orients a polygon so [`signed_area`] is non-negative.
pub fn oriented(poly: &[Point]) -> Vec<Point> {
    let mut p = poly.to_vec();
    if signed_area(&p) < 0.0 {
        p.reverse();
    }
    p
}

/// Clips `subject` against a convex `clip` polygon (Sutherland–Hodgman).
///
/// Both inputs may have either orientation; the result follows `subject`'s
/// vertex order and is empty when the polygons do not overlap.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let clip = oriented(clip);
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        // positive orientation means the interior is where the cross product is >= 0
        let side = |p: Point| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

/// Intersection over union of two convex polygons.
pub fn convex_iou(a: &[Point], b: &[Point]) -> f64 {
    let inter = area(&clip_convex(a, b));
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Even-odd point-in-polygon test; boundary points may fall either way.
pub fn contains(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Convex hull by Andrew's monotone chain, clockwise in image coordinates.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    oriented(&lower)
}

/// Axis-aligned bounds `[x0, y0, x1, y1]`.
pub fn bounds(poly: &[Point]) -> [f64; 4] {
    poly.iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, &(x, y)| [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)],
    )
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_overlap_is_one_third() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(0.5, 0.0, 1.5, 1.0);
        assert!((convex_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(convex_iou(&a, &rect(2.0, 2.0, 3.0, 3.0)), 0.0);
        assert!((convex_iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orientation_does_not_matter() {
        let a = rect(0.0, 0.0, 2.0, 2.0);
        let mut b = rect(1.0, 1.0, 3.0, 3.0);
        let fwd = convex_iou(&a, &b);
        b.reverse();
        assert!((fwd - convex_iou(&a, &b)).abs() < 1e-12);
        assert!((fwd - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn clipping_a_triangle() {
        let tri = vec![(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)];
        let clipped = clip_convex(&tri, &rect(0.0, 0.0, 2.0, 2.0));
        // everything inside the square except the corner above x + y = 4 (empty here)
        assert!((area(&clipped) - 4.0).abs() < 1e-12);
        let clipped = clip_convex(&tri, &rect(1.0, 1.0, 3.0, 3.0));
        assert!((area(&clipped) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hull_and_containment() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (1.0, 1.0), (2.0, 2.0), (0.0, 2.0)];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((area(&h) - 4.0).abs() < 1e-12);
        assert!(signed_area(&h) > 0.0);
        assert!(contains(&h, (1.0, 1.5)));
        assert!(!contains(&h, (2.5, 1.0)));
    }
}
