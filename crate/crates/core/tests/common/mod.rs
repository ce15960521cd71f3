//! Brute-force oracles shared by the integration tests.

/// Half-space depth of `y` by enumerating the critical directions through it.
pub fn brute_depth(y: [f64; 2], pts: &[[f64; 2]]) -> usize {
    let mut dirs = vec![[1.0, 0.0]];
    for p in pts {
        let d = [p[0] - y[0], p[1] - y[1]];
        if d[0] == 0.0 && d[1] == 0.0 {
            continue;
        }
        let base = (-d[0]).atan2(d[1]);
        for t in [base, base + std::f64::consts::PI] {
            for e in [-1e-7, 0.0, 1e-7] {
                dirs.push([(t + e).cos(), (t + e).sin()]);
            }
        }
    }
    dirs.iter()
        .map(|u| {
            pts.iter()
                .filter(|p| {
                    let s = u[0] * (p[0] - y[0]) + u[1] * (p[1] - y[1]);
                    s >= -1e-12 * (1.0 + s.abs())
                })
                .count()
        })
        .min()
        .unwrap()
}

/// Data points and all intersections of lines through two of them.
pub fn line_intersections(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut lines = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            lines.push((pts[i], pts[j]));
        }
    }
    let mut out: Vec<[f64; 2]> = pts.to_vec();
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let ((p, q), (r, s)) = (lines[a], lines[b]);
            let d1 = [q[0] - p[0], q[1] - p[1]];
            let d2 = [s[0] - r[0], s[1] - r[1]];
            let den = d1[0] * d2[1] - d1[1] * d2[0];
            if den.abs() < 1e-12 {
                continue;
            }
            let t = ((r[0] - p[0]) * d2[1] - (r[1] - p[1]) * d2[0]) / den;
            out.push([p[0] + t * d1[0], p[1] + t * d1[1]]);
        }
    }
    out
}
