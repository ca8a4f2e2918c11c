//! Planar ultrasonic trilateration via the radical-axis construction.
//!
//! A mobile node emits an ultrasonic burst; three wall-mounted receivers at
//! known positions measure its time of flight. Multiplying by the speed of
//! sound gives three distances `d1..d3`, which define three circles around
//! the receiver positions. Subtracting pairs of circle equations eliminates
//! the quadratic terms and leaves a line per pair — the radical axis:
//!
//! ```text
//! 2(x2−x1)·x + 2(y2−y1)·y = (d1²−d2²) + (x2²−x1²) + (y2²−y1²)
//! ```
//!
//! The three axes of three circles with non-collinear centers meet in a
//! single point, the radical center, which is the node's position. The three
//! axis equations are linearly dependent (their coefficient triples sum to
//! zero), so only two of them are needed for the solve; the third serves as a
//! consistency check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Triangle area (m²) below which three circle centers are treated as
/// collinear and the radical axes as parallel.
pub const COLLINEARITY_AREA_THRESHOLD: f64 = 1e-9;

/// Residual (m) above which the third radical axis is considered to miss the
/// intersection of the first two. For any consistent instance the residual is
/// at floating-point noise level; this bound only guards against severe
/// ill-conditioning that slipped past the collinearity test.
pub const AXIS_CONCURRENCY_TOLERANCE: f64 = 1e-6;

/// Errors from the trilateration pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PositioningError {
    #[error("time of flight must be non-negative and finite, got {0}")]
    InvalidTof(f64),
    #[error("propagation speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("distance must be non-negative and finite, got {0}")]
    InvalidDistance(f64),
    #[error("noise level must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("degenerate configuration: circle centers coincide, no radical axis exists")]
    CoincidentCenters,
    #[error(
        "degenerate configuration: circle centers are collinear (triangle area {area} m²), \
         the radical axes are parallel and there is no unique solution"
    )]
    CollinearCenters { area: f64 },
    #[error("receivers {a} and {b} occupy the same position")]
    CoincidentReceivers { a: String, b: String },
    #[error("ranging requires at least 3 receivers, got {0}")]
    TooFewReceivers(usize),
    #[error(
        "radical axes do not concur: third-axis residual {residual} m exceeds {AXIS_CONCURRENCY_TOLERANCE} m"
    )]
    AxesNotConcurrent { residual: f64 },
}

/// A point in the floor plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to another point.
    pub fn distance_to(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// A fixed ultrasonic receiver at a known position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltrasonicReceiver {
    pub receiver_id: String,
    pub position: Point2D,
}

impl UltrasonicReceiver {
    pub fn new(receiver_id: impl Into<String>, position: Point2D) -> Self {
        Self {
            receiver_id: receiver_id.into(),
            position,
        }
    }
}

/// One time-of-flight measurement attributed to a receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub receiver_id: String,
    /// Time of flight in seconds, non-negative.
    pub tof: f64,
}

/// A circle in the floor plane (a receiver position and a measured range).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2D,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2D, radius: f64) -> Result<Self, PositioningError> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(PositioningError::InvalidDistance(radius));
        }
        Ok(Self { center, radius })
    }
}

/// The locus `a·x + b·y = c`, obtained by subtracting two circle equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadicalLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RadicalLine {
    /// Signed value of `a·x + b·y − c` at a point; zero on the line.
    pub fn evaluate(&self, p: &Point2D) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }

    /// Perpendicular distance from a point to the line, meters.
    pub fn distance_to(&self, p: &Point2D) -> f64 {
        self.evaluate(p).abs() / (self.a * self.a + self.b * self.b).sqrt()
    }
}

/// Converts a time of flight to a distance: `d = tof · speed`.
pub fn tof_to_distance(tof: f64, speed: f64) -> Result<f64, PositioningError> {
    if !tof.is_finite() || tof < 0.0 {
        return Err(PositioningError::InvalidTof(tof));
    }
    if !speed.is_finite() || speed <= 0.0 {
        return Err(PositioningError::InvalidSpeed(speed));
    }
    Ok(tof * speed)
}

/// The radical axis of two circles: subtract the circle equations and equate
/// with zero, leaving `2(x2−x1)·x + 2(y2−y1)·y = (d1²−d2²) + (x2²−x1²) + (y2²−y1²)`.
///
/// Errors if the centers coincide (no axis exists).
pub fn radical_axis(c1: &Circle, c2: &Circle) -> Result<RadicalLine, PositioningError> {
    let a = 2.0 * (c2.center.x - c1.center.x);
    let b = 2.0 * (c2.center.y - c1.center.y);
    if a == 0.0 && b == 0.0 {
        return Err(PositioningError::CoincidentCenters);
    }
    let c = (c1.radius * c1.radius - c2.radius * c2.radius)
        + (c2.center.x * c2.center.x - c1.center.x * c1.center.x)
        + (c2.center.y * c2.center.y - c1.center.y * c1.center.y);
    Ok(RadicalLine { a, b, c })
}

/// Twice the signed area of the triangle spanned by three points.
fn doubled_signed_area(p1: &Point2D, p2: &Point2D, p3: &Point2D) -> f64 {
    (p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y)
}

/// The common point of the three pairwise radical axes of three circles.
///
/// Solves axes (1,2) and (1,3) as a 2×2 linear system and verifies that axis
/// (2,3) passes through the solution within [`AXIS_CONCURRENCY_TOLERANCE`].
/// Errors if the centers are (nearly) collinear, in which case the axes are
/// parallel and no unique solution exists.
pub fn radical_center(c1: &Circle, c2: &Circle, c3: &Circle) -> Result<Point2D, PositioningError> {
    let area = doubled_signed_area(&c1.center, &c2.center, &c3.center).abs() / 2.0;
    if area < COLLINEARITY_AREA_THRESHOLD {
        return Err(PositioningError::CollinearCenters { area });
    }
    let l12 = radical_axis(c1, c2)?;
    let l13 = radical_axis(c1, c3)?;
    let det = l12.a * l13.b - l13.a * l12.b;
    // det = 8 × signed triangle area, nonzero past the collinearity gate.
    let x = (l12.c * l13.b - l13.c * l12.b) / det;
    let y = (l12.a * l13.c - l13.a * l12.c) / det;
    let solution = Point2D::new(x, y);
    let l23 = radical_axis(c2, c3)?;
    let residual = l23.distance_to(&solution);
    if residual > AXIS_CONCURRENCY_TOLERANCE {
        return Err(PositioningError::AxesNotConcurrent { residual });
    }
    Ok(solution)
}

/// Recovers a node position from three receivers and three measured
/// distances: builds the three circles and returns their radical center.
///
/// With exact distances from a true point this recovers that point; with
/// inconsistent (noisy) distances the radical center still exists and is
/// unique as long as the receivers are not collinear.
pub fn trilaterate(
    receivers: &[UltrasonicReceiver; 3],
    distances: &[f64; 3],
) -> Result<Point2D, PositioningError> {
    for (i, a) in receivers.iter().enumerate() {
        for b in receivers.iter().skip(i + 1) {
            if a.position == b.position {
                return Err(PositioningError::CoincidentReceivers {
                    a: a.receiver_id.clone(),
                    b: b.receiver_id.clone(),
                });
            }
        }
    }
    let c1 = Circle::new(receivers[0].position, distances[0])?;
    let c2 = Circle::new(receivers[1].position, distances[1])?;
    let c3 = Circle::new(receivers[2].position, distances[2])?;
    radical_center(&c1, &c2, &c3)
}

/// Forward model: simulates time-of-flight measurements from a true position
/// to each receiver, with additive Gaussian noise on the time of flight
/// (clamped at zero). Deterministic for a fixed seed.
pub fn simulate_ranging(
    true_position: Point2D,
    receivers: &[UltrasonicReceiver],
    speed: f64,
    noise_sigma: f64,
    rng_seed: u64,
) -> Result<Vec<RangeMeasurement>, PositioningError> {
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    simulate_ranging_with_rng(true_position, receivers, speed, noise_sigma, &mut rng)
}

/// [`simulate_ranging`] with a caller-owned randomness source, for callers
/// that keep one generator across many calls (e.g. the world simulation).
///
/// When `noise_sigma` is zero no random numbers are drawn at all, so the
/// caller's generator state is untouched by noiseless ranging.
pub fn simulate_ranging_with_rng<R: Rng + ?Sized>(
    true_position: Point2D,
    receivers: &[UltrasonicReceiver],
    speed: f64,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<Vec<RangeMeasurement>, PositioningError> {
    if !speed.is_finite() || speed <= 0.0 {
        return Err(PositioningError::InvalidSpeed(speed));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(PositioningError::InvalidNoise(noise_sigma));
    }
    let normal = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).expect("validated sigma"))
    } else {
        None
    };
    Ok(receivers
        .iter()
        .map(|receiver| {
            let mut tof = true_position.distance_to(&receiver.position) / speed;
            if let Some(normal) = &normal {
                tof += normal.sample(rng);
            }
            RangeMeasurement {
                receiver_id: receiver.receiver_id.clone(),
                tof: tof.max(0.0),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(x: f64, y: f64, r: f64) -> Circle {
        Circle::new(Point2D::new(x, y), r).unwrap()
    }

    fn receivers3(ps: [(f64, f64); 3]) -> [UltrasonicReceiver; 3] {
        [
            UltrasonicReceiver::new("u1", Point2D::new(ps[0].0, ps[0].1)),
            UltrasonicReceiver::new("u2", Point2D::new(ps[1].0, ps[1].1)),
            UltrasonicReceiver::new("u3", Point2D::new(ps[2].0, ps[2].1)),
        ]
    }

    // -- tof_to_distance -------------------------------------------------------

    #[test]
    fn tof_conversion() {
        assert_eq!(tof_to_distance(0.0, 343.0).unwrap(), 0.0);
        assert!((tof_to_distance(0.01, 343.0).unwrap() - 3.43).abs() < 1e-12);
        assert!((tof_to_distance(1.0 / 343.0, 343.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(tof_to_distance(-1e-9, 343.0).is_err());
        assert!(tof_to_distance(1.0, 0.0).is_err());
    }

    // -- radical axis ----------------------------------------------------------

    #[test]
    fn equal_circles_give_perpendicular_bisector() {
        let axis = radical_axis(&circle(0.0, 0.0, 1.0), &circle(2.0, 0.0, 1.0)).unwrap();
        // 4x = 4, the vertical line x = 1.
        assert_eq!(axis.a, 4.0);
        assert_eq!(axis.b, 0.0);
        assert_eq!(axis.c, 4.0);
        assert_eq!(axis.evaluate(&Point2D::new(1.0, 123.0)), 0.0);
    }

    #[test]
    fn axis_passes_through_circle_intersections() {
        // Circles centered (0,0) and (2,0), both radius 1: tangent at (1,0).
        let axis = radical_axis(&circle(0.0, 0.0, 1.0), &circle(2.0, 0.0, 1.0)).unwrap();
        assert!(axis.evaluate(&Point2D::new(1.0, 0.0)).abs() < 1e-12);
        // Properly intersecting circles: radius √2 around (0,0) and √2 around
        // (2,0) intersect at (1, ±1); both intersection points are on the axis.
        let axis2 = radical_axis(&circle(0.0, 0.0, 2f64.sqrt()), &circle(2.0, 0.0, 2f64.sqrt())).unwrap();
        assert!(axis2.evaluate(&Point2D::new(1.0, 1.0)).abs() < 1e-12);
        assert!(axis2.evaluate(&Point2D::new(1.0, -1.0)).abs() < 1e-12);
    }

    #[test]
    fn axis_from_true_point_distances() {
        // True point (1,1): distances √2 to (0,0) and √10 to (4,0).
        // Subtracting the circle equations: 8x = 2 − 10 + 16 = 8, i.e. x = 1.
        let axis = radical_axis(&circle(0.0, 0.0, 2f64.sqrt()), &circle(4.0, 0.0, 10f64.sqrt())).unwrap();
        assert_eq!(axis.a, 8.0);
        assert_eq!(axis.b, 0.0);
        assert!((axis.c - 8.0).abs() < 1e-12);
        assert!(axis.evaluate(&Point2D::new(1.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn coincident_centers_have_no_axis() {
        assert_eq!(
            radical_axis(&circle(1.0, 1.0, 1.0), &circle(1.0, 1.0, 2.0)),
            Err(PositioningError::CoincidentCenters)
        );
    }

    // -- radical center ----------------------------------------------------------

    #[test]
    fn radical_center_solved_by_hand() {
        // Axis of (0,0,r=1)/(2,0,r=1): x = 1. Axis of (0,0,r=1)/(1,2,r=√2):
        // 2x + 4y = (1−2) + 1 + 4 = 4, so at x=1, y = 1/2.
        let center = radical_center(
            &circle(0.0, 0.0, 1.0),
            &circle(2.0, 0.0, 1.0),
            &circle(1.0, 2.0, 2f64.sqrt()),
        )
        .unwrap();
        assert!((center.x - 1.0).abs() < 1e-12);
        assert!((center.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_centers_are_degenerate() {
        let err = radical_center(
            &circle(0.0, 0.0, 1.0),
            &circle(1.0, 0.0, 1.0),
            &circle(2.0, 0.0, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, PositioningError::CollinearCenters { .. }));
        assert!(err.to_string().contains("collinear"));
    }

    // -- trilaterate -------------------------------------------------------------

    #[test]
    fn node_on_a_receiver_is_recovered() {
        let rx = receivers3([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let p = trilaterate(&rx, &[0.0, 1.0, 1.0]).unwrap();
        assert!(p.distance_to(&Point2D::new(0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn exact_distances_recover_the_true_point() {
        let rx = receivers3([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        let truth = Point2D::new(1.0, 1.0);
        let d: Vec<f64> = rx.iter().map(|r| truth.distance_to(&r.position)).collect();
        let p = trilaterate(&rx, &[d[0], d[1], d[2]]).unwrap();
        assert!(p.distance_to(&truth) < 1e-12);

        // Brute-force oracle: grid search minimizing squared range residuals
        // must land on the same point (up to the grid pitch).
        let mut best = (f64::INFINITY, Point2D::new(0.0, 0.0));
        for ix in 0..=400 {
            for iy in 0..=300 {
                let cand = Point2D::new(ix as f64 * 0.01, iy as f64 * 0.01);
                let cost: f64 = rx
                    .iter()
                    .zip(&d)
                    .map(|(r, di)| {
                        let e = cand.distance_to(&r.position) - di;
                        e * e
                    })
                    .sum();
                if cost < best.0 {
                    best = (cost, cand);
                }
            }
        }
        assert!(best.1.distance_to(&p) < 0.011);
    }

    #[test]
    fn inconsistent_distances_still_yield_the_radical_center() {
        // Distances (5, 5, 2) from (0,0), (4,0), (2,4) fit no single point, but
        // the radical center still exists. Solving the axis equations by hand:
        // axis(1,2): 8x = 16 → x = 2; axis(1,3): 4x + 8y = 41 → y = 33/8.
        let rx = receivers3([(0.0, 0.0), (4.0, 0.0), (2.0, 4.0)]);
        let p = trilaterate(&rx, &[5.0, 5.0, 2.0]).unwrap();
        assert!((p.x - 2.0).abs() < 1e-12);
        assert!((p.y - 4.125).abs() < 1e-12);
    }

    #[test]
    fn coincident_receivers_are_rejected() {
        let rx = receivers3([(0.0, 0.0), (0.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(
            trilaterate(&rx, &[1.0, 1.0, 1.0]),
            Err(PositioningError::CoincidentReceivers { .. })
        ));
    }

    // -- simulate_ranging ----------------------------------------------------------

    #[test]
    fn zero_noise_gives_exact_tofs() {
        let rx = receivers3([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        let truth = Point2D::new(1.0, 1.0);
        let meas = simulate_ranging(truth, &rx, 343.0, 0.0, 1).unwrap();
        let expected = [2f64.sqrt(), 10f64.sqrt(), 5f64.sqrt()];
        for (m, d) in meas.iter().zip(expected) {
            assert!((m.tof - d / 343.0).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_gives_identical_measurements() {
        let rx = receivers3([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        let truth = Point2D::new(1.3, 2.7);
        let a = simulate_ranging(truth, &rx, 343.0, 1e-4, 99).unwrap();
        let b = simulate_ranging(truth, &rx, 343.0, 1e-4, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_ranging(truth, &rx, 343.0, 1e-4, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn small_noise_recovers_position_within_tolerance() {
        // Empirical closed loop: with 10 µs time-of-flight noise at 343 m/s
        // (≈3.4 mm per distance) the solved position stays within 5 cm of the
        // truth in at least 95 of 100 seeded trials.
        let rx = receivers3([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        let truth = Point2D::new(1.0, 1.0);
        let mut hits = 0;
        for seed in 0..100 {
            let meas = simulate_ranging(truth, &rx, 343.0, 1e-5, seed).unwrap();
            let d: Vec<f64> = meas
                .iter()
                .map(|m| tof_to_distance(m.tof, 343.0).unwrap())
                .collect();
            let p = trilaterate(&rx, &[d[0], d[1], d[2]]).unwrap();
            if p.distance_to(&truth) < 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "only {hits}/100 trials within 5 cm");
    }

    // -- property-based invariants ---------------------------------------------------

    /// Strategy: three receivers with pairwise separation ≥ 0.5 m and triangle
    /// area ≥ 0.25 m², plus a true point inside their bounding box.
    fn solvable_instance() -> impl Strategy<Value = ([(f64, f64); 3], (f64, f64))> {
        (
            (0.0f64..10.0, 0.0f64..10.0),
            (0.0f64..10.0, 0.0f64..10.0),
            (0.0f64..10.0, 0.0f64..10.0),
            (0.0f64..1.0, 0.0f64..1.0),
        )
            .prop_filter_map("degenerate triple", |(p1, p2, p3, t)| {
                let sep = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                if sep(p1, p2) < 0.5 || sep(p1, p3) < 0.5 || sep(p2, p3) < 0.5 {
                    return None;
                }
                let area = ((p2.0 - p1.0) * (p3.1 - p1.1) - (p3.0 - p1.0) * (p2.1 - p1.1)).abs() / 2.0;
                if area < 0.25 {
                    return None;
                }
                let min_x = p1.0.min(p2.0).min(p3.0);
                let max_x = p1.0.max(p2.0).max(p3.0);
                let min_y = p1.1.min(p2.1).min(p3.1);
                let max_y = p1.1.max(p2.1).max(p3.1);
                let truth = (min_x + t.0 * (max_x - min_x), min_y + t.1 * (max_y - min_y));
                Some(([p1, p2, p3], truth))
            })
    }

    proptest! {
        /// Exact distances always recover the true point to nanometer scale.
        #[test]
        fn exact_recovery((ps, truth) in solvable_instance()) {
            let rx = receivers3(ps);
            let truth = Point2D::new(truth.0, truth.1);
            let d: Vec<f64> = rx.iter().map(|r| truth.distance_to(&r.position)).collect();
            let p = trilaterate(&rx, &[d[0], d[1], d[2]]).unwrap();
            prop_assert!(p.distance_to(&truth) < 1e-9);
        }

        /// The three radical axes meet at one point: the residual of the
        /// third axis at the solved point stays below the concurrency bound.
        #[test]
        fn axes_concur((ps, truth) in solvable_instance()) {
            let truth = Point2D::new(truth.0, truth.1);
            let circles: Vec<Circle> = ps
                .iter()
                .map(|&(x, y)| {
                    let center = Point2D::new(x, y);
                    Circle::new(center, truth.distance_to(&center)).unwrap()
                })
                .collect();
            let p = radical_center(&circles[0], &circles[1], &circles[2]).unwrap();
            let l23 = radical_axis(&circles[1], &circles[2]).unwrap();
            prop_assert!(l23.distance_to(&p) < 1e-6);
        }

        /// The three axis equations are linearly dependent: the coefficients
        /// of axis(1,2) + axis(2,3) + axis(3,1) sum to zero.
        #[test]
        fn axis_equations_sum_to_zero(
            (ps, _) in solvable_instance(),
            r1 in 0.1f64..20.0,
            r2 in 0.1f64..20.0,
            r3 in 0.1f64..20.0,
        ) {
            let c1 = circle(ps[0].0, ps[0].1, r1);
            let c2 = circle(ps[1].0, ps[1].1, r2);
            let c3 = circle(ps[2].0, ps[2].1, r3);
            let l12 = radical_axis(&c1, &c2).unwrap();
            let l23 = radical_axis(&c2, &c3).unwrap();
            let l31 = radical_axis(&c3, &c1).unwrap();
            let scale = [l12, l23, l31]
                .iter()
                .flat_map(|l| [l.a.abs(), l.b.abs(), l.c.abs()])
                .fold(1.0f64, f64::max);
            prop_assert!((l12.a + l23.a + l31.a).abs() <= 1e-9 * scale);
            prop_assert!((l12.b + l23.b + l31.b).abs() <= 1e-9 * scale);
            prop_assert!((l12.c + l23.c + l31.c).abs() <= 1e-9 * scale);
        }

        /// Permuting the (receiver, distance) pairs does not move the result.
        #[test]
        fn permutation_invariance((ps, truth) in solvable_instance(), perm in 0usize..6) {
            let rx = receivers3(ps);
            let truth = Point2D::new(truth.0, truth.1);
            let d: Vec<f64> = rx.iter().map(|r| truth.distance_to(&r.position)).collect();
            let base = trilaterate(&rx, &[d[0], d[1], d[2]]).unwrap();
            let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let o = orders[perm];
            let rx_p = [rx[o[0]].clone(), rx[o[1]].clone(), rx[o[2]].clone()];
            let d_p = [d[o[0]], d[o[1]], d[o[2]]];
            let p = trilaterate(&rx_p, &d_p).unwrap();
            prop_assert!(p.distance_to(&base) < 1e-9);
        }
    }
}
