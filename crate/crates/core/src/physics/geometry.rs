//! Object shapes and point queries against them.

use serde::{Deserialize, Serialize};

use super::PhysicsError;
use crate::math::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { radius: f64 },
    Box { width: f64, height: f64 },
    /// Regular polygon with one edge facing +x in the body frame.
    RegularPolygon { sides: u32, circumradius: f64 },
}

impl Shape {
    fn validate(&self) -> Result<(), PhysicsError> {
        let ok = match *self {
            Shape::Disk { radius } => radius > 0.0 && radius.is_finite(),
            Shape::Box { width, height } => {
                width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()
            }
            Shape::RegularPolygon {
                sides,
                circumradius,
            } => sides >= 3 && circumradius > 0.0 && circumradius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(PhysicsError::InvalidConfig(format!(
                "shape dimensions must be positive: {self:?}"
            )))
        }
    }

    /// Polar moment of inertia about the centroid for a uniform lamina.
    pub fn unit_inertia(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => 0.5 * radius * radius,
            Shape::Box { width, height } => (width * width + height * height) / 12.0,
            Shape::RegularPolygon {
                sides,
                circumradius,
            } => {
                let n = sides as f64;
                let r2 = circumradius * circumradius;
                r2 / 6.0 * (1.0 + 2.0 * (std::f64::consts::PI / n).cos().powi(2))
            }
        }
    }

    /// Half extent along the body-frame x axis.
    pub fn half_width(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => radius,
            Shape::Box { width, .. } => 0.5 * width,
            Shape::RegularPolygon {
                sides,
                circumradius,
            } => circumradius * (std::f64::consts::PI / sides as f64).cos(),
        }
    }

    /// Counter-clockwise vertices in the body frame (empty for disks).
    pub fn vertices(&self) -> Vec<Vec2> {
        match *self {
            Shape::Disk { .. } => Vec::new(),
            Shape::Box { width, height } => {
                let (hw, hh) = (0.5 * width, 0.5 * height);
                vec![
                    Vec2::new(hw, -hh),
                    Vec2::new(hw, hh),
                    Vec2::new(-hw, hh),
                    Vec2::new(-hw, -hh),
                ]
            }
            Shape::RegularPolygon {
                sides,
                circumradius,
            } => {
                let step = std::f64::consts::TAU / sides as f64;
                (0..sides)
                    .map(|i| Vec2::from_angle(-0.5 * step + i as f64 * step) * circumradius)
                    .collect()
            }
        }
    }

    /// Signed distance from a body-frame point to the boundary (negative inside),
    /// with the outward unit normal at the closest boundary point.
    pub fn signed_distance(&self, p: Vec2) -> (f64, Vec2) {
        match *self {
            Shape::Disk { radius } => {
                let n = p.normalized().unwrap_or(Vec2::new(1.0, 0.0));
                (p.norm() - radius, n)
            }
            _ => polygon_signed_distance(&self.vertices(), p),
        }
    }

    /// Distance from the centroid to the boundary along a body-frame ray.
    pub fn ray_extent(&self, dir: Vec2) -> f64 {
        match *self {
            Shape::Disk { radius } => radius,
            _ => {
                let verts = self.vertices();
                let mut best = f64::INFINITY;
                for i in 0..verts.len() {
                    let a = verts[i];
                    let b = verts[(i + 1) % verts.len()];
                    let n = (b - a).perp() * -1.0;
                    let n = n.normalized().expect("non-degenerate edge");
                    let denom = dir.dot(n);
                    if denom > 1e-12 {
                        best = best.min(a.dot(n) / denom);
                    }
                }
                best
            }
        }
    }
}

fn polygon_signed_distance(verts: &[Vec2], p: Vec2) -> (f64, Vec2) {
    let mut inside = true;
    let mut max_plane = f64::NEG_INFINITY;
    let mut max_normal = Vec2::new(1.0, 0.0);
    let mut min_dist = f64::INFINITY;
    let mut min_normal = Vec2::new(1.0, 0.0);
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let edge = b - a;
        // CCW winding: outward normal is the clockwise perpendicular.
        let outward = Vec2::new(edge.y, -edge.x)
            .normalized()
            .expect("non-degenerate edge");
        let plane = (p - a).dot(outward);
        if plane > 0.0 {
            inside = false;
        }
        if plane > max_plane {
            max_plane = plane;
            max_normal = outward;
        }
        let t = ((p - a).dot(edge) / edge.norm_sq()).clamp(0.0, 1.0);
        let closest = a + edge * t;
        let d = (p - closest).norm();
        if d < min_dist {
            min_dist = d;
            min_normal = (p - closest).normalized().unwrap_or(outward);
        }
    }
    if inside {
        (max_plane, max_normal)
    } else {
        (min_dist, min_normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn to_body(&self, world: Vec2) -> Vec2 {
        (world - self.position()).rotate(-self.theta)
    }

    pub fn to_world(&self, body: Vec2) -> Vec2 {
        body.rotate(self.theta) + self.position()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist {
    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    /// Velocity of a material point at world offset `r` from the centroid.
    pub fn point_velocity(&self, r: Vec2) -> Vec2 {
        self.linear() + r.perp() * self.omega
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.omega.is_finite()
    }
}

/// Rigid object description. Friction is a single coefficient shared by all faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub shape: Shape,
    pub mass: f64,
    /// Overrides the uniform-lamina inertia when set.
    #[serde(default)]
    pub inertia: Option<f64>,
    pub friction: f64,
    #[serde(default)]
    pub initial_pose: Pose,
}

impl ObjectSpec {
    pub fn new(name: impl Into<String>, shape: Shape, mass: f64, friction: f64) -> Self {
        Self {
            name: name.into(),
            shape,
            mass,
            inertia: None,
            friction,
            initial_pose: Pose::default(),
        }
    }

    pub fn moment_of_inertia(&self) -> f64 {
        self.inertia
            .unwrap_or_else(|| self.mass * self.shape.unit_inertia())
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        self.shape.validate()?;
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(PhysicsError::InvalidConfig(format!(
                "object mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.friction > 0.0 && self.friction.is_finite()) {
            return Err(PhysicsError::InvalidConfig(format!(
                "friction coefficient must be positive, got {}",
                self.friction
            )));
        }
        let inertia = self.moment_of_inertia();
        if !(inertia > 0.0 && inertia.is_finite()) {
            return Err(PhysicsError::InvalidConfig(format!(
                "moment of inertia must be positive, got {inertia}"
            )));
        }
        Ok(())
    }
}
