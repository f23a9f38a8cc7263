//! Minimal 3-vector arithmetic for mesh geometry.

use core::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// The north-south axis; the north pole sits at `+NORTH`.
    pub const NORTH: Vec3 = Vec3::new(0.0, 1.0, 0.0);

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    #[inline]
    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    /// Azimuth in `[-pi, pi)` measured in the x-z plane, `atan2(z, x)`.
    pub fn azimuth(self) -> f64 {
        let a = libm::atan2(self.z, self.x);
        if a >= core::f64::consts::PI {
            a - 2.0 * core::f64::consts::PI
        } else {
            a
        }
    }

    /// Polar angle from the north pole, in `[0, pi]`.
    pub fn zenith(self) -> f64 {
        libm::acos((self.y / self.norm()).clamp(-1.0, 1.0))
    }

    /// Unit vector from azimuth and zenith angles.
    pub fn from_angles(azimuth: f64, zenith: f64) -> Vec3 {
        let s = libm::sin(zenith);
        Vec3::new(s * libm::cos(azimuth), libm::cos(zenith), s * libm::sin(azimuth))
    }

    /// Rotation about the north axis by `angle` radians (increasing azimuth).
    pub fn rotate_about_axis(self, angle: f64) -> Vec3 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Vec3::new(c * self.x - s * self.z, self.y, s * self.x + c * self.z)
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}
