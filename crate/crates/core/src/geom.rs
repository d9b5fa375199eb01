//! Small fixed-size vector used for all coordinates.
//!
//! Two-dimensional scenes are embedded in the plane `z = 0`; every distance
//! formula in the crate is then valid for both ambient dimensions.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Unit vector along axis `i`.
    pub fn axis(i: usize) -> Self {
        let mut v = Self::zero();
        v.set(i, T::one());
        v
    }

    /// Builds a vector from 2 or 3 coordinates; missing `z` is zero.
    pub fn from_slice(c: &[T]) -> Option<Self> {
        match *c {
            [x, y] => Some(Self::new(x, y, T::zero())),
            [x, y, z] => Some(Self::new(x, y, z)),
            _ => None,
        }
    }

    pub fn from_f64_slice(c: &[f64]) -> Option<Self> {
        let v: Vec<T> = c.iter().map(|&x| lit(x)).collect();
        Self::from_slice(&v)
    }

    /// First `dim` coordinates as `f64`.
    pub fn to_f64_vec(&self, dim: usize) -> Vec<f64> {
        (0..dim).map(|i| to_f64(self[i])).collect()
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        self[i]
    }

    pub fn set(&mut self, i: usize, v: T) {
        match i {
            0 => self.x = v,
            1 => self.y = v,
            2 => self.z = v,
            _ => panic!("axis index {i} out of range"),
        }
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    #[inline]
    pub fn l1_dist(&self, o: &Self) -> T {
        (self.x - o.x).abs() + (self.y - o.y).abs() + (self.z - o.z).abs()
    }

    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(*self / n)
        } else {
            None
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn zip(&self, o: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self::new(f(self.x, o.x), f(self.y, o.y), f(self.z, o.z))
    }

    pub fn lerp(&self, o: &Self, t: T) -> Self {
        *self + (*o - *self) * t
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(&self) -> Self {
        let a = self.map(|c| c.abs());
        let pick = if a.x <= a.y && a.x <= a.z {
            Self::axis(0)
        } else if a.y <= a.z {
            Self::axis(1)
        } else {
            Self::axis(2)
        };
        self.cross(&pick).normalized().unwrap_or_else(|| Self::axis(0))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Lexicographic order on coordinates.
    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        for i in 0..3 {
            match self[i].partial_cmp(&o[i]) {
                Some(Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        Ordering::Equal
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Axis-aligned box, used for extraction windows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> AxisBox<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    /// Cube (or square when `dim == 2`) of half-width `h` centered at `c`.
    pub fn centered(c: Vec3<T>, h: T, dim: usize) -> Self {
        let mut min = c;
        let mut max = c;
        for i in 0..dim {
            min.set(i, c[i] - h);
            max.set(i, c[i] + h);
        }
        Self { min, max }
    }

    pub fn extent(&self, i: usize) -> T {
        self.max[i] - self.min[i]
    }

    pub fn is_valid(&self, dim: usize) -> bool {
        (0..dim).all(|i| self.max[i] > self.min[i] && self.min[i].is_finite() && self.max[i].is_finite())
    }

    pub fn contains(&self, p: &Vec3<T>, dim: usize) -> bool {
        (0..dim).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Smallest distance from `p` to the box boundary (negative outside).
    pub fn inner_margin(&self, p: &Vec3<T>, dim: usize) -> T {
        (0..dim)
            .map(|i| (p[i] - self.min[i]).min(self.max[i] - p[i]))
            .fold(T::infinity(), T::min)
    }
}

/// Three orthonormal vectors `(a, e1, e2)` completing a unit axis `a`.
pub fn orthonormal_frame<T: Real>(a: Vec3<T>) -> (Vec3<T>, Vec3<T>, Vec3<T>) {
    let e1 = a.any_orthogonal();
    let e2 = a.cross(&e1);
    (a, e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_and_dot() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(a.cross(&b), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(a.dot(&b), 0.0);
        assert_eq!(Vec3::new(3.0, 4.0, 0.0).norm(), 5.0);
    }

    #[test]
    fn orthogonal_is_unit_and_perpendicular() {
        for v in [
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(-1.0, 0.0, 0.0),
        ] {
            let o = v.any_orthogonal();
            assert!((o.norm() - 1.0f64).abs() < 1e-14);
            assert!(o.dot(&v).abs() < 1e-14);
        }
    }

    #[test]
    fn two_coordinates_embed_in_plane() {
        let v = Vec3::<f64>::from_slice(&[1.0, 2.0]).unwrap();
        assert_eq!(v.z, 0.0);
        assert!(Vec3::<f64>::from_slice(&[1.0]).is_none());
    }
}
