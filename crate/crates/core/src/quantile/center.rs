//! Center submanifolds `M0` of the uniform reference measure, the normal
//! directions leaving them, and the radius profiles that give every level
//! set uniform content `tau`.

use rand::Rng;

use super::latitude::{cap_content, latitude_profile};
use super::QuantileError;
use crate::geometry::{gaussian_unit, householder_frame, wrap_angle, ManifoldPoint, ManifoldSpec};
use crate::Real;

/// Which uniform-measure regions the quantile regions are images of.
#[derive(Clone, Debug, PartialEq)]
pub enum CenterSpec<T> {
    /// Geodesic caps around `pole` on `S^p`, or hypercubes around `pole` on `T^p`.
    Cap { pole: ManifoldPoint<T> },
    /// Bands around the equator of factor `factor` relative to that factor of
    /// `center`; the other factors are left free.
    Strip { factor: usize, center: ManifoldPoint<T> },
    /// Bands `[a - pi tau, a + pi tau]` in circle factor `component`, all
    /// other factors free.
    TorusEquator { component: usize, angle: T },
    /// Caps around the `factor` component of `pole`, all other factors free.
    PolyCap { factor: usize, pole: ManifoldPoint<T> },
}

/// How Step 1 turns the image of the central observation into a center.
#[derive(Clone, Debug, PartialEq)]
pub enum CenterRule<T> {
    FrechetCap,
    /// Strip on a factor; on a circle factor this is a torus equator.
    FrechetStrip(usize),
    FrechetPolyCap(usize),
    FixedCenter(CenterSpec<T>),
}

impl<T: Real> CenterRule<T> {
    pub fn center_at(&self, spec: &ManifoldSpec, g: &ManifoldPoint<T>) -> Result<CenterSpec<T>, QuantileError> {
        let c = match self {
            CenterRule::FrechetCap => CenterSpec::Cap { pole: g.clone() },
            CenterRule::FrechetStrip(k) => {
                check_factor(spec, *k)?;
                if spec.dims()[*k] == 1 {
                    let y = spec.factor(g, *k);
                    CenterSpec::TorusEquator { component: *k, angle: wrap_angle(y[1].atan2(y[0])) }
                } else {
                    CenterSpec::Strip { factor: *k, center: g.clone() }
                }
            }
            CenterRule::FrechetPolyCap(k) => CenterSpec::PolyCap { factor: *k, pole: g.clone() },
            CenterRule::FixedCenter(c) => c.clone(),
        };
        Shape::resolve(spec, &c)?;
        Ok(c)
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, CenterRule::FixedCenter(_))
    }
}

impl<T: Real> CenterSpec<T> {
    /// Uniform content of the smallest region of this family containing `y`.
    pub fn content(&self, spec: &ManifoldSpec, y: &ManifoldPoint<T>) -> Result<f64, QuantileError> {
        Ok(Shape::resolve(spec, self)?.content(spec, y))
    }

    /// Radius parameter `t(tau)` such that `exp_y(t v)` lies on the level-`tau` contour.
    pub fn profile(&self, spec: &ManifoldSpec, tau: f64) -> Result<f64, QuantileError> {
        Shape::resolve(spec, self)?.profile(tau)
    }
}

fn check_factor(spec: &ManifoldSpec, k: usize) -> Result<(), QuantileError> {
    if k >= spec.num_factors() {
        return Err(QuantileError::UnsupportedCenter(format!("factor {k} out of range for {spec}")));
    }
    Ok(())
}

pub(crate) enum Shape<T> {
    SphereCap { p: usize, pole: Vec<T>, frame: Vec<Vec<T>> },
    TorusCap { k: usize, angles: Vec<T> },
    Band { factor: usize, p: usize, pole: Vec<T>, frame: Vec<Vec<T>>, strip: bool },
}

/// One generating pair of a grid point: the base on `M0`, the normal
/// direction (with its natural length), and the slot it came from.
pub(crate) struct Ray<T> {
    pub base: Vec<T>,
    pub direction: Vec<T>,
}

fn unit_of<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    v.iter().map(|x| *x / n).collect()
}

fn circle<T: Real>(theta: T) -> [T; 2] {
    [theta.cos(), theta.sin()]
}

impl<T: Real> Shape<T> {
    pub fn resolve(spec: &ManifoldSpec, c: &CenterSpec<T>) -> Result<Self, QuantileError> {
        let sphere_cap = |pole: &[T]| {
            let p = pole.len() - 1;
            let pole = unit_of(pole);
            let frame = householder_frame(&pole).into_iter().take(p).collect();
            Shape::SphereCap { p, pole, frame }
        };
        match c {
            CenterSpec::Cap { pole } => {
                spec.check(pole)?;
                if spec.is_sphere() {
                    Ok(sphere_cap(pole.coords()))
                } else if spec.is_torus() {
                    Ok(Shape::TorusCap { k: spec.num_factors(), angles: spec.angles(pole)? })
                } else {
                    Err(QuantileError::UnsupportedCenter(format!(
                        "caps on {spec} are not defined; use a polyspherical cap or strip"
                    )))
                }
            }
            CenterSpec::PolyCap { factor, pole } => {
                check_factor(spec, *factor)?;
                spec.check(pole)?;
                let y = spec.factor(pole, *factor);
                if spec.num_factors() == 1 {
                    return Ok(sphere_cap(y));
                }
                let p = spec.dims()[*factor];
                let pole = unit_of(y);
                let frame = householder_frame(&pole).into_iter().take(p).collect();
                Ok(Shape::Band { factor: *factor, p, pole, frame, strip: false })
            }
            CenterSpec::TorusEquator { component, angle } => {
                check_factor(spec, *component)?;
                if spec.dims()[*component] != 1 {
                    return Err(QuantileError::UnsupportedCenter(format!(
                        "factor {component} of {spec} is not a circle"
                    )));
                }
                let pole = circle(*angle).to_vec();
                if spec.num_factors() == 1 {
                    let frame = vec![vec![-pole[1], pole[0]]];
                    return Ok(Shape::SphereCap { p: 1, pole, frame });
                }
                let frame = vec![vec![-pole[1], pole[0]]];
                Ok(Shape::Band { factor: *component, p: 1, pole, frame, strip: false })
            }
            CenterSpec::Strip { factor, center } => {
                check_factor(spec, *factor)?;
                spec.check(center)?;
                let p = spec.dims()[*factor];
                if p < 2 {
                    return Err(QuantileError::UnsupportedCenter(
                        "strips on a circle factor are torus equators".into(),
                    ));
                }
                let pole = unit_of(spec.factor(center, *factor));
                let frame = householder_frame(&pole).into_iter().take(p).collect();
                Ok(Shape::Band { factor: *factor, p, pole, frame, strip: true })
            }
        }
    }

    pub fn profile(&self, tau: f64) -> Result<f64, QuantileError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(QuantileError::TauOutOfRange(tau));
        }
        Ok(match self {
            Shape::SphereCap { p, .. } => latitude_profile(*p, tau)?,
            Shape::TorusCap { k, .. } => tau.powf(1.0 / *k as f64),
            Shape::Band { p, strip: true, .. } => 1.0 - 2.0 * latitude_profile(*p, (1.0 - tau) / 2.0)?,
            Shape::Band { p, strip: false, .. } => latitude_profile(*p, tau)?,
        })
    }

    pub fn content(&self, spec: &ManifoldSpec, y: &ManifoldPoint<T>) -> f64 {
        let pi = std::f64::consts::PI;
        match self {
            Shape::SphereCap { p, pole, .. } => {
                let d = crate::geometry::arc(pole, y.coords()).f64();
                cap_content(*p, d / pi)
            }
            Shape::TorusCap { k, angles } => {
                let a = spec.angles(y).expect("torus point");
                let r = a
                    .iter()
                    .zip(angles)
                    .map(|(x, c)| wrap_angle(*x - *c).abs().f64())
                    .fold(0.0, f64::max);
                (r / pi).powi(*k as i32).min(1.0)
            }
            Shape::Band { factor, p, pole, strip, .. } => {
                let d = crate::geometry::arc(pole, spec.factor(y, *factor)).f64();
                let c = cap_content(*p, d / pi);
                if *strip {
                    (1.0 - 2.0 * c).abs()
                } else {
                    c
                }
            }
        }
    }

    /// Intrinsic dimension of `M0`.
    pub fn center_dim(&self, spec: &ManifoldSpec) -> usize {
        match self {
            Shape::SphereCap { .. } | Shape::TorusCap { .. } => 0,
            Shape::Band { p, strip, .. } => {
                spec.intrinsic_dim() - p + if *strip { p - 1 } else { 0 }
            }
        }
    }

    fn pole_point(&self) -> Vec<T> {
        match self {
            Shape::SphereCap { pole, .. } => pole.clone(),
            Shape::TorusCap { angles, .. } => angles.iter().flat_map(|a| circle(*a)).collect(),
            Shape::Band { .. } => unreachable!("bands have no single pole"),
        }
    }

    /// Base point of `M0` for a band, given the free coordinates.
    fn band_base<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, rng: &mut R, theta: Option<T>) -> Vec<T> {
        let Shape::Band { factor, p, pole, frame, strip } = self else { unreachable!() };
        let mut y = vec![T::zero(); spec.ambient_dim()];
        let mut theta = theta;
        for k in 0..spec.num_factors() {
            let r = spec.factor_range(k);
            if k == *factor {
                let v: Vec<T> = if *strip {
                    let xi: Vec<T> = match theta.take() {
                        Some(t) if *p == 2 => circle(t).to_vec(),
                        _ => gaussian_unit(*p, rng),
                    };
                    let mut e = vec![T::zero(); p + 1];
                    for (c, col) in xi.iter().zip(frame) {
                        for (ei, ci) in e.iter_mut().zip(col) {
                            *ei += *c * *ci;
                        }
                    }
                    unit_of(&e)
                } else {
                    pole.clone()
                };
                y[r].copy_from_slice(&v);
            } else {
                let v: Vec<T> = match theta.take() {
                    Some(t) if spec.dims()[k] == 1 => circle(t).to_vec(),
                    _ => gaussian_unit(spec.dims()[k] + 1, rng),
                };
                y[r].copy_from_slice(&v);
            }
        }
        y
    }

    /// Points of `M0` used for ring 0.
    pub fn center_points<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, n0: usize, equi: bool, rng: &mut R) -> Vec<Vec<T>> {
        if self.center_dim(spec) == 0 {
            let pole = match self {
                Shape::Band { .. } => self.band_base(spec, rng, None),
                _ => self.pole_point(),
            };
            return vec![pole; n0];
        }
        let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        (0..n0)
            .map(|m| {
                let theta = if equi {
                    Some(T::lit(phase + std::f64::consts::TAU * m as f64 / n0 as f64))
                } else {
                    None
                };
                self.band_base(spec, rng, theta)
            })
            .collect()
    }

    /// Uniformly random generating pair on the contour family.
    pub fn random_ray<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, rng: &mut R) -> Ray<T> {
        let pi = T::PI();
        match self {
            Shape::SphereCap { p, frame, .. } => {
                let xi: Vec<T> = gaussian_unit(*p, rng);
                Ray { base: self.pole_point(), direction: combine(&xi, frame, pi) }
            }
            Shape::TorusCap { k, angles } => {
                let face = rng.random_range(0..2 * k);
                let vals: Vec<T> = (0..*k)
                    .map(|j| {
                        if j == face / 2 {
                            if face % 2 == 0 {
                                pi
                            } else {
                                -pi
                            }
                        } else {
                            T::lit(rng.random::<f64>() * 2.0 - 1.0) * pi
                        }
                    })
                    .collect();
                torus_ray(angles, &vals)
            }
            Shape::Band { p, frame, pole, strip, factor } => {
                let base = self.band_base(spec, rng, None);
                let dir_f = if *strip {
                    let s = if rng.random::<bool>() { T::one() } else { -T::one() };
                    pole.iter().map(|x| *x * s * pi / (T::one() + T::one())).collect()
                } else {
                    let xi: Vec<T> = gaussian_unit(*p, rng);
                    combine(&xi, frame, pi)
                };
                Ray { base: base.clone(), direction: embed(spec, *factor, &dir_f) }
            }
        }
    }

    /// Deterministic generating pair number `slot` of `n_s` for contours of
    /// dimension at most one. Two-sheet contours alternate sheets.
    pub fn equispaced_ray<R: Rng + ?Sized>(&self, spec: &ManifoldSpec, slot: usize, n_s: usize, phase: f64, rng: &mut R) -> Ray<T> {
        let pi = T::PI();
        let tau = std::f64::consts::TAU;
        let two_sheet = |slot: usize| {
            let side = slot % 2;
            let count = if side == 0 { n_s.div_ceil(2) } else { n_s / 2 };
            let m = slot / 2;
            (side, T::lit(phase + tau * m as f64 / count.max(1) as f64))
        };
        match self {
            Shape::SphereCap { p: 1, frame, .. } => {
                let s = if slot % 2 == 0 { pi } else { -pi };
                Ray { base: self.pole_point(), direction: frame[0].iter().map(|x| *x * s).collect() }
            }
            Shape::SphereCap { frame, .. } => {
                let th = T::lit(phase + tau * slot as f64 / n_s as f64);
                let xi = circle(th);
                Ray { base: self.pole_point(), direction: combine(&xi, frame, pi) }
            }
            Shape::TorusCap { k: 1, angles } => {
                let s = if slot % 2 == 0 { pi } else { -pi };
                torus_ray(angles, &[s])
            }
            Shape::TorusCap { angles, .. } => {
                let u = (phase / tau + slot as f64 / n_s as f64).fract() * 4.0;
                let e = (u.floor() as usize).min(3);
                let f = T::lit(u - e as f64);
                let corners = [(1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
                let (a, b) = (corners[e], corners[e + 1]);
                let x = T::lit(a.0) + f * T::lit(b.0 - a.0);
                let y = T::lit(a.1) + f * T::lit(b.1 - a.1);
                torus_ray(angles, &[x * pi, y * pi])
            }
            Shape::Band { pole, frame, strip, factor, .. } => {
                let (side, theta) = two_sheet(slot);
                let s = if side == 0 { T::one() } else { -T::one() };
                let base = self.band_base(spec, rng, Some(theta));
                let dir_f: Vec<T> = if *strip {
                    pole.iter().map(|x| *x * s * pi / (T::one() + T::one())).collect()
                } else {
                    frame[0].iter().map(|x| *x * s * pi).collect()
                };
                Ray { base, direction: embed(spec, *factor, &dir_f) }
            }
        }
    }
}

fn combine<T: Real>(xi: &[T], frame: &[Vec<T>], len: T) -> Vec<T> {
    let mut v = vec![T::zero(); frame[0].len()];
    for (c, col) in xi.iter().zip(frame) {
        for (vi, ci) in v.iter_mut().zip(col) {
            *vi += *c * *ci;
        }
    }
    let n = v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    v.iter().map(|x| *x * len / n).collect()
}

fn embed<T: Real>(spec: &ManifoldSpec, factor: usize, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); spec.ambient_dim()];
    out[spec.factor_range(factor)].copy_from_slice(v);
    out
}

fn torus_ray<T: Real>(angles: &[T], vals: &[T]) -> Ray<T> {
    let mut base = Vec::with_capacity(2 * angles.len());
    let mut direction = Vec::with_capacity(2 * angles.len());
    for (a, v) in angles.iter().zip(vals) {
        let [c, s] = circle(*a);
        base.extend([c, s]);
        direction.extend([-s * *v, c * *v]);
    }
    Ray { base, direction }
}
