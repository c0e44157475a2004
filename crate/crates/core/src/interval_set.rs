//! Finite unions of disjoint closed real intervals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidBand { a: lo, b: hi });
        }
        Ok(Band { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// A normalized set `E`: nonempty, sorted, pairwise disjoint closed bands
/// separated by gaps of positive length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct IntervalSet {
    bands: Vec<Band>,
}

impl IntervalSet {
    /// Sorts the bands and merges overlapping or touching ones.
    pub fn normalize(raw: &[(f64, f64)]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut bands = raw
            .iter()
            .map(|&(a, b)| Band::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        bands.sort_by(|x, y| x.lo.total_cmp(&y.lo));

        let mut merged: Vec<Band> = Vec::with_capacity(bands.len());
        for band in bands {
            match merged.last_mut() {
                Some(last) if band.lo <= last.hi => last.hi = last.hi.max(band.hi),
                _ => merged.push(band),
            }
        }
        Ok(IntervalSet { bands: merged })
    }

    /// A single interval.
    pub fn segment(lo: f64, hi: f64) -> Result<Self> {
        Self::normalize(&[(lo, hi)])
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Number of bands `m`.
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Gaps `(b_j, a_{j+1})` between consecutive bands.
    pub fn gaps(&self) -> impl Iterator<Item = Band> + '_ {
        self.bands.windows(2).map(|w| Band {
            lo: w[0].hi,
            hi: w[1].lo,
        })
    }

    /// The smallest interval containing the set, `[a_1, b_m]`.
    pub fn carrier(&self) -> Band {
        Band {
            lo: self.bands[0].lo,
            hi: self.bands[self.bands.len() - 1].hi,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.carrier().len()
    }

    pub fn total_length(&self) -> f64 {
        self.bands.iter().map(Band::len).sum()
    }

    /// All `2m` endpoints in increasing order.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.bands.iter().flat_map(|b| [b.lo, b.hi])
    }

    pub fn contains(&self, x: f64) -> bool {
        self.band_index(x).is_some()
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b.interior_contains(x))
    }

    /// Index of the band containing `x`, if any.
    pub fn band_index(&self, x: f64) -> Option<usize> {
        // bands are sorted, so the candidate is the last band starting at or before x
        let idx = self.bands.partition_point(|b| b.lo <= x);
        if idx == 0 {
            return None;
        }
        self.bands[idx - 1].contains(x).then_some(idx - 1)
    }

    /// Distance from `x` to the nearest endpoint of the set.
    pub fn endpoint_distance(&self, x: f64) -> (f64, f64) {
        self.endpoints()
            .map(|e| (e, (x - e).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty set")
    }

    /// Cosine-spaced nodes on each band, endpoints included, sorted.
    pub fn chebyshev_grid(&self, points_per_band: usize) -> Vec<f64> {
        let n = points_per_band.max(2);
        let mut out = Vec::with_capacity(n * self.bands.len());
        for band in &self.bands {
            let (c, h) = (band.mid(), band.half_width());
            out.push(band.lo);
            for k in 1..n - 1 {
                let theta = PI * k as f64 / (n - 1) as f64;
                out.push(c - h * theta.cos());
            }
            out.push(band.hi);
        }
        out
    }

    /// The image `s·E + t` for `s > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::param("scale", "must be positive"));
        }
        let raw: Vec<_> = self
            .bands
            .iter()
            .map(|b| (scale * b.lo + shift, scale * b.hi + shift))
            .collect();
        Self::normalize(&raw)
    }

    /// True if the reflection `x ↦ 2·center − x` maps the set onto itself.
    pub fn is_symmetric_about(&self, center: f64, tol: f64) -> bool {
        let m = self.bands.len();
        (0..m).all(|j| {
            let b = &self.bands[j];
            let r = &self.bands[m - 1 - j];
            (b.lo - (2.0 * center - r.hi)).abs() <= tol
                && (b.hi - (2.0 * center - r.lo)).abs() <= tol
        })
    }

    /// True if every band of `self` lies inside some band of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.bands
            .iter()
            .all(|b| other.bands.iter().any(|o| o.lo <= b.lo && b.hi <= o.hi))
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| (b.lo, b.hi)).collect()
    }
}

impl TryFrom<Vec<(f64, f64)>> for IntervalSet {
    type Error = Error;

    fn try_from(raw: Vec<(f64, f64)>) -> Result<Self> {
        Self::normalize(&raw)
    }
}

impl From<IntervalSet> for Vec<(f64, f64)> {
    fn from(set: IntervalSet) -> Self {
        set.to_pairs()
    }
}

/// Parses `"a1,b1;a2,b2;..."`.
impl FromStr for IntervalSet {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: String| Error::Parse {
            spec: spec.to_string(),
            reason,
        };
        let mut raw = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let ends: Vec<&str> = part.split(',').map(str::trim).collect();
            if ends.len() != 2 {
                return Err(fail(format!("expected `a,b`, found {part:?}")));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| fail(format!("bad number {s:?}: {e}")))
            };
            raw.push((parse(ends[0])?, parse(ends[1])?));
        }
        Self::normalize(&raw)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bands.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{}", b.lo, b.hi)?;
        }
        Ok(())
    }
}

/// Generator parameters of a middle-gap exhaustion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorParams {
    pub ratio: f64,
    pub carrier: (f64, f64),
}

/// Nested sets `E_0 ⊇ E_1 ⊇ ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionSequence {
    pub levels: Vec<IntervalSet>,
    pub generator: Option<CantorParams>,
}

impl ExhaustionSequence {
    /// Wraps explicit levels, checking the nesting.
    pub fn from_levels(levels: Vec<IntervalSet>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(k) = levels.windows(2).position(|w| !w[1].is_subset_of(&w[0])) {
            return Err(Error::param(
                "levels",
                format!("level {} is not contained in level {}", k + 1, k),
            ));
        }
        Ok(ExhaustionSequence {
            levels,
            generator: None,
        })
    }

    /// Levels `0..=levels` obtained by repeatedly deleting the open central
    /// fraction `ratio` of every band.
    pub fn cantor(ratio: f64, levels: usize, carrier: (f64, f64)) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::param("ratio", format!("{ratio} is outside (0, 1)")));
        }
        let mut current = vec![Band::new(carrier.0, carrier.1)?];
        let mut out = Vec::with_capacity(levels + 1);
        out.push(IntervalSet {
            bands: current.clone(),
        });
        for _ in 0..levels {
            let mut next = Vec::with_capacity(2 * current.len());
            for b in &current {
                let keep = 0.5 * (1.0 - ratio) * b.len();
                next.push(Band::new(b.lo, b.lo + keep)?);
                next.push(Band::new(b.hi - keep, b.hi)?);
            }
            out.push(IntervalSet {
                bands: next.clone(),
            });
            current = next;
        }
        Ok(ExhaustionSequence {
            levels: out,
            generator: Some(CantorParams { ratio, carrier }),
        })
    }

    /// The constant sequence repeating one set.
    pub fn constant(set: IntervalSet, count: usize) -> Self {
        ExhaustionSequence {
            levels: vec![set; count.max(1)],
            generator: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(raw: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::normalize(raw).unwrap()
    }

    #[test]
    fn normalize_merges_and_sorts() {
        let s = set(&[(-1.0, -0.2), (-0.5, 0.1), (0.4, 1.0)]);
        assert_eq!(s.to_pairs(), vec![(-1.0, 0.1), (0.4, 1.0)]);
        assert_eq!(set(&[(0.0, 1.0)]).to_pairs(), vec![(0.0, 1.0)]);
        let s = set(&[(0.4, 1.0), (-1.0, -0.5)]);
        assert_eq!(s.to_pairs(), vec![(-1.0, -0.5), (0.4, 1.0)]);
    }

    #[test]
    fn touching_bands_merge() {
        let s = set(&[(0.0, 1.0), (1.0, 2.0)]);
        assert_eq!(s.to_pairs(), vec![(0.0, 2.0)]);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert_eq!(IntervalSet::normalize(&[]), Err(Error::EmptySet));
        assert!(matches!(
            IntervalSet::normalize(&[(1.0, 1.0)]),
            Err(Error::InvalidBand { .. })
        ));
        assert!(IntervalSet::normalize(&[(0.0, 1.0), (3.0, 2.0)]).is_err());
        assert!(IntervalSet::normalize(&[(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn membership() {
        let e = set(&[(-1.0, 1.0)]);
        assert!(e.contains(1.0));
        assert!(!e.interior_contains(1.0));
        assert!(e.contains(0.0) && e.interior_contains(0.0));
        let two = set(&[(-1.0, -0.5), (0.5, 1.0)]);
        assert!(!two.contains(0.0));
        assert!(!two.interior_contains(0.0));
        assert_eq!(two.band_index(0.75), Some(1));
        assert_eq!(two.band_index(-2.0), None);
    }

    #[test]
    fn grid_examples() {
        let g = set(&[(-1.0, 1.0)]).chebyshev_grid(3);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0], -1.0);
        assert!(g[1].abs() < 1e-15);
        assert_eq!(g[2], 1.0);
        assert_eq!(set(&[(0.0, 1.0)]).chebyshev_grid(2), vec![0.0, 1.0]);
        let g = set(&[(-1.0, 0.0), (0.5, 1.0)]).chebyshev_grid(3);
        assert_eq!(g.len(), 6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cantor_examples() {
        let seq = ExhaustionSequence::cantor(1.0 / 3.0, 2, (0.0, 1.0)).unwrap();
        let expect = [
            (0.0, 1.0 / 9.0),
            (2.0 / 9.0, 1.0 / 3.0),
            (2.0 / 3.0, 7.0 / 9.0),
            (8.0 / 9.0, 1.0),
        ];
        for (got, want) in seq.levels[2].to_pairs().iter().zip(expect) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }
        let seq = ExhaustionSequence::cantor(1.0 / 3.0, 0, (0.0, 1.0)).unwrap();
        assert_eq!(seq.levels.len(), 1);
        assert_eq!(seq.levels[0].to_pairs(), vec![(0.0, 1.0)]);
        let seq = ExhaustionSequence::cantor(0.5, 1, (-1.0, 1.0)).unwrap();
        assert_eq!(seq.levels[1].to_pairs(), vec![(-1.0, -0.5), (0.5, 1.0)]);
        assert!(ExhaustionSequence::cantor(1.0, 1, (0.0, 1.0)).is_err());
        assert!(ExhaustionSequence::cantor(0.0, 1, (0.0, 1.0)).is_err());
    }

    #[test]
    fn parse_spec() {
        let e: IntervalSet = "-1,-0.5; 0.5,1".parse().unwrap();
        assert_eq!(e.to_pairs(), vec![(-1.0, -0.5), (0.5, 1.0)]);
        assert!("1,2,3".parse::<IntervalSet>().is_err());
        assert!("a,b".parse::<IntervalSet>().is_err());
        assert!("".parse::<IntervalSet>().is_err());
        assert_eq!(e.to_string().parse::<IntervalSet>().unwrap(), e);
    }

    #[test]
    fn symmetry_and_subsets() {
        let two = set(&[(-1.0, -0.5), (0.5, 1.0)]);
        assert!(two.is_symmetric_about(0.0, 1e-14));
        assert!(!two.is_symmetric_about(0.75, 1e-14));
        assert!(two.is_subset_of(&set(&[(-1.0, 1.0)])));
        assert!(!set(&[(-1.0, 1.0)]).is_subset_of(&two));
    }

    fn raw_bands() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-10.0f64..10.0, 0.001f64..3.0), 1..8)
            .prop_map(|v| v.into_iter().map(|(a, l)| (a, a + l)).collect())
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in raw_bands()) {
            let once = IntervalSet::normalize(&raw).unwrap();
            let twice = IntervalSet::normalize(&once.to_pairs()).unwrap();
            prop_assert_eq!(&once, &twice);
            for w in once.bands().windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
            for &(a, b) in &raw {
                prop_assert!(once.contains(a) && once.contains(b));
            }
        }

        #[test]
        fn grid_is_increasing_and_inside(raw in raw_bands(), n in 2usize..40) {
            let e = IntervalSet::normalize(&raw).unwrap();
            let g = e.chebyshev_grid(n);
            prop_assert_eq!(g.len(), n * e.len());
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(g.iter().all(|&x| e.contains(x)));
        }

        #[test]
        fn cantor_levels_nest(ratio in 0.05f64..0.95, levels in 0usize..6) {
            let seq = ExhaustionSequence::cantor(ratio, levels, (-1.0, 1.0)).unwrap();
            for (k, level) in seq.levels.iter().enumerate() {
                prop_assert_eq!(level.len(), 1 << k);
                let expect = (1.0 - ratio).powi(k as i32) * 2.0;
                prop_assert!((level.total_length() - expect).abs() < 1e-14);
            }
            for w in seq.levels.windows(2) {
                prop_assert!(w[1].is_subset_of(&w[0]));
            }
        }
    }
}
