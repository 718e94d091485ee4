use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular product grid over a box, one strictly increasing axis per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(Vec::is_empty) {
            return Err(Error::EmptyGrid);
        }
        for axis in &axes {
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput("grid axes must be finite and strictly increasing".into()));
            }
        }
        Ok(Self { axes })
    }

    /// `count` equispaced nodes on `[lo, hi]` per axis.
    pub fn uniform(bounds: &[(f64, f64, usize)]) -> Result<Self> {
        let axes = bounds.iter().map(|&(lo, hi, count)| linspace(lo, hi, count)).collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of node `index`; the last axis varies fastest, so node
    /// order is lexicographic in the coordinates.
    pub fn node(&self, mut index: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.dim()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            coords[k] = axis[index % axis.len()];
            index /= axis.len();
        }
        coords
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }
}

/// Parses `lo:hi:count[,lo:hi:count...]`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bounds = s
            .split(',')
            .map(|part| {
                let f: Vec<&str> = part.trim().split(':').collect();
                if f.len() != 3 {
                    return Err(Error::InvalidInput(format!("grid axis '{part}' is not lo:hi:count")));
                }
                let bad = |_| Error::InvalidInput(format!("cannot parse grid axis '{part}'"));
                Ok((f[0].parse().map_err(bad)?, f[1].parse().map_err(bad)?, f[2].parse().map_err(|_| Error::InvalidInput(format!("cannot parse grid axis '{part}'")))?))
            })
            .collect::<Result<Vec<(f64, f64, usize)>>>()?;
        Grid::uniform(&bounds)
    }
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    match count {
        0 => Err(Error::EmptyGrid),
        1 if lo == hi => Ok(vec![lo]),
        _ if !(lo < hi) => Err(Error::InvalidInput(format!("grid bounds must satisfy lo < hi, got {lo}, {hi}"))),
        1 => Ok(vec![0.5 * (lo + hi)]),
        _ => {
            let span = hi - lo;
            let last = (count - 1) as f64;
            Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + span * i as f64 / last }).collect())
        }
    }
}

/// Subset of a grid's nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    pub grid: Grid,
    pub mask: Vec<bool>,
}

impl GridSet {
    pub fn new(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::InvalidInput(format!("mask has {} entries for {} grid nodes", mask.len(), grid.len())));
        }
        Ok(Self { grid, mask })
    }

    pub fn from_predicate(grid: Grid, mut keep: impl FnMut(&[f64]) -> bool) -> Self {
        let mask = grid.nodes().map(|p| keep(&p)).collect();
        Self { grid, mask }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn members(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| self.grid.node(i))
    }

    /// Node-wise inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_pair(a: &GridSet, b: &GridSet) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::InvalidInput("set distance needs identical grids".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Directed distance `sup_{a in A} inf_{b in B} |a - b|` over masked nodes.
pub fn rho(a: &GridSet, b: &GridSet) -> Result<f64> {
    check_pair(a, b)?;
    let bs: Vec<Vec<f64>> = b.members().collect();
    Ok(a.members()
        .map(|p| bs.iter().map(|q| dist(&p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

pub fn hausdorff(a: &GridSet, b: &GridSet) -> Result<f64> {
    Ok(rho(a, b)?.max(rho(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(lo: f64, hi: f64, count: usize) -> Grid {
        Grid::uniform(&[(lo, hi, count)]).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let g = line(0.0, 1.0, 11);
        let a = GridSet::from_predicate(g.clone(), |_| true);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);

        let g = line(0.0, 1.0, 2);
        let a = GridSet::new(g.clone(), vec![true, false]).unwrap();
        let b = GridSet::new(g, vec![false, true]).unwrap();
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);

        let g = line(0.0, 3.0, 301);
        let a = GridSet::from_predicate(g.clone(), |p| p[0] <= 2.0 + 1e-9);
        let b = GridSet::from_predicate(g, |p| p[0] >= 1.0 - 1e-9);
        // every node of A vs nearest node of B, by direct pairwise scan
        let oracle = a
            .members()
            .map(|p| b.members().map(|q| (p[0] - q[0]).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let h = hausdorff(&a, &b).unwrap();
        assert!((h - 1.0).abs() <= 0.01 + 1e-12, "{h}");
        assert!((h - oracle).abs() < 1e-12);
        assert!((rho(&b, &a).unwrap() - 1.0).abs() <= 0.01 + 1e-12);
    }

    #[test]
    fn errors() {
        let g = line(0.0, 1.0, 3);
        let empty = GridSet::new(g.clone(), vec![false; 3]).unwrap();
        let full = GridSet::new(g, vec![true; 3]).unwrap();
        assert_eq!(hausdorff(&empty, &full), Err(Error::EmptySet));
        let other = GridSet::new(line(0.0, 2.0, 3), vec![true; 3]).unwrap();
        assert!(rho(&full, &other).is_err());
        assert!(GridSet::new(line(0.0, 1.0, 3), vec![true]).is_err());
        assert!(Grid::new(vec![vec![0.0, 0.0]]).is_err());
        assert_eq!("".parse::<Grid>().is_err(), true);
    }

    #[test]
    fn parses_and_orders_nodes() {
        let g: Grid = "-1:1:3, 0:1:2".parse().unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.node(0), vec![-1.0, 0.0]);
        assert_eq!(g.node(1), vec![-1.0, 1.0]);
        assert_eq!(g.node(5), vec![1.0, 1.0]);
        assert_eq!(linspace(-1.0, 1.0, 21).unwrap()[10], 0.0);
    }

    proptest! {
        #[test]
        fn hausdorff_symmetric_rho_zero_on_subsets(
            a in prop::collection::vec(any::<bool>(), 40),
            b in prop::collection::vec(any::<bool>(), 40),
        ) {
            prop_assume!(a.iter().any(|&x| x) && b.iter().any(|&x| x));
            let g = line(-2.0, 2.0, 40);
            let sa = GridSet::new(g.clone(), a.clone()).unwrap();
            let sb = GridSet::new(g.clone(), b.clone()).unwrap();
            prop_assert_eq!(hausdorff(&sa, &sb).unwrap(), hausdorff(&sb, &sa).unwrap());
            let union = GridSet::new(g, a.iter().zip(&b).map(|(x, y)| *x || *y).collect()).unwrap();
            prop_assert_eq!(rho(&sa, &union).unwrap(), 0.0);
            prop_assert_eq!(rho(&sa, &sb).unwrap() == 0.0, sa.is_subset_of(&sb));
        }
    }
}
