//! Globally adaptive tensor Gauss–Legendre cubature on hyperrectangles.
//!
//! Each region is integrated with an `m`-point rule per axis. For every axis
//! the same tensor rule with `m/2` points on that axis gives a second value;
//! their differences estimate the error and pick the axis to bisect.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::legendre::GaussLegendre;

/// Nodes per axis in a region.
pub(crate) const CELL_ORDER: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub value: f64,
    pub error: f64,
    split_axis: usize,
    id: u64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.id.cmp(&self.id))
    }
}

fn tensor<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], orders: &[usize]) -> f64 {
    let d = lo.len();
    let rules: Vec<&GaussLegendre> = orders.iter().map(|&m| GaussLegendre::cached(m)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let scale: f64 = half.iter().product();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = mid[k] + half[k] * rules[k].nodes[idx[k]];
            w *= rules[k].weights[idx[k]];
        }
        let v = f(&x);
        if v != 0.0 {
            acc += w * v;
        }
        let mut k = 0;
        loop {
            if k == d {
                return acc * scale;
            }
            idx[k] += 1;
            if idx[k] < orders[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub(crate) fn evaluate_region<F: Fn(&[f64]) -> f64>(f: &F, lo: Vec<f64>, hi: Vec<f64>, id: u64) -> Region {
    let d = lo.len();
    let full = vec![CELL_ORDER; d];
    let value = tensor(f, &lo, &hi, &full);
    let mut error = 0.0;
    let mut split_axis = 0;
    let mut worst = -1.0;
    for k in 0..d {
        let mut orders = full.clone();
        orders[k] = CELL_ORDER / 2;
        let e = (tensor(f, &lo, &hi, &orders) - value).abs();
        error += e;
        // prefer the widest axis on ties (e.g. all differences zero)
        let score = e + 1e-300 * (hi[k] - lo[k]);
        if score > worst {
            worst = score;
            split_axis = k;
        }
    }
    Region { lo, hi, value, error, split_axis, id }
}

fn split<F: Fn(&[f64]) -> f64>(f: &F, r: &Region, next_id: &mut u64) -> [Region; 2] {
    let k = r.split_axis;
    let m = 0.5 * (r.lo[k] + r.hi[k]);
    let mut hi_a = r.hi.clone();
    hi_a[k] = m;
    let mut lo_b = r.lo.clone();
    lo_b[k] = m;
    let a = evaluate_region(f, r.lo.clone(), hi_a, *next_id);
    let b = evaluate_region(f, lo_b, r.hi.clone(), *next_id + 1);
    *next_id += 2;
    [a, b]
}

/// Outcome of refining one group of regions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Refined {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Evaluates all boxes (in parallel, order preserved).
pub(crate) fn evaluate_all<F: Fn(&[f64]) -> f64 + Sync>(f: &F, boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Vec<Region> {
    boxes
        .into_par_iter()
        .enumerate()
        .map(|(i, (lo, hi))| evaluate_region(f, lo, hi, i as u64))
        .collect()
}

/// Bisects the worst region until the summed error is within `budget` or
/// `max_regions` is reached.
pub(crate) fn refine<F: Fn(&[f64]) -> f64>(f: &F, regions: Vec<Region>, budget: f64, max_regions: usize) -> Refined {
    let mut next_id = regions.iter().map(|r| r.id).max().map_or(0, |m| m + 1);
    let mut heap: BinaryHeap<Region> = regions.into_iter().collect();
    let total_err = |h: &BinaryHeap<Region>| h.iter().map(|r| r.error).sum::<f64>();
    let mut err = total_err(&heap);
    while err > budget && heap.len() < max_regions {
        let worst = heap.pop().expect("non-empty");
        let [a, b] = split(f, &worst, &mut next_id);
        err += a.error + b.error - worst.error;
        heap.push(a);
        heap.push(b);
        // resum periodically to keep cancellation from drifting
        if heap.len() % 64 == 0 {
            err = total_err(&heap);
        }
    }
    let mut regions = heap.into_vec();
    regions.sort_by_key(|r| r.id);
    let value = regions.iter().map(|r| r.value).sum();
    let error = regions.iter().map(|r| r.error).sum::<f64>();
    Refined { value, error, converged: error <= budget }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact_in_one_region() {
        let f = |x: &[f64]| x[0].powi(5) * x[1].powi(3) + 1.0;
        let r = evaluate_region(&f, vec![0.0, 0.0], vec![1.0, 2.0], 0);
        assert_relative_eq!(r.value, 1.0 / 6.0 * 4.0 + 2.0, epsilon = 1e-13);
    }

    #[test]
    fn refines_discontinuity() {
        // indicator of the unit quarter disk
        let f = |x: &[f64]| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 };
        let regions = evaluate_all(&f, vec![(vec![0.0, 0.0], vec![1.0, 1.0])]);
        let out = refine(&f, regions, 1e-4, 20_000);
        assert!(out.converged);
        assert!((out.value - std::f64::consts::FRAC_PI_4).abs() < 1e-3, "{}", out.value);
    }

    #[test]
    fn refinement_is_deterministic() {
        let f = |x: &[f64]| (10.0 * x[0]).sin().abs() + x[1].sqrt();
        let run = || {
            let r = evaluate_all(&f, vec![(vec![0.0, 0.0], vec![1.0, 1.0]), (vec![1.0, 0.0], vec![2.0, 1.0])]);
            refine(&f, r, 1e-9, 500)
        };
        let (a, b) = (run(), run());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }
}
