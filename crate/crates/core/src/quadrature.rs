//! Composite Gauss–Legendre rules with mandatory panel boundaries at
//! branch points.
//!
//! Reflection coefficients carry square-root branch points. Splitting there
//! is not enough on its own: a `√t` endpoint still limits Gauss–Legendre to
//! algebraic convergence. Panels that touch a split point are therefore
//! remapped with a quadratic (one-sided) or cubic (two-sided) change of
//! variables that makes the integrand smooth in the new variable.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Change of variables applied on a panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelMap {
    Linear,
    /// Nodes clustered quadratically toward `lo`.
    ClusterLo,
    /// Nodes clustered quadratically toward `hi`.
    ClusterHi,
    /// Nodes clustered toward both ends.
    ClusterBoth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub map: PanelMap,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                let jf = j as f64;
                p0 = ((2.0 * jf + 1.0) * z * p1 - jf * p2) / (jf + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

type LegendreTable = Arc<(Vec<f64>, Vec<f64>)>;

/// Memoized [`gauss_legendre`]; rules are rebuilt per transverse slice in
/// the beam engine, so the Newton solve is worth caching.
fn legendre_cached(n: usize) -> LegendreTable {
    static CACHE: OnceLock<Mutex<HashMap<usize, LegendreTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(gauss_legendre(n)))
        .clone()
}

/// Node/weight set over a union of panels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    split_points: Vec<f64>,
    nodes_per_panel: usize,
}

impl QuadratureRule {
    /// Splits `[lo, hi]` into `n_panels` equal panels, then forces a panel
    /// boundary at every split point strictly inside the interval.
    pub fn composite(
        lo: f64,
        hi: f64,
        n_panels: usize,
        nodes_per_panel: usize,
        splits: &[f64],
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Domain(format!("invalid quadrature interval [{lo}, {hi}]")));
        }
        if n_panels == 0 || nodes_per_panel == 0 {
            return Err(Error::Domain("panel and node counts must be positive".into()));
        }
        let width = (hi - lo) / n_panels as f64;
        let mut edges: Vec<f64> = (0..=n_panels).map(|i| lo + width * i as f64).collect();
        edges[n_panels] = hi;

        let mut split_points = Vec::new();
        for &s in splits {
            if !s.is_finite() {
                return Err(Error::PanelSplit(format!("non-finite branch point {s}")));
            }
            if s <= lo || s >= hi {
                continue;
            }
            split_points.push(s);
            // Move a nearby uniform edge onto the split instead of creating a
            // sliver panel.
            let nearest = edges
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))
                .map(|(i, _)| i)
                .unwrap();
            let movable = nearest != 0
                && nearest != n_panels
                && !split_points.contains(&edges[nearest])
                && (edges[nearest] - s).abs() < 0.25 * width;
            if movable {
                edges[nearest] = s;
            } else {
                edges.push(s);
            }
        }
        split_points.sort_by(f64::total_cmp);
        split_points.dedup();
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        let is_split = |x: f64| split_points.contains(&x);
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                return Err(Error::PanelSplit(format!("empty panel [{a}, {b}]")));
            }
            let map = match (is_split(a), is_split(b)) {
                (false, false) => PanelMap::Linear,
                (true, false) => PanelMap::ClusterLo,
                (false, true) => PanelMap::ClusterHi,
                (true, true) => PanelMap::ClusterBoth,
            };
            panels.push(Panel { lo: a, hi: b, map });
        }
        Ok(Self::from_panels(panels, split_points, nodes_per_panel))
    }

    fn from_panels(panels: Vec<Panel>, split_points: Vec<f64>, nodes_per_panel: usize) -> Self {
        let table = legendre_cached(nodes_per_panel);
        let (gx, gw) = (&table.0, &table.1);
        let mut nodes = Vec::with_capacity(panels.len() * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels.len() * nodes_per_panel);
        for p in &panels {
            let len = p.hi - p.lo;
            for (&x, &w) in gx.iter().zip(gw) {
                let (node, weight) = match p.map {
                    PanelMap::Linear => (p.lo + 0.5 * len * (x + 1.0), 0.5 * len * w),
                    PanelMap::ClusterLo => {
                        let v = 0.5 * (1.0 + x);
                        (p.lo + len * v * v, len * v * w)
                    }
                    PanelMap::ClusterHi => {
                        let v = 0.5 * (1.0 - x);
                        (p.hi - len * v * v, len * v * w)
                    }
                    PanelMap::ClusterBoth => {
                        let t = 0.5 * x * (3.0 - x * x);
                        let mid = 0.5 * (p.lo + p.hi);
                        (mid + 0.5 * len * t, 0.5 * len * 1.5 * (1.0 - x * x) * w)
                    }
                };
                nodes.push(node);
                weights.push(weight);
            }
        }
        Self {
            nodes,
            weights,
            panels,
            split_points,
            nodes_per_panel,
        }
    }

    /// Same panels with twice the nodes on each.
    pub fn refined(&self) -> Self {
        Self::from_panels(
            self.panels.clone(),
            self.split_points.clone(),
            2 * self.nodes_per_panel,
        )
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn split_points(&self) -> &[f64] {
        &self.split_points
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
