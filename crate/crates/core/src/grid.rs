use crate::error::{Error, Result};

/// Uniform discretization of `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    step: f64,
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Grid on `[0, t_end]` with `n_points` nodes.
    pub fn new(t_end: f64, n_points: usize) -> Result<Self> {
        Self::with_start(0.0, t_end, n_points)
    }

    pub fn with_start(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        if t_end <= t_start {
            return Err(Error::Config(format!(
                "grid end time must exceed start time (got [{t_start}, {t_end}])"
            )));
        }
        if n_points < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points (got {n_points})"
            )));
        }
        let step = (t_end - t_start) / (n_points - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_points).map(|i| t_start + i as f64 * step).collect();
        // pin the last node so the span equals t_end - t_start exactly
        nodes[n_points - 1] = t_end;
        Ok(Self {
            t_start,
            t_end,
            step,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Total span `T = t_end - t_start`.
    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Same node layout, used to validate binary operations.
    pub fn compatible(&self, other: &TimeGrid) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.t_start == other.t_start
            && self.t_end == other.t_end
    }
}

/// Free-function form of [`TimeGrid::new`].
pub fn make_grid(t_end: f64, n_points: usize) -> Result<TimeGrid> {
    TimeGrid::new(t_end, n_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_grid() {
        let g = make_grid(6.0, 4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 2.0, 4.0, 6.0]);
        assert_eq!(g.step(), 2.0);
    }

    #[test]
    fn fine_grid_step() {
        let g = make_grid(6.0, 601).unwrap();
        assert!((g.step() - 0.01).abs() < 1e-15);
        assert_eq!(g.node(600), 6.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn minimal_grid() {
        let g = make_grid(1.0, 2).unwrap();
        assert_eq!(g.nodes(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(make_grid(0.0, 10), Err(Error::Config(_))));
        assert!(matches!(make_grid(-1.0, 10), Err(Error::Config(_))));
        assert!(matches!(make_grid(1.0, 1), Err(Error::Config(_))));
        assert!(matches!(make_grid(f64::NAN, 10), Err(Error::Config(_))));
    }
}
