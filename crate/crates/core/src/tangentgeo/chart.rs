use crate::geometry::{Chart, GeometryError, SmoothMap};
use crate::symcore::Expr;

/// Natural coordinates on `Q`, `TQ`, `T²Q` and `T*Q` with the projections
/// between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentChart {
    q: Chart,
    tq: Chart,
    t2q: Chart,
    tsq: Chart,
    tau: SmoothMap,
    tau21: SmoothMap,
    pi: SmoothMap,
}

fn derived_name(velocity: &str, letter: char) -> String {
    match velocity.strip_prefix('v') {
        Some(rest) => format!("{letter}{rest}"),
        None => format!("{letter}_{velocity}"),
    }
}

impl TangentChart {
    /// Velocities default to `v_<q>`, or `v` for a single coordinate `q`.
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<TangentChart, GeometryError> {
        let vels: Vec<String> = if coords.len() == 1 && coords[0].as_ref() == "q" {
            vec!["v".into()]
        } else {
            coords.iter().map(|c| format!("v_{}", c.as_ref())).collect()
        };
        TangentChart::with_velocities(coords, &vels)
    }

    /// Accelerations and momenta are named after the velocities, replacing
    /// a leading `v` with `a` or `p` (`v_x` gives `a_x` and `p_x`).
    pub fn with_velocities<S: AsRef<str>, T: AsRef<str>>(
        coords: &[S],
        velocities: &[T],
    ) -> Result<TangentChart, GeometryError> {
        let accs: Vec<String> = velocities.iter().map(|v| derived_name(v.as_ref(), 'a')).collect();
        let moms: Vec<String> = velocities.iter().map(|v| derived_name(v.as_ref(), 'p')).collect();
        let vels: Vec<String> = velocities.iter().map(|v| v.as_ref().to_string()).collect();
        TangentChart::with_names(coords, &vels, &accs, &moms)
    }

    pub fn with_names<S: AsRef<str>>(
        coords: &[S],
        velocities: &[String],
        accelerations: &[String],
        momenta: &[String],
    ) -> Result<TangentChart, GeometryError> {
        let q = Chart::new("Q", coords.iter().map(|c| c.as_ref().to_string()))?;
        let tq = Chart::tangent(&q, velocities.to_vec())?;
        let t2q = Chart::second_tangent(&q, velocities.to_vec(), accelerations.to_vec())?;
        let tsq = Chart::cotangent(&q, momenta.to_vec())?;
        for m in momenta {
            if tq.index_of(m).is_some() || t2q.index_of(m).is_some() {
                return Err(GeometryError::InvalidChart(format!("momentum `{m}` clashes with a tangent coordinate")));
            }
        }
        let tau = tq.projection()?;
        let tau21 = SmoothMap::new(t2q.clone(), tq.clone(), tq.coord_exprs())?;
        let pi = tsq.projection()?;
        Ok(TangentChart { q, tq, t2q, tsq, tau, tau21, pi })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn base(&self) -> &Chart {
        &self.q
    }

    pub fn tq(&self) -> &Chart {
        &self.tq
    }

    pub fn t2q(&self) -> &Chart {
        &self.t2q
    }

    pub fn cotangent(&self) -> &Chart {
        &self.tsq
    }

    /// `τ: TQ → Q`.
    pub fn tau(&self) -> &SmoothMap {
        &self.tau
    }

    /// `τ_{2,1}: T²Q → TQ`.
    pub fn tau21(&self) -> &SmoothMap {
        &self.tau21
    }

    /// `π: T*Q → Q`.
    pub fn pi(&self) -> &SmoothMap {
        &self.pi
    }

    pub fn q_names(&self) -> &[String] {
        self.q.coords()
    }

    pub fn v_names(&self) -> &[String] {
        &self.tq.coords()[self.dim()..]
    }

    pub fn a_names(&self) -> &[String] {
        &self.t2q.coords()[2 * self.dim()..]
    }

    pub fn p_names(&self) -> &[String] {
        &self.tsq.coords()[self.dim()..]
    }

    pub fn q(&self, i: usize) -> Expr {
        Expr::sym(&self.q_names()[i])
    }

    pub fn v(&self, i: usize) -> Expr {
        Expr::sym(&self.v_names()[i])
    }

    pub fn a(&self, i: usize) -> Expr {
        Expr::sym(&self.a_names()[i])
    }

    pub fn p(&self, i: usize) -> Expr {
        Expr::sym(&self.p_names()[i])
    }

    pub fn velocities(&self) -> Vec<Expr> {
        (0..self.dim()).map(|i| self.v(i)).collect()
    }

    pub fn accelerations(&self) -> Vec<Expr> {
        (0..self.dim()).map(|i| self.a(i)).collect()
    }
}
