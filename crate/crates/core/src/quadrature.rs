//! Composite Gauss–Legendre quadrature for the time-ordered integrals
//! `{f} = ∫₀ᵗ f` and `{f{g}} = ∫₀ᵗ dt₁ f(t₁) ∫₀^{t₁} dt₂ g(t₂)`.
//!
//! Each panel carries an antiderivative matrix that maps the integrand's
//! values at the panel nodes to its partial integrals up to every node, so a
//! nested integral is a single left-to-right sweep over the panels.
//! Results are certified by comparing against a run with twice the panel
//! density.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Panels per 2π of dimensionless time.
    pub panels_per_period: usize,
    pub nodes_per_panel: usize,
    /// Agreement required between successive refinements, relative to
    /// `max(1, |estimate|)`.
    pub abs_tol: f64,
    /// Maximum number of panel doublings before giving up.
    pub max_refinements: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels_per_period: 64,
            nodes_per_panel: 16,
            abs_tol: 1e-12,
            max_refinements: 4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels_per_period < 8 {
            return Err(Error::InvalidArgument("panels_per_period must be at least 8".into()));
        }
        if self.nodes_per_panel == 0 || self.nodes_per_panel > 64 {
            return Err(Error::InvalidArgument("nodes_per_panel must be in 1..=64".into()));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("abs_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn rule(&self) -> PanelRule {
        PanelRule::gauss_legendre(self.nodes_per_panel)
    }
}

/// Gauss–Legendre rule on `[-1, 1]` together with its antiderivative matrix.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row `j`: weights giving `∫_{-1}^{x_j} p` for polynomials of degree < n.
    antiderivative: Vec<f64>,
}

impl PanelRule {
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n > 0);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }

        // Lagrange basis ℓ_k(x) = w_k Σ_m (m + ½) P_m(x_k) P_m(x), exact for the
        // interpolant; integrate each P_m from -1 to x_j.
        let mut antiderivative = vec![0.0; n * n];
        let p_at_nodes: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        for (j, &xj) in nodes.iter().enumerate() {
            let p = legendre_all(n + 1, xj);
            let integral_p: Vec<f64> = (0..n)
                .map(|m| {
                    if m == 0 {
                        xj + 1.0
                    } else {
                        (p[m + 1] - p[m - 1]) / (2 * m + 1) as f64
                    }
                })
                .collect();
            for k in 0..n {
                let s: f64 = (0..n)
                    .map(|m| (m as f64 + 0.5) * p_at_nodes[k][m] * integral_p[m])
                    .sum();
                antiderivative[j * n + k] = weights[k] * s;
            }
        }
        PanelRule {
            nodes,
            weights,
            antiderivative,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Abscissae of the rule mapped onto `[lo, hi]`.
    pub fn abscissae(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes.iter().map(move |&x| mid + half * x)
    }

    /// `∫_lo^hi f` from values at the mapped nodes.
    pub fn panel_integral(&self, lo: f64, hi: f64, values: &[Complex64]) -> Complex64 {
        let half = 0.5 * (hi - lo);
        values.iter().zip(&self.weights).map(|(v, &w)| v * w).sum::<Complex64>() * half
    }

    /// Writes `∫_lo^{x_j} f` for every mapped node `x_j` into `out`.
    pub fn partial_integrals(&self, lo: f64, hi: f64, values: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        let half = 0.5 * (hi - lo);
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.antiderivative[j * n..(j + 1) * n];
            *o = row.iter().zip(values).map(|(&a, v)| v * a).sum::<Complex64>() * half;
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let prev = if n == 0 { 0.0 } else { p0 };
    let dp = n as f64 * (x * p - prev) / (x * x - 1.0);
    (p, dp)
}

/// `P_0(x) .. P_n(x)`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
        p.push(next);
    }
    p
}

/// A panel `[lo, hi]`; `closes` is set when `hi` is the requested breakpoint
/// with that index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub closes: Option<usize>,
}

/// Splits `[0, breaks.last()]` into uniform panels of at most `2π/density`,
/// aligned so that every breakpoint is a panel edge. Breakpoints must be
/// non-decreasing and non-negative.
pub fn panels_through(breaks: &[f64], density: usize) -> Vec<Panel> {
    let mut panels = Vec::new();
    let mut start = 0.0;
    for (idx, &end) in breaks.iter().enumerate() {
        let len = end - start;
        if len <= 0.0 {
            // Zero-length segment: mark closure with an empty panel.
            panels.push(Panel {
                lo: start,
                hi: start,
                closes: Some(idx),
            });
            continue;
        }
        let count = ((density as f64 * len / TAU).ceil() as usize).max(1);
        let width = len / count as f64;
        for i in 0..count {
            let lo = start + width * i as f64;
            let last = i + 1 == count;
            panels.push(Panel {
                lo,
                hi: if last { end } else { lo + width },
                closes: last.then_some(idx),
            });
        }
        start = end;
    }
    panels
}

/// Runs `eval` at increasing panel densities until two successive results
/// agree to `cfg.abs_tol` (relative to `max(1, |value|)`) in every component.
pub(crate) fn certified<F>(cfg: &QuadratureConfig, mut eval: F) -> Result<Vec<Complex64>>
where
    F: FnMut(usize) -> Vec<Complex64>,
{
    cfg.validate()?;
    let mut density = cfg.panels_per_period;
    let mut previous = eval(density);
    for refinement in 1..=cfg.max_refinements.max(1) {
        density *= 2;
        let current = eval(density);
        let mut worst: Option<(usize, f64)> = None;
        for (i, (c, p)) in current.iter().zip(&previous).enumerate() {
            let excess = (c - p).norm() / cfg.abs_tol.max(0.0) / c.norm().max(1.0);
            if !(excess <= 1.0) && worst.is_none_or(|(_, e)| excess > e) {
                worst = Some((i, excess));
            }
        }
        match worst {
            None => return Ok(current),
            Some((i, _)) if refinement == cfg.max_refinements.max(1) => {
                return Err(Error::Quadrature {
                    refinements: refinement,
                    last: current[i],
                    previous: previous[i],
                });
            }
            Some(_) => previous = current,
        }
    }
    unreachable!("loop returns on its final iteration")
}

/// `{f}(t_end) = ∫₀^{t_end} f`.
pub fn integrate<F>(f: F, t_end: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    check_end(t_end)?;
    let rule = cfg.rule();
    let mut values = vec![Complex64::default(); rule.len()];
    let out = certified(cfg, |density| {
        let mut total = Complex64::default();
        for p in panels_through(&[t_end], density) {
            for (v, x) in values.iter_mut().zip(rule.abscissae(p.lo, p.hi)) {
                *v = f(x);
            }
            total += rule.panel_integral(p.lo, p.hi, &values);
        }
        vec![total]
    })?;
    Ok(out[0])
}

/// `{f{g}}(t_end) = ∫₀^{t_end} dt₁ f(t₁) ∫₀^{t₁} dt₂ g(t₂)`, one sweep with a
/// running inner antiderivative.
pub fn nested_integrate<F, G>(f: F, g: G, t_end: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    check_end(t_end)?;
    if t_end == 0.0 {
        return Ok(Complex64::default());
    }
    let rule = cfg.rule();
    let n = rule.len();
    let mut fv = vec![Complex64::default(); n];
    let mut gv = vec![Complex64::default(); n];
    let mut partial = vec![Complex64::default(); n];
    let out = certified(cfg, |density| {
        let mut inner = Complex64::default();
        let mut outer = Complex64::default();
        for p in panels_through(&[t_end], density) {
            for ((fx, gx), x) in fv.iter_mut().zip(gv.iter_mut()).zip(rule.abscissae(p.lo, p.hi)) {
                *fx = f(x);
                *gx = g(x);
            }
            rule.partial_integrals(p.lo, p.hi, &gv, &mut partial);
            let integrand: Vec<Complex64> = fv.iter().zip(&partial).map(|(fx, gi)| fx * (inner + gi)).collect();
            outer += rule.panel_integral(p.lo, p.hi, &integrand);
            inner += rule.panel_integral(p.lo, p.hi, &gv);
        }
        vec![outer]
    })?;
    Ok(out[0])
}

fn check_end(t_end: f64) -> Result<()> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("integration endpoint must be finite and non-negative, got {t_end}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{make_profile, Profile};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rule_integrates_polynomials() {
        let rule = PanelRule::gauss_legendre(7);
        let s: f64 = rule.weights().iter().sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
        // x^12 is exact for 7 nodes.
        let m: f64 = rule.nodes().iter().zip(rule.weights()).map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(m, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn antiderivative_matrix_is_exact_on_polynomials() {
        let rule = PanelRule::gauss_legendre(8);
        let vals: Vec<Complex64> = rule.nodes().iter().map(|x| c(3.0 * x * x - x.powi(7))).collect();
        let mut out = vec![Complex64::default(); 8];
        rule.partial_integrals(-1.0, 1.0, &vals, &mut out);
        for (x, o) in rule.nodes().iter().zip(&out) {
            let exact = (x.powi(3) + 1.0) - (x.powi(8) - 1.0) / 8.0;
            assert_abs_diff_eq!(o.re, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn full_period_of_harmonic_vanishes() {
        let v = integrate(|t| Complex64::from_polar(1.0, t), TAU, &cfg()).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn robust_w2_integrates_to_zero() {
        let spec = make_profile(Profile::Robust, 1.0).unwrap();
        let v = integrate(|t| c(spec.w2_at(t)), TAU, &cfg()).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn sine_antiderivative() {
        let v = integrate(|t| c((2.0 * t).sin()), PI / 2.0, &cfg()).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn nested_constant() {
        let v = nested_integrate(|_| c(1.0), |_| c(1.0), TAU, &cfg()).unwrap();
        assert_abs_diff_eq!(v.re, TAU * TAU / 2.0, epsilon = 1e-11);
    }

    #[test]
    fn nested_ms_kernel() {
        // Inner (e^{it}-1)/i, outer ∫ (1 - e^{-it})/i = 2π/i.
        let v = nested_integrate(|t| Complex64::from_polar(1.0, -t), |t| Complex64::from_polar(1.0, t), TAU, &cfg()).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, -TAU, epsilon = 1e-12);

        // Independent check: midpoint Riemann double sum.
        let n = 2000;
        let h = TAU / n as f64;
        let mut inner = Complex64::default();
        let mut riemann = Complex64::default();
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            let g = Complex64::from_polar(1.0, t);
            riemann += Complex64::from_polar(1.0, -t) * (inner + 0.5 * h * g) * h;
            inner += g * h;
        }
        assert!((riemann - v).norm() < 1e-4);
    }

    #[test]
    fn nested_at_zero_is_zero() {
        let v = nested_integrate(|t| c(t.cos()), |t| c(t.sin()), 0.0, &cfg()).unwrap();
        assert_eq!(v, Complex64::default());
    }

    #[test]
    fn rejects_bad_endpoint() {
        assert!(integrate(|_| c(1.0), -1.0, &cfg()).is_err());
        assert!(integrate(|_| c(1.0), f64::NAN, &cfg()).is_err());
    }

    #[test]
    fn non_convergence_reports_estimates() {
        let tight = QuadratureConfig {
            panels_per_period: 8,
            nodes_per_panel: 2,
            abs_tol: 1e-15,
            max_refinements: 2,
        };
        match integrate(|t| Complex64::from_polar(1.0, 40.0 * t), 1.3, &tight) {
            Err(Error::Quadrature { last, previous, .. }) => assert_ne!(last, previous),
            other => panic!("expected quadrature failure, got {other:?}"),
        }
    }

    #[test]
    fn panels_hit_breakpoints() {
        let panels = panels_through(&[1.0, 1.0, 3.5], 8);
        let closing: Vec<(f64, usize)> = panels.iter().filter_map(|p| p.closes.map(|i| (p.hi, i))).collect();
        assert_eq!(closing, vec![(1.0, 0), (1.0, 1), (3.5, 2)]);
        assert!(panels.windows(2).all(|w| w[0].hi == w[1].lo));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn trig() -> impl Strategy<Value = Vec<(f64, f64, i32)>> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -6i32..7), 1..4)
        }

        fn eval(terms: &[(f64, f64, i32)], t: f64) -> Complex64 {
            terms.iter().map(|&(re, im, k)| Complex64::new(re, im) * Complex64::from_polar(1.0, k as f64 * t)).sum()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn integration_by_parts(f in trig(), g in trig(), t_end in 0.1f64..7.0) {
                let cfg = QuadratureConfig::default();
                let fg = nested_integrate(|t| eval(&f, t), |t| eval(&g, t), t_end, &cfg).unwrap();
                let gf = nested_integrate(|t| eval(&g, t), |t| eval(&f, t), t_end, &cfg).unwrap();
                let fi = integrate(|t| eval(&f, t), t_end, &cfg).unwrap();
                let gi = integrate(|t| eval(&g, t), t_end, &cfg).unwrap();
                prop_assert!((fg + gf - fi * gi).norm() < 1e-11);
            }

            #[test]
            fn linearity(f in trig(), g in trig(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
                let cfg = QuadratureConfig::default();
                let lhs = integrate(|t| eval(&f, t) * x + eval(&g, t) * y, 5.0, &cfg).unwrap();
                let rhs = integrate(|t| eval(&f, t), 5.0, &cfg).unwrap() * x
                    + integrate(|t| eval(&g, t), 5.0, &cfg).unwrap() * y;
                prop_assert!((lhs - rhs).norm() < 1e-11);
            }

            #[test]
            fn doubling_panels_is_within_tolerance(f in trig(), t_end in 0.1f64..7.0) {
                let base = QuadratureConfig::default();
                let fine = QuadratureConfig { panels_per_period: 128, ..base };
                let a = integrate(|t| eval(&f, t), t_end, &base).unwrap();
                let b = integrate(|t| eval(&f, t), t_end, &fine).unwrap();
                prop_assert!((a - b).norm() <= base.abs_tol * a.norm().max(1.0));
            }

            #[test]
            fn sine_series_w2_has_zero_mean(s in prop::collection::vec(-2.0f64..2.0, 1..4)) {
                let sine = s.iter().enumerate()
                    .map(|(i, &c)| crate::drive::Harmonic::new(2 * i as u32 + 2, c))
                    .collect();
                let spec = crate::drive::DriveSpec::new(1.0, vec![], sine).unwrap();
                let v = integrate(|t| Complex64::new(spec.w2_at(t), 0.0), TAU, &QuadratureConfig::default()).unwrap();
                prop_assert!(v.norm() < 1e-12);
            }
        }
    }
}
