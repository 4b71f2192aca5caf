use super::Nonlinearity;
use serde::Serialize;

/// Outcome of one sampled condition: whether it held at every sample and the
/// smallest margin by which it did (negative when violated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
}

impl ConditionCheck {
    fn from_margins(margins: impl IntoIterator<Item = f64>) -> Self {
        let margin = margins.into_iter().fold(f64::INFINITY, f64::min);
        ConditionCheck {
            holds: margin > 0.0,
            margin,
        }
    }

    fn merge(self, other: ConditionCheck) -> Self {
        ConditionCheck {
            holds: self.holds && other.holds,
            margin: self.margin.min(other.margin),
        }
    }
}

/// Structural conditions on `f`, established by dense sampling.
///
/// * `basic`: odd, zeros at 0 and ±1, `sgn(u) f(u) > 0`, `f′(0) > 0`, `f′(±1) < 0`
/// * `derivative_sign`: `f′ > 0` on (−u₀, u₀) and `f′ < 0` beyond
/// * `ratio_monotone`: `sgn(u) f′F/f²` strictly decreasing on (−u₀, u₀)\{0}
/// * `outer_monotone`: `d/du (f′F^{3/2}/f³) ≤ 0` on (u₀, 1), mirrored to (−1, −u₀)
///   with `F^{3/2}` carrying the sign of u
/// * `weak`: `f′(u) u / f(u) < 1` on (−1, 1)\{0}
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n_samples: usize,
    pub basic: ConditionCheck,
    pub derivative_sign: ConditionCheck,
    pub ratio_monotone: ConditionCheck,
    pub outer_monotone: ConditionCheck,
    pub weak: ConditionCheck,
}

impl ConditionReport {
    /// The three-part strong condition.
    pub fn strong(&self) -> bool {
        self.derivative_sign.holds && self.ratio_monotone.holds && self.outer_monotone.holds
    }

    pub fn all(&self) -> bool {
        self.basic.holds && self.strong() && self.weak.holds
    }
}

pub fn check_conditions(nl: &Nonlinearity, n_samples: usize) -> ConditionReport {
    let n = n_samples.max(100);
    let pos: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let both: Vec<f64> = pos.iter().flat_map(|&u| [u, -u]).collect();
    let scale = 1.0 + nl.f_prime_0().abs();

    let zeros = [0.0, 1.0, -1.0]
        .iter()
        .map(|&u| 1e-12 * scale - nl.f(u).abs())
        .collect::<Vec<_>>();
    let basic = ConditionCheck::from_margins(
        zeros
            .into_iter()
            .chain([nl.df(0.0), -nl.df(1.0), -nl.df(-1.0)])
            .chain(both.iter().map(|&u| u.signum() * nl.f(u)))
            .chain(pos.iter().map(|&u| {
                let (a, b) = (nl.f(u), nl.f(-u));
                1e-13 * (1.0 + a.abs()) - (a + b).abs()
            })),
    );

    let u0 = nl.u0();
    let spacing = 1.0 / (n + 1) as f64;
    let (derivative_sign, ratio_monotone, outer_monotone) = if u0.is_finite() {
        let ds = ConditionCheck::from_margins(both.iter().filter_map(|&u| {
            let d = (u.abs() - u0).abs();
            (d > spacing).then(|| if u.abs() < u0 { nl.df(u) } else { -nl.df(u) })
        }));

        let inner: Vec<f64> = pos.iter().copied().filter(|&u| u < u0).collect();
        let side = |sign: f64| {
            // sgn(u) h(u) along increasing u must decrease
            let mut xs: Vec<f64> = inner.iter().map(|&u| sign * u).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let vals: Vec<f64> = xs.iter().map(|&u| u.signum() * nl.h_of_u(u)).collect();
            ConditionCheck::from_margins(vals.windows(2).map(|w| w[0] - w[1]))
        };
        let rm = side(1.0).merge(side(-1.0));

        let om = ConditionCheck::from_margins(both.iter().filter(|u| u.abs() > u0).map(|&u| {
            let (f, df, d2f, en) = (nl.f(u), nl.df(u), nl.d2f(u), nl.eval_energy(u));
            let x = d2f * en * f + 3.0 * df * f * f - 3.0 * df * df * en;
            // d/du of the odd extension is F^{1/2} f^{-4} x on both sides;
            // non-strict inequality, so a zero margin still holds
            -x + f64::MIN_POSITIVE
        }));
        (ds, rm, om)
    } else {
        let fail = ConditionCheck {
            holds: false,
            margin: f64::NEG_INFINITY,
        };
        (fail, fail, fail)
    };

    let weak = ConditionCheck::from_margins(both.iter().map(|&u| {
        let f = nl.f(u);
        1.0 - nl.df(u) * u / f
    }));

    ConditionReport {
        n_samples: n,
        basic,
        derivative_sign,
        ratio_monotone,
        outer_monotone,
        weak,
    }
}
