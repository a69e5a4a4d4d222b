//! Registry of named coefficient forms `(t, x, y, z) ↦ ℝ`.

use serde::{Deserialize, Serialize};

/// Arguments of a coefficient evaluation. `node` is the interior-node index
/// when the point is a grid node, which tabulated forms require.
#[derive(Clone, Copy, Debug)]
pub struct FormPoint<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub node: Option<usize>,
    pub y: f64,
    pub z: &'a [f64],
}

impl<'a> FormPoint<'a> {
    /// A point with the state arguments set to zero.
    pub fn spatial(t: f64, x: &'a [f64], node: Option<usize>) -> Self {
        Self { t, x, node, y: 0.0, z: &[] }
    }
}

/// A scalar coefficient built from a small set of closed forms.
///
/// Serialized with a `form` tag, e.g. `{"form": "affine", "c0": 1, "cy": -0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarForm {
    /// `value`.
    Constant { value: f64 },
    /// `c0 + cy·y + Σ_k cz[k]·z_k`.
    Affine {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cy: f64,
        #[serde(default)]
        cz: Vec<f64>,
    },
    /// `amp · Π_i sin(freq[i]·x_i + phase[i])`; missing phases are 0.
    Trig {
        #[serde(default = "one")]
        amp: f64,
        freq: Vec<f64>,
        #[serde(default)]
        phase: Vec<f64>,
    },
    /// `Σ_i coef[i]·x_i`, for linear-in-space data.
    Linear { coef: Vec<f64> },
    /// One value per interior node, x fastest.
    Tabulated { values: Vec<f64> },
    /// `amp · sin(arg)`.
    Sine {
        #[serde(default = "one")]
        amp: f64,
        arg: Box<ScalarForm>,
    },
    Sum { terms: Vec<ScalarForm> },
    Product { factors: Vec<ScalarForm> },
}

fn one() -> f64 {
    1.0
}

impl ScalarForm {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `c0 + cy·y`.
    pub fn affine_y(c0: f64, cy: f64) -> Self {
        Self::Affine { c0, cy, cz: Vec::new() }
    }

    /// `c0 + Σ cz_k z_k`.
    pub fn affine_z(c0: f64, cz: Vec<f64>) -> Self {
        Self::Affine { c0, cy: 0.0, cz }
    }

    pub fn sin_x(amp: f64, freq: f64) -> Self {
        Self::Trig { amp, freq: vec![freq], phase: Vec::new() }
    }

    pub fn eval(&self, p: &FormPoint<'_>) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Affine { c0, cy, cz } => {
                c0 + cy * p.y + cz.iter().enumerate().map(|(k, c)| c * p.z.get(k).copied().unwrap_or(0.0)).sum::<f64>()
            }
            Self::Trig { amp, freq, phase } => {
                let mut v = *amp;
                for (i, f) in freq.iter().enumerate() {
                    let xi = p.x.get(i).copied().unwrap_or(0.0);
                    v *= (f * xi + phase.get(i).copied().unwrap_or(0.0)).sin();
                }
                v
            }
            Self::Linear { coef } => coef.iter().zip(p.x).map(|(c, x)| c * x).sum(),
            Self::Tabulated { values } => match p.node {
                Some(k) => values[k],
                None => f64::NAN,
            },
            Self::Sine { amp, arg } => amp * arg.eval(p).sin(),
            Self::Sum { terms } => terms.iter().map(|t| t.eval(p)).sum(),
            Self::Product { factors } => factors.iter().map(|t| t.eval(p)).product(),
        }
    }

    /// True if the value can change with `y` or `z`.
    pub fn depends_on_state(&self) -> bool {
        match self {
            Self::Affine { cy, cz, .. } => *cy != 0.0 || cz.iter().any(|c| *c != 0.0),
            Self::Sine { arg, .. } => arg.depends_on_state(),
            Self::Sum { terms } => terms.iter().any(Self::depends_on_state),
            Self::Product { factors } => factors.iter().any(Self::depends_on_state),
            _ => false,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        match self {
            Self::Tabulated { .. } => true,
            Self::Sine { arg, .. } => arg.is_tabulated(),
            Self::Sum { terms } => terms.iter().any(Self::is_tabulated),
            Self::Product { factors } => factors.iter().any(Self::is_tabulated),
            _ => false,
        }
    }

    /// Lengths of tabulated value arrays that differ from `nodes`.
    pub fn tabulation_mismatch(&self, nodes: usize) -> Option<usize> {
        match self {
            Self::Tabulated { values } if values.len() != nodes => Some(values.len()),
            Self::Sine { arg, .. } => arg.tabulation_mismatch(nodes),
            Self::Sum { terms: fs } | Self::Product { factors: fs } => {
                fs.iter().find_map(|f| f.tabulation_mismatch(nodes))
            }
            _ => None,
        }
    }

    /// Values at every interior node for the given state arguments.
    pub fn sample(&self, t: f64, points: &[Vec<f64>]) -> Vec<f64> {
        points.iter().enumerate().map(|(k, x)| self.eval(&FormPoint::spatial(t, x, Some(k)))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_eval() {
        let src = r#"{"form":"sum","terms":[
            {"form":"affine","c0":1,"cy":2,"cz":[0.5]},
            {"form":"product","factors":[{"form":"trig","amp":3,"freq":[1]},{"form":"constant","value":2}]}
        ]}"#;
        let f: ScalarForm = serde_json::from_str(src).unwrap();
        let x = [std::f64::consts::FRAC_PI_2];
        let v = f.eval(&FormPoint { t: 0.0, x: &x, node: None, y: 1.0, z: &[4.0] });
        assert!((v - (1.0 + 2.0 + 2.0 + 6.0)).abs() < 1e-12);
        assert!(f.depends_on_state());
        let back: ScalarForm = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn unknown_forms_and_fields_are_rejected() {
        assert!(serde_json::from_str::<ScalarForm>(r#"{"form":"bessel"}"#).is_err());
        assert!(serde_json::from_str::<ScalarForm>(r#"{"form":"constant","value":1,"extra":2}"#).is_err());
    }

    #[test]
    fn tabulated_needs_a_node() {
        let f = ScalarForm::Tabulated { values: vec![1.0, 2.0] };
        assert_eq!(f.eval(&FormPoint::spatial(0.0, &[0.3], Some(1))), 2.0);
        assert!(f.eval(&FormPoint::spatial(0.0, &[0.3], None)).is_nan());
        assert_eq!(f.tabulation_mismatch(3), Some(2));
    }
}
