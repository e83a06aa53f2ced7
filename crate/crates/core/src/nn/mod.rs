//! The seven layer architectures as composable layers with exact forward
//! passes and hand-derived backward passes, plus network assembly and
//! parameter counting.

mod layers;
mod network;
mod params;

pub use layers::{
    deep_dgm_layer_forward, dense_forward, dgm_layer_forward, generalized_highway_combine,
    generalized_highway_forward, highway_combine, highway_forward, norec_dgm_layer_forward,
    residual_forward, Gate, RecurrentGates, StateGate, StateGates,
};
pub use network::{
    init_params, network_backward, network_forward, network_forward_single, predict, ForwardCache,
};
pub use params::{read_model, write_model, ParamSet, Tensor};

use crate::mathcore::ActivationKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("dimension mismatch in {0}")]
    Dim(&'static str),
    #[error("invalid network spec: {0}")]
    Spec(String),
    #[error("parameters do not match the spec: {0}")]
    ParamMismatch(String),
    #[error("model format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The hidden-layer architecture of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Plain dense layers (MLP).
    Dense,
    /// Dense layer plus identity shortcut.
    Residual,
    /// Transform gate blending the transformed and carried input.
    Highway,
    /// Independent transform and carry gates.
    GeneralizedHighway,
    /// Gated recurrent-style layer with Z, G, R, H gates fed by both the
    /// raw input and the running state.
    Dgm,
    /// DGM layer whose H is produced by a chain of sublayers.
    DeepDgm(usize),
    /// DGM layer without the raw-input feeds.
    NoRecDgm,
}

impl LayerKind {
    pub fn id(self) -> &'static str {
        match self {
            LayerKind::Dense => "dense",
            LayerKind::Residual => "residual",
            LayerKind::Highway => "highway",
            LayerKind::GeneralizedHighway => "gen_highway",
            LayerKind::Dgm => "dgm",
            LayerKind::DeepDgm(_) => "deep_dgm",
            LayerKind::NoRecDgm => "norec_dgm",
        }
    }

    /// Table-style display name.
    pub fn display_name(self) -> &'static str {
        match self {
            LayerKind::Dense => "MLP",
            LayerKind::Residual => "Residual",
            LayerKind::Highway => "Highway",
            LayerKind::GeneralizedHighway => "Generalized Highway",
            LayerKind::Dgm => "DGM",
            LayerKind::DeepDgm(_) => "Deep DGM",
            LayerKind::NoRecDgm => "No-Recurrence DGM",
        }
    }

    pub fn n_sub(self) -> usize {
        match self {
            LayerKind::DeepDgm(k) => k,
            _ => 1,
        }
    }

    pub fn is_dgm_family(self) -> bool {
        matches!(self, LayerKind::Dgm | LayerKind::DeepDgm(_) | LayerKind::NoRecDgm)
    }

    pub fn from_id(id: &str, n_sub: usize) -> Result<Self, String> {
        match id {
            "dense" => Ok(LayerKind::Dense),
            "residual" => Ok(LayerKind::Residual),
            "highway" => Ok(LayerKind::Highway),
            "gen_highway" => Ok(LayerKind::GeneralizedHighway),
            "dgm" => Ok(LayerKind::Dgm),
            "deep_dgm" => Ok(LayerKind::DeepDgm(n_sub)),
            "norec_dgm" => Ok(LayerKind::NoRecDgm),
            other => Err(format!("unknown layer kind `{other}`")),
        }
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    GlorotNormal,
    HeNormal,
}

impl InitKind {
    pub fn id(self) -> &'static str {
        match self {
            InitKind::GlorotNormal => "glorot_normal",
            InitKind::HeNormal => "he_normal",
        }
    }
}

impl std::str::FromStr for InitKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "glorot_normal" => Ok(InitKind::GlorotNormal),
            "he_normal" => Ok(InitKind::HeNormal),
            other => Err(format!("unknown initializer `{other}`")),
        }
    }
}

/// Architecture description: input width, hidden depth and width, layer
/// kind, activations and initializer. All gated and DGM kinds keep the
/// hidden width fixed, so the input is first mapped to width `nodes` by an
/// affine projection (the S1 transform for the DGM family); the output layer
/// is affine to one value with no activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub layers: usize,
    pub nodes: usize,
    pub kind: LayerKind,
    pub hidden_act: ActivationKind,
    pub gate_act: ActivationKind,
    pub init: InitKind,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_dim == 0 || self.layers == 0 || self.nodes == 0 {
            return Err(NetError::Spec(
                "input_dim, layers and nodes must be at least 1".into(),
            ));
        }
        if let LayerKind::DeepDgm(k) = self.kind {
            if k == 0 {
                return Err(NetError::Spec("deep DGM needs at least 1 sublayer".into()));
            }
        }
        if self.hidden_act == ActivationKind::Softmax || self.gate_act == ActivationKind::Softmax {
            return Err(NetError::Spec(
                "softmax has no elementwise derivative and cannot drive a trained layer".into(),
            ));
        }
        Ok(())
    }

    /// Whether the architecture owns a dimension-regulating input transform.
    pub fn has_projection(&self) -> bool {
        !matches!(self.kind, LayerKind::Dense)
    }
}

pub(crate) fn init_glorot_or_he(
    kind: InitKind,
    fan_in: usize,
    fan_out: usize,
    rng: &mut crate::mathcore::RngStream,
) -> Result<crate::mathcore::Mat64, crate::mathcore::MathError> {
    match kind {
        InitKind::GlorotNormal => crate::mathcore::init_glorot(fan_in, fan_out, rng),
        InitKind::HeNormal => crate::mathcore::init_he(fan_in, fan_out, rng),
    }
}

/// Shape of one named parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Mat(usize, usize),
    Vec(usize),
}

impl Shape {
    pub fn n_scalars(self) -> usize {
        match self {
            Shape::Mat(r, c) => r * c,
            Shape::Vec(n) => n,
        }
    }
}

/// The canonical parameter list of a spec: names and shapes in the order
/// they are initialized, stored and walked by the engine.
pub fn spec_entries(spec: &NetworkSpec) -> Vec<(String, Shape)> {
    let d = spec.input_dim;
    let n = spec.nodes;
    let mut out = Vec::new();
    let mat = |r, c| Shape::Mat(r, c);
    let vec = |len| Shape::Vec(len);

    match spec.kind {
        LayerKind::Dense => {
            for l in 0..spec.layers {
                let fan_in = if l == 0 { d } else { n };
                out.push((format!("layer{l}.W"), mat(n, fan_in)));
                out.push((format!("layer{l}.b"), vec(n)));
            }
        }
        LayerKind::Residual | LayerKind::Highway | LayerKind::GeneralizedHighway => {
            out.push(("proj.W".into(), mat(n, d)));
            out.push(("proj.b".into(), vec(n)));
            for l in 0..spec.layers {
                out.push((format!("layer{l}.W_H"), mat(n, n)));
                out.push((format!("layer{l}.b_H"), vec(n)));
                if !matches!(spec.kind, LayerKind::Residual) {
                    out.push((format!("layer{l}.W_T"), mat(n, n)));
                    out.push((format!("layer{l}.b_T"), vec(n)));
                }
                if matches!(spec.kind, LayerKind::GeneralizedHighway) {
                    out.push((format!("layer{l}.W_C"), mat(n, n)));
                    out.push((format!("layer{l}.b_C"), vec(n)));
                }
            }
        }
        LayerKind::Dgm | LayerKind::DeepDgm(_) => {
            out.push(("s1.w".into(), mat(n, d)));
            out.push(("s1.b".into(), vec(n)));
            for l in 0..spec.layers {
                for gate in ["z", "g", "r", "h"] {
                    out.push((format!("layer{l}.{gate}.w"), mat(n, d)));
                    out.push((format!("layer{l}.{gate}.u"), mat(n, n)));
                    out.push((format!("layer{l}.{gate}.b"), vec(n)));
                }
                for sub in 2..=spec.kind.n_sub() {
                    out.push((format!("layer{l}.h{sub}.w"), mat(n, d)));
                    out.push((format!("layer{l}.h{sub}.u"), mat(n, n)));
                    out.push((format!("layer{l}.h{sub}.b"), vec(n)));
                }
            }
        }
        LayerKind::NoRecDgm => {
            out.push(("s1.w".into(), mat(n, d)));
            out.push(("s1.b".into(), vec(n)));
            for l in 0..spec.layers {
                for gate in ["z", "g", "r", "h"] {
                    out.push((format!("layer{l}.{gate}.u"), mat(n, n)));
                    out.push((format!("layer{l}.{gate}.b"), vec(n)));
                }
            }
        }
    }
    out.push(("out.W".into(), mat(1, n)));
    out.push(("out.b".into(), vec(1)));
    out
}

/// Exact number of scalar parameters owned by a network of this spec.
pub fn count_params(spec: &NetworkSpec) -> usize {
    spec_entries(spec).iter().map(|(_, s)| s.n_scalars()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: LayerKind, d: usize, layers: usize, nodes: usize) -> NetworkSpec {
        NetworkSpec {
            input_dim: d,
            layers,
            nodes,
            kind,
            hidden_act: ActivationKind::Tanh,
            gate_act: ActivationKind::Tanh,
            init: InitKind::GlorotNormal,
        }
    }

    #[test]
    fn mlp_parameter_counts_match_tables() {
        // 2- and 3-layer MLPs on the 4-input problem
        let cases = [
            (2, 50, 2_851),
            (2, 100, 10_701),
            (2, 150, 23_551),
            (2, 200, 41_401),
            (2, 250, 64_251),
            (2, 500, 253_501),
            (3, 50, 5_401),
            (3, 100, 20_801),
            (3, 150, 46_201),
            (3, 200, 81_601),
            (3, 250, 127_001),
            (3, 500, 504_001),
        ];
        for (layers, nodes, want) in cases {
            let got = count_params(&spec(LayerKind::Dense, 4, layers, nodes));
            assert_eq!(got, want, "MLP {layers}x{nodes}");
        }
        // 8-input problem, first configuration
        assert_eq!(count_params(&spec(LayerKind::Dense, 8, 2, 50)), 3_051);
    }

    #[test]
    fn highway_family_counts_match_tables() {
        assert_eq!(count_params(&spec(LayerKind::Residual, 4, 3, 50)), 7_951);
        assert_eq!(count_params(&spec(LayerKind::Highway, 4, 3, 50)), 15_601);
        assert_eq!(
            count_params(&spec(LayerKind::GeneralizedHighway, 4, 3, 50)),
            23_251
        );
        // equal-parameter configurations on the 8-input problem
        assert_eq!(count_params(&spec(LayerKind::Highway, 8, 4, 50)), 20_901);
        assert_eq!(
            count_params(&spec(LayerKind::GeneralizedHighway, 8, 3, 50)),
            23_451
        );
    }

    #[test]
    fn dgm_family_counts_match_formula() {
        assert_eq!(count_params(&spec(LayerKind::Dgm, 4, 3, 50)), 33_301);
        assert_eq!(count_params(&spec(LayerKind::NoRecDgm, 4, 3, 50)), 30_901);
        assert_eq!(count_params(&spec(LayerKind::DeepDgm(3), 4, 3, 50)), 49_801);
        // one sublayer reduces to the plain DGM count
        assert_eq!(
            count_params(&spec(LayerKind::DeepDgm(1), 4, 3, 50)),
            count_params(&spec(LayerKind::Dgm, 4, 3, 50))
        );
        // each extra sublayer adds d*n + n^2 + n scalars per layer
        let base = count_params(&spec(LayerKind::DeepDgm(1), 4, 3, 50));
        let plus = count_params(&spec(LayerKind::DeepDgm(2), 4, 3, 50));
        assert_eq!(plus - base, 3 * (4 * 50 + 50 * 50 + 50));
    }

    #[test]
    fn spec_validation() {
        assert!(spec(LayerKind::Dense, 0, 1, 1).validate().is_err());
        assert!(spec(LayerKind::DeepDgm(0), 4, 1, 8).validate().is_err());
        let mut s = spec(LayerKind::Dense, 4, 1, 8);
        s.hidden_act = ActivationKind::Softmax;
        assert!(s.validate().is_err());
        assert!(spec(LayerKind::Dgm, 4, 3, 50).validate().is_ok());
    }
}
