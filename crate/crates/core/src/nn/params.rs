//! Named parameter collections and the model file format.

use super::{count_params, spec_entries, InitKind, LayerKind, NetError, NetworkSpec, Shape};
use crate::mathcore::{ActivationKind, Mat64, Vec64};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// One parameter tensor: a weight matrix or a bias vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Mat(Mat64),
    Vec(Vec64),
}

impl Tensor {
    pub fn n_scalars(&self) -> usize {
        match self {
            Tensor::Mat(m) => m.as_slice().len(),
            Tensor::Vec(v) => v.len(),
        }
    }

    pub fn as_scalars(&self) -> &[f64] {
        match self {
            Tensor::Mat(m) => m.as_slice(),
            Tensor::Vec(v) => v.as_slice(),
        }
    }

    pub fn as_scalars_mut(&mut self) -> &mut [f64] {
        match self {
            Tensor::Mat(m) => m.as_mut_slice(),
            Tensor::Vec(v) => v.as_mut_slice(),
        }
    }

    fn shape(&self) -> Shape {
        match self {
            Tensor::Mat(m) => Shape::Mat(m.rows(), m.cols()),
            Tensor::Vec(v) => Shape::Vec(v.len()),
        }
    }
}

/// Ordered collection of uniquely named tensors. The order is the canonical
/// one produced by [`spec_entries`]; flatten/unflatten over that order is a
/// bijection.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new(entries: Vec<(String, Tensor)>) -> Self {
        ParamSet { entries }
    }

    /// All-zero tensors with the spec's canonical names and shapes.
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let entries = spec_entries(spec)
            .into_iter()
            .map(|(name, shape)| {
                let t = match shape {
                    Shape::Mat(r, c) => Tensor::Mat(Mat64::zeros(r, c)),
                    Shape::Vec(n) => Tensor::Vec(Vec64::zeros(n)),
                };
                (name, t)
            })
            .collect();
        ParamSet { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_scalars(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.n_scalars()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Tensor)> {
        self.entries.iter()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn tensor_at(&self, i: usize) -> &Tensor {
        &self.entries[i].1
    }

    pub fn tensor_at_mut(&mut self, i: usize) -> &mut Tensor {
        &mut self.entries[i].1
    }

    /// Matrix at position `i`; the engine walks the canonical order, so a
    /// wrong tensor kind here is a programming error.
    pub(crate) fn mat_at(&self, i: usize) -> &Mat64 {
        match &self.entries[i].1 {
            Tensor::Mat(m) => m,
            Tensor::Vec(_) => panic!("expected matrix at entry {i} ({})", self.entries[i].0),
        }
    }

    pub(crate) fn vec_at(&self, i: usize) -> &Vec64 {
        match &self.entries[i].1 {
            Tensor::Vec(v) => v,
            Tensor::Mat(_) => panic!("expected vector at entry {i} ({})", self.entries[i].0),
        }
    }

    pub(crate) fn set_mat(&mut self, i: usize, m: Mat64) {
        self.entries[i].1 = Tensor::Mat(m);
    }

    pub(crate) fn set_vec(&mut self, i: usize, v: Vec64) {
        self.entries[i].1 = Tensor::Vec(v);
    }

    /// Concatenates every tensor, in order, into one flat vector.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_scalars());
        for (_, t) in &self.entries {
            out.extend_from_slice(t.as_scalars());
        }
        out
    }

    /// Writes a flat vector produced by [`ParamSet::flatten`] back into the
    /// tensors. Errors if the length does not match.
    pub fn unflatten(&mut self, flat: &[f64]) -> Result<(), NetError> {
        if flat.len() != self.n_scalars() {
            return Err(NetError::ParamMismatch(format!(
                "flat vector has {} scalars, parameters have {}",
                flat.len(),
                self.n_scalars()
            )));
        }
        let mut pos = 0;
        for (_, t) in &mut self.entries {
            let dst = t.as_scalars_mut();
            dst.copy_from_slice(&flat[pos..pos + dst.len()]);
            pos += dst.len();
        }
        Ok(())
    }

    /// Checks that names and shapes agree with the spec's canonical list.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<(), NetError> {
        let want = spec_entries(spec);
        if want.len() != self.entries.len() {
            return Err(NetError::ParamMismatch(format!(
                "expected {} tensors, got {}",
                want.len(),
                self.entries.len()
            )));
        }
        for ((wname, wshape), (gname, gtensor)) in want.iter().zip(&self.entries) {
            if wname != gname || *wshape != gtensor.shape() {
                return Err(NetError::ParamMismatch(format!(
                    "entry `{gname}` does not match expected `{wname}` {wshape:?}"
                )));
            }
        }
        debug_assert_eq!(self.n_scalars(), count_params(spec));
        Ok(())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the spec header and every named tensor (name, rows, cols, values)
/// with 17 significant digits so read o write is bit-identical.
pub fn write_model(spec: &NetworkSpec, params: &ParamSet, path: &Path) -> Result<(), NetError> {
    params.check_against(spec)?;
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "spec kind={} n_sub={} input_dim={} layers={} nodes={} hidden_act={} gate_act={} init={}",
        spec.kind.id(),
        spec.kind.n_sub(),
        spec.input_dim,
        spec.layers,
        spec.nodes,
        spec.hidden_act.name(),
        spec.gate_act.name(),
        spec.init.id(),
    )?;
    for (name, t) in params.iter() {
        let (rows, cols, data): (usize, usize, &[f64]) = match t {
            Tensor::Mat(m) => (m.rows(), m.cols(), m.as_slice()),
            Tensor::Vec(v) => (1, v.len(), v.as_slice()),
        };
        writeln!(w, "param {name} {rows} {cols}")?;
        for r in 0..rows {
            let line: Vec<String> = data[r * cols..(r + 1) * cols]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a model file written by [`write_model`].
pub fn read_model(path: &Path) -> Result<(NetworkSpec, ParamSet), NetError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| NetError::Format("empty model file".into()))??;
    let spec = parse_spec_header(&header)?;

    let mut params = ParamSet::zeros(&spec);
    let expected = spec_entries(&spec);
    let mut next_line = lines.next();
    for (i, (name, shape)) in expected.iter().enumerate() {
        let head = next_line
            .take()
            .ok_or_else(|| NetError::Format(format!("missing tensor `{name}`")))??;
        let fields: Vec<&str> = head.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "param" {
            return Err(NetError::Format(format!("bad tensor header `{head}`")));
        }
        if fields[1] != name {
            return Err(NetError::Format(format!(
                "expected tensor `{name}`, found `{}`",
                fields[1]
            )));
        }
        let rows: usize = fields[2]
            .parse()
            .map_err(|e| NetError::Format(format!("bad rows: {e}")))?;
        let cols: usize = fields[3]
            .parse()
            .map_err(|e| NetError::Format(format!("bad cols: {e}")))?;
        let want = match shape {
            Shape::Mat(r, c) => (*r, *c),
            Shape::Vec(n) => (1, *n),
        };
        if (rows, cols) != want {
            return Err(NetError::Format(format!(
                "tensor `{name}`: expected {want:?}, got ({rows}, {cols})"
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| NetError::Format(format!("truncated tensor `{name}`")))??;
            for field in line.split_whitespace() {
                let v: f64 = field
                    .parse()
                    .map_err(|e| NetError::Format(format!("tensor `{name}`: {e}")))?;
                data.push(v);
            }
        }
        if data.len() != rows * cols {
            return Err(NetError::Format(format!(
                "tensor `{name}`: expected {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        match shape {
            Shape::Mat(r, c) => params.set_mat(i, Mat64::from_rows(*r, *c, data)),
            Shape::Vec(_) => params.set_vec(i, Vec64::from_vec(data)),
        }
        next_line = lines.next();
    }
    params.check_against(&spec)?;
    Ok((spec, params))
}

fn parse_spec_header(line: &str) -> Result<NetworkSpec, NetError> {
    let body = line
        .strip_prefix("spec ")
        .ok_or_else(|| NetError::Format("model must start with a spec line".into()))?;
    let mut kind_id = None;
    let mut n_sub = 1usize;
    let mut input_dim = None;
    let mut layers = None;
    let mut nodes = None;
    let mut hidden_act = None;
    let mut gate_act = None;
    let mut init = None;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| NetError::Format(format!("bad spec token `{token}`")))?;
        let usize_of = |v: &str| {
            v.parse::<usize>()
                .map_err(|e| NetError::Format(format!("bad value `{v}`: {e}")))
        };
        match key {
            "kind" => kind_id = Some(value.to_string()),
            "n_sub" => n_sub = usize_of(value)?,
            "input_dim" => input_dim = Some(usize_of(value)?),
            "layers" => layers = Some(usize_of(value)?),
            "nodes" => nodes = Some(usize_of(value)?),
            "hidden_act" => {
                hidden_act = Some(value.parse::<ActivationKind>().map_err(NetError::Format)?)
            }
            "gate_act" => {
                gate_act = Some(value.parse::<ActivationKind>().map_err(NetError::Format)?)
            }
            "init" => init = Some(value.parse::<InitKind>().map_err(NetError::Format)?),
            other => return Err(NetError::Format(format!("unknown spec key `{other}`"))),
        }
    }
    let kind = LayerKind::from_id(
        kind_id
            .as_deref()
            .ok_or_else(|| NetError::Format("spec missing kind".into()))?,
        n_sub,
    )
    .map_err(NetError::Format)?;
    let spec = NetworkSpec {
        input_dim: input_dim.ok_or_else(|| NetError::Format("spec missing input_dim".into()))?,
        layers: layers.ok_or_else(|| NetError::Format("spec missing layers".into()))?,
        nodes: nodes.ok_or_else(|| NetError::Format("spec missing nodes".into()))?,
        kind,
        hidden_act: hidden_act.ok_or_else(|| NetError::Format("spec missing hidden_act".into()))?,
        gate_act: gate_act.ok_or_else(|| NetError::Format("spec missing gate_act".into()))?,
        init: init.ok_or_else(|| NetError::Format("spec missing init".into()))?,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_params;

    fn spec() -> NetworkSpec {
        NetworkSpec {
            input_dim: 4,
            layers: 2,
            nodes: 5,
            kind: LayerKind::DeepDgm(2),
            hidden_act: ActivationKind::Tanh,
            gate_act: ActivationKind::Tanh,
            init: InitKind::GlorotNormal,
        }
    }

    #[test]
    fn names_are_unique() {
        let entries = spec_entries(&spec());
        let names: std::collections::HashSet<&str> =
            entries.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names.len(), entries.len());
    }

    #[test]
    fn flatten_unflatten_is_a_bijection() {
        let params = init_params(&spec(), 9).unwrap();
        let flat = params.flatten();
        assert_eq!(flat.len(), count_params(&spec()));
        let mut copy = ParamSet::zeros(&spec());
        copy.unflatten(&flat).unwrap();
        assert_eq!(copy, params);
        assert_eq!(copy.flatten(), flat);
    }

    #[test]
    fn model_round_trip_is_bit_identical() {
        let s = spec();
        let params = init_params(&s, 41).unwrap();
        let mut path = std::env::temp_dir();
        path.push(format!("pricenet_model_{}.txt", std::process::id()));
        write_model(&s, &params, &path).unwrap();
        let (spec_back, params_back) = read_model(&path).unwrap();
        assert_eq!(spec_back, s);
        assert_eq!(params_back, params);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn mismatched_params_detected() {
        let params = init_params(&spec(), 9).unwrap();
        let other = NetworkSpec {
            nodes: 6,
            ..spec()
        };
        assert!(params.check_against(&other).is_err());
    }
}
