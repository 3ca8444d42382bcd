use crate::error::{Error, Result};
use crate::network::Layer;

/// Affine layers with ReLU between consecutive layers and none after the last.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNet {
    layers: Vec<Layer<f64>>,
}

impl ReluNet {
    pub fn new(layers: Vec<Layer<f64>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("a ReLU net needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].d_out != w[1].d_in {
                return Err(Error::Shape(format!("layer maps {} -> {} after {}", w[1].d_in, w[1].d_out, w[0].d_out)));
            }
        }
        Ok(Self { layers })
    }

    /// The single-layer net `x -> W x + b`.
    pub fn affine(d_in: usize, d_out: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        Self::new(vec![Layer::new(d_in, d_out, weight, Some(bias))?])
    }

    /// Two-layer identity `x = relu(x) - relu(-x)`.
    pub fn identity(d: usize) -> Self {
        let mut w1 = vec![0.0; 2 * d * d];
        let mut w2 = vec![0.0; 2 * d * d];
        for i in 0..d {
            w1[(2 * i) * d + i] = 1.0;
            w1[(2 * i + 1) * d + i] = -1.0;
            w2[i * 2 * d + 2 * i] = 1.0;
            w2[i * 2 * d + 2 * i + 1] = -1.0;
        }
        Self {
            layers: vec![
                Layer::new(d, 2 * d, w1, Some(vec![0.0; 2 * d])).expect("shape"),
                Layer::new(2 * d, d, w2, Some(vec![0.0; d])).expect("shape"),
            ],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].d_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").d_out
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer<f64>] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!("expected {} inputs, got {}", self.input_dim(), x.len())));
        }
        let mut h = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            if l > 0 {
                h.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            h = (0..layer.d_out)
                .map(|o| {
                    let row = &layer.weight[o * layer.d_in..(o + 1) * layer.d_in];
                    let s: f64 = row.iter().zip(&h).map(|(w, v)| w * v).sum();
                    s + layer.bias.as_ref().map_or(0.0, |b| b[o])
                })
                .collect();
        }
        Ok(h)
    }

    /// `outer(self(x))`; the touching affine maps are merged so no ReLU is
    /// inserted between them.
    pub fn then(mut self, outer: ReluNet) -> Result<Self> {
        if self.output_dim() != outer.input_dim() {
            return Err(Error::Shape(format!(
                "cannot feed {} outputs into {} inputs",
                self.output_dim(),
                outer.input_dim()
            )));
        }
        let inner = self.layers.pop().expect("nonempty");
        let mut rest = outer.layers.into_iter();
        let first = rest.next().expect("nonempty");
        let (k, m, p) = (inner.d_in, inner.d_out, first.d_out);
        let mut w = vec![0.0; p * k];
        let mut b = vec![0.0; p];
        for o in 0..p {
            for j in 0..m {
                let a = first.weight[o * m + j];
                if a == 0.0 {
                    continue;
                }
                for i in 0..k {
                    w[o * k + i] += a * inner.weight[j * k + i];
                }
                b[o] += a * inner.bias.as_ref().map_or(0.0, |v| v[j]);
            }
            b[o] += first.bias.as_ref().map_or(0.0, |v| v[o]);
        }
        self.layers.push(Layer::new(k, p, w, Some(b))?);
        self.layers.extend(rest);
        Ok(self)
    }

    /// Extend with identity layers to the given depth.
    fn padded(self, depth: usize) -> Result<Self> {
        let mut net = self;
        while net.depth() < depth {
            let d = net.output_dim();
            net = net.then(Self::identity(d))?;
        }
        Ok(net)
    }

    /// Nets side by side on concatenated inputs, outputs concatenated.
    pub fn parallel(nets: Vec<ReluNet>) -> Result<Self> {
        let depth = nets.iter().map(ReluNet::depth).max().ok_or_else(|| Error::Shape("nothing to run in parallel".into()))?;
        let nets = nets.into_iter().map(|n| n.padded(depth)).collect::<Result<Vec<_>>>()?;
        let mut layers = Vec::with_capacity(depth);
        for l in 0..depth {
            let d_in: usize = nets.iter().map(|n| n.layers[l].d_in).sum();
            let d_out: usize = nets.iter().map(|n| n.layers[l].d_out).sum();
            let mut w = vec![0.0; d_in * d_out];
            let mut b = vec![0.0; d_out];
            let (mut ri, mut ro) = (0, 0);
            for net in &nets {
                let layer = &net.layers[l];
                for o in 0..layer.d_out {
                    for i in 0..layer.d_in {
                        w[(ro + o) * d_in + ri + i] = layer.weight[o * layer.d_in + i];
                    }
                    b[ro + o] = layer.bias.as_ref().map_or(0.0, |v| v[o]);
                }
                ri += layer.d_in;
                ro += layer.d_out;
            }
            layers.push(Layer::new(d_in, d_out, w, Some(b))?);
        }
        Self::new(layers)
    }
}

/// `x -> ||x||_1` as `1^T relu((I ⊗ [1; -1]) x)`.
pub fn build_l1_net(d: usize) -> Result<ReluNet> {
    if d == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    let mut w1 = vec![0.0; 2 * d * d];
    for i in 0..d {
        w1[(2 * i) * d + i] = 1.0;
        w1[(2 * i + 1) * d + i] = -1.0;
    }
    ReluNet::new(vec![
        Layer::new(d, 2 * d, w1, Some(vec![0.0; 2 * d]))?,
        Layer::new(2 * d, 1, vec![1.0; 2 * d], Some(vec![0.0]))?,
    ])
}

/// `max(x1, x2) = relu(x1 - x2) + relu(x2) - relu(-x2)`.
fn max2() -> ReluNet {
    ReluNet {
        layers: vec![
            Layer::new(2, 3, vec![1.0, -1.0, 0.0, 1.0, 0.0, -1.0], Some(vec![0.0; 3])).expect("shape"),
            Layer::new(3, 1, vec![1.0, 1.0, -1.0], Some(vec![0.0])).expect("shape"),
        ],
    }
}

/// `x -> max_i x_i` by pairwise reduction; odd inputs pass the last
/// coordinate through an identity lane.
pub fn build_max_net(d: usize) -> Result<ReluNet> {
    match d {
        0 | 1 => Err(Error::Invalid(format!("max net needs at least 2 inputs, got {d}"))),
        2 => Ok(max2()),
        _ => {
            let mut lanes: Vec<ReluNet> = (0..d / 2).map(|_| max2()).collect();
            if d % 2 == 1 {
                lanes.push(ReluNet::identity(1));
            }
            let k = lanes.len();
            ReluNet::parallel(lanes)?.then(build_max_net(k)?)
        }
    }
}

/// `x -> max_k (y_k - L ||x - x_k||_1)`.
pub fn build_maxconv_net(samples: &[(Vec<f64>, f64)], lipschitz: f64) -> Result<ReluNet> {
    let (first, _) = samples.first().ok_or_else(|| Error::Invalid("max-convolution needs at least one sample".into()))?;
    let d = first.len();
    if d == 0 || samples.iter().any(|(x, _)| x.len() != d) {
        return Err(Error::Shape("sample points must share a positive dimension".into()));
    }
    let k = samples.len();
    // repeat x K times
    let mut rep = vec![0.0; k * d * d];
    for r in 0..k {
        for i in 0..d {
            rep[(r * d + i) * d + i] = 1.0;
        }
    }
    let repeat = ReluNet::affine(d, k * d, rep, vec![0.0; k * d])?;
    let blocks = samples
        .iter()
        .map(|(xk, _)| {
            let mut eye = vec![0.0; d * d];
            (0..d).for_each(|i| eye[i * d + i] = 1.0);
            let shift = ReluNet::affine(d, d, eye, xk.iter().map(|v| -v).collect())?;
            shift.then(build_l1_net(d)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scale = vec![0.0; k * k];
    (0..k).for_each(|i| scale[i * k + i] = -lipschitz);
    let offset = ReluNet::affine(k, k, scale, samples.iter().map(|(_, y)| *y).collect())?;
    let net = repeat.then(ReluNet::parallel(blocks)?)?.then(offset)?;
    if k == 1 {
        Ok(net)
    } else {
        net.then(build_max_net(k)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::rng_from_seed;
    use rand::Rng;

    #[test]
    fn l1_examples() {
        let net = build_l1_net(2).unwrap();
        assert_eq!(net.eval(&[3.0, -4.0]).unwrap(), vec![7.0]);
        assert_eq!(net.eval(&[0.0, 0.0]).unwrap(), vec![0.0]);
        for d in 1..6 {
            assert_eq!(build_l1_net(d).unwrap().param_count(), 2 * d * d + 4 * d + 1);
        }
    }

    #[test]
    fn max_examples() {
        assert_eq!(build_max_net(2).unwrap().eval(&[3.0, 5.0]).unwrap(), vec![5.0]);
        assert_eq!(build_max_net(3).unwrap().eval(&[1.0, 7.0, -2.0]).unwrap(), vec![7.0]);
        assert_eq!(build_max_net(3).unwrap().eval(&[1.0, -7.0, 2.0]).unwrap(), vec![2.0]);
        assert!(build_max_net(1).is_err());
        assert_eq!(max2().param_count(), 6 + 3 + 3 + 1);
    }

    #[test]
    fn max_matches_direct_for_small_d() {
        let mut rng = rng_from_seed(3);
        for d in 2..=9 {
            let net = build_max_net(d).unwrap();
            for _ in 0..50 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let expect = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let got = net.eval(&x).unwrap()[0];
                assert!((got - expect).abs() <= 4.0 * f64::EPSILON * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn composition_merges_affine_maps() {
        let a = ReluNet::affine(1, 1, vec![2.0], vec![1.0]).unwrap();
        let b = ReluNet::affine(1, 1, vec![3.0], vec![-1.0]).unwrap();
        let ab = a.then(b).unwrap();
        assert_eq!(ab.depth(), 1);
        assert_eq!(ab.eval(&[4.0]).unwrap(), vec![26.0]);
        let id = ReluNet::identity(3);
        assert_eq!(id.eval(&[1.5, -2.0, 0.0]).unwrap(), vec![1.5, -2.0, 0.0]);
    }

    #[test]
    fn maxconv_examples() {
        let s = vec![(vec![-1.0], 1.0), (vec![0.0], 0.0), (vec![1.0], 1.0)];
        let net = build_maxconv_net(&s, 1.0).unwrap();
        assert_eq!(net.eval(&[0.5]).unwrap(), vec![0.5]);
        let one = build_maxconv_net(&[(vec![0.2, -0.3], 0.7)], 2.0).unwrap();
        for x in [[0.0, 0.0], [1.0, -1.0], [-0.5, 0.25]] {
            let expect = 0.7 - 2.0 * ((x[0] - 0.2f64).abs() + (x[1] + 0.3f64).abs());
            assert!((one.eval(&x).unwrap()[0] - expect).abs() < 1e-12);
        }
        assert!(build_maxconv_net(&[], 1.0).is_err());
    }
}
