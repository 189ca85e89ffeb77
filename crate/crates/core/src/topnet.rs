//! Topological network layers `f -> phi(A f W)`: a fixed operator, a
//! trainable weight matrix acting on channels, and a pointwise
//! non-linearity. With identity weight and identity activation the layer
//! degenerates to plain operator application, and its forward pass is
//! equivalent to a message-passing protocol read off the operator's
//! sparsity pattern. Layers compose with fixed operators into trainable
//! expressions such as `d1(TN[d0](f)) = L2(g)`.

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{Cochain, ComplexId, Degree, SimplicialComplex};
use crate::dec::{self, SparseOperator};
use crate::error::{Error, Result};
use crate::optim::{self, FnObjective, TrainConfig};
use crate::scalar::Scalar;

/// Pointwise non-linearity of a layer.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Activation {
    #[default]
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => {
                if x > T::zero() {
                    x
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => T::one() / (T::one() + (-x).exp()),
        }
    }

    /// Derivative at the pre-activation value. The ReLU subgradient at 0 is
    /// taken to be 0.
    pub fn derivative<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                T::one() - t * t
            }
            Activation::Sigmoid => {
                let s = T::one() / (T::one() + (-x).exp());
                s * (T::one() - s)
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Parse(format!("unknown activation '{other}'"))),
        }
    }
}

/// A topological network layer: fixed operator, trainable channel-mixing
/// weight, pointwise activation.
#[derive(Clone, Debug)]
pub struct TNLayer<T> {
    operator: SparseOperator<T>,
    weight: Array2<T>,
    activation: Activation,
}

impl<T: Scalar> TNLayer<T> {
    pub fn new(operator: SparseOperator<T>, weight: Array2<T>, activation: Activation) -> Result<Self> {
        if weight.nrows() == 0 || weight.ncols() == 0 {
            return Err(Error::Dimension("weight matrix must be non-empty".into()));
        }
        Ok(Self {
            operator,
            weight,
            activation,
        })
    }

    /// Layer with a seeded uniform weight in `[-s, s]`, `s = 1/sqrt(c_in)`.
    pub fn seeded(
        operator: SparseOperator<T>,
        c_in: usize,
        c_out: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight = init_weight(&mut rng, c_in, c_out);
        Self::new(operator, weight, activation)
    }

    pub fn operator(&self) -> &SparseOperator<T> {
        &self.operator
    }

    pub fn weight(&self) -> &Array2<T> {
        &self.weight
    }

    pub fn set_weight(&mut self, weight: Array2<T>) {
        self.weight = weight;
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn c_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn c_out(&self) -> usize {
        self.weight.ncols()
    }
}

fn init_weight<T: Scalar>(rng: &mut ChaCha8Rng, c_in: usize, c_out: usize) -> Array2<T> {
    let scale = 1.0 / (c_in as f64).sqrt();
    Array2::from_shape_fn((c_in, c_out), |_| {
        T::from_f64_lossy(rng.gen_range(-scale..scale))
    })
}

fn is_identity<T: Scalar>(w: &Array2<T>) -> bool {
    w.nrows() == w.ncols()
        && w.indexed_iter().all(|((r, c), &v)| {
            if r == c {
                v == T::one()
            } else {
                v == T::zero()
            }
        })
}

fn check_layer_input<T: Scalar>(layer: &TNLayer<T>, f: &Cochain<T>) -> Result<()> {
    if f.complex_id() != layer.operator.domain().complex {
        return Err(Error::Dimension(
            "cochain belongs to a different complex than the layer operator".into(),
        ));
    }
    if f.degree() != layer.operator.domain().degree {
        return Err(Error::Dimension(format!(
            "layer expects degree {}, cochain has degree {}",
            layer.operator.domain().degree,
            f.degree()
        )));
    }
    if f.channels() != layer.c_in() {
        return Err(Error::Dimension(format!(
            "layer expects {} channels, cochain has {}",
            layer.c_in(),
            f.channels()
        )));
    }
    Ok(())
}

/// Forward pass `phi(A f W)`.
///
/// When the weight is exactly the identity the channel mix is skipped, so
/// with identity activation the output bitwise equals [`dec::apply`].
pub fn tn_forward<T: Scalar>(layer: &TNLayer<T>, f: &Cochain<T>) -> Result<Cochain<T>> {
    check_layer_input(layer, f)?;
    let propagated = layer.operator.apply_dense(f.values())?;
    let pre = if is_identity(&layer.weight) {
        propagated
    } else {
        propagated.dot(&layer.weight)
    };
    let out = pre.mapv(|x| layer.activation.apply(x));
    Ok(Cochain::from_parts(
        layer.operator.codomain().complex,
        layer.operator.codomain().degree,
        out,
    ))
}

/// Backward pass of a layer under an upstream gradient shaped like the
/// layer output: returns the weight gradient and the input gradient.
pub fn tn_gradients<T: Scalar>(
    layer: &TNLayer<T>,
    f: &Cochain<T>,
    upstream: &Cochain<T>,
) -> Result<(Array2<T>, Cochain<T>)> {
    check_layer_input(layer, f)?;
    if upstream.values().nrows() != layer.operator.rows()
        || upstream.values().ncols() != layer.c_out()
    {
        return Err(Error::Dimension(format!(
            "upstream gradient has shape {}x{}, layer output is {}x{}",
            upstream.values().nrows(),
            upstream.values().ncols(),
            layer.operator.rows(),
            layer.c_out()
        )));
    }
    let propagated = layer.operator.apply_dense(f.values())?;
    let pre = propagated.dot(&layer.weight);
    let mut gated = upstream.values().clone();
    gated.zip_mut_with(&pre, |g, &p| *g *= layer.activation.derivative(p));
    let grad_weight = propagated.t().dot(&gated);
    let grad_input = layer
        .operator
        .transpose()
        .apply_dense(&gated.dot(&layer.weight.t().to_owned()))?;
    Ok((
        grad_weight,
        Cochain::from_parts(f.complex_id(), f.degree(), grad_input),
    ))
}

/// Per-target adjacency lists with coefficients, read off an operator's
/// sparsity pattern.
#[derive(Clone, Debug)]
pub struct Neighborhood<T> {
    incoming: Vec<Vec<(usize, T)>>,
    source_len: usize,
    domain: dec::SpaceTag,
    codomain: dec::SpaceTag,
}

impl<T: Scalar> Neighborhood<T> {
    pub fn from_operator(operator: &SparseOperator<T>) -> Self {
        let mut incoming = vec![Vec::new(); operator.rows()];
        for &(r, c, v) in operator.entries() {
            incoming[r].push((c, v));
        }
        Self {
            incoming,
            source_len: operator.cols(),
            domain: operator.domain(),
            codomain: operator.codomain(),
        }
    }

    pub fn targets(&self) -> &[Vec<(usize, T)>] {
        &self.incoming
    }
}

/// Message-passing form of the layer forward pass: per target simplex,
/// accumulate `sum_source coeff * f(source)` over the neighborhood, then
/// mix channels with the weight and apply the activation. No matrix
/// product is formed at any point.
pub fn message_passing_forward<T: Scalar>(
    neighborhood: &Neighborhood<T>,
    f: &Cochain<T>,
    weight: &Array2<T>,
    activation: Activation,
) -> Result<Cochain<T>> {
    if f.complex_id() != neighborhood.domain.complex || f.degree() != neighborhood.domain.degree {
        return Err(Error::Dimension(
            "cochain does not live on the neighborhood's source space".into(),
        ));
    }
    if f.values().nrows() != neighborhood.source_len {
        return Err(Error::Dimension(format!(
            "cochain has {} rows, neighborhood sources number {}",
            f.values().nrows(),
            neighborhood.source_len
        )));
    }
    if f.channels() != weight.nrows() {
        return Err(Error::Dimension(format!(
            "weight expects {} channels, cochain has {}",
            weight.nrows(),
            f.channels()
        )));
    }
    let values = f.values();
    let (c_in, c_out) = (weight.nrows(), weight.ncols());
    let mut out = Array2::zeros((neighborhood.incoming.len(), c_out));
    let mut message = vec![T::zero(); c_in];
    for (target, sources) in neighborhood.incoming.iter().enumerate() {
        for m in message.iter_mut() {
            *m = T::zero();
        }
        for &(source, coeff) in sources {
            for (ch, m) in message.iter_mut().enumerate() {
                *m += coeff * values[(source, ch)];
            }
        }
        for co in 0..c_out {
            let mut acc = T::zero();
            for (ci, m) in message.iter().enumerate() {
                acc += *m * weight[(ci, co)];
            }
            out[(target, co)] = activation.apply(acc);
        }
    }
    Ok(Cochain::from_parts(
        neighborhood.codomain.complex,
        neighborhood.codomain.degree,
        out,
    ))
}

/// Shape of a value flowing through an expression.
#[derive(Clone, Copy, PartialEq, Debug)]
struct ValueShape {
    complex: ComplexId,
    degree: Degree,
    rows: usize,
    channels: usize,
}

/// An unvalidated expression tree. Leaves are named inputs; interior nodes
/// apply a fixed operator or a trainable layer; an optional residual root
/// turns the tree into the objective `|child - target|_F^2`.
#[derive(Clone, Debug)]
pub enum ExpressionNode<T> {
    Input {
        name: String,
        complex: ComplexId,
        degree: Degree,
        rows: usize,
        channels: usize,
    },
    FixedOp {
        operator: SparseOperator<T>,
        child: Box<ExpressionNode<T>>,
    },
    TnLayer {
        layer: TNLayer<T>,
        child: Box<ExpressionNode<T>>,
    },
    ResidualTarget {
        target: Cochain<T>,
        child: Box<ExpressionNode<T>>,
    },
}

impl<T: Scalar> ExpressionNode<T> {
    /// Input leaf shaped like an existing cochain.
    pub fn input_like(name: impl Into<String>, f: &Cochain<T>) -> Self {
        ExpressionNode::Input {
            name: name.into(),
            complex: f.complex_id(),
            degree: f.degree(),
            rows: f.values().nrows(),
            channels: f.channels(),
        }
    }

    /// Input leaf on the degree-k cochain space of a complex.
    pub fn input(
        name: impl Into<String>,
        complex: &SimplicialComplex,
        k: usize,
        channels: usize,
    ) -> Self {
        ExpressionNode::Input {
            name: name.into(),
            complex: complex.id(),
            degree: Degree::K(k),
            rows: complex.n_simplices(k),
            channels,
        }
    }

    pub fn fixed(operator: SparseOperator<T>, child: ExpressionNode<T>) -> Self {
        ExpressionNode::FixedOp {
            operator,
            child: Box::new(child),
        }
    }

    pub fn layer(layer: TNLayer<T>, child: ExpressionNode<T>) -> Self {
        ExpressionNode::TnLayer {
            layer,
            child: Box::new(child),
        }
    }

    pub fn residual(target: Cochain<T>, child: ExpressionNode<T>) -> Self {
        ExpressionNode::ResidualTarget {
            target,
            child: Box::new(child),
        }
    }

    fn count_layers(&self) -> usize {
        match self {
            ExpressionNode::Input { .. } => 0,
            ExpressionNode::FixedOp { child, .. } => child.count_layers(),
            ExpressionNode::TnLayer { child, .. } => 1 + child.count_layers(),
            ExpressionNode::ResidualTarget { child, .. } => child.count_layers(),
        }
    }
}

/// A validated expression: degrees and shapes chain from the leaves to the
/// root. Layer weights are indexed in post-order.
#[derive(Clone, Debug)]
pub struct Expression<T> {
    root: ExpressionNode<T>,
    layer_shapes: Vec<(usize, usize)>,
    output: ValueShape,
}

/// Validates an expression tree, reporting the first mismatched link.
///
/// Adjacent linear stages are composed into a single sparse operator
/// before evaluation, so a pipeline like `d1(TN[d0](f))` with identity
/// activation applies the exact product `d1 * d0` and annihilates exactly.
pub fn build_expression<T: Scalar>(root: ExpressionNode<T>) -> Result<Expression<T>> {
    let mut layer_shapes = Vec::new();
    check_node(&root, &mut layer_shapes, true)?;
    let fused = fuse_linear(root)?;
    layer_shapes.clear();
    let output = check_node(&fused, &mut layer_shapes, true)?;
    Ok(Expression {
        root: fused,
        layer_shapes,
        output,
    })
}

/// Bottom-up composition of consecutive linear maps: fixed op over fixed
/// op, fixed op over an identity-activation layer, and a layer over a
/// fixed op all collapse into one operator.
fn fuse_linear<T: Scalar>(node: ExpressionNode<T>) -> Result<ExpressionNode<T>> {
    Ok(match node {
        leaf @ ExpressionNode::Input { .. } => leaf,
        ExpressionNode::ResidualTarget { target, child } => ExpressionNode::ResidualTarget {
            target,
            child: Box::new(fuse_linear(*child)?),
        },
        ExpressionNode::FixedOp { operator, child } => match fuse_linear(*child)? {
            ExpressionNode::FixedOp {
                operator: inner,
                child,
            } => ExpressionNode::FixedOp {
                operator: operator.matmul(&inner)?,
                child,
            },
            ExpressionNode::TnLayer { layer, child }
                if layer.activation() == Activation::Identity =>
            {
                let fused = TNLayer::new(
                    operator.matmul(layer.operator())?,
                    layer.weight().clone(),
                    Activation::Identity,
                )?;
                ExpressionNode::TnLayer {
                    layer: fused,
                    child,
                }
            }
            other => ExpressionNode::FixedOp {
                operator,
                child: Box::new(other),
            },
        },
        ExpressionNode::TnLayer { layer, child } => match fuse_linear(*child)? {
            ExpressionNode::FixedOp {
                operator: inner,
                child,
            } => {
                let fused = TNLayer::new(
                    layer.operator().matmul(&inner)?,
                    layer.weight().clone(),
                    layer.activation(),
                )?;
                ExpressionNode::TnLayer {
                    layer: fused,
                    child,
                }
            }
            other => ExpressionNode::TnLayer {
                layer,
                child: Box::new(other),
            },
        },
    })
}

fn check_node<T: Scalar>(
    node: &ExpressionNode<T>,
    layer_shapes: &mut Vec<(usize, usize)>,
    is_root: bool,
) -> Result<ValueShape> {
    match node {
        ExpressionNode::Input {
            complex,
            degree,
            rows,
            channels,
            ..
        } => Ok(ValueShape {
            complex: *complex,
            degree: *degree,
            rows: *rows,
            channels: *channels,
        }),
        ExpressionNode::FixedOp { operator, child } => {
            let shape = check_node(child, layer_shapes, false)?;
            check_chain("fixed operator", operator, &shape)?;
            Ok(ValueShape {
                complex: operator.codomain().complex,
                degree: operator.codomain().degree,
                rows: operator.rows(),
                channels: shape.channels,
            })
        }
        ExpressionNode::TnLayer { layer, child } => {
            let shape = check_node(child, layer_shapes, false)?;
            check_chain("layer operator", layer.operator(), &shape)?;
            if shape.channels != layer.c_in() {
                return Err(Error::ChainDegree(format!(
                    "layer weight expects {} channels, child produces {}",
                    layer.c_in(),
                    shape.channels
                )));
            }
            layer_shapes.push((layer.c_in(), layer.c_out()));
            Ok(ValueShape {
                complex: layer.operator().codomain().complex,
                degree: layer.operator().codomain().degree,
                rows: layer.operator().rows(),
                channels: layer.c_out(),
            })
        }
        ExpressionNode::ResidualTarget { target, child } => {
            if !is_root {
                return Err(Error::ChainDegree(
                    "residual target may only appear at the root".into(),
                ));
            }
            let shape = check_node(child, layer_shapes, false)?;
            let want = ValueShape {
                complex: target.complex_id(),
                degree: target.degree(),
                rows: target.values().nrows(),
                channels: target.channels(),
            };
            if shape != want {
                return Err(Error::ChainDegree(format!(
                    "residual target has degree {} with {} rows x {} channels, expression produces degree {} with {} rows x {} channels",
                    want.degree, want.rows, want.channels, shape.degree, shape.rows, shape.channels
                )));
            }
            Ok(shape)
        }
    }
}

fn check_chain<T: Scalar>(
    what: &str,
    operator: &SparseOperator<T>,
    child: &ValueShape,
) -> Result<()> {
    if operator.domain().complex != child.complex {
        return Err(Error::ChainDegree(format!(
            "{what} lives on a different complex than its operand"
        )));
    }
    if operator.domain().degree != child.degree || operator.cols() != child.rows {
        return Err(Error::ChainDegree(format!(
            "{what} expects degree {} ({} rows), child produces degree {} ({} rows)",
            operator.domain().degree,
            operator.cols(),
            child.degree,
            child.rows
        )));
    }
    Ok(())
}

impl<T: Scalar> Expression<T> {
    pub fn n_layers(&self) -> usize {
        self.layer_shapes.len()
    }

    pub fn layer_shapes(&self) -> &[(usize, usize)] {
        &self.layer_shapes
    }

    pub fn output_degree(&self) -> Degree {
        self.output.degree
    }

    /// Initial weights: the weights stored in the layer nodes, post-order.
    pub fn initial_weights(&self) -> Vec<Array2<T>> {
        let mut weights = Vec::with_capacity(self.layer_shapes.len());
        collect_weights(&self.root, &mut weights);
        weights
    }

    /// Seeded uniform weights in `[-s, s]`, `s = 1/sqrt(c_in)` per layer.
    pub fn seeded_weights(&self, seed: u64) -> Vec<Array2<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.layer_shapes
            .iter()
            .map(|&(c_in, c_out)| init_weight(&mut rng, c_in, c_out))
            .collect()
    }

    /// Output of the tree (for a residual root, the child's output) under
    /// the given weights.
    pub fn forward(
        &self,
        inputs: &HashMap<String, Cochain<T>>,
        weights: &[Array2<T>],
    ) -> Result<Array2<T>> {
        self.check_weights(weights)?;
        forward_node(&self.root, inputs, weights, 0)
    }

    /// Squared Frobenius distance between the tree output and the residual
    /// target (zero when the root has no target).
    pub fn loss(&self, inputs: &HashMap<String, Cochain<T>>, weights: &[Array2<T>]) -> Result<T> {
        Ok(self.loss_and_grads(inputs, weights)?.0)
    }

    /// Loss together with the gradient with respect to every layer weight.
    pub fn loss_and_grads(
        &self,
        inputs: &HashMap<String, Cochain<T>>,
        weights: &[Array2<T>],
    ) -> Result<(T, Vec<Array2<T>>)> {
        self.check_weights(weights)?;
        let (body, target) = match &self.root {
            ExpressionNode::ResidualTarget { target, child } => (child.as_ref(), Some(target)),
            other => (other, None),
        };
        let out = forward_node(body, inputs, weights, 0)?;
        let diff = match target {
            Some(t) => &out - t.values(),
            None => out,
        };
        let loss = diff.iter().map(|&d| d * d).sum();
        let upstream = diff.mapv(|d| T::from_f64_lossy(2.0) * d);
        let mut grads: Vec<Array2<T>> = self
            .layer_shapes
            .iter()
            .map(|&(ci, co)| Array2::zeros((ci, co)))
            .collect();
        backward_node(body, inputs, weights, 0, upstream, &mut grads)?;
        Ok((loss, grads))
    }

    fn check_weights(&self, weights: &[Array2<T>]) -> Result<()> {
        if weights.len() != self.layer_shapes.len() {
            return Err(Error::Dimension(format!(
                "expression has {} layers, got {} weight matrices",
                self.layer_shapes.len(),
                weights.len()
            )));
        }
        for (w, &(ci, co)) in weights.iter().zip(&self.layer_shapes) {
            if w.nrows() != ci || w.ncols() != co {
                return Err(Error::Dimension(format!(
                    "weight has shape {}x{}, layer expects {ci}x{co}",
                    w.nrows(),
                    w.ncols()
                )));
            }
        }
        Ok(())
    }
}

fn collect_weights<T: Scalar>(node: &ExpressionNode<T>, out: &mut Vec<Array2<T>>) {
    match node {
        ExpressionNode::Input { .. } => {}
        ExpressionNode::FixedOp { child, .. } | ExpressionNode::ResidualTarget { child, .. } => {
            collect_weights(child, out)
        }
        ExpressionNode::TnLayer { layer, child } => {
            collect_weights(child, out);
            out.push(layer.weight().clone());
        }
    }
}

fn lookup_input<'a, T: Scalar>(
    inputs: &'a HashMap<String, Cochain<T>>,
    name: &str,
    shape: ValueShape,
) -> Result<&'a Cochain<T>> {
    let f = inputs
        .get(name)
        .ok_or_else(|| Error::Dimension(format!("no cochain bound to input '{name}'")))?;
    if f.complex_id() != shape.complex
        || f.degree() != shape.degree
        || f.values().nrows() != shape.rows
        || f.channels() != shape.channels
    {
        return Err(Error::Dimension(format!(
            "cochain bound to '{name}' does not match the declared input shape"
        )));
    }
    Ok(f)
}

fn forward_node<T: Scalar>(
    node: &ExpressionNode<T>,
    inputs: &HashMap<String, Cochain<T>>,
    weights: &[Array2<T>],
    base: usize,
) -> Result<Array2<T>> {
    match node {
        ExpressionNode::Input {
            name,
            complex,
            degree,
            rows,
            channels,
        } => {
            let shape = ValueShape {
                complex: *complex,
                degree: *degree,
                rows: *rows,
                channels: *channels,
            };
            Ok(lookup_input(inputs, name, shape)?.values().clone())
        }
        ExpressionNode::FixedOp { operator, child } => {
            let value = forward_node(child, inputs, weights, base)?;
            operator.apply_dense(&value)
        }
        ExpressionNode::TnLayer { layer, child } => {
            let my_index = base + child.count_layers();
            let value = forward_node(child, inputs, weights, base)?;
            let propagated = layer.operator().apply_dense(&value)?;
            let weight = &weights[my_index];
            let pre = if is_identity(weight) {
                propagated
            } else {
                propagated.dot(weight)
            };
            Ok(pre.mapv(|x| layer.activation().apply(x)))
        }
        ExpressionNode::ResidualTarget { child, .. } => forward_node(child, inputs, weights, base),
    }
}

fn backward_node<T: Scalar>(
    node: &ExpressionNode<T>,
    inputs: &HashMap<String, Cochain<T>>,
    weights: &[Array2<T>],
    base: usize,
    upstream: Array2<T>,
    grads: &mut [Array2<T>],
) -> Result<()> {
    match node {
        ExpressionNode::Input { .. } => Ok(()),
        ExpressionNode::FixedOp { operator, child } => {
            let child_upstream = operator.transpose().apply_dense(&upstream)?;
            backward_node(child, inputs, weights, base, child_upstream, grads)
        }
        ExpressionNode::TnLayer { layer, child } => {
            let my_index = base + child.count_layers();
            let value = forward_node(child, inputs, weights, base)?;
            let propagated = layer.operator().apply_dense(&value)?;
            let weight = &weights[my_index];
            let pre = propagated.dot(weight);
            let mut gated = upstream;
            gated.zip_mut_with(&pre, |g, &p| *g *= layer.activation().derivative(p));
            grads[my_index] += &propagated.t().dot(&gated);
            let child_upstream = layer
                .operator()
                .transpose()
                .apply_dense(&gated.dot(&weight.t().to_owned()))?;
            backward_node(child, inputs, weights, base, child_upstream, grads)
        }
        ExpressionNode::ResidualTarget { child, .. } => {
            backward_node(child, inputs, weights, base, upstream, grads)
        }
    }
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainResult<T> {
    pub weights: Vec<Array2<T>>,
    pub loss_history: Vec<T>,
}

/// Trains every layer weight in the expression by deterministic gradient
/// descent from a seeded initialization.
pub fn train_expression<T: Scalar>(
    expr: &Expression<T>,
    inputs: &HashMap<String, Cochain<T>>,
    config: &TrainConfig,
) -> Result<TrainResult<T>> {
    let shapes = expr.layer_shapes().to_vec();
    let init = flatten(&expr.seeded_weights(config.seed));
    let dim = init.len();

    let eval = |params: &[T]| -> T {
        let weights = unflatten(params, &shapes);
        expr.loss(inputs, &weights).expect("validated expression")
    };
    let grad = |params: &[T]| -> Vec<T> {
        let weights = unflatten(params, &shapes);
        let (_, grads) = expr
            .loss_and_grads(inputs, &weights)
            .expect("validated expression");
        flatten(&grads)
    };
    let objective = FnObjective::new(dim, eval, grad);
    let (final_params, loss_history) = optim::gradient_descent(&objective, &init, config)?;
    Ok(TrainResult {
        weights: unflatten(&final_params, &shapes),
        loss_history,
    })
}

fn flatten<T: Scalar>(weights: &[Array2<T>]) -> Vec<T> {
    weights
        .iter()
        .flat_map(|w| w.iter().copied().collect::<Vec<_>>())
        .collect()
}

fn unflatten<T: Scalar>(params: &[T], shapes: &[(usize, usize)]) -> Vec<Array2<T>> {
    let mut out = Vec::with_capacity(shapes.len());
    let mut offset = 0;
    for &(r, c) in shapes {
        let count = r * c;
        out.push(
            Array2::from_shape_vec((r, c), params[offset..offset + count].to_vec())
                .expect("shape bookkeeping"),
        );
        offset += count;
    }
    out
}
