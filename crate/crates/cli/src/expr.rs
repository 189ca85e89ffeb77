//! Parser for the training expression mini-grammar.
//!
//! ```text
//! expression := chain ( '=' chain )?
//! chain      := atom '(' chain ')' | name
//! atom       := d0 | d1 | d2 | L0 | L1 | L2 | I | TN '[' atom ']'
//! ```
//!
//! Names are cochain files bound on the command line. The optional
//! right-hand side may not contain `TN`; it is evaluated once and becomes
//! the residual target, so `d1(TN[d0](x)) = L2(g)` trains the weights of
//! the single layer against the fixed cochain `L2(g)`. Without a
//! right-hand side the target is zero.

use std::collections::HashMap;

use cochain::complex::{Cochain, Degree, SimplicialComplex};
use cochain::dec::{self, SparseOperator};
use cochain::topnet::{Activation, ExpressionNode, TNLayer};

pub const GRAMMAR_HELP: &str = "EXPRESSION GRAMMAR:
    expression := chain ( '=' chain )?
    chain      := atom '(' chain ')' | name
    atom       := d0 | d1 | d2 | L0 | L1 | L2 | I | TN '[' atom ']'

dK is the K-th exterior derivative, LK the K-th Hodge Laplacian, I the
identity on the operand's degree, and TN[op] a trainable layer whose fixed
operator is op. Names refer to cochain files bound with --cochain. The
right-hand side must be TN-free; it is evaluated once into the training
target (zero when omitted). Example: \"d1(TN[d0](x)) = L2(g)\".";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Derivative(usize),
    Laplacian(usize),
    Identity,
    Layer(Box<Atom>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprAst {
    Leaf(String),
    Apply(Atom, Box<ExprAst>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedExpression {
    pub lhs: ExprAst,
    pub rhs: Option<ExprAst>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Word(String),
    Open,
    Close,
    BracketOpen,
    BracketClose,
    Equals,
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                tokens.push(Token::Open);
                chars.next();
            }
            ')' => {
                tokens.push(Token::Close);
                chars.next();
            }
            '[' => {
                tokens.push(Token::BracketOpen);
                chars.next();
            }
            ']' => {
                tokens.push(Token::BracketClose);
                chars.next();
            }
            '=' => {
                tokens.push(Token::Equals);
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Word(word));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token, context: &str) -> Result<(), String> {
        match self.next() {
            Some(t) if t == token => Ok(()),
            other => Err(format!("expected {token:?} {context}, found {other:?}")),
        }
    }

    fn parse_chain(&mut self) -> Result<ExprAst, String> {
        let word = match self.next() {
            Some(Token::Word(w)) => w,
            other => return Err(format!("expected an operator or name, found {other:?}")),
        };
        match self.peek() {
            Some(Token::BracketOpen) if word == "TN" => {
                self.next();
                let inner = self.parse_simple_atom()?;
                self.expect(Token::BracketClose, "after the TN operator")?;
                self.expect(Token::Open, "after TN[..]")?;
                let child = self.parse_chain()?;
                self.expect(Token::Close, "to close TN[..](..)")?;
                Ok(ExprAst::Apply(Atom::Layer(Box::new(inner)), Box::new(child)))
            }
            Some(Token::Open) => {
                let atom = simple_atom_from_word(&word)?;
                self.next();
                let child = self.parse_chain()?;
                self.expect(Token::Close, &format!("to close {word}(..)"))?;
                Ok(ExprAst::Apply(atom, Box::new(child)))
            }
            _ => {
                if simple_atom_from_word(&word).is_ok() || word == "TN" {
                    return Err(format!("operator '{word}' needs an argument"));
                }
                Ok(ExprAst::Leaf(word))
            }
        }
    }

    fn parse_simple_atom(&mut self) -> Result<Atom, String> {
        match self.next() {
            Some(Token::Word(w)) => simple_atom_from_word(&w),
            other => Err(format!("expected an operator inside TN[..], found {other:?}")),
        }
    }
}

fn simple_atom_from_word(word: &str) -> Result<Atom, String> {
    match word {
        "d0" => Ok(Atom::Derivative(0)),
        "d1" => Ok(Atom::Derivative(1)),
        "d2" => Ok(Atom::Derivative(2)),
        "L0" => Ok(Atom::Laplacian(0)),
        "L1" => Ok(Atom::Laplacian(1)),
        "L2" => Ok(Atom::Laplacian(2)),
        "I" => Ok(Atom::Identity),
        other => Err(format!("unknown operator '{other}'")),
    }
}

/// Parses an expression string into its left-hand side and optional
/// right-hand side.
pub fn parse_expression(text: &str) -> Result<ParsedExpression, String> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let lhs = parser.parse_chain()?;
    let rhs = match parser.next() {
        None => None,
        Some(Token::Equals) => {
            let rhs = parser.parse_chain()?;
            if parser.peek().is_some() {
                return Err("trailing tokens after the right-hand side".into());
            }
            if contains_layer(&rhs) {
                return Err("the right-hand side must not contain TN layers".into());
            }
            Some(rhs)
        }
        Some(other) => return Err(format!("trailing token {other:?}")),
    };
    Ok(ParsedExpression { lhs, rhs })
}

fn contains_layer(ast: &ExprAst) -> bool {
    match ast {
        ExprAst::Leaf(_) => false,
        ExprAst::Apply(Atom::Layer(_), _) => true,
        ExprAst::Apply(_, child) => contains_layer(child),
    }
}

fn pure_degree(degree: Degree) -> Result<usize, String> {
    match degree {
        Degree::K(k) => Ok(k),
        Degree::Mixed => Err("mixed-degree cochains are not valid expression leaves".into()),
    }
}

fn atom_operator(
    atom: &Atom,
    complex: &SimplicialComplex,
    operand_degree: usize,
) -> Result<SparseOperator<f64>, String> {
    match atom {
        Atom::Derivative(k) => dec::coboundary_matrix(complex, *k).map_err(|e| e.to_string()),
        Atom::Laplacian(k) => dec::hodge_laplacian(complex, *k).map_err(|e| e.to_string()),
        Atom::Identity => SparseOperator::identity(complex, operand_degree).map_err(|e| e.to_string()),
        Atom::Layer(_) => unreachable!("layers are resolved by the caller"),
    }
}

/// Resolves the left-hand side into an expression tree over the given
/// complex. Layer weights are square by default (`out_channels` overrides
/// every layer's output width); their values are placeholders that
/// training re-initializes from its seed.
pub fn resolve_lhs(
    ast: &ExprAst,
    complex: &SimplicialComplex,
    inputs: &HashMap<String, Cochain<f64>>,
    activation: Activation,
    out_channels: Option<usize>,
) -> Result<ExpressionNode<f64>, String> {
    let (node, _, _) = resolve_node(ast, complex, inputs, activation, out_channels)?;
    Ok(node)
}

fn resolve_node(
    ast: &ExprAst,
    complex: &SimplicialComplex,
    inputs: &HashMap<String, Cochain<f64>>,
    activation: Activation,
    out_channels: Option<usize>,
) -> Result<(ExpressionNode<f64>, usize, usize), String> {
    match ast {
        ExprAst::Leaf(name) => {
            let cochain = inputs
                .get(name)
                .ok_or_else(|| format!("no cochain bound to '{name}' (use --cochain {name}=FILE)"))?;
            let degree = pure_degree(cochain.degree())?;
            Ok((
                ExpressionNode::input_like(name.clone(), cochain),
                degree,
                cochain.channels(),
            ))
        }
        ExprAst::Apply(Atom::Layer(inner), child) => {
            let (child_node, child_degree, channels) =
                resolve_node(child, complex, inputs, activation, out_channels)?;
            let operator = atom_operator(inner, complex, child_degree)?;
            let out_degree = operator_output_degree(inner, child_degree);
            let c_out = out_channels.unwrap_or(channels);
            let layer = TNLayer::seeded(operator, channels, c_out, activation, 0)
                .map_err(|e| e.to_string())?;
            Ok((
                ExpressionNode::layer(layer, child_node),
                out_degree,
                c_out,
            ))
        }
        ExprAst::Apply(atom, child) => {
            let (child_node, child_degree, channels) =
                resolve_node(child, complex, inputs, activation, out_channels)?;
            let operator = atom_operator(atom, complex, child_degree)?;
            let out_degree = operator_output_degree(atom, child_degree);
            Ok((
                ExpressionNode::fixed(operator, child_node),
                out_degree,
                channels,
            ))
        }
    }
}

fn operator_output_degree(atom: &Atom, operand_degree: usize) -> usize {
    match atom {
        Atom::Derivative(k) => k + 1,
        Atom::Laplacian(k) => *k,
        Atom::Identity => operand_degree,
        Atom::Layer(inner) => operator_output_degree(inner, operand_degree),
    }
}

/// Evaluates a TN-free chain into the cochain it denotes.
pub fn evaluate_rhs(
    ast: &ExprAst,
    complex: &SimplicialComplex,
    inputs: &HashMap<String, Cochain<f64>>,
) -> Result<Cochain<f64>, String> {
    match ast {
        ExprAst::Leaf(name) => inputs
            .get(name)
            .cloned()
            .ok_or_else(|| format!("no cochain bound to '{name}' (use --cochain {name}=FILE)")),
        ExprAst::Apply(Atom::Layer(_), _) => Err("the right-hand side must be TN-free".into()),
        ExprAst::Apply(atom, child) => {
            let value = evaluate_rhs(child, complex, inputs)?;
            let degree = pure_degree(value.degree())?;
            let operator = atom_operator(atom, complex, degree)?;
            dec::apply(&operator, &value).map_err(|e| e.to_string())
        }
    }
}
