//! Expression trees: representation, random construction, evaluation,
//! subtree variation operators, and the canonical prefix serialization.

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// How many node pairs a subtree crossover tries before giving up and
/// passing the parents through unchanged.
const CROSSOVER_ATTEMPTS: usize = 8;

/// Probability that a grow-method node becomes an operator when depth
/// still permits one.
const GROW_BRANCH_PROB: f64 = 0.7;

/// The fixed ten-operator function set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpCode {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    SqrtAbs,
    Square,
    Exp,
    LogAbs,
}

impl OpCode {
    pub const ALL: [OpCode; 10] = [
        OpCode::Add,
        OpCode::Sub,
        OpCode::Mul,
        OpCode::Div,
        OpCode::Sin,
        OpCode::Cos,
        OpCode::SqrtAbs,
        OpCode::Square,
        OpCode::Exp,
        OpCode::LogAbs,
    ];

    pub fn arity(self) -> usize {
        match self {
            OpCode::Add | OpCode::Sub | OpCode::Mul | OpCode::Div => 2,
            _ => 1,
        }
    }

    /// Token used by the canonical prefix grammar.
    pub fn token(self) -> &'static str {
        match self {
            OpCode::Add => "add",
            OpCode::Sub => "sub",
            OpCode::Mul => "mul",
            OpCode::Div => "div",
            OpCode::Sin => "sin",
            OpCode::Cos => "cos",
            OpCode::SqrtAbs => "sqrtabs",
            OpCode::Square => "square",
            OpCode::Exp => "exp",
            OpCode::LogAbs => "logabs",
        }
    }

    fn from_token(tok: &str) -> Option<OpCode> {
        OpCode::ALL.iter().copied().find(|op| op.token() == tok)
    }

    /// Division and exp are unprotected and may produce non-finite values;
    /// sqrt and log are absolute-value protected.
    fn apply1(self, x: f64) -> f64 {
        match self {
            OpCode::Sin => x.sin(),
            OpCode::Cos => x.cos(),
            OpCode::SqrtAbs => x.abs().sqrt(),
            OpCode::Square => x * x,
            OpCode::Exp => x.exp(),
            OpCode::LogAbs => x.abs().ln(),
            _ => unreachable!("binary opcode applied as unary"),
        }
    }

    fn apply2(self, a: f64, b: f64) -> f64 {
        match self {
            OpCode::Add => a + b,
            OpCode::Sub => a - b,
            OpCode::Mul => a * b,
            OpCode::Div => a / b,
            _ => unreachable!("unary opcode applied as binary"),
        }
    }
}

/// A node of an expression tree. Operator nodes carry exactly
/// `opcode.arity()` children; variables are zero-based input indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Op(OpCode, Vec<Node>),
    Var(usize),
    Const(f64),
}

impl Node {
    fn count(&self) -> usize {
        match self {
            Node::Op(_, children) => 1 + children.iter().map(Node::count).sum::<usize>(),
            _ => 1,
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Op(_, children) => {
                1 + children.iter().map(Node::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }

    /// Preorder lookup; `remaining` counts down to the target index.
    fn find(&self, remaining: &mut usize, depth: usize) -> Option<(&Node, usize)> {
        if *remaining == 0 {
            return Some((self, depth));
        }
        *remaining -= 1;
        if let Node::Op(_, children) = self {
            for child in children {
                if let Some(hit) = child.find(remaining, depth + 1) {
                    return Some(hit);
                }
            }
        }
        None
    }

    /// Clone with the node at preorder index `remaining` replaced.
    fn replaced(&self, remaining: &mut usize, replacement: &Node) -> Node {
        if *remaining == 0 {
            *remaining = usize::MAX; // mark done
            return replacement.clone();
        }
        *remaining -= 1;
        match self {
            Node::Op(op, children) => {
                let new_children = children
                    .iter()
                    .map(|c| {
                        if *remaining == usize::MAX {
                            c.clone()
                        } else {
                            c.replaced(remaining, replacement)
                        }
                    })
                    .collect();
                Node::Op(*op, new_children)
            }
            other => other.clone(),
        }
    }
}

/// A single gene: a rooted expression tree over input variables, constants,
/// and the ten-operator function set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprTree {
    root: Node,
}

/// Result of evaluating a tree over a dataset: one value per row plus a
/// flag recording whether every value came out finite.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub values: Vec<f64>,
    pub finite: bool,
}

/// Construction method for random trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// Leaves may appear at any depth.
    Grow,
    /// Every branch extends to exactly the maximum depth.
    Full,
}

/// Parameters governing random tree construction.
#[derive(Debug, Clone)]
pub struct TreeGen {
    /// Number of input variables available as leaves.
    pub var_count: usize,
    /// Ephemeral constants are drawn uniformly from this range and frozen.
    pub const_range: (f64, f64),
    /// Probability that a leaf is a variable rather than a constant.
    pub p_var: f64,
}

impl TreeGen {
    pub fn new(var_count: usize, const_range: (f64, f64), p_var: f64) -> Self {
        assert!(var_count >= 1, "need at least one input variable");
        assert!(const_range.0 <= const_range.1, "constant range inverted");
        assert!((0.0..=1.0).contains(&p_var), "p_var out of [0,1]");
        TreeGen {
            var_count,
            const_range,
            p_var,
        }
    }

    /// Builds a random tree whose depth never exceeds `max_depth`
    /// (root counts as depth 1). `Full` yields depth exactly `max_depth`
    /// on every branch.
    pub fn random_tree<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        method: InitMethod,
        max_depth: usize,
    ) -> ExprTree {
        assert!(max_depth >= 1, "max_depth must be at least 1");
        ExprTree {
            root: self.random_node(rng, method, max_depth),
        }
    }

    /// Ramped half-and-half: depth drawn uniformly from 2..=max_depth
    /// (when possible), grow or full with equal probability.
    pub fn ramped_tree<R: Rng + ?Sized>(&self, rng: &mut R, max_depth: usize) -> ExprTree {
        let depth = if max_depth >= 2 {
            rng.random_range(2..=max_depth)
        } else {
            max_depth
        };
        let method = if rng.random_bool(0.5) {
            InitMethod::Grow
        } else {
            InitMethod::Full
        };
        self.random_tree(rng, method, depth)
    }

    fn random_node<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        method: InitMethod,
        depth_budget: usize,
    ) -> Node {
        let make_leaf = match method {
            _ if depth_budget <= 1 => true,
            InitMethod::Full => false,
            InitMethod::Grow => !rng.random_bool(GROW_BRANCH_PROB),
        };
        if make_leaf {
            if rng.random_bool(self.p_var) {
                Node::Var(rng.random_range(0..self.var_count))
            } else {
                let (lo, hi) = self.const_range;
                let v = if lo == hi { lo } else { rng.random_range(lo..hi) };
                Node::Const(v)
            }
        } else {
            let op = OpCode::ALL[rng.random_range(0..OpCode::ALL.len())];
            let children = (0..op.arity())
                .map(|_| self.random_node(rng, method, depth_budget - 1))
                .collect();
            Node::Op(op, children)
        }
    }
}

impl ExprTree {
    pub fn new(root: Node) -> Self {
        ExprTree { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Total node count (operators plus leaves).
    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    /// Longest root-to-leaf path; a lone leaf has depth 1.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Subtree rooted at preorder index `idx` together with its depth
    /// (root is index 0 at depth 1).
    pub fn subtree_at(&self, idx: usize) -> Option<(&Node, usize)> {
        let mut remaining = idx;
        self.root.find(&mut remaining, 1)
    }

    /// New tree with the subtree at preorder index `idx` replaced.
    pub fn with_replaced(&self, idx: usize, replacement: &Node) -> ExprTree {
        assert!(idx < self.node_count(), "node index out of range");
        let mut remaining = idx;
        ExprTree {
            root: self.root.replaced(&mut remaining, replacement),
        }
    }

    /// Evaluates the tree for every row of the column-major input matrix.
    /// Non-finite results (division by zero, exp overflow, log of zero)
    /// propagate into the values and clear the `finite` flag; they are
    /// never raised as errors.
    pub fn eval(&self, columns: &[Vec<f64>]) -> EvalOutcome {
        assert!(!columns.is_empty(), "need at least one input column");
        let n = columns[0].len();
        let values = eval_node(&self.root, columns, n);
        let finite = values.iter().all(|v| v.is_finite());
        EvalOutcome { values, finite }
    }

    /// Fully parenthesized infix rendering using the supplied variable names.
    pub fn to_infix(&self, var_names: &[impl AsRef<str>]) -> String {
        infix_node(&self.root, var_names)
    }

    /// Canonical prefix form, e.g. `(add x1 2.0000000000000000e0)`.
    /// Constants carry 17 significant digits so parsing is lossless.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        serialize_node(&self.root, &mut out);
        out
    }

    /// Parses the canonical prefix form produced by [`ExprTree::serialize`].
    pub fn deserialize(input: &str) -> Result<ExprTree, ParseError> {
        let tokens = tokenize(input);
        let mut pos = 0;
        let root = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(ParseError {
                position: pos,
                token: tokens[pos].text.clone(),
                expected: "end of input",
            });
        }
        Ok(ExprTree { root })
    }
}

fn eval_node(node: &Node, columns: &[Vec<f64>], n: usize) -> Vec<f64> {
    match node {
        Node::Var(i) => {
            assert!(*i < columns.len(), "variable index {i} out of range");
            columns[*i].clone()
        }
        Node::Const(c) => vec![*c; n],
        Node::Op(op, children) => match op.arity() {
            1 => {
                let mut vals = eval_node(&children[0], columns, n);
                for v in vals.iter_mut() {
                    *v = op.apply1(*v);
                }
                vals
            }
            2 => {
                let mut left = eval_node(&children[0], columns, n);
                let right = eval_node(&children[1], columns, n);
                for (l, r) in left.iter_mut().zip(right.iter()) {
                    *l = op.apply2(*l, *r);
                }
                left
            }
            _ => unreachable!(),
        },
    }
}

fn infix_node(node: &Node, var_names: &[impl AsRef<str>]) -> String {
    match node {
        Node::Var(i) => var_names
            .get(*i)
            .map(|s| s.as_ref().to_string())
            .unwrap_or_else(|| format!("x{}", i + 1)),
        Node::Const(c) => format!("{c}"),
        Node::Op(op, ch) => match op {
            OpCode::Add => format!("({} + {})", infix_node(&ch[0], var_names), infix_node(&ch[1], var_names)),
            OpCode::Sub => format!("({} - {})", infix_node(&ch[0], var_names), infix_node(&ch[1], var_names)),
            OpCode::Mul => format!("({} * {})", infix_node(&ch[0], var_names), infix_node(&ch[1], var_names)),
            OpCode::Div => format!("({} / {})", infix_node(&ch[0], var_names), infix_node(&ch[1], var_names)),
            OpCode::Sin => format!("sin({})", infix_node(&ch[0], var_names)),
            OpCode::Cos => format!("cos({})", infix_node(&ch[0], var_names)),
            OpCode::SqrtAbs => format!("sqrt(|{}|)", infix_node(&ch[0], var_names)),
            OpCode::Square => format!("({})^2", infix_node(&ch[0], var_names)),
            OpCode::Exp => format!("exp({})", infix_node(&ch[0], var_names)),
            OpCode::LogAbs => format!("log(|{}|)", infix_node(&ch[0], var_names)),
        },
    }
}

fn serialize_node(node: &Node, out: &mut String) {
    match node {
        Node::Var(i) => out.push_str(&format!("x{}", i + 1)),
        Node::Const(c) => out.push_str(&format!("{c:.16e}")),
        Node::Op(op, children) => {
            out.push('(');
            out.push_str(op.token());
            for child in children {
                out.push(' ');
                serialize_node(child, out);
            }
            out.push(')');
        }
    }
}

/// Parse failure; `position` is the zero-based token index.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at token {position} ('{token}'): expected {expected}")]
pub struct ParseError {
    pub position: usize,
    pub token: String,
    pub expected: &'static str,
}

struct Token {
    text: String,
}

fn tokenize(input: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in input.chars() {
        match ch {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(Token {
                        text: std::mem::take(&mut current),
                    });
                }
                tokens.push(Token {
                    text: ch.to_string(),
                });
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(Token {
                        text: std::mem::take(&mut current),
                    });
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(Token { text: current });
    }
    tokens
}

fn parse_node(tokens: &[Token], pos: &mut usize) -> Result<Node, ParseError> {
    let tok = tokens.get(*pos).ok_or(ParseError {
        position: *pos,
        token: String::from("<end>"),
        expected: "an expression",
    })?;
    if tok.text == "(" {
        *pos += 1;
        let op_tok = tokens.get(*pos).ok_or(ParseError {
            position: *pos,
            token: String::from("<end>"),
            expected: "an operator",
        })?;
        let op = OpCode::from_token(&op_tok.text).ok_or_else(|| ParseError {
            position: *pos,
            token: op_tok.text.clone(),
            expected: "an operator",
        })?;
        *pos += 1;
        let mut children = Vec::with_capacity(op.arity());
        for _ in 0..op.arity() {
            children.push(parse_node(tokens, pos)?);
        }
        let close = tokens.get(*pos).ok_or(ParseError {
            position: *pos,
            token: String::from("<end>"),
            expected: "')'",
        })?;
        if close.text != ")" {
            return Err(ParseError {
                position: *pos,
                token: close.text.clone(),
                expected: "')'",
            });
        }
        *pos += 1;
        Ok(Node::Op(op, children))
    } else if tok.text == ")" {
        Err(ParseError {
            position: *pos,
            token: tok.text.clone(),
            expected: "an expression",
        })
    } else if let Some(rest) = tok.text.strip_prefix('x') {
        if let Ok(idx) = rest.parse::<usize>() {
            if idx >= 1 {
                *pos += 1;
                return Ok(Node::Var(idx - 1));
            }
        }
        // Not a valid variable; fall through to constant parsing, which
        // will fail with a precise message.
        match tok.text.parse::<f64>() {
            Ok(v) => {
                *pos += 1;
                Ok(Node::Const(v))
            }
            Err(_) => Err(ParseError {
                position: *pos,
                token: tok.text.clone(),
                expected: "a variable x1..xN or a numeric constant",
            }),
        }
    } else {
        match tok.text.parse::<f64>() {
            Ok(v) => {
                *pos += 1;
                Ok(Node::Const(v))
            }
            Err(_) => Err(ParseError {
                position: *pos,
                token: tok.text.clone(),
                expected: "a variable x1..xN or a numeric constant",
            }),
        }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

/// Swaps uniformly chosen subtrees between two parents. If a depth-legal
/// pair is not found within a bounded number of attempts, both parents are
/// returned unchanged.
pub fn subtree_crossover<R: Rng + ?Sized>(
    rng: &mut R,
    a: &ExprTree,
    b: &ExprTree,
    max_depth: usize,
) -> (ExprTree, ExprTree) {
    for _ in 0..CROSSOVER_ATTEMPTS {
        let i = rng.random_range(0..a.node_count());
        let j = rng.random_range(0..b.node_count());
        let (sub_a, _) = a.subtree_at(i).expect("index in range");
        let (sub_b, _) = b.subtree_at(j).expect("index in range");
        let child_a = a.with_replaced(i, sub_b);
        let child_b = b.with_replaced(j, sub_a);
        if child_a.depth() <= max_depth && child_b.depth() <= max_depth {
            return (child_a, child_b);
        }
    }
    (a.clone(), b.clone())
}

/// Replaces a uniformly chosen node with a fresh grow-method subtree sized
/// so the result respects `max_depth`.
pub fn subtree_mutation<R: Rng + ?Sized>(
    rng: &mut R,
    a: &ExprTree,
    max_depth: usize,
    gen: &TreeGen,
) -> ExprTree {
    let idx = rng.random_range(0..a.node_count());
    let (_, node_depth) = a.subtree_at(idx).expect("index in range");
    let budget = max_depth.saturating_sub(node_depth).saturating_add(1).max(1);
    let fresh = gen.random_tree(rng, InitMethod::Grow, budget);
    a.with_replaced(idx, fresh.root())
}
