use crate::error::{BnError, Result};

/// Non-negative table over a set of variables.
///
/// The scope is kept sorted by variable index and values are laid out
/// row-major, the last scope variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

impl Factor {
    /// Builds a factor from a scope in any order; values follow that order.
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Factor> {
        if scope.len() != cards.len() {
            return Err(BnError::InvalidFactor(
                "scope and cardinality lengths differ".into(),
            ));
        }
        if cards.contains(&0) {
            return Err(BnError::InvalidFactor("zero cardinality".into()));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(BnError::InvalidFactor(format!(
                "expected {size} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(BnError::InvalidFactor(
                "values must be non-negative".into(),
            ));
        }
        let mut sorted = scope.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != scope.len() {
            return Err(BnError::InvalidFactor("repeated scope variable".into()));
        }
        if sorted == scope {
            return Ok(Factor {
                scope,
                cards,
                values,
            });
        }

        // Re-layout into sorted scope order.
        let perm: Vec<usize> = sorted
            .iter()
            .map(|v| scope.iter().position(|s| s == v).unwrap())
            .collect();
        let new_cards: Vec<usize> = perm.iter().map(|&p| cards[p]).collect();
        let old_strides = strides(&cards);
        let mut out = Vec::with_capacity(size);
        let mut assign = vec![0usize; sorted.len()];
        for _ in 0..size {
            let src: usize = assign
                .iter()
                .zip(&perm)
                .map(|(&a, &p)| a * old_strides[p])
                .sum();
            out.push(values[src]);
            for k in (0..assign.len()).rev() {
                assign[k] += 1;
                if assign[k] < new_cards[k] {
                    break;
                }
                assign[k] = 0;
            }
        }
        Ok(Factor {
            scope: sorted,
            cards: new_cards,
            values: out,
        })
    }

    /// The empty-scope factor holding a single 1.
    pub fn unit() -> Factor {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![1.0],
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.binary_search(&var).is_ok()
    }

    /// Value at an assignment listed in scope order.
    pub fn value(&self, assignment: &[usize]) -> f64 {
        let st = strides(&self.cards);
        let idx: usize = assignment.iter().zip(&st).map(|(a, s)| a * s).sum();
        self.values[idx]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn product(&self, other: &Factor) -> Factor {
        // merge sorted scopes
        let mut scope = Vec::with_capacity(self.scope.len() + other.scope.len());
        let mut cards = Vec::with_capacity(scope.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.scope.len() || j < other.scope.len() {
            let take_a = j >= other.scope.len()
                || (i < self.scope.len() && self.scope[i] <= other.scope[j]);
            let take_b = i >= self.scope.len()
                || (j < other.scope.len() && other.scope[j] <= self.scope[i]);
            if take_a {
                scope.push(self.scope[i]);
                cards.push(self.cards[i]);
            } else {
                scope.push(other.scope[j]);
                cards.push(other.cards[j]);
            }
            if take_a {
                i += 1;
            }
            if take_b {
                j += 1;
            }
        }

        let stride_in = |f: &Factor| -> Vec<usize> {
            let st = strides(&f.cards);
            scope
                .iter()
                .map(|v| f.scope.binary_search(v).map(|p| st[p]).unwrap_or(0))
                .collect()
        };
        let sa = stride_in(self);
        let sb = stride_in(other);

        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for l in (0..scope.len()).rev() {
                assign[l] += 1;
                if assign[l] < cards[l] {
                    ia += sa[l];
                    ib += sb[l];
                    break;
                }
                assign[l] = 0;
                ia -= (cards[l] - 1) * sa[l];
                ib -= (cards[l] - 1) * sb[l];
            }
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    /// Sums `var` out. A factor without `var` is returned unchanged.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Ok(pos) = self.scope.binary_search(&var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let (stride, card) = (st[pos], self.cards[pos]);
        let mut values = vec![0.0; self.values.len() / card];
        for (idx, v) in self.values.iter().enumerate() {
            let out = (idx / (stride * card)) * stride + idx % stride;
            values[out] += v;
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor {
            scope,
            cards,
            values,
        }
    }

    /// Restricts `var` to `value` and drops it from the scope.
    pub fn reduce(&self, var: usize, value: usize) -> Factor {
        let Ok(pos) = self.scope.binary_search(&var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let (stride, card) = (st[pos], self.cards[pos]);
        let outer = self.values.len() / (stride * card);
        let mut values = Vec::with_capacity(outer * stride);
        for hi in 0..outer {
            let base = hi * stride * card + value * stride;
            values.extend_from_slice(&self.values[base..base + stride]);
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor {
            scope,
            cards,
            values,
        }
    }
}
