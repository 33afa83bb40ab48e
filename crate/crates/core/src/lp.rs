//! Exact feasibility of small linear systems over nonnegative variables.
//!
//! Phase one of the simplex method on a dense tableau, with Bland's rule so
//! that it cannot cycle. Everything is a [`Rational`], so the answer is exact.

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

/// `sum(coef * x[var]) <rel> rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub rel: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(terms: Vec<(usize, i64)>, rel: Relation, rhs: i64) -> Self {
        Constraint {
            terms: terms.into_iter().map(|(v, c)| (v, rational::int(c))).collect(),
            rel,
            rhs: rational::int(rhs),
        }
    }
}

/// Whether some `x >= 0` with `num_vars` entries satisfies every constraint.
pub(crate) fn feasible(num_vars: usize, constraints: &[Constraint]) -> bool {
    let m = constraints.len();
    if m == 0 {
        return true;
    }

    // Normalize to rhs >= 0 and count the extra columns we need.
    let mut rows: Vec<(Vec<(usize, Rational)>, Relation, Rational)> = Vec::with_capacity(m);
    for c in constraints {
        let mut terms: Vec<(usize, Rational)> = Vec::with_capacity(c.terms.len());
        for (v, coef) in &c.terms {
            assert!(*v < num_vars, "variable {v} out of range");
            terms.push((*v, coef.clone()));
        }
        let (rel, rhs) = if c.rhs.is_negative() {
            for t in terms.iter_mut() {
                t.1 = -t.1.clone();
            }
            let flipped = match c.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (flipped, -c.rhs.clone())
        } else {
            (c.rel, c.rhs.clone())
        };
        rows.push((terms, rel, rhs));
    }

    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = num_vars + slacks + artificials;
    let rhs_col = width;

    let mut table: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut is_artificial = vec![false; width];
    let mut next_slack = num_vars;
    let mut next_art = num_vars + slacks;
    for (terms, rel, rhs) in rows {
        let mut row = vec![Rational::zero(); width + 1];
        for (v, coef) in terms {
            row[v] += coef;
        }
        row[rhs_col] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -rational::one();
                next_slack += 1;
                row[next_art] = rational::one();
                is_artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = rational::one();
                is_artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
        }
        table.push(row);
    }

    // Reduced costs of "minimize the sum of artificials".
    let mut cost = vec![Rational::zero(); width + 1];
    for (row, &b) in table.iter().zip(&basis) {
        if is_artificial[b] {
            for (j, v) in row.iter().enumerate() {
                if (j == rhs_col || !is_artificial[j]) && !v.is_zero() {
                    cost[j] -= v;
                }
            }
        }
    }
    // cost[rhs_col] now holds minus the current objective value.

    loop {
        let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in table.iter().enumerate() {
            if row[enter].is_positive() {
                let r = &row[rhs_col] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => r < *lr || (r == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, r));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction; cannot happen for a bounded-below objective.
            break;
        };
        pivot(&mut table, &mut cost, pr, enter);
        basis[pr] = enter;
    }
    cost[rhs_col].is_zero()
}

fn pivot(table: &mut [Vec<Rational>], cost: &mut [Rational], pr: usize, pc: usize) {
    let p = table[pr][pc].clone();
    for v in table[pr].iter_mut() {
        if !v.is_zero() {
            *v /= &p;
        }
    }
    let pivot_row = table[pr].clone();
    let nz: Vec<usize> = (0..pivot_row.len())
        .filter(|&j| !pivot_row[j].is_zero())
        .collect();
    for (i, row) in table.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for &j in &nz {
            row[j] -= &f * &pivot_row[j];
        }
    }
    if !cost[pc].is_zero() {
        let f = cost[pc].clone();
        for &j in &nz {
            cost[j] -= &f * &pivot_row[j];
        }
    }
}
