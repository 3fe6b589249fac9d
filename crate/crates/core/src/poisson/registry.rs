//! Built-in coordinate examples, addressed by name:
//! `pair:<n>`, `aff1`, `aff1-on-line`, `rect:<n>x<m>`, `unit:<n>`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::chart::{ChartBox, CoordinateGroupoid, Side, SmoothAction, SmoothBibundle, VecFn};

/// A named example: a groupoid, optionally an action on a manifold, and
/// optionally a full bibundle between two groupoids.
#[derive(Debug, Clone)]
pub struct PoissonExample {
    pub name: String,
    pub groupoid: Arc<CoordinateGroupoid>,
    pub action: Option<SmoothAction>,
    pub bibundle: Option<SmoothBibundle>,
}

fn vec_fn(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> VecFn {
    Arc::new(f)
}

/// The pair groupoid of `R^n`: arrows are ordered pairs `(a, b)`
/// read as `b -> a`, so `target = a`, `source = b`.
pub fn pair_groupoid(n: usize) -> Result<Arc<CoordinateGroupoid>> {
    if n == 0 {
        return Err(Error::InvalidParameter("pair groupoid needs n >= 1".into()));
    }
    let frame = {
        // ker Dt at a unit is the second coordinate block.
        let mut m = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            m[(n + i, i)] = 1.0;
        }
        m
    };
    CoordinateGroupoid::new(
        format!("pair:{n}"),
        n,
        2 * n,
        ChartBox::symmetric(n, 2.0),
        ChartBox::symmetric(2 * n, 2.0),
        vec_fn(move |x| x[n..2 * n].to_vec()),
        vec_fn(move |x| x[..n].to_vec()),
        vec_fn(move |xy| {
            // (a, b) ∘ (b, c) = (a, c)
            let mut out = xy[..n].to_vec();
            out.extend_from_slice(&xy[3 * n..4 * n]);
            out
        }),
        vec_fn(move |x| {
            let mut out = x[n..2 * n].to_vec();
            out.extend_from_slice(&x[..n]);
            out
        }),
        vec_fn(move |q| {
            let mut out = q.to_vec();
            out.extend_from_slice(q);
            out
        }),
        Some(Arc::new(move |_q| frame.clone())),
    )
    .map(Arc::new)
}

/// The canonical left action of `pair:<n>` on `R^n` itself.
pub fn pair_action(n: usize) -> Result<SmoothAction> {
    let g = pair_groupoid(n)?;
    SmoothAction::new(
        g,
        Side::Left,
        n,
        ChartBox::symmetric(n, 2.0),
        vec_fn(|m| m.to_vec()),
        // x · m = target block of x (the formula's smooth extension off
        // the composability locus).
        vec_fn(move |xm| xm[..n].to_vec()),
    )
}

/// The affine transformation group of the line, parametrized as
/// `(a, b) : x ↦ a·x + b` with `a > 0`. One object; two-dimensional
/// arrow chart.
pub fn aff1_groupoid() -> Result<Arc<CoordinateGroupoid>> {
    CoordinateGroupoid::new(
        "aff1",
        0,
        2,
        ChartBox::new(vec![], vec![]),
        ChartBox::new(vec![0.4, -1.5], vec![2.5, 1.5]),
        vec_fn(|_| Vec::new()),
        vec_fn(|_| Vec::new()),
        // (a1, b1) ∘ (a2, b2) = (a1 a2, a1 b2 + b1)
        vec_fn(|xy| vec![xy[0] * xy[2], xy[0] * xy[3] + xy[1]]),
        vec_fn(|x| vec![1.0 / x[0], -x[1] / x[0]]),
        vec_fn(|_| vec![1.0, 0.0]),
        Some(Arc::new(|_| DMatrix::identity(2, 2))),
    )
    .map(Arc::new)
}

/// `aff1` acting on the line by `(a, b) · x = a·x + b`.
pub fn aff1_action() -> Result<SmoothAction> {
    let g = aff1_groupoid()?;
    SmoothAction::new(
        g,
        Side::Left,
        1,
        ChartBox::symmetric(1, 2.0),
        vec_fn(|_| Vec::new()),
        vec_fn(|xm| vec![xm[0] * xm[2] + xm[1]]),
    )
}

/// The unit groupoid of `R^n`: only identity arrows.
pub fn unit_groupoid(n: usize) -> Result<Arc<CoordinateGroupoid>> {
    if n == 0 {
        return Err(Error::InvalidParameter("unit groupoid needs n >= 1".into()));
    }
    CoordinateGroupoid::new(
        format!("unit:{n}"),
        n,
        n,
        ChartBox::symmetric(n, 2.0),
        ChartBox::symmetric(n, 2.0),
        vec_fn(|x| x.to_vec()),
        vec_fn(|x| x.to_vec()),
        vec_fn(move |xy| xy[..n].to_vec()),
        vec_fn(|x| x.to_vec()),
        vec_fn(|q| q.to_vec()),
        Some(Arc::new(move |_| DMatrix::zeros(n, 0))),
    )
    .map(Arc::new)
}

/// The trivial action of `unit:<n>` on `R^n`.
pub fn unit_action(n: usize) -> Result<SmoothAction> {
    let g = unit_groupoid(n)?;
    SmoothAction::new(
        g,
        Side::Left,
        n,
        ChartBox::symmetric(n, 2.0),
        vec_fn(|m| m.to_vec()),
        vec_fn(move |xm| xm[n..].to_vec()),
    )
}

/// The rectangle bibundle `pair:<rows>` acting on the left of
/// `R^rows × R^cols` and `pair:<cols>` on the right.
pub fn rect_bibundle(rows: usize, cols: usize) -> Result<SmoothBibundle> {
    let g = pair_groupoid(rows)?;
    let h = pair_groupoid(cols)?;
    let dim = rows + cols;
    let left = SmoothAction::new(
        g,
        Side::Left,
        dim,
        ChartBox::symmetric(dim, 2.0),
        vec_fn(move |m| m[..rows].to_vec()),
        // x · (u, v) = (target block of x, v)
        vec_fn(move |xm| {
            let mut out = xm[..rows].to_vec();
            out.extend_from_slice(&xm[2 * rows + rows..]);
            out
        }),
    )?;
    let right = SmoothAction::new(
        h,
        Side::Right,
        dim,
        ChartBox::symmetric(dim, 2.0),
        vec_fn(move |m| m[rows..].to_vec()),
        // (u, v) · h = (u, source block of h); the evaluator receives
        // (arrow, point) concatenated.
        vec_fn(move |hm| {
            let mut out = hm[2 * cols..2 * cols + rows].to_vec();
            out.extend_from_slice(&hm[cols..2 * cols]);
            out
        }),
    )?;
    SmoothBibundle::new(left, right)
}

/// Look up a built-in example by name.
pub fn lookup_example(name: &str) -> Result<PoissonExample> {
    let unknown = || Error::UnknownExample(name.to_string());
    if let Some(rest) = name.strip_prefix("pair:") {
        let n: usize = rest.parse().map_err(|_| unknown())?;
        let action = pair_action(n)?;
        return Ok(PoissonExample {
            name: name.into(),
            groupoid: action.groupoid.clone(),
            action: Some(action),
            bibundle: None,
        });
    }
    if let Some(rest) = name.strip_prefix("unit:") {
        let n: usize = rest.parse().map_err(|_| unknown())?;
        let action = unit_action(n)?;
        return Ok(PoissonExample {
            name: name.into(),
            groupoid: action.groupoid.clone(),
            action: Some(action),
            bibundle: None,
        });
    }
    if let Some(rest) = name.strip_prefix("rect:") {
        let (a, b) = rest.split_once('x').ok_or_else(unknown)?;
        let rows: usize = a.parse().map_err(|_| unknown())?;
        let cols: usize = b.parse().map_err(|_| unknown())?;
        let bib = rect_bibundle(rows, cols)?;
        return Ok(PoissonExample {
            name: name.into(),
            groupoid: bib.left.groupoid.clone(),
            action: Some(bib.left.clone()),
            bibundle: Some(bib),
        });
    }
    match name {
        "aff1" => Ok(PoissonExample {
            name: name.into(),
            groupoid: aff1_groupoid()?,
            action: None,
            bibundle: None,
        }),
        "aff1-on-line" => {
            let action = aff1_action()?;
            Ok(PoissonExample {
                name: name.into(),
                groupoid: action.groupoid.clone(),
                action: Some(action),
                bibundle: None,
            })
        }
        _ => Err(unknown()),
    }
}
