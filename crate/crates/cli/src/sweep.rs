//! Value lists for sweep flags: `a,b,c`, or `start:stop[:step]` with an
//! inclusive stop. `start..stop` is accepted as `start:stop`.

use anyhow::{bail, Context, Result};

/// Drops the float noise of `start + i * step` so that `0:0.5:0.1` yields
/// `0.3` and not `0.30000000000000004`.
fn tidy(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

pub fn floats(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t.trim().parse().with_context(|| format!("not a number: {t:?}"))?;
        if !v.is_finite() {
            bail!("not a finite number: {t:?}");
        }
        Ok(v)
    };
    let s = s.trim();
    let parts: Vec<&str> = if s.contains("..") {
        s.splitn(2, "..").collect()
    } else {
        s.split(':').collect()
    };
    if parts.len() == 1 {
        return s.split(',').map(num).collect();
    }
    if parts.len() > 3 {
        bail!("expected start:stop[:step], got {s:?}");
    }
    let start = num(parts[0])?;
    let stop = num(parts[1])?;
    let step = match parts.get(2) {
        Some(t) => num(t)?,
        None => 1.0,
    };
    if step <= 0.0 {
        bail!("step must be positive in {s:?}");
    }
    if stop < start {
        bail!("stop below start in {s:?}");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| tidy(start + i as f64 * step)).collect())
}

pub fn counts(s: &str) -> Result<Vec<usize>> {
    floats(s)?
        .into_iter()
        .map(|v| {
            if v < 0.0 || v.fract() != 0.0 {
                bail!("expected non-negative integers, got {v} in {s:?}");
            }
            Ok(v as usize)
        })
        .collect()
}

pub fn vec3(s: &str) -> Result<[f64; 3]> {
    let v = floats(s)?;
    match v[..] {
        [x, y, z] => Ok([x, y, z]),
        _ => bail!("expected three comma-separated numbers, got {s:?}"),
    }
}
