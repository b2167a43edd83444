//! Reference placements: most popular, uniform and random caching.

use rand::Rng;

use crate::error::{Error, Result};
use crate::popularity::PopularityProfile;

fn check_budget(catalog_size: usize, cache: usize) -> Result<()> {
    if cache > catalog_size {
        return Err(Error::invalid(format!("cache size {cache} exceeds catalog size {catalog_size}")));
    }
    Ok(())
}

/// Cache the `cache` most popular files; ties go to the lower index.
pub fn baseline_mc(profile: &PopularityProfile, cache: usize) -> Result<Vec<f64>> {
    let l = profile.catalog_size();
    check_budget(l, cache)?;
    let f = profile.probabilities();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let mut p = vec![0.0; l];
    for &i in &order[..cache] {
        p[i] = 1.0;
    }
    Ok(p)
}

/// Spread the budget evenly: `p_i = C/L`.
pub fn baseline_uc(catalog_size: usize, cache: usize) -> Result<Vec<f64>> {
    if catalog_size == 0 {
        return Err(Error::invalid("catalog size must be at least 1"));
    }
    check_budget(catalog_size, cache)?;
    Ok(vec![cache as f64 / catalog_size as f64; catalog_size])
}

/// Random placement: uniform draws rescaled to sum to `cache`, with any
/// mass above 1 redistributed over the unsaturated entries.
pub fn baseline_rc<R: Rng + ?Sized>(catalog_size: usize, cache: usize, rng: &mut R) -> Result<Vec<f64>> {
    if catalog_size == 0 {
        return Err(Error::invalid("catalog size must be at least 1"));
    }
    check_budget(catalog_size, cache)?;
    let mut p: Vec<f64> = (0..catalog_size).map(|_| rng.random::<f64>().max(f64::MIN_POSITIVE)).collect();
    if cache == catalog_size {
        return Ok(vec![1.0; catalog_size]);
    }
    let target = cache as f64;
    let mut free = vec![true; catalog_size];
    loop {
        let fixed: f64 = p.iter().zip(&free).filter(|(_, &f)| !f).map(|(x, _)| x).sum();
        let loose: f64 = p.iter().zip(&free).filter(|(_, &f)| f).map(|(x, _)| x).sum();
        let scale = (target - fixed) / loose;
        let mut saturated = false;
        for (x, f) in p.iter_mut().zip(free.iter_mut()) {
            if *f {
                *x *= scale;
                if *x >= 1.0 {
                    *x = 1.0;
                    *f = false;
                    saturated = true;
                }
            }
        }
        if !saturated {
            break;
        }
    }
    Ok(p)
}
