use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use super::PebbleDistribution;
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// `sum_x Z(x) 2^-d(x,v)`, exactly. Below 1 certifies that `v` is
/// unpebblable, since no move increases it.
pub fn weight_potential(graph: &Graph, dist: &PebbleDistribution, v: usize) -> Result<BigRational> {
    dist.check_len(graph)?;
    if v >= graph.vertex_count() {
        return Err(Error::pre(format!("vertex {v} out of range")));
    }
    let d = graph.distances_from(v)?;
    let max_d = d.iter().copied().max().unwrap_or(0) as usize;
    let mut numer = BigUint::default();
    for (x, &z) in dist.counts().iter().enumerate() {
        if z > 0 {
            numer += BigUint::from(z) << (max_d - d[x] as usize);
        }
    }
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(BigUint::from(1u8) << max_d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn far_end_of_path() {
        let g = Graph::path(10).unwrap();
        let mut z = vec![0u64; 10];
        z[9] = 512;
        assert!(weight_potential(&g, &z.clone().into(), 0).unwrap().is_one());
        z[9] = 3;
        z[8] = 1;
        let q = weight_potential(&g, &z.into(), 0).unwrap();
        assert_eq!(q, BigRational::new(5.into(), 512.into()));
    }
}
