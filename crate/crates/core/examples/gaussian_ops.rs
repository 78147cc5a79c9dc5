//! Closed-form Gaussian operations: KL divergence, products of densities,
//! squared 2-Wasserstein distance and sampling.

use miocp::gaussian::{kl_divergence, product, wasserstein2_sq};
use miocp::linalg::{Matrix, Vector};
use miocp::Gaussian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> miocp::Result<()> {
    let p = Gaussian::new(
        Vector::from_vec(vec![0.0, 1.0]),
        Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]),
    )?;
    let q = Gaussian::standard(2);

    println!("KL(p || q)      = {:.6}", kl_divergence(&p, &q)?);
    println!("KL(q || p)      = {:.6}", kl_divergence(&q, &p)?);
    println!("W2²(p, q)       = {:.6}", wasserstein2_sq(&p, &q)?);

    let pq = product(&p, &q)?;
    println!("product mean    = {:?}", pq.mean().as_slice());
    println!("product cov     = {:?}", pq.cov().as_slice());

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let draws = p.sample(&mut rng, 5);
    for x in &draws {
        println!("sample {:?}  log p = {:.4}", x.as_slice(), p.log_pdf(x));
    }
    Ok(())
}
