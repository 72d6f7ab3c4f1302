//! Two-dimensional PCA projection of model outputs for plotting.
//!
//! Principal directions come from power iteration on the sample covariance,
//! applied implicitly as `Xᵀ(X·v)/n` so no `d × d` matrix is formed. The
//! second direction is kept orthogonal to the first at every iteration.

use std::io::Write;

use log::warn;
use serde::Serialize;

use crate::data::Sentiment;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITERS: usize = 1000;

/// Components whose variance falls below this fraction of the total are
/// treated as absent.
const RANK_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
    pub folder: String,
    pub label: Sentiment,
}

/// Fitted projection: the data mean and two unit directions (a direction
/// is all zeros when the data has no variance left along it).
#[derive(Clone, Debug, PartialEq)]
pub struct Pca2 {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub variances: [f64; 2],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn remove_along(v: &mut [f64], dir: &[f64]) {
    let c = dot(v, dir);
    v.iter_mut().zip(dir).for_each(|(x, d)| *x -= c * d);
}

// Largest-magnitude entry positive, so results do not depend on the start
// vector's sign.
fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn cov_times(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for r in rows {
        let s = dot(r, v);
        out.iter_mut().zip(r).for_each(|(o, x)| *o += s * x);
    }
    let n = rows.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

impl Pca2 {
    pub fn fit(points: &[Tensor]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Contract(format!(
                "projection needs at least 2 points, got {}",
                points.len()
            )));
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::dim("project_2d", points[0].shape(), p.shape()));
        }
        let n = points.len() as f64;
        let mut mean = vec![0.0; d];
        for p in points {
            mean.iter_mut().zip(p.data()).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.data().iter().zip(&mean).map(|(x, m)| x - m).collect())
            .collect();
        let total: f64 = rows.iter().map(|r| dot(r, r)).sum::<f64>() / n;

        let mut components = [vec![0.0; d], vec![0.0; d]];
        let mut variances = [0.0; 2];
        // indexed so the finished component can be borrowed beside the current one
        #[allow(clippy::needless_range_loop)]
        for k in 0..2 {
            let (done, rest) = components.split_at_mut(k);
            let prev = done.first();
            // start from the centered point with the most energy left
            let mut v = rows
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    if let Some(p) = prev {
                        remove_along(&mut r, p);
                    }
                    r
                })
                .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
                .expect("at least two rows");
            if total <= 0.0 || normalize(&mut v) <= (RANK_FLOOR * total).sqrt() {
                warn!(
                    "projection is rank deficient; component {} set to zero",
                    k + 1
                );
                break;
            }
            for _ in 0..POWER_MAX_ITERS {
                let mut next = cov_times(&rows, &v);
                if let Some(p) = prev {
                    remove_along(&mut next, p);
                }
                if normalize(&mut next) == 0.0 {
                    break;
                }
                let delta = next
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                v = next;
                if delta < POWER_TOLERANCE {
                    break;
                }
            }
            let var = dot(&v, &cov_times(&rows, &v));
            if var <= RANK_FLOOR * total {
                warn!(
                    "projection is rank deficient; component {} set to zero",
                    k + 1
                );
                break;
            }
            fix_sign(&mut v);
            rest[0] = v;
            variances[k] = var;
        }
        Ok(Pca2 {
            mean,
            components,
            variances,
        })
    }

    pub fn transform(&self, p: &Tensor) -> Result<(f64, f64)> {
        if p.len() != self.mean.len() {
            return Err(Error::dim("project_2d", &[self.mean.len()], p.shape()));
        }
        let c: Vec<f64> = p
            .data()
            .iter()
            .zip(&self.mean)
            .map(|(x, m)| x - m)
            .collect();
        Ok((dot(&c, &self.components[0]), dot(&c, &self.components[1])))
    }
}

/// Projects `outputs` onto their top two principal components and pairs
/// each point with its `(folder, label)` metadata.
pub fn project_2d(outputs: &[Tensor], meta: &[(String, Sentiment)]) -> Result<Vec<ProjectedPoint>> {
    if outputs.len() != meta.len() {
        return Err(Error::Contract(format!(
            "{} outputs but {} metadata rows",
            outputs.len(),
            meta.len()
        )));
    }
    let pca = Pca2::fit(outputs)?;
    outputs
        .iter()
        .zip(meta)
        .map(|(o, (folder, label))| {
            let (x, y) = pca.transform(o)?;
            Ok(ProjectedPoint {
                x,
                y,
                folder: folder.clone(),
                label: *label,
            })
        })
        .collect()
}

/// CSV with header `x,y,folder,label`.
pub fn write_csv<W: Write>(points: &[ProjectedPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    fn meta(n: usize) -> Vec<(String, Sentiment)> {
        (0..n)
            .map(|i| (format!("anp {i}"), Sentiment::Positive))
            .collect()
    }

    fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    }

    // random orthonormal pair in 50-d via Gram-Schmidt
    fn plane(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let mut a: Vec<f64> = (0..50).map(|_| gauss(rng)).collect();
        let mut b: Vec<f64> = (0..50).map(|_| gauss(rng)).collect();
        normalize(&mut a);
        remove_along(&mut b, &a);
        normalize(&mut b);
        (a, b)
    }

    #[test]
    fn planar_points_keep_their_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b) = plane(&mut rng);
        let coords: Vec<(f64, f64)> = (0..40)
            .map(|_| (3.0 * gauss(&mut rng), gauss(&mut rng)))
            .collect();
        let pts: Vec<Tensor> = coords
            .iter()
            .map(|&(u, v)| {
                Tensor::vector(a.iter().zip(&b).map(|(x, y)| u * x + v * y + 0.5).collect())
                    .unwrap()
            })
            .collect();
        let proj = project_2d(&pts, &meta(pts.len())).unwrap();
        assert_eq!(proj.len(), pts.len());
        for i in 0..pts.len() {
            for j in 0..i {
                let orig = dist(coords[i], coords[j]);
                let got = dist((proj[i].x, proj[i].y), (proj[j].x, proj[j].y));
                assert!((orig - got).abs() < 1e-6, "{orig} vs {got}");
            }
        }
    }

    #[test]
    fn separated_clusters_stay_separated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shift: Vec<f64> = (0..50).map(|_| gauss(&mut rng)).collect();
        let mut pts = Vec::new();
        for c in 0..2 {
            for _ in 0..50 {
                let v: Vec<f64> = shift
                    .iter()
                    .map(|s| c as f64 * 2.0 * s + 0.3 * gauss(&mut rng))
                    .collect();
                pts.push(Tensor::vector(v).unwrap());
            }
        }
        let proj = project_2d(&pts, &meta(100)).unwrap();
        let centroid = |r: std::ops::Range<usize>| {
            let n = r.len() as f64;
            let (sx, sy) = proj[r]
                .iter()
                .fold((0.0, 0.0), |a, p| (a.0 + p.x, a.1 + p.y));
            (sx / n, sy / n)
        };
        let (c0, c1) = (centroid(0..50), centroid(50..100));
        let spread = |r: std::ops::Range<usize>, c: (f64, f64)| {
            (proj[r.clone()]
                .iter()
                .map(|p| dist((p.x, p.y), c).powi(2))
                .sum::<f64>()
                / r.len() as f64)
                .sqrt()
        };
        let within = spread(0..50, c0).max(spread(50..100, c1));
        assert!(dist(c0, c1) > 3.0 * within);
    }

    #[test]
    fn rotation_changes_at_most_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 6;
        let pts: Vec<Tensor> = (0..30)
            .map(|_| {
                Tensor::vector((0..d).map(|j| (j + 1) as f64 * gauss(&mut rng)).collect()).unwrap()
            })
            .collect();
        // Givens rotation in the (0, 3) plane
        let (c, s) = (0.6f64, 0.8f64);
        let rotated: Vec<Tensor> = pts
            .iter()
            .map(|p| {
                let mut v = p.data().to_vec();
                let (a, b) = (v[0], v[3]);
                v[0] = c * a - s * b;
                v[3] = s * a + c * b;
                Tensor::vector(v).unwrap()
            })
            .collect();
        let p1 = project_2d(&pts, &meta(30)).unwrap();
        let p2 = project_2d(&rotated, &meta(30)).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a.x.abs() - b.x.abs()).abs() < 1e-6);
            assert!((a.y.abs() - b.y.abs()).abs() < 1e-6);
        }
    }

    #[test]
    fn identical_points_give_zero_components() {
        let pts = vec![Tensor::ones(&[5]).unwrap(); 4];
        let proj = project_2d(&pts, &meta(4)).unwrap();
        assert!(proj.iter().all(|p| p.x == 0.0 && p.y == 0.0));
    }

    #[test]
    fn collinear_points_zero_the_second_axis() {
        let pts: Vec<Tensor> = (0..5)
            .map(|i| Tensor::vector(vec![i as f64, 2.0 * i as f64]).unwrap())
            .collect();
        let pca = Pca2::fit(&pts).unwrap();
        assert!(pca.components[1].iter().all(|&x| x == 0.0));
        assert!(pca.variances[0] > 0.0);
    }

    #[test]
    fn too_few_points_or_mismatched_meta() {
        assert!(project_2d(&[Tensor::ones(&[3]).unwrap()], &meta(1)).is_err());
        assert!(project_2d(
            &[Tensor::ones(&[3]).unwrap(), Tensor::ones(&[3]).unwrap()],
            &meta(1)
        )
        .is_err());
    }

    #[test]
    fn csv_layout() {
        let pts = vec![ProjectedPoint {
            x: 1.5,
            y: -2.0,
            folder: "nice smile".into(),
            label: Sentiment::Positive,
        }];
        let mut buf = Vec::new();
        write_csv(&pts, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,y,folder,label\n1.5,-2.0,nice smile,positive\n"
        );
    }
}
