#![allow(dead_code)]

use std::path::{Path, PathBuf};

use qmlshots::config::{bundled_data_dir, resolve, set_path, ConfigSources, RunConfig};
use toml::{Table, Value};

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_qmlshots"))
}

pub fn hamiltonian_dir() -> PathBuf {
    bundled_data_dir().join("hamiltonians")
}

pub fn bundled_hamiltonians() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(hamiltonian_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
}

/// Smoke preset with `overrides` given as `("a.b", value)` pairs.
pub fn smoke_config(out: &Path, overrides: &[(&str, Value)]) -> RunConfig {
    let mut table = Table::new();
    set_path(&mut table, "output_dir", Value::String(out.display().to_string()));
    for (k, v) in overrides {
        set_path(&mut table, k, v.clone());
    }
    resolve(&ConfigSources { preset: Some("smoke".into()), overrides: table, ..Default::default() }).unwrap()
}

pub fn int(x: i64) -> Value {
    Value::Integer(x)
}

pub fn string(s: &str) -> Value {
    Value::String(s.into())
}

type C = (f64, f64);

fn pauli_matrix(c: char) -> [[C; 2]; 2] {
    let z = (0.0, 0.0);
    match c {
        'I' => [[(1.0, 0.0), z], [z, (1.0, 0.0)]],
        'X' => [[z, (1.0, 0.0)], [(1.0, 0.0), z]],
        'Y' => [[z, (0.0, -1.0)], [(0.0, 1.0), z]],
        'Z' => [[(1.0, 0.0), z], [z, (-1.0, 0.0)]],
        _ => panic!("bad pauli {c}"),
    }
}

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Dense Hermitian matrix of `sum c P` built from explicit Kronecker products,
/// leftmost letter as the most significant factor.
pub fn kron_hamiltonian(n: usize, terms: &[(f64, String)]) -> Vec<Vec<C>> {
    let dim = 1 << n;
    let mut h = vec![vec![(0.0, 0.0); dim]; dim];
    for (coeff, p) in terms {
        let mut m: Vec<Vec<C>> = vec![vec![(1.0, 0.0)]];
        for ch in p.chars() {
            let f = pauli_matrix(ch);
            let d = m.len();
            let mut next = vec![vec![(0.0, 0.0); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = cmul(m[i][j], f[a][b]);
                        }
                    }
                }
            }
            m = next;
        }
        for i in 0..dim {
            for j in 0..dim {
                h[i][j].0 += coeff * m[i][j].0;
                h[i][j].1 += coeff * m[i][j].1;
            }
        }
    }
    h
}

/// Smallest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations on
/// its real symmetric embedding `[[A, -B], [B, A]]`.
pub fn jacobi_ground(h: &[Vec<C>]) -> f64 {
    let d = h.len();
    let n = 2 * d;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..d {
        for j in 0..d {
            let (re, im) = h[i][j];
            a[i][j] = re;
            a[i + d][j + d] = re;
            a[i][j + d] = -im;
            a[i + d][j] = im;
        }
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

pub fn files_in(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == ext) {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}
