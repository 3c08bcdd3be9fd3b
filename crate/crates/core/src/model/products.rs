use crate::error::{Error, Result};
use crate::signals::ToneSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    /// IF-side combination mixed with an LO-side combination.
    Core,
    /// Single-port combinations: leakage, harmonics and intra-port IMD.
    Sidebranch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub frequency: f64,
    pub description: String,
}

/// Signed integer combination `sum_i m_i f_i` of one port's tones.
#[derive(Debug, Clone)]
struct Combo {
    coeffs: Vec<i32>,
    order: u32,
    value: f64,
}

/// All combinations with odd `sum |m_i| <= max_order`, each sign included.
fn combos(tones: &ToneSet, max_order: usize) -> Vec<Combo> {
    let freqs = tones.frequencies();
    let n = freqs.len();
    let mut out = Vec::new();
    let mut m = vec![0i32; n];
    fn rec(i: usize, budget: i32, m: &mut Vec<i32>, freqs: &[f64], out: &mut Vec<Combo>) {
        if i == freqs.len() {
            let order: u32 = m.iter().map(|c| c.unsigned_abs()).sum();
            if order % 2 == 1 {
                let value = m.iter().zip(freqs).map(|(&c, f)| c as f64 * f).sum();
                out.push(Combo {
                    coeffs: m.clone(),
                    order,
                    value,
                });
            }
            return;
        }
        for c in -budget..=budget {
            m[i] = c;
            rec(i + 1, budget - c.abs(), m, freqs, out);
        }
        m[i] = 0;
    }
    rec(0, max_order as i32, &mut m, &freqs, &mut out);
    out.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| b.coeffs.cmp(&a.coeffs)));
    out
}

fn describe(label: &str, coeffs: &[i32], out: &mut String) {
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 {
            "-"
        } else if out.is_empty() {
            ""
        } else {
            "+"
        };
        let mag = c.unsigned_abs();
        if mag == 1 {
            out.push_str(&format!("{sign}f{label}{}", i + 1));
        } else {
            out.push_str(&format!("{sign}{mag}f{label}{}", i + 1));
        }
    }
}

fn negated(c: &[i32]) -> Vec<i32> {
    c.iter().map(|x| -x).collect()
}

/// Mixing product frequencies of odd order, sorted and merged.
///
/// The order limit applies to each side separately: an IF combination of
/// order up to `max_order` times an LO combination of order up to
/// `max_order`, which is what two odd polynomial cores of that degree
/// generate. DC is dropped, as is anything at or above `nyquist` when given.
pub fn enumerate_products(
    if_tones: &ToneSet,
    lo_tones: &ToneSet,
    max_order: usize,
    kind: ProductKind,
    nyquist: Option<f64>,
) -> Result<Vec<Product>> {
    if max_order % 2 == 0 {
        return Err(Error::EvenOrder(max_order));
    }
    let scale = if_tones.max_frequency().max(lo_tones.max_frequency());
    let tol = 1e-9 * scale;
    let ifc = combos(if_tones, max_order);
    let loc = combos(lo_tones, max_order);
    let mut raw: Vec<Product> = Vec::new();
    let mut push = |value: f64, ifm: &[i32], lom: &[i32]| {
        if value.abs() <= tol {
            return;
        }
        let (ifm, lom) = if value < 0.0 {
            (negated(ifm), negated(lom))
        } else {
            (ifm.to_vec(), lom.to_vec())
        };
        let mut d = String::new();
        describe("IF", &ifm, &mut d);
        describe("LO", &lom, &mut d);
        raw.push(Product {
            frequency: value.abs(),
            description: d,
        });
    };
    let zero_if = vec![0; if_tones.len()];
    let zero_lo = vec![0; lo_tones.len()];
    match kind {
        ProductKind::Core => {
            for a in &ifc {
                for b in &loc {
                    push(a.value + b.value, &a.coeffs, &b.coeffs);
                }
            }
        }
        ProductKind::Sidebranch => {
            for a in &ifc {
                push(a.value, &a.coeffs, &zero_lo);
            }
            for b in &loc {
                push(b.value, &zero_if, &b.coeffs);
            }
        }
    }
    // stable sort keeps the lowest-order description first among equals
    let mut indexed: Vec<(usize, Product)> = raw.into_iter().enumerate().collect();
    indexed.sort_by(|a, b| a.1.frequency.total_cmp(&b.1.frequency));
    let mut merged: Vec<(usize, Product)> = Vec::new();
    for (i, p) in indexed {
        match merged.last_mut() {
            Some((j, q)) if (p.frequency - q.frequency).abs() <= tol => {
                if i < *j {
                    *j = i;
                    *q = p;
                }
            }
            _ => merged.push((i, p)),
        }
    }
    Ok(merged
        .into_iter()
        .map(|(_, p)| p)
        .filter(|p| nyquist.is_none_or(|ny| p.frequency < ny - tol))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{Port, Tone};

    fn set(port: Port, freqs: &[f64]) -> ToneSet {
        ToneSet::new(
            port,
            freqs
                .iter()
                .map(|&f| Tone::new(f, 1.0, 0.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn has(list: &[Product], f: f64) -> bool {
        list.iter().any(|p| (p.frequency - f).abs() < 1.0)
    }

    #[test]
    fn first_order_core() {
        let p = enumerate_products(
            &set(Port::If, &[1e9]),
            &set(Port::Lo, &[9e9]),
            1,
            ProductKind::Core,
            None,
        )
        .unwrap();
        let f: Vec<f64> = p.iter().map(|p| p.frequency).collect();
        assert_eq!(f, vec![8e9, 10e9]);
        assert_eq!(p[1].description, "fIF1+fLO1");
        assert_eq!(p[0].description, "-fIF1+fLO1");
    }

    #[test]
    fn intra_lo_products() {
        let p = enumerate_products(
            &set(Port::If, &[0.995e9, 1.005e9]),
            &set(Port::Lo, &[9e9, 9.5e9]),
            3,
            ProductKind::Sidebranch,
            None,
        )
        .unwrap();
        for f in [8.5e9, 10e9, 27e9, 28.5e9, 9e9, 9.5e9, 0.995e9, 2.985e9] {
            assert!(has(&p, f), "missing {f}");
        }
        let q = p
            .iter()
            .find(|p| (p.frequency - 8.5e9).abs() < 1.0)
            .unwrap();
        assert_eq!(q.description, "2fLO1-fLO2");
    }

    #[test]
    fn paper_im3_product_is_core() {
        let p = enumerate_products(
            &set(Port::If, &[0.995e9, 1.005e9]),
            &set(Port::Lo, &[9e9]),
            3,
            ProductKind::Core,
            None,
        )
        .unwrap();
        assert!(has(&p, 9.985e9));
        assert!(p.windows(2).all(|w| w[0].frequency < w[1].frequency));
    }

    #[test]
    fn nyquist_and_even_order() {
        let p = enumerate_products(
            &set(Port::If, &[1e9]),
            &set(Port::Lo, &[9e9]),
            3,
            ProductKind::Core,
            Some(20e9),
        )
        .unwrap();
        assert!(p.iter().all(|p| p.frequency < 20e9));
        assert!(has(&p, 6e9) && has(&p, 12e9) && !has(&p, 30e9));
        let e = enumerate_products(
            &set(Port::If, &[1e9]),
            &set(Port::Lo, &[9e9]),
            2,
            ProductKind::Core,
            None,
        );
        assert!(matches!(e, Err(Error::EvenOrder(2))));
    }
}
