/// Dense real polynomial, coefficient `c[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.len() > 1 && c[c.len() - 1] == 0.0 {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Poly { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &ci)| i as f64 * ci)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Poly {
        let mut out = vec![0.0];
        out.extend(self.c.iter().enumerate().map(|(i, &ci)| ci / (i as f64 + 1.0)));
        Poly::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|&ci| ci * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        Poly::new(
            (0..n)
                .map(|i| self.c.get(i).copied().unwrap_or(0.0) - other.c.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    /// Coefficients of `p(x0 + s*w)` as a polynomial in `w`.
    pub fn shifted(&self, x0: f64, s: f64) -> Poly {
        // repeated synthetic division gives the Taylor coefficients at x0
        let mut a = self.c.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                a[j] += x0 * a[j + 1];
            }
        }
        let mut sp = 1.0;
        for ai in a.iter_mut() {
            *ai *= sp;
            sp *= s;
        }
        Poly::new(a)
    }
}
