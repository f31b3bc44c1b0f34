//! Text specifications of states, as accepted on the command line.
//!
//! ```text
//! ghz:N  w:N  dicke:N,K  cluster4  dicke4
//! taumin:x0,x1,x2,x3        real, Σx² = 1
//! genA:z0,z1,z2,z3          complex, e.g. 0.5+0.5j or (1+j)/2
//! mclass:p0,p1,p2,p3;t0,t1,t2,t3
//! wmix:p
//! ```
//! Any spec may be followed by `;filter=eps` (diag(ε,1) on every qubit) and then
//! `;lose=a,b,...` (1-based qubits traced out). Numbers are arithmetic expressions over
//! `+ - * / ^`, parentheses, `sqrt`, `pi` and the imaginary unit `j`.

use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{
    cluster4, dicke, generic_a_state, ghz, m_class_state, tau_min_state, w, w_loss_mixture, GenericACoords,
    MClassCoords, TauMinCoords,
};
use crate::qstate::{apply_filter, partial_trace, DensityMatrix, LocalFilter, PureState};

#[derive(Debug, Clone)]
pub struct StateSpec {
    pub text: String,
    pub rho: DensityMatrix,
    /// Present while the state is still a known pure state.
    pub pure: Option<PureState>,
    /// Success probability of the filter, if one was applied.
    pub filter_probability: Option<f64>,
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_state(s)
    }
}

pub fn parse_state(text: &str) -> Result<StateSpec> {
    let text = text.trim();
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n.trim(), r),
        None => (text, ""),
    };
    let mut segments = split_top(rest, ';');
    if rest.trim().is_empty() {
        segments.clear();
    }
    let n_positional = segments.iter().take_while(|s| !s.contains('=')).count();
    let options = segments.split_off(n_positional);
    let args: Vec<Vec<String>> = segments.iter().map(|s| split_top(s, ',')).collect();

    let real_list = |i: usize, len: usize| -> Result<Vec<f64>> {
        let list = args.get(i).ok_or_else(|| Error::Parse(format!("{name}: missing argument list")))?;
        if list.len() != len {
            return Err(Error::Parse(format!("{name}: expected {len} values, got {}", list.len())));
        }
        list.iter().map(|e| eval_real(e)).collect()
    };
    let count = |i: usize, len: usize| -> Result<usize> {
        let v = real_list(0, len)?[i];
        if v.fract() != 0.0 || v < 0.0 {
            return Err(Error::Parse(format!("{name}: {v} is not a nonnegative integer")));
        }
        Ok(v as usize)
    };
    let expect_lists = |k: usize| -> Result<()> {
        if args.len() != k {
            return Err(Error::Parse(format!("{name}: expected {k} argument list(s), got {}", args.len())));
        }
        Ok(())
    };

    let pure: Option<PureState>;
    let mut rho: Option<DensityMatrix> = None;
    match name.to_ascii_lowercase().as_str() {
        "ghz" | "w" => {
            expect_lists(1)?;
            let n = count(0, 1)?;
            pure = Some(if name.eq_ignore_ascii_case("ghz") { ghz(n)? } else { w(n)? });
        }
        "dicke" => {
            expect_lists(1)?;
            let (n, k) = (count(0, 2)?, count(1, 2)?);
            pure = Some(dicke(n, k)?);
        }
        "dicke4" => {
            expect_lists(0)?;
            pure = Some(dicke(4, 2)?);
        }
        "cluster4" => {
            expect_lists(0)?;
            pure = Some(cluster4());
        }
        "taumin" => {
            expect_lists(1)?;
            let x = real_list(0, 4)?;
            pure = Some(tau_min_state(&TauMinCoords::new([x[0], x[1], x[2], x[3]])?));
        }
        "gena" => {
            expect_lists(1)?;
            if args[0].len() != 4 {
                return Err(Error::Parse(format!("genA: expected 4 values, got {}", args[0].len())));
            }
            let z: Vec<Complex64> = args[0].iter().map(|e| eval(e)).collect::<Result<_>>()?;
            pure = Some(generic_a_state(&GenericACoords::new([z[0], z[1], z[2], z[3]])?));
        }
        "mclass" => {
            expect_lists(2)?;
            let p = real_list(0, 4)?;
            let t = real_list(1, 4)?;
            let c = MClassCoords::new([p[0], p[1], p[2], p[3]], [t[0], t[1], t[2], t[3]])?;
            pure = Some(m_class_state(&c));
        }
        "wmix" => {
            expect_lists(1)?;
            rho = Some(w_loss_mixture(real_list(0, 1)?[0])?);
            pure = None;
        }
        _ => return Err(Error::UnknownState(text.to_string())),
    }
    let mut pure = pure;
    let mut rho = match (rho, &pure) {
        (Some(r), _) => r,
        (None, Some(p)) => p.density(),
        (None, None) => unreachable!("every branch sets a state"),
    };

    let mut filter_probability = None;
    let mut seen_lose = false;
    for opt in &options {
        let (key, value) = opt
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("option {opt:?} is not key=value")))?;
        match key.trim() {
            "filter" if !seen_lose && filter_probability.is_none() => {
                let eps = eval_real(value)?;
                let (r, prob) = apply_filter(&rho, &LocalFilter::uniform_diag(rho.n_qubits(), eps)?)?;
                rho = r;
                pure = None;
                filter_probability = Some(prob);
            }
            "lose" if !seen_lose => {
                let lost: Vec<usize> = split_top(value, ',')
                    .iter()
                    .map(|e| {
                        let v = eval_real(e)?;
                        if v.fract() != 0.0 || v < 1.0 {
                            return Err(Error::Parse(format!("qubit label {v} is not a positive integer")));
                        }
                        Ok(v as usize)
                    })
                    .collect::<Result<_>>()?;
                rho = partial_trace(&rho, &lost)?;
                pure = None;
                seen_lose = true;
            }
            k => return Err(Error::Parse(format!("unexpected or repeated option {k:?}"))),
        }
    }
    Ok(StateSpec { text: text.to_string(), rho, pure, filter_probability })
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).collect()
}

pub fn eval_real(expr: &str) -> Result<f64> {
    let z = eval(expr)?;
    if z.im.abs() > 1e-12 {
        return Err(Error::Parse(format!("{expr:?} is not real")));
    }
    Ok(z.re)
}

pub fn eval(expr: &str) -> Result<Complex64> {
    let tokens = tokenize(expr)?;
    let mut p = Parser { tokens, pos: 0, src: expr };
    let v = p.sum()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("trailing input"));
    }
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Parse(format!("{expr:?} does not evaluate to a finite number")));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Complex64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Parse(format!("bad number {text:?} in {s:?}")))?;
            if i < chars.len() && chars[i] == 'j' {
                i += 1;
                out.push(Tok::Num(Complex64::new(0.0, v)));
            } else {
                out.push(Tok::Num(Complex64::new(v, 0.0)));
            }
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at token {} of {:?}", self.pos + 1, self.src))
    }

    fn eat(&mut self, op: char) -> bool {
        if self.tokens.get(self.pos) == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Complex64> {
        let mut v = self.product()?;
        loop {
            if self.eat('+') {
                v += self.product()?;
            } else if self.eat('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<Complex64> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.norm() == 0.0 {
                    return Err(self.error("division by zero"));
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Complex64> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Complex64> {
        let mut base = self.atom()?;
        if self.tokens.get(self.pos) == Some(&Tok::Ident("j".into())) {
            self.pos += 1;
            base *= Complex64::i();
        }
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.unary()?;
        if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= i32::MAX as f64 {
            Ok(base.powi(e.re as i32))
        } else {
            Ok(base.powc(e))
        }
    }

    fn atom(&mut self) -> Result<Complex64> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| self.error("unexpected end"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(v),
            Tok::Op('(') => {
                let v = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("missing ')'"));
                }
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "j" => Ok(Complex64::i()),
                "pi" => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
                "sqrt" => {
                    if !self.eat('(') {
                        return Err(self.error("sqrt needs '('"));
                    }
                    let v = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.error("missing ')'"));
                    }
                    // Keep -0 imaginary parts off the branch cut.
                    Ok(Complex64::new(v.re, v.im + 0.0).sqrt())
                }
                other => Err(self.error(&format!("unknown name {other:?}"))),
            },
            Tok::Op(c) => Err(self.error(&format!("unexpected {c:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::w_loss_filtered;

    #[test]
    fn expressions() {
        let close = |e: &str, v: Complex64| assert!((eval(e).unwrap() - v).norm() < 1e-14, "{e}");
        close("1/2+1/2j", Complex64::new(0.5, -0.5));
        close("0.5+(1/2)j", Complex64::new(0.5, 0.5));
        close("-2^2", Complex64::new(-4.0, 0.0));
        close("2^-1", Complex64::new(0.5, 0.0));
        close("1/sqrt(2)", Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        close("sqrt(-1)", Complex64::i());
        close("(1+j)*(1-j)", Complex64::new(2.0, 0.0));
        close("1e-3j", Complex64::new(0.0, 1e-3));
        close("pi/2", Complex64::new(std::f64::consts::FRAC_PI_2, 0.0));
        close("2.5E+1", Complex64::new(25.0, 0.0));
        for bad in ["", "1+", "(1", "foo", "1/0", "2 3", "1,2", "#"] {
            assert!(matches!(eval(bad), Err(Error::Parse(_))), "{bad}");
        }
        assert!(eval_real("j").is_err());
    }

    #[test]
    fn named_specs() {
        let g = parse_state("ghz:4").unwrap();
        assert_eq!(g.rho.n_qubits(), 4);
        assert!(g.pure.is_some());
        assert_eq!(parse_state("w:5").unwrap().rho.n_qubits(), 5);
        assert_eq!(parse_state("dicke:4,2").unwrap().rho.max_abs_diff(&parse_state("dicke4").unwrap().rho), 0.0);
        assert!(parse_state("cluster4").is_ok());
        assert!(matches!(parse_state("bell:2"), Err(Error::UnknownState(_))));
        assert!(parse_state("ghz").is_err());
        assert!(parse_state("cluster4:3").is_err());
    }

    #[test]
    fn family_specs() {
        let t = parse_state("taumin:1/sqrt(2),1/sqrt(2),0,0").unwrap();
        assert!(t.rho.max_abs_diff(&parse_state("ghz:4").unwrap().rho) < 1e-12);
        assert!(matches!(parse_state("taumin:0.7,0.7,0,0"), Err(Error::InvalidCoords(_))));
        let a = parse_state("genA:1/sqrt(2),1/sqrt(2)j,0,0").unwrap();
        assert_eq!(a.rho.n_qubits(), 4);
        let m = parse_state("mclass:1/4,1/4,1/4,1/4;0,pi/4,pi/2,3*pi/4").unwrap();
        assert_eq!(m.rho.n_qubits(), 4);
        assert!(matches!(parse_state("mclass:1/4,1/4,1/4,1/4;0,0,0,0"), Err(Error::Constraint(_))));
    }

    #[test]
    fn mixtures_filters_losses() {
        let plain = parse_state("wmix:3/4").unwrap();
        assert!(plain.pure.is_none());
        let f = parse_state("wmix:3/4;filter=0.1").unwrap();
        let (want, prob) = w_loss_filtered(0.75, 0.1).unwrap();
        assert!(f.rho.max_abs_diff(&want) < 1e-15);
        assert_eq!(f.filter_probability, Some(prob));
        let l = parse_state("w:4;lose=4").unwrap();
        assert_eq!(l.rho.n_qubits(), 3);
        assert!(l.rho.max_abs_diff(&w_loss_mixture(0.75).unwrap()) < 1e-12);
        assert_eq!(parse_state("ghz:4;lose=1,2").unwrap().rho.n_qubits(), 2);
        assert!(parse_state("ghz:3;lose=1,2,3").is_err());
        assert!(parse_state("ghz:3;lose=2;filter=0.5").is_err());
        assert!(parse_state("ghz:3;color=red").is_err());
        let dead = parse_state("ghz:3;lose=1;filter=1e-300");
        assert!(dead.is_err());
        assert!(matches!(parse_state("wmix:0;lose=1;filter=0").unwrap_err(), Error::Parse(_) | Error::OutOfRange(_)));
    }

    #[test]
    fn annihilating_filter() {
        // |000⟩ under diag(ε,1)^⊗3 keeps weight ε⁶, below the annihilation threshold for tiny ε.
        let e = parse_state("wmix:0;filter=1e-4").unwrap_err();
        assert!(e.is_infeasible(), "{e:?}");
    }
}
