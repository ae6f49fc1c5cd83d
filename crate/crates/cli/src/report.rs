//! Text rendering in the style of R's htest printout.

use ellipsym::TestResult;

/// Smallest p-value printed as a number; below it R prints "< 2.2e-16".
const PRINT_EPS: f64 = f64::EPSILON;

/// `x` to at most `digits` significant digits with trailing zeros dropped,
/// choosing fixed or scientific notation by width as R's `format` does.
pub fn format_signif(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mut sig: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    while sig.len() > 1 && sig.ends_with('0') {
        sig.pop();
    }
    let nsig = sig.len() as i32;
    let sign = if x < 0.0 { "-" } else { "" };

    let (left, right) = if exp >= 0 { (exp + 1, (nsig - exp - 1).max(0)) } else { (1, nsig - exp - 1) };
    let fixed_width = left + if right > 0 { right + 1 } else { 0 };
    let exp_width = if exp.abs() >= 100 { 5 } else { 4 };
    let sci_width = if nsig > 1 { nsig + 1 } else { 1 } + exp_width;

    if fixed_width <= sci_width {
        // like C's sprintf, the fixed form keeps every integer digit
        format!("{:.*}", right as usize, x)
    } else {
        let mut s = String::from(sign);
        s.push_str(&sig[..1]);
        if sig.len() > 1 {
            s.push('.');
            s.push_str(&sig[1..]);
        }
        s.push_str(&format!("e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs()));
        s
    }
}

/// "= 0.1234" or "< 2.2e-16".
pub fn format_pvalue(p: f64, digits: usize) -> String {
    if p < PRINT_EPS {
        format!("< {}", format_signif(PRINT_EPS, 2))
    } else {
        format!("= {}", format_signif(p, digits))
    }
}

pub fn text_block(result: &TestResult, data_name: &str) -> String {
    let mut out = String::new();
    out.push_str(result.method.title());
    out.push_str("\n\n");
    out.push_str(&format!("data:  {data_name}\n"));
    out.push_str(&format!(
        "statistic = {}, p-value {}\n",
        format_signif(result.statistic, 5),
        format_pvalue(result.p_value, 4)
    ));
    out.push_str("alternative hypothesis: the distribution is not elliptically symmetric\n");
    out
}
