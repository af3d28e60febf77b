//! CSV rows and the human-readable point block.

use secrelay::McEstimate;

pub const CSV_HEADER: &str =
    "lambda_m_db,n,topology,rate_nats,p_analytic,p_asymptotic,p_mc,mc_ci_low,mc_ci_high,p_oracle";

/// `x` rounded to 10 significant digits, shortest of fixed or scientific
/// notation, trailing zeros dropped.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let fixed = format!("{x:.*}", (9 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One evaluated grid point; absent estimators stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub lambda_m_db: f64,
    pub n: usize,
    pub topology: String,
    pub rate_nats: f64,
    pub p_analytic: Option<f64>,
    pub p_asymptotic: Option<f64>,
    pub mc: Option<McEstimate>,
    pub p_oracle: Option<f64>,
}

impl CurvePoint {
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(sig10).unwrap_or_default();
        [
            sig10(self.lambda_m_db),
            self.n.to_string(),
            self.topology.clone(),
            sig10(self.rate_nats),
            opt(self.p_analytic),
            opt(self.p_asymptotic),
            opt(self.mc.map(|m| m.p_hat)),
            opt(self.mc.map(|m| m.ci_low)),
            opt(self.mc.map(|m| m.ci_high)),
            opt(self.p_oracle),
        ]
        .join(",")
    }

    pub fn pretty(&self) -> String {
        let mut out = format!(
            "lambda_m_db   {}\nn             {}\ntopology      {}\nrate_nats     {}\n",
            sig10(self.lambda_m_db),
            self.n,
            self.topology,
            sig10(self.rate_nats)
        );
        if let Some(p) = self.p_analytic {
            out += &format!("p_analytic    {}\n", sig10(p));
        }
        if let Some(p) = self.p_asymptotic {
            out += &format!("p_asymptotic  {}\n", sig10(p));
        }
        if let Some(m) = self.mc {
            out += &format!(
                "p_mc          {}  [{}, {}] at {}% over {} trials\n",
                sig10(m.p_hat),
                sig10(m.ci_low),
                sig10(m.ci_high),
                sig10(100.0 * m.confidence),
                m.trials
            );
        }
        if let Some(p) = self.p_oracle {
            out += &format!("p_oracle      {}\n", sig10(p));
        }
        out
    }
}

/// Header plus one line per point, newline-terminated.
pub fn csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        out += &p.csv_row();
        out.push('\n');
    }
    out
}
