//! Report rendering.
//!
//! CSV output is a pure function of the scenario and seed, so two runs
//! produce byte-identical files. Timing only appears in the text summary.

use std::fmt::Write as _;
use std::time::Duration;

use pricemech_core::rng::RNG_ALGORITHM;
use pricemech_core::{Exact, Scalar};

use crate::scenario::Arithmetic;

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRow {
    pub policy: String,
    pub order: Option<Vec<usize>>,
    pub welfare: Exact,
    pub revenue: Exact,
    pub utility_total: Exact,
    pub opt_welfare: Exact,
    pub ratio: Exact,
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: String,
    pub buyers: usize,
    pub items: usize,
    pub algorithm: &'static str,
    pub family: String,
    pub arithmetic: Arithmetic,
    pub seed: u64,
    /// Sample count behind sampled prices.
    pub samples: Option<u64>,
    /// Largest `v(M)` over the support; welfare divided by this is the
    /// normalized welfare.
    pub scale: Exact,
    pub prices: Vec<Exact>,
    pub rows: Vec<OutcomeRow>,
    pub elapsed: Duration,
}

/// Decimal rendering used in CSV cells.
pub fn number(x: &Exact) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}", x.to_f64())
    }
}

fn order_cell(order: &Option<Vec<usize>>) -> String {
    order
        .as_ref()
        .map(|o| {
            o.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer does not fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

impl Report {
    pub fn outcome_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scenario",
            "policy",
            "order",
            "welfare",
            "revenue",
            "utility_total",
            "opt_welfare",
            "ratio",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                self.scenario.clone(),
                r.policy.clone(),
                order_cell(&r.order),
                number(&r.welfare),
                number(&r.revenue),
                number(&r.utility_total),
                number(&r.opt_welfare),
                number(&r.ratio),
            ])
            .expect("in-memory write");
        }
        finish(w)
    }

    pub fn prices_csv(&self) -> String {
        prices_csv(&self.prices)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario      {}", self.scenario);
        let _ = writeln!(s, "version       {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "market        {} buyers, {} items",
            self.buyers, self.items
        );
        let _ = writeln!(s, "algorithm     {}", self.algorithm);
        let _ = writeln!(s, "pricing       {}", self.family);
        match self.samples {
            Some(t) => {
                let _ = writeln!(s, "samples (t)   {t}");
            }
            None => {
                let _ = writeln!(s, "samples (t)   exact expectation");
            }
        }
        let _ = writeln!(s, "arithmetic    {}", self.arithmetic.name());
        let _ = writeln!(s, "rng           {RNG_ALGORITHM}");
        let _ = writeln!(s, "seed          {}", self.seed);
        let _ = writeln!(s, "scale v(M)    {}", number(&self.scale));
        let prices: Vec<_> = self.prices.iter().map(number).collect();
        let _ = writeln!(s, "prices        [{}]", prices.join(", "));
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<20} {:<12} {:>12} {:>12} {:>12} {:>8}",
            "policy", "order", "welfare", "normalized", "opt", "ratio"
        );
        for r in &self.rows {
            let normalized = if self.scale == Exact::from_ratio(0, 1) {
                r.welfare.clone()
            } else {
                r.welfare.clone() / self.scale.clone()
            };
            let mut welfare = format!("{:.6}", r.welfare.to_f64());
            if let Some(se) = r.std_error {
                let _ = write!(welfare, " ±{se:.2e}");
            }
            let _ = writeln!(
                s,
                "{:<20} {:<12} {:>12} {:>12.6} {:>12.6} {:>8.4}",
                r.policy,
                order_cell(&r.order),
                welfare,
                normalized.to_f64(),
                r.opt_welfare.to_f64(),
                r.ratio.to_f64()
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "elapsed       {:.3}s", self.elapsed.as_secs_f64());
        s
    }
}

pub fn prices_csv(prices: &[Exact]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["item_id", "price"])
        .expect("in-memory write");
    for (j, p) in prices.iter().enumerate() {
        w.write_record([j.to_string(), number(p)])
            .expect("in-memory write");
    }
    finish(w)
}
