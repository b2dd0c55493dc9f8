use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::BetaParams;

/// Which power of the β-distance a kernel uses.
///
/// `Generalized` scales every Euclidean exponent `e` by `a = 2|β|/n`
/// (`(n-p)a`, `(n-1)a`, Morrey scale `r^{aλ}`). `PaperLiteral` keeps the bare
/// exponents (`n-p`, `n-1`, `r^λ`) as they appear in the worked example and in
/// the Hölder-split lemma. Both coincide when β ≡ 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentConvention {
    PaperLiteral,
    #[default]
    Generalized,
}

impl ExponentConvention {
    pub fn scale(self, bp: &BetaParams) -> f64 {
        match self {
            ExponentConvention::PaperLiteral => 1.0,
            ExponentConvention::Generalized => bp.a(),
        }
    }

    /// Kernel exponent of the order-`p` fractional integral and Stummel modulus.
    pub fn kernel_exponent(self, p: f64, bp: &BetaParams) -> f64 {
        (bp.n() as f64 - p) * self.scale(bp)
    }

    /// Kernel exponent of `I_1`: `n - 1` (scaled by `a` when generalized).
    pub fn first_order_exponent(self, bp: &BetaParams) -> f64 {
        self.kernel_exponent(1.0, bp)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper-literal" | "literal" => Ok(ExponentConvention::PaperLiteral),
            "generalized" => Ok(ExponentConvention::Generalized),
            other => Err(Error::Parse(format!("unknown exponent convention '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExponentConvention::PaperLiteral => "paper-literal",
            ExponentConvention::Generalized => "generalized",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions_coincide_for_isotropic_beta() {
        let bp = BetaParams::isotropic(3);
        for p in [1.2, 1.5, 2.0, 2.5] {
            assert_eq!(
                ExponentConvention::PaperLiteral.kernel_exponent(p, &bp),
                ExponentConvention::Generalized.kernel_exponent(p, &bp)
            );
        }
    }

    #[test]
    fn generalized_scales_by_a() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        assert_eq!(ExponentConvention::Generalized.kernel_exponent(1.5, &bp), 0.5 * 2.5);
        assert_eq!(ExponentConvention::PaperLiteral.kernel_exponent(1.5, &bp), 0.5);
        assert_eq!(ExponentConvention::PaperLiteral.first_order_exponent(&bp), 1.0);
    }

    #[test]
    fn parse_round_trip() {
        for c in [ExponentConvention::PaperLiteral, ExponentConvention::Generalized] {
            assert_eq!(ExponentConvention::parse(c.as_str()).unwrap(), c);
        }
        assert!(ExponentConvention::parse("other").is_err());
    }
}
