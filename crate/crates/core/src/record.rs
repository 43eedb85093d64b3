//! Serializable experiment rows with exact rational values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::realnum::Enclosure;
use crate::{Error, Result};

/// One experiment datum. The value is `value_num/value_den` with half-width
/// `err_num/err_den`; exact values carry err 0/1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub params: String,
    pub q: u64,
    pub value_num: String,
    pub value_den: String,
    pub err_num: String,
    pub err_den: String,
    pub undecided_count: u64,
}

/// `k=v` pairs sorted by key and joined with `;`.
pub fn canonical_params<K: AsRef<str>, V: ToString>(pairs: impl IntoIterator<Item = (K, V)>) -> String {
    let m: BTreeMap<String, String> = pairs.into_iter().map(|(k, v)| (k.as_ref().to_string(), v.to_string())).collect();
    m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

impl ExperimentRecord {
    pub fn exact(experiment: &str, params: &str, q: u64, value: &BigRational, undecided: u64) -> Self {
        Self::with_error(experiment, params, q, value, &BigRational::zero(), undecided)
    }

    pub fn count(experiment: &str, params: &str, q: u64, value: u64, undecided: u64) -> Self {
        Self::exact(experiment, params, q, &BigRational::from_integer(BigInt::from(value)), undecided)
    }

    /// Midpoint and radius of the enclosure.
    pub fn enclosure(experiment: &str, params: &str, q: u64, e: &Enclosure, undecided: u64) -> Self {
        Self::with_error(experiment, params, q, &e.midpoint(), &e.radius(), undecided)
    }

    fn with_error(experiment: &str, params: &str, q: u64, v: &BigRational, err: &BigRational, undecided: u64) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            params: params.to_string(),
            q,
            value_num: v.numer().to_string(),
            value_den: v.denom().to_string(),
            err_num: err.numer().to_string(),
            err_den: err.denom().to_string(),
            undecided_count: undecided,
        }
    }

    fn ratio(num: &str, den: &str) -> Result<BigRational> {
        let n: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad integer {num:?}")))?;
        let d: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad integer {den:?}")))?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator(format!("{num}/{den}")));
        }
        Ok(BigRational::new(n, d))
    }

    pub fn value(&self) -> Result<BigRational> {
        Self::ratio(&self.value_num, &self.value_den)
    }

    pub fn err(&self) -> Result<BigRational> {
        Self::ratio(&self.err_num, &self.err_den)
    }

    /// [value − err, value + err].
    pub fn as_enclosure(&self) -> Result<Enclosure> {
        let (v, e) = (self.value()?, self.err()?);
        Ok(Enclosure::new(&v - &e, &v + &e))
    }
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    wr.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(|e| Error::Parse(e.to_string()))).collect()
}

pub fn to_json(records: &[ExperimentRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn from_json(s: &str) -> Result<Vec<ExperimentRecord>> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::rat;

    #[test]
    fn csv_and_json_round_trip() {
        let recs = vec![
            ExperimentRecord::exact("bc-ratio", "gamma=rat:0;psi=const:1/10", 3, &rat(27, 80), 0),
            ExperimentRecord::enclosure("etk", "alpha=sqrt:2", 10, &Enclosure::new(rat(1, 3), rat(1, 2)), 2),
        ];
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("experiment,params,q,value_num,value_den,err_num,err_den,undecided_count\n"));
        assert!(text.contains("bc-ratio,gamma=rat:0;psi=const:1/10,3,27,80,0,1,0"));
        assert_eq!(read_csv(&buf[..]).unwrap(), recs);
        assert_eq!(from_json(&to_json(&recs)).unwrap(), recs);
        assert_eq!(recs[1].as_enclosure().unwrap(), Enclosure::new(rat(1, 3), rat(1, 2)));
        assert_eq!(recs[1].value().unwrap(), rat(5, 12));
    }

    #[test]
    fn params_are_canonical() {
        assert_eq!(canonical_params([("psi", "inv:1/4"), ("gamma", "sqrt:3")]), "gamma=sqrt:3;psi=inv:1/4");
        assert!(from_json(r#"[{"experiment":"x"}]"#).is_err());
    }
}
