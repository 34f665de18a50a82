//! Instance files: `lpn-amp/v1`, JSON, UTF-8.
//!
//! ```json
//! {"format":"lpn-amp/v1","q":2,"n":8,"m":2,"eta":0.05,
//!  "sparsity":{"mode":"exact","sigma":3},
//!  "A":["2c","85"],"b":[0,1],"secret":[...],"noise":[...]}
//! ```
//!
//! For `q > 2` each row of `A` is an array of `n` residues. For `q = 2` a
//! row is a lowercase hex string of exactly `ceil(n/4)` digits encoding the
//! row LSB-first: bit `i` of the hex value is entry `i` of the row. The
//! witness keys `secret` and `noise` are optional and must appear together.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::field::{FieldMatrix, FieldVec, PrimeModulus};
use crate::{Error, Result};

use super::{PublicInstance, SparsityMode, VariantSpec, WitnessedInstance};

const FORMAT: &str = "lpn-amp/v1";

#[derive(Serialize, Deserialize)]
struct SparsityRepr {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RowRepr {
    Hex(String),
    Residues(Vec<u32>),
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    format: String,
    q: u32,
    n: usize,
    m: usize,
    eta: f64,
    sparsity: SparsityRepr,
    #[serde(rename = "A")]
    a: Vec<RowRepr>,
    b: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    secret: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<Vec<u32>>,
}

/// Result of reading an instance file, with or without its witness.
#[derive(Debug, Clone, PartialEq)]
pub enum ReadInstance {
    Public(PublicInstance),
    Witnessed(WitnessedInstance),
}

impl ReadInstance {
    pub fn public(&self) -> PublicInstance {
        match self {
            ReadInstance::Public(p) => p.clone(),
            ReadInstance::Witnessed(w) => w.public(),
        }
    }

    pub fn witnessed(&self) -> Option<&WitnessedInstance> {
        match self {
            ReadInstance::Public(_) => None,
            ReadInstance::Witnessed(w) => Some(w),
        }
    }
}

fn row_to_hex(row: &FieldVec) -> String {
    let digits = row.len().div_ceil(4);
    let mut out = vec![b'0'; digits];
    for (nibble_idx, out_byte) in out.iter_mut().rev().enumerate() {
        let mut nibble = 0u8;
        for bit in 0..4 {
            let i = nibble_idx * 4 + bit;
            if i < row.len() && row.get(i) != 0 {
                nibble |= 1 << bit;
            }
        }
        *out_byte = char::from_digit(u32::from(nibble), 16)
            .expect("nibble < 16")
            .to_ascii_lowercase() as u8;
    }
    String::from_utf8(out).expect("hex digits are ascii")
}

fn hex_to_row(hex: &str, n: usize, row_index: usize) -> Result<Vec<u32>> {
    let expected_digits = n.div_ceil(4);
    if hex.len() != expected_digits {
        return Err(Error::Parse(format!(
            "field 'A' row {row_index}: expected {expected_digits} hex digits for n={n}, got {}",
            hex.len()
        )));
    }
    let mut residues = vec![0u32; n];
    for (nibble_idx, ch) in hex.bytes().rev().enumerate() {
        let digit = (ch as char).to_digit(16).ok_or_else(|| {
            Error::Parse(format!(
                "field 'A' row {row_index}: invalid hex digit {:?}",
                ch as char
            ))
        })?;
        if ch.is_ascii_uppercase() {
            return Err(Error::Parse(format!(
                "field 'A' row {row_index}: hex must be lowercase"
            )));
        }
        for bit in 0..4 {
            if digit >> bit & 1 == 1 {
                let i = nibble_idx * 4 + bit;
                if i >= n {
                    return Err(Error::Parse(format!(
                        "field 'A' row {row_index}: bit {i} set beyond row length {n}"
                    )));
                }
                residues[i] = 1;
            }
        }
    }
    Ok(residues)
}

fn to_repr(
    spec: &VariantSpec,
    a: &FieldMatrix,
    b: &FieldVec,
    witness: Option<(&FieldVec, &FieldVec)>,
) -> InstanceRepr {
    let sparsity = match spec.sparsity() {
        SparsityMode::Dense => SparsityRepr { mode: "dense".into(), sigma: None },
        SparsityMode::Exact(s) => SparsityRepr { mode: "exact".into(), sigma: Some(s) },
        SparsityMode::Approx(s) => SparsityRepr { mode: "approx".into(), sigma: Some(s) },
    };
    let rows = (0..a.rows())
        .map(|r| {
            let row = a.row(r);
            if spec.modulus().is_binary() {
                RowRepr::Hex(row_to_hex(&row))
            } else {
                RowRepr::Residues(row.to_residues())
            }
        })
        .collect();
    InstanceRepr {
        format: FORMAT.into(),
        q: spec.q(),
        n: spec.n(),
        m: spec.m(),
        eta: spec.eta(),
        sparsity,
        a: rows,
        b: b.to_residues(),
        secret: witness.map(|(s, _)| s.to_residues()),
        noise: witness.map(|(_, e)| e.to_residues()),
    }
}

/// Write an instance together with its witness.
pub fn write_instance(inst: &WitnessedInstance, path: &Path) -> Result<()> {
    let repr = to_repr(
        inst.spec(),
        inst.matrix(),
        inst.b(),
        Some((inst.secret(), inst.noise())),
    );
    let json = serde_json::to_string(&repr).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Write the solver-facing view only.
pub fn write_public_instance(inst: &PublicInstance, path: &Path) -> Result<()> {
    let repr = to_repr(inst.spec(), inst.matrix(), inst.b(), None);
    let json = serde_json::to_string(&repr).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Read and fully re-validate an instance file: primality of `q`, spec
/// invariants, residue ranges, Exact row weights, and (when the witness is
/// present) the identity `b = A s + e`.
pub fn read_instance(path: &Path) -> Result<ReadInstance> {
    let text = fs::read_to_string(path)?;
    let repr: InstanceRepr = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if repr.format != FORMAT {
        return Err(Error::Parse(format!(
            "field 'format': expected {FORMAT:?}, got {:?}",
            repr.format
        )));
    }
    let modulus = PrimeModulus::new(repr.q)
        .map_err(|e| Error::Parse(format!("field 'q': {e}")))?;
    let sparsity = match (repr.sparsity.mode.as_str(), repr.sparsity.sigma) {
        ("dense", None) => SparsityMode::Dense,
        ("dense", Some(_)) => {
            return Err(Error::Parse("field 'sparsity': dense mode takes no sigma".into()))
        }
        ("exact", Some(s)) => SparsityMode::Exact(s),
        ("approx", Some(s)) => SparsityMode::Approx(s),
        ("exact", None) | ("approx", None) => {
            return Err(Error::Parse(format!(
                "field 'sparsity': mode {:?} requires sigma",
                repr.sparsity.mode
            )))
        }
        (other, _) => {
            return Err(Error::Parse(format!("field 'sparsity': unknown mode {other:?}")))
        }
    };
    let spec = VariantSpec::new(modulus, repr.eta, repr.n, repr.m, sparsity)
        .map_err(|e| Error::Parse(format!("instance header: {e}")))?;

    if repr.a.len() != repr.m {
        return Err(Error::Parse(format!(
            "field 'A': expected {} rows, got {}",
            repr.m,
            repr.a.len()
        )));
    }
    let mut entries = Vec::with_capacity(repr.m * repr.n);
    for (r, row) in repr.a.iter().enumerate() {
        match (modulus.is_binary(), row) {
            (true, RowRepr::Hex(hex)) => entries.extend(hex_to_row(hex, repr.n, r)?),
            (false, RowRepr::Residues(res)) => {
                if res.len() != repr.n {
                    return Err(Error::Parse(format!(
                        "field 'A' row {r}: expected {} residues, got {}",
                        repr.n,
                        res.len()
                    )));
                }
                entries.extend_from_slice(res);
            }
            (true, RowRepr::Residues(_)) => {
                return Err(Error::Parse(format!(
                    "field 'A' row {r}: q=2 rows must be hex strings"
                )))
            }
            (false, RowRepr::Hex(_)) => {
                return Err(Error::Parse(format!(
                    "field 'A' row {r}: q>2 rows must be residue arrays"
                )))
            }
        }
    }
    let a = FieldMatrix::from_row_major(modulus, repr.m, repr.n, &entries)
        .map_err(|e| Error::Parse(format!("field 'A': {e}")))?;
    let b = FieldVec::new(modulus, &repr.b)
        .map_err(|e| Error::Parse(format!("field 'b': {e}")))?;

    match (repr.secret, repr.noise) {
        (None, None) => {
            let public = PublicInstance::new(spec, a, b)
                .map_err(|e| Error::Parse(format!("instance body: {e}")))?;
            Ok(ReadInstance::Public(public))
        }
        (Some(secret), Some(noise)) => {
            let secret = FieldVec::new(modulus, &secret)
                .map_err(|e| Error::Parse(format!("field 'secret': {e}")))?;
            let noise = FieldVec::new(modulus, &noise)
                .map_err(|e| Error::Parse(format!("field 'noise': {e}")))?;
            let witnessed = WitnessedInstance::new(spec, a, b, secret, noise)
                .map_err(|e| Error::Parse(format!("instance body: {e}")))?;
            Ok(ReadInstance::Witnessed(witnessed))
        }
        _ => Err(Error::Parse(
            "fields 'secret' and 'noise' must appear together".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::sample_instance;
    use crate::seeding::trial_rng;

    fn spec(q: u32, eta: f64, n: usize, m: usize, sparsity: SparsityMode) -> VariantSpec {
        VariantSpec::new(PrimeModulus::new(q).unwrap(), eta, n, m, sparsity).unwrap()
    }

    #[test]
    fn hex_rows_are_lsb_first() {
        let q2 = PrimeModulus::new(2).unwrap();
        let row = FieldVec::new(q2, &[1, 0, 0, 0]).unwrap();
        assert_eq!(row_to_hex(&row), "1");
        let row = FieldVec::new(q2, &[0, 0, 0, 1]).unwrap();
        assert_eq!(row_to_hex(&row), "8");
        let row = FieldVec::new(q2, &[1, 1, 1, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(row_to_hex(&row), "0f");
        let row = FieldVec::new(q2, &[0, 1, 0, 0, 1]).unwrap();
        assert_eq!(row_to_hex(&row), "12");
        assert_eq!(hex_to_row("12", 5, 0).unwrap(), vec![0, 1, 0, 0, 1]);
        // Bit beyond n rejected: n=5 allows values < 32.
        assert!(hex_to_row("22", 5, 0).is_err());
        assert!(hex_to_row("1", 5, 0).is_err());
        assert!(hex_to_row("1F", 5, 0).is_err());
    }

    #[test]
    fn roundtrip_witnessed_and_public() {
        let mut rng = trial_rng(41, 0);
        let dir = std::env::temp_dir();
        for s in [
            spec(2, 0.1, 13, 9, SparsityMode::Dense),
            spec(2, 0.1, 13, 9, SparsityMode::Exact(4)),
            spec(5, 0.2, 6, 7, SparsityMode::Approx(2)),
        ] {
            let inst = sample_instance(&s, &mut rng);
            let path = dir.join(format!("lpn_amp_io_test_{}_{}.json", s.q(), s.m()));
            write_instance(&inst, &path).unwrap();
            let back = read_instance(&path).unwrap();
            assert_eq!(back.witnessed().unwrap(), &inst);

            write_public_instance(&inst.public(), &path).unwrap();
            let back = read_instance(&path).unwrap();
            assert!(back.witnessed().is_none());
            assert_eq!(back.public(), inst.public());
            std::fs::remove_file(&path).ok();
        }
    }

    #[test]
    fn rejects_invalid_files() {
        let dir = std::env::temp_dir();
        let path = dir.join("lpn_amp_io_bad.json");

        // Non-prime q.
        std::fs::write(&path, r#"{"format":"lpn-amp/v1","q":9,"n":2,"m":1,"eta":0.1,"sparsity":{"mode":"dense"},"A":[[1,2]],"b":[0]}"#).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("'q'"), "{err}");

        // Exact(2) with a weight-1 row.
        std::fs::write(&path, r#"{"format":"lpn-amp/v1","q":2,"n":4,"m":1,"eta":0.1,"sparsity":{"mode":"exact","sigma":2},"A":["1"],"b":[0]}"#).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("weight"), "{err}");

        // Witness keys must come together.
        std::fs::write(&path, r#"{"format":"lpn-amp/v1","q":2,"n":4,"m":1,"eta":0.1,"sparsity":{"mode":"dense"},"A":["3"],"b":[0],"secret":[1,1,0,0]}"#).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("together"), "{err}");

        // Witness identity enforced: A=[1100], s=(1,0,0,0), e=(0) gives b=(1).
        std::fs::write(&path, r#"{"format":"lpn-amp/v1","q":2,"n":4,"m":1,"eta":0.1,"sparsity":{"mode":"dense"},"A":["3"],"b":[0],"secret":[1,0,0,0],"noise":[0]}"#).unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(err.to_string().contains("identity"), "{err}");

        // Unknown format tag.
        std::fs::write(&path, r#"{"format":"lpn/v0","q":2,"n":4,"m":1,"eta":0.1,"sparsity":{"mode":"dense"},"A":["3"],"b":[0]}"#).unwrap();
        assert!(read_instance(&path).is_err());

        std::fs::remove_file(&path).ok();
    }
}
