//! Encrypted-at-rest storage: a deterministic 64-bit block cipher applied to
//! every identifier and attribute value before training.
//!
//! The cipher is an 8-round balanced Feistel network, so it is a bijection
//! on `u64` regardless of the round function. Determinism is what makes the
//! scheme queryable: equal plaintexts give equal ciphertexts, so equality
//! search runs on ciphertexts unchanged. Order is not preserved, so range
//! selection is refused in this mode. The stored unit contains only
//! ciphertexts; the key never enters the serialized format.

use crate::error::Error;
use crate::rng::{fold, mix};
use crate::store::{build_part_with_domain, Lmu, LmuConfig, StorageMode};
use crate::table::{AttrDef, Schema, Table, Tuple, Value};
use crate::Interval;
use crate::Result;

const ROUNDS: usize = 8;

/// 256-bit cipher key with the derived per-round subkeys.
#[derive(Clone)]
pub struct CipherKey {
    subkeys: [u64; ROUNDS],
}

impl CipherKey {
    pub fn new(bytes: &[u8; 32]) -> Self {
        let words: Vec<u64> = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut subkeys = [0u64; ROUNDS];
        for (r, k) in subkeys.iter_mut().enumerate() {
            *k = fold(r as u64 + 1, &words);
        }
        Self { subkeys }
    }

    /// Key material expanded from a seed; for tests and generated keyfiles.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let mut bytes = [0u8; 32];
        for c in bytes.chunks_exact_mut(8) {
            c.copy_from_slice(&rng.next_u64().to_le_bytes());
        }
        Self::new(&bytes)
    }

    #[inline]
    fn round(half: u32, subkey: u64) -> u32 {
        mix(half as u64 ^ subkey) as u32
    }

    pub fn encrypt_u64(&self, v: u64) -> u64 {
        let mut l = (v >> 32) as u32;
        let mut r = v as u32;
        for &k in &self.subkeys {
            (l, r) = (r, l ^ Self::round(r, k));
        }
        ((l as u64) << 32) | r as u64
    }

    pub fn decrypt_u64(&self, v: u64) -> u64 {
        let mut l = (v >> 32) as u32;
        let mut r = v as u32;
        for &k in self.subkeys.iter().rev() {
            (l, r) = (r ^ Self::round(l, k), l);
        }
        ((l as u64) << 32) | r as u64
    }

    pub fn encrypt_value(&self, v: Value) -> Value {
        self.encrypt_u64(v as u64) as Value
    }

    pub fn decrypt_value(&self, v: Value) -> Value {
        self.decrypt_u64(v as u64) as Value
    }
}

fn ciphertext_schema(schema: &Schema) -> Schema {
    Schema::new(
        schema
            .attrs
            .iter()
            .map(|a| AttrDef {
                name: a.name.clone(),
                domain: Interval::full(),
            })
            .collect(),
    )
    .expect("nonempty schema stays nonempty")
}

/// Trains an encrypted unit: every id and value is enciphered, attribute
/// domains widen to the full 64-bit space, and plaintext metadata is reduced
/// to attribute names.
pub fn build_secure_lmu(table: &Table, key: &CipherKey, cfg: &LmuConfig) -> Result<Lmu> {
    table.validate()?;
    let enc_tuples: Vec<Tuple> = table
        .tuples
        .iter()
        .map(|t| Tuple {
            id: key.encrypt_u64(t.id),
            values: t.values.iter().map(|&v| key.encrypt_value(v)).collect(),
        })
        .collect();
    let enc_table = Table::new(ciphertext_schema(&table.schema), enc_tuples)?;
    let part = build_part_with_domain(&enc_table, cfg, Interval::full())?;
    Ok(Lmu {
        mode: StorageMode::Encrypted,
        parts: vec![part],
    })
}

fn decrypt_tuple(key: &CipherKey, t: &Tuple) -> Tuple {
    Tuple {
        id: key.decrypt_u64(t.id),
        values: t.values.iter().map(|&v| key.decrypt_value(v)).collect(),
    }
}

fn check_encrypted(lmu: &Lmu) -> Result<()> {
    if lmu.mode != StorageMode::Encrypted {
        return Err(Error::InvalidParameter(
            "unit is not in encrypted mode".into(),
        ));
    }
    Ok(())
}

/// Full scan with boundary decryption, sorted by plaintext id.
pub fn secure_scan(lmu: &Lmu, key: &CipherKey) -> Result<Vec<Tuple>> {
    check_encrypted(lmu)?;
    let mut tuples: Vec<Tuple> = lmu
        .seq_scan()
        .iter()
        .map(|t| decrypt_tuple(key, t))
        .collect();
    tuples.sort_unstable_by_key(|t| t.id);
    Ok(tuples)
}

/// Equality selection over ciphertexts; results are decrypted at the
/// boundary. Row layout matches [`crate::relops::select_eq`].
pub fn secure_select_eq(
    lmu: &Lmu,
    key: &CipherKey,
    attr: &str,
    c: Value,
) -> Result<crate::relops::ResultSet> {
    check_encrypted(lmu)?;
    let enc = crate::relops::select_eq(lmu, attr, key.encrypt_value(c))?;
    let rows = enc
        .rows
        .iter()
        .map(|row| {
            std::iter::once(key.decrypt_u64(row[0] as u64) as Value)
                .chain(row[1..].iter().map(|&v| key.decrypt_value(v)))
                .collect()
        })
        .collect();
    Ok(crate::relops::ResultSet {
        columns: enc.columns,
        rows,
    })
}

pub fn secure_exists_id(lmu: &Lmu, key: &CipherKey, id: u64) -> Result<bool> {
    check_encrypted(lmu)?;
    Ok(lmu.exists_id(key.encrypt_u64(id)))
}

pub fn secure_exists_attrs(lmu: &Lmu, key: &CipherKey, values: &[Value]) -> Result<bool> {
    check_encrypted(lmu)?;
    let enc: Vec<Value> = values.iter().map(|&v| key.encrypt_value(v)).collect();
    lmu.exists_attrs(&enc)
}

/// Projection over ciphertexts with boundary decryption.
pub fn secure_project(
    lmu: &Lmu,
    key: &CipherKey,
    attrs: &[String],
) -> Result<crate::relops::ResultSet> {
    check_encrypted(lmu)?;
    let enc = crate::relops::project(lmu, attrs)?;
    let rows = enc
        .rows
        .iter()
        .map(|row| {
            std::iter::once(key.decrypt_u64(row[0] as u64) as Value)
                .chain(row[1..].iter().map(|&v| key.decrypt_value(v)))
                .collect()
        })
        .collect();
    Ok(crate::relops::ResultSet {
        columns: enc.columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::table::uniform_schema;

    #[test]
    fn cipher_round_trips() {
        let key = CipherKey::from_seed(42);
        let mut rng = SplitMix64::new(7);
        for _ in 0..10_000 {
            let v = rng.next_u64();
            assert_eq!(key.decrypt_u64(key.encrypt_u64(v)), v);
        }
        for v in [0u64, 1, u64::MAX, i64::MAX as u64, i64::MIN as u64] {
            assert_eq!(key.decrypt_u64(key.encrypt_u64(v)), v);
        }
    }

    #[test]
    fn cipher_is_deterministic_and_key_dependent() {
        let a = CipherKey::from_seed(1);
        let b = CipherKey::from_seed(2);
        assert_eq!(a.encrypt_u64(99), a.encrypt_u64(99));
        assert_ne!(a.encrypt_u64(99), b.encrypt_u64(99));
        assert_ne!(a.encrypt_u64(99), 99);
    }

    #[test]
    fn ciphertexts_spread_across_the_space() {
        let key = CipherKey::from_seed(3);
        // Consecutive small plaintexts must not stay clustered.
        let cts: Vec<u64> = (1..=100u64).map(|v| key.encrypt_u64(v)).collect();
        let small = cts.iter().filter(|&&c| c < 1 << 32).count();
        assert!(small < 10, "{small} of 100 ciphertexts stayed small");
    }

    fn sample_table(seed: u64) -> Table {
        let schema = uniform_schema(2, Interval::new(1, 51).unwrap());
        let mut rng = SplitMix64::new(seed);
        let tuples = (1..=30u64)
            .map(|id| Tuple {
                id,
                values: (0..2).map(|_| 1 + rng.next_below(50) as i64).collect(),
            })
            .collect();
        Table::new(schema, tuples).unwrap()
    }

    #[test]
    fn secure_scan_round_trips() {
        let table = sample_table(11);
        let key = CipherKey::from_seed(5);
        let lmu = build_secure_lmu(&table, &key, &LmuConfig::light(1)).unwrap();
        assert_eq!(secure_scan(&lmu, &key).unwrap(), table.tuples);
    }

    #[test]
    fn secure_equality_matches_plain_filter() {
        let table = sample_table(13);
        let key = CipherKey::from_seed(6);
        let lmu = build_secure_lmu(&table, &key, &LmuConfig::light(2)).unwrap();
        let c = table.tuples[0].values[0];
        let got = secure_select_eq(&lmu, &key, "A1", c).unwrap();
        let mut expect: Vec<Vec<Value>> = table
            .tuples
            .iter()
            .filter(|t| t.values[0] == c)
            .map(|t| {
                std::iter::once(t.id as Value)
                    .chain(t.values.iter().copied())
                    .collect()
            })
            .collect();
        expect.sort_unstable();
        assert_eq!(got.sorted_rows(), expect);
    }

    #[test]
    fn secure_existence() {
        let table = sample_table(17);
        let key = CipherKey::from_seed(7);
        let lmu = build_secure_lmu(&table, &key, &LmuConfig::light(3)).unwrap();
        assert!(secure_exists_id(&lmu, &key, 1).unwrap());
        assert!(!secure_exists_id(&lmu, &key, 31).unwrap());
        assert!(secure_exists_attrs(&lmu, &key, &table.tuples[4].values).unwrap());
    }

    #[test]
    fn range_selection_is_refused() {
        let table = sample_table(19);
        let key = CipherKey::from_seed(8);
        let lmu = build_secure_lmu(&table, &key, &LmuConfig::light(4)).unwrap();
        assert!(matches!(
            crate::relops::select_range(&lmu, "A1", 1, 50),
            Err(Error::UnsupportedSecure(_))
        ));
    }

    #[test]
    fn wrong_mode_is_refused() {
        let table = sample_table(23);
        let key = CipherKey::from_seed(9);
        let plain = crate::store::build_lmu(&table, &LmuConfig::light(5)).unwrap();
        assert!(secure_scan(&plain, &key).is_err());
    }
}
